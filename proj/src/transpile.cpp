// SPDX-License-Identifier: Apache-2.0
#include "qfl/transpile.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <set>
#include <stdexcept>

#include "qfl/statevector.hpp"

namespace qfl {

namespace {

std::vector<std::vector<int>> adjacency(const BackendProfile& p) {
  std::vector<std::vector<int>> adj(p.num_qubits);
  for (const auto& e : p.coupling) {
    adj[e[0]].push_back(e[1]);
    adj[e[1]].push_back(e[0]);
  }
  for (auto& nbrs : adj) std::sort(nbrs.begin(), nbrs.end());
  return adj;
}

// BFS distances from `source` over the coupling graph.
std::vector<int> bfs_distances(const std::vector<std::vector<int>>& adj, int source) {
  std::vector<int> dist(adj.size(), -1);
  std::queue<int> q;
  dist[source] = 0;
  q.push(source);
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    for (int v : adj[u]) {
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        q.push(v);
      }
    }
  }
  return dist;
}

}  // namespace

Layout select_layout(const BackendProfile& profile, int num_logical) {
  if (num_logical < 1) throw std::invalid_argument("select_layout: need at least one qubit");
  if (num_logical > profile.num_qubits)
    throw std::invalid_argument("select_layout: circuit needs " + std::to_string(num_logical) +
                                " qubits but backend '" + profile.name + "' has " +
                                std::to_string(profile.num_qubits));
  if (!profile.connected())
    throw std::invalid_argument("select_layout: coupling graph of '" + profile.name +
                                "' is not connected");

  // Seed edge: minimum err_2q, lexicographic tie-break on the (i,j) pair.
  std::size_t seed = 0;
  for (std::size_t i = 1; i < profile.coupling.size(); ++i) {
    const bool better = profile.err_2q[i] < profile.err_2q[seed] ||
                        (profile.err_2q[i] == profile.err_2q[seed] &&
                         profile.coupling[i] < profile.coupling[seed]);
    if (better) seed = i;
  }

  std::vector<int> chosen;
  std::vector<char> in_set(profile.num_qubits, 0);
  auto add = [&](int q) {
    chosen.push_back(q);
    in_set[q] = 1;
  };
  add(profile.coupling[seed][0]);
  if (num_logical > 1) add(profile.coupling[seed][1]);

  while (static_cast<int>(chosen.size()) < num_logical) {
    double best_err = std::numeric_limits<double>::infinity();
    std::array<int, 2> best_edge{-1, -1};
    int best_nbr = -1;
    for (std::size_t i = 0; i < profile.coupling.size(); ++i) {
      const int a = profile.coupling[i][0];
      const int b = profile.coupling[i][1];
      if (in_set[a] == in_set[b]) continue;  // frontier edges only
      const int nbr = in_set[a] ? b : a;
      const bool better =
          profile.err_2q[i] < best_err ||
          (profile.err_2q[i] == best_err && profile.coupling[i] < best_edge);
      if (better) {
        best_err = profile.err_2q[i];
        best_edge = profile.coupling[i];
        best_nbr = nbr;
      }
    }
    if (best_nbr < 0)
      throw std::invalid_argument("select_layout: coupling graph of '" + profile.name +
                                  "' is not connected");
    add(best_nbr);
  }

  Layout layout;
  layout.logical_to_physical.assign(chosen.begin(), chosen.begin() + num_logical);
  return layout;
}

TranspiledCircuit route(const GateList& gates, const Layout& layout,
                        const BackendProfile& profile) {
  if (!profile.connected())
    throw std::invalid_argument("route: coupling graph of '" + profile.name +
                                "' is not connected");
  const auto adj = adjacency(profile);

  // pos[p] = logical qubit currently at physical p, -1 if unoccupied.
  std::vector<int> pos(profile.num_qubits, -1);
  std::vector<int> phys(layout.logical_to_physical);
  for (std::size_t l = 0; l < phys.size(); ++l) {
    const int p = phys[l];
    if (p < 0 || p >= profile.num_qubits || pos[p] != -1)
      throw std::invalid_argument("route: layout is not injective into the backend");
    pos[p] = static_cast<int>(l);
  }

  TranspiledCircuit out;
  out.layout = layout;
  out.num_physical = profile.num_qubits;

  auto emit_swap = [&](int a, int b) {
    out.gates.push_back({GateKind::Cx, a, b, 0.0, -1});
    out.gates.push_back({GateKind::Cx, b, a, 0.0, -1});
    out.gates.push_back({GateKind::Cx, a, b, 0.0, -1});
    std::swap(pos[a], pos[b]);
    if (pos[a] >= 0) phys[pos[a]] = a;
    if (pos[b] >= 0) phys[pos[b]] = b;
  };

  for (const auto& g : gates) {
    switch (g.kind) {
      case GateKind::Ry:
      case GateKind::Rz:
        out.gates.push_back({g.kind, phys[g.q0], -1, g.angle, g.slot});
        break;
      case GateKind::Barrier:
        out.gates.push_back(g);
        break;
      case GateKind::Measure:
        out.gates.push_back({GateKind::Measure, phys[g.q0], g.q1, 0.0, -1});
        break;
      case GateKind::Cx: {
        // Walk the control toward the target until they share a coupling edge.
        while (!profile.adjacent(phys[g.q0], phys[g.q1])) {
          const auto dist = bfs_distances(adj, phys[g.q1]);
          const int c = phys[g.q0];
          int step = -1;
          for (int nbr : adj[c]) {
            if (dist[nbr] < 0) continue;
            if (step < 0 || dist[nbr] < dist[step]) step = nbr;  // adj is sorted, ties -> lowest
          }
          if (step < 0 || dist[c] < 0)
            throw std::invalid_argument("route: no path between CX endpoints");
          emit_swap(c, step);
        }
        out.gates.push_back({GateKind::Cx, phys[g.q0], phys[g.q1], 0.0, -1});
        break;
      }
    }
  }

  out.final_permutation = pos;
  return out;
}

TranspiledStats stats(const TranspiledCircuit& t) {
  TranspiledStats s;
  std::vector<int> level(t.num_physical, 0);
  for (const auto& g : t.gates) {
    switch (g.kind) {
      case GateKind::Ry:
      case GateKind::Rz: {
        ++s.n_1q;
        level[g.q0] += 1;
        break;
      }
      case GateKind::Cx: {
        ++s.n_2q;
        const int l = std::max(level[g.q0], level[g.q1]) + 1;
        level[g.q0] = l;
        level[g.q1] = l;
        break;
      }
      case GateKind::Measure: {
        ++s.n_meas;
        level[g.q0] += 1;
        break;
      }
      case GateKind::Barrier: {
        const int l = *std::max_element(level.begin(), level.end());
        std::fill(level.begin(), level.end(), l);
        break;
      }
    }
  }
  s.depth = *std::max_element(level.begin(), level.end());
  return s;
}

double verify_equivalence(const GateList& logical, const TranspiledCircuit& t) {
  int num_logical = 0;
  for (const auto& g : logical) {
    if (g.kind == GateKind::Ry || g.kind == GateKind::Rz)
      num_logical = std::max(num_logical, g.q0 + 1);
    else if (g.kind == GateKind::Cx)
      num_logical = std::max(num_logical, std::max(g.q0, g.q1) + 1);
  }
  num_logical = std::max(num_logical,
                         static_cast<int>(t.layout.logical_to_physical.size()));
  if (num_logical > 10)
    throw std::invalid_argument("verify_equivalence: too many qubits for dense verification");

  Statevector psi_l(num_logical);
  for (const auto& g : logical) {
    switch (g.kind) {
      case GateKind::Ry: psi_l.apply_ry(g.q0, g.angle); break;
      case GateKind::Rz: psi_l.apply_rz(g.q0, g.angle); break;
      case GateKind::Cx: psi_l.apply_cx(g.q0, g.q1); break;
      default: break;
    }
  }

  // Compact the physical qubits actually touched (plus the layout image).
  std::set<int> used(t.layout.logical_to_physical.begin(), t.layout.logical_to_physical.end());
  for (const auto& g : t.gates) {
    if (g.kind == GateKind::Ry || g.kind == GateKind::Rz || g.kind == GateKind::Measure)
      used.insert(g.q0);
    else if (g.kind == GateKind::Cx) {
      used.insert(g.q0);
      used.insert(g.q1);
    }
  }
  std::vector<int> compact(t.num_physical, -1);
  int nc = 0;
  for (int p : used) compact[p] = nc++;
  if (nc > 22) throw std::invalid_argument("verify_equivalence: routed circuit too wide");

  Statevector psi_r(nc);
  for (const auto& g : t.gates) {
    switch (g.kind) {
      case GateKind::Ry: psi_r.apply_ry(compact[g.q0], g.angle); break;
      case GateKind::Rz: psi_r.apply_rz(compact[g.q0], g.angle); break;
      case GateKind::Cx: psi_r.apply_cx(compact[g.q0], compact[g.q1]); break;
      default: break;
    }
  }

  // Physical bit position of each logical qubit after routing.
  std::vector<int> logical_bit(num_logical, -1);
  for (int p = 0; p < t.num_physical; ++p) {
    const int l = t.final_permutation[p];
    if (l >= 0) {
      if (l >= num_logical || logical_bit[l] != -1)
        throw std::invalid_argument("verify_equivalence: final permutation is not a bijection");
      logical_bit[l] = compact[p];
    }
  }
  for (int l = 0; l < static_cast<int>(t.layout.logical_to_physical.size()); ++l) {
    if (logical_bit[l] < 0)
      throw std::invalid_argument("verify_equivalence: logical qubit missing from permutation");
  }

  std::complex<double> overlap{0.0, 0.0};
  const auto& al = psi_l.amplitudes();
  const auto& ar = psi_r.amplitudes();
  for (std::size_t z = 0; z < al.size(); ++z) {
    std::size_t idx = 0;
    for (int l = 0; l < num_logical; ++l) {
      if ((z >> l) & 1U) idx |= std::size_t{1} << logical_bit[l];
    }
    overlap += std::conj(al[z]) * ar[idx];
  }
  return std::norm(overlap);
}

}  // namespace qfl
