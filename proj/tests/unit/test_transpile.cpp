// SPDX-License-Identifier: Apache-2.0
#include <set>

#include "doctest.h"
#include "qfl/rng.hpp"
#include "qfl/transpile.hpp"

using namespace qfl;

namespace {

BackendProfile line_profile(int n, double err2q = 0.01) {
  BackendProfile p;
  p.name = "line" + std::to_string(n);
  p.num_qubits = n;
  for (int i = 0; i + 1 < n; ++i) {
    p.coupling.push_back({i, i + 1});
    p.err_2q.push_back(err2q);
  }
  p.t1_us.assign(n, 100.0);
  p.t2_us.assign(n, 80.0);
  p.readout_error.assign(n, 0.01);
  p.err_1q.assign(n, 3e-4);
  p.gate_time_us = 0.05;
  return p;
}

GateList cx_only(std::initializer_list<std::array<int, 2>> pairs) {
  GateList g;
  for (const auto& p : pairs) g.push_back({GateKind::Cx, p[0], p[1], 0.0, -1});
  return g;
}

Layout identity_layout(int n) {
  Layout l;
  for (int i = 0; i < n; ++i) l.logical_to_physical.push_back(i);
  return l;
}

GateList random_circuit(int qubits, std::uint64_t seed) {
  Rng rng(seed);
  CircuitSpec spec;
  spec.num_qubits = qubits;
  spec.num_layers = 1 + static_cast<int>(rng.below(3));
  spec.topology = static_cast<Topology>(rng.below(3));
  spec.cx_fold = 1 + 2 * static_cast<int>(rng.below(3));
  std::vector<double> x(qubits);
  for (auto& v : x) v = rng.uniform01() * 3.14159;
  ParamVector theta(spec.param_count());
  for (auto& v : theta) v = (rng.uniform01() - 0.5) * 6.28;
  return build_circuit(spec, x, theta);
}

}  // namespace

TEST_CASE("layout on a uniform line is the identity prefix") {
  const auto p = line_profile(5);
  for (int q = 2; q <= 5; ++q) {
    const auto l = select_layout(p, q);
    REQUIRE(l.logical_to_physical.size() == static_cast<std::size_t>(q));
    for (int i = 0; i < q; ++i) CHECK(l.logical_to_physical[i] == i);
  }
}

TEST_CASE("full-width layout is a permutation") {
  const auto p = line_profile(6);
  const auto l = select_layout(p, 6);
  std::set<int> used(l.logical_to_physical.begin(), l.logical_to_physical.end());
  CHECK(used.size() == 6);
}

TEST_CASE("layout seeds with the minimum-error edge") {
  // Star with center 2; edge (2,4) is the cleanest.
  BackendProfile p;
  p.name = "star";
  p.num_qubits = 5;
  p.coupling = {{0, 2}, {1, 2}, {2, 3}, {2, 4}};
  p.err_2q = {0.05, 0.04, 0.03, 0.001};
  p.t1_us.assign(5, 100.0);
  p.t2_us.assign(5, 80.0);
  p.readout_error.assign(5, 0.01);
  p.err_1q.assign(5, 3e-4);
  p.gate_time_us = 0.05;

  const auto l = select_layout(p, 2);
  CHECK(l.logical_to_physical == std::vector<int>{2, 4});
}

TEST_CASE("layout rejects circuits wider than the backend") {
  CHECK_THROWS(select_layout(line_profile(3), 4));
}

TEST_CASE("adjacent gates route without swaps") {
  const auto p = line_profile(3);
  const auto g = cx_only({{0, 1}, {1, 2}});
  const auto t = route(g, identity_layout(3), p);
  CHECK(stats(t).n_2q == 2);
  for (int q = 0; q < 3; ++q) CHECK(t.final_permutation[q] == q);
}

TEST_CASE("distance-2 CX inserts one swap") {
  const auto p = line_profile(3);
  const auto t = route(cx_only({{0, 2}}), identity_layout(3), p);
  CHECK(stats(t).n_2q == 4);  // 3 for the swap + the CX itself
}

TEST_CASE("distance-3 CX inserts two swaps") {
  const auto p = line_profile(4);
  const auto t = route(cx_only({{0, 3}}), identity_layout(4), p);
  CHECK(stats(t).n_2q == 7);
}

TEST_CASE("every routed CX acts on a coupling edge") {
  const auto p = line_profile(5);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto logical = random_circuit(4, seed);
    const auto t = route(logical, select_layout(p, 4), p);
    for (const auto& g : t.gates) {
      if (g.kind == GateKind::Cx) CHECK(p.adjacent(g.q0, g.q1));
    }
    CHECK(stats(t).n_2q >= logical_gate_counts(logical).n_2q);
    CHECK(stats(t).n_meas == logical_gate_counts(logical).n_meas);
  }
}

TEST_CASE("routing is deterministic") {
  const auto p = line_profile(6);
  const auto logical = random_circuit(4, 99);
  const auto t1 = route(logical, select_layout(p, 4), p);
  const auto t2 = route(logical, select_layout(p, 4), p);
  REQUIRE(t1.gates.size() == t2.gates.size());
  for (std::size_t i = 0; i < t1.gates.size(); ++i) {
    CHECK(t1.gates[i].kind == t2.gates[i].kind);
    CHECK(t1.gates[i].q0 == t2.gates[i].q0);
    CHECK(t1.gates[i].q1 == t2.gates[i].q1);
  }
}

TEST_CASE("depth layering rules") {
  TranspiledCircuit t;
  t.num_physical = 4;
  t.layout = identity_layout(4);
  t.final_permutation = {0, 1, 2, 3};

  t.gates = cx_only({{0, 1}, {2, 3}});
  CHECK(stats(t).depth == 1);  // disjoint supports share a layer

  t.gates = cx_only({{0, 1}, {1, 2}});
  CHECK(stats(t).depth == 2);  // shared qubit serializes
}

TEST_CASE("barriers split folded entanglers into separate layers") {
  CircuitSpec spec;
  spec.num_qubits = 2;
  spec.num_layers = 1;
  spec.cx_fold = 3;
  const std::vector<double> x(2, 0.0);
  const ParamVector theta(4, 0.0);
  const auto p = line_profile(2);
  const auto t = route(build_circuit(spec, x, theta), identity_layout(2), p);
  // 2 encode + 2 layer rotations per qubit = 4 layers, then 3 CX layers, then measures.
  CHECK(stats(t).depth == 4 + 3 + 1);
  CHECK(stats(t).n_2q == 3);
}

TEST_CASE("identity routing has unit fidelity") {
  const auto p = line_profile(4);
  const auto logical = random_circuit(4, 7);
  const auto t = route(logical, identity_layout(4), p);
  CHECK(verify_equivalence(logical, t) >= 1.0 - 1e-9);
}

TEST_CASE("routing with swaps preserves the state up to relabeling") {
  const auto p = line_profile(3);
  GateList logical;
  Rng rng(21);
  for (int q = 0; q < 3; ++q) {
    logical.push_back({GateKind::Ry, q, -1, rng.uniform01() * 3.0, -1});
    logical.push_back({GateKind::Rz, q, -1, rng.uniform01() * 3.0, -1});
  }
  logical.push_back({GateKind::Cx, 0, 2, 0.0, -1});
  logical.push_back({GateKind::Ry, 1, -1, 0.7, -1});
  const auto t = route(logical, identity_layout(3), p);
  CHECK(verify_equivalence(logical, t) >= 1.0 - 1e-9);
}

TEST_CASE("a corrupted permutation is detected by the fidelity oracle") {
  const auto p = line_profile(3);
  GateList logical;
  Rng rng(22);
  for (int q = 0; q < 3; ++q) logical.push_back({GateKind::Ry, q, -1, 0.4 + 0.3 * q, -1});
  logical.push_back({GateKind::Cx, 0, 2, 0.0, -1});
  auto t = route(logical, identity_layout(3), p);
  std::swap(t.final_permutation[0], t.final_permutation[2]);
  CHECK(verify_equivalence(logical, t) < 0.999);
}

TEST_CASE("fidelity holds across 100 random circuits") {
  const auto backends = {line_profile(4), line_profile(6)};
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    for (const auto& p : backends) {
      const auto logical = random_circuit(4, seed * 31 + 5);
      const auto t = route(logical, select_layout(p, 4), p);
      CHECK(verify_equivalence(logical, t) >= 1.0 - 1e-9);
      ++checked;
    }
  }
  CHECK(checked == 100);
}

TEST_CASE("fold strictly grows routed two-qubit count and depth") {
  const auto p = line_profile(5);
  const std::vector<double> x(4, 0.3);
  for (const auto topo : {Topology::Linear, Topology::Ring, Topology::Full}) {
    int prev_2q = -1, prev_depth = -1;
    for (const int fold : {1, 3, 5, 9}) {
      CircuitSpec spec;
      spec.num_qubits = 4;
      spec.num_layers = 2;
      spec.topology = topo;
      spec.cx_fold = fold;
      const ParamVector theta(spec.param_count(), 0.1);
      const auto t = route(build_circuit(spec, x, theta), select_layout(p, 4), p);
      const auto s = stats(t);
      CHECK(s.n_2q > prev_2q);
      CHECK(s.depth > prev_depth);
      prev_2q = s.n_2q;
      prev_depth = s.depth;
    }
  }
}
