// SPDX-License-Identifier: Apache-2.0
#include "qfl/qsim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qfl/rng.hpp"
#include "qfl/statevector.hpp"

namespace qfl {

NoiseModel NoiseModel::from_profile(const BackendProfile& p, bool idle, int depth) {
  NoiseModel nm;
  nm.p_1q = p.err_1q;
  nm.p_ro = p.readout_error;
  nm.edges = p.coupling;
  nm.p_2q = p.err_2q;
  nm.idle_enabled = idle;
  if (idle) {
    nm.p_amp.resize(p.t1_us.size());
    nm.p_phase.resize(p.t2_us.size());
    for (std::size_t q = 0; q < p.t1_us.size(); ++q) {
      nm.p_amp[q] = std::clamp(1.0 - std::exp(-depth * p.gate_time_us / p.t1_us[q]), 0.0, 1.0);
      nm.p_phase[q] = std::clamp(1.0 - std::exp(-depth * p.gate_time_us / p.t2_us[q]), 0.0, 1.0);
    }
  }
  return nm;
}

NoiseModel NoiseModel::noiseless(int num_qubits) {
  NoiseModel nm;
  nm.p_1q.assign(num_qubits, 0.0);
  nm.p_ro.assign(num_qubits, 0.0);
  return nm;
}

double NoiseModel::edge_prob(int a, int b) const {
  const int lo = std::min(a, b);
  const int hi = std::max(a, b);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (edges[i][0] == lo && edges[i][1] == hi) return p_2q[i];
  }
  return 0.0;  // edge not characterized: treat as ideal
}

bool NoiseModel::is_noiseless() const {
  auto all_zero = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
  };
  if (!all_zero(p_1q) || !all_zero(p_ro) || !all_zero(p_2q)) return false;
  if (idle_enabled && (!all_zero(p_amp) || !all_zero(p_phase))) return false;
  return true;
}

const char* ShotCounts::key(int index) {
  static const char* keys[4] = {"00", "01", "10", "11"};
  return keys[index & 3];
}

Executor::Executor(const TranspiledCircuit& t, const NoiseModel& nm, bool check_norms)
    : check_norms_(check_norms) {
  // Compact physical indices to the touched qubits.
  std::vector<int> compact(std::max(t.num_physical, 1), -1);
  auto touch = [&](int p) {
    if (p < 0 || p >= static_cast<int>(compact.size()))
      throw std::invalid_argument("Executor: gate references qubit outside the backend");
    if (compact[p] < 0) compact[p] = nq_++;
    return compact[p];
  };

  for (const auto& g : t.gates) {
    switch (g.kind) {
      case GateKind::Ry:
      case GateKind::Rz: {
        const int q = touch(g.q0);
        const double p = g.q0 < static_cast<int>(nm.p_1q.size()) ? nm.p_1q[g.q0] : 0.0;
        ops_.push_back({g.kind, q, -1, g.angle, g.slot, p});
        break;
      }
      case GateKind::Cx: {
        const int a = touch(g.q0);
        const int b = touch(g.q1);
        ops_.push_back({GateKind::Cx, a, b, 0.0, -1, nm.edge_prob(g.q0, g.q1)});
        break;
      }
      case GateKind::Measure: {
        if (g.q1 < 0 || g.q1 > 1)
          throw std::invalid_argument("Executor: only classical bits 0 and 1 are supported");
        const int q = touch(g.q0);
        const double p = g.q0 < static_cast<int>(nm.p_ro.size()) ? nm.p_ro[g.q0] : 0.0;
        meas_.push_back({q, g.q1, p});
        break;
      }
      case GateKind::Barrier:
        break;  // scheduling marker only; no runtime effect
    }
  }
  if (nq_ == 0) nq_ = 1;
  if (nq_ > 20) throw std::invalid_argument("Executor: circuit exceeds the 20-qubit bound");

  if (nm.idle_enabled) {
    idle_amp_.assign(nq_, 0.0);
    idle_phase_.assign(nq_, 0.0);
    for (int p = 0; p < static_cast<int>(compact.size()); ++p) {
      if (compact[p] >= 0) {
        idle_amp_[compact[p]] = p < static_cast<int>(nm.p_amp.size()) ? nm.p_amp[p] : 0.0;
        idle_phase_[compact[p]] = p < static_cast<int>(nm.p_phase.size()) ? nm.p_phase[p] : 0.0;
      }
    }
  }

  noiseless_ = std::all_of(ops_.begin(), ops_.end(), [](const Op& o) { return o.p_err == 0.0; }) &&
               std::all_of(meas_.begin(), meas_.end(), [](const Meas& m) { return m.p_ro == 0.0; }) &&
               std::all_of(idle_amp_.begin(), idle_amp_.end(), [](double p) { return p == 0.0; }) &&
               std::all_of(idle_phase_.begin(), idle_phase_.end(), [](double p) { return p == 0.0; });
}

namespace {

struct PreparedOp {
  GateKind kind;
  int a;
  int b;
  double c = 0.0, s = 0.0;                      // Ry
  std::complex<double> e0{1, 0}, e1{1, 0};      // Rz
  double p_err;
};

void apply_pauli(Statevector& sv, int q, int which) {
  switch (which) {
    case 1: sv.apply_x(q); break;
    case 2: sv.apply_y(q); break;
    case 3: sv.apply_z(q); break;
    default: break;
  }
}

}  // namespace

std::array<double, 4> Executor::exact_distribution(std::span<const double> bind) const {
  Statevector sv(nq_);
  for (const auto& op : ops_) {
    const double angle =
        (op.slot >= 0 && op.slot < static_cast<int>(bind.size())) ? bind[op.slot] : op.angle;
    switch (op.kind) {
      case GateKind::Ry: sv.apply_ry(op.a, angle); break;
      case GateKind::Rz: sv.apply_rz(op.a, angle); break;
      case GateKind::Cx: sv.apply_cx(op.a, op.b); break;
      default: break;
    }
  }
  std::array<double, 4> dist{};
  const auto& amp = sv.amplitudes();
  for (std::size_t z = 0; z < amp.size(); ++z) {
    int idx = 0;
    for (const auto& m : meas_) idx |= static_cast<int>((z >> m.qubit) & 1U) << (1 - m.cbit);
    dist[idx] += std::norm(amp[z]);
  }
  return dist;
}

ShotCounts Executor::run_bound(std::span<const double> bind, std::uint64_t shots,
                               std::uint64_t seed) const {
  if (shots == 0) throw std::invalid_argument("run_shots: shots must be positive");
  ShotCounts out;
  out.total = shots;
  Rng rng(seed);

  if (noiseless_) {
    const auto dist = exact_distribution(bind);
    for (std::uint64_t s = 0; s < shots; ++s) {
      const double u = rng.uniform01();
      double cum = 0.0;
      int idx = 3;
      for (int i = 0; i < 4; ++i) {
        cum += dist[i];
        if (u < cum) {
          idx = i;
          break;
        }
      }
      ++out.counts[idx];
    }
    return out;
  }

  // Bake angles once; they are shared by every shot.
  std::vector<PreparedOp> prepared;
  prepared.reserve(ops_.size());
  for (const auto& op : ops_) {
    const double angle =
        (op.slot >= 0 && op.slot < static_cast<int>(bind.size())) ? bind[op.slot] : op.angle;
    PreparedOp p{op.kind, op.a, op.b, 0.0, 0.0, {1, 0}, {1, 0}, op.p_err};
    if (op.kind == GateKind::Ry) {
      p.c = std::cos(0.5 * angle);
      p.s = std::sin(0.5 * angle);
    } else if (op.kind == GateKind::Rz) {
      p.e0 = std::polar(1.0, -0.5 * angle);
      p.e1 = std::polar(1.0, +0.5 * angle);
    }
    prepared.push_back(p);
  }

  Statevector sv(nq_);
  for (std::uint64_t s = 0; s < shots; ++s) {
    sv.reset();
    for (const auto& op : prepared) {
      switch (op.kind) {
        case GateKind::Ry: {
          sv.apply_ry_cs(op.a, op.c, op.s);
          if (rng.uniform01() < op.p_err)
            apply_pauli(sv, op.a, 1 + static_cast<int>(rng.below(3)));
          break;
        }
        case GateKind::Rz: {
          sv.apply_rz_phases(op.a, op.e0, op.e1);
          if (rng.uniform01() < op.p_err)
            apply_pauli(sv, op.a, 1 + static_cast<int>(rng.below(3)));
          break;
        }
        case GateKind::Cx: {
          sv.apply_cx(op.a, op.b);
          if (rng.uniform01() < op.p_err) {
            const int k = 1 + static_cast<int>(rng.below(15));  // skip identity x identity
            apply_pauli(sv, op.a, k / 4);
            apply_pauli(sv, op.b, k % 4);
          }
          break;
        }
        default: break;
      }
      if (check_norms_ && std::abs(sv.norm_sq() - 1.0) > 1e-10)
        throw std::runtime_error("Executor: statevector norm drifted beyond 1e-10");
    }
    if (!idle_amp_.empty()) {
      for (int q = 0; q < nq_; ++q) {
        if (rng.uniform01() < idle_amp_[q]) sv.apply_x(q);
        if (rng.uniform01() < idle_phase_[q]) sv.apply_z(q);
      }
    }
    const std::size_t outcome = sv.sample(rng.uniform01());
    int idx = 0;
    for (const auto& m : meas_) {
      int bit = static_cast<int>((outcome >> m.qubit) & 1U);
      if (rng.uniform01() < m.p_ro) bit ^= 1;
      idx |= bit << (1 - m.cbit);
    }
    ++out.counts[idx];
  }
  return out;
}

ShotCounts Executor::run(std::uint64_t shots, std::uint64_t seed) const {
  return run_bound({}, shots, seed);
}

ShotCounts run_shots(const TranspiledCircuit& t, const NoiseModel& nm, std::uint64_t shots,
                     std::uint64_t seed) {
  return Executor(t, nm).run(shots, seed);
}

ClassProbs class_probs(const ShotCounts& c) {
  if (c.total == 0) throw std::invalid_argument("class_probs: zero total shots");
  const std::uint64_t valid = c.total - c.counts[3];
  if (valid == 0) return {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  return {static_cast<double>(c.counts[0]) / static_cast<double>(valid),
          static_cast<double>(c.counts[1]) / static_cast<double>(valid),
          static_cast<double>(c.counts[2]) / static_cast<double>(valid)};
}

}  // namespace qfl
