// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qfl/calib.hpp"
#include "qfl/transpile.hpp"

namespace qfl {

// Stochastic-Pauli noise model derived from a calibration profile: a
// depolarizing event after every gate, a readout bit flip at measurement, and
// an optional idle (amplitude/phase flip) channel applied once before
// measurement whose strength grows with transpiled depth.
struct NoiseModel {
  std::vector<double> p_1q;                  // per physical qubit
  std::vector<double> p_ro;                  // per physical qubit
  std::vector<std::array<int, 2>> edges;     // coupling edges, i < j
  std::vector<double> p_2q;                  // aligned with edges
  bool idle_enabled = false;
  std::vector<double> p_amp;                 // per physical qubit (idle model)
  std::vector<double> p_phase;

  static NoiseModel from_profile(const BackendProfile& p, bool idle = false, int depth = 0);
  static NoiseModel noiseless(int num_qubits);

  double edge_prob(int a, int b) const;
  bool is_noiseless() const;
};

// Shot counts over the two measured classical bits. Outcome index is
// c0*2 + c1, i.e. classical bit 0 is the leftmost character of the
// bitstring keys "00", "01", "10", "11".
struct ShotCounts {
  std::array<std::uint64_t, 4> counts{};
  std::uint64_t total = 0;

  static const char* key(int index);  // "00".."11"
};

using ClassProbs = std::array<double, 3>;

// Precompiled shot executor for one (transpiled circuit, noise model) pair.
// Physical indices are compacted to the qubits the circuit actually touches;
// rotation angles can be rebound per sample through the slot vector, so one
// executor serves every (x, theta) evaluation on its backend.
//
// Draw order per shot (contract "qfl-rng-v1"): for each gate in sequence, one
// uniform draw for the error event and, if it fires, one integer draw for the
// Pauli; then, if the idle model is on, per qubit one draw for the X flip and
// one for the Z flip; then one uniform draw to sample the outcome and one
// uniform draw per measured bit for the readout flip. When every error
// probability is zero the final distribution is computed once and each shot
// takes a single uniform draw.
class Executor {
 public:
  Executor(const TranspiledCircuit& t, const NoiseModel& nm, bool check_norms = false);

  // Runs with the angles baked into the circuit.
  ShotCounts run(std::uint64_t shots, std::uint64_t seed) const;
  // Runs with rotation angles taken from `bind` wherever a gate carries a slot.
  ShotCounts run_bound(std::span<const double> bind, std::uint64_t shots,
                       std::uint64_t seed) const;

  // Exact outcome distribution of the noiseless circuit (4 entries).
  std::array<double, 4> exact_distribution(std::span<const double> bind) const;

  int num_compact_qubits() const { return nq_; }
  bool noiseless() const { return noiseless_; }

 private:
  struct Op {
    GateKind kind;
    int a = -1;
    int b = -1;
    double angle = 0.0;
    int slot = -1;
    double p_err = 0.0;
  };
  struct Meas {
    int qubit;
    int cbit;
    double p_ro;
  };

  int nq_ = 0;
  bool noiseless_ = true;
  bool check_norms_ = false;
  std::vector<Op> ops_;
  std::vector<Meas> meas_;
  std::vector<double> idle_amp_;    // per compact qubit; empty when idle off
  std::vector<double> idle_phase_;
};

// One-call interface used by the spec-level contract and the tests.
ShotCounts run_shots(const TranspiledCircuit& t, const NoiseModel& nm, std::uint64_t shots,
                     std::uint64_t seed);

// Class probabilities over labels {0,1,2} from the bitstrings 00, 01, 10;
// counts of "11" are discarded and the rest renormalized. All-"11" returns
// the uniform distribution.
ClassProbs class_probs(const ShotCounts& c);

}  // namespace qfl
