// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace qfl {

enum class Topology { Linear, Ring, Full };

Topology topology_from_string(const std::string& s);
std::string to_string(Topology t);

// Logical description of the shared variational classifier: Q qubits, L
// rotation layers, an entangling block per layer, and a two-qubit readout.
struct CircuitSpec {
  int num_qubits = 4;
  int num_layers = 4;
  Topology topology = Topology::Linear;
  int cx_fold = 1;  // odd; each entangling gate is repeated this many times
  std::array<int, 2> measured_qubits{0, 1};

  int param_count() const { return 2 * num_qubits * num_layers; }
  // Length of the flat angle-slot vector: Q feature slots then 2QL parameter slots.
  int slot_count() const { return num_qubits + param_count(); }
  void validate() const;
};

enum class GateKind : std::uint8_t { Ry, Rz, Cx, Barrier, Measure };

// One gate. For rotations q0 is the target; for CX q0/q1 are control/target;
// for Measure q0 is the qubit and q1 the classical bit. Barriers span all
// qubits and carry no operands. `slot` indexes the flat angle vector
// (features first, then trainable parameters); -1 means the angle is fixed.
struct Gate {
  GateKind kind = GateKind::Barrier;
  int q0 = -1;
  int q1 = -1;
  double angle = 0.0;
  int slot = -1;
};

using GateList = std::vector<Gate>;
using ParamVector = std::vector<double>;

struct LogicalCounts {
  int n_1q = 0;
  int n_2q = 0;
  int n_meas = 0;
};

// Entangling pairs for a topology: linear chains i->i+1, ring closes the
// chain, full is all i<j pairs in lexicographic order.
std::vector<std::array<int, 2>> entangle_pairs(Topology topology, int num_qubits);

// Builds the gate sequence for one sample: angle encoding (RY, RZ per qubit),
// then per layer the rotation pairs followed by the entangling block with CX
// folding (barriers between consecutive repetitions of a pair), then the two
// measurements. Features outside [0, pi] warn on stderr but are accepted.
GateList build_circuit(const CircuitSpec& spec, std::span<const double> features,
                       const ParamVector& theta);

LogicalCounts logical_gate_counts(const GateList& gates);

}  // namespace qfl
