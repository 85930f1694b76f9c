// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "qfl/calib.hpp"
#include "qfl/vqc.hpp"

namespace qfl {

struct Layout {
  std::vector<int> logical_to_physical;  // injective, indices into the backend
};

// A circuit routed onto a backend: all CX gates act on coupling edges, SWAPs
// are already expanded to 3 CX each, and measurements target the physical
// qubits that hold the logical data at the end.
struct TranspiledCircuit {
  GateList gates;  // physical indices
  Layout layout;
  std::vector<int> final_permutation;  // physical -> logical, -1 if unoccupied
  int num_physical = 0;
};

struct TranspiledStats {
  int depth = 0;
  int n_1q = 0;
  int n_2q = 0;
  int n_meas = 0;
};

// Deterministic greedy layout: seed with the minimum-error coupling edge
// (lexicographic tie-break), then repeatedly absorb the neighbor reachable
// through the lowest-error frontier edge until enough physical qubits are
// chosen. Logical qubit i maps to the i-th chosen physical qubit.
Layout select_layout(const BackendProfile& profile, int num_logical);

// Routes a logical gate list onto the backend. Non-adjacent CX endpoints are
// resolved by moving the control along a BFS shortest path toward the target
// (ties to the lowest-index neighbor), one SWAP (= 3 CX) per step. No un-SWAPs
// are emitted; measurements are remapped through the tracked permutation.
// Noiseless semantics are preserved up to that final relabeling.
TranspiledCircuit route(const GateList& gates, const Layout& layout,
                        const BackendProfile& profile);

// Gate counts plus critical-path depth under greedy ASAP layering. A gate
// occupies one layer on each qubit it touches; barriers force a layer
// boundary across all qubits; measurements count toward depth.
TranspiledStats stats(const TranspiledCircuit& t);

// Dense statevector check that routing preserved the circuit's semantics:
// |<psi_logical | P(psi_routed)>|^2 with P undoing the final permutation.
// Returns 1 up to numerical tolerance for a correct routing. Only feasible
// for small circuits (<= 10 logical qubits).
double verify_equivalence(const GateList& logical, const TranspiledCircuit& t);

}  // namespace qfl
