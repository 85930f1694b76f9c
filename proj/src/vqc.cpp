// SPDX-License-Identifier: Apache-2.0
#include "qfl/vqc.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

namespace qfl {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

Topology topology_from_string(const std::string& s) {
  if (s == "linear") return Topology::Linear;
  if (s == "ring") return Topology::Ring;
  if (s == "full") return Topology::Full;
  throw std::invalid_argument("unknown topology: " + s);
}

std::string to_string(Topology t) {
  switch (t) {
    case Topology::Linear: return "linear";
    case Topology::Ring: return "ring";
    case Topology::Full: return "full";
  }
  return "linear";
}

void CircuitSpec::validate() const {
  if (num_qubits < 2) throw std::invalid_argument("circuit needs at least 2 qubits");
  if (num_layers < 1) throw std::invalid_argument("num_layers must be positive");
  if (cx_fold < 1 || cx_fold % 2 == 0)
    throw std::invalid_argument("cx_fold must be an odd positive integer");
  if (measured_qubits[0] == measured_qubits[1])
    throw std::invalid_argument("measured qubits must be distinct");
  for (int q : measured_qubits) {
    if (q < 0 || q >= num_qubits) throw std::invalid_argument("measured qubit out of range");
  }
}

std::vector<std::array<int, 2>> entangle_pairs(Topology topology, int num_qubits) {
  if (num_qubits < 2) throw std::invalid_argument("entangle_pairs: need at least 2 qubits");
  std::vector<std::array<int, 2>> pairs;
  switch (topology) {
    case Topology::Linear:
      for (int i = 0; i + 1 < num_qubits; ++i) pairs.push_back({i, i + 1});
      break;
    case Topology::Ring:
      for (int i = 0; i + 1 < num_qubits; ++i) pairs.push_back({i, i + 1});
      pairs.push_back({num_qubits - 1, 0});
      break;
    case Topology::Full:
      for (int i = 0; i < num_qubits; ++i)
        for (int j = i + 1; j < num_qubits; ++j) pairs.push_back({i, j});
      break;
  }
  return pairs;
}

GateList build_circuit(const CircuitSpec& spec, std::span<const double> features,
                       const ParamVector& theta) {
  spec.validate();
  const int q_count = spec.num_qubits;
  if (static_cast<int>(features.size()) != q_count)
    throw std::invalid_argument("feature vector length must equal the qubit count");
  if (static_cast<int>(theta.size()) != spec.param_count())
    throw std::invalid_argument("parameter vector must have length 2*Q*L");

  for (int j = 0; j < q_count; ++j) {
    if (features[j] < 0.0 || features[j] > kPi)
      std::cerr << "warning: feature " << j << " = " << features[j] << " outside [0, pi]\n";
  }

  GateList gates;
  // Encoding: RY(x_j), RZ(x_j) per qubit. Both share the feature slot j.
  for (int j = 0; j < q_count; ++j) {
    gates.push_back({GateKind::Ry, j, -1, features[j], j});
    gates.push_back({GateKind::Rz, j, -1, features[j], j});
  }

  const auto pairs = entangle_pairs(spec.topology, q_count);
  for (int layer = 0; layer < spec.num_layers; ++layer) {
    const int base = 2 * q_count * layer;
    for (int j = 0; j < q_count; ++j) {
      const int iy = base + 2 * j;      // theta_{l, 2j+1} in 1-based subscripts
      const int iz = base + 2 * j + 1;  // theta_{l, 2j+2}
      gates.push_back({GateKind::Ry, j, -1, theta[iy], q_count + iy});
      gates.push_back({GateKind::Rz, j, -1, theta[iz], q_count + iz});
    }
    for (const auto& pair : pairs) {
      for (int rep = 0; rep < spec.cx_fold; ++rep) {
        if (rep > 0) gates.push_back({GateKind::Barrier, -1, -1, 0.0, -1});
        gates.push_back({GateKind::Cx, pair[0], pair[1], 0.0, -1});
      }
    }
  }

  gates.push_back({GateKind::Measure, spec.measured_qubits[0], 0, 0.0, -1});
  gates.push_back({GateKind::Measure, spec.measured_qubits[1], 1, 0.0, -1});
  return gates;
}

LogicalCounts logical_gate_counts(const GateList& gates) {
  LogicalCounts c;
  for (const auto& g : gates) {
    switch (g.kind) {
      case GateKind::Ry:
      case GateKind::Rz: ++c.n_1q; break;
      case GateKind::Cx: ++c.n_2q; break;
      case GateKind::Measure: ++c.n_meas; break;
      case GateKind::Barrier: break;
    }
  }
  return c;
}

}  // namespace qfl
