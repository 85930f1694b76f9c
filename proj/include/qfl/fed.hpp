// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "qfl/calib.hpp"
#include "qfl/config.hpp"
#include "qfl/metrics.hpp"
#include "qfl/qsim.hpp"
#include "qfl/train.hpp"
#include "qfl/transpile.hpp"
#include "qfl/vqc.hpp"

namespace qfl {

// Per-client execution-risk score. Component order in the arrays: 2q, 1q,
// readout, T1, T2. `normalized` holds each raw component divided by its
// median across the participating clients (plus the division guard);
// `total` is the weighted sum of the normalized components.
struct NoiseBudget {
  std::array<double, 5> raw{};
  std::array<double, 5> normalized{};
  double total = 0.0;
};

// All stages of the weight stabilization, kept for reporting: the min-max
// normalized budgets, the temperature softmax, the uniform mixture, and the
// floored/renormalized final weights.
struct AggregationWeights {
  std::vector<double> normalized_budget;
  std::vector<double> softmax;
  std::vector<double> mixed;
  std::vector<double> weights;
  double tau = 5.0;
  double beta = 0.2;
  double w_min = 0.05;
};

struct RoundRecord {
  int round = 0;
  Metrics train;
  Metrics test;
  std::vector<Metrics> local;   // per client
  std::vector<double> weights;  // aggregation weights used this round
  double wall_seconds = 0.0;
};

enum class WpqflVariant { Euclidean, Weighted90g10l };

struct WpqflResult {
  ParamVector theta_global;
  std::vector<ParamVector> personalized;  // next-round start per client
  std::vector<double> weights;
};

// Budgets from per-client transpiled statistics and backend averages.
std::vector<NoiseBudget> noise_budgets(std::span<const TranspiledStats> stats,
                                       std::span<const BackendProfile> profiles,
                                       const CompositeWeights& lambda);

// The three-stage stabilized weighting rule: min-max normalize the budgets,
// apply exp(-tau * budget) softmax, mix with uniform weights by beta, floor
// at w_min and renormalize. Equal budgets yield exactly uniform weights.
AggregationWeights qrail_weights(std::span<const double> budgets, double tau, double beta,
                                 double w_min);

AggregationWeights fedavg_weights(int num_clients);

// Baseline personalized update. Euclidean: clients weighted by inverse
// parameter distance to the global model, weighted average of the local
// vectors becomes the next global model. Weighted 90g10l: plain average of
// the locals, and each client restarts from 0.9*global + 0.1*own.
WpqflResult wpqfl_update(const ParamVector& theta_global,
                         const std::vector<ParamVector>& locals, WpqflVariant variant);

// theta' = theta + sum_k w_k * delta_k
ParamVector server_round(const ParamVector& theta, const std::vector<ParamVector>& deltas,
                         std::span<const double> weights);

// Production Runner: transpiles the circuit template onto one backend once,
// derives its noise model, and evaluates class probabilities per sample by
// rebinding rotation angles.
class BackendRunner : public Runner {
 public:
  BackendRunner(const CircuitSpec& spec, const BackendProfile& profile, bool idle_noise);

  ClassProbs probs(std::span<const double> features, const ParamVector& theta, int shots,
                   std::uint64_t seed) const override;

  const TranspiledCircuit& circuit() const { return circuit_; }
  const TranspiledStats& circuit_stats() const { return stats_; }

 private:
  CircuitSpec spec_;
  TranspiledCircuit circuit_;
  TranspiledStats stats_;
  std::unique_ptr<Executor> exec_;
};

// Round-invariant part of a federation run: eligible backends, ranking,
// client assignment, per-client transpiled statistics and budgets.
struct FederationSetup {
  CircuitSpec spec;
  std::vector<BackendProfile> eligible;  // backends with enough qubits
  BackendRanking ranking;
  std::vector<ClientAssignment> assignment;
  std::vector<TranspiledStats> client_stats;
  std::vector<NoiseBudget> budgets;
};

FederationSetup prepare_setup(const FederationConfig& cfg, std::uint64_t seed);

// The dataset pipeline for a config: load (or synthesize), restrict to three
// classes, subsample to the configured sizes, PCA to the qubit count, scale.
std::pair<Dataset, Dataset> prepare_data(const FederationConfig& cfg);

// One full federated run for a single seed: T rounds of broadcast, parallel
// local SPSA training, aggregation by the configured method, and global
// evaluation on the best-ranked backend. Deterministic in (cfg, seed).
std::vector<RoundRecord> run_federation(const FederationConfig& cfg, std::uint64_t seed);

}  // namespace qfl
