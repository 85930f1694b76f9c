// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "qfl/data.hpp"
#include "qfl/metrics.hpp"
#include "qfl/qsim.hpp"
#include "qfl/vqc.hpp"

namespace qfl {

struct SpsaConfig {
  double a0 = 0.2;
  double c0 = 0.1;
  double alpha = 0.602;
  double gamma = 0.101;
  int local_steps = 5;
  int batch_size = 16;
  int train_shots = 128;
  int eval_shots = 256;

  void validate() const;
  bool operator==(const SpsaConfig&) const = default;
};

struct LocalResult {
  ParamVector theta_local;
  ParamVector delta;  // theta_local - theta_global
  Metrics local;      // on the client's own shard, at eval_shots
};

// Gain schedules a_s = a0/(s+1)^alpha and c_s = c0/(s+1)^gamma.
double spsa_gain_a(const SpsaConfig& cfg, int step);
double spsa_gain_c(const SpsaConfig& cfg, int step);

// -ln(p_y) with the probability clamped to [1e-10, 1].
double cross_entropy(const ClassProbs& p, int label);

// Mean cross-entropy over the listed samples; each sample runs at `shots`
// with a sub-seed derived from (seed, dataset index), so duplicated indices
// reuse identical draws.
double batch_loss(const ParamVector& theta, const Dataset& data,
                  std::span<const std::size_t> indices, const Runner& runner, int shots,
                  std::uint64_t seed);

using LossFn = std::function<double(const ParamVector&)>;

// One SPSA update: a Rademacher direction drawn from the seed, two loss
// evaluations at theta +- c_s * delta, and the rank-one update
// theta' = theta - a_s * g * delta with the scalar central difference g.
ParamVector spsa_step(const ParamVector& theta, int step, const LossFn& loss,
                      const SpsaConfig& cfg, std::uint64_t seed);

namespace detail {
// Same update with the perturbation direction supplied; used by the unit
// tests to pin hand-computed values.
ParamVector spsa_step_with_delta(const ParamVector& theta, int step, const LossFn& loss,
                                 const SpsaConfig& cfg, const std::vector<int>& delta);
}  // namespace detail

// Runs cfg.local_steps SPSA steps on the client shard. Each step samples a
// fresh batch without replacement (the whole shard when it is smaller than
// the batch size); both loss evaluations of a step share the batch and the
// shot seeds. Deterministic in (client_seed).
LocalResult local_train(const Dataset& data, const std::vector<std::size_t>& shard,
                        const Runner& runner, const ParamVector& theta_global,
                        const SpsaConfig& cfg, std::uint64_t client_seed);

}  // namespace qfl
