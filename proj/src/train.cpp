// SPDX-License-Identifier: Apache-2.0
#include "qfl/train.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qfl/rng.hpp"

namespace qfl {

namespace {
// Sub-stream tags within a client's local-training seed ("qfl-rng-v1").
constexpr std::uint64_t kTagBatch = 0x5a01;
constexpr std::uint64_t kTagDelta = 0x5a02;
constexpr std::uint64_t kTagShots = 0x5a03;
constexpr std::uint64_t kTagLocalEval = 0x5a04;
}  // namespace

void SpsaConfig::validate() const {
  if (!(a0 > 0.0) || !(c0 > 0.0))
    throw std::invalid_argument("spsa: a0 and c0 must be strictly positive");
  if (!(gamma > 0.0) || !(gamma < alpha) || !(alpha <= 1.0))
    throw std::invalid_argument("spsa: gains must satisfy 0 < gamma < alpha <= 1");
  if (local_steps < 0) throw std::invalid_argument("spsa: local_steps must be nonnegative");
  if (batch_size < 1) throw std::invalid_argument("spsa: batch_size must be positive");
  if (train_shots < 1 || eval_shots < 1)
    throw std::invalid_argument("spsa: shot counts must be positive");
}

double spsa_gain_a(const SpsaConfig& cfg, int step) {
  return cfg.a0 / std::pow(static_cast<double>(step + 1), cfg.alpha);
}

double spsa_gain_c(const SpsaConfig& cfg, int step) {
  return cfg.c0 / std::pow(static_cast<double>(step + 1), cfg.gamma);
}

double cross_entropy(const ClassProbs& p, int label) {
  if (label < 0 || label > 2) throw std::invalid_argument("cross_entropy: label out of range");
  return -std::log(std::clamp(p[label], 1e-10, 1.0));
}

double batch_loss(const ParamVector& theta, const Dataset& data,
                  std::span<const std::size_t> indices, const Runner& runner, int shots,
                  std::uint64_t seed) {
  if (indices.empty()) throw std::invalid_argument("batch_loss: empty batch");
  double sum = 0.0;
  for (std::size_t i : indices) {
    const auto p = runner.probs(data.row(i), theta, shots, mix_seed(seed, i));
    sum += cross_entropy(p, data.labels[i]);
  }
  return sum / static_cast<double>(indices.size());
}

namespace detail {

ParamVector spsa_step_with_delta(const ParamVector& theta, int step, const LossFn& loss,
                                 const SpsaConfig& cfg, const std::vector<int>& delta) {
  if (delta.size() != theta.size())
    throw std::invalid_argument("spsa_step: perturbation length mismatch");
  const double a = spsa_gain_a(cfg, step);
  const double c = spsa_gain_c(cfg, step);

  ParamVector plus(theta), minus(theta);
  for (std::size_t m = 0; m < theta.size(); ++m) {
    plus[m] += c * delta[m];
    minus[m] -= c * delta[m];
  }
  const double g = (loss(plus) - loss(minus)) / (2.0 * c);

  ParamVector out(theta);
  for (std::size_t m = 0; m < theta.size(); ++m) out[m] -= a * g * delta[m];
  return out;
}

}  // namespace detail

ParamVector spsa_step(const ParamVector& theta, int step, const LossFn& loss,
                      const SpsaConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<int> delta(theta.size());
  for (auto& d : delta) d = rng.rademacher();
  return detail::spsa_step_with_delta(theta, step, loss, cfg, delta);
}

LocalResult local_train(const Dataset& data, const std::vector<std::size_t>& shard,
                        const Runner& runner, const ParamVector& theta_global,
                        const SpsaConfig& cfg, std::uint64_t client_seed) {
  cfg.validate();
  if (shard.empty()) throw std::invalid_argument("local_train: empty client shard");

  ParamVector theta = theta_global;
  const std::size_t batch_size =
      std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size), shard.size());

  for (int s = 0; s < cfg.local_steps; ++s) {
    const std::uint64_t step_seed = mix_seed(client_seed, static_cast<std::uint64_t>(s));
    Rng batch_rng(mix_seed(step_seed, kTagBatch));
    const auto pick = batch_rng.sample_without_replacement(shard.size(), batch_size);
    std::vector<std::size_t> batch(batch_size);
    for (std::size_t i = 0; i < batch_size; ++i) batch[i] = shard[pick[i]];

    const std::uint64_t shot_seed = mix_seed(step_seed, kTagShots);
    LossFn loss = [&](const ParamVector& t) {
      return batch_loss(t, data, batch, runner, cfg.train_shots, shot_seed);
    };
    theta = spsa_step(theta, s, loss, cfg, mix_seed(step_seed, kTagDelta));
  }

  LocalResult res;
  res.theta_local = theta;
  res.delta.resize(theta.size());
  for (std::size_t m = 0; m < theta.size(); ++m) res.delta[m] = theta[m] - theta_global[m];
  res.local = evaluate_metrics(theta, data, shard, runner, cfg.eval_shots,
                               mix_seed(client_seed, kTagLocalEval));
  return res;
}

}  // namespace qfl
