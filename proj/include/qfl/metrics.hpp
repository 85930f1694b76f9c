// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qfl/data.hpp"
#include "qfl/qsim.hpp"
#include "qfl/vqc.hpp"

namespace qfl {

// Abstract circuit-plus-noise evaluator: class probabilities for one sample
// under a given parameter vector. Production backends wrap an Executor; tests
// substitute analytic stubs.
class Runner {
 public:
  virtual ~Runner() = default;
  virtual ClassProbs probs(std::span<const double> features, const ParamVector& theta, int shots,
                           std::uint64_t seed) const = 0;
};

struct Metrics {
  double loss = 0.0;
  double accuracy = 0.0;
  double auc = 0.0;
};

// One-vs-rest AUC for a single class from the rank statistic; tied scores
// contribute 1/2. Returns -1 when the class has no positives or no negatives.
double auc_one_vs_rest(std::span<const double> scores, std::span<const int> labels,
                       int positive_class);

// Mean cross-entropy, argmax accuracy (ties to the lowest class index), and
// macro-averaged one-vs-rest AUC over the listed samples. Per-sample shot
// seeds are derived from (seed, dataset index).
Metrics evaluate_metrics(const ParamVector& theta, const Dataset& data,
                         std::span<const std::size_t> indices, const Runner& runner, int shots,
                         std::uint64_t seed);

}  // namespace qfl
