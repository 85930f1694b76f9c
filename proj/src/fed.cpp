// SPDX-License-Identifier: Apache-2.0
#include "qfl/fed.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include "qfl/parallel.hpp"
#include "qfl/rng.hpp"

namespace qfl {

namespace {

// Top-level sub-stream tags for one federated run ("qfl-rng-v1").
constexpr std::uint64_t kTagAssign = 0xfed1;
constexpr std::uint64_t kTagPartition = 0xfed2;
constexpr std::uint64_t kTagInit = 0xfed3;
constexpr std::uint64_t kTagRound = 0xfed4;
constexpr std::uint64_t kTagEvalTrain = 0xfed5;
constexpr std::uint64_t kTagEvalTest = 0xfed6;

constexpr double kInitHalfWidth = 0.4;  // theta0 ~ U[-0.4, 0.4) radians

// Normalizes to sum one. Identical entries short-circuit to exactly 1/n so
// that symmetric inputs produce bitwise-uniform weights.
void normalize(std::vector<double>& v) {
  if (v.empty()) return;
  const bool all_equal = std::all_of(v.begin(), v.end(), [&](double x) { return x == v[0]; });
  if (all_equal) {
    std::fill(v.begin(), v.end(), 1.0 / static_cast<double>(v.size()));
    return;
  }
  const double sum = std::accumulate(v.begin(), v.end(), 0.0);
  for (auto& x : v) x /= sum;
}

}  // namespace

double auc_one_vs_rest(std::span<const double> scores, std::span<const int> labels,
                       int positive_class) {
  const std::size_t n = scores.size();
  if (labels.size() != n) throw std::invalid_argument("auc: score/label length mismatch");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Midranks over tied score groups.
  std::vector<double> rank(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double mid = 0.5 * static_cast<double>(i + j) + 1.0;  // ranks are 1-based
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = mid;
    i = j + 1;
  }

  double rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (labels[k] == positive_class) {
      rank_sum += rank[k];
      ++n_pos;
    }
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) return -1.0;
  const double u = rank_sum - 0.5 * static_cast<double>(n_pos) * static_cast<double>(n_pos + 1);
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

Metrics evaluate_metrics(const ParamVector& theta, const Dataset& data,
                         std::span<const std::size_t> indices, const Runner& runner, int shots,
                         std::uint64_t seed) {
  if (indices.empty()) throw std::invalid_argument("evaluate_metrics: empty sample set");
  const std::size_t n = indices.size();
  std::vector<ClassProbs> probs(n);
  parallel_for(n, [&](std::size_t i) {
    const std::size_t idx = indices[i];
    probs[i] = runner.probs(data.row(idx), theta, shots, mix_seed(seed, idx));
  });

  Metrics m;
  std::vector<int> labels(n);
  double loss = 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const int y = data.labels[indices[i]];
    labels[i] = y;
    loss += cross_entropy(probs[i], y);
    int arg = 0;
    for (int c = 1; c < 3; ++c)
      if (probs[i][c] > probs[i][arg]) arg = c;  // ties keep the lowest class
    if (arg == y) ++correct;
  }
  m.loss = loss / static_cast<double>(n);
  m.accuracy = static_cast<double>(correct) / static_cast<double>(n);

  double auc_sum = 0.0;
  int auc_classes = 0;
  for (int c = 0; c < 3; ++c) {
    std::vector<double> scores(n);
    for (std::size_t i = 0; i < n; ++i) scores[i] = probs[i][c];
    const double a = auc_one_vs_rest(scores, labels, c);
    if (a >= 0.0) {
      auc_sum += a;
      ++auc_classes;
    }
  }
  m.auc = auc_classes > 0 ? auc_sum / auc_classes : 0.5;
  return m;
}

std::vector<NoiseBudget> noise_budgets(std::span<const TranspiledStats> stats,
                                       std::span<const BackendProfile> profiles,
                                       const CompositeWeights& lambda) {
  lambda.validate();
  if (stats.empty()) throw std::invalid_argument("noise_budgets: empty client set");
  if (stats.size() != profiles.size())
    throw std::invalid_argument("noise_budgets: stats/profile count mismatch");

  const std::size_t k = stats.size();
  std::vector<NoiseBudget> out(k);
  for (std::size_t i = 0; i < k; ++i) {
    const auto& s = stats[i];
    const auto& p = profiles[i];
    out[i].raw = {s.n_2q * p.mean_err_2q(), s.n_1q * p.mean_err_1q(),
                  s.n_meas * p.mean_readout_error(), s.depth / (p.mean_t1() + kEpsDiv),
                  s.depth / (p.mean_t2() + kEpsDiv)};
  }
  const double lam[5] = {lambda.lambda_2q, lambda.lambda_1q, lambda.lambda_ro, lambda.lambda_t1,
                         lambda.lambda_t2};
  for (int comp = 0; comp < 5; ++comp) {
    std::vector<double> column(k);
    for (std::size_t i = 0; i < k; ++i) column[i] = out[i].raw[comp];
    const double med = median(column) + kEpsDiv;
    for (std::size_t i = 0; i < k; ++i) {
      out[i].normalized[comp] = out[i].raw[comp] / med;
      out[i].total += lam[comp] * out[i].normalized[comp];
    }
  }
  return out;
}

AggregationWeights qrail_weights(std::span<const double> budgets, double tau, double beta,
                                 double w_min) {
  const std::size_t k = budgets.size();
  if (k == 0) throw std::invalid_argument("qrail_weights: empty budget vector");
  if (tau < 0.0) throw std::invalid_argument("qrail_weights: tau must be >= 0");
  if (beta < 0.0 || beta > 1.0) throw std::invalid_argument("qrail_weights: beta out of [0,1]");
  if (w_min < 0.0 || w_min > 1.0 / static_cast<double>(k))
    throw std::invalid_argument("qrail_weights: w_min out of [0, 1/K]");

  AggregationWeights w;
  w.tau = tau;
  w.beta = beta;
  w.w_min = w_min;

  const auto [lo_it, hi_it] = std::minmax_element(budgets.begin(), budgets.end());
  const double lo = *lo_it;
  const double range = *hi_it - lo + kEpsDiv;
  w.normalized_budget.resize(k);
  for (std::size_t i = 0; i < k; ++i) w.normalized_budget[i] = (budgets[i] - lo) / range;

  w.softmax.resize(k);
  for (std::size_t i = 0; i < k; ++i) w.softmax[i] = std::exp(-tau * w.normalized_budget[i]);
  normalize(w.softmax);

  w.mixed.resize(k);
  for (std::size_t i = 0; i < k; ++i)
    w.mixed[i] = (1.0 - beta) * w.softmax[i] + beta / static_cast<double>(k);

  w.weights.resize(k);
  for (std::size_t i = 0; i < k; ++i) w.weights[i] = std::max(w.mixed[i], w_min);
  normalize(w.weights);
  return w;
}

AggregationWeights fedavg_weights(int num_clients) {
  if (num_clients < 1) throw std::invalid_argument("fedavg_weights: need at least one client");
  AggregationWeights w;
  const auto k = static_cast<std::size_t>(num_clients);
  w.normalized_budget.assign(k, 0.0);
  w.softmax.assign(k, 1.0 / static_cast<double>(k));
  w.mixed = w.softmax;
  w.weights = w.softmax;
  return w;
}

WpqflResult wpqfl_update(const ParamVector& theta_global,
                         const std::vector<ParamVector>& locals, WpqflVariant variant) {
  if (locals.empty()) throw std::invalid_argument("wpqfl_update: no client parameters");
  const std::size_t p = theta_global.size();
  for (const auto& l : locals) {
    if (l.size() != p) throw std::invalid_argument("wpqfl_update: parameter length mismatch");
  }
  const std::size_t k = locals.size();

  WpqflResult res;
  res.theta_global.assign(p, 0.0);
  res.weights.resize(k);

  if (variant == WpqflVariant::Euclidean) {
    for (std::size_t i = 0; i < k; ++i) {
      double dist_sq = 0.0;
      for (std::size_t m = 0; m < p; ++m) {
        const double d = locals[i][m] - theta_global[m];
        dist_sq += d * d;
      }
      res.weights[i] = 1.0 / (std::sqrt(dist_sq) + kEpsDiv);
    }
    normalize(res.weights);
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t m = 0; m < p; ++m) res.theta_global[m] += res.weights[i] * locals[i][m];
    }
    res.personalized.assign(k, res.theta_global);
  } else {
    std::fill(res.weights.begin(), res.weights.end(), 1.0 / static_cast<double>(k));
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t m = 0; m < p; ++m) res.theta_global[m] += res.weights[i] * locals[i][m];
    }
    res.personalized.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
      res.personalized[i].resize(p);
      for (std::size_t m = 0; m < p; ++m)
        res.personalized[i][m] = 0.9 * res.theta_global[m] + 0.1 * locals[i][m];
    }
  }
  return res;
}

ParamVector server_round(const ParamVector& theta, const std::vector<ParamVector>& deltas,
                         std::span<const double> weights) {
  if (deltas.size() != weights.size())
    throw std::invalid_argument("server_round: weight/delta count mismatch");
  ParamVector out = theta;
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    if (deltas[i].size() != theta.size())
      throw std::invalid_argument("server_round: delta length mismatch");
    for (std::size_t m = 0; m < theta.size(); ++m) out[m] += weights[i] * deltas[i][m];
  }
  return out;
}

BackendRunner::BackendRunner(const CircuitSpec& spec, const BackendProfile& profile,
                             bool idle_noise)
    : spec_(spec) {
  spec_.validate();
  const std::vector<double> zeros_x(spec_.num_qubits, 0.0);
  const ParamVector zeros_theta(spec_.param_count(), 0.0);
  const GateList logical = build_circuit(spec_, zeros_x, zeros_theta);
  const Layout layout = select_layout(profile, spec_.num_qubits);
  circuit_ = route(logical, layout, profile);
  stats_ = stats(circuit_);
  const NoiseModel nm = NoiseModel::from_profile(profile, idle_noise, stats_.depth);
  exec_ = std::make_unique<Executor>(circuit_, nm);
}

ClassProbs BackendRunner::probs(std::span<const double> features, const ParamVector& theta,
                                int shots, std::uint64_t seed) const {
  if (static_cast<int>(features.size()) != spec_.num_qubits)
    throw std::invalid_argument("BackendRunner: feature length mismatch");
  if (static_cast<int>(theta.size()) != spec_.param_count())
    throw std::invalid_argument("BackendRunner: parameter length mismatch");
  std::vector<double> bind;
  bind.reserve(features.size() + theta.size());
  bind.insert(bind.end(), features.begin(), features.end());
  bind.insert(bind.end(), theta.begin(), theta.end());
  return class_probs(exec_->run_bound(bind, static_cast<std::uint64_t>(shots), seed));
}

FederationSetup prepare_setup(const FederationConfig& cfg, std::uint64_t seed) {
  FederationSetup setup;
  setup.spec.num_qubits = cfg.model.qubits;
  setup.spec.num_layers = cfg.model.layers;
  setup.spec.topology = cfg.model.topology;
  setup.spec.cx_fold = cfg.model.fold;
  setup.spec.validate();

  const auto all = load_profiles_dir(cfg.calibration.profile_dir);
  for (const auto& p : all) {
    if (p.num_qubits >= cfg.model.qubits) setup.eligible.push_back(p);
  }
  if (setup.eligible.size() < 2)
    throw std::runtime_error("fewer than two backends can host a " +
                             std::to_string(cfg.model.qubits) + "-qubit circuit");

  const auto scored = composite_score(setup.eligible, cfg.calibration.weights);
  const std::size_t pool = cfg.calibration.pool_size > 0
                               ? static_cast<std::size_t>(cfg.calibration.pool_size)
                               : default_pool_size(setup.eligible.size());
  setup.ranking = rank_and_pool(scored, pool);
  setup.assignment = assign_clients(setup.ranking, cfg.federation.clients, cfg.federation.rho,
                                    mix_seed(seed, kTagAssign));

  // Transpile the shared template per distinct backend, then gather stats and
  // budgets per client.
  std::map<std::string, const BackendProfile*> by_name;
  for (const auto& p : setup.eligible) by_name[p.name] = &p;
  std::map<std::string, TranspiledStats> stat_cache;
  const std::vector<double> zeros_x(setup.spec.num_qubits, 0.0);
  const ParamVector zeros_theta(setup.spec.param_count(), 0.0);
  const GateList logical = build_circuit(setup.spec, zeros_x, zeros_theta);

  std::vector<BackendProfile> client_profiles;
  for (const auto& a : setup.assignment) {
    const BackendProfile* p = by_name.at(a.backend);
    auto it = stat_cache.find(a.backend);
    if (it == stat_cache.end()) {
      const TranspiledCircuit t = route(logical, select_layout(*p, setup.spec.num_qubits), *p);
      it = stat_cache.emplace(a.backend, stats(t)).first;
    }
    setup.client_stats.push_back(it->second);
    client_profiles.push_back(*p);
  }
  setup.budgets = noise_budgets(setup.client_stats, client_profiles, cfg.calibration.weights);
  return setup;
}

std::pair<Dataset, Dataset> prepare_data(const FederationConfig& cfg) {
  const auto& d = cfg.dataset;
  Dataset train, test;
  if (d.name == "blobs") {
    std::tie(train, test) =
        make_blobs(d.train_size, d.test_size, d.blob_dim, d.blob_separation, d.data_seed);
  } else {
    if (d.name == "container") {
      train = load_container(d.train_container);
      test = load_container(d.test_container);
    } else {
      train = load_idx(d.train_images, d.train_labels);
      test = load_idx(d.test_images, d.test_labels);
    }
    train.split = Split::Train;
    test.split = Split::Test;
    train = restrict_classes(train, d.classes);
    test = restrict_classes(test, d.classes);
    train = subsample(train, d.train_size, d.data_seed);
    test = subsample(test, d.test_size, mix_seed(d.data_seed, 1));
  }
  auto [model, train_q, test_q] = pca_fit_transform(train, test, cfg.model.qubits);
  (void)model;
  return {std::move(train_q), std::move(test_q)};
}

std::vector<RoundRecord> run_federation(const FederationConfig& cfg, std::uint64_t seed) {
  validate_config(cfg);
  const FederationSetup setup = prepare_setup(cfg, seed);
  auto [train, test] = prepare_data(cfg);

  const int num_clients = cfg.federation.clients;
  const Partition part = partition(train.labels, num_clients, cfg.federation.partition,
                                   cfg.federation.alpha, mix_seed(seed, kTagPartition));

  // One runner per distinct backend; clients on the same device share it.
  std::map<std::string, std::shared_ptr<BackendRunner>> runners;
  std::map<std::string, const BackendProfile*> by_name;
  for (const auto& p : setup.eligible) by_name[p.name] = &p;
  auto runner_for = [&](const std::string& name) {
    auto it = runners.find(name);
    if (it == runners.end()) {
      it = runners
               .emplace(name, std::make_shared<BackendRunner>(setup.spec, *by_name.at(name),
                                                              cfg.calibration.idle_noise))
               .first;
    }
    return it->second;
  };
  std::vector<std::shared_ptr<BackendRunner>> client_runner(num_clients);
  for (int k = 0; k < num_clients; ++k)
    client_runner[k] = runner_for(setup.assignment[k].backend);
  const std::shared_ptr<BackendRunner> best_runner = runner_for(setup.ranking.best);

  // Initial parameters.
  const int p_count = setup.spec.param_count();
  Rng init_rng(mix_seed(seed, kTagInit));
  ParamVector theta(p_count);
  for (auto& v : theta) v = (2.0 * init_rng.uniform01() - 1.0) * kInitHalfWidth;

  std::vector<double> budget_totals(setup.budgets.size());
  for (std::size_t i = 0; i < setup.budgets.size(); ++i)
    budget_totals[i] = setup.budgets[i].total;

  std::vector<std::size_t> train_idx(train.size());
  std::iota(train_idx.begin(), train_idx.end(), 0);
  std::vector<std::size_t> test_idx(test.size());
  std::iota(test_idx.begin(), test_idx.end(), 0);

  std::vector<ParamVector> starts(num_clients, theta);
  std::vector<RoundRecord> history;
  history.reserve(cfg.federation.rounds);

  for (int t = 0; t < cfg.federation.rounds; ++t) {
    const auto begin = std::chrono::steady_clock::now();
    const std::uint64_t round_seed = mix_seed(seed, kTagRound, static_cast<std::uint64_t>(t));

    std::vector<LocalResult> locals(num_clients);
    try {
      parallel_for(static_cast<std::size_t>(num_clients), [&](std::size_t k) {
        locals[k] = local_train(train, part.client_indices[k], *client_runner[k], starts[k],
                                cfg.optimizer, mix_seed(round_seed, k));
      });
    } catch (const std::exception& e) {
      throw std::runtime_error("round " + std::to_string(t) + ": " + e.what());
    }

    RoundRecord rec;
    rec.round = t;
    switch (cfg.federation.method) {
      case Method::FedAvg: {
        const auto w = fedavg_weights(num_clients);
        std::vector<ParamVector> deltas(num_clients);
        for (int k = 0; k < num_clients; ++k) deltas[k] = locals[k].delta;
        theta = server_round(theta, deltas, w.weights);
        std::fill(starts.begin(), starts.end(), theta);
        rec.weights = w.weights;
        break;
      }
      case Method::Qrail: {
        // Budgets are round-invariant here, but the normalization is re-run
        // every round to mirror the per-round weighting of the protocol.
        const auto w = qrail_weights(budget_totals, cfg.federation.tau, cfg.federation.beta,
                                     cfg.federation.w_min);
        std::vector<ParamVector> deltas(num_clients);
        for (int k = 0; k < num_clients; ++k) deltas[k] = locals[k].delta;
        theta = server_round(theta, deltas, w.weights);
        std::fill(starts.begin(), starts.end(), theta);
        rec.weights = w.weights;
        break;
      }
      case Method::WpqflEuclidean:
      case Method::WpqflWeighted: {
        std::vector<ParamVector> local_params(num_clients);
        for (int k = 0; k < num_clients; ++k) local_params[k] = locals[k].theta_local;
        const auto variant = cfg.federation.method == Method::WpqflEuclidean
                                 ? WpqflVariant::Euclidean
                                 : WpqflVariant::Weighted90g10l;
        auto res = wpqfl_update(theta, local_params, variant);
        theta = std::move(res.theta_global);
        starts = std::move(res.personalized);
        rec.weights = std::move(res.weights);
        break;
      }
    }

    rec.train = evaluate_metrics(theta, train, train_idx, *best_runner, cfg.optimizer.eval_shots,
                                 mix_seed(seed, kTagEvalTrain, static_cast<std::uint64_t>(t)));
    rec.test = evaluate_metrics(theta, test, test_idx, *best_runner, cfg.optimizer.eval_shots,
                                mix_seed(seed, kTagEvalTest, static_cast<std::uint64_t>(t)));
    rec.local.resize(num_clients);
    for (int k = 0; k < num_clients; ++k) rec.local[k] = locals[k].local;
    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - begin).count();
    history.push_back(std::move(rec));
  }
  return history;
}

}  // namespace qfl
