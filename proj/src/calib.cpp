// SPDX-License-Identifier: Apache-2.0
#include "qfl/calib.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "qfl/rng.hpp"
#include "json.hpp"

namespace qfl {

namespace {

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

[[noreturn]] void fail(const std::string& name, const std::string& msg) {
  throw std::runtime_error("profile '" + name + "': " + msg);
}

}  // namespace

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median: empty input");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double BackendProfile::mean_t1() const { return mean(t1_us); }
double BackendProfile::mean_t2() const { return mean(t2_us); }
double BackendProfile::mean_readout_error() const { return mean(readout_error); }
double BackendProfile::mean_err_1q() const { return mean(err_1q); }
double BackendProfile::mean_err_2q() const { return mean(err_2q); }

bool BackendProfile::adjacent(int a, int b) const {
  const int lo = std::min(a, b);
  const int hi = std::max(a, b);
  for (const auto& e : coupling) {
    if (e[0] == lo && e[1] == hi) return true;
  }
  return false;
}

double BackendProfile::edge_error(int a, int b) const {
  const int lo = std::min(a, b);
  const int hi = std::max(a, b);
  for (std::size_t i = 0; i < coupling.size(); ++i) {
    if (coupling[i][0] == lo && coupling[i][1] == hi) return err_2q[i];
  }
  fail(name, "no coupling edge (" + std::to_string(a) + "," + std::to_string(b) + ")");
}

bool BackendProfile::connected() const {
  if (num_qubits <= 1) return true;
  std::vector<std::vector<int>> adj(num_qubits);
  for (const auto& e : coupling) {
    adj[e[0]].push_back(e[1]);
    adj[e[1]].push_back(e[0]);
  }
  std::vector<char> seen(num_qubits, 0);
  std::queue<int> q;
  q.push(0);
  seen[0] = 1;
  int reached = 1;
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    for (int v : adj[u]) {
      if (!seen[v]) {
        seen[v] = 1;
        ++reached;
        q.push(v);
      }
    }
  }
  return reached == num_qubits;
}

std::vector<std::string> BackendProfile::validate() const {
  if (num_qubits < 1) fail(name, "num_qubits must be positive");
  const auto n = static_cast<std::size_t>(num_qubits);
  if (t1_us.size() != n || t2_us.size() != n || readout_error.size() != n || err_1q.size() != n)
    fail(name, "per-qubit arrays must have length num_qubits");
  if (err_2q.size() != coupling.size()) fail(name, "err_2q must have one entry per coupling edge");
  for (const auto& e : coupling) {
    if (e[0] == e[1]) fail(name, "coupling contains a self-loop");
    if (e[0] < 0 || e[1] < 0 || e[0] >= num_qubits || e[1] >= num_qubits)
      fail(name, "edge references missing qubit");
  }
  for (double v : t1_us)
    if (!(v > 0.0)) fail(name, "t1_us must be strictly positive");
  for (double v : t2_us)
    if (!(v > 0.0)) fail(name, "t2_us must be strictly positive");
  for (double v : readout_error)
    if (v < 0.0 || v > 1.0) fail(name, "readout_error out of [0,1]");
  for (double v : err_1q)
    if (v < 0.0 || v > 1.0) fail(name, "err_1q out of [0,1]");
  for (double v : err_2q)
    if (v < 0.0 || v > 1.0) fail(name, "err_2q out of [0,1]");
  if (!(gate_time_us > 0.0)) fail(name, "gate_time_us must be strictly positive");

  std::vector<std::string> warnings;
  for (std::size_t q = 0; q < n; ++q) {
    if (t2_us[q] > 2.0 * t1_us[q] + 1e-9) {
      warnings.push_back(name + ": qubit " + std::to_string(q) + " violates T2 <= 2*T1 (" +
                         std::to_string(t2_us[q]) + " us vs T1 " + std::to_string(t1_us[q]) +
                         " us)");
    }
  }
  return warnings;
}

BackendProfile load_profile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open profile file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("profile parse failure for " + path + ": " + e.what());
  }

  BackendProfile p;
  try {
    p.name = j.at("name").get<std::string>();
    p.num_qubits = j.at("num_qubits").get<int>();
    for (const auto& e : j.at("coupling")) {
      if (!e.is_array() || e.size() != 2)
        throw std::runtime_error("coupling entries must be [i,j] pairs");
      int a = e[0].get<int>();
      int b = e[1].get<int>();
      if (a > b) std::swap(a, b);
      p.coupling.push_back({a, b});
    }
    p.t1_us = j.at("t1_us").get<std::vector<double>>();
    p.t2_us = j.at("t2_us").get<std::vector<double>>();
    p.readout_error = j.at("readout_error").get<std::vector<double>>();
    p.err_1q = j.at("err_1q").get<std::vector<double>>();
    p.err_2q.resize(p.coupling.size(), -1.0);
    const auto& e2 = j.at("err_2q");
    if (e2.size() != p.coupling.size())
      throw std::runtime_error("err_2q must have one entry per coupling edge");
    for (const auto& item : e2) {
      int a = item.at("edge")[0].get<int>();
      int b = item.at("edge")[1].get<int>();
      if (a > b) std::swap(a, b);
      bool found = false;
      for (std::size_t i = 0; i < p.coupling.size(); ++i) {
        if (p.coupling[i][0] == a && p.coupling[i][1] == b) {
          p.err_2q[i] = item.at("value").get<double>();
          found = true;
          break;
        }
      }
      if (!found)
        throw std::runtime_error("err_2q edge [" + std::to_string(a) + "," + std::to_string(b) +
                                 "] is not in the coupling map");
    }
    p.gate_time_us = j.at("gate_time_us").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("profile schema violation in " + path + ": " + e.what());
  }

  for (const auto& w : p.validate()) std::cerr << "warning: " << w << "\n";
  return p;
}

std::vector<BackendProfile> load_profiles_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw std::runtime_error("profile directory not found: " + dir);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json")
      files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw std::runtime_error("no profile files in directory: " + dir);
  std::vector<BackendProfile> out;
  out.reserve(files.size());
  for (const auto& f : files) out.push_back(load_profile(f.string()));
  return out;
}

std::vector<std::pair<std::string, double>> composite_score(
    const std::vector<BackendProfile>& profiles, const CompositeWeights& w) {
  w.validate();
  if (profiles.empty()) throw std::invalid_argument("composite_score: empty profile set");

  const std::size_t n = profiles.size();
  std::vector<double> c1q(n), c2q(n), cro(n), ct1(n), ct2(n);
  for (std::size_t i = 0; i < n; ++i) {
    c1q[i] = profiles[i].mean_err_1q();
    c2q[i] = profiles[i].mean_err_2q();
    cro[i] = profiles[i].mean_readout_error();
    ct1[i] = 1.0 / profiles[i].mean_t1();
    ct2[i] = 1.0 / profiles[i].mean_t2();
  }
  const double m1q = median(c1q) + kEpsDiv;
  const double m2q = median(c2q) + kEpsDiv;
  const double mro = median(cro) + kEpsDiv;
  const double mt1 = median(ct1) + kEpsDiv;
  const double mt2 = median(ct2) + kEpsDiv;

  std::vector<std::pair<std::string, double>> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double score = w.lambda_2q * (c2q[i] / m2q) + w.lambda_1q * (c1q[i] / m1q) +
                         w.lambda_ro * (cro[i] / mro) + w.lambda_t1 * (ct1[i] / mt1) +
                         w.lambda_t2 * (ct2[i] / mt2);
    out.emplace_back(profiles[i].name, score);
  }
  return out;
}

void CompositeWeights::validate() const {
  const double ws[] = {lambda_1q, lambda_2q, lambda_ro, lambda_t1, lambda_t2};
  bool any_positive = false;
  for (double v : ws) {
    if (v < 0.0) throw std::invalid_argument("composite weights must be nonnegative");
    if (v > 0.0) any_positive = true;
  }
  if (!any_positive)
    throw std::invalid_argument("at least one composite weight must be strictly positive");
}

BackendRanking rank_and_pool(std::vector<std::pair<std::string, double>> scored,
                             std::size_t pool_size) {
  if (scored.empty()) throw std::invalid_argument("rank_and_pool: empty score list");
  if (pool_size == 0 || pool_size > scored.size() / 2)
    throw std::invalid_argument("rank_and_pool: pool_size too large for " +
                                std::to_string(scored.size()) + " backends");
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second < b.second;
    return a.first < b.first;
  });

  BackendRanking r;
  r.best = scored.front().first;
  for (std::size_t i = 0; i < pool_size; ++i) r.good_pool.push_back(scored[i].first);
  for (std::size_t i = scored.size() - pool_size; i < scored.size(); ++i)
    r.bad_pool.push_back(scored[i].first);
  r.scored = std::move(scored);
  return r;
}

std::vector<ClientAssignment> assign_clients(const BackendRanking& ranking, int num_clients,
                                             double rho, std::uint64_t seed) {
  if (num_clients < 1) throw std::invalid_argument("assign_clients: need at least one client");
  if (rho < 0.0 || rho > 1.0) throw std::invalid_argument("assign_clients: rho out of [0,1]");
  if (ranking.good_pool.empty() || ranking.bad_pool.empty())
    throw std::invalid_argument("assign_clients: empty pool");

  // round-half-up
  const int num_bad = static_cast<int>(std::floor(rho * num_clients + 0.5));

  Rng rng(seed);
  std::vector<ClientAssignment> out;
  out.reserve(num_clients);
  for (int i = 0; i < num_bad; ++i) {
    const auto idx = rng.below(ranking.bad_pool.size());
    out.push_back({0, ranking.bad_pool[idx], ClientGroup::Bad});
  }
  for (int i = num_bad; i < num_clients; ++i) {
    const auto idx = rng.below(ranking.good_pool.size());
    out.push_back({0, ranking.good_pool[idx], ClientGroup::Good});
  }
  rng.shuffle(out);
  for (int i = 0; i < num_clients; ++i) out[static_cast<std::size_t>(i)].client_id = i;
  return out;
}

}  // namespace qfl
