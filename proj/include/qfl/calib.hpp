// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace qfl {

// A device calibration snapshot: topology plus per-qubit/per-edge error and
// coherence data. Loaded from the JSON profile format described in the README.
struct BackendProfile {
  std::string name;
  int num_qubits = 0;
  std::vector<std::array<int, 2>> coupling;  // undirected edges, stored with i < j
  std::vector<double> t1_us;                 // per qubit, microseconds
  std::vector<double> t2_us;
  std::vector<double> readout_error;
  std::vector<double> err_1q;
  std::vector<double> err_2q;  // aligned with coupling
  double gate_time_us = 0.0;

  double mean_t1() const;
  double mean_t2() const;
  double mean_readout_error() const;
  double mean_err_1q() const;
  double mean_err_2q() const;

  bool adjacent(int a, int b) const;
  // Error rate of the coupling edge {a, b}; throws if not an edge.
  double edge_error(int a, int b) const;
  bool connected() const;

  // Throws on invariant violations; returns human-readable warnings for
  // soft violations (currently only T2 > 2*T1).
  std::vector<std::string> validate() const;
};

// Component weights shared by the backend composite score and the per-client
// noise budget. Defaults put the strongest prior weight on two-qubit error.
struct CompositeWeights {
  double lambda_1q = 1.0;
  double lambda_2q = 5.0;
  double lambda_ro = 2.0;
  double lambda_t1 = 1.0;
  double lambda_t2 = 1.0;

  void validate() const;  // at least one weight strictly positive, none negative
  bool operator==(const CompositeWeights&) const = default;
};

struct BackendRanking {
  std::vector<std::pair<std::string, double>> scored;  // ascending composite score
  std::vector<std::string> good_pool;
  std::vector<std::string> bad_pool;
  std::string best;
};

enum class ClientGroup { Good, Bad };

struct ClientAssignment {
  int client_id = 0;
  std::string backend;
  ClientGroup group = ClientGroup::Good;
};

// Guard added to every median denominator.
inline constexpr double kEpsDiv = 1e-12;

// Loads and validates one profile file; warnings go to stderr.
BackendProfile load_profile(const std::string& path);

// Loads every *.json profile in a directory, sorted by filename.
std::vector<BackendProfile> load_profiles_dir(const std::string& dir);

// Composite quality score per backend: each averaged calibration component is
// divided by its median over the candidate set (plus the division guard) and
// the normalized components are combined with the given weights. T1/T2 enter
// through their reciprocals, so lower scores always mean better hardware.
// Output order matches input order.
std::vector<std::pair<std::string, double>> composite_score(
    const std::vector<BackendProfile>& profiles, const CompositeWeights& w);

// Sorts ascending by score (ties by name), takes the first pool_size names as
// the good pool and the last pool_size as the bad pool.
BackendRanking rank_and_pool(std::vector<std::pair<std::string, double>> scored,
                             std::size_t pool_size);

// Default pool size for n ranked backends.
inline std::size_t default_pool_size(std::size_t n) {
  const std::size_t half = n / 2;
  return half < 5 ? half : 5;
}

// Assigns round-half-up(rho*K) clients backends sampled uniformly (with
// replacement) from the bad pool and the rest from the good pool, then
// shuffles the assignment order. Deterministic for a fixed seed.
std::vector<ClientAssignment> assign_clients(const BackendRanking& ranking, int num_clients,
                                             double rho, std::uint64_t seed);

// Median of a non-empty list (mean of the two middle elements for even size).
double median(std::vector<double> values);

}  // namespace qfl
