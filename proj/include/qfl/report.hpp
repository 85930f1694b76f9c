// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qfl/fed.hpp"

namespace qfl {

// Streams per-round rows into a CSV file. The file is written to a temporary
// path and atomically renamed on close, so re-running a config overwrites the
// previous output in one step. Columns: round, method, seed, the six global
// metrics, K weight columns, K per-client local accuracy columns. Numbers are
// serialized with 6 significant digits.
class RoundCsvWriter {
 public:
  RoundCsvWriter(std::string path, std::string method, std::uint64_t seed);
  ~RoundCsvWriter();

  void append(const RoundRecord& record);
  void close();  // flush + rename; implicit in the destructor

 private:
  std::string path_;
  std::string tmp_path_;
  std::string method_;
  std::uint64_t seed_;
  bool header_written_ = false;
  bool closed_ = false;
  std::string buffer_;
};

// One per-seed metric stream, either fresh from run_federation or parsed back
// from a CSV. Streams parsed from CSV carry only the persisted local
// accuracies, so local AUC aggregation is unavailable for them.
struct SeedStream {
  std::string method;
  std::uint64_t seed = 0;
  std::vector<RoundRecord> rounds;
  bool has_local_auc = true;
};

void write_round_csv(const std::string& path, const std::string& method, std::uint64_t seed,
                     const std::vector<RoundRecord>& rounds);
SeedStream read_round_csv(const std::string& path);

struct MetricSeries {
  std::vector<double> mean;
  std::vector<double> stddev;  // sample std (n-1); 0 when only one seed
};

// Cross-seed aggregate: per-round mean/std for every reported metric plus the
// final-round summary (with 95% CI half-widths).
struct Report {
  std::string method;
  std::size_t num_seeds = 0;
  std::size_t num_rounds = 0;
  bool single_seed = false;
  bool has_local_auc = true;
  MetricSeries train_loss, train_acc, train_auc;
  MetricSeries test_loss, test_acc, test_auc;
  MetricSeries local_acc, local_auc;  // per-round client means

  double final_mean(const MetricSeries& s) const { return s.mean.back(); }
};

// Requires at least one stream and equal round counts everywhere.
Report aggregate_seeds(const std::vector<SeedStream>& runs);

std::string report_to_json(const Report& r);

// Human-readable final-round table.
std::string report_summary_table(const Report& r);

// Writes content to path via temp file + rename.
void write_text_atomic(const std::string& path, const std::string& content);

// 6-significant-digit serialization used for all CSV numbers.
std::string format_number(double v);

}  // namespace qfl
