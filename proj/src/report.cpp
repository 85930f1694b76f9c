// SPDX-License-Identifier: Apache-2.0
#include "qfl/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace qfl {

namespace fs = std::filesystem;

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

void write_text_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write file: " + tmp);
    out << content;
  }
  fs::rename(tmp, path);
}

RoundCsvWriter::RoundCsvWriter(std::string path, std::string method, std::uint64_t seed)
    : path_(std::move(path)), tmp_path_(path_ + ".tmp"), method_(std::move(method)), seed_(seed) {}

RoundCsvWriter::~RoundCsvWriter() {
  try {
    close();
  } catch (...) {
    // destructor must not throw; close() explicitly to observe failures
  }
}

void RoundCsvWriter::append(const RoundRecord& record) {
  if (closed_) throw std::runtime_error("RoundCsvWriter: writer already closed");
  const std::size_t k = record.weights.size();
  if (!header_written_) {
    buffer_ += "round,method,seed,train_loss,train_acc,train_auc,test_loss,test_acc,test_auc";
    for (std::size_t i = 0; i < k; ++i) buffer_ += ",w_" + std::to_string(i);
    for (std::size_t i = 0; i < k; ++i) buffer_ += ",local_acc_" + std::to_string(i);
    buffer_ += "\n";
    header_written_ = true;
  }
  std::string row = std::to_string(record.round) + "," + method_ + "," + std::to_string(seed_);
  for (double v : {record.train.loss, record.train.accuracy, record.train.auc, record.test.loss,
                   record.test.accuracy, record.test.auc})
    row += "," + format_number(v);
  for (double w : record.weights) row += "," + format_number(w);
  for (const auto& l : record.local) row += "," + format_number(l.accuracy);
  buffer_ += row + "\n";
}

void RoundCsvWriter::close() {
  if (closed_) return;
  closed_ = true;
  std::ofstream out(tmp_path_, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write file: " + tmp_path_);
  out << buffer_;
  out.close();
  fs::rename(tmp_path_, path_);
}

void write_round_csv(const std::string& path, const std::string& method, std::uint64_t seed,
                     const std::vector<RoundRecord>& rounds) {
  RoundCsvWriter writer(path, method, seed);
  for (const auto& r : rounds) writer.append(r);
  writer.close();
}

SeedStream read_round_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open CSV file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty CSV file: " + path);

  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    return out;
  };
  const auto header = split(line);
  std::size_t k = 0;
  for (const auto& col : header)
    if (col.rfind("w_", 0) == 0) ++k;
  if (header.size() != 9 + 2 * k)
    throw std::runtime_error("unexpected CSV column layout in " + path);

  SeedStream stream;
  stream.has_local_auc = false;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size())
      throw std::runtime_error("ragged CSV row in " + path);
    RoundRecord rec;
    rec.round = std::stoi(cells[0]);
    if (first) {
      stream.method = cells[1];
      stream.seed = std::stoull(cells[2]);
      first = false;
    }
    rec.train.loss = std::stod(cells[3]);
    rec.train.accuracy = std::stod(cells[4]);
    rec.train.auc = std::stod(cells[5]);
    rec.test.loss = std::stod(cells[6]);
    rec.test.accuracy = std::stod(cells[7]);
    rec.test.auc = std::stod(cells[8]);
    rec.weights.resize(k);
    rec.local.resize(k);
    for (std::size_t i = 0; i < k; ++i) rec.weights[i] = std::stod(cells[9 + i]);
    for (std::size_t i = 0; i < k; ++i) rec.local[i].accuracy = std::stod(cells[9 + k + i]);
    stream.rounds.push_back(std::move(rec));
  }
  if (first) throw std::runtime_error("CSV has no data rows: " + path);
  return stream;
}

namespace {

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

MetricSeries aggregate_metric(const std::vector<SeedStream>& runs, std::size_t rounds,
                              double (*pick)(const RoundRecord&)) {
  MetricSeries s;
  s.mean.resize(rounds);
  s.stddev.resize(rounds);
  std::vector<double> column(runs.size());
  for (std::size_t t = 0; t < rounds; ++t) {
    for (std::size_t r = 0; r < runs.size(); ++r) column[r] = pick(runs[r].rounds[t]);
    s.mean[t] = mean_of(column);
    s.stddev[t] = sample_std(column, s.mean[t]);
  }
  return s;
}

double client_mean_acc(const RoundRecord& r) {
  double s = 0.0;
  for (const auto& m : r.local) s += m.accuracy;
  return r.local.empty() ? 0.0 : s / static_cast<double>(r.local.size());
}

double client_mean_auc(const RoundRecord& r) {
  double s = 0.0;
  for (const auto& m : r.local) s += m.auc;
  return r.local.empty() ? 0.0 : s / static_cast<double>(r.local.size());
}

nlohmann::json series_json(const MetricSeries& s) {
  return {{"mean", s.mean}, {"std", s.stddev}};
}

nlohmann::json final_json(const MetricSeries& s, std::size_t n) {
  const double std = s.stddev.back();
  return {{"mean", s.mean.back()},
          {"std", std},
          {"ci95", n > 0 ? 1.96 * std / std::sqrt(static_cast<double>(n)) : 0.0}};
}

}  // namespace

Report aggregate_seeds(const std::vector<SeedStream>& runs) {
  if (runs.empty()) throw std::invalid_argument("aggregate_seeds: no seed streams");
  const std::size_t rounds = runs.front().rounds.size();
  if (rounds == 0) throw std::invalid_argument("aggregate_seeds: empty metric stream");
  for (const auto& r : runs) {
    if (r.rounds.size() != rounds)
      throw std::invalid_argument("aggregate_seeds: ragged streams (" +
                                  std::to_string(r.rounds.size()) + " vs " +
                                  std::to_string(rounds) + " rounds)");
  }

  Report rep;
  rep.method = runs.front().method;
  rep.num_seeds = runs.size();
  rep.num_rounds = rounds;
  rep.single_seed = runs.size() == 1;
  rep.has_local_auc = true;
  for (const auto& r : runs) rep.has_local_auc = rep.has_local_auc && r.has_local_auc;

  rep.train_loss = aggregate_metric(runs, rounds, [](const RoundRecord& r) { return r.train.loss; });
  rep.train_acc =
      aggregate_metric(runs, rounds, [](const RoundRecord& r) { return r.train.accuracy; });
  rep.train_auc = aggregate_metric(runs, rounds, [](const RoundRecord& r) { return r.train.auc; });
  rep.test_loss = aggregate_metric(runs, rounds, [](const RoundRecord& r) { return r.test.loss; });
  rep.test_acc =
      aggregate_metric(runs, rounds, [](const RoundRecord& r) { return r.test.accuracy; });
  rep.test_auc = aggregate_metric(runs, rounds, [](const RoundRecord& r) { return r.test.auc; });
  rep.local_acc = aggregate_metric(runs, rounds, client_mean_acc);
  rep.local_auc = aggregate_metric(runs, rounds, client_mean_auc);
  return rep;
}

std::string report_to_json(const Report& r) {
  nlohmann::json j{
      {"method", r.method},
      {"seeds", r.num_seeds},
      {"rounds", r.num_rounds},
      {"single_seed", r.single_seed},
      {"per_round",
       {{"train_loss", series_json(r.train_loss)},
        {"train_acc", series_json(r.train_acc)},
        {"train_auc", series_json(r.train_auc)},
        {"test_loss", series_json(r.test_loss)},
        {"test_acc", series_json(r.test_acc)},
        {"test_auc", series_json(r.test_auc)},
        {"local_acc", series_json(r.local_acc)}}},
      {"final",
       {{"train_loss", final_json(r.train_loss, r.num_seeds)},
        {"train_acc", final_json(r.train_acc, r.num_seeds)},
        {"train_auc", final_json(r.train_auc, r.num_seeds)},
        {"test_loss", final_json(r.test_loss, r.num_seeds)},
        {"test_acc", final_json(r.test_acc, r.num_seeds)},
        {"test_auc", final_json(r.test_auc, r.num_seeds)},
        {"local_acc", final_json(r.local_acc, r.num_seeds)}}},
  };
  if (r.has_local_auc) {
    j["per_round"]["local_auc"] = series_json(r.local_auc);
    j["final"]["local_auc"] = final_json(r.local_auc, r.num_seeds);
  }
  return j.dump(2) + "\n";
}

std::string report_summary_table(const Report& r) {
  std::ostringstream out;
  out << "method=" << r.method << " seeds=" << r.num_seeds << " rounds=" << r.num_rounds << "\n";
  auto row = [&](const char* name, const MetricSeries& s) {
    out << "  " << name << ": " << format_number(s.mean.back()) << " +- "
        << format_number(s.stddev.back()) << "\n";
  };
  row("train_loss", r.train_loss);
  row("train_acc ", r.train_acc);
  row("train_auc ", r.train_auc);
  row("test_loss ", r.test_loss);
  row("test_acc  ", r.test_acc);
  row("test_auc  ", r.test_auc);
  row("local_acc ", r.local_acc);
  if (r.has_local_auc) row("local_auc ", r.local_auc);
  return out.str();
}

}  // namespace qfl
