// SPDX-License-Identifier: Apache-2.0
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "qfl/config.hpp"
#include "qfl/report.hpp"

using namespace qfl;
namespace fs = std::filesystem;

namespace {

fs::path tmp_dir() {
  const fs::path dir = fs::temp_directory_path() / "qfl_harness_test";
  fs::create_directories(dir);
  return dir;
}

RoundRecord record(int round, double base) {
  RoundRecord r;
  r.round = round;
  r.train = {base, base + 0.1, base + 0.2};
  r.test = {base + 0.01, base + 0.11, base + 0.21};
  r.weights = {0.894646, 0.105354};
  r.local = {{base, 0.7, 0.8}, {base, 0.6, 0.75}};
  return r;
}

}  // namespace

TEST_CASE("config round-trips through emit and parse") {
  FederationConfig cfg;
  cfg.description = "round trip";
  cfg.dataset.name = "mnist";
  cfg.dataset.train_images = "data/train-images";
  cfg.dataset.train_labels = "data/train-labels";
  cfg.dataset.test_images = "data/t10k-images";
  cfg.dataset.test_labels = "data/t10k-labels";
  cfg.dataset.classes = {3, 5, 8};
  cfg.model.qubits = 8;
  cfg.model.layers = 16;
  cfg.model.topology = Topology::Ring;
  cfg.model.fold = 3;
  cfg.federation.method = Method::WpqflWeighted;
  cfg.federation.partition = PartitionMode::Dirichlet;
  cfg.federation.alpha = 0.3;
  cfg.calibration.weights.lambda_2q = 7.0;
  cfg.optimizer.local_steps = 9;
  cfg.seeds = {10, 20, 30};
  cfg.output_dir = "runs/trip";

  const auto parsed = parse_config_text(emit_config(cfg));
  CHECK(parsed == cfg);
}

TEST_CASE("defaults survive a minimal config") {
  const auto cfg = parse_config_text("{}");
  CHECK(cfg.dataset.name == "blobs");
  CHECK(cfg.model.qubits == 4);
  CHECK(cfg.federation.tau == 5.0);
  CHECK(cfg.federation.beta == 0.2);
  CHECK(cfg.federation.w_min == 0.05);
  CHECK(cfg.optimizer.a0 == 0.2);
  CHECK(cfg.optimizer.c0 == 0.1);
  CHECK(cfg.optimizer.alpha == 0.602);
  CHECK(cfg.optimizer.gamma == 0.101);
  CHECK(cfg.optimizer.local_steps == 5);
  CHECK(cfg.optimizer.batch_size == 16);
  CHECK(cfg.optimizer.train_shots == 128);
  CHECK(cfg.optimizer.eval_shots == 256);
  CHECK(cfg.seeds == std::vector<std::uint64_t>{1, 2, 3, 4, 5});
}

TEST_CASE("validation names the offending field") {
  auto cfg = parse_config_text("{}");
  cfg.federation.rho = 1.3;
  CHECK_THROWS_WITH_AS(validate_config(cfg, false), doctest::Contains("rho out of [0,1]"),
                       std::runtime_error);
  cfg.federation.rho = 0.5;
  cfg.federation.w_min = 0.5;
  CHECK_THROWS_WITH_AS(validate_config(cfg, false), doctest::Contains("w_min"),
                       std::runtime_error);
  cfg.federation.w_min = 0.05;
  cfg.model.fold = 4;
  CHECK_THROWS_WITH_AS(validate_config(cfg, false), doctest::Contains("fold"),
                       std::runtime_error);
  cfg.model.fold = 1;
  cfg.dataset.name = "mnist";
  cfg.dataset.train_images = "/nonexistent/file";
  CHECK_THROWS(validate_config(cfg, true));
}

TEST_CASE("unknown method and topology are rejected") {
  CHECK_THROWS(parse_config_text(R"({"federation": {"method": "magic"}})"));
  CHECK_THROWS(parse_config_text(R"({"model": {"topology": "mesh"}})"));
  CHECK_THROWS(parse_config_text("{not json"));
}

TEST_CASE("CSV stream round-trips through write and read") {
  const auto path = tmp_dir() / "stream.csv";
  std::vector<RoundRecord> rounds;
  for (int t = 0; t < 15; ++t) rounds.push_back(record(t, 0.5 + 0.01 * t));
  write_round_csv(path.string(), "qrail", 7, rounds);

  std::ifstream in(path);
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  CHECK(lines == 16);  // header + 15 rows

  const auto stream = read_round_csv(path.string());
  CHECK(stream.method == "qrail");
  CHECK(stream.seed == 7);
  REQUIRE(stream.rounds.size() == 15);
  CHECK(stream.rounds[3].train.loss == doctest::Approx(0.53).epsilon(1e-6));
  CHECK(stream.rounds[3].weights.size() == 2);
  const double wsum = stream.rounds[3].weights[0] + stream.rounds[3].weights[1];
  CHECK(std::abs(wsum - 1.0) < 1e-5);  // serialization keeps 6 significant digits
  CHECK_FALSE(stream.has_local_auc);
}

TEST_CASE("csv overwrite is atomic and leaves no temp file") {
  const auto path = tmp_dir() / "atomic.csv";
  write_round_csv(path.string(), "fedavg", 1, {record(0, 0.4)});
  write_round_csv(path.string(), "fedavg", 1, {record(0, 0.4)});
  CHECK(fs::exists(path));
  CHECK_FALSE(fs::exists(path.string() + ".tmp"));
}

TEST_CASE("seed aggregation reproduces the hand-computed mean and std") {
  std::vector<SeedStream> streams;
  for (const double acc : {0.86, 0.88, 0.89}) {
    SeedStream s;
    s.method = "qrail";
    s.rounds.push_back(record(0, 0.0));
    s.rounds.back().test.accuracy = acc;
    streams.push_back(std::move(s));
  }
  const auto rep = aggregate_seeds(streams);
  CHECK(rep.test_acc.mean.back() == doctest::Approx(0.876667).epsilon(1e-5));
  CHECK(rep.test_acc.stddev.back() == doctest::Approx(0.015275).epsilon(1e-4));
  CHECK(rep.num_seeds == 3);
  CHECK_FALSE(rep.single_seed);
}

TEST_CASE("single seed aggregates to zero std and is flagged") {
  std::vector<SeedStream> streams(1);
  streams[0].method = "fedavg";
  streams[0].rounds.push_back(record(0, 0.5));
  const auto rep = aggregate_seeds(streams);
  CHECK(rep.single_seed);
  CHECK(rep.test_acc.stddev.back() == 0.0);
  const auto json_text = report_to_json(rep);
  CHECK(json_text.find("\"single_seed\": true") != std::string::npos);
}

TEST_CASE("identical seeds aggregate to exactly zero std") {
  std::vector<SeedStream> streams(3);
  for (auto& s : streams) {
    s.method = "qrail";
    s.rounds.push_back(record(0, 0.625));
  }
  const auto rep = aggregate_seeds(streams);
  CHECK(rep.train_loss.stddev.back() == 0.0);
  CHECK(rep.test_auc.stddev.back() == 0.0);
}

TEST_CASE("ragged streams are rejected") {
  std::vector<SeedStream> streams(2);
  streams[0].rounds = {record(0, 0.1), record(1, 0.2)};
  streams[1].rounds = {record(0, 0.1)};
  CHECK_THROWS_WITH_AS(aggregate_seeds(streams), doctest::Contains("ragged"),
                       std::invalid_argument);
  CHECK_THROWS(aggregate_seeds({}));
}

TEST_CASE("numbers serialize with six significant digits") {
  CHECK(format_number(0.8946461234) == "0.894646");
  CHECK(format_number(1.0) == "1");
  CHECK(format_number(0.000123456789) == "0.000123457");
  CHECK(format_number(123456789.0) == "1.23457e+08");
}
