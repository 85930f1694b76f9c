// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end for the federated simulator.
//
//   qfl rank-backends --profiles DIR [--weights 1,5,2,1,1] [--qubits Q]
//   qfl budget        --config FILE [--seed N]
//   qfl run           --config FILE [--workers N]
//   qfl sweep         --config FILE --axis KEY=V1,V2,... [--workers N]
//   qfl report        --runs DIR
//   qfl validate      --config FILE
//
// Exit codes: 0 success, 1 usage/validation error, 2 runtime failure.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "qfl/config.hpp"
#include "qfl/fed.hpp"
#include "qfl/parallel.hpp"
#include "qfl/report.hpp"

namespace fs = std::filesystem;
using namespace qfl;

namespace {

std::vector<double> parse_weight_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  if (out.size() != 5)
    throw std::runtime_error("--weights expects 5 comma-separated values (1q,2q,ro,t1,t2)");
  return out;
}

int cmd_rank_backends(const std::string& dir, const std::string& weights_csv, int qubits) {
  CompositeWeights w;
  if (!weights_csv.empty()) {
    const auto v = parse_weight_list(weights_csv);
    w = {v[0], v[1], v[2], v[3], v[4]};
  }
  auto profiles = load_profiles_dir(dir);
  if (qubits > 0) {
    std::erase_if(profiles, [&](const BackendProfile& p) { return p.num_qubits < qubits; });
    if (profiles.empty()) {
      std::cerr << "error: no backend has at least " << qubits << " qubits\n";
      return 1;
    }
  }
  const auto scored = composite_score(profiles, w);
  const auto ranking = rank_and_pool(scored, default_pool_size(scored.size()));

  std::map<std::string, int> qubit_count;
  for (const auto& p : profiles) qubit_count[p.name] = p.num_qubits;
  auto pool_of = [&](const std::string& name) {
    for (const auto& n : ranking.good_pool)
      if (n == name) return "good";
    for (const auto& n : ranking.bad_pool)
      if (n == name) return "bad";
    return "-";
  };

  std::cout << std::left << std::setw(20) << "backend" << std::setw(8) << "qubits" << std::setw(14)
            << "composite" << "pool\n";
  for (const auto& [name, score] : ranking.scored) {
    std::cout << std::left << std::setw(20) << name << std::setw(8) << qubit_count[name]
              << std::setw(14) << format_number(score) << pool_of(name) << "\n";
  }
  std::cout << "best: " << ranking.best << "\n";
  return 0;
}

int cmd_budget(const std::string& config_path, std::uint64_t seed_override, bool has_seed) {
  const auto cfg = load_config(config_path);
  validate_config(cfg, /*check_files=*/false);
  if (!fs::is_directory(cfg.calibration.profile_dir))
    throw std::runtime_error("calibration.profile_dir not found: " + cfg.calibration.profile_dir);
  const std::uint64_t seed = has_seed ? seed_override : cfg.seeds.front();
  const auto setup = prepare_setup(cfg, seed);

  std::cout << std::left << std::setw(8) << "client" << std::setw(20) << "backend" << std::setw(7)
            << "group" << std::setw(7) << "depth" << std::setw(7) << "n1q" << std::setw(7) << "n2q"
            << std::setw(7) << "nmeas" << "budget\n";
  for (std::size_t k = 0; k < setup.assignment.size(); ++k) {
    const auto& a = setup.assignment[k];
    const auto& s = setup.client_stats[k];
    std::cout << std::left << std::setw(8) << a.client_id << std::setw(20) << a.backend
              << std::setw(7) << (a.group == ClientGroup::Bad ? "bad" : "good") << std::setw(7)
              << s.depth << std::setw(7) << s.n_1q << std::setw(7) << s.n_2q << std::setw(7)
              << s.n_meas << format_number(setup.budgets[k].total) << "\n";
  }
  return 0;
}

int run_config(const FederationConfig& cfg) {
  fs::create_directories(cfg.output_dir);
  write_text_atomic((fs::path(cfg.output_dir) / "config.json").string(), emit_config(cfg));

  std::vector<SeedStream> streams;
  for (const std::uint64_t seed : cfg.seeds) {
    std::cerr << "running method=" << to_string(cfg.federation.method) << " seed=" << seed
              << " ...\n";
    SeedStream stream;
    stream.method = to_string(cfg.federation.method);
    stream.seed = seed;
    stream.rounds = run_federation(cfg, seed);
    const auto csv = fs::path(cfg.output_dir) /
                     (stream.method + "_seed" + std::to_string(seed) + ".csv");
    write_round_csv(csv.string(), stream.method, seed, stream.rounds);
    streams.push_back(std::move(stream));
  }
  const Report report = aggregate_seeds(streams);
  write_text_atomic((fs::path(cfg.output_dir) / "aggregate.json").string(),
                    report_to_json(report));
  std::cout << report_summary_table(report);
  return 0;
}

int cmd_run(const std::string& config_path) {
  const auto cfg = load_config(config_path);
  validate_config(cfg);
  return run_config(cfg);
}

int cmd_sweep(const std::string& config_path, const std::string& axis) {
  const auto eq = axis.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 >= axis.size())
    throw std::runtime_error("--axis expects KEY=V1,V2,...");
  const std::string key = axis.substr(0, eq);
  std::vector<std::string> values;
  {
    std::stringstream ss(axis.substr(eq + 1));
    std::string item;
    while (std::getline(ss, item, ',')) values.push_back(item);
  }
  if (values.empty()) throw std::runtime_error("--axis lists no values");

  std::ifstream in(config_path);
  if (!in) throw std::runtime_error("cannot open config file: " + config_path);
  nlohmann::json base;
  in >> base;

  std::string pointer = "/" + key;
  for (auto& c : pointer)
    if (c == '.') c = '/';

  std::string key_slug = key;
  for (auto& c : key_slug)
    if (c == '.') c = '_';

  const std::string base_out = base.value("output_dir", std::string("runs/sweep"));
  for (const auto& value : values) {
    nlohmann::json point = base;
    nlohmann::json parsed;
    try {
      parsed = nlohmann::json::parse(value);
    } catch (const nlohmann::json::exception&) {
      parsed = value;  // plain string value (e.g. a method name)
    }
    point[nlohmann::json::json_pointer(pointer)] = parsed;
    point["output_dir"] = base_out + "/" + key_slug + "=" + value;
    FederationConfig cfg = parse_config_text(point.dump());
    validate_config(cfg);
    std::cerr << "sweep point " << key << "=" << value << "\n";
    run_config(cfg);
  }
  return 0;
}

int cmd_report(const std::string& runs_dir) {
  if (!fs::is_directory(runs_dir)) throw std::runtime_error("runs directory not found: " + runs_dir);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(runs_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv")
      files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw std::runtime_error("no CSV streams in " + runs_dir);

  std::map<std::string, std::vector<SeedStream>> by_method;
  for (const auto& f : files) {
    auto stream = read_round_csv(f.string());
    by_method[stream.method].push_back(std::move(stream));
  }
  nlohmann::json all;
  for (const auto& [method, streams] : by_method) {
    const Report report = aggregate_seeds(streams);
    all[method] = nlohmann::json::parse(report_to_json(report));
    std::cout << report_summary_table(report);
  }
  write_text_atomic((fs::path(runs_dir) / "report.json").string(), all.dump(2) + "\n");
  return 0;
}

int cmd_validate(const std::string& config_path) {
  const auto cfg = load_config(config_path);
  validate_config(cfg);
  std::cout << "config ok: " << config_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hardware-heterogeneous quantum federated learning simulator"};
  app.require_subcommand(1);

  std::string profiles_dir, weights_csv, config_path, runs_dir, axis;
  int qubits = 0;
  unsigned workers = 0;
  std::uint64_t seed_override = 0;

  auto* rank = app.add_subcommand("rank-backends", "score and pool calibration profiles");
  rank->add_option("--profiles", profiles_dir, "profile directory")->required();
  rank->add_option("--weights", weights_csv, "composite weights as 1q,2q,ro,t1,t2");
  rank->add_option("--qubits", qubits, "only rank backends with at least this many qubits");

  auto* budget = app.add_subcommand("budget", "per-client transpiled stats and noise budgets");
  budget->add_option("--config", config_path, "config file")->required();
  auto* seed_opt = budget->add_option("--seed", seed_override, "assignment seed");

  auto* run = app.add_subcommand("run", "execute the federation over all configured seeds");
  run->add_option("--config", config_path, "config file")->required();
  run->add_option("--workers", workers, "worker threads (0 = hardware)");

  auto* sweep = app.add_subcommand("sweep", "expand one config axis into multiple runs");
  sweep->add_option("--config", config_path, "config file")->required();
  sweep->add_option("--axis", axis, "KEY=V1,V2,... (dotted key path)")->required();
  sweep->add_option("--workers", workers, "worker threads (0 = hardware)");

  auto* report = app.add_subcommand("report", "aggregate per-seed CSV streams");
  report->add_option("--runs", runs_dir, "directory of per-seed CSV files")->required();

  auto* validate = app.add_subcommand("validate", "check a config without running");
  validate->add_option("--config", config_path, "config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  if (workers > 0) set_max_workers(workers);

  try {
    if (rank->parsed()) return cmd_rank_backends(profiles_dir, weights_csv, qubits);
    if (budget->parsed()) return cmd_budget(config_path, seed_override, seed_opt->count() > 0);
    if (validate->parsed()) return cmd_validate(config_path);
    if (run->parsed()) return cmd_run(config_path);
    if (sweep->parsed()) return cmd_sweep(config_path, axis);
    if (report->parsed()) return cmd_report(runs_dir);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    // Config/usage problems exit 1; anything past validation is a runtime failure.
    if (validate->parsed() || budget->parsed() || rank->parsed()) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    }
    const std::string what = e.what();
    const bool usage = what.find("config") != std::string::npos ||
                       what.find("out of [") != std::string::npos ||
                       what.find("must ") != std::string::npos;
    std::cerr << "error: " << what << "\n";
    return usage ? 1 : 2;
  }
  return 0;
}
