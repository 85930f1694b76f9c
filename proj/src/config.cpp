// SPDX-License-Identifier: Apache-2.0
#include "qfl/config.hpp"

#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace qfl {

using nlohmann::json;

Method method_from_string(const std::string& s) {
  if (s == "fedavg") return Method::FedAvg;
  if (s == "qrail") return Method::Qrail;
  if (s == "wpqfl-euclidean") return Method::WpqflEuclidean;
  if (s == "wpqfl-weighted") return Method::WpqflWeighted;
  throw std::runtime_error("unknown method: " + s);
}

std::string to_string(Method m) {
  switch (m) {
    case Method::FedAvg: return "fedavg";
    case Method::Qrail: return "qrail";
    case Method::WpqflEuclidean: return "wpqfl-euclidean";
    case Method::WpqflWeighted: return "wpqfl-weighted";
  }
  return "fedavg";
}

std::string to_string(PartitionMode m) {
  return m == PartitionMode::Iid ? "iid" : "dirichlet";
}

namespace {

PartitionMode partition_from_string(const std::string& s) {
  if (s == "iid") return PartitionMode::Iid;
  if (s == "dirichlet") return PartitionMode::Dirichlet;
  throw std::runtime_error("unknown partition mode: " + s);
}

template <class T>
void get_if_present(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

FederationConfig parse_config_text(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("config parse failure: ") + e.what());
  }

  FederationConfig cfg;
  try {
    get_if_present(j, "description", cfg.description);
    if (j.contains("dataset")) {
      const auto& d = j.at("dataset");
      auto& ds = cfg.dataset;
      get_if_present(d, "name", ds.name);
      get_if_present(d, "train_images", ds.train_images);
      get_if_present(d, "train_labels", ds.train_labels);
      get_if_present(d, "test_images", ds.test_images);
      get_if_present(d, "test_labels", ds.test_labels);
      get_if_present(d, "train_container", ds.train_container);
      get_if_present(d, "test_container", ds.test_container);
      get_if_present(d, "classes", ds.classes);
      get_if_present(d, "train_size", ds.train_size);
      get_if_present(d, "test_size", ds.test_size);
      get_if_present(d, "blob_dim", ds.blob_dim);
      get_if_present(d, "blob_separation", ds.blob_separation);
      get_if_present(d, "data_seed", ds.data_seed);
    }
    if (j.contains("model")) {
      const auto& m = j.at("model");
      get_if_present(m, "qubits", cfg.model.qubits);
      get_if_present(m, "layers", cfg.model.layers);
      if (m.contains("topology"))
        cfg.model.topology = topology_from_string(m.at("topology").get<std::string>());
      get_if_present(m, "fold", cfg.model.fold);
    }
    if (j.contains("federation")) {
      const auto& f = j.at("federation");
      auto& fs = cfg.federation;
      get_if_present(f, "clients", fs.clients);
      get_if_present(f, "rho", fs.rho);
      get_if_present(f, "rounds", fs.rounds);
      if (f.contains("method")) fs.method = method_from_string(f.at("method").get<std::string>());
      get_if_present(f, "tau", fs.tau);
      get_if_present(f, "beta", fs.beta);
      get_if_present(f, "w_min", fs.w_min);
      if (f.contains("partition"))
        fs.partition = partition_from_string(f.at("partition").get<std::string>());
      get_if_present(f, "alpha", fs.alpha);
    }
    if (j.contains("calibration")) {
      const auto& c = j.at("calibration");
      get_if_present(c, "profile_dir", cfg.calibration.profile_dir);
      if (c.contains("weights")) {
        const auto w = c.at("weights").get<std::vector<double>>();
        if (w.size() != 5)
          throw std::runtime_error("calibration.weights must have 5 entries (1q,2q,ro,t1,t2)");
        cfg.calibration.weights = {w[0], w[1], w[2], w[3], w[4]};
      }
      get_if_present(c, "pool_size", cfg.calibration.pool_size);
      get_if_present(c, "idle_noise", cfg.calibration.idle_noise);
    }
    if (j.contains("optimizer")) {
      const auto& o = j.at("optimizer");
      auto& op = cfg.optimizer;
      get_if_present(o, "a0", op.a0);
      get_if_present(o, "c0", op.c0);
      get_if_present(o, "alpha", op.alpha);
      get_if_present(o, "gamma", op.gamma);
      get_if_present(o, "local_steps", op.local_steps);
      get_if_present(o, "batch_size", op.batch_size);
      get_if_present(o, "train_shots", op.train_shots);
      get_if_present(o, "eval_shots", op.eval_shots);
    }
    get_if_present(j, "seeds", cfg.seeds);
    get_if_present(j, "output_dir", cfg.output_dir);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("config schema violation: ") + e.what());
  }
  return cfg;
}

FederationConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_config_text(text);
}

std::string emit_config(const FederationConfig& cfg) {
  const auto& w = cfg.calibration.weights;
  json j{
      {"description", cfg.description},
      {"dataset",
       {{"name", cfg.dataset.name},
        {"train_images", cfg.dataset.train_images},
        {"train_labels", cfg.dataset.train_labels},
        {"test_images", cfg.dataset.test_images},
        {"test_labels", cfg.dataset.test_labels},
        {"train_container", cfg.dataset.train_container},
        {"test_container", cfg.dataset.test_container},
        {"classes", cfg.dataset.classes},
        {"train_size", cfg.dataset.train_size},
        {"test_size", cfg.dataset.test_size},
        {"blob_dim", cfg.dataset.blob_dim},
        {"blob_separation", cfg.dataset.blob_separation},
        {"data_seed", cfg.dataset.data_seed}}},
      {"model",
       {{"qubits", cfg.model.qubits},
        {"layers", cfg.model.layers},
        {"topology", to_string(cfg.model.topology)},
        {"fold", cfg.model.fold}}},
      {"federation",
       {{"clients", cfg.federation.clients},
        {"rho", cfg.federation.rho},
        {"rounds", cfg.federation.rounds},
        {"method", to_string(cfg.federation.method)},
        {"tau", cfg.federation.tau},
        {"beta", cfg.federation.beta},
        {"w_min", cfg.federation.w_min},
        {"partition", to_string(cfg.federation.partition)},
        {"alpha", cfg.federation.alpha}}},
      {"calibration",
       {{"profile_dir", cfg.calibration.profile_dir},
        {"weights", {w.lambda_1q, w.lambda_2q, w.lambda_ro, w.lambda_t1, w.lambda_t2}},
        {"pool_size", cfg.calibration.pool_size},
        {"idle_noise", cfg.calibration.idle_noise}}},
      {"optimizer",
       {{"a0", cfg.optimizer.a0},
        {"c0", cfg.optimizer.c0},
        {"alpha", cfg.optimizer.alpha},
        {"gamma", cfg.optimizer.gamma},
        {"local_steps", cfg.optimizer.local_steps},
        {"batch_size", cfg.optimizer.batch_size},
        {"train_shots", cfg.optimizer.train_shots},
        {"eval_shots", cfg.optimizer.eval_shots}}},
      {"seeds", cfg.seeds},
      {"output_dir", cfg.output_dir},
  };
  return j.dump(2) + "\n";
}

void validate_config(const FederationConfig& cfg, bool check_files) {
  namespace fs = std::filesystem;
  auto fail = [](const std::string& msg) { throw std::runtime_error(msg); };

  const auto& d = cfg.dataset;
  if (d.name != "blobs" && d.name != "mnist" && d.name != "fmnist" && d.name != "container")
    fail("dataset.name must be one of blobs, mnist, fmnist, container");
  if (d.classes.size() != 3) fail("dataset.classes must list exactly 3 labels");
  if (d.train_size == 0 || d.test_size == 0) fail("dataset sizes must be positive");
  if (d.name == "blobs" && d.blob_dim < cfg.model.qubits)
    fail("dataset.blob_dim must be >= model.qubits");

  if (cfg.model.qubits < 2) fail("model.qubits must be >= 2");
  if (cfg.model.layers < 1) fail("model.layers must be >= 1");
  if (cfg.model.fold < 1 || cfg.model.fold % 2 == 0) fail("model.fold must be odd and positive");

  const auto& f = cfg.federation;
  if (f.clients < 1) fail("federation.clients must be >= 1");
  if (f.rho < 0.0 || f.rho > 1.0) fail("rho out of [0,1]");
  if (f.rounds < 0) fail("federation.rounds must be >= 0");
  if (f.tau < 0.0) fail("federation.tau must be >= 0");
  if (f.beta < 0.0 || f.beta > 1.0) fail("federation.beta out of [0,1]");
  if (f.w_min < 0.0 || f.w_min > 1.0 / f.clients)
    fail("federation.w_min out of [0, 1/clients]");
  if (f.partition == PartitionMode::Dirichlet && !(f.alpha > 0.0))
    fail("federation.alpha must be positive for dirichlet partitions");
  if (d.train_size < static_cast<std::size_t>(f.clients))
    fail("dataset.train_size must be >= federation.clients");

  cfg.calibration.weights.validate();
  if (cfg.calibration.pool_size < 0) fail("calibration.pool_size must be >= 0");
  cfg.optimizer.validate();
  if (cfg.seeds.empty()) fail("seeds must list at least one seed");

  if (check_files) {
    if (!fs::is_directory(cfg.calibration.profile_dir))
      fail("calibration.profile_dir not found: " + cfg.calibration.profile_dir);
    auto need = [&](const std::string& p, const char* field) {
      if (p.empty()) fail(std::string("dataset.") + field + " is required for " + d.name);
      if (!fs::exists(p)) fail(std::string("dataset.") + field + " not found: " + p);
    };
    if (d.name == "mnist" || d.name == "fmnist") {
      need(d.train_images, "train_images");
      need(d.train_labels, "train_labels");
      need(d.test_images, "test_images");
      need(d.test_labels, "test_labels");
    } else if (d.name == "container") {
      need(d.train_container, "train_container");
      need(d.test_container, "test_container");
    }
  }
}

}  // namespace qfl
