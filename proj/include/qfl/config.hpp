// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qfl/calib.hpp"
#include "qfl/data.hpp"
#include "qfl/train.hpp"
#include "qfl/vqc.hpp"

namespace qfl {

enum class Method { FedAvg, Qrail, WpqflEuclidean, WpqflWeighted };

Method method_from_string(const std::string& s);
std::string to_string(Method m);
std::string to_string(PartitionMode m);

struct DatasetSpec {
  std::string name = "blobs";  // blobs | mnist | fmnist | container
  std::string train_images, train_labels, test_images, test_labels;  // IDX paths
  std::string train_container, test_container;                       // container paths
  std::vector<int> classes{0, 1, 2};
  std::size_t train_size = 600;
  std::size_t test_size = 300;
  int blob_dim = 16;
  double blob_separation = 3.0;
  std::uint64_t data_seed = 9001;  // fixed: the dataset does not vary across run seeds

  bool operator==(const DatasetSpec&) const = default;
};

struct ModelSpec {
  int qubits = 4;
  int layers = 4;
  Topology topology = Topology::Linear;
  int fold = 1;

  bool operator==(const ModelSpec&) const = default;
};

struct FederationSpec {
  int clients = 10;
  double rho = 0.8;
  int rounds = 10;
  Method method = Method::Qrail;
  double tau = 5.0;
  double beta = 0.2;
  double w_min = 0.05;
  PartitionMode partition = PartitionMode::Iid;
  double alpha = 0.5;  // dirichlet concentration

  bool operator==(const FederationSpec&) const = default;
};

struct CalibrationSpec {
  std::string profile_dir = "profiles";
  CompositeWeights weights;
  int pool_size = 0;        // 0 = min(5, floor(N/2))
  bool idle_noise = false;  // optional depth-dependent idle channel

  bool operator==(const CalibrationSpec&) const = default;
};

// Declarative description of one experiment; see configs/ for annotated
// examples. Serialized as JSON.
struct FederationConfig {
  std::string description;
  DatasetSpec dataset;
  ModelSpec model;
  FederationSpec federation;
  CalibrationSpec calibration;
  SpsaConfig optimizer;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::string output_dir = "runs/out";

  bool operator==(const FederationConfig&) const = default;
};

FederationConfig load_config(const std::string& path);
FederationConfig parse_config_text(const std::string& json_text);
std::string emit_config(const FederationConfig& cfg);

// Semantic checks (ranges, method parameters); with check_files also verifies
// that referenced paths exist. Throws std::runtime_error with a message
// naming the offending field.
void validate_config(const FederationConfig& cfg, bool check_files = true);

}  // namespace qfl
