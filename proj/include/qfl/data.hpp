// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace qfl {

enum class Split { Train, Test };

struct Dataset {
  std::vector<double> features;  // row-major, size() * dim entries
  std::vector<int> labels;
  int dim = 0;
  Split split = Split::Train;

  std::size_t size() const { return labels.size(); }
  std::span<const double> row(std::size_t i) const {
    return {features.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
};

// PCA fitted on the training split: centering mean, top components (orthonormal
// columns, deterministic sign), and the post-projection train min/max used for
// the [0, pi] feature scaling.
struct PcaModel {
  std::vector<double> mean;        // length d
  std::vector<double> components;  // row-major d x q
  std::vector<double> train_min;   // length q, post-projection
  std::vector<double> train_max;
  int input_dim = 0;
  int output_dim = 0;

  // Projects one row (no scaling).
  std::vector<double> project(std::span<const double> row) const;
};

struct Partition {
  std::vector<std::vector<std::size_t>> client_indices;
};

enum class PartitionMode { Iid, Dirichlet };

// IDX (big-endian) image/label pair, pixels scaled to [0, 1].
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

// Plain container: one JSON header line {rows, cols, label_count}, then
// rows*cols little-endian float32 features and label_count uint8 labels.
Dataset load_container(const std::string& path);
void save_container(const Dataset& ds, const std::string& path);

// Keeps only the three listed original labels, remapped to 0, 1, 2 in order.
Dataset restrict_classes(const Dataset& ds, const std::vector<int>& classes);

// Seeded shuffle, then keeps the first n rows.
Dataset subsample(const Dataset& ds, std::size_t n, std::uint64_t seed);

// Fits PCA on the train split only (covariance eigendecomposition, descending
// eigenvalues, largest-magnitude entry of each component made positive),
// projects both splits, min-max scales to [0, pi] with the train statistics,
// and clamps test values into that interval.
std::tuple<PcaModel, Dataset, Dataset> pca_fit_transform(const Dataset& train,
                                                         const Dataset& test, int q);

// Splits the train indices across clients. IID: seeded shuffle into K
// near-equal contiguous chunks. Dirichlet: per class, proportions drawn from
// Dir(alpha * 1_K) with largest-remainder rounding; empty clients are topped
// up from the largest one.
Partition partition(const std::vector<int>& labels, int num_clients, PartitionMode mode,
                    double alpha, std::uint64_t seed);

// Deterministic 3-class Gaussian blobs in `dim` dimensions; the class means
// sit on scaled coordinate axes so the signal survives PCA compression.
std::pair<Dataset, Dataset> make_blobs(std::size_t train_rows, std::size_t test_rows, int dim,
                                       double separation, std::uint64_t seed);

}  // namespace qfl
