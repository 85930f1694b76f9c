// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>

#include "doctest.h"
#include "qfl/data.hpp"
#include "qfl/rng.hpp"

using namespace qfl;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.14159265358979323846;

fs::path tmp_dir() {
  const fs::path dir = fs::temp_directory_path() / "qfl_data_test";
  fs::create_directories(dir);
  return dir;
}

void write_be32(std::ofstream& out, std::uint32_t v) {
  const unsigned char buf[4] = {static_cast<unsigned char>(v >> 24),
                                static_cast<unsigned char>(v >> 16),
                                static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v)};
  out.write(reinterpret_cast<const char*>(buf), 4);
}

// Tiny IDX pair: n images of rows x cols, pixel = (i + p) % 256, label = i % 10.
std::pair<fs::path, fs::path> write_idx(int n, int rows, int cols, bool truncate_payload = false,
                                        int label_count_override = -1) {
  const auto img_path = tmp_dir() / ("img_" + std::to_string(n) + std::to_string(truncate_payload) +
                                     std::to_string(label_count_override) + ".idx");
  const auto lab_path = tmp_dir() / ("lab_" + std::to_string(n) + std::to_string(truncate_payload) +
                                     std::to_string(label_count_override) + ".idx");
  {
    std::ofstream img(img_path, std::ios::binary);
    write_be32(img, 0x00000803);
    write_be32(img, n);
    write_be32(img, rows);
    write_be32(img, cols);
    const int pixels = truncate_payload ? n * rows * cols - 5 : n * rows * cols;
    for (int i = 0; i < pixels; ++i) img.put(static_cast<char>(i % 256));
  }
  {
    std::ofstream lab(lab_path, std::ios::binary);
    write_be32(lab, 0x00000801);
    const int count = label_count_override >= 0 ? label_count_override : n;
    write_be32(lab, count);
    for (int i = 0; i < count; ++i) lab.put(static_cast<char>(i % 10));
  }
  return {img_path, lab_path};
}

}  // namespace

TEST_CASE("load_idx parses a well-formed pair") {
  const auto [img, lab] = write_idx(12, 4, 3);
  const auto ds = load_idx(img.string(), lab.string());
  CHECK(ds.size() == 12);
  CHECK(ds.dim == 12);
  CHECK(ds.labels[3] == 3);
  for (double v : ds.features) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("load_idx rejects a truncated payload") {
  const auto [img, lab] = write_idx(12, 4, 3, /*truncate_payload=*/true);
  CHECK_THROWS_WITH_AS(load_idx(img.string(), lab.string()),
                       doctest::Contains("payload shorter"), std::runtime_error);
}

TEST_CASE("load_idx rejects mismatched counts and bad magic") {
  const auto [img, lab] = write_idx(12, 4, 3, false, /*label_count_override=*/10);
  CHECK_THROWS_WITH_AS(load_idx(img.string(), lab.string()), doctest::Contains("mismatch"),
                       std::runtime_error);

  const auto bad = tmp_dir() / "badmagic.idx";
  {
    std::ofstream out(bad, std::ios::binary);
    write_be32(out, 0xdeadbeef);
    write_be32(out, 0);
    write_be32(out, 1);
    write_be32(out, 1);
  }
  const auto [img2, lab2] = write_idx(2, 1, 1);
  CHECK_THROWS_WITH_AS(load_idx(bad.string(), lab2.string()), doctest::Contains("magic"),
                       std::runtime_error);
}

TEST_CASE("restrict_classes filters and remaps") {
  const auto [img, lab] = write_idx(30, 2, 2);  // labels 0..9 repeating
  const auto ds = load_idx(img.string(), lab.string());
  const auto r = restrict_classes(ds, {7, 0, 2});
  CHECK(r.size() == 9);  // three samples of each original label
  int hist[3] = {0, 0, 0};
  for (int l : r.labels) ++hist[l];
  CHECK(hist[0] == 3);  // original 7 -> 0
  CHECK(hist[1] == 3);  // original 0 -> 1
  CHECK(hist[2] == 3);

  CHECK_THROWS(restrict_classes(ds, {7, 7, 1}));
  CHECK_THROWS(restrict_classes(ds, {0, 1, 42}));
}

TEST_CASE("subsample is deterministic and size-correct") {
  const auto [img, lab] = write_idx(50, 2, 2);
  const auto ds = load_idx(img.string(), lab.string());
  const auto a = subsample(ds, 20, 9);
  const auto b = subsample(ds, 20, 9);
  CHECK(a.size() == 20);
  CHECK(a.features == b.features);
  CHECK(a.labels == b.labels);
  const auto all = subsample(ds, 500, 9);
  CHECK(all.size() == 50);
}

TEST_CASE("collinear data projects onto one component spanning [0, pi]") {
  Dataset train, test;
  train.dim = test.dim = 2;
  for (int i = 0; i < 10; ++i) {
    const double v = i * 0.5;
    train.features.insert(train.features.end(), {v, v});
    train.labels.push_back(i % 3);
  }
  test = train;
  test.split = Split::Test;
  const auto [model, train_p, test_p] = pca_fit_transform(train, test, 1);
  CHECK(model.output_dim == 1);
  const auto [lo, hi] = std::minmax_element(train_p.features.begin(), train_p.features.end());
  CHECK(*lo == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(*hi == doctest::Approx(kPi).epsilon(1e-12));
  // Rank-1 data cannot support two components.
  CHECK_THROWS_WITH_AS((pca_fit_transform(train, test, 2)), doctest::Contains("rank"),
                       std::invalid_argument);
}

TEST_CASE("projection of the train mean is zero before scaling") {
  Rng rng(31);
  Dataset train, test;
  train.dim = test.dim = 6;
  for (int i = 0; i < 40; ++i) {
    for (int j = 0; j < 6; ++j) train.features.push_back(rng.normal() + j);
    train.labels.push_back(i % 3);
  }
  test = train;
  const auto [model, train_p, test_p] = pca_fit_transform(train, test, 3);
  std::vector<double> mean(6, 0.0);
  for (int i = 0; i < 40; ++i)
    for (int j = 0; j < 6; ++j) mean[j] += train.features[i * 6 + j] / 40.0;
  for (double v : model.project(mean)) CHECK(std::abs(v) < 1e-8);

  // Components are orthonormal.
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      double dot = 0.0;
      for (int i = 0; i < 6; ++i) dot += model.components[i * 3 + a] * model.components[i * 3 + b];
      CHECK(dot == doctest::Approx(a == b ? 1.0 : 0.0).epsilon(1e-8));
    }
  }
}

TEST_CASE("full-dimensional PCA preserves pairwise distances before scaling") {
  Rng rng(13);
  Dataset train, test;
  train.dim = test.dim = 4;
  for (int i = 0; i < 30; ++i) {
    for (int j = 0; j < 4; ++j) train.features.push_back(rng.normal());
    train.labels.push_back(i % 3);
  }
  test = train;
  const auto [model, train_p, test_p] = pca_fit_transform(train, test, 4);
  auto dist = [](std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
  };
  for (int i = 0; i < 5; ++i) {
    for (int j = i + 1; j < 5; ++j) {
      const auto pi = model.project(train.row(i));
      const auto pj = model.project(train.row(j));
      CHECK(dist(pi, pj) == doctest::Approx(dist(train.row(i), train.row(j))).epsilon(1e-8));
    }
  }
}

TEST_CASE("test rows are clamped into [0, pi]") {
  Dataset train, test;
  train.dim = test.dim = 3;
  Rng rng(5);
  for (int i = 0; i < 20; ++i) {
    for (int j = 0; j < 3; ++j) train.features.push_back(rng.uniform01());
    train.labels.push_back(i % 3);
  }
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 3; ++j) test.features.push_back(rng.uniform01() * 4.0 - 2.0);
    test.labels.push_back(i % 3);
  }
  const auto [model, train_p, test_p] = pca_fit_transform(train, test, 2);
  for (double v : test_p.features) {
    CHECK(v >= 0.0);
    CHECK(v <= kPi);
  }
}

TEST_CASE("iid partition splits into near-equal disjoint chunks") {
  std::vector<int> labels(100);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i % 3);
  const auto part = partition(labels, 10, PartitionMode::Iid, 0.0, 4);
  std::set<std::size_t> seen;
  for (const auto& c : part.client_indices) {
    CHECK(c.size() == 10);
    seen.insert(c.begin(), c.end());
  }
  CHECK(seen.size() == 100);

  const auto uneven = partition(labels, 7, PartitionMode::Iid, 0.0, 4);
  std::size_t total = 0;
  for (const auto& c : uneven.client_indices) {
    CHECK(c.size() >= 100 / 7);
    CHECK(c.size() <= 100 / 7 + 1);
    total += c.size();
  }
  CHECK(total == 100);
}

TEST_CASE("huge-alpha dirichlet approaches the global label histogram") {
  std::vector<int> labels(900);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i % 3);
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto part = partition(labels, 5, PartitionMode::Dirichlet, 1e6, seed);
    for (const auto& c : part.client_indices) {
      double hist[3] = {0, 0, 0};
      for (auto i : c) hist[labels[i]] += 1.0;
      for (double h : hist)
        worst = std::max(worst, std::abs(h / static_cast<double>(c.size()) - 1.0 / 3.0));
    }
  }
  CHECK(worst < 0.02);
}

TEST_CASE("small-alpha dirichlet produces strong label skew") {
  std::vector<int> labels(900);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i % 3);
  int skewed_seeds = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto part = partition(labels, 10, PartitionMode::Dirichlet, 0.1, seed);
    std::set<std::size_t> seen;
    bool any_dominated = false;
    for (const auto& c : part.client_indices) {
      CHECK(!c.empty());
      seen.insert(c.begin(), c.end());
      double hist[3] = {0, 0, 0};
      for (auto i : c) hist[labels[i]] += 1.0;
      const double top = std::max({hist[0], hist[1], hist[2]});
      if (top / static_cast<double>(c.size()) >= 0.8) any_dominated = true;
    }
    CHECK(seen.size() == labels.size());  // disjoint and complete
    if (any_dominated) ++skewed_seeds;
  }
  CHECK(skewed_seeds > 10);
}

TEST_CASE("partition rejects more clients than samples") {
  std::vector<int> labels{0, 1, 2};
  CHECK_THROWS(partition(labels, 4, PartitionMode::Iid, 0.0, 1));
}

TEST_CASE("blobs are deterministic, balanced, and separable") {
  const auto [train, test] = make_blobs(300, 90, 8, 4.0, 9001);
  CHECK(train.size() == 300);
  CHECK(test.size() == 90);
  CHECK(train.dim == 8);
  int hist[3] = {0, 0, 0};
  for (int l : train.labels) ++hist[l];
  CHECK(hist[0] == 100);
  CHECK(hist[1] == 100);
  CHECK(hist[2] == 100);
  const auto [train2, test2] = make_blobs(300, 90, 8, 4.0, 9001);
  CHECK(train.features == train2.features);

  // Nearest class-mean classification should be nearly perfect at sep 4.
  std::vector<std::vector<double>> means(3, std::vector<double>(8, 0.0));
  for (std::size_t i = 0; i < train.size(); ++i)
    for (int j = 0; j < 8; ++j) means[train.labels[i]][j] += train.row(i)[j] / 100.0;
  int correct = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    int best = 0;
    double best_d = 1e300;
    for (int c = 0; c < 3; ++c) {
      double d = 0.0;
      for (int j = 0; j < 8; ++j) {
        const double diff = test.row(i)[j] - means[c][j];
        d += diff * diff;
      }
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    if (best == test.labels[i]) ++correct;
  }
  CHECK(static_cast<double>(correct) / static_cast<double>(test.size()) > 0.95);
}

TEST_CASE("container files round-trip") {
  const auto [train, test] = make_blobs(40, 10, 5, 3.0, 7);
  const auto path = tmp_dir() / "blob.bin";
  save_container(train, path.string());
  const auto loaded = load_container(path.string());
  CHECK(loaded.size() == train.size());
  CHECK(loaded.dim == train.dim);
  CHECK(loaded.labels == train.labels);
  for (std::size_t i = 0; i < train.features.size(); ++i)
    CHECK(loaded.features[i] == doctest::Approx(train.features[i]).epsilon(1e-6));
}
