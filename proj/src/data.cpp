// SPDX-License-Identifier: Apache-2.0
#include "qfl/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>
#include <tuple>

#include <Eigen/Dense>

#include "qfl/rng.hpp"
#include "json.hpp"

namespace qfl {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::uint32_t read_be32(std::istream& in, const std::string& what) {
  unsigned char buf[4];
  if (!in.read(reinterpret_cast<char*>(buf), 4))
    throw std::runtime_error("IDX read failure: " + what);
  return (std::uint32_t(buf[0]) << 24) | (std::uint32_t(buf[1]) << 16) |
         (std::uint32_t(buf[2]) << 8) | std::uint32_t(buf[3]);
}

}  // namespace

std::vector<double> PcaModel::project(std::span<const double> row) const {
  if (static_cast<int>(row.size()) != input_dim)
    throw std::invalid_argument("PcaModel::project: dimension mismatch");
  std::vector<double> out(output_dim, 0.0);
  for (int i = 0; i < input_dim; ++i) {
    const double centered = row[i] - mean[i];
    const double* comp_row = components.data() + static_cast<std::size_t>(i) * output_dim;
    for (int j = 0; j < output_dim; ++j) out[j] += centered * comp_row[j];
  }
  return out;
}

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
  std::ifstream img(images_path, std::ios::binary);
  if (!img) throw std::runtime_error("cannot open IDX image file: " + images_path);
  std::ifstream lab(labels_path, std::ios::binary);
  if (!lab) throw std::runtime_error("cannot open IDX label file: " + labels_path);

  if (read_be32(img, "image magic") != 0x00000803u)
    throw std::runtime_error("bad IDX image magic in " + images_path);
  const std::uint32_t n_img = read_be32(img, "image count");
  const std::uint32_t rows = read_be32(img, "row count");
  const std::uint32_t cols = read_be32(img, "column count");

  if (read_be32(lab, "label magic") != 0x00000801u)
    throw std::runtime_error("bad IDX label magic in " + labels_path);
  const std::uint32_t n_lab = read_be32(lab, "label count");
  if (n_img != n_lab)
    throw std::runtime_error("IDX image/label count mismatch: " + std::to_string(n_img) + " vs " +
                             std::to_string(n_lab));

  const std::size_t dim = std::size_t(rows) * cols;
  Dataset ds;
  ds.dim = static_cast<int>(dim);
  ds.features.resize(std::size_t(n_img) * dim);
  ds.labels.resize(n_img);

  std::vector<unsigned char> buf(dim);
  for (std::uint32_t i = 0; i < n_img; ++i) {
    if (!img.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(dim)))
      throw std::runtime_error("IDX payload shorter than header count in " + images_path);
    double* dst = ds.features.data() + std::size_t(i) * dim;
    for (std::size_t p = 0; p < dim; ++p) dst[p] = buf[p] / 255.0;
  }
  for (std::uint32_t i = 0; i < n_lab; ++i) {
    unsigned char l;
    if (!lab.read(reinterpret_cast<char*>(&l), 1))
      throw std::runtime_error("IDX payload shorter than header count in " + labels_path);
    ds.labels[i] = l;
  }
  return ds;
}

Dataset load_container(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open container file: " + path);
  std::string header_line;
  if (!std::getline(in, header_line)) throw std::runtime_error("container header missing: " + path);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_line);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("container header parse failure: " + std::string(e.what()));
  }
  const auto rows = header.at("rows").get<std::size_t>();
  const auto cols = header.at("cols").get<std::size_t>();
  const auto label_count = header.at("label_count").get<std::size_t>();
  if (label_count != rows)
    throw std::runtime_error("container label_count does not match rows in " + path);

  Dataset ds;
  ds.dim = static_cast<int>(cols);
  ds.features.resize(rows * cols);
  ds.labels.resize(rows);
  std::vector<float> fbuf(rows * cols);
  if (!in.read(reinterpret_cast<char*>(fbuf.data()),
               static_cast<std::streamsize>(fbuf.size() * sizeof(float))))
    throw std::runtime_error("container payload shorter than header count in " + path);
  for (std::size_t i = 0; i < fbuf.size(); ++i) ds.features[i] = fbuf[i];
  std::vector<unsigned char> lbuf(rows);
  if (!in.read(reinterpret_cast<char*>(lbuf.data()), static_cast<std::streamsize>(rows)))
    throw std::runtime_error("container payload shorter than header count in " + path);
  for (std::size_t i = 0; i < rows; ++i) ds.labels[i] = lbuf[i];
  return ds;
}

void save_container(const Dataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write container file: " + path);
  nlohmann::json header{{"rows", ds.size()}, {"cols", ds.dim}, {"label_count", ds.size()}};
  out << header.dump() << "\n";
  std::vector<float> fbuf(ds.features.begin(), ds.features.end());
  out.write(reinterpret_cast<const char*>(fbuf.data()),
            static_cast<std::streamsize>(fbuf.size() * sizeof(float)));
  std::vector<unsigned char> lbuf(ds.labels.begin(), ds.labels.end());
  out.write(reinterpret_cast<const char*>(lbuf.data()), static_cast<std::streamsize>(lbuf.size()));
}

Dataset restrict_classes(const Dataset& ds, const std::vector<int>& classes) {
  if (classes.size() != 3) throw std::invalid_argument("restrict_classes: need exactly 3 classes");
  std::set<int> unique(classes.begin(), classes.end());
  if (unique.size() != 3) throw std::invalid_argument("restrict_classes: duplicate class label");

  for (int c : classes) {
    if (std::find(ds.labels.begin(), ds.labels.end(), c) == ds.labels.end())
      throw std::invalid_argument("restrict_classes: class " + std::to_string(c) +
                                  " absent from dataset");
  }

  Dataset out;
  out.dim = ds.dim;
  out.split = ds.split;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto it = std::find(classes.begin(), classes.end(), ds.labels[i]);
    if (it == classes.end()) continue;
    out.labels.push_back(static_cast<int>(it - classes.begin()));
    const auto row = ds.row(i);
    out.features.insert(out.features.end(), row.begin(), row.end());
  }
  return out;
}

Dataset subsample(const Dataset& ds, std::size_t n, std::uint64_t seed) {
  if (n >= ds.size()) return ds;
  Rng rng(seed);
  std::vector<std::size_t> pick = rng.sample_without_replacement(ds.size(), n);
  Dataset out;
  out.dim = ds.dim;
  out.split = ds.split;
  out.labels.reserve(n);
  out.features.reserve(n * static_cast<std::size_t>(ds.dim));
  for (std::size_t i : pick) {
    out.labels.push_back(ds.labels[i]);
    const auto row = ds.row(i);
    out.features.insert(out.features.end(), row.begin(), row.end());
  }
  return out;
}

std::tuple<PcaModel, Dataset, Dataset> pca_fit_transform(const Dataset& train,
                                                         const Dataset& test, int q) {
  const int d = train.dim;
  if (test.dim != d) throw std::invalid_argument("pca_fit_transform: split dimension mismatch");
  if (q < 1 || q > d) throw std::invalid_argument("pca_fit_transform: invalid target dimension");
  const std::size_t n = train.size();
  if (n < static_cast<std::size_t>(q) + 1)
    throw std::invalid_argument("pca_fit_transform: train split too small to fit " +
                                std::to_string(q) + " components");

  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> x(
      train.features.data(), static_cast<Eigen::Index>(n), d);
  Eigen::RowVectorXd mean = x.colwise().mean();
  Eigen::MatrixXd centered = x.rowwise() - mean;
  Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("pca_fit_transform: eigendecomposition failed");
  const Eigen::VectorXd evals = solver.eigenvalues();  // ascending
  const Eigen::MatrixXd evecs = solver.eigenvectors();

  const double tol = std::max(evals.cwiseAbs().maxCoeff(), 1.0e-30) * 1e-12;
  int rank = 0;
  for (Eigen::Index i = 0; i < evals.size(); ++i)
    if (evals[i] > tol) ++rank;
  if (rank < q)
    throw std::invalid_argument("pca_fit_transform: rank deficiency, achievable rank is " +
                                std::to_string(rank) + " < " + std::to_string(q));

  PcaModel model;
  model.input_dim = d;
  model.output_dim = q;
  model.mean.assign(mean.data(), mean.data() + d);
  model.components.assign(static_cast<std::size_t>(d) * q, 0.0);
  for (int j = 0; j < q; ++j) {
    Eigen::VectorXd comp = evecs.col(d - 1 - j);  // descending eigenvalue order
    // Sign convention: the largest-magnitude entry (first on ties) is positive.
    Eigen::Index arg = 0;
    for (Eigen::Index i = 1; i < comp.size(); ++i)
      if (std::abs(comp[i]) > std::abs(comp[arg])) arg = i;
    if (comp[arg] < 0.0) comp = -comp;
    for (int i = 0; i < d; ++i) model.components[static_cast<std::size_t>(i) * q + j] = comp[i];
  }

  auto project_all = [&](const Dataset& ds) {
    Dataset out;
    out.dim = q;
    out.split = ds.split;
    out.labels = ds.labels;
    out.features.reserve(ds.size() * static_cast<std::size_t>(q));
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const auto p = model.project(ds.row(i));
      out.features.insert(out.features.end(), p.begin(), p.end());
    }
    return out;
  };

  Dataset train_p = project_all(train);
  Dataset test_p = project_all(test);

  model.train_min.assign(q, std::numeric_limits<double>::infinity());
  model.train_max.assign(q, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < train_p.size(); ++i) {
    for (int j = 0; j < q; ++j) {
      const double v = train_p.features[i * q + j];
      model.train_min[j] = std::min(model.train_min[j], v);
      model.train_max[j] = std::max(model.train_max[j], v);
    }
  }

  auto scale = [&](Dataset& ds, bool clamp) {
    for (std::size_t i = 0; i < ds.size(); ++i) {
      for (int j = 0; j < q; ++j) {
        double& v = ds.features[i * q + j];
        const double range = model.train_max[j] - model.train_min[j];
        v = range > 0.0 ? (v - model.train_min[j]) / range * kPi : 0.0;
        if (clamp) v = std::clamp(v, 0.0, kPi);
      }
    }
  };
  scale(train_p, false);
  scale(test_p, true);
  return {std::move(model), std::move(train_p), std::move(test_p)};
}

Partition partition(const std::vector<int>& labels, int num_clients, PartitionMode mode,
                    double alpha, std::uint64_t seed) {
  const std::size_t n = labels.size();
  if (num_clients < 1) throw std::invalid_argument("partition: need at least one client");
  if (n < static_cast<std::size_t>(num_clients))
    throw std::invalid_argument("partition: fewer samples than clients");

  Rng rng(seed);
  Partition part;
  part.client_indices.resize(num_clients);

  if (mode == PartitionMode::Iid) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    rng.shuffle(idx);
    const std::size_t base = n / num_clients;
    const std::size_t extra = n % num_clients;
    std::size_t at = 0;
    for (int k = 0; k < num_clients; ++k) {
      const std::size_t take = base + (static_cast<std::size_t>(k) < extra ? 1 : 0);
      part.client_indices[k].assign(idx.begin() + at, idx.begin() + at + take);
      at += take;
    }
    return part;
  }

  if (!(alpha > 0.0)) throw std::invalid_argument("partition: dirichlet alpha must be positive");
  const int num_classes = *std::max_element(labels.begin(), labels.end()) + 1;
  for (int c = 0; c < num_classes; ++c) {
    std::vector<std::size_t> class_idx;
    for (std::size_t i = 0; i < n; ++i)
      if (labels[i] == c) class_idx.push_back(i);
    if (class_idx.empty()) continue;

    const auto props = rng.dirichlet(alpha, static_cast<std::size_t>(num_clients));
    // Largest-remainder rounding of props * |class|.
    const std::size_t total = class_idx.size();
    std::vector<std::size_t> take(num_clients);
    std::vector<std::pair<double, int>> remainders;
    std::size_t assigned = 0;
    for (int k = 0; k < num_clients; ++k) {
      const double exact = props[k] * static_cast<double>(total);
      take[k] = static_cast<std::size_t>(std::floor(exact));
      assigned += take[k];
      remainders.push_back({exact - std::floor(exact), k});
    }
    std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    for (std::size_t r = 0; r < total - assigned; ++r) ++take[remainders[r].second];

    std::size_t at = 0;
    for (int k = 0; k < num_clients; ++k) {
      for (std::size_t t = 0; t < take[k]; ++t)
        part.client_indices[k].push_back(class_idx[at++]);
    }
  }

  // Top up empty clients from the largest one.
  for (;;) {
    int empty = -1;
    for (int k = 0; k < num_clients; ++k) {
      if (part.client_indices[k].empty()) {
        empty = k;
        break;
      }
    }
    if (empty < 0) break;
    int largest = 0;
    for (int k = 1; k < num_clients; ++k) {
      if (part.client_indices[k].size() > part.client_indices[largest].size()) largest = k;
    }
    if (part.client_indices[largest].size() <= 1)
      throw std::runtime_error("partition: cannot make every client non-empty");
    part.client_indices[empty].push_back(part.client_indices[largest].back());
    part.client_indices[largest].pop_back();
  }
  return part;
}

std::pair<Dataset, Dataset> make_blobs(std::size_t train_rows, std::size_t test_rows, int dim,
                                       double separation, std::uint64_t seed) {
  if (dim < 3) throw std::invalid_argument("make_blobs: need at least 3 dimensions");

  // A fixed sequence of Givens rotations mixes the class signal into every
  // coordinate, so no single feature separates the classes on its own.
  struct Givens {
    int i, j;
    double c, s;
  };
  std::vector<Givens> rotations;
  {
    Rng rot_rng(mix_seed(seed, 0x0b10b5));
    for (int pass = 0; pass < 3; ++pass) {
      for (int i = 0; i < dim; ++i) {
        const int j = (i + 1 + pass) % dim;
        if (j == i) continue;
        const double angle = rot_rng.uniform01() * 2.0 * kPi;
        rotations.push_back({i, j, std::cos(angle), std::sin(angle)});
      }
    }
  }

  Rng rng(seed);
  auto make = [&](std::size_t rows, Split split) {
    Dataset ds;
    ds.dim = dim;
    ds.split = split;
    ds.features.resize(rows * static_cast<std::size_t>(dim));
    ds.labels.resize(rows);
    for (std::size_t i = 0; i < rows; ++i) {
      const int label = static_cast<int>(i % 3);
      ds.labels[i] = label;
      double* row = ds.features.data() + i * static_cast<std::size_t>(dim);
      for (int j = 0; j < dim; ++j) row[j] = rng.normal();
      row[label] += separation;
      for (const auto& g : rotations) {
        const double a = row[g.i];
        const double b = row[g.j];
        row[g.i] = g.c * a - g.s * b;
        row[g.j] = g.s * a + g.c * b;
      }
    }
    return ds;
  };
  Dataset train = make(train_rows, Split::Train);
  Dataset test = make(test_rows, Split::Test);
  return {std::move(train), std::move(test)};
}

}  // namespace qfl
