#include "ppl/datagen.hpp"

#include <Eigen/QR>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ppl/rng.hpp"

namespace ppl {

const char* to_string(ProfileKind kind) {
  return kind == ProfileKind::LongTailed ? "lt" : "step";
}

ProfileKind profile_kind_from_string(const std::string& name) {
  if (name == "lt") return ProfileKind::LongTailed;
  if (name == "step") return ProfileKind::Step;
  throw std::invalid_argument("unknown profile kind '" + name +
                              "' (expected lt|step)");
}

ClassHistogram profile_counts(const ImbalanceProfile& profile) {
  if (profile.num_classes < 2) {
    throw std::invalid_argument("profile needs at least 2 classes");
  }
  if (!(profile.imbalance_factor >= 1.0)) {
    throw std::invalid_argument("imbalance factor must be >= 1");
  }
  if (profile.n_max < 1) {
    throw std::invalid_argument("largest class size must be >= 1");
  }
  const int c = profile.num_classes;
  const auto n_max = static_cast<double>(profile.n_max);
  std::vector<std::int64_t> counts(static_cast<std::size_t>(c));
  if (profile.kind == ProfileKind::LongTailed) {
    for (int i = 0; i < c; ++i) {
      const double frac = static_cast<double>(i) / static_cast<double>(c - 1);
      counts[static_cast<std::size_t>(i)] =
          std::llround(n_max * std::pow(profile.imbalance_factor, -frac));
    }
  } else {
    const std::int64_t tail = std::llround(n_max / profile.imbalance_factor);
    const int head_classes = (c + 1) / 2;
    for (int i = 0; i < c; ++i) {
      counts[static_cast<std::size_t>(i)] =
          i < head_classes ? profile.n_max : tail;
    }
  }
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] < 1) {
      throw std::invalid_argument(
          "profile yields an empty class " + std::to_string(i) +
          " (n_max too small for the imbalance factor)");
    }
  }
  return ClassHistogram(std::move(counts));
}

Dataset::Dataset(Eigen::MatrixXd features, std::vector<int> labels,
                 int num_classes, Split split)
    : features_(std::move(features)),
      labels_(std::move(labels)),
      histogram_([&] {
        if (static_cast<std::int64_t>(labels_.size()) != features_.rows()) {
          throw std::invalid_argument("label count does not match row count");
        }
        if (num_classes < 2) {
          throw std::invalid_argument("dataset needs at least 2 classes");
        }
        std::vector<std::int64_t> counts(
            static_cast<std::size_t>(num_classes), 0);
        for (int label : labels_) {
          if (label < 0 || label >= num_classes) {
            throw std::invalid_argument("label " + std::to_string(label) +
                                        " out of range");
          }
          ++counts[static_cast<std::size_t>(label)];
        }
        return ClassHistogram(std::move(counts));
      }()),
      split_(split) {
  rows_by_class_.resize(static_cast<std::size_t>(num_classes));
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    rows_by_class_[static_cast<std::size_t>(labels_[i])].push_back(
        static_cast<int>(i));
  }
}

const std::vector<int>& Dataset::rows_of_class(int c) const {
  if (c < 0 || c >= num_classes()) {
    throw std::out_of_range("class index out of range");
  }
  return rows_by_class_[static_cast<std::size_t>(c)];
}

namespace {

// Orthonormal directions when they fit into the ambient dimension, otherwise
// random unit vectors; deterministic given the stream.
Eigen::MatrixXd class_directions(int dim, int num_classes, Rng& rng) {
  Eigen::MatrixXd g(dim, num_classes);
  for (int j = 0; j < num_classes; ++j) {
    for (int i = 0; i < dim; ++i) {
      g(i, j) = rng.normal();
    }
  }
  if (num_classes <= dim) {
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ() *
                        Eigen::MatrixXd::Identity(dim, num_classes);
    // fix signs for a canonical factorization
    for (int j = 0; j < num_classes; ++j) {
      if (qr.matrixQR()(j, j) < 0.0) q.col(j) = -q.col(j);
    }
    return q;
  }
  for (int j = 0; j < num_classes; ++j) {
    g.col(j).normalize();
  }
  return g;
}

Dataset sample_split(const Eigen::MatrixXd& means, double noise,
                     const std::vector<std::int64_t>& counts, Split split,
                     Rng& rng) {
  const int dim = static_cast<int>(means.rows());
  const int c = static_cast<int>(means.cols());
  std::int64_t total = 0;
  for (std::int64_t n : counts) total += n;
  Eigen::MatrixXd x(total, dim);
  std::vector<int> labels(static_cast<std::size_t>(total));
  std::int64_t row = 0;
  for (int j = 0; j < c; ++j) {
    for (std::int64_t k = 0; k < counts[static_cast<std::size_t>(j)]; ++k) {
      for (int d = 0; d < dim; ++d) {
        x(row, d) = means(d, j) + noise * rng.normal();
      }
      labels[static_cast<std::size_t>(row)] = j;
      ++row;
    }
  }
  return Dataset(std::move(x), std::move(labels), c, split);
}

}  // namespace

DataBundle synth_gaussians(const ClassHistogram& counts, int dim,
                           double class_sep, double noise, int val_per_class,
                           std::uint64_t seed) {
  if (dim < 2) throw std::invalid_argument("feature dimension must be >= 2");
  if (!(class_sep > 0.0)) {
    throw std::invalid_argument("class separation must be > 0");
  }
  if (noise < 0.0) throw std::invalid_argument("noise must be >= 0");
  if (val_per_class < 1) {
    throw std::invalid_argument("validation size per class must be >= 1");
  }
  Rng mean_rng(seed, 0);
  Rng train_rng(seed, 1);
  Rng val_rng(seed, 2);
  const int c = counts.num_classes();
  const Eigen::MatrixXd means =
      class_sep * class_directions(dim, c, mean_rng);
  Dataset train = sample_split(means, noise, counts.counts(), Split::Train,
                               train_rng);
  const std::vector<std::int64_t> val_counts(
      static_cast<std::size_t>(c), static_cast<std::int64_t>(val_per_class));
  Dataset val =
      sample_split(means, noise, val_counts, Split::Validation, val_rng);
  return DataBundle{std::move(train), std::move(val), means};
}

Dataset apply_qr(const Dataset& ds, double qr, std::uint64_t seed) {
  if (!(qr > 0.0 && qr <= 1.0)) {
    throw std::invalid_argument("quantity ratio must lie in (0,1]");
  }
  if (qr == 1.0) return ds;
  Rng rng(seed);
  std::vector<int> keep;
  for (int c = 0; c < ds.num_classes(); ++c) {
    std::vector<int> rows = ds.rows_of_class(c);
    const auto target = std::max<std::int64_t>(
        1, std::llround(qr * static_cast<double>(rows.size())));
    rng.shuffle(rows);
    rows.resize(static_cast<std::size_t>(target));
    keep.insert(keep.end(), rows.begin(), rows.end());
  }
  Eigen::MatrixXd x(static_cast<std::int64_t>(keep.size()), ds.dim());
  std::vector<int> labels(keep.size());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    x.row(static_cast<std::int64_t>(i)) = ds.features().row(keep[i]);
    labels[i] = ds.labels()[static_cast<std::size_t>(keep[i])];
  }
  return Dataset(std::move(x), std::move(labels), ds.num_classes(),
                 ds.split());
}

Dataset load_tabular(const std::string& path, bool header) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  int max_label = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (header && line_no == 1) continue;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() < 2) {
      throw std::runtime_error("line " + std::to_string(line_no) +
                               ": need at least one feature and a label");
    }
    if (width == 0) {
      width = cells.size();
    } else if (cells.size() != width) {
      throw std::runtime_error(
          "line " + std::to_string(line_no) + ": expected " +
          std::to_string(width) + " columns, got " +
          std::to_string(cells.size()));
    }
    std::vector<double> feats(width - 1);
    for (std::size_t i = 0; i + 1 < width; ++i) {
      try {
        std::size_t used = 0;
        feats[i] = std::stod(cells[i], &used);
        while (used < cells[i].size() &&
               std::isspace(static_cast<unsigned char>(cells[i][used]))) {
          ++used;
        }
        if (used != cells[i].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw std::runtime_error("line " + std::to_string(line_no) +
                                 ": feature column " + std::to_string(i + 1) +
                                 " is not numeric: '" + cells[i] + "'");
      }
    }
    int label = 0;
    try {
      std::size_t used = 0;
      label = std::stoi(cells.back(), &used);
      if (used != cells.back().size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw std::runtime_error("line " + std::to_string(line_no) +
                               ": label column is not an integer: '" +
                               cells.back() + "'");
    }
    if (label < 0) {
      throw std::runtime_error("line " + std::to_string(line_no) +
                               ": label must be >= 0");
    }
    max_label = std::max(max_label, label);
    rows.push_back(std::move(feats));
    labels.push_back(label);
  }
  if (rows.empty()) throw std::runtime_error("'" + path + "' has no data rows");
  Eigen::MatrixXd x(static_cast<std::int64_t>(rows.size()),
                    static_cast<std::int64_t>(width - 1));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j + 1 < width; ++j) {
      x(static_cast<std::int64_t>(i), static_cast<std::int64_t>(j)) =
          rows[i][j];
    }
  }
  // Dataset construction rejects any class in 0..max_label with no samples
  return Dataset(std::move(x), std::move(labels), max_label + 1, Split::Train);
}

}  // namespace ppl
