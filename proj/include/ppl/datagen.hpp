#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "ppl/histogram.hpp"

namespace ppl {

enum class ProfileKind { LongTailed, Step };

const char* to_string(ProfileKind kind);
ProfileKind profile_kind_from_string(const std::string& name);

// Class-count profile with imbalance factor IF = n_max / n_min.
//   LongTailed: n_i = round(n_max * IF^(-i / (C-1))), geometric decay
//   Step:       first ceil(C/2) classes at n_max, rest at round(n_max / IF)
struct ImbalanceProfile {
  ProfileKind kind = ProfileKind::LongTailed;
  double imbalance_factor = 1.0;  // >= 1
  std::int64_t n_max = 0;
  int num_classes = 0;
};

ClassHistogram profile_counts(const ImbalanceProfile& profile);

enum class Split { Train, Validation };

// Immutable labelled feature matrix, one sample per row, with the class
// histogram and per-class row index derived at construction.
class Dataset {
 public:
  Dataset(Eigen::MatrixXd features, std::vector<int> labels, int num_classes,
          Split split);

  const Eigen::MatrixXd& features() const { return features_; }
  const std::vector<int>& labels() const { return labels_; }
  const ClassHistogram& histogram() const { return histogram_; }
  Split split() const { return split_; }
  std::int64_t size() const { return features_.rows(); }
  int dim() const { return static_cast<int>(features_.cols()); }
  int num_classes() const { return histogram_.num_classes(); }
  const std::vector<int>& rows_of_class(int c) const;

 private:
  Eigen::MatrixXd features_;
  std::vector<int> labels_;
  ClassHistogram histogram_;
  Split split_;
  std::vector<std::vector<int>> rows_by_class_;
};

struct DataBundle {
  Dataset train;
  Dataset val;                 // class-balanced validation split
  Eigen::MatrixXd class_means;  // D x C generating means (synthetic only)
};

// Gaussian-mixture classification data. Class means are orthonormal random
// directions scaled by class_sep (random unit directions when C > D), with
// isotropic noise. Emits the imbalanced train split plus a balanced
// validation split of val_per_class samples per class.
DataBundle synth_gaussians(const ClassHistogram& counts, int dim,
                           double class_sep, double noise, int val_per_class,
                           std::uint64_t seed);

// Per-class uniform subsampling without replacement to round(qr * n_i),
// at least one sample per class; qr = 1 returns the dataset unchanged.
Dataset apply_qr(const Dataset& ds, double qr, std::uint64_t seed);

// Comma-separated text: D numeric feature columns then an integer label
// column. Parse failures report 1-based line numbers.
Dataset load_tabular(const std::string& path, bool header);

}  // namespace ppl
