#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

#include "ppl/datagen.hpp"
#include "ppl/histogram.hpp"
#include "ppl/model.hpp"

namespace ppl {

struct Evaluation {
  double overall = 0.0;       // top-1 accuracy
  double macro_avg = 0.0;     // unweighted mean of per-class accuracies
  Eigen::VectorXd per_class;  // per-class accuracy
  Eigen::MatrixXd confusion;  // rows true class, columns predicted
};

// Argmax prediction with ties broken toward the lower class index.
Evaluation evaluate(const Model& model, const Dataset& validation);

enum class Bucket { Head, Medium, Tail };

// head: n >= head_min; tail: n < tail_below; medium otherwise
struct HmtThresholds {
  double head_min = 0.0;
  double tail_below = 0.0;
};

std::vector<Bucket> hmt_split(const ClassHistogram& hist,
                              const HmtThresholds& thresholds);

// Bucket accuracy is the unweighted mean over member classes; an empty
// bucket is reported with count 0 and accuracy NaN.
struct HmtAccuracy {
  double head = 0.0;
  double medium = 0.0;
  double tail = 0.0;
  int head_classes = 0;
  int medium_classes = 0;
  int tail_classes = 0;
};

HmtAccuracy hmt_accuracy(const std::vector<Bucket>& buckets,
                         const Eigen::VectorXd& per_class);

struct SummaryStats {
  double mean = 0.0;
  double stddev = 0.0;  // sample stddev; 0 for a single value
};

SummaryStats aggregate(std::span<const double> values);

// One row per training epoch plus the end-of-run summary.
struct EpochRow {
  int epoch = 0;
  double train_loss = 0.0;
  double lr = 0.0;
  double alpha = 0.0;  // weighting exponent in effect
  double q = 1.0;      // sampling exponent in effect
  Evaluation eval;
  HmtAccuracy hmt;
};

struct RunRecord {
  std::vector<EpochRow> rows;
  int best_epoch = 0;
  double best_overall = 0.0;
  const EpochRow& final_row() const { return rows.back(); }
};

}  // namespace ppl
