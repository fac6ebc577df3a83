#include "ppl/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ppl {

Evaluation evaluate(const Model& model, const Dataset& validation) {
  if (validation.dim() != model.in_dim() ||
      validation.num_classes() != model.num_classes()) {
    throw std::invalid_argument("model and dataset shapes do not match");
  }
  const int c = validation.num_classes();
  const Eigen::MatrixXd logits =
      model.forward(validation.features().transpose());
  Evaluation out;
  out.confusion = Eigen::MatrixXd::Zero(c, c);
  for (Eigen::Index i = 0; i < logits.cols(); ++i) {
    int pred = 0;
    double best = logits(0, i);
    for (int j = 1; j < c; ++j) {
      if (logits(j, i) > best) {  // strict: ties keep the lower index
        best = logits(j, i);
        pred = j;
      }
    }
    out.confusion(validation.labels()[static_cast<std::size_t>(i)], pred) +=
        1.0;
  }
  out.per_class.resize(c);
  for (int j = 0; j < c; ++j) {
    out.per_class(j) = out.confusion(j, j) / out.confusion.row(j).sum();
  }
  out.overall = out.confusion.trace() / static_cast<double>(validation.size());
  out.macro_avg = out.per_class.mean();
  return out;
}

std::vector<Bucket> hmt_split(const ClassHistogram& hist,
                              const HmtThresholds& thresholds) {
  if (thresholds.tail_below > thresholds.head_min) {
    throw std::invalid_argument("hmt thresholds must be ordered");
  }
  std::vector<Bucket> buckets(static_cast<std::size_t>(hist.num_classes()));
  for (int j = 0; j < hist.num_classes(); ++j) {
    const auto n = static_cast<double>(hist.count(j));
    if (n >= thresholds.head_min) {
      buckets[static_cast<std::size_t>(j)] = Bucket::Head;
    } else if (n < thresholds.tail_below) {
      buckets[static_cast<std::size_t>(j)] = Bucket::Tail;
    } else {
      buckets[static_cast<std::size_t>(j)] = Bucket::Medium;
    }
  }
  return buckets;
}

HmtAccuracy hmt_accuracy(const std::vector<Bucket>& buckets,
                         const Eigen::VectorXd& per_class) {
  if (static_cast<Eigen::Index>(buckets.size()) != per_class.size()) {
    throw std::invalid_argument("bucket count does not match class count");
  }
  HmtAccuracy out;
  double sums[3] = {0.0, 0.0, 0.0};
  int counts[3] = {0, 0, 0};
  for (std::size_t j = 0; j < buckets.size(); ++j) {
    const int b = static_cast<int>(buckets[j]);
    sums[b] += per_class(static_cast<Eigen::Index>(j));
    ++counts[b];
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  out.head = counts[0] > 0 ? sums[0] / counts[0] : nan;
  out.medium = counts[1] > 0 ? sums[1] / counts[1] : nan;
  out.tail = counts[2] > 0 ? sums[2] / counts[2] : nan;
  out.head_classes = counts[0];
  out.medium_classes = counts[1];
  out.tail_classes = counts[2];
  return out;
}

SummaryStats aggregate(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("nothing to aggregate");
  SummaryStats s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

}  // namespace ppl
