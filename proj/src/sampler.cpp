#include "ppl/sampler.hpp"

#include <cmath>
#include <stdexcept>

namespace ppl {

Eigen::VectorXd class_probs(const ClassHistogram& hist, double q) {
  if (!(q >= 0.0 && q <= 1.0)) {
    throw std::invalid_argument("sampling exponent q must lie in [0,1]");
  }
  const int c = hist.num_classes();
  Eigen::VectorXd p(c);
  if (q == 0.0) {
    p.setConstant(1.0 / static_cast<double>(c));
    return p;
  }
  if (q == 1.0) {
    const double total = static_cast<double>(hist.total());
    for (int j = 0; j < c; ++j) {
      p(j) = static_cast<double>(hist.count(j)) / total;
    }
    return p;
  }
  for (int j = 0; j < c; ++j) {
    p(j) = std::pow(static_cast<double>(hist.count(j)), q);
  }
  return p / p.sum();
}

Eigen::VectorXd pps_probs_at(const ClassHistogram& hist,
                             const PhaseSchedule& schedule, int epoch) {
  return class_probs(hist, q_at(schedule, epoch));
}

std::vector<SampleRef> draw_epoch(const ClassHistogram& hist, double q,
                                  std::int64_t epoch_size, Rng& rng) {
  if (epoch_size < 1) throw std::invalid_argument("epoch size must be >= 1");
  const Eigen::VectorXd probs = class_probs(hist, q);
  const int c = hist.num_classes();
  Eigen::VectorXd cdf(c);
  double acc = 0.0;
  for (int j = 0; j < c; ++j) {
    acc += probs(j);
    cdf(j) = acc;
  }
  cdf(c - 1) = 1.0;  // guard against accumulated rounding

  std::vector<SampleRef> out;
  out.reserve(static_cast<std::size_t>(epoch_size));
  for (std::int64_t i = 0; i < epoch_size; ++i) {
    const double u = rng.uniform();
    int lo = 0;
    int hi = c - 1;
    while (lo < hi) {
      const int mid = (lo + hi) / 2;
      if (u < cdf(mid)) {
        hi = mid;
      } else {
        lo = mid + 1;
      }
    }
    const auto count = static_cast<std::uint64_t>(hist.count(lo));
    out.push_back(SampleRef{
        lo, static_cast<std::int64_t>(rng.uniform_index(count))});
  }
  return out;
}

std::vector<SampleRef> draw_epoch(const ClassHistogram& hist, double q,
                                  std::int64_t epoch_size,
                                  std::uint64_t seed) {
  Rng rng(seed);
  return draw_epoch(hist, q, epoch_size, rng);
}

}  // namespace ppl
