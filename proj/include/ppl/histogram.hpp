#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ppl {

// Per-class training-set sample counts n_i. At least two classes, every
// count at least one.
class ClassHistogram {
 public:
  explicit ClassHistogram(std::vector<std::int64_t> counts)
      : counts_(std::move(counts)) {
    if (counts_.size() < 2) {
      throw std::invalid_argument("class histogram needs at least 2 classes");
    }
    total_ = 0;
    for (std::size_t i = 0; i < counts_.size(); ++i) {
      if (counts_[i] < 1) {
        throw std::invalid_argument("class " + std::to_string(i) +
                                    " has no samples");
      }
      total_ += counts_[i];
    }
  }

  int num_classes() const { return static_cast<int>(counts_.size()); }

  std::int64_t count(int c) const {
    if (c < 0 || c >= num_classes()) {
      throw std::out_of_range("class index " + std::to_string(c) +
                              " out of range");
    }
    return counts_[static_cast<std::size_t>(c)];
  }

  std::int64_t total() const { return total_; }

  std::int64_t min_count() const {
    return *std::min_element(counts_.begin(), counts_.end());
  }

  std::int64_t max_count() const {
    return *std::max_element(counts_.begin(), counts_.end());
  }

  // IF = n_max / n_min
  double imbalance_factor() const {
    return static_cast<double>(max_count()) / static_cast<double>(min_count());
  }

  const std::vector<std::int64_t>& counts() const { return counts_; }

 private:
  std::vector<std::int64_t> counts_;
  std::int64_t total_ = 0;
};

}  // namespace ppl
