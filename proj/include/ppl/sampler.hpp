#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "ppl/histogram.hpp"
#include "ppl/rng.hpp"
#include "ppl/schedules.hpp"

namespace ppl {

// p_j = n_j^q / sum_i n_i^q. q = 1 is instance-frequency sampling, q = 0 is
// class-uniform sampling; both endpoints are computed exactly.
Eigen::VectorXd class_probs(const ClassHistogram& hist, double q);

// class probabilities at an epoch of the phased schedule (q = 1 -> 1 - delta)
Eigen::VectorXd pps_probs_at(const ClassHistogram& hist,
                             const PhaseSchedule& schedule, int epoch);

struct SampleRef {
  int class_index = 0;
  std::int64_t within_class = 0;  // uniform position inside the class
};

// Two-stage draw with replacement: class by p_j, then uniform within class.
// The stream-taking overload advances the caller's stream; the seed-taking
// overload is self-contained and reproducible on its own.
std::vector<SampleRef> draw_epoch(const ClassHistogram& hist, double q,
                                  std::int64_t epoch_size, Rng& rng);
std::vector<SampleRef> draw_epoch(const ClassHistogram& hist, double q,
                                  std::int64_t epoch_size, std::uint64_t seed);

}  // namespace ppl
