#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>

#include "ppl/rng.hpp"
#include "ppl/schedules.hpp"

namespace ppl {

// Mixup     label factor equals the feature factor (bounds collapse onto
//           lambda_x, which disables the relaxation cases)
// Remix     bounds fixed to (0, 1)
// PPmix     bounds follow the phase schedule: (lambda_x, lambda_x) before
//           the window, (0, 1) after it
enum class MixMode { Mixup, Remix, PPmix };

const char* to_string(MixMode mode);
MixMode mix_mode_from_string(const std::string& name);

struct MixConfig {
  MixMode mode = MixMode::PPmix;
  double kappa = 3.0;       // class-ratio threshold, >= 1
  double tau = 0.5;         // lambda_x threshold in [0,1]
  double beta_param = 1.0;  // symmetric beta shape for lambda_x
};

void validate(const MixConfig& cfg);

MixBounds mix_bounds(const MixConfig& cfg, const PhaseSchedule& schedule,
                     int epoch, double lambda_x);

// Label mixing factor: lambda0 when the first class dominates by at least
// kappa and lambda_x < tau; lambda1 when it is dominated by at least kappa
// and lambda_x > 1 - tau; lambda_x otherwise. If both conditions hold (only
// possible for tau > 0.5 with n1 == n2 and kappa == 1) the first branch wins.
double label_lambda(const MixConfig& cfg, double lambda_x, std::int64_t n1,
                    std::int64_t n2, double lambda0, double lambda1);

struct MixedExample {
  Eigen::VectorXd x;
  Eigen::VectorXd y;  // probability vector over classes
  double lambda_x = 1.0;
  double lambda_y = 1.0;
};

// Deterministic core with an explicit feature factor.
MixedExample mix_pair_with(const MixConfig& cfg, const PhaseSchedule& schedule,
                           int epoch, double lambda_x,
                           const Eigen::VectorXd& x1, const Eigen::VectorXd& y1,
                           std::int64_t n1, const Eigen::VectorXd& x2,
                           const Eigen::VectorXd& y2, std::int64_t n2);

// Draws lambda_x from the symmetric beta distribution, then mixes.
MixedExample mix_pair(const MixConfig& cfg, const PhaseSchedule& schedule,
                      int epoch, const Eigen::VectorXd& x1,
                      const Eigen::VectorXd& y1, std::int64_t n1,
                      const Eigen::VectorXd& x2, const Eigen::VectorXd& y2,
                      std::int64_t n2, Rng& rng);

}  // namespace ppl
