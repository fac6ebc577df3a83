#include "ppl/mixer.hpp"

#include <cmath>
#include <stdexcept>

namespace ppl {

const char* to_string(MixMode mode) {
  switch (mode) {
    case MixMode::Mixup:
      return "mixup";
    case MixMode::Remix:
      return "remix";
    case MixMode::PPmix:
      return "ppmix";
  }
  return "ppmix";
}

MixMode mix_mode_from_string(const std::string& name) {
  if (name == "mixup") return MixMode::Mixup;
  if (name == "remix") return MixMode::Remix;
  if (name == "ppmix") return MixMode::PPmix;
  throw std::invalid_argument("unknown mix mode '" + name +
                              "' (expected mixup|remix|ppmix)");
}

void validate(const MixConfig& cfg) {
  if (!(cfg.kappa >= 1.0)) {
    throw std::invalid_argument("mix kappa must be >= 1");
  }
  if (!(cfg.tau >= 0.0 && cfg.tau <= 1.0)) {
    throw std::invalid_argument("mix tau must lie in [0,1]");
  }
  if (!(cfg.beta_param > 0.0)) {
    throw std::invalid_argument("mix beta parameter must be > 0");
  }
}

MixBounds mix_bounds(const MixConfig& cfg, const PhaseSchedule& schedule,
                     int epoch, double lambda_x) {
  validate(cfg);
  if (!(lambda_x >= 0.0 && lambda_x <= 1.0)) {
    throw std::domain_error("lambda_x must lie in [0,1]");
  }
  switch (cfg.mode) {
    case MixMode::Mixup:
      return MixBounds{lambda_x, lambda_x};
    case MixMode::Remix:
      return MixBounds{0.0, 1.0};
    case MixMode::PPmix:
      return mix_bounds_at(schedule, epoch, lambda_x);
  }
  return MixBounds{lambda_x, lambda_x};
}

double label_lambda(const MixConfig& cfg, double lambda_x, std::int64_t n1,
                    std::int64_t n2, double lambda0, double lambda1) {
  validate(cfg);
  if (n1 < 1 || n2 < 1) {
    throw std::invalid_argument("class counts must be >= 1");
  }
  if (!(lambda_x >= 0.0 && lambda_x <= 1.0)) {
    throw std::domain_error("lambda_x must lie in [0,1]");
  }
  const double d1 = static_cast<double>(n1);
  const double d2 = static_cast<double>(n2);
  if (d1 >= cfg.kappa * d2 && lambda_x < cfg.tau) return lambda0;
  if (d2 >= cfg.kappa * d1 && lambda_x > 1.0 - cfg.tau) return lambda1;
  return lambda_x;
}

MixedExample mix_pair_with(const MixConfig& cfg, const PhaseSchedule& schedule,
                           int epoch, double lambda_x,
                           const Eigen::VectorXd& x1, const Eigen::VectorXd& y1,
                           std::int64_t n1, const Eigen::VectorXd& x2,
                           const Eigen::VectorXd& y2, std::int64_t n2) {
  if (x1.size() != x2.size()) {
    throw std::invalid_argument("mixed features must have equal dimension");
  }
  if (y1.size() != y2.size()) {
    throw std::invalid_argument("mixed labels must have equal dimension");
  }
  const MixBounds bounds = mix_bounds(cfg, schedule, epoch, lambda_x);
  const double lambda_y =
      label_lambda(cfg, lambda_x, n1, n2, bounds.lambda0, bounds.lambda1);
  MixedExample out;
  out.lambda_x = lambda_x;
  out.lambda_y = lambda_y;
  out.x = lambda_x * x1 + (1.0 - lambda_x) * x2;
  out.y = lambda_y * y1 + (1.0 - lambda_y) * y2;
  return out;
}

MixedExample mix_pair(const MixConfig& cfg, const PhaseSchedule& schedule,
                      int epoch, const Eigen::VectorXd& x1,
                      const Eigen::VectorXd& y1, std::int64_t n1,
                      const Eigen::VectorXd& x2, const Eigen::VectorXd& y2,
                      std::int64_t n2, Rng& rng) {
  validate(cfg);
  const double lambda_x = rng.beta(cfg.beta_param, cfg.beta_param);
  return mix_pair_with(cfg, schedule, epoch, lambda_x, x1, y1, n1, x2, y2, n2);
}

}  // namespace ppl
