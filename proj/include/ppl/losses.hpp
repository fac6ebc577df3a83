#pragma once

#include <Eigen/Core>
#include <cmath>
#include <stdexcept>
#include <string>

#include "ppl/histogram.hpp"

namespace ppl {

enum class LossFamily { CrossEntropy, Focal, Ldam, Cri };

// Correction applied by the coupled loss below its probability threshold T:
//   Zero      sigma = 0
//   Constant  sigma = -(1-T)^gamma log T
//   Linear    sigma = -(p/T) (1-T)^gamma log T
//   None      no correction, the coupled form everywhere
enum class SigmaVariant { Zero, Constant, Linear, None };

const char* to_string(LossFamily family);
LossFamily loss_family_from_string(const std::string& name);
const char* to_string(SigmaVariant v);
SigmaVariant sigma_variant_from_string(const std::string& name);

struct LossConfig {
  LossFamily family = LossFamily::CrossEntropy;
  double gamma = 1.5;         // focusing exponent (focal / coupled)
  double margin_scale = 0.0;  // S in margin = S / n_y^(1/4) (ldam / coupled)
  double threshold = 1e-6;    // T, correction threshold in [0,1) (coupled)
  SigmaVariant sigma = SigmaVariant::Linear;
  // Whether the (1-p_y)^gamma focusing factor of the coupled loss reads the
  // margin-shifted probability (default) or the plain softmax probability.
  // The threshold test and the correction term always use the margin-shifted
  // probability.
  bool focus_uses_margin = true;
};

void validate(const LossConfig& cfg);

// Probabilities below this are clamped before any log, so a fully saturated
// softmax yields a finite capped loss (-log 1e-300, about 690.78) instead of
// infinity. Only pathological logits hit the clamp.
inline constexpr double kMinProb = 1e-300;

inline double ce_from_prob(double p) {
  return -std::log(std::max(p, kMinProb));
}

// (1 - p_focus)^gamma * (-log p_log); the two probabilities coincide except
// for the coupled loss with focus_uses_margin = false
inline double coupled_from_prob(double p_focus, double p_log, double gamma) {
  if (gamma == 0.0) return ce_from_prob(p_log);
  const double omp = 1.0 - p_focus;
  if (omp <= 0.0) return 0.0;
  return std::pow(omp, gamma) * ce_from_prob(p_log);
}

inline double focal_from_prob(double p, double gamma) {
  return coupled_from_prob(p, p, gamma);
}

inline double cri_sigma(SigmaVariant v, double p, double threshold,
                        double gamma) {
  const double cap =
      std::pow(1.0 - threshold, gamma) * (-std::log(threshold));
  switch (v) {
    case SigmaVariant::Zero:
      return 0.0;
    case SigmaVariant::Constant:
      return cap;
    case SigmaVariant::Linear:
      return (p / threshold) * cap;
    case SigmaVariant::None:
      break;
  }
  throw std::logic_error("sigma variant None has no correction term");
}

// Coupled loss on probabilities. p_shift drives the threshold test, the log
// term and the correction; p_focus drives the focusing factor.
inline double cri_from_prob(const LossConfig& cfg, double p_shift,
                            double p_focus) {
  if (cfg.sigma == SigmaVariant::None || p_shift >= cfg.threshold) {
    return coupled_from_prob(p_focus, p_shift, cfg.gamma);
  }
  return cri_sigma(cfg.sigma, p_shift, cfg.threshold, cfg.gamma);
}

// Eq-style per-class loss weight n_i^(-alpha); alpha = 0 gives weight 1 for
// every class.
inline double class_weight(const ClassHistogram& hist, int class_index,
                           double alpha) {
  if (alpha < 0.0) throw std::invalid_argument("class weight alpha must be >= 0");
  return std::pow(static_cast<double>(hist.count(class_index)), -alpha);
}

// margin = S / n_y^(1/4); larger for rarer classes
inline double ldam_margin(const ClassHistogram& hist, int y, double s) {
  if (s < 0.0) throw std::invalid_argument("margin scale must be >= 0");
  return s / std::pow(static_cast<double>(hist.count(y)), 0.25);
}

// Scale S such that the rarest class receives exactly max_margin.
inline double margin_scale_for_max_margin(const ClassHistogram& hist,
                                          double max_margin) {
  if (max_margin < 0.0) {
    throw std::invalid_argument("max margin must be >= 0");
  }
  return max_margin * std::pow(static_cast<double>(hist.min_count()), 0.25);
}

namespace detail {

template <typename Derived>
Eigen::VectorXd shifted_softmax(const Eigen::MatrixBase<Derived>& logits,
                                int y, double margin) {
  Eigen::VectorXd u = logits.template cast<double>();
  if (u.size() < 2) throw std::invalid_argument("need at least 2 logits");
  if (y < 0 || y >= u.size()) throw std::out_of_range("class index out of range");
  if (!u.allFinite()) throw std::domain_error("non-finite logit");
  if (!std::isfinite(margin) || margin < 0.0) {
    throw std::invalid_argument("margin must be finite and >= 0");
  }
  u(y) -= margin;
  const double m = u.maxCoeff();
  Eigen::VectorXd e = (u.array() - m).exp();
  return e / e.sum();
}

// d(loss)/dp * p for the coupled form with a single probability; the
// gradient w.r.t. logits is coeff * (onehot - softmax)
inline double coupled_grad_coeff(double p, double gamma) {
  if (gamma == 0.0) return -1.0;
  const double omp = 1.0 - p;
  if (omp <= 0.0) return 0.0;
  const double logp = std::log(std::max(p, kMinProb));
  return gamma * p * std::pow(omp, gamma - 1.0) * logp - std::pow(omp, gamma);
}

}  // namespace detail

// True-class probability of the margin-shifted softmax, computed with
// max-subtraction; margin = 0 gives the plain softmax probability.
template <typename Derived>
double softmax_prob(const Eigen::MatrixBase<Derived>& logits, int y,
                    double margin = 0.0) {
  return detail::shifted_softmax(logits, y, margin)(y);
}

template <typename Derived>
double loss_forward(const LossConfig& cfg, const ClassHistogram& hist,
                    const Eigen::MatrixBase<Derived>& logits, int y) {
  validate(cfg);
  if (logits.size() != hist.num_classes()) {
    throw std::invalid_argument("logit count does not match class count");
  }
  switch (cfg.family) {
    case LossFamily::CrossEntropy:
      return ce_from_prob(softmax_prob(logits, y));
    case LossFamily::Focal:
      return focal_from_prob(softmax_prob(logits, y), cfg.gamma);
    case LossFamily::Ldam:
      return ce_from_prob(
          softmax_prob(logits, y, ldam_margin(hist, y, cfg.margin_scale)));
    case LossFamily::Cri: {
      const double margin = ldam_margin(hist, y, cfg.margin_scale);
      const double p_shift = softmax_prob(logits, y, margin);
      const double p_focus =
          cfg.focus_uses_margin ? p_shift : softmax_prob(logits, y);
      return cri_from_prob(cfg, p_shift, p_focus);
    }
  }
  throw std::logic_error("unknown loss family");
}

struct LossOutput {
  double value = 0.0;
  Eigen::VectorXd grad;  // d(loss)/d(logit_j)
};

// Analytic gradient w.r.t. the logits. The value field matches loss_forward
// bit for bit. At the threshold kink the branch selected by the non-strict
// test p >= T supplies the gradient.
template <typename Derived>
LossOutput loss_grad(const LossConfig& cfg, const ClassHistogram& hist,
                     const Eigen::MatrixBase<Derived>& logits, int y) {
  validate(cfg);
  if (logits.size() != hist.num_classes()) {
    throw std::invalid_argument("logit count does not match class count");
  }
  const int n = static_cast<int>(logits.size());
  LossOutput out;
  out.grad = Eigen::VectorXd::Zero(n);

  const auto softmax_minus_onehot = [&](const Eigen::VectorXd& s) {
    Eigen::VectorXd g = s;
    g(y) -= 1.0;
    return g;
  };

  switch (cfg.family) {
    case LossFamily::CrossEntropy: {
      const Eigen::VectorXd s = detail::shifted_softmax(logits, y, 0.0);
      out.value = ce_from_prob(s(y));
      out.grad = softmax_minus_onehot(s);
      return out;
    }
    case LossFamily::Ldam: {
      const double margin = ldam_margin(hist, y, cfg.margin_scale);
      const Eigen::VectorXd s = detail::shifted_softmax(logits, y, margin);
      out.value = ce_from_prob(s(y));
      out.grad = softmax_minus_onehot(s);
      return out;
    }
    case LossFamily::Focal: {
      const Eigen::VectorXd s = detail::shifted_softmax(logits, y, 0.0);
      const double p = s(y);
      out.value = focal_from_prob(p, cfg.gamma);
      const double coeff = detail::coupled_grad_coeff(p, cfg.gamma);
      out.grad = -coeff * s;
      out.grad(y) += coeff;
      return out;
    }
    case LossFamily::Cri: {
      const double margin = ldam_margin(hist, y, cfg.margin_scale);
      const Eigen::VectorXd s = detail::shifted_softmax(logits, y, margin);
      const double p_shift = s(y);

      if (cfg.sigma != SigmaVariant::None && p_shift < cfg.threshold) {
        out.value = cri_sigma(cfg.sigma, p_shift, cfg.threshold, cfg.gamma);
        if (cfg.sigma == SigmaVariant::Linear) {
          const double slope = std::pow(1.0 - cfg.threshold, cfg.gamma) *
                               (-std::log(cfg.threshold)) / cfg.threshold;
          out.grad = -(slope * p_shift) * s;
          out.grad(y) += slope * p_shift;
        }
        return out;  // Zero and Constant branches have zero gradient
      }

      if (cfg.focus_uses_margin) {
        out.value = coupled_from_prob(p_shift, p_shift, cfg.gamma);
        const double coeff = detail::coupled_grad_coeff(p_shift, cfg.gamma);
        out.grad = -coeff * s;
        out.grad(y) += coeff;
        return out;
      }

      // focusing factor on the plain softmax, log term on the shifted one
      const Eigen::VectorXd s0 = detail::shifted_softmax(logits, y, 0.0);
      const double q = s0(y);
      out.value = coupled_from_prob(q, p_shift, cfg.gamma);
      const double omq = 1.0 - q;
      if (cfg.gamma > 0.0 && omq <= 0.0) return out;  // saturated: value 0
      const double factor =
          cfg.gamma == 0.0 ? 1.0 : std::pow(omq, cfg.gamma);
      // d[(1-q)^g]/dz spread over the plain softmax
      if (cfg.gamma > 0.0) {
        const double fcoeff = cfg.gamma * std::pow(omq, cfg.gamma - 1.0) * q *
                              ce_from_prob(p_shift);
        out.grad = fcoeff * s0;
        out.grad(y) -= fcoeff;
      }
      // (1-q)^g d[-log p_shift]/dz
      out.grad += factor * s;
      out.grad(y) -= factor;
      return out;
    }
  }
  throw std::logic_error("unknown loss family");
}

}  // namespace ppl
