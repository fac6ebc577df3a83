#include "ppl/schedules.hpp"

#include <cmath>
#include <stdexcept>

namespace ppl {

const char* to_string(TransformForm form) {
  switch (form) {
    case TransformForm::PowerLaw:
      return "power";
    case TransformForm::Log:
      return "log";
    case TransformForm::InverseLog:
      return "invlog";
  }
  return "power";
}

TransformForm transform_form_from_string(const std::string& name) {
  if (name == "power") return TransformForm::PowerLaw;
  if (name == "log") return TransformForm::Log;
  if (name == "invlog") return TransformForm::InverseLog;
  throw std::invalid_argument("unknown transform form '" + name +
                              "' (expected power|log|invlog)");
}

void validate(const Transform& tf) {
  if (!std::isfinite(tf.rho)) {
    throw std::invalid_argument("transform rho must be finite");
  }
  if (tf.form == TransformForm::PowerLaw) {
    if (tf.rho <= 0.0) {
      throw std::invalid_argument("power-law transform requires rho > 0");
    }
  } else if (tf.rho <= 1.0) {
    throw std::invalid_argument("log/invlog transforms require rho > 1");
  }
}

double transform_value(const Transform& tf, double t) {
  validate(tf);
  if (!(t >= 0.0 && t <= 1.0)) {
    throw std::domain_error("transform progress must lie in [0,1]");
  }
  switch (tf.form) {
    case TransformForm::PowerLaw:
      return std::pow(t, tf.rho);
    case TransformForm::Log:
      // log1p form keeps numerator and denominator bit-identical at t = 1,
      // so f(1) == 1 exactly
      return std::log1p((tf.rho - 1.0) * t) / std::log1p(tf.rho - 1.0);
    case TransformForm::InverseLog:
      // rho^(t log_rho 2) == 2^t for every base, so the base cancels
      return std::exp2(t) - 1.0;
  }
  return 0.0;
}

void validate(const PhaseSchedule& s) {
  if (s.e0 < 0) throw std::invalid_argument("schedule start epoch must be >= 0");
  if (s.e1 < s.e0) {
    throw std::invalid_argument("schedule end epoch must be >= start epoch");
  }
  if (!(s.delta > 0.0) || !std::isfinite(s.delta)) {
    throw std::invalid_argument("schedule delta must be > 0");
  }
  validate(s.transform);
}

double progress_at(const PhaseSchedule& s, int epoch) {
  validate(s);
  if (epoch < 0) throw std::invalid_argument("epoch must be >= 0");
  if (s.e0 == s.e1) return epoch < s.e1 ? 0.0 : 1.0;
  if (epoch < s.e0) return 0.0;
  if (epoch > s.e1) return 1.0;
  // integer window, so t is an exact rational before rounding to double
  const double t =
      static_cast<double>(epoch - s.e0) / static_cast<double>(s.e1 - s.e0);
  return transform_value(s.transform, t);
}

double alpha_at(const PhaseSchedule& s, int epoch) {
  return s.delta * progress_at(s, epoch);
}

double q_at(const PhaseSchedule& s, int epoch) {
  if (s.delta > 1.0) {
    throw std::invalid_argument(
        "sampling schedule requires delta <= 1 so q stays in [0,1]");
  }
  return 1.0 - s.delta * progress_at(s, epoch);
}

MixBounds mix_bounds_at(const PhaseSchedule& s, int epoch, double lambda_x) {
  if (!(lambda_x >= 0.0 && lambda_x <= 1.0)) {
    throw std::domain_error("lambda_x must lie in [0,1]");
  }
  const double f = progress_at(s, epoch);
  const double low = lambda_x * (1.0 - f);
  return MixBounds{low, low + f};
}

}  // namespace ppl
