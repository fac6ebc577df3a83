#pragma once

#include <string>

namespace ppl {

// Transformation function families mapping transition progress t in [0,1]
// onto [0,1]:
//   power:  f(t) = t^rho                     (rho > 0; rho = 1 is linear)
//   log:    f(t) = log_rho(1 + (rho-1) t)    (rho > 1)
//   invlog: f(t) = rho^(t log_rho 2) - 1     (rho > 1; identical to 2^t - 1
//                                             for every valid base)
// All satisfy f(0) = 0 and f(1) = 1 exactly and are monotone nondecreasing.
enum class TransformForm { PowerLaw, Log, InverseLog };

struct Transform {
  TransformForm form = TransformForm::PowerLaw;
  double rho = 1.0;
};

const char* to_string(TransformForm form);
TransformForm transform_form_from_string(const std::string& name);

void validate(const Transform& tf);
double transform_value(const Transform& tf, double t);

// Three-phase window: before e0 the schedule is inactive, between e0 and e1
// progress follows the transform, after e1 it is saturated. A degenerate
// window (e0 == e1) is a step: progress 0 strictly before e1, 1 from e1 on,
// which collapses the progressive schedules onto their deferred two-stage
// counterparts.
struct PhaseSchedule {
  int e0 = 100;
  int e1 = 160;
  double delta = 1.0;  // schedule amplitude, > 0
  Transform transform;
};

void validate(const PhaseSchedule& s);

// f(E) extended over all epochs: 0 before the window, transform inside,
// 1 after. Epochs are integer indices >= 0.
double progress_at(const PhaseSchedule& s, int epoch);

// weighting exponent: 0 -> delta
double alpha_at(const PhaseSchedule& s, int epoch);

// sampling exponent: 1 -> 1 - delta; requires delta <= 1 so q stays in [0,1]
double q_at(const PhaseSchedule& s, int epoch);

// label-mixing bounds: (lambda_x, lambda_x) -> (0, 1)
struct MixBounds {
  double lambda0 = 0.0;
  double lambda1 = 1.0;
};

MixBounds mix_bounds_at(const PhaseSchedule& s, int epoch, double lambda_x);

}  // namespace ppl
