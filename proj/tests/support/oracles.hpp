#pragma once

// Test-side oracles, independent of the library code paths they check.

#include <Eigen/Core>
#include <cmath>
#include <functional>

namespace ppl::testing {

// central finite differences of a scalar function of a vector
inline Eigen::VectorXd central_diff(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, double h) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd xp = x;
    Eigen::VectorXd xm = x;
    xp(i) += h;
    xm(i) -= h;
    g(i) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

inline bool mixed_close(double actual, double expected, double abs_tol,
                        double rel_tol) {
  return std::abs(actual - expected) <=
         abs_tol + rel_tol * std::abs(expected);
}

}  // namespace ppl::testing
