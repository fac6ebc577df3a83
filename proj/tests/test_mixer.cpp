#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <Eigen/Core>
#include <cmath>

#include "doctest.h"
#include "ppl/mixer.hpp"

using namespace ppl;

namespace {

PhaseSchedule linear_schedule() {
  PhaseSchedule s;
  s.e0 = 100;
  s.e1 = 160;
  s.delta = 1.0;
  s.transform = {TransformForm::PowerLaw, 1.0};
  return s;
}

Eigen::VectorXd onehot(int c, int y) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(c);
  v(y) = 1.0;
  return v;
}

}  // namespace

TEST_CASE("label factor case split") {
  MixConfig cfg;
  cfg.kappa = 3.0;
  cfg.tau = 0.5;
  // majority-first pair in the final phase relabels toward the minority
  CHECK(label_lambda(cfg, 0.3, 50, 10, 0.0, 1.0) == 0.0);
  // balanced pair takes the otherwise branch
  CHECK(label_lambda(cfg, 0.3, 10, 10, 0.0, 1.0) == 0.3);
  // minority-first pair with a large factor relabels fully
  CHECK(label_lambda(cfg, 0.8, 10, 50, 0.0, 1.0) == 1.0);
  // conditions hold but with the initial-phase bounds nothing changes
  CHECK(label_lambda(cfg, 0.3, 50, 10, 0.3, 0.3) == 0.3);
  CHECK_THROWS_AS(label_lambda(cfg, -0.1, 10, 10, 0.0, 1.0),
                  std::domain_error);
  CHECK_THROWS_AS(label_lambda(cfg, 0.5, 0, 10, 0.0, 1.0),
                  std::invalid_argument);
}

TEST_CASE("mode bounds") {
  MixConfig cfg;
  const PhaseSchedule s = linear_schedule();

  cfg.mode = MixMode::Mixup;
  MixBounds b = mix_bounds(cfg, s, 200, 0.3);
  CHECK(b.lambda0 == 0.3);
  CHECK(b.lambda1 == 0.3);

  cfg.mode = MixMode::Remix;
  b = mix_bounds(cfg, s, 0, 0.3);
  CHECK(b.lambda0 == 0.0);
  CHECK(b.lambda1 == 1.0);

  cfg.mode = MixMode::PPmix;
  b = mix_bounds(cfg, s, 50, 0.3);
  CHECK(b.lambda0 == 0.3);
  CHECK(b.lambda1 == 0.3);
  b = mix_bounds(cfg, s, 200, 0.3);
  CHECK(b.lambda0 == 0.0);
  CHECK(b.lambda1 == 1.0);
}

TEST_CASE("identity endpoint") {
  MixConfig cfg;
  cfg.mode = MixMode::Mixup;
  const PhaseSchedule s = linear_schedule();
  Eigen::VectorXd x1(3);
  x1 << 1.0, 2.0, 3.0;
  Eigen::VectorXd x2(3);
  x2 << -1.0, 0.0, 5.0;
  const MixedExample mixed = mix_pair_with(cfg, s, 0, 1.0, x1, onehot(4, 1),
                                           20, x2, onehot(4, 3), 20);
  CHECK(mixed.x == x1);
  CHECK(mixed.y == onehot(4, 1));
}

TEST_CASE("plain mixup always uses the feature factor for labels") {
  MixConfig cfg;
  cfg.mode = MixMode::Mixup;
  const PhaseSchedule s = linear_schedule();
  Rng rng(3);
  Eigen::VectorXd x1(2);
  x1 << 1.0, 0.0;
  Eigen::VectorXd x2(2);
  x2 << 0.0, 1.0;
  for (int iter = 0; iter < 500; ++iter) {
    const MixedExample m =
        mix_pair(cfg, s, 180, x1, onehot(3, 0), 100, x2, onehot(3, 2), 1, rng);
    CHECK(m.lambda_y == m.lambda_x);
    CHECK((m.y - (m.lambda_x * onehot(3, 0) +
                  (1.0 - m.lambda_x) * onehot(3, 2)))
              .lpNorm<Eigen::Infinity>() == 0.0);
  }
}

TEST_CASE("ppmix in the initial phase behaves exactly as mixup") {
  MixConfig ppmix;
  ppmix.mode = MixMode::PPmix;
  MixConfig mixup = ppmix;
  mixup.mode = MixMode::Mixup;
  const PhaseSchedule s = linear_schedule();
  Rng rng(11);
  Eigen::VectorXd x1(3);
  x1 << 0.5, -0.5, 2.0;
  Eigen::VectorXd x2(3);
  x2 << 1.5, 0.0, -1.0;
  for (int iter = 0; iter < 500; ++iter) {
    const double lx = rng.beta(1.0, 1.0);
    const MixedExample a = mix_pair_with(ppmix, s, 42, lx, x1, onehot(4, 0),
                                         200, x2, onehot(4, 3), 4);
    const MixedExample b = mix_pair_with(mixup, s, 42, lx, x1, onehot(4, 0),
                                         200, x2, onehot(4, 3), 4);
    CHECK(a.lambda_y == b.lambda_y);
    CHECK(a.x == b.x);
    CHECK(a.y == b.y);
  }
}

TEST_CASE("ppmix in the final phase reproduces remix elementwise") {
  MixConfig ppmix;
  ppmix.mode = MixMode::PPmix;
  MixConfig remix = ppmix;
  remix.mode = MixMode::Remix;
  const PhaseSchedule s = linear_schedule();
  Rng rng(13);
  for (int iter = 0; iter < 500; ++iter) {
    Eigen::VectorXd x1(3);
    Eigen::VectorXd x2(3);
    for (int d = 0; d < 3; ++d) {
      x1(d) = rng.normal();
      x2(d) = rng.normal();
    }
    const auto n1 = static_cast<std::int64_t>(1 + rng.uniform_index(400));
    const auto n2 = static_cast<std::int64_t>(1 + rng.uniform_index(400));
    const double lx = rng.beta(1.0, 1.0);
    const MixedExample a = mix_pair_with(ppmix, s, 199, lx, x1, onehot(4, 1),
                                         n1, x2, onehot(4, 2), n2);
    const MixedExample b = mix_pair_with(remix, s, 199, lx, x1, onehot(4, 1),
                                         n1, x2, onehot(4, 2), n2);
    CHECK(a.lambda_y == b.lambda_y);
    CHECK(a.x == b.x);
    CHECK(a.y == b.y);
  }
}

TEST_CASE("mixed labels stay probability vectors and features stay bounded") {
  MixConfig cfg;
  cfg.mode = MixMode::PPmix;
  const PhaseSchedule s = linear_schedule();
  Rng rng(17);
  for (int iter = 0; iter < 1000; ++iter) {
    Eigen::VectorXd x1(5);
    Eigen::VectorXd x2(5);
    for (int d = 0; d < 5; ++d) {
      x1(d) = rng.normal();
      x2(d) = rng.normal();
    }
    const int epoch = static_cast<int>(rng.uniform_index(220));
    const auto n1 = static_cast<std::int64_t>(1 + rng.uniform_index(400));
    const auto n2 = static_cast<std::int64_t>(1 + rng.uniform_index(400));
    const MixedExample m = mix_pair(cfg, s, epoch, x1, onehot(3, 0), n1, x2,
                                    onehot(3, 2), n2, rng);
    CHECK(std::abs(m.y.sum() - 1.0) < 1e-12);
    CHECK(m.y.minCoeff() >= 0.0);
    CHECK(m.y.maxCoeff() <= 1.0);
    for (int d = 0; d < 5; ++d) {
      CHECK(m.x(d) >= std::min(x1(d), x2(d)) - 1e-15);
      CHECK(m.x(d) <= std::max(x1(d), x2(d)) + 1e-15);
    }
  }
}

TEST_CASE("validation") {
  MixConfig cfg;
  cfg.kappa = 0.5;
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
  cfg.kappa = 3.0;
  cfg.tau = 1.5;
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
  cfg.tau = 0.5;
  cfg.beta_param = 0.0;
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);

  MixConfig good;
  const PhaseSchedule s = linear_schedule();
  Eigen::VectorXd x1(2);
  x1 << 0.0, 1.0;
  Eigen::VectorXd x3(3);
  x3 << 0.0, 1.0, 2.0;
  CHECK_THROWS_AS(mix_pair_with(good, s, 0, 0.5, x1, onehot(3, 0), 5, x3,
                                onehot(3, 1), 5),
                  std::invalid_argument);
}
