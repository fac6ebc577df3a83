#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <Eigen/Core>
#include <cmath>
#include <random>

#include "doctest.h"
#include "ppl/losses.hpp"
#include "support/oracles.hpp"

using namespace ppl;

namespace {

ClassHistogram lt_hist() { return ClassHistogram({500, 150, 40, 12, 5}); }

Eigen::VectorXd random_logits(std::mt19937& gen, int c, double scale) {
  std::normal_distribution<double> nd(0.0, scale);
  Eigen::VectorXd z(c);
  for (int i = 0; i < c; ++i) z(i) = nd(gen);
  return z;
}

LossConfig cfg_of(LossFamily family, double gamma = 1.5, double s = 0.5,
                  double t = 1e-6, SigmaVariant v = SigmaVariant::Linear) {
  LossConfig cfg;
  cfg.family = family;
  cfg.gamma = gamma;
  cfg.margin_scale = s;
  cfg.threshold = t;
  cfg.sigma = v;
  return cfg;
}

}  // namespace

TEST_CASE("class weights follow n^-alpha") {
  const ClassHistogram hist({100, 16, 3});
  CHECK(class_weight(hist, 0, 0.0) == 1.0);
  CHECK(class_weight(hist, 1, 0.0) == 1.0);
  CHECK(class_weight(hist, 0, 1.0) == 0.01);
  CHECK(class_weight(hist, 1, 0.5) == 0.25);
  CHECK_THROWS_AS(class_weight(hist, 3, 1.0), std::out_of_range);
  CHECK_THROWS_AS(class_weight(hist, 0, -0.5), std::invalid_argument);
}

TEST_CASE("softmax probability with and without margin") {
  Eigen::VectorXd z(2);
  z << 0.0, 0.0;
  CHECK(softmax_prob(z, 0) == 0.5);
  // e^-0.25 / (e^-0.25 + 1), high-precision evaluation
  CHECK(std::abs(softmax_prob(z, 0, 0.25) - 0.4378234991142019) < 1e-15);

  Eigen::VectorXd z3(3);
  z3 << 10.0, 0.0, 0.0;
  CHECK(std::abs(softmax_prob(z3, 0) - 0.9999092083843410) < 1e-15);

  Eigen::VectorXd huge(3);
  huge << 1000.0, -1000.0, 0.0;
  CHECK(std::isfinite(softmax_prob(huge, 1)));  // max-subtraction keeps it sane

  Eigen::VectorXd bad(2);
  bad << std::numeric_limits<double>::infinity(), 0.0;
  CHECK_THROWS_AS(softmax_prob(bad, 0), std::domain_error);
}

TEST_CASE("ldam margin") {
  const ClassHistogram hist({16, 1});
  CHECK(ldam_margin(hist, 0, 0.5) == 0.25);
  CHECK(ldam_margin(hist, 1, 0.5) == 0.5);
  CHECK(ldam_margin(hist, 0, 0.0) == 0.0);
  CHECK(margin_scale_for_max_margin(hist, 0.5) == 0.5);  // n_min = 1
}

TEST_CASE("forward values") {
  const ClassHistogram hist({10, 10});
  Eigen::VectorXd z(2);
  z << 0.0, 0.0;
  CHECK(std::abs(loss_forward(cfg_of(LossFamily::CrossEntropy), hist, z, 0) -
                 0.6931471805599453) < 1e-15);
  // focal gamma=2 at p = 0.5: 0.25 ln 2
  CHECK(std::abs(loss_forward(cfg_of(LossFamily::Focal, 2.0), hist, z, 0) -
                 0.17328679513998632) < 1e-15);
}

TEST_CASE("family degeneracies to cross-entropy") {
  std::mt19937 gen(7);
  const ClassHistogram hist = lt_hist();
  const LossConfig ce = cfg_of(LossFamily::CrossEntropy);
  const LossConfig focal0 = cfg_of(LossFamily::Focal, 0.0);
  const LossConfig ldam0 = cfg_of(LossFamily::Ldam, 1.5, 0.0);
  const LossConfig cri0 =
      cfg_of(LossFamily::Cri, 0.0, 0.0, 0.0, SigmaVariant::Linear);
  for (int iter = 0; iter < 10000; ++iter) {
    const Eigen::VectorXd z = random_logits(gen, hist.num_classes(), 4.0);
    const int y = static_cast<int>(gen() % 5u);
    const double ref = loss_forward(ce, hist, z, y);
    CHECK(std::abs(loss_forward(focal0, hist, z, y) - ref) < 1e-12);
    CHECK(std::abs(loss_forward(ldam0, hist, z, y) - ref) < 1e-12);
    CHECK(std::abs(loss_forward(cri0, hist, z, y) - ref) < 1e-12);
  }
}

TEST_CASE("coupled loss with T=0 and no correction equals focal-over-ldam") {
  std::mt19937 gen(11);
  const ClassHistogram hist = lt_hist();
  const LossConfig none =
      cfg_of(LossFamily::Cri, 1.5, 0.5, 0.0, SigmaVariant::None);
  for (int iter = 0; iter < 2000; ++iter) {
    const Eigen::VectorXd z = random_logits(gen, hist.num_classes(), 4.0);
    const int y = static_cast<int>(gen() % 5u);
    const double margin = ldam_margin(hist, y, 0.5);
    const double p = softmax_prob(z, y, margin);
    CHECK(loss_forward(none, hist, z, y) ==
          doctest::Approx(focal_from_prob(p, 1.5)).epsilon(1e-14));
  }
}

TEST_CASE("continuity and discontinuity at the threshold") {
  const double t = 0.3;
  const double gamma = 1.5;
  LossConfig cfg = cfg_of(LossFamily::Cri, gamma, 0.0, t);
  // value of the coupled branch exactly at p = T
  const double coupled_at_t = coupled_from_prob(t, t, gamma);

  cfg.sigma = SigmaVariant::Constant;
  CHECK(std::abs(cri_from_prob(cfg, t, t) - coupled_at_t) < 1e-12);
  CHECK(std::abs(cri_from_prob(cfg, std::nextafter(t, 0.0), t) -
                 coupled_at_t) < 1e-9);

  cfg.sigma = SigmaVariant::Linear;
  CHECK(std::abs(cri_from_prob(cfg, t, t) - coupled_at_t) < 1e-12);
  CHECK(std::abs(cri_from_prob(cfg, std::nextafter(t, 0.0), t) -
                 coupled_at_t) < 1e-9);

  cfg.sigma = SigmaVariant::Zero;
  const double below = cri_from_prob(cfg, std::nextafter(t, 0.0), t);
  CHECK(below == 0.0);
  // the drop is exactly the coupled value at T
  CHECK(std::abs((coupled_at_t - below) -
                 std::pow(1.0 - t, gamma) * (-std::log(t))) < 1e-12);
}

TEST_CASE("losses are nonincreasing in the true-class probability") {
  const double t = 1e-6;
  for (double gamma : {0.0, 0.5, 1.5, 3.0}) {
    LossConfig cfg = cfg_of(LossFamily::Cri, gamma, 0.0, t);
    double prev_ce = std::numeric_limits<double>::infinity();
    double prev_focal = prev_ce;
    double prev_cri = prev_ce;
    for (int i = 1; i <= 1000; ++i) {
      const double p = t + (1.0 - t) * static_cast<double>(i) / 1000.0;
      const double ce = ce_from_prob(p);
      const double focal = focal_from_prob(p, gamma);
      const double cri = cri_from_prob(cfg, p, p);
      CHECK(ce <= prev_ce + 1e-15);
      CHECK(focal <= prev_focal + 1e-15);
      CHECK(cri <= prev_cri + 1e-15);
      prev_ce = ce;
      prev_focal = focal;
      prev_cri = cri;
    }
  }
}

TEST_CASE("constant and linear corrections bound the loss") {
  std::mt19937 gen(23);
  const ClassHistogram hist = lt_hist();
  const double t = 1e-6;
  const double gamma = 1.5;
  const double cap = std::pow(1.0 - t, gamma) * (-std::log(t));
  for (SigmaVariant v : {SigmaVariant::Constant, SigmaVariant::Linear}) {
    const LossConfig cfg = cfg_of(LossFamily::Cri, gamma, 0.5, t, v);
    for (int iter = 0; iter < 5000; ++iter) {
      const double scale = iter % 2 == 0 ? 4.0 : 60.0;  // include saturation
      const Eigen::VectorXd z = random_logits(gen, hist.num_classes(), scale);
      const int y = static_cast<int>(gen() % 5u);
      CHECK(loss_forward(cfg, hist, z, y) <= cap + 1e-12);
    }
  }
}

TEST_CASE("gradient fixed points") {
  const ClassHistogram hist({10, 10});
  Eigen::VectorXd z(2);
  z << 0.0, 0.0;
  const LossOutput out =
      loss_grad(cfg_of(LossFamily::CrossEntropy), hist, z, 0);
  CHECK(out.grad(0) == -0.5);
  CHECK(out.grad(1) == 0.5);
}

TEST_CASE("below-threshold gradients per variant") {
  const ClassHistogram hist = lt_hist();
  // logits that leave the true class essentially at probability zero
  Eigen::VectorXd z(5);
  z << 40.0, 0.0, 0.0, 0.0, 0.0;
  const int y = 4;

  LossConfig cfg = cfg_of(LossFamily::Cri, 1.5, 0.5, 1e-6, SigmaVariant::Zero);
  LossOutput out = loss_grad(cfg, hist, z, y);
  CHECK(out.value == 0.0);
  CHECK(out.grad.norm() == 0.0);

  cfg.sigma = SigmaVariant::Constant;
  out = loss_grad(cfg, hist, z, y);
  CHECK(out.grad.norm() == 0.0);
  CHECK(out.value ==
        doctest::Approx(std::pow(1.0 - 1e-6, 1.5) * (-std::log(1e-6))));

  cfg.sigma = SigmaVariant::Linear;
  out = loss_grad(cfg, hist, z, y);
  CHECK(out.grad.norm() > 0.0);  // linear correction still moves
}

TEST_CASE("value of loss_grad matches loss_forward bitwise") {
  std::mt19937 gen(31);
  const ClassHistogram hist = lt_hist();
  for (LossFamily family : {LossFamily::CrossEntropy, LossFamily::Focal,
                            LossFamily::Ldam, LossFamily::Cri}) {
    for (bool focus_margin : {true, false}) {
      LossConfig cfg = cfg_of(family);
      cfg.focus_uses_margin = focus_margin;
      for (int iter = 0; iter < 500; ++iter) {
        const Eigen::VectorXd z = random_logits(gen, hist.num_classes(), 4.0);
        const int y = static_cast<int>(gen() % 5u);
        CHECK(loss_grad(cfg, hist, z, y).value ==
              loss_forward(cfg, hist, z, y));
      }
    }
  }
}

TEST_CASE("gradients sum to zero and match finite differences") {
  std::mt19937 gen(43);
  const ClassHistogram hist = lt_hist();
  const double h = 1e-5;
  int audited = 0;
  while (audited < 1000) {
    LossConfig cfg;
    switch (gen() % 4u) {
      case 0:
        cfg = cfg_of(LossFamily::CrossEntropy);
        break;
      case 1:
        cfg = cfg_of(LossFamily::Focal, 0.5 * static_cast<double>(gen() % 7u));
        break;
      case 2:
        cfg = cfg_of(LossFamily::Ldam);
        break;
      default:
        cfg = cfg_of(LossFamily::Cri,
                     0.5 * static_cast<double>(gen() % 7u), 0.5, 1e-3,
                     static_cast<SigmaVariant>(gen() % 4u));
        cfg.focus_uses_margin = (gen() % 2u) == 0;
        break;
    }
    const Eigen::VectorXd z = random_logits(gen, hist.num_classes(), 3.0);
    const int y = static_cast<int>(gen() % 5u);
    if (cfg.family == LossFamily::Cri && cfg.sigma != SigmaVariant::None) {
      const double margin = ldam_margin(hist, y, cfg.margin_scale);
      if (std::abs(softmax_prob(z, y, margin) - cfg.threshold) < 1e-3) {
        continue;  // stay away from the kink
      }
    }
    ++audited;
    const LossOutput out = loss_grad(cfg, hist, z, y);
    CHECK(std::abs(out.grad.sum()) < 1e-12);
    const Eigen::VectorXd fd = ppl::testing::central_diff(
        [&](const Eigen::VectorXd& v) {
          return loss_forward(cfg, hist, v, y);
        },
        z, h);
    for (int j = 0; j < hist.num_classes(); ++j) {
      CHECK(ppl::testing::mixed_close(out.grad(j), fd(j), 1e-6, 1e-4));
    }
  }
}

TEST_CASE("translation invariance of the logits") {
  std::mt19937 gen(53);
  const ClassHistogram hist = lt_hist();
  for (LossFamily family : {LossFamily::CrossEntropy, LossFamily::Focal,
                            LossFamily::Ldam, LossFamily::Cri}) {
    const LossConfig cfg = cfg_of(family);
    for (int iter = 0; iter < 300; ++iter) {
      const Eigen::VectorXd z = random_logits(gen, hist.num_classes(), 3.0);
      const int y = static_cast<int>(gen() % 5u);
      const Eigen::VectorXd shifted =
          z.array() + (iter % 2 == 0 ? 7.5 : -3.25);
      const LossOutput a = loss_grad(cfg, hist, z, y);
      const LossOutput b = loss_grad(cfg, hist, shifted, y);
      CHECK(std::abs(a.value - b.value) < 1e-10);
      CHECK((a.grad - b.grad).lpNorm<Eigen::Infinity>() < 1e-10);
    }
  }
}

TEST_CASE("saturated probabilities stay finite") {
  const ClassHistogram hist({10, 10});
  Eigen::VectorXd z(2);
  z << -800.0, 800.0;  // p_0 underflows to zero
  const double v = loss_forward(cfg_of(LossFamily::CrossEntropy), hist, z, 0);
  CHECK(std::isfinite(v));
  CHECK(v == doctest::Approx(690.775527898213705).epsilon(1e-12));
  const LossOutput out =
      loss_grad(cfg_of(LossFamily::CrossEntropy), hist, z, 0);
  CHECK(out.grad.allFinite());
}

TEST_CASE("config validation") {
  const ClassHistogram hist({10, 10});
  Eigen::VectorXd z(2);
  z << 0.0, 0.0;
  LossConfig cfg = cfg_of(LossFamily::Focal, -1.0);
  CHECK_THROWS_AS(loss_forward(cfg, hist, z, 0), std::invalid_argument);
  cfg = cfg_of(LossFamily::Cri, 1.5, 0.5, 1.0);
  CHECK_THROWS_AS(loss_forward(cfg, hist, z, 0), std::invalid_argument);
  Eigen::VectorXd wrong(3);
  wrong << 0.0, 0.0, 0.0;
  CHECK_THROWS_AS(
      loss_forward(cfg_of(LossFamily::CrossEntropy), hist, wrong, 0),
      std::invalid_argument);
}
