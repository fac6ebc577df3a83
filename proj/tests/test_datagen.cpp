#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "ppl/datagen.hpp"

using namespace ppl;

namespace {

std::filesystem::path write_temp(const std::string& name,
                                 const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path);
  out << text;
  return path;
}

}  // namespace

TEST_CASE("long-tailed profile counts") {
  const ClassHistogram balanced =
      profile_counts({ProfileKind::LongTailed, 1.0, 300, 6});
  for (int j = 0; j < 6; ++j) CHECK(balanced.count(j) == 300);

  const ClassHistogram lt =
      profile_counts({ProfileKind::LongTailed, 100.0, 5000, 10});
  const std::vector<std::int64_t> expected = {5000, 2997, 1797, 1077, 646,
                                              387,  232,  139,  83,   50};
  for (int j = 0; j < 10; ++j) CHECK(lt.count(j) == expected[j]);
  CHECK(lt.min_count() == 50);
  CHECK(lt.imbalance_factor() == 100.0);

  // successive ratios stay geometric within rounding
  const double r = std::pow(100.0, -1.0 / 9.0);
  for (int j = 0; j + 1 < 10; ++j) {
    CHECK(std::abs(static_cast<double>(lt.count(j + 1)) -
                   static_cast<double>(lt.count(j)) * r) <= 1.0 + 1e-9);
  }
}

TEST_CASE("step profile counts") {
  const ClassHistogram step =
      profile_counts({ProfileKind::Step, 100.0, 5000, 10});
  for (int j = 0; j < 5; ++j) CHECK(step.count(j) == 5000);
  for (int j = 5; j < 10; ++j) CHECK(step.count(j) == 50);
  // odd class count: the head takes the extra class
  const ClassHistogram odd = profile_counts({ProfileKind::Step, 10.0, 100, 5});
  CHECK(odd.count(2) == 100);
  CHECK(odd.count(3) == 10);
}

TEST_CASE("profiles that would empty a class are rejected") {
  CHECK_THROWS_AS(profile_counts({ProfileKind::Step, 100.0, 10, 4}),
                  std::invalid_argument);
  CHECK_THROWS_AS(profile_counts({ProfileKind::LongTailed, 0.5, 100, 4}),
                  std::invalid_argument);
  CHECK_THROWS_AS(profile_counts({ProfileKind::LongTailed, 10.0, 100, 1}),
                  std::invalid_argument);
}

TEST_CASE("synthetic data is deterministic and matches the histogram") {
  const ClassHistogram counts =
      profile_counts({ProfileKind::LongTailed, 10.0, 120, 4});
  const DataBundle a = synth_gaussians(counts, 6, 2.0, 1.0, 30, 77u);
  const DataBundle b = synth_gaussians(counts, 6, 2.0, 1.0, 30, 77u);
  CHECK(a.train.features() == b.train.features());
  CHECK(a.val.features() == b.val.features());
  CHECK(a.train.histogram().counts() == counts.counts());
  for (int j = 0; j < 4; ++j) CHECK(a.val.histogram().count(j) == 30);
  CHECK(a.train.split() == Split::Train);
  CHECK(a.val.split() == Split::Validation);

  const DataBundle c = synth_gaussians(counts, 6, 2.0, 1.0, 30, 78u);
  CHECK(a.train.features() != c.train.features());
}

TEST_CASE("orthonormal class means at the requested separation") {
  const ClassHistogram counts({50, 50, 50});
  const DataBundle d = synth_gaussians(counts, 8, 3.0, 0.5, 10, 5u);
  for (int j = 0; j < 3; ++j) {
    CHECK(std::abs(d.class_means.col(j).norm() - 3.0) < 1e-9);
    for (int k = j + 1; k < 3; ++k) {
      CHECK(std::abs(d.class_means.col(j).dot(d.class_means.col(k))) < 1e-9);
    }
  }
}

TEST_CASE("vanishing noise gives nearest-mean separability") {
  const ClassHistogram counts({40, 40, 40, 40});
  const DataBundle d = synth_gaussians(counts, 6, 2.0, 1e-6, 25, 9u);
  for (Eigen::Index i = 0; i < d.val.size(); ++i) {
    int nearest = 0;
    double best = (d.val.features().row(i).transpose() - d.class_means.col(0))
                      .squaredNorm();
    for (int j = 1; j < 4; ++j) {
      const double dist =
          (d.val.features().row(i).transpose() - d.class_means.col(j))
              .squaredNorm();
      if (dist < best) {
        best = dist;
        nearest = j;
      }
    }
    CHECK(nearest == d.val.labels()[static_cast<std::size_t>(i)]);
  }
}

TEST_CASE("empirical class means converge to the configured means") {
  const ClassHistogram counts({400, 400, 400});
  const double noise = 0.8;
  const DataBundle d = synth_gaussians(counts, 8, 2.5, noise, 10, 21u);
  for (int j = 0; j < 3; ++j) {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(8);
    for (int row : d.train.rows_of_class(j)) {
      mean += d.train.features().row(row).transpose();
    }
    mean /= static_cast<double>(d.train.rows_of_class(j).size());
    const double bound =
        3.0 * noise / std::sqrt(static_cast<double>(counts.count(j)));
    for (int k = 0; k < 8; ++k) {
      CHECK(std::abs(mean(k) - d.class_means(k, j)) < bound);
    }
  }
}

TEST_CASE("quantity-ratio subsampling") {
  const ClassHistogram counts({100, 10});
  const DataBundle d = synth_gaussians(counts, 4, 2.0, 1.0, 5, 31u);

  const Dataset same = apply_qr(d.train, 1.0, 1u);
  CHECK(same.features() == d.train.features());

  const Dataset half = apply_qr(d.train, 0.5, 1u);
  CHECK(half.histogram().count(0) == 50);
  CHECK(half.histogram().count(1) == 5);
  // IF preserved within rounding
  CHECK(std::abs(half.histogram().imbalance_factor() -
                 d.train.histogram().imbalance_factor()) < 1.0);

  const Dataset tiny = apply_qr(d.train, 0.01, 1u);
  CHECK(tiny.histogram().count(1) == 1);  // never empties a class

  CHECK_THROWS_AS(apply_qr(d.train, 0.0, 1u), std::invalid_argument);
  CHECK_THROWS_AS(apply_qr(d.train, 1.5, 1u), std::invalid_argument);
}

TEST_CASE("subsampled counts commute with class relabeling") {
  const ClassHistogram counts({120, 60, 30});
  const DataBundle d = synth_gaussians(counts, 4, 2.0, 1.0, 5, 41u);
  // relabel classes by the permutation 0->2, 1->0, 2->1
  const int perm[3] = {2, 0, 1};
  std::vector<int> relabeled(d.train.labels().size());
  for (std::size_t i = 0; i < relabeled.size(); ++i) {
    relabeled[i] = perm[d.train.labels()[i]];
  }
  const Dataset permuted(d.train.features(), relabeled, 3, Split::Train);
  const Dataset qa = apply_qr(d.train, 0.4, 9u);
  const Dataset qb = apply_qr(permuted, 0.4, 9u);
  for (int j = 0; j < 3; ++j) {
    CHECK(qb.histogram().count(perm[j]) == qa.histogram().count(j));
  }
}

TEST_CASE("tabular loading") {
  const auto path = write_temp("ppl_tab_ok.csv",
                               "1.5,2.0,0\n"
                               "-0.5,0.25,1\n"
                               "3.0,1e-2,0\n");
  const Dataset ds = load_tabular(path.string(), false);
  CHECK(ds.size() == 3);
  CHECK(ds.dim() == 2);
  CHECK(ds.num_classes() == 2);
  CHECK(ds.features()(1, 0) == -0.5);
  CHECK(ds.histogram().count(0) == 2);

  const auto with_header = write_temp("ppl_tab_header.csv",
                                      "a,b,label\n"
                                      "1,2,0\n"
                                      "3,4,1\n");
  CHECK(load_tabular(with_header.string(), true).size() == 2);
}

TEST_CASE("tabular errors name the offending line") {
  const auto bad_feature = write_temp("ppl_tab_bad.csv",
                                      "1.0,2.0,0\n"
                                      "1.0,oops,1\n");
  CHECK_THROWS_WITH_AS(load_tabular(bad_feature.string(), false),
                       doctest::Contains("line 2"), std::runtime_error);

  const auto ragged = write_temp("ppl_tab_ragged.csv",
                                 "1.0,2.0,0\n"
                                 "1.0,2.0,3.0,1\n");
  CHECK_THROWS_WITH_AS(load_tabular(ragged.string(), false),
                       doctest::Contains("line 2"), std::runtime_error);

  const auto bad_label = write_temp("ppl_tab_label.csv", "1.0,2.0,zero\n");
  CHECK_THROWS_WITH_AS(load_tabular(bad_label.string(), false),
                       doctest::Contains("line 1"), std::runtime_error);

  // class 1 has no samples: histogram invariant violation
  const auto hole = write_temp("ppl_tab_hole.csv",
                               "1.0,2.0,0\n"
                               "1.0,2.0,2\n");
  CHECK_THROWS_WITH_AS(load_tabular(hole.string(), false),
                       doctest::Contains("class 1"), std::invalid_argument);

  CHECK_THROWS_AS(load_tabular("/nonexistent/nope.csv", false),
                  std::runtime_error);
}
