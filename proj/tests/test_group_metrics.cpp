#include <doctest.h>

#include <cmath>
#include <vector>

#include "fairaudit/errors.hpp"
#include "fairaudit/group_metrics.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace fairaudit;
using testing::decisions;
using testing::make_dataset;

namespace {
// Group 0: 4 rows, group 1: 4 rows.
//   A  Y  D
//   0  1  1
//   0  1  0
//   0  0  1
//   0  0  0
//   1  1  1
//   1  1  1
//   1  0  1
//   1  0  0
Dataset toy() {
  return make_dataset({{1, 2, 3, 4, 5, 6, 7, 8}}, {0, 0, 0, 0, 1, 1, 1, 1}, std::vector<int>{1, 1, 0, 0, 1, 1, 0, 0});
}
PredictionSet toy_decisions() { return decisions({1, 0, 1, 0, 1, 1, 1, 0}); }
}  // namespace

TEST_CASE("group rates on a hand-checked table") {
  auto stats = GroupStats::compute(toy(), toy_decisions());
  CHECK(*stats.acceptance_rate(0).value == doctest::Approx(0.5));
  CHECK(*stats.acceptance_rate(1).value == doctest::Approx(0.75));
  CHECK(*stats.tpr(0).value == doctest::Approx(0.5));
  CHECK(*stats.tpr(1).value == doctest::Approx(1.0));
  CHECK(*stats.fpr(0).value == doctest::Approx(0.5));
  CHECK(*stats.fpr(1).value == doctest::Approx(0.5));
  CHECK(*stats.fnr(1).value == doctest::Approx(0.0));
  CHECK(*stats.ppv(1).value == doctest::Approx(2.0 / 3.0));
  CHECK(*stats.npv(1).value == doctest::Approx(1.0));
  CHECK(*stats.accuracy(0).value == doctest::Approx(0.5));
  CHECK(*stats.base_rate(1).value == doctest::Approx(0.5));
  for (std::size_t g = 0; g < 2; ++g)
    CHECK(*stats.fnr(g).value == doctest::Approx(1.0 - *stats.tpr(g).value));
}

TEST_CASE("aggregates: gap and ratio") {
  auto dp = demographic_parity(toy(), toy_decisions());
  CHECK(*dp.gap == doctest::Approx(0.25));
  CHECK(*dp.ratio == doctest::Approx(0.5 / 0.75));
  CHECK(dp.value_for("1") == doctest::Approx(0.75));

  auto eo = equality_of_odds(toy(), toy_decisions());
  CHECK(eo.components.size() == 2);
  CHECK(*eo.gap == doctest::Approx(0.5));
  CHECK(*predictive_equality(toy(), toy_decisions()).gap == doctest::Approx(0.0));
  CHECK(*equality_of_opportunity(toy(), toy_decisions()).gap == doctest::Approx(0.5));

  auto same = demographic_parity(toy(), decisions({1, 1, 0, 0, 0, 1, 0, 1}));
  CHECK(*same.gap == 0.0);
  CHECK(*same.ratio == 1.0);

  auto none = demographic_parity(toy(), decisions(std::vector<int>(8, 0)));
  CHECK(*none.ratio == 1.0);
}

TEST_CASE("undefined rates are reported, not zero") {
  auto ds = make_dataset({{1, 2, 3, 4}}, {0, 0, 1, 1}, std::vector<int>{1, 1, 1, 0});
  auto pp = predictive_equality(ds, decisions({1, 0, 1, 1}));
  CHECK_FALSE(pp.values[0].value.has_value());
  CHECK_FALSE(pp.values[0].reason.empty());
  CHECK(pp.undefined_groups == std::vector<std::string>{"0"});
  CHECK_FALSE(pp.gap.has_value());

  auto ppv = predictive_parity(ds, decisions({0, 0, 1, 1}));
  CHECK_FALSE(ppv.values[0].value.has_value());
}

TEST_CASE("missing inputs raise preconditions") {
  auto no_target = make_dataset({{1, 2}}, {0, 1});
  CHECK_THROWS_AS(equality_of_odds(no_target, decisions({0, 1})), PreconditionError);
  CHECK_THROWS_AS(auc_parity(toy(), toy_decisions()), PreconditionError);
  CHECK_THROWS_AS(demographic_parity(toy(), testing::scores(std::vector<double>(8, 0.5))),
                  PreconditionError);
}

TEST_CASE("AUC against pairwise oracle") {
  Rng rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t n = 2 + rng.uniform_index(49);
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = std::round(rng.uniform01() * 10.0) / 10.0;
      y[i] = static_cast<int>(rng.uniform_index(2));
    }
    y[0] = 1;
    y[1] = 0;
    auto got = roc_auc(s, y);
    REQUIRE(got);
    CHECK(std::abs(*got - oracle::auc_pairs(s, y)) <= 1e-12);
  }
  std::vector<double> s{0.1, 0.2};
  std::vector<int> one_class{1, 1};
  CHECK_FALSE(roc_auc(s, one_class).has_value());
}

TEST_CASE("conditional demographic parity skips thin strata") {
  std::vector<int> a, y, r;
  std::vector<int> d;
  // Stratum 0: 40 rows per group, rates 0.5 vs 0.25; stratum 1: 5 rows in group 1 only.
  for (int i = 0; i < 40; ++i) {
    a.push_back(0), r.push_back(0), d.push_back(i % 2 == 0);
    a.push_back(1), r.push_back(0), d.push_back(i % 4 == 0);
  }
  for (int i = 0; i < 5; ++i) a.push_back(1), r.push_back(1), d.push_back(1);
  std::size_t n = a.size();
  y.assign(n, 0);
  std::vector<FeatureColumn> cols{FeatureColumn::categorical("R", r, {"lo", "hi"})};
  Dataset ds(cols, testing::binary_groups(a), y);
  auto rep = conditional_demographic_parity(ds, decisions(d), "R", 30);
  REQUIRE(rep.strata.size() == 2);
  CHECK(rep.strata[0].qualifies);
  CHECK_FALSE(rep.strata[1].qualifies);
  CHECK(rep.skipped == std::vector<std::string>{"hi"});
  CHECK(*rep.max_gap == doctest::Approx(0.25));
  CHECK(*rep.weighted_mean_gap == doctest::Approx(0.25));
  CHECK_THROWS_AS(conditional_demographic_parity(ds, decisions(d), "missing", 30), DataError);
}

TEST_CASE("calibration within groups") {
  std::vector<int> a, y;
  std::vector<double> s;
  for (int i = 0; i < 100; ++i) {
    a.push_back(i % 2);
    s.push_back(i < 50 ? 0.15 : 0.85);
    // group 0 perfectly calibrated at 0.2 / 0.8; group 1 at 0.5 in the upper bin
    int k = i / 2 % 25;
    if (i % 2 == 0) y.push_back(i < 50 ? k < 5 : k < 20);
    else y.push_back(i < 50 ? k < 5 : k < 12);
  }
  auto ds = make_dataset({std::vector<double>(100, 0.0)}, a, y);
  auto rep = calibration_within_groups(ds, testing::scores(s), 10, 20);
  REQUIRE(rep.groups.size() == 2);
  CHECK(*rep.groups[0].error == doctest::Approx(0.05).epsilon(1e-9));
  CHECK(*rep.groups[1].error == doctest::Approx(0.85 - 0.48).epsilon(1e-9));
  CHECK(*rep.max_error == doctest::Approx(0.37).epsilon(1e-9));
}

TEST_CASE("apply_threshold accepts S >= t per group") {
  ThresholdPolicy pol;
  pol.cells[{"0", ""}] = 0.5;
  pol.cells[{"1", ""}] = 0.3;
  auto groups = testing::binary_groups({0, 0, 1, 1});
  auto out = apply_threshold(testing::scores({0.5, 0.49, 0.3, 0.29}), pol, groups);
  CHECK(*out.decisions == std::vector<int>{1, 0, 1, 0});
  CHECK(out.scores.has_value());
  ThresholdPolicy partial;
  partial.cells[{"0", ""}] = 0.5;
  CHECK_THROWS_AS(apply_threshold(testing::scores({0.1, 0.1, 0.1, 0.1}), partial, groups),
                  PreconditionError);
}
