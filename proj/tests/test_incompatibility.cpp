#include <doctest.h>

#include <cmath>
#include <vector>

#include "constructions.hpp"
#include "fairaudit/errors.hpp"
#include "fairaudit/incompatibility.hpp"

using namespace fairaudit;

TEST_CASE("implied gaps: worked values") {
  std::vector<double> p{0.6, 0.3};
  CHECK(separation_implies_dp_gap(0.8, 0.2, p) == doctest::Approx(0.18).epsilon(1e-14));
  CHECK(separation_implies_dp_gap(0.4, 0.4, p) == 0.0);
  std::vector<double> equal{0.3, 0.3};
  CHECK(separation_implies_dp_gap(0.9, 0.1, equal) == 0.0);

  std::vector<double> q{0.5, 0.42};
  auto s = sufficiency_implies_dp_gap(0.9, 0.9, q);
  REQUIRE(s.gap);
  CHECK(*s.gap == doctest::Approx(0.1).epsilon(1e-14));
  CHECK_FALSE(s.degenerate);
  auto d = sufficiency_implies_dp_gap(0.6, 0.4, q);
  CHECK(d.degenerate);
  CHECK_FALSE(d.gap.has_value());
  CHECK(*sufficiency_implies_dp_gap(0.7, 0.7, equal).gap == 0.0);

  CHECK_THROWS_AS(separation_implies_dp_gap(1.2, 0.2, p), DomainError);
  CHECK_THROWS_AS(sufficiency_implies_dp_gap(0.9, -0.1, p), DomainError);
}

TEST_CASE("worked values on exactly built counts") {
  // tpr 0.8, fpr 0.2; group 0: 60 pos / 40 neg, group 1: 30 pos / 70 neg.
  auto sep = construct::from_cells({{48, 12, 8, 32}, {24, 6, 14, 56}});
  auto g = gaps(sep.ds, sep.preds);
  CHECK(*g.sep_gap <= 1e-12);
  CHECK(std::abs(*g.indep_gap - 0.18) <= 1e-12);

  // ppv = npv = 0.9; group 0: 50 accepted / 50 rejected (p = 0.5),
  // group 1: 40 accepted / 60 rejected (p = 0.36 + 0.06 = 0.42).
  auto suf = construct::from_cells({{45, 5, 5, 45}, {36, 6, 4, 54}});
  auto h = gaps(suf.ds, suf.preds);
  CHECK(*h.suff_gap <= 1e-12);
  CHECK(std::abs(*h.base_rate_gap - 0.08) <= 1e-12);
  CHECK(std::abs(*h.indep_gap - 0.1) <= 1e-12);
}

TEST_CASE("identities match gaps() on random exact constructions") {
  Rng rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    std::size_t groups = 2 + trial % 2;
    auto s = construct::exact_separation(rng, groups);
    auto g = gaps(s.built.ds, s.built.preds);
    CHECK(*g.sep_gap <= 1e-12);
    CHECK(std::abs(*g.indep_gap - separation_implies_dp_gap(s.tpr, s.fpr, s.built.base_rates)) <= 1e-12);

    auto f = construct::exact_sufficiency(rng, groups);
    auto h = gaps(f.built.ds, f.built.preds);
    CHECK(*h.suff_gap <= 1e-12);
    auto implied = sufficiency_implies_dp_gap(f.ppv, f.npv, f.built.base_rates);
    REQUIRE(implied.gap);
    CHECK(std::abs(*h.indep_gap - *implied.gap) <= 1e-12);
  }
}

TEST_CASE("trivial classifiers") {
  Rng rng(3);
  std::vector<int> a, y;
  for (int i = 0; i < 40; ++i) a.push_back(i % 2), y.push_back(i % 2 == 0 ? i % 4 == 0 : i % 8 != 1);
  auto ds = testing::make_dataset({std::vector<double>(40, 0.0)}, a, y);
  auto perfect = gaps(ds, testing::decisions(y));
  CHECK(*perfect.sep_gap == 0.0);
  CHECK(*perfect.suff_gap == 0.0);
  CHECK(*perfect.indep_gap == doctest::Approx(*perfect.base_rate_gap));
  CHECK(perfect.usefulness == doctest::Approx(1.0));

  auto ones = gaps(ds, testing::decisions(std::vector<int>(40, 1)));
  CHECK(*ones.indep_gap == 0.0);
  CHECK(ones.usefulness == 0.0);

  auto verdict = check_sep_suff_exclusion(ds, testing::decisions(y));
  CHECK_FALSE(verdict.applicable);
  CHECK(verdict.note.find("inapplicable") != std::string::npos);
}

TEST_CASE("separation and sufficiency never co-occur") {
  Rng rng(43);
  std::size_t sep_held = 0;
  for (std::size_t trial = 0; trial < 1000; ++trial) {
    auto b = construct::exclusion_candidate(rng, trial);
    auto v = check_sep_suff_exclusion(b.ds, b.preds);
    CHECK(v.applicable);
    CHECK_FALSE(v.forbidden_combination);
    sep_held += v.separation_holds;
  }
  // The even trials are exactly separated, so the search exercises the
  // sufficiency side rather than only noisy data.
  CHECK(sep_held >= 500);
}

TEST_CASE("balance and calibration cannot all hold with unequal base rates") {
  Rng rng(44);
  for (std::size_t trial = 0; trial < 1000; ++trial) {
    auto set = construct::calibrated_balance_scores(rng, trial);
    CHECK(construct::calibration_balance_violation(set) > 1e-9);
  }
}
