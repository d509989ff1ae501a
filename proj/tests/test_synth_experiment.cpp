#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "fairaudit/causal.hpp"
#include "fairaudit/errors.hpp"
#include "fairaudit/info_theory.hpp"
#include "fairaudit/synth_experiment.hpp"

using namespace fairaudit;

namespace {

double corr(const std::vector<double>& x, const std::vector<int>& a) {
  double n = static_cast<double>(x.size()), mx = 0, ma = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], ma += a[i];
  mx /= n;
  ma /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (a[i] - ma);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (a[i] - ma) * (a[i] - ma);
  }
  return sxy / std::sqrt(sxx * syy);
}

double mean(const std::vector<int>& v) {
  double s = 0;
  for (int x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

TEST_CASE("analytic constants") {
  CHECK(zeta_mean(SynthTarget::high) == doctest::Approx(2.625));
  CHECK(zeta_mean(SynthTarget::low) == doctest::Approx(0.625));
  CHECK(noise_std(NoiseInterpretation::std_dev) == 0.5);
  CHECK(noise_std(NoiseInterpretation::variance) == doctest::Approx(std::sqrt(0.5)));
  CHECK(parse_synth_target("low") == SynthTarget::low);
  CHECK(parse_noise_interpretation("variance") == NoiseInterpretation::variance);
  CHECK_THROWS_AS(parse_synth_target("medium"), DomainError);
}

TEST_CASE("generator is the structural model") {
  for (auto t : {SynthTarget::high, SynthTarget::low})
    for (auto i : {NoiseInterpretation::std_dev, NoiseInterpretation::variance}) {
      auto g = generate({500, t, i, 12});
      auto s = sample(build_synth_scm(t, i), 500, 12);
      CHECK(dataset_to_csv(g) == dataset_to_csv(s));
      CHECK(g.feature("X1").values == s.feature("X1").values);
    }
  auto ds = generate({10, SynthTarget::high, NoiseInterpretation::std_dev, 1});
  CHECK(ds.feature_names() == std::vector<std::string>{"X1", "X2", "X3"});
  CHECK(ds.sensitive().name() == "A");
  CHECK(ds.target_name() == "Y");
  CHECK_THROWS_AS(generate({0, SynthTarget::high, NoiseInterpretation::std_dev, 1}), PreconditionError);
}

TEST_CASE("sample statistics at full size") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto hi = generate({kSynthRows, SynthTarget::high, NoiseInterpretation::std_dev, seed});
    auto lo = generate({kSynthRows, SynthTarget::low, NoiseInterpretation::std_dev, seed});
    for (const auto* ds : {&hi, &lo}) {
      double p = mean(*ds->target());
      CHECK(p >= 0.4);
      CHECK(p <= 0.6);
      CHECK(std::abs(corr(ds->feature("X2").values, ds->sensitive().codes())) < 0.03);
      double x3 = 0;
      for (double v : ds->feature("X3").values) x3 += v;
      CHECK(std::abs(x3 / kSynthRows - 0.75) <= 0.02);
    }
    double u_hi = symmetric_uncertainty(hi.sensitive().codes(), *hi.target());
    double u_lo = symmetric_uncertainty(lo.sensitive().codes(), *lo.target());
    CHECK(u_lo < u_hi);
  }
}

TEST_CASE("noise calibration is deterministic and consistent") {
  auto a = calibrate_noise_interpretation(1);
  auto b = calibrate_noise_interpretation(1);
  CHECK(a.chosen == b.chosen);
  CHECK(a.u_high_std == b.u_high_std);
  double ds = std::max(std::abs(a.u_high_std - kReferenceUHigh), std::abs(a.u_low_std - kReferenceULow));
  double dv = std::max(std::abs(a.u_high_variance - kReferenceUHigh), std::abs(a.u_low_variance - kReferenceULow));
  CHECK(a.distance_std == doctest::Approx(ds));
  CHECK(a.distance_variance == doctest::Approx(dv));
  CHECK(a.chosen == (ds <= dv ? NoiseInterpretation::std_dev : NoiseInterpretation::variance));
}

TEST_CASE("experiment table structure") {
  ExperimentConfig cfg;
  auto report = run_standard_experiment(cfg, 6000, NoiseInterpretation::std_dev, std::nullopt);
  REQUIRE(report.blocks.size() == 2);
  for (const auto& block : report.blocks) {
    CHECK(block.results.size() == kAllApproaches.size());
    CHECK(block.train_rows + block.test_rows == block.rows);
    for (auto a : {Approach::ftu, Approach::supp_low, Approach::supp_high}) {
      CHECK(report.result(block.name, a).flip == 100.0);
    }
    const auto& ftu = report.result(block.name, Approach::ftu);
    for (const auto& r : block.results) {
      CHECK(r.auc <= 100.0);
      CHECK(r.dp_ratio <= 100.0);
      if (r.approach != Approach::ftu) CHECK(ftu.auc > r.auc);
    }
    CHECK(report.result(block.name, Approach::dp).dp_ratio >= 95.0);
  }
  const auto& s1 = report.blocks[0].name;
  CHECK(report.result(s1, Approach::dp).u_yhat_a <= 2.0);
  CHECK(std::abs(report.result(s1, Approach::dp).auc - 50.0) <= 5.0);
  CHECK(report.result(s1, Approach::supp_high).auc > report.result(s1, Approach::supp_low).auc);
  CHECK(report.result(s1, Approach::supp_low).dropped == std::vector<std::string>{"X1", "X3"});
  CHECK(report.result(s1, Approach::supp_high).dropped == std::vector<std::string>{"X1"});

  auto csv = experiment_csv(report);
  CHECK(csv.find("FTU,Supp_l,Supp_h,CDP,DP") != std::string::npos);
  CHECK(csv.find("held-out") != std::string::npos);
  auto again = run_standard_experiment(cfg, 6000, NoiseInterpretation::std_dev, std::nullopt);
  CHECK(experiment_csv(again) == csv);
  CHECK(experiment_json(again) == experiment_json(report));
  CHECK_THROWS(report.block("nope"));
}
