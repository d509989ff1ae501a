#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fairaudit/causal.hpp"
#include "fairaudit/core_data.hpp"
#include "fairaudit/modeling.hpp"

// The two-target synthetic generator and the five-approach comparison
// (unaware, two suppression levels, conditional and unconditional parity
// post-processing) measured on U(Yhat, A), ROC AUC, flip consistency and
// DP ratio.

namespace fairaudit {

enum class SynthTarget { high, low };
// How to read the 1/2 in Norm(0, 1/2): as standard deviation or variance.
enum class NoiseInterpretation { std_dev, variance };

const char* to_string(SynthTarget t);
const char* to_string(NoiseInterpretation i);
SynthTarget parse_synth_target(const std::string& text);
NoiseInterpretation parse_noise_interpretation(const std::string& text);

inline constexpr std::size_t kSynthRows = 15000;
inline constexpr double kReferenceUHigh = 93.1;
inline constexpr double kReferenceULow = 20.9;

struct SynthConfig {
  std::size_t n = kSynthRows;
  SynthTarget target = SynthTarget::high;
  std::optional<NoiseInterpretation> interpretation;  // calibrated when absent
  std::uint64_t seed = 1;
};

double noise_std(NoiseInterpretation i);
// Population mean of zeta; the same under both readings since all noises
// are centred.
double zeta_mean(SynthTarget t);

// A ~ Ber(1/2); X1 = A/2 + U1; X2 = U2; X3 = 1[A + U3 >= 1], U3 ~ Ber(1/2);
// zeta = X1 + 2 X2 + X3/2 (+ 4A for the high target) + U; Y = 1[zeta > E zeta].
Scm build_synth_scm(SynthTarget target, NoiseInterpretation interpretation);

struct NoiseCalibration {
  NoiseInterpretation chosen = NoiseInterpretation::std_dev;
  std::size_t n = kSynthRows;
  // U(Y, A) in percent per reading, for the high and low targets.
  double u_high_std = 0.0, u_low_std = 0.0;
  double u_high_variance = 0.0, u_low_variance = 0.0;
  double distance_std = 0.0;  // max-norm distance to the reference pair
  double distance_variance = 0.0;
};

// Seed used for the synthetic dataset of `target` under root `seed`.
std::uint64_t synth_seed(std::uint64_t seed, SynthTarget target);

NoiseCalibration calibrate_noise_interpretation(std::uint64_t seed, std::size_t n = kSynthRows);

// sample(build_synth_scm(...), cfg.n, cfg.seed).
Dataset generate(const SynthConfig& cfg);
inline const std::vector<std::string> kSynthColumns{"A", "X1", "X2", "X3", "Y"};

enum class Approach { ftu, supp_low, supp_high, cdp, dp };
inline const std::vector<Approach> kAllApproaches{Approach::ftu, Approach::supp_low,
                                                  Approach::supp_high, Approach::cdp, Approach::dp};
const char* to_string(Approach a);

struct ExperimentDataset {
  std::string name;
  Dataset data;
  MitigationSpec supp_low;
  MitigationSpec supp_high;
  std::string cdp_column;
};

ExperimentDataset synthetic_dataset(SynthTarget target, NoiseInterpretation interpretation,
                                    std::size_t n, std::uint64_t seed);
// Suppression at 0.05 and 0.10, conditional parity on `cdp_column`.
ExperimentDataset adult_dataset(Dataset data, std::string cdp_column = "marital-status");

struct ApproachResult {
  Approach approach = Approach::ftu;
  std::string strategy;
  double u_yhat_a = 0.0;  // percent
  double auc = 0.0;
  double flip = 0.0;
  double dp_ratio = 0.0;
  bool auc_on_decisions = false;
  std::vector<std::string> dropped;
  std::vector<std::string> flags;
};

struct DatasetBlock {
  std::string name;
  double u_y_a = 0.0;  // percent, whole dataset
  std::size_t rows = 0, train_rows = 0, test_rows = 0;
  std::vector<ApproachResult> results;
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  double train_fraction = 0.7;
  TrainConfig train;
};

struct ExperimentReport {
  std::uint64_t seed = 1;
  double train_fraction = 0.7;
  std::optional<NoiseInterpretation> interpretation;
  std::optional<NoiseCalibration> calibration;
  std::vector<DatasetBlock> blocks;

  const DatasetBlock& block(const std::string& name) const;
  const ApproachResult& result(const std::string& dataset, Approach a) const;
};

// Models are trained on the training split; metrics and the post-processing
// thresholds use the held-out split.
ExperimentReport run_experiment(const std::vector<ExperimentDataset>& datasets,
                                const ExperimentConfig& cfg,
                                const std::vector<Approach>& approaches = kAllApproaches);

// Both synthetic blocks, plus `adult` when given. The noise reading is
// calibrated unless forced.
ExperimentReport run_standard_experiment(const ExperimentConfig& cfg, std::size_t n,
                                      std::optional<NoiseInterpretation> interpretation,
                                      std::optional<Dataset> adult = std::nullopt);

// Metrics x approaches, one block per dataset, one decimal.
std::string experiment_csv(const ExperimentReport& report);
std::string experiment_json(const ExperimentReport& report);

}  // namespace fairaudit
