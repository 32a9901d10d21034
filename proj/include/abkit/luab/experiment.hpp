#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "abkit/luab/robustness.hpp"
#include "abkit/luab/train.hpp"

namespace abkit::luab {

// Training arms: byproduct points, uniform-random points, no point
// supervision (lambda = 0), and byproduct-guided attentive pooling.
enum class Arm { Luab, Rand, Baseline, AttPool };

std::string_view to_string(Arm a);
// Throws Error(InvalidArgument) for unknown names.
Arm parse_arm(const std::string& name);

struct ExperimentConfig {
  Arm arm = Arm::Luab;
  LabelMode labels = LabelMode::Single;
  LossConfig loss;
  double rho = 0.95;      // single-label train/val background correlation
  double co_rate = 0.9;   // multi-label co-occurrence rate
  std::size_t train_size = 5000;
  std::size_t val_size = 500;
  std::size_t test_size = 1000;  // per test split
  int epochs = 12;
  int batch_size = 32;
  double learning_rate = 0.02;
  SceneConfig scene;
};

struct ArmResult {
  TrainResult trained;
  RobustnessReport report;
};

// Synthetic splits for one seed. Data depend only on the seed and the data
// settings, so every arm of a seed sees identical images.
struct ExperimentData {
  std::vector<SceneSample> train, val, test_corr, test_decorr;
};
ExperimentData make_experiment_data(const ExperimentConfig& cfg, std::uint64_t seed);

ModelSpec model_spec(const ExperimentConfig& cfg);
TrainConfig train_config(const ExperimentConfig& cfg, std::uint64_t seed);

// Single-label runs are scored with evaluate_robustness on the correlated
// (rho = 1) and de-correlated (rho = 1/K) splits; multi-label runs with
// evaluate_multilabel on test_corr.
ArmResult run_arm(const ExperimentConfig& cfg, const ExperimentData& data, std::uint64_t seed);

}  // namespace abkit::luab
