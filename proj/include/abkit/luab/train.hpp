#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "abkit/luab/loss.hpp"
#include "abkit/luab/model.hpp"
#include "abkit/luab/scene.hpp"

namespace abkit::luab {

enum class Supervision { Byproduct, RandomPoint, None };

std::string_view to_string(Supervision s);

struct TrainConfig {
  LossConfig loss;
  Supervision supervision = Supervision::Byproduct;
  int epochs = 15;
  int batch_size = 32;
  double learning_rate = 0.02;
  double momentum = 0.9;
  std::uint64_t seed = 0;
};

struct EpochStats {
  int epoch = 0;
  double classification_loss = 0.0;
  double regression_loss = 0.0;  // against the supervision target (byproduct point when unsupervised)
  double val_localization = 0.0;
};

struct TrainResult {
  Model model;
  std::vector<EpochStats> curves;
};

// Fixed per-sample uniform points for the random-point baseline.
std::vector<std::vector<std::optional<std::array<double, 2>>>> random_points(
    const std::vector<SceneSample>& data, std::uint64_t seed);

// Mini-batch SGD with momentum on the multi-task objective. Deterministic
// given cfg.seed. Supervision None trains with lambda = 0. Throws
// Error(DivergedTraining) when a batch loss is not finite and
// Error(EmptyInput) on an empty training set.
TrainResult train(const std::vector<SceneSample>& train_set, const std::vector<SceneSample>& val_set,
                  const ModelSpec& spec, const TrainConfig& cfg);

struct Predictions {
  Mat scores;  // raw class scores
  Mat points;  // squashed point predictions
};

Predictions predict(const Model& model, const std::vector<const std::vector<std::uint8_t>*>& images,
                    int batch_size = 256);
Predictions predict(const Model& model, const std::vector<SceneSample>& data, int batch_size = 256);

// Fraction of predicted points inside the labelled object's box; multi-label
// models are scored per present class.
double localization_accuracy(const Predictions& pred, const std::vector<SceneSample>& data,
                             LabelMode labels);

}  // namespace abkit::luab
