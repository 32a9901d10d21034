#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "abkit/luab/model.hpp"
#include "abkit/luab/scene.hpp"
#include "abkit/luab/train.hpp"

namespace abkit::luab {

struct VMetrics {
  double v_avg = 0.0;
  double v_min = 0.0;
  std::size_t pairs = 0;  // (sample, class) pairs scored
};

struct RobustnessReport {
  double acc_corr = 0.0;
  double acc_decorr = 0.0;
  double bg_gap = 0.0;  // acc_corr - acc_decorr
  double localization = 0.0;
  std::optional<double> mean_ap;
  std::optional<VMetrics> v;
};

// Single-label: accuracies on the background-correlated and de-correlated
// sets from one prediction pass each, their difference, and point-in-box
// accuracy over both sets. Throws Error(EmptyTestSet) if either set is empty.
RobustnessReport evaluate_robustness(const Model& model, const std::vector<SceneSample>& test_corr,
                                     const std::vector<SceneSample>& test_decorr);

// Multi-label: mAP and point-in-box accuracy on `test`, plus V metrics.
RobustnessReport evaluate_multilabel(const Model& model, const std::vector<SceneSample>& test,
                                     const SceneConfig& scene_cfg, std::uint64_t seed);

// Average precision of one class given scores and binary labels; undefined
// (nullopt) without positives.
std::optional<double> average_precision(const std::vector<double>& scores, const std::vector<bool>& labels);

// For every present class c of every sample, V_{c,o} = s_c(X without c) -
// s_c(X without o) with s the sigmoid score. V^avg uses one other present
// class o drawn at random per pair; V^min uses the o giving the largest V.
// Lower is better. Throws Error(NoCooccurrence) when a sample has a single
// class and Error(EmptyTestSet) when `test` is empty.
VMetrics v_metrics(const Model& model, const std::vector<SceneSample>& test, const SceneConfig& scene_cfg,
                   std::uint64_t seed);

}  // namespace abkit::luab
