#include "abkit/luab/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "abkit/error.hpp"
#include "abkit/rng.hpp"

namespace abkit::luab {

namespace {

double accuracy(const Predictions& p, const std::vector<SceneSample>& data) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    Eigen::Index arg = 0;
    p.scores.row(static_cast<Eigen::Index>(i)).maxCoeff(&arg);
    hits += arg == data[i].label ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

RobustnessReport evaluate_robustness(const Model& model, const std::vector<SceneSample>& test_corr,
                                     const std::vector<SceneSample>& test_decorr) {
  if (test_corr.empty() || test_decorr.empty()) throw Error(ErrorCode::EmptyTestSet, "both test sets are required");
  const auto pc = predict(model, test_corr);
  const auto pd = predict(model, test_decorr);
  RobustnessReport r;
  r.acc_corr = accuracy(pc, test_corr);
  r.acc_decorr = accuracy(pd, test_decorr);
  r.bg_gap = r.acc_corr - r.acc_decorr;
  const double lc = localization_accuracy(pc, test_corr, model.spec().labels);
  const double ld = localization_accuracy(pd, test_decorr, model.spec().labels);
  r.localization = (lc * static_cast<double>(test_corr.size()) + ld * static_cast<double>(test_decorr.size())) /
                   static_cast<double>(test_corr.size() + test_decorr.size());
  return r;
}

std::optional<double> average_precision(const std::vector<double>& scores, const std::vector<bool>& labels) {
  if (scores.size() != labels.size()) throw Error(ErrorCode::ShapeMismatch, "scores and labels differ in length");
  const auto positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), true));
  if (positives == 0) return std::nullopt;
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  double ap = 0.0;
  std::size_t tp = 0;
  for (std::size_t rank = 0; rank < idx.size(); ++rank) {
    if (!labels[idx[rank]]) continue;
    ++tp;
    ap += static_cast<double>(tp) / static_cast<double>(rank + 1);
  }
  return ap / static_cast<double>(positives);
}

VMetrics v_metrics(const Model& model, const std::vector<SceneSample>& test, const SceneConfig& scene_cfg,
                   std::uint64_t seed) {
  if (test.empty()) throw Error(ErrorCode::EmptyTestSet, "no samples for V metrics");
  // Render every single-class erasure once, then score them in batches.
  std::vector<std::vector<std::uint8_t>> erased;
  std::vector<std::map<int, std::size_t>> where(test.size());
  for (std::size_t i = 0; i < test.size(); ++i) {
    std::vector<int> cats;
    for (const auto& o : test[i].params.objects) cats.push_back(o.category);
    if (cats.size() < 2)
      throw Error(ErrorCode::NoCooccurrence, "sample " + std::to_string(i) + " has a single class");
    for (int c : cats) {
      where[i][c] = erased.size();
      erased.push_back(render(test[i].params, scene_cfg, c));
    }
  }
  std::vector<const std::vector<std::uint8_t>*> ptrs;
  ptrs.reserve(erased.size());
  for (const auto& e : erased) ptrs.push_back(&e);
  const auto pred = predict(model, ptrs);
  auto score = [&](std::size_t row, int c) { return sigmoid(pred.scores(static_cast<Eigen::Index>(row), c)); };

  VMetrics v;
  double sum_avg = 0.0, sum_min = 0.0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    CounterRng rng(seed, i);
    for (const auto& [c, row_c] : where[i]) {
      const double without_c = score(row_c, c);
      std::vector<double> vals;
      for (const auto& [o, row_o] : where[i])
        if (o != c) vals.push_back(without_c - score(row_o, c));
      sum_min += *std::max_element(vals.begin(), vals.end());
      sum_avg += vals[rng.below(vals.size())];
      ++v.pairs;
    }
  }
  v.v_avg = sum_avg / static_cast<double>(v.pairs);
  v.v_min = sum_min / static_cast<double>(v.pairs);
  return v;
}

RobustnessReport evaluate_multilabel(const Model& model, const std::vector<SceneSample>& test,
                                     const SceneConfig& scene_cfg, std::uint64_t seed) {
  if (test.empty()) throw Error(ErrorCode::EmptyTestSet, "empty multi-label test set");
  const auto pred = predict(model, test);
  RobustnessReport r;
  const int k = model.spec().classes;
  double ap_sum = 0.0;
  int ap_n = 0;
  for (int c = 0; c < k; ++c) {
    std::vector<double> s(test.size());
    std::vector<bool> y(test.size());
    for (std::size_t i = 0; i < test.size(); ++i) {
      s[i] = pred.scores(static_cast<Eigen::Index>(i), c);
      y[i] = test[i].present[static_cast<std::size_t>(c)];
    }
    if (auto ap = average_precision(s, y)) {
      ap_sum += *ap;
      ++ap_n;
    }
  }
  r.mean_ap = ap_n > 0 ? ap_sum / ap_n : 0.0;
  r.localization = localization_accuracy(pred, test, LabelMode::Multi);
  r.v = v_metrics(model, test, scene_cfg, seed);
  return r;
}

}  // namespace abkit::luab
