#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "abkit/luab/loss.hpp"
#include "abkit/luab/model.hpp"
#include "abkit/rng.hpp"

namespace abkit::testing {

// Relative error between an analytic and a numeric derivative. The floor
// keeps coordinates with (numerically) zero gradient from dividing by noise.
inline double relative_error(double analytic, double numeric, double floor = 1e-6) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

struct GradInstance {
  luab::ModelSpec spec;
  luab::LossConfig loss;
  luab::Tensor x;
  std::vector<luab::Target> targets;
  std::vector<std::optional<std::array<double, 2>>> guide;
  std::uint64_t model_seed = 0;
};

// Small random network, batch and targets covering single/multi labels,
// both regression losses, attentive pooling and missing proxy points.
inline GradInstance random_instance(std::uint64_t k) {
  CounterRng rng(0x67726164, k);
  GradInstance g;
  g.spec.height = g.spec.width = 8;
  g.spec.channels = 2;
  g.spec.classes = 4;
  g.spec.c1 = 3;
  g.spec.c2 = 4;
  g.spec.labels = k % 3 == 2 ? luab::LabelMode::Multi : luab::LabelMode::Single;
  g.spec.pooling = (k % 3 == 1) ? luab::Pooling::Attentive : luab::Pooling::GlobalAverage;
  g.spec.bandwidth = rng.uniform(0.1, 0.5);
  g.loss.labels = g.spec.labels;
  g.loss.lambda = std::vector<double>{0.0, 1.0, 5.0, 10.0, 50.0}[rng.below(5)];
  g.loss.beta = rng.uniform(0.05, 1.0);
  g.loss.regression = rng.bernoulli(0.7) ? luab::RegressionLoss::SmoothL1 : luab::RegressionLoss::MeanSquared;
  g.model_seed = k;
  const int n = 3;
  g.x = luab::Tensor(n, 8, 8, 2);
  for (Eigen::Index i = 0; i < g.x.data.size(); ++i) g.x.data.data()[i] = rng.uniform();
  for (int s = 0; s < n; ++s) {
    luab::Target t;
    t.label = static_cast<int>(rng.below(4));
    if (g.spec.labels == luab::LabelMode::Multi) {
      t.present.assign(4, false);
      t.points.assign(4, std::nullopt);
      for (int c = 0; c < 4; ++c) {
        t.present[c] = rng.bernoulli(0.5);
        if (t.present[c] && rng.bernoulli(0.8)) t.points[c] = std::array<double, 2>{rng.uniform(), rng.uniform()};
      }
    } else if (s != 1 || rng.bernoulli(0.5)) {
      t.points = {std::array<double, 2>{rng.uniform(), rng.uniform()}};
    }
    g.targets.push_back(t);
    if (g.spec.pooling == luab::Pooling::Attentive) {
      g.guide.push_back(t.points.empty() ? std::nullopt : t.points.front());
    }
  }
  return g;
}

struct ModelGradReport {
  double max_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;  // every tried step straddled a ReLU kink
};

inline bool same_activation_pattern(const luab::ForwardCache& a, const luab::ForwardCache& b) {
  const auto pattern = [](const luab::RowMat& m) { return (m.array() > 0.0).eval(); };
  return (pattern(a.a1.data) == pattern(b.a1.data)).all() && (pattern(a.a2.data) == pattern(b.a2.data)).all();
}

// Max relative error over all parameters of d(loss)/d(theta), analytic
// (backward) against central differences. A stencil whose two ends fall in
// different ReLU activation regions measures no derivative, so the step is
// shrunk until both ends share the pattern.
inline ModelGradReport model_gradient_check(const GradInstance& g) {
  luab::Model m(g.spec, g.model_seed);
  const auto* guide = g.guide.empty() ? nullptr : &g.guide;
  const auto cache = m.forward(g.x, guide);
  const auto lb = luab::luab_loss(cache.scores, cache.points, g.targets, g.loss);
  const auto analytic = m.backward(cache, lb.d_scores, lb.d_points).flatten();
  auto theta = m.params().flatten();
  ModelGradReport rep;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double keep = theta[i];
    bool done = false;
    for (double h : {1e-5, 1e-6, 1e-7}) {
      theta[i] = keep + h;
      m.params().assign(theta);
      const auto cu = m.forward(g.x, guide);
      theta[i] = keep - h;
      m.params().assign(theta);
      const auto cd = m.forward(g.x, guide);
      if (!same_activation_pattern(cu, cd) || !same_activation_pattern(cu, cache)) continue;
      const double up = luab::luab_loss(cu.scores, cu.points, g.targets, g.loss).total;
      const double down = luab::luab_loss(cd.scores, cd.points, g.targets, g.loss).total;
      rep.max_error = std::max(rep.max_error, relative_error(analytic[i], (up - down) / (2 * h)));
      done = true;
      break;
    }
    theta[i] = keep;
    ++(done ? rep.checked : rep.skipped);
  }
  m.params().assign(theta);
  return rep;
}

// Same check for the loss alone, with respect to scores and points.
inline double loss_gradient_error(const GradInstance& g, double h = 1e-5) {
  CounterRng rng(0x6c6f7373, g.model_seed);
  const Eigen::Index n = static_cast<Eigen::Index>(g.targets.size());
  luab::Mat scores(n, g.spec.classes), points(n, g.spec.point_outputs());
  for (Eigen::Index i = 0; i < scores.size(); ++i) scores.data()[i] = rng.normal(0, 2);
  for (Eigen::Index i = 0; i < points.size(); ++i) points.data()[i] = rng.uniform(0.01, 0.99);
  const auto lb = luab::luab_loss(scores, points, g.targets, g.loss);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    auto up = scores, down = scores;
    up.data()[i] += h;
    down.data()[i] -= h;
    const double num = (luab::luab_loss(up, points, g.targets, g.loss).total -
                        luab::luab_loss(down, points, g.targets, g.loss).total) / (2 * h);
    worst = std::max(worst, relative_error(lb.d_scores.data()[i], num));
  }
  for (Eigen::Index i = 0; i < points.size(); ++i) {
    auto up = points, down = points;
    up.data()[i] += h;
    down.data()[i] -= h;
    const double num = (luab::luab_loss(scores, up, g.targets, g.loss).total -
                        luab::luab_loss(scores, down, g.targets, g.loss).total) / (2 * h);
    worst = std::max(worst, relative_error(lb.d_points.data()[i], num));
  }
  return worst;
}

}  // namespace abkit::testing
