#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace abkit::luab {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

struct ScalarGrad2 {
  double loss = 0.0;
  std::array<double, 2> grad{};
};

// Huber-style loss summed over the two coordinates of the residual u.
// Throws Error(NonPositiveBeta) for beta <= 0.
ScalarGrad2 smooth_l1(std::array<double, 2> u, double beta);

// Squared error 0.5 * |u|^2 summed over coordinates.
ScalarGrad2 squared_error(std::array<double, 2> u);

enum class RegressionLoss { SmoothL1, MeanSquared };
enum class LabelMode { Single, Multi };

struct LossConfig {
  double lambda = 10.0;
  RegressionLoss regression = RegressionLoss::SmoothL1;
  double beta = 1.0;
  LabelMode labels = LabelMode::Single;
};

// One target per sample. Single-label: `label` is the class index and
// `points` holds at most one proxy point. Multi-label: `present[k]` marks the
// classes in the image and `points[k]` is the proxy point for class k (only
// read where present and available).
struct Target {
  int label = 0;
  std::vector<bool> present;
  std::vector<std::optional<std::array<double, 2>>> points;
};

struct LossBreakdown {
  double total = 0.0;
  double classification = 0.0;
  double regression = 0.0;  // unweighted; total = classification + lambda * regression
  Mat d_scores;             // N x C
  Mat d_points;             // N x 2 (single) or N x 2C (multi)
};

// Batch mean of the multi-task objective: classification loss (softmax
// cross-entropy or per-class binary cross-entropy) plus lambda times the point
// regression loss. Samples without a proxy point contribute no regression
// term; in multi-label mode each sample contributes the mean over its present
// classes that carry a point. Gradients are with respect to raw scores and
// squashed point predictions. Throws Error(ShapeMismatch) on inconsistent
// shapes.
LossBreakdown luab_loss(const Mat& scores, const Mat& points, std::span<const Target> targets,
                        const LossConfig& cfg);

// Minimum over linear maps W (with bias) of mean |features W - targets|^2,
// obtained in closed form by least squares.
double least_squares_residual(const Mat& features, const Mat& targets);

}  // namespace abkit::luab
