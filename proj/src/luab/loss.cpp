#include "abkit/luab/loss.hpp"

#include <cmath>
#include <string>

#include "abkit/error.hpp"

namespace abkit::luab {

ScalarGrad2 smooth_l1(std::array<double, 2> u, double beta) {
  if (!(beta > 0.0)) throw Error(ErrorCode::NonPositiveBeta, "beta must be positive");
  ScalarGrad2 out;
  for (int i = 0; i < 2; ++i) {
    const double d = u[i];
    const double a = std::abs(d);
    if (a < beta) {
      out.loss += 0.5 * d * d / beta;
      out.grad[i] = d / beta;
    } else {
      out.loss += a - 0.5 * beta;
      out.grad[i] = d > 0 ? 1.0 : -1.0;
    }
  }
  return out;
}

ScalarGrad2 squared_error(std::array<double, 2> u) {
  return {0.5 * (u[0] * u[0] + u[1] * u[1]), {u[0], u[1]}};
}

namespace {

ScalarGrad2 regress(const LossConfig& cfg, std::array<double, 2> u) {
  return cfg.regression == RegressionLoss::SmoothL1 ? smooth_l1(u, cfg.beta) : squared_error(u);
}

double log_sum_exp(const Eigen::Ref<const Vec>& v) {
  const double m = v.maxCoeff();
  return m + std::log((v.array() - m).exp().sum());
}

// log(1 + exp(x)) without overflow.
double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void mismatch(const std::string& what) { throw Error(ErrorCode::ShapeMismatch, what); }

}  // namespace

LossBreakdown luab_loss(const Mat& scores, const Mat& points, std::span<const Target> targets,
                        const LossConfig& cfg) {
  const auto n = static_cast<Eigen::Index>(targets.size());
  const auto c = scores.cols();
  const bool multi = cfg.labels == LabelMode::Multi;
  if (n == 0) mismatch("empty batch");
  if (scores.rows() != n) mismatch("scores rows != batch size");
  if (points.rows() != n) mismatch("points rows != batch size");
  if (points.cols() != (multi ? 2 * c : 2)) mismatch("points cols do not match label mode");
  if (cfg.regression == RegressionLoss::SmoothL1 && !(cfg.beta > 0.0))
    throw Error(ErrorCode::NonPositiveBeta, "beta must be positive");

  LossBreakdown out;
  out.d_scores = Mat::Zero(n, c);
  out.d_points = Mat::Zero(n, points.cols());
  const double inv_n = 1.0 / static_cast<double>(n);

  for (Eigen::Index i = 0; i < n; ++i) {
    const Target& t = targets[static_cast<std::size_t>(i)];
    if (!multi) {
      if (t.label < 0 || t.label >= c) mismatch("label out of range");
      const double lse = log_sum_exp(scores.row(i).transpose());
      out.classification += (lse - scores(i, t.label)) * inv_n;
      for (Eigen::Index k = 0; k < c; ++k) out.d_scores(i, k) = std::exp(scores(i, k) - lse) * inv_n;
      out.d_scores(i, t.label) -= inv_n;
      if (t.points.size() > 1) mismatch("single-label target with several points");
      if (!t.points.empty() && t.points[0]) {
        const auto& z = *t.points[0];
        const auto r = regress(cfg, {points(i, 0) - z[0], points(i, 1) - z[1]});
        out.regression += r.loss * inv_n;
        out.d_points(i, 0) = cfg.lambda * r.grad[0] * inv_n;
        out.d_points(i, 1) = cfg.lambda * r.grad[1] * inv_n;
      }
      continue;
    }
    if (static_cast<Eigen::Index>(t.present.size()) != c) mismatch("present vector length != classes");
    if (!t.points.empty() && static_cast<Eigen::Index>(t.points.size()) != c)
      mismatch("points vector length != classes");
    for (Eigen::Index k = 0; k < c; ++k) {
      const double s = scores(i, k);
      const bool y = t.present[static_cast<std::size_t>(k)];
      out.classification += (y ? softplus(-s) : softplus(s)) * inv_n;
      out.d_scores(i, k) = (sigmoid(s) - (y ? 1.0 : 0.0)) * inv_n;
    }
    int m = 0;
    for (Eigen::Index k = 0; k < c && !t.points.empty(); ++k)
      if (t.present[static_cast<std::size_t>(k)] && t.points[static_cast<std::size_t>(k)]) ++m;
    if (m == 0) continue;
    const double w = inv_n / m;
    for (Eigen::Index k = 0; k < c; ++k) {
      const auto& z = t.points[static_cast<std::size_t>(k)];
      if (!t.present[static_cast<std::size_t>(k)] || !z) continue;
      const auto r = regress(cfg, {points(i, 2 * k) - (*z)[0], points(i, 2 * k + 1) - (*z)[1]});
      out.regression += r.loss * w;
      out.d_points(i, 2 * k) = cfg.lambda * r.grad[0] * w;
      out.d_points(i, 2 * k + 1) = cfg.lambda * r.grad[1] * w;
    }
  }
  out.total = out.classification + cfg.lambda * out.regression;
  return out;
}

double least_squares_residual(const Mat& features, const Mat& targets) {
  if (features.rows() != targets.rows() || features.rows() == 0)
    throw Error(ErrorCode::ShapeMismatch, "features and targets must have equal, non-zero rows");
  Mat a(features.rows(), features.cols() + 1);
  a << features, Vec::Ones(features.rows());
  const Mat w = a.completeOrthogonalDecomposition().solve(targets);
  return (a * w - targets).squaredNorm() / static_cast<double>(features.rows());
}

}  // namespace abkit::luab
