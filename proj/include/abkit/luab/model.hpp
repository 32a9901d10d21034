#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "abkit/luab/layers.hpp"
#include "abkit/luab/loss.hpp"

namespace abkit::luab {

enum class Pooling { GlobalAverage, Attentive };

std::string_view to_string(Pooling p);

// Two conv3x3-ReLU-avgpool stages produce an (H/4) x (W/4) x c2 feature map
// f(X). The classifier g is linear on the pooled map; the regression head h
// is linear on the flattened map followed by a logistic squashing, with one
// 2-vector per class in multi-label mode.
struct ModelSpec {
  int height = 32;
  int width = 32;
  int channels = 3;
  int classes = 8;
  int c1 = 16;
  int c2 = 32;
  LabelMode labels = LabelMode::Single;
  Pooling pooling = Pooling::GlobalAverage;
  double bandwidth = 0.15;  // attentive pooling, normalised units

  int feature_h() const { return height / 4; }
  int feature_w() const { return width / 4; }
  int point_outputs() const { return labels == LabelMode::Multi ? 2 * classes : 2; }
};

struct Parameters {
  Mat w1, w2, wg, wh;
  Vec b1, b2, bg, bh;

  std::size_t size() const;
  // Flat views for optimisers and finite-difference checks.
  std::vector<double> flatten() const;
  void assign(const std::vector<double>& flat);
  void add_scaled(const Parameters& other, double scale);
  void scale(double s);
  Parameters zeros_like() const;
};

struct ForwardCache {
  Tensor x, a1, p1, a2, p2;
  RowMat cols1, cols2;
  Mat pooled;
  Mat scores;
  Mat point_logits;
  Mat points;
  std::vector<Mat> attention;  // per sample when attentive pooling is used
};

class Model {
 public:
  Model() = default;
  Model(const ModelSpec& spec, std::uint64_t seed);

  const ModelSpec& spec() const { return spec_; }
  Parameters& params() { return params_; }
  const Parameters& params() const { return params_; }

  // guide: optional per-sample points steering attentive pooling; ignored for
  // global-average models and treated as absent at inference.
  ForwardCache forward(const Tensor& x, const std::vector<std::optional<std::array<double, 2>>>* guide =
                                            nullptr) const;
  Parameters backward(const ForwardCache& cache, const Mat& d_scores, const Mat& d_points) const;

 private:
  ModelSpec spec_;
  Parameters params_;
};

}  // namespace abkit::luab
