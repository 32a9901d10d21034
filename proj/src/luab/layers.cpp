#include "abkit/luab/layers.hpp"

#include <cmath>
#include <limits>

#include "abkit/error.hpp"

namespace abkit::luab {

namespace {

Tensor col2im(const RowMat& cols, int n, int h, int w, int c);

}  // namespace

RowMat im2col(const Tensor& in) {
  const int c = in.c;
  RowMat cols = RowMat::Zero(static_cast<Eigen::Index>(in.n) * in.h * in.w, 9 * c);
  const double* src = in.data.data();
  double* dst = cols.data();
  for (int s = 0; s < in.n; ++s)
    for (int y = 0; y < in.h; ++y)
      for (int x = 0; x < in.w; ++x) {
        double* out = dst + in.row(s, y, x) * 9 * c;
        for (int dy = -1; dy <= 1; ++dy) {
          const int yy = y + dy;
          if (yy < 0 || yy >= in.h) continue;
          for (int dx = -1; dx <= 1; ++dx) {
            const int xx = x + dx;
            if (xx < 0 || xx >= in.w) continue;
            const double* p = src + in.row(s, yy, xx) * c;
            std::copy(p, p + c, out + ((dy + 1) * 3 + (dx + 1)) * c);
          }
        }
      }
  return cols;
}

namespace {

Tensor col2im(const RowMat& cols, int n, int h, int w, int c) {
  Tensor out(n, h, w, c);
  const double* src = cols.data();
  double* dst = out.data.data();
  for (int s = 0; s < n; ++s)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const double* in = src + out.row(s, y, x) * 9 * c;
        for (int dy = -1; dy <= 1; ++dy) {
          const int yy = y + dy;
          if (yy < 0 || yy >= h) continue;
          for (int dx = -1; dx <= 1; ++dx) {
            const int xx = x + dx;
            if (xx < 0 || xx >= w) continue;
            double* p = dst + out.row(s, yy, xx) * c;
            const double* q = in + ((dy + 1) * 3 + (dx + 1)) * c;
            for (int k = 0; k < c; ++k) p[k] += q[k];
          }
        }
      }
  return out;
}

}  // namespace

Tensor conv3x3_forward(const Tensor& in, const Mat& weights, const Vec& bias) {
  return conv3x3_forward_cols(im2col(in), in, weights, bias);
}

Tensor conv3x3_forward_cols(const RowMat& cols, const Tensor& in, const Mat& weights, const Vec& bias) {
  if (weights.rows() != 9 * in.c || bias.size() != weights.cols())
    throw Error(ErrorCode::ShapeMismatch, "conv weights do not match input channels");
  Tensor out(in.n, in.h, in.w, static_cast<int>(weights.cols()));
  out.data.noalias() = cols * weights;
  out.data.rowwise() += bias.transpose();
  return out;
}

ConvGrads conv3x3_backward(const Tensor& in, const Mat& weights, const Tensor& d_out,
                           bool need_input_grad) {
  return conv3x3_backward_cols(im2col(in), in, weights, d_out, need_input_grad);
}

ConvGrads conv3x3_backward_cols(const RowMat& cols, const Tensor& in, const Mat& weights, const Tensor& d_out,
                                bool need_input_grad) {
  ConvGrads g;
  g.d_weights.noalias() = cols.transpose() * d_out.data;
  g.d_bias = d_out.data.colwise().sum().transpose();
  if (need_input_grad) {
    const RowMat d_cols = d_out.data * weights.transpose();
    g.d_in = col2im(d_cols, in.n, in.h, in.w, in.c);
  }
  return g;
}

Tensor relu_forward(Tensor in) {
  in.data = in.data.cwiseMax(0.0);
  return in;
}

Tensor relu_backward(const Tensor& out, const Tensor& d_out) {
  Tensor d = d_out;
  d.data = (out.data.array() > 0.0).select(d_out.data, 0.0);
  return d;
}

Tensor avgpool2_forward(const Tensor& in) {
  if (in.h % 2 != 0 || in.w % 2 != 0) throw Error(ErrorCode::ShapeMismatch, "pooling needs even sizes");
  Tensor out(in.n, in.h / 2, in.w / 2, in.c);
  for (int s = 0; s < in.n; ++s)
    for (int y = 0; y < out.h; ++y)
      for (int x = 0; x < out.w; ++x)
        out.data.row(out.row(s, y, x)) =
            0.25 * (in.data.row(in.row(s, 2 * y, 2 * x)) + in.data.row(in.row(s, 2 * y, 2 * x + 1)) +
                    in.data.row(in.row(s, 2 * y + 1, 2 * x)) + in.data.row(in.row(s, 2 * y + 1, 2 * x + 1)));
  return out;
}

Tensor avgpool2_backward(const Tensor& d_out, int in_h, int in_w) {
  Tensor d(d_out.n, in_h, in_w, d_out.c);
  for (int s = 0; s < d.n; ++s)
    for (int y = 0; y < in_h; ++y)
      for (int x = 0; x < in_w; ++x)
        d.data.row(d.row(s, y, x)) = 0.25 * d_out.data.row(d_out.row(s, y / 2, x / 2));
  return d;
}

Mat global_avg_forward(const Tensor& in) {
  const int hw = in.h * in.w;
  Mat out(in.n, in.c);
  for (int s = 0; s < in.n; ++s)
    out.row(s) = in.data.middleRows(static_cast<Eigen::Index>(s) * hw, hw).colwise().mean();
  return out;
}

Tensor global_avg_backward(const Mat& d_out, int h, int w) {
  Tensor d(static_cast<int>(d_out.rows()), h, w, static_cast<int>(d_out.cols()));
  const int hw = h * w;
  for (int s = 0; s < d.n; ++s)
    d.data.middleRows(static_cast<Eigen::Index>(s) * hw, hw).rowwise() = d_out.row(s) / hw;
  return d;
}

Mat attention_weights(int h, int w, double px, double py, double bandwidth) {
  if (!(bandwidth > 0.0)) throw Error(ErrorCode::NonPositiveBandwidth, "bandwidth must be positive");
  Mat wts(h, w);
  if (std::isinf(bandwidth)) {
    wts.setConstant(1.0 / (h * w));
    return wts;
  }
  const double inv = 1.0 / (2.0 * bandwidth * bandwidth);
  double best = std::numeric_limits<double>::infinity();
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double dx = (x + 0.5) / w - px;
      const double dy = (y + 0.5) / h - py;
      wts(y, x) = (dx * dx + dy * dy) * inv;
      best = std::min(best, wts(y, x));
    }
  wts = (-(wts.array() - best)).exp();
  return wts / wts.sum();
}

Vec attentive_pool_forward(const Mat& features, int h, int w, const double* point,
                           double bandwidth) {
  if (features.rows() != static_cast<Eigen::Index>(h) * w)
    throw Error(ErrorCode::ShapeMismatch, "feature rows != h * w");
  if (!(bandwidth > 0.0)) throw Error(ErrorCode::NonPositiveBandwidth, "bandwidth must be positive");
  if (point == nullptr) return features.colwise().mean().transpose();
  const Mat wts = attention_weights(h, w, point[0], point[1], bandwidth);
  Vec out = Vec::Zero(features.cols());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) out += wts(y, x) * features.row(y * w + x).transpose();
  return out;
}

}  // namespace abkit::luab
