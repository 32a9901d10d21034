#pragma once

#include <Eigen/Dense>

#include "abkit/luab/loss.hpp"

namespace abkit::luab {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Batch of feature maps in NHWC order: row ((n * h + y) * w + x) holds the
// channel vector of pixel (x, y) of sample n.
struct Tensor {
  int n = 0;
  int h = 0;
  int w = 0;
  int c = 0;
  RowMat data;

  Tensor() = default;
  Tensor(int n_, int h_, int w_, int c_)
      : n(n_), h(h_), w(w_), c(c_), data(RowMat::Zero(static_cast<Eigen::Index>(n_) * h_ * w_, c_)) {}
  Eigen::Index row(int s, int y, int x) const { return (static_cast<Eigen::Index>(s) * h + y) * w + x; }
};

// 3x3 convolution, stride 1, zero padding 1. weights: (9 * in.c) x out_c,
// ordered (dy, dx, channel).
Tensor conv3x3_forward(const Tensor& in, const Mat& weights, const Vec& bias);

// Patch matrix of a 3x3 neighbourhood: one row per pixel, 9 * in.c columns.
RowMat im2col(const Tensor& in);
Tensor conv3x3_forward_cols(const RowMat& cols, const Tensor& in, const Mat& weights, const Vec& bias);

struct ConvGrads {
  Tensor d_in;
  Mat d_weights;
  Vec d_bias;
};
ConvGrads conv3x3_backward(const Tensor& in, const Mat& weights, const Tensor& d_out,
                           bool need_input_grad);
ConvGrads conv3x3_backward_cols(const RowMat& cols, const Tensor& in, const Mat& weights, const Tensor& d_out,
                                bool need_input_grad);

Tensor relu_forward(Tensor in);
// Gradient of ReLU given the forward output.
Tensor relu_backward(const Tensor& out, const Tensor& d_out);

// 2x2 average pooling with stride 2; h and w must be even.
Tensor avgpool2_forward(const Tensor& in);
Tensor avgpool2_backward(const Tensor& d_out, int in_h, int in_w);

// Global average pooling: N x C.
Mat global_avg_forward(const Tensor& in);
Tensor global_avg_backward(const Mat& d_out, int h, int w);

// Normalised isotropic Gaussian weights over an h x w grid of cell centres,
// centred at the normalised point (px, py); bandwidth is in normalised units.
// An infinite bandwidth gives uniform weights. Throws
// Error(NonPositiveBandwidth) for bandwidth <= 0.
Mat attention_weights(int h, int w, double px, double py, double bandwidth);

// Point-guided pooling of one feature map (h*w rows x C). Without a point this
// is global average pooling.
Vec attentive_pool_forward(const Mat& features, int h, int w, const double* point,
                           double bandwidth);

}  // namespace abkit::luab
