#include "abkit/luab/model.hpp"

#include <cmath>

#include "abkit/error.hpp"
#include "abkit/rng.hpp"

namespace abkit::luab {

std::string_view to_string(Pooling p) {
  return p == Pooling::GlobalAverage ? "global-average" : "attentive";
}

namespace {

template <typename F>
void for_each_block(Parameters& p, F&& f) {
  f(p.w1.data(), p.w1.size());
  f(p.b1.data(), p.b1.size());
  f(p.w2.data(), p.w2.size());
  f(p.b2.data(), p.b2.size());
  f(p.wg.data(), p.wg.size());
  f(p.bg.data(), p.bg.size());
  f(p.wh.data(), p.wh.size());
  f(p.bh.data(), p.bh.size());
}

Mat he_normal(Eigen::Index rows, Eigen::Index cols, double fan_in, CounterRng& rng) {
  Mat m(rows, cols);
  const double sd = std::sqrt(2.0 / fan_in);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.normal(0.0, sd);
  return m;
}

double logistic(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

std::size_t Parameters::size() const {
  return static_cast<std::size_t>(w1.size() + b1.size() + w2.size() + b2.size() + wg.size() + bg.size() +
                                  wh.size() + bh.size());
}

std::vector<double> Parameters::flatten() const {
  std::vector<double> out;
  out.reserve(size());
  auto& self = const_cast<Parameters&>(*this);
  for_each_block(self, [&](double* d, Eigen::Index n) { out.insert(out.end(), d, d + n); });
  return out;
}

void Parameters::assign(const std::vector<double>& flat) {
  if (flat.size() != size()) throw Error(ErrorCode::ShapeMismatch, "parameter vector length");
  std::size_t off = 0;
  for_each_block(*this, [&](double* d, Eigen::Index n) {
    std::copy(flat.begin() + static_cast<std::ptrdiff_t>(off),
              flat.begin() + static_cast<std::ptrdiff_t>(off + static_cast<std::size_t>(n)), d);
    off += static_cast<std::size_t>(n);
  });
}

void Parameters::add_scaled(const Parameters& o, double s) {
  w1 += s * o.w1;
  b1 += s * o.b1;
  w2 += s * o.w2;
  b2 += s * o.b2;
  wg += s * o.wg;
  bg += s * o.bg;
  wh += s * o.wh;
  bh += s * o.bh;
}

void Parameters::scale(double s) {
  for_each_block(*this, [&](double* d, Eigen::Index n) {
    for (Eigen::Index i = 0; i < n; ++i) d[i] *= s;
  });
}

Parameters Parameters::zeros_like() const {
  Parameters z;
  z.w1 = Mat::Zero(w1.rows(), w1.cols());
  z.b1 = Vec::Zero(b1.size());
  z.w2 = Mat::Zero(w2.rows(), w2.cols());
  z.b2 = Vec::Zero(b2.size());
  z.wg = Mat::Zero(wg.rows(), wg.cols());
  z.bg = Vec::Zero(bg.size());
  z.wh = Mat::Zero(wh.rows(), wh.cols());
  z.bh = Vec::Zero(bh.size());
  return z;
}

Model::Model(const ModelSpec& spec, std::uint64_t seed) : spec_(spec) {
  if (spec.height % 4 != 0 || spec.width % 4 != 0 || spec.height <= 0 || spec.width <= 0)
    throw Error(ErrorCode::InvalidArgument, "image sides must be positive multiples of 4");
  if (spec.classes < 2 || spec.c1 <= 0 || spec.c2 <= 0 || spec.channels <= 0)
    throw Error(ErrorCode::InvalidArgument, "model sizes must be positive (classes >= 2)");
  if (spec.pooling == Pooling::Attentive && !(spec.bandwidth > 0.0))
    throw Error(ErrorCode::NonPositiveBandwidth, "bandwidth must be positive");
  CounterRng rng(seed, 0x6d6f64656cULL);
  const int fmap = spec.feature_h() * spec.feature_w() * spec.c2;
  params_.w1 = he_normal(9 * spec.channels, spec.c1, 9.0 * spec.channels, rng);
  params_.b1 = Vec::Zero(spec.c1);
  params_.w2 = he_normal(9 * spec.c1, spec.c2, 9.0 * spec.c1, rng);
  params_.b2 = Vec::Zero(spec.c2);
  params_.wg = he_normal(spec.c2, spec.classes, spec.c2, rng) * 0.5;
  params_.bg = Vec::Zero(spec.classes);
  params_.wh = he_normal(fmap, spec.point_outputs(), fmap, rng) * 0.1;
  params_.bh = Vec::Zero(spec.point_outputs());
}

ForwardCache Model::forward(const Tensor& x,
                            const std::vector<std::optional<std::array<double, 2>>>* guide) const {
  if (x.h != spec_.height || x.w != spec_.width || x.c != spec_.channels)
    throw Error(ErrorCode::ShapeMismatch, "input does not match model spec");
  ForwardCache c;
  c.x = x;
  c.cols1 = im2col(x);
  c.a1 = relu_forward(conv3x3_forward_cols(c.cols1, x, params_.w1, params_.b1));
  c.p1 = avgpool2_forward(c.a1);
  c.cols2 = im2col(c.p1);
  c.a2 = relu_forward(conv3x3_forward_cols(c.cols2, c.p1, params_.w2, params_.b2));
  c.p2 = avgpool2_forward(c.a2);

  const int hw = c.p2.h * c.p2.w;
  const bool attend = spec_.pooling == Pooling::Attentive && guide != nullptr;
  if (attend && static_cast<int>(guide->size()) != x.n)
    throw Error(ErrorCode::ShapeMismatch, "guide points do not match batch");
  c.pooled = Mat(x.n, spec_.c2);
  for (int s = 0; s < x.n; ++s) {
    const auto fm = c.p2.data.middleRows(static_cast<Eigen::Index>(s) * hw, hw);
    if (attend && (*guide)[static_cast<std::size_t>(s)]) {
      const auto& pt = *(*guide)[static_cast<std::size_t>(s)];
      Mat w = attention_weights(c.p2.h, c.p2.w, pt[0], pt[1], spec_.bandwidth);
      Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(spec_.c2);
      for (int y = 0; y < c.p2.h; ++y)
        for (int xx = 0; xx < c.p2.w; ++xx) row += w(y, xx) * fm.row(y * c.p2.w + xx);
      c.pooled.row(s) = row;
      c.attention.push_back(std::move(w));
    } else {
      c.pooled.row(s) = fm.colwise().mean();
      c.attention.emplace_back();
    }
  }
  c.scores = (c.pooled * params_.wg).rowwise() + params_.bg.transpose();

  const Eigen::Map<const RowMat> flat(c.p2.data.data(), x.n, static_cast<Eigen::Index>(hw) * spec_.c2);
  c.point_logits = (flat * params_.wh).rowwise() + params_.bh.transpose();
  c.points = c.point_logits.unaryExpr([](double v) { return logistic(v); });
  return c;
}

Parameters Model::backward(const ForwardCache& c, const Mat& d_scores, const Mat& d_points) const {
  const int n = c.x.n;
  const int hw = c.p2.h * c.p2.w;
  Parameters g = params_.zeros_like();

  g.wg = c.pooled.transpose() * d_scores;
  g.bg = d_scores.colwise().sum().transpose();
  const Mat d_pooled = d_scores * params_.wg.transpose();

  const Mat d_logits = d_points.array() * (c.points.array() * (1.0 - c.points.array()));
  const Eigen::Map<const RowMat> flat(c.p2.data.data(), n, static_cast<Eigen::Index>(hw) * spec_.c2);
  g.wh = flat.transpose() * d_logits;
  g.bh = d_logits.colwise().sum().transpose();
  Tensor d_p2(n, c.p2.h, c.p2.w, spec_.c2);
  Eigen::Map<RowMat> d_flat(d_p2.data.data(), n, static_cast<Eigen::Index>(hw) * spec_.c2);
  d_flat.noalias() = d_logits * params_.wh.transpose();
  for (int s = 0; s < n; ++s) {
    const bool attended = c.attention[static_cast<std::size_t>(s)].size() > 0;
    for (int p = 0; p < hw; ++p) {
      const double w = attended ? c.attention[static_cast<std::size_t>(s)](p / c.p2.w, p % c.p2.w) : 1.0 / hw;
      d_p2.data.row(static_cast<Eigen::Index>(s) * hw + p) += w * d_pooled.row(s);
    }
  }

  const Tensor d_a2 = relu_backward(c.a2, avgpool2_backward(d_p2, c.a2.h, c.a2.w));
  auto g2 = conv3x3_backward_cols(c.cols2, c.p1, params_.w2, d_a2, true);
  g.w2 = std::move(g2.d_weights);
  g.b2 = std::move(g2.d_bias);
  const Tensor d_a1 = relu_backward(c.a1, avgpool2_backward(g2.d_in, c.a1.h, c.a1.w));
  auto g1 = conv3x3_backward_cols(c.cols1, c.x, params_.w1, d_a1, false);
  g.w1 = std::move(g1.d_weights);
  g.b1 = std::move(g1.d_bias);
  return g;
}

}  // namespace abkit::luab
