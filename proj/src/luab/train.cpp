#include "abkit/luab/train.hpp"

#include <cmath>
#include <numeric>

#include "abkit/error.hpp"
#include "abkit/rng.hpp"

namespace abkit::luab {

std::string_view to_string(Supervision s) {
  switch (s) {
    case Supervision::Byproduct: return "byproduct";
    case Supervision::RandomPoint: return "random-point";
    case Supervision::None: return "none";
  }
  return "?";
}

std::vector<std::vector<std::optional<std::array<double, 2>>>> random_points(
    const std::vector<SceneSample>& data, std::uint64_t seed) {
  std::vector<std::vector<std::optional<std::array<double, 2>>>> out;
  out.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    CounterRng rng(seed ^ 0x72616e64ULL, i);
    auto pts = data[i].byproduct;
    for (auto& p : pts)
      if (p) p = std::array<double, 2>{rng.uniform(), rng.uniform()};
    out.push_back(std::move(pts));
  }
  return out;
}

namespace {

Target make_target(const SceneSample& s, const std::vector<std::optional<std::array<double, 2>>>& points,
                   LabelMode labels) {
  Target t;
  t.label = s.label;
  if (labels == LabelMode::Multi) t.present = s.present;
  t.points = points;
  return t;
}

}  // namespace

Predictions predict(const Model& model, const std::vector<const std::vector<std::uint8_t>*>& images,
                    int batch_size) {
  const auto& spec = model.spec();
  Predictions p;
  const auto n = static_cast<Eigen::Index>(images.size());
  p.scores = Mat(n, spec.classes);
  p.points = Mat(n, spec.point_outputs());
  for (Eigen::Index start = 0; start < n; start += batch_size) {
    const Eigen::Index len = std::min<Eigen::Index>(batch_size, n - start);
    std::vector<const std::vector<std::uint8_t>*> batch(images.begin() + start, images.begin() + start + len);
    const auto c = model.forward(to_tensor(batch, spec.height));
    p.scores.middleRows(start, len) = c.scores;
    p.points.middleRows(start, len) = c.points;
  }
  return p;
}

Predictions predict(const Model& model, const std::vector<SceneSample>& data, int batch_size) {
  std::vector<const std::vector<std::uint8_t>*> imgs;
  imgs.reserve(data.size());
  for (const auto& s : data) imgs.push_back(&s.image);
  return predict(model, imgs, batch_size);
}

double localization_accuracy(const Predictions& pred, const std::vector<SceneSample>& data, LabelMode labels) {
  std::size_t hits = 0, total = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    if (labels == LabelMode::Single) {
      ++total;
      hits += data[i].gt_box.contains(pred.points(r, 0), pred.points(r, 1)) ? 1 : 0;
      continue;
    }
    for (std::size_t k = 0; k < data[i].class_boxes.size(); ++k) {
      if (!data[i].class_boxes[k]) continue;
      ++total;
      const auto kk = static_cast<Eigen::Index>(k);
      hits += data[i].class_boxes[k]->contains(pred.points(r, 2 * kk), pred.points(r, 2 * kk + 1)) ? 1 : 0;
    }
  }
  if (total == 0) throw Error(ErrorCode::EmptyTestSet, "no boxes to score");
  return static_cast<double>(hits) / static_cast<double>(total);
}

TrainResult train(const std::vector<SceneSample>& train_set, const std::vector<SceneSample>& val_set,
                  const ModelSpec& spec, const TrainConfig& cfg) {
  if (train_set.empty()) throw Error(ErrorCode::EmptyInput, "empty training set");
  if (cfg.epochs < 0 || cfg.batch_size <= 0 || !(cfg.learning_rate > 0.0))
    throw Error(ErrorCode::InvalidArgument, "epochs, batch size and learning rate must be positive");
  if (cfg.loss.lambda < 0.0) throw Error(ErrorCode::InvalidArgument, "lambda must be non-negative");

  LossConfig loss_cfg = cfg.loss;
  loss_cfg.labels = spec.labels;
  if (cfg.supervision == Supervision::None) loss_cfg.lambda = 0.0;

  std::vector<std::vector<std::optional<std::array<double, 2>>>> targets_pts;
  if (cfg.supervision == Supervision::RandomPoint) {
    targets_pts = random_points(train_set, cfg.seed);
  } else {
    targets_pts.reserve(train_set.size());
    for (const auto& s : train_set) targets_pts.push_back(s.byproduct);
  }

  TrainResult result{Model(spec, cfg.seed), {}};
  Model& model = result.model;
  Parameters velocity = model.params().zeros_like();
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  CounterRng shuffler(cfg.seed, 0x73687566ULL);

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    abkit::shuffle(order.begin(), order.end(), shuffler);
    double cls_sum = 0.0, reg_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t len = std::min(order.size() - start, static_cast<std::size_t>(cfg.batch_size));
      std::vector<const std::vector<std::uint8_t>*> imgs;
      std::vector<Target> targets;
      std::vector<std::optional<std::array<double, 2>>> guide;
      for (std::size_t j = 0; j < len; ++j) {
        const std::size_t idx = order[start + j];
        imgs.push_back(&train_set[idx].image);
        targets.push_back(make_target(train_set[idx], targets_pts[idx], spec.labels));
        guide.push_back(targets_pts[idx].empty() ? std::nullopt : targets_pts[idx][0]);
      }
      const bool guided = spec.pooling == Pooling::Attentive && cfg.supervision != Supervision::None;
      const auto cache = model.forward(to_tensor(imgs, spec.height), guided ? &guide : nullptr);
      const auto loss = luab_loss(cache.scores, cache.points, targets, loss_cfg);
      if (!std::isfinite(loss.total))
        throw Error(ErrorCode::DivergedTraining, "non-finite loss in epoch " + std::to_string(epoch));
      cls_sum += loss.classification * static_cast<double>(len);
      reg_sum += loss.regression * static_cast<double>(len);
      const Parameters grad = model.backward(cache, loss.d_scores, loss.d_points);
      velocity.scale(cfg.momentum);
      velocity.add_scaled(grad, 1.0);
      model.params().add_scaled(velocity, -cfg.learning_rate);
    }
    EpochStats st;
    st.epoch = epoch;
    st.classification_loss = cls_sum / static_cast<double>(train_set.size());
    st.regression_loss = reg_sum / static_cast<double>(train_set.size());
    if (!std::isfinite(st.classification_loss) || !std::isfinite(st.regression_loss))
      throw Error(ErrorCode::DivergedTraining, "non-finite epoch loss");
    st.val_localization = val_set.empty() ? 0.0 : localization_accuracy(predict(model, val_set), val_set, spec.labels);
    result.curves.push_back(st);
  }
  return result;
}

}  // namespace abkit::luab
