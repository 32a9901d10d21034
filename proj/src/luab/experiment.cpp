#include "abkit/luab/experiment.hpp"

#include "abkit/error.hpp"
#include "abkit/rng.hpp"

namespace abkit::luab {

std::string_view to_string(Arm a) {
  switch (a) {
    case Arm::Luab: return "luab";
    case Arm::Rand: return "rand";
    case Arm::Baseline: return "baseline";
    case Arm::AttPool: return "attpool";
  }
  return "?";
}

Arm parse_arm(const std::string& name) {
  for (Arm a : {Arm::Luab, Arm::Rand, Arm::Baseline, Arm::AttPool})
    if (name == to_string(a)) return a;
  throw Error(ErrorCode::InvalidArgument, "unknown mode " + name);
}

ExperimentData make_experiment_data(const ExperimentConfig& cfg, std::uint64_t seed) {
  ExperimentData d;
  const auto key = [&](std::uint64_t split) { return mix64(seed * 16 + split); };
  if (cfg.labels == LabelMode::Single) {
    d.train = generate_dataset(key(1), cfg.train_size, cfg.rho, cfg.scene);
    d.val = generate_dataset(key(2), cfg.val_size, cfg.rho, cfg.scene);
    d.test_corr = generate_dataset(key(3), cfg.test_size, 1.0, cfg.scene);
    d.test_decorr = generate_dataset(key(4), cfg.test_size, 1.0 / cfg.scene.classes, cfg.scene);
  } else {
    d.train = generate_multilabel_dataset(key(1), cfg.train_size, cfg.co_rate, cfg.scene);
    d.val = generate_multilabel_dataset(key(2), cfg.val_size, cfg.co_rate, cfg.scene);
    d.test_corr = generate_multilabel_dataset(key(3), cfg.test_size, cfg.co_rate, cfg.scene);
  }
  return d;
}

ModelSpec model_spec(const ExperimentConfig& cfg) {
  ModelSpec s;
  s.height = s.width = cfg.scene.size;
  s.classes = cfg.scene.classes;
  s.labels = cfg.labels;
  s.pooling = cfg.arm == Arm::AttPool ? Pooling::Attentive : Pooling::GlobalAverage;
  return s;
}

TrainConfig train_config(const ExperimentConfig& cfg, std::uint64_t seed) {
  TrainConfig t;
  t.loss = cfg.loss;
  t.loss.labels = cfg.labels;
  t.epochs = cfg.epochs;
  t.batch_size = cfg.batch_size;
  t.learning_rate = cfg.learning_rate;
  t.seed = seed;
  switch (cfg.arm) {
    case Arm::Luab:
    case Arm::AttPool: t.supervision = Supervision::Byproduct; break;
    case Arm::Rand: t.supervision = Supervision::RandomPoint; break;
    case Arm::Baseline: t.supervision = Supervision::None; break;
  }
  return t;
}

ArmResult run_arm(const ExperimentConfig& cfg, const ExperimentData& data, std::uint64_t seed) {
  if (cfg.arm == Arm::AttPool && cfg.labels == LabelMode::Multi)
    throw Error(ErrorCode::InvalidArgument, "attentive pooling is single-label only");
  ArmResult r{train(data.train, data.val, model_spec(cfg), train_config(cfg, seed)), {}};
  r.report = cfg.labels == LabelMode::Single
                 ? evaluate_robustness(r.trained.model, data.test_corr, data.test_decorr)
                 : evaluate_multilabel(r.trained.model, data.test_corr, cfg.scene, mix64(seed ^ 0x76));
  return r;
}

}  // namespace abkit::luab
