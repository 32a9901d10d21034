#include "abkit/luab/serialize.hpp"

#include <fstream>
#include <sstream>

#include "abkit/error.hpp"

namespace abkit::luab {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json to_json(const ModelSpec& s) {
  ordered_json j;
  j["height"] = s.height;
  j["width"] = s.width;
  j["channels"] = s.channels;
  j["classes"] = s.classes;
  j["c1"] = s.c1;
  j["c2"] = s.c2;
  j["labels"] = s.labels == LabelMode::Single ? "single" : "multi";
  j["pooling"] = std::string(to_string(s.pooling));
  j["bandwidth"] = s.bandwidth;
  return j;
}

ModelSpec spec_from_json(const json& j) {
  try {
    ModelSpec s;
    s.height = j.at("height").get<int>();
    s.width = j.at("width").get<int>();
    s.channels = j.at("channels").get<int>();
    s.classes = j.at("classes").get<int>();
    s.c1 = j.at("c1").get<int>();
    s.c2 = j.at("c2").get<int>();
    const auto labels = j.at("labels").get<std::string>();
    if (labels != "single" && labels != "multi") throw Error(ErrorCode::MalformedRecord, "labels: " + labels);
    s.labels = labels == "single" ? LabelMode::Single : LabelMode::Multi;
    const auto pooling = j.at("pooling").get<std::string>();
    if (pooling != "global-average" && pooling != "attentive")
      throw Error(ErrorCode::MalformedRecord, "pooling: " + pooling);
    s.pooling = pooling == "attentive" ? Pooling::Attentive : Pooling::GlobalAverage;
    s.bandwidth = j.at("bandwidth").get<double>();
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedRecord, std::string("model spec: ") + e.what());
  }
}

ordered_json to_json(const Model& model) {
  ordered_json j;
  j["spec"] = to_json(model.spec());
  j["parameters"] = model.params().flatten();
  return j;
}

Model model_from_json(const json& j) {
  try {
    Model m(spec_from_json(j.at("spec")), 0);
    m.params().assign(j.at("parameters").get<std::vector<double>>());
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedRecord, std::string("model: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ShapeMismatch) throw Error(ErrorCode::MalformedRecord, e.what());
    throw;
  }
}

void save_model(const std::filesystem::path& path, const Model& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << to_json(model).dump() << '\n';
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedRecord, path.string() + ": " + e.what());
  }
  return model_from_json(j);
}

ordered_json to_json(const RobustnessReport& r) {
  ordered_json j;
  j["acc_corr"] = r.acc_corr;
  j["acc_decorr"] = r.acc_decorr;
  j["bg_gap"] = r.bg_gap;
  j["localization"] = r.localization;
  if (r.mean_ap) j["mAP"] = *r.mean_ap;
  if (r.v) {
    j["v_avg"] = r.v->v_avg;
    j["v_min"] = r.v->v_min;
    j["v_pairs"] = r.v->pairs;
  }
  return j;
}

ordered_json to_json(const EpochStats& e) {
  ordered_json j;
  j["epoch"] = e.epoch;
  j["classification_loss"] = e.classification_loss;
  j["regression_loss"] = e.regression_loss;
  j["val_localization"] = e.val_localization;
  return j;
}

std::string curves_csv(const std::vector<EpochStats>& curves) {
  std::ostringstream out;
  out.precision(17);
  out << "epoch,classification_loss,regression_loss,val_localization\n";
  for (const auto& e : curves)
    out << e.epoch << ',' << e.classification_loss << ',' << e.regression_loss << ',' << e.val_localization << '\n';
  return out.str();
}

}  // namespace abkit::luab
