#include "abkit/analysis/ground_truth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "abkit/error.hpp"

namespace abkit::analysis {

using json = nlohmann::ordered_json;

void validate(const GtBox& b) {
  const bool ok = b.x0 >= 0.0 && b.x0 < b.x1 && b.x1 <= 1.0 && b.y0 >= 0.0 && b.y0 < b.y1 && b.y1 <= 1.0;
  if (!ok) throw Error(ErrorCode::InvalidArgument, "box must satisfy 0<=x0<x1<=1 and 0<=y0<y1<=1");
}

bool Mask::contains(double x, double y) const {
  if (rows <= 0 || cols <= 0 || x < 0.0 || x > 1.0 || y < 0.0 || y > 1.0) return false;
  const int c = std::min(cols - 1, static_cast<int>(std::floor(x * cols)));
  const int r = std::min(rows - 1, static_cast<int>(std::floor(y * rows)));
  return bits[static_cast<std::size_t>(r) * cols + c] != 0;
}

bool Instance::covers(double x, double y) const {
  return mask ? mask->contains(x, y) : box.contains(x, y);
}

std::vector<const Instance*> ImageTruth::of_category(const std::string& category) const {
  std::vector<const Instance*> out;
  for (const auto& inst : instances) {
    if (inst.category == category) out.push_back(&inst);
  }
  return out;
}

std::vector<std::string> ImageTruth::categories() const {
  std::set<std::string> cats;
  for (const auto& inst : instances) cats.insert(inst.category);
  return {cats.begin(), cats.end()};
}

namespace {

std::string id_string(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  throw Error(ErrorCode::MalformedRecord, "image_id must be a string or integer");
}

Mask parse_mask(const json& j) {
  Mask m;
  m.rows = j.at("rows").get<int>();
  m.cols = j.at("cols").get<int>();
  const auto bits = j.at("bits").get<std::string>();
  if (m.rows <= 0 || m.cols <= 0 || bits.size() != static_cast<std::size_t>(m.rows) * m.cols) {
    throw Error(ErrorCode::MalformedRecord, "mask bits do not match rows*cols");
  }
  m.bits.reserve(bits.size());
  for (char c : bits) m.bits.push_back(c == '1' ? 1 : 0);
  return m;
}

}  // namespace

GroundTruth parse_ground_truth(std::istream& in) {
  GroundTruth gt;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      ImageTruth t;
      t.image_id = id_string(j.at("image_id"));
      t.width = j.value("width", 1);
      t.height = j.value("height", 1);
      if (t.width <= 0 || t.height <= 0) throw Error(ErrorCode::MalformedRecord, "non-positive size");
      if (j.contains("seed")) t.seed = j.at("seed").get<bool>();
      t.assignment_id = j.value("assignment_id", std::string{});
      if (j.contains("instances")) {
        for (const auto& ij : j.at("instances")) {
          Instance inst;
          inst.category = ij.at("category").get<std::string>();
          const auto& b = ij.at("box");
          inst.box = GtBox{b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>(),
                           b.at(3).get<double>()};
          validate(inst.box);
          if (ij.contains("mask")) inst.mask = parse_mask(ij.at("mask"));
          t.instances.push_back(std::move(inst));
        }
      }
      gt[t.image_id] = std::move(t);
    } catch (const Error& e) {
      throw Error(ErrorCode::MalformedRecord, "ground truth line " + std::to_string(lineno) + ": " + e.what());
    } catch (const json::exception& e) {
      throw Error(ErrorCode::MalformedRecord, "ground truth line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return gt;
}

GroundTruth load_ground_truth(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  return parse_ground_truth(in);
}

json to_json(const ImageTruth& t) {
  json j = json::object();
  j["image_id"] = t.image_id;
  j["width"] = t.width;
  j["height"] = t.height;
  if (t.seed) j["seed"] = *t.seed;
  if (!t.assignment_id.empty()) j["assignment_id"] = t.assignment_id;
  json insts = json::array();
  for (const auto& inst : t.instances) {
    json ij = json::object();
    ij["category"] = inst.category;
    ij["box"] = json::array({inst.box.x0, inst.box.y0, inst.box.x1, inst.box.y1});
    if (inst.mask) {
      std::string bits;
      for (auto b : inst.mask->bits) bits.push_back(b ? '1' : '0');
      ij["mask"] = json{{"rows", inst.mask->rows}, {"cols", inst.mask->cols}, {"bits", bits}};
    }
    insts.push_back(std::move(ij));
  }
  j["instances"] = std::move(insts);
  return j;
}

}  // namespace abkit::analysis
