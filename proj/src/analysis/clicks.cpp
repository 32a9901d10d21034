#include <algorithm>
#include <cmath>

#include "abkit/analysis/stats.hpp"
#include "abkit/byproduct/extract.hpp"
#include "abkit/error.hpp"
#include "abkit/rng.hpp"

namespace abkit::analysis {

namespace {

bool in_any(const std::vector<GtBox>& boxes, double x, double y) {
  return std::any_of(boxes.begin(), boxes.end(), [&](const GtBox& b) { return b.contains(x, y); });
}

std::vector<GtBox> class_boxes(const ImageTruth& truth, const std::string& category) {
  std::vector<GtBox> boxes;
  for (const auto* inst : truth.of_category(category)) boxes.push_back(inst->box);
  return boxes;
}

}  // namespace

double click_localization_accuracy(std::span<const LocatedPoint> points) {
  if (points.empty()) throw Error(ErrorCode::EmptyInput, "no points to evaluate");
  std::size_t hits = 0;
  for (const auto& p : points) hits += in_any(p.boxes, p.point.x, p.point.y) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(points.size());
}

std::vector<LocatedPoint> final_click_points(std::span<const ImageNetRecord> records,
                                             const GroundTruth& gt) {
  std::vector<LocatedPoint> out;
  for (const auto& r : records) {
    const auto click = byproduct::extract_final_click(r);
    if (!click) continue;
    auto it = gt.find(r.image_id);
    if (it == gt.end()) continue;
    auto boxes = class_boxes(it->second, r.class_id);
    if (boxes.empty()) continue;
    out.push_back({*click, std::move(boxes)});
  }
  return out;
}

double icon_placement_precision(std::span<const CocoRecord> records, const GroundTruth& gt) {
  std::size_t placed = 0;
  std::size_t correct = 0;
  for (const auto& r : records) {
    auto it = gt.find(std::to_string(r.image_id));
    if (it == gt.end()) {
      throw Error(ErrorCode::MissingGroundTruth, "image " + std::to_string(r.image_id));
    }
    for (const auto& [category, point] : byproduct::extract_final_adds(r)) {
      ++placed;
      const auto instances = it->second.of_category(category);
      const bool hit = std::any_of(instances.begin(), instances.end(),
                                   [&](const Instance* inst) { return inst->covers(point.x, point.y); });
      correct += hit ? 1 : 0;
    }
  }
  if (placed == 0) throw Error(ErrorCode::EmptyInput, "no icon placements");
  return static_cast<double>(correct) / static_cast<double>(placed);
}

std::vector<SweepPoint> gaussian_click_sweep(std::span<const SweepImage> images, const SweepConfig& cfg) {
  if (images.empty()) throw Error(ErrorCode::EmptyInput, "no images for the click sweep");
  if (cfg.samples_per_image <= 0) throw Error(ErrorCode::InvalidArgument, "samples_per_image must be positive");
  for (std::size_t s = 0; s < cfg.sigmas.size(); ++s) {
    if (!(cfg.sigmas[s] >= 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma must be non-negative");
    if (s > 0 && cfg.sigmas[s] < cfg.sigmas[s - 1]) {
      throw Error(ErrorCode::InvalidArgument, "sigmas must be sorted ascending");
    }
  }

  std::vector<SweepPoint> out;
  for (std::size_t s = 0; s < cfg.sigmas.size(); ++s) {
    const double sigma = cfg.sigmas[s];
    double total = 0.0;
    for (std::size_t i = 0; i < images.size(); ++i) {
      const auto& img = images[i];
      if (sigma == 0.0) {
        total += in_any(img.boxes, 0.5, 0.5) ? 1.0 : 0.0;
        continue;
      }
      const double short_side = std::min(img.width, img.height);
      const double sx = sigma * short_side / img.width;
      const double sy = sigma * short_side / img.height;
      CounterRng rng(cfg.seed, i * cfg.sigmas.size() + s);
      std::size_t hits = 0;
      for (int k = 0; k < cfg.samples_per_image; ++k) {
        double x = 0.0;
        double y = 0.0;
        if (std::isinf(sigma)) {
          x = rng.uniform();
          y = rng.uniform();
        } else {
          x = std::clamp(rng.normal(0.5, sx), 0.0, 1.0);
          y = std::clamp(rng.normal(0.5, sy), 0.0, 1.0);
        }
        hits += in_any(img.boxes, x, y) ? 1 : 0;
      }
      total += static_cast<double>(hits) / cfg.samples_per_image;
    }
    out.push_back({sigma, total / static_cast<double>(images.size())});
  }
  return out;
}

std::vector<SweepImage> sweep_images(const GroundTruth& gt) {
  std::vector<SweepImage> out;
  for (const auto& [id, truth] : gt) {
    if (truth.instances.empty()) continue;
    SweepImage img;
    img.width = truth.width;
    img.height = truth.height;
    for (const auto& inst : truth.instances) img.boxes.push_back(inst.box);
    out.push_back(std::move(img));
  }
  return out;
}

std::size_t RelativeHistogram::total() const {
  std::size_t sum = 0;
  for (auto c : counts) sum += c;
  return sum;
}

RelativeHistogram relative_click_histogram(std::span<const BoxedClick> clicks, int bins) {
  if (bins <= 0) throw Error(ErrorCode::InvalidArgument, "bins must be positive");
  RelativeHistogram h;
  h.bins = bins;
  h.counts.assign(static_cast<std::size_t>(h.side()) * h.side(), 0);
  auto cell = [bins](double u) {
    if (u < 0.0) return 0;
    if (u > 1.0) return bins + 1;
    return 1 + std::min(bins - 1, static_cast<int>(std::floor(u * bins)));
  };
  for (const auto& c : clicks) {
    const double w = c.box.x1 - c.box.x0;
    const double hgt = c.box.y1 - c.box.y0;
    if (!(w > 0.0) || !(hgt > 0.0)) throw Error(ErrorCode::DegenerateBox, "zero-area box");
    const int ix = cell((c.point.x - c.box.x0) / w);
    const int iy = cell((c.point.y - c.box.y0) / hgt);
    ++h.counts[static_cast<std::size_t>(iy) * h.side() + ix];
  }
  return h;
}

}  // namespace abkit::analysis
