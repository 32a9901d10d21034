#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "abkit/luab/layers.hpp"

namespace abkit::luab {

enum class Layout { CenterBiased, Uniform };

std::string_view to_string(Layout l);

struct Box {
  double x0 = 0, y0 = 0, x1 = 1, y1 = 1;
  bool contains(double x, double y) const { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
  double area() const { return (x1 - x0) * (y1 - y0); }
};

struct SceneObject {
  int category = 0;
  double cx = 0, cy = 0, radius = 0;  // pixels
  std::array<double, 3> colour{};
};

// Everything needed to re-render a scene, so objects can be erased later.
struct SceneParams {
  int bg_kind = 0;
  double bg_phase = 0;
  std::array<double, 3> bg_tint{};
  std::uint64_t noise_key = 0;
  std::vector<SceneObject> objects;
};

struct SceneSample {
  std::vector<std::uint8_t> image;  // H x W x 3, row-major, channel fastest
  int label = 0;                    // single-label class
  std::vector<bool> present;        // multi-label classes
  std::array<double, 2> gt_point{};  // centroid of the labelled object
  Box gt_box;
  std::vector<std::optional<std::array<double, 2>>> class_points;  // per class, multi-label
  std::vector<std::optional<Box>> class_boxes;
  int bg_kind = 0;
  bool correlated = false;
  // Simulated annotation byproduct: the final click on the object (single
  // label) or the final icon placement per present class (multi-label).
  std::vector<std::optional<std::array<double, 2>>> byproduct;
  SceneParams params;
};

struct SceneConfig {
  int size = 32;
  int classes = 8;
  Layout layout = Layout::Uniform;
  double click_noise = 0.12;  // std of simulated clicks, in units of box size
  double colour_jitter = 0.1;
  double pixel_noise = 0.03;
  double radius_min = 5.0;
  double radius_max = 8.0;
};

// Paired background kind of a class; backgrounds are indexed like classes.
inline int paired_background(int category) { return category; }

// Single-label scene: one object of class y on a background that equals the
// class-paired kind with probability rho and is uniform over the other kinds
// otherwise. rho = 1/K makes background independent of class.
SceneSample generate_scene(std::uint64_t seed, std::uint64_t index, double rho, const SceneConfig& cfg);

// Multi-label scene with three objects: a primary class, its co-occurrence
// partner (class ^ 1) with probability co_rate or else another random class,
// and one further random class. Background kind is uniform.
SceneSample generate_multilabel_scene(std::uint64_t seed, std::uint64_t index, double co_rate,
                                      const SceneConfig& cfg);

// Pixels of a scene with the objects of `erase` filled by background.
std::vector<std::uint8_t> render(const SceneParams& p, const SceneConfig& cfg,
                                 std::optional<int> erase = std::nullopt);

std::vector<SceneSample> generate_dataset(std::uint64_t seed, std::size_t n, double rho,
                                          const SceneConfig& cfg);
std::vector<SceneSample> generate_multilabel_dataset(std::uint64_t seed, std::size_t n, double co_rate,
                                                     const SceneConfig& cfg);

// Batch tensor with pixel values scaled to [0, 1].
Tensor to_tensor(const std::vector<const std::vector<std::uint8_t>*>& images, int size);

// Mask of the object shape for class `category` at pixel centre (px, py).
bool shape_contains(int category, double dx, double dy, double r);

}  // namespace abkit::luab
