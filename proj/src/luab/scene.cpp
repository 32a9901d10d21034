#include "abkit/luab/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "abkit/error.hpp"
#include "abkit/rng.hpp"

namespace abkit::luab {

namespace {

constexpr std::array<std::array<double, 3>, 8> kBackgroundPalette{{
    {0.20, 0.30, 0.60}, {0.60, 0.20, 0.20}, {0.20, 0.55, 0.25}, {0.55, 0.50, 0.15},
    {0.45, 0.20, 0.50}, {0.15, 0.50, 0.50}, {0.50, 0.35, 0.25}, {0.35, 0.35, 0.35},
}};

constexpr std::array<std::array<double, 3>, 8> kObjectPalette{{
    {1.00, 0.90, 0.10}, {0.10, 0.90, 1.00}, {1.00, 0.30, 0.80}, {0.30, 1.00, 0.30},
    {1.00, 0.55, 0.10}, {0.60, 0.40, 1.00}, {0.95, 0.95, 0.95}, {0.05, 0.05, 0.05},
}};

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

std::array<double, 3> palette(const std::array<std::array<double, 3>, 8>& pal, int k) {
  return pal[static_cast<std::size_t>(k % 8)];
}

std::array<double, 3> object_colour(int category, double jitter, CounterRng& rng) {
  auto c = palette(kObjectPalette, category);
  for (auto& v : c) v = clamp01(v + rng.normal(0.0, jitter));
  return c;
}

double place(Layout layout, double r, int size, CounterRng& rng) {
  if (layout == Layout::Uniform) return rng.uniform(r, size - r);
  return std::clamp(rng.normal(size / 2.0, 0.12 * size), r, size - r);
}

void validate(const SceneConfig& cfg) {
  if (cfg.size < 8 || cfg.size % 4 != 0) throw Error(ErrorCode::InvalidArgument, "scene size must be a multiple of 4, >= 8");
  if (cfg.classes < 2 || cfg.classes > 8) throw Error(ErrorCode::InvalidArgument, "scene classes must be in [2, 8]");
  if (!(cfg.radius_min > 0) || cfg.radius_max < cfg.radius_min || 2 * cfg.radius_max >= cfg.size)
    throw Error(ErrorCode::InvalidArgument, "invalid object radius range");
}

struct Geometry {
  std::array<double, 2> centroid{};
  Box box;
  bool empty = true;
};

Geometry object_geometry(const SceneObject& o, int size) {
  double sx = 0, sy = 0;
  int count = 0, x0 = size, y0 = size, x1 = -1, y1 = -1;
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x)
      if (shape_contains(o.category, x + 0.5 - o.cx, y + 0.5 - o.cy, o.radius)) {
        sx += x + 0.5;
        sy += y + 0.5;
        ++count;
        x0 = std::min(x0, x);
        y0 = std::min(y0, y);
        x1 = std::max(x1, x);
        y1 = std::max(y1, y);
      }
  Geometry g;
  if (count == 0) return g;
  g.empty = false;
  g.centroid = {sx / count / size, sy / count / size};
  g.box = {static_cast<double>(x0) / size, static_cast<double>(y0) / size, static_cast<double>(x1 + 1) / size,
           static_cast<double>(y1 + 1) / size};
  return g;
}

std::array<double, 2> simulated_click(const Geometry& g, double noise, CounterRng& rng) {
  const double bw = g.box.x1 - g.box.x0;
  const double bh = g.box.y1 - g.box.y0;
  return {clamp01(g.centroid[0] + rng.normal(0.0, noise * bw)), clamp01(g.centroid[1] + rng.normal(0.0, noise * bh))};
}

SceneParams background_params(int bg_kind, CounterRng& rng) {
  SceneParams p;
  p.bg_kind = bg_kind;
  p.bg_phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  for (auto& t : p.bg_tint) t = rng.normal(0.0, 0.05);
  p.noise_key = rng();
  return p;
}

bool overlaps(const SceneObject& a, const SceneObject& b) {
  const double dx = a.cx - b.cx, dy = a.cy - b.cy;
  return std::sqrt(dx * dx + dy * dy) < a.radius + b.radius + 1.0;
}

}  // namespace

std::string_view to_string(Layout l) { return l == Layout::Uniform ? "uniform" : "center-biased"; }

bool shape_contains(int category, double dx, double dy, double r) {
  const double ax = std::abs(dx), ay = std::abs(dy);
  const double d = std::sqrt(dx * dx + dy * dy);
  switch (category % 8) {
    case 0: return d <= r;
    case 1: return std::max(ax, ay) <= 0.8 * r;
    case 2: return dy >= -r && dy <= r && ax <= (dy + r) / 2;
    case 3: return (ax <= 0.3 * r && ay <= r) || (ay <= 0.3 * r && ax <= r);
    case 4: return d <= r && d >= 0.55 * r;
    case 5: return ax + ay <= r;
    case 6: return std::abs(ax - ay) <= 0.3 * r && std::max(ax, ay) <= r;
    default:
      return (dx >= -r && dx <= -0.4 * r && ay <= r) || (dy >= 0.4 * r && dy <= r && ax <= r);
  }
}

std::vector<std::uint8_t> render(const SceneParams& p, const SceneConfig& cfg, std::optional<int> erase) {
  const int s = cfg.size;
  std::vector<std::uint8_t> img(static_cast<std::size_t>(s) * s * 3);
  const double theta = p.bg_kind * std::numbers::pi / 8.0;
  const double freq = 2.0 + (p.bg_kind % 2);
  const auto base = palette(kBackgroundPalette, p.bg_kind);
  CounterRng noise(p.noise_key, 0x6e6f697365ULL);
  for (int y = 0; y < s; ++y)
    for (int x = 0; x < s; ++x) {
      const double xs = x + 0.5, ys = y + 0.5;
      const double wave =
          0.12 * std::sin(2.0 * std::numbers::pi * freq * (xs * std::cos(theta) + ys * std::sin(theta)) / s + p.bg_phase);
      std::array<double, 3> px{};
      for (int c = 0; c < 3; ++c) px[c] = clamp01(base[c] + p.bg_tint[c] + wave);
      for (const auto& o : p.objects) {
        if (erase && o.category == *erase) continue;
        if (shape_contains(o.category, xs - o.cx, ys - o.cy, o.radius)) px = o.colour;
      }
      for (int c = 0; c < 3; ++c) {
        const double v = clamp01(px[c] + noise.normal(0.0, cfg.pixel_noise));
        img[(static_cast<std::size_t>(y) * s + x) * 3 + c] = static_cast<std::uint8_t>(std::lround(v * 255.0));
      }
    }
  return img;
}

SceneSample generate_scene(std::uint64_t seed, std::uint64_t index, double rho, const SceneConfig& cfg) {
  validate(cfg);
  if (!(rho >= 0.0 && rho <= 1.0)) throw Error(ErrorCode::InvalidArgument, "rho must be in [0, 1]");
  CounterRng rng(seed, index);
  const int k = cfg.classes;
  const int y = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
  int bg = paired_background(y);
  if (!rng.bernoulli(rho)) {
    bg = static_cast<int>(rng.below(static_cast<std::uint64_t>(k - 1)));
    if (bg >= paired_background(y)) ++bg;
  }
  SceneSample out;
  out.params = background_params(bg, rng);
  SceneObject obj;
  obj.category = y;
  obj.radius = rng.uniform(cfg.radius_min, cfg.radius_max);
  obj.cx = place(cfg.layout, obj.radius, cfg.size, rng);
  obj.cy = place(cfg.layout, obj.radius, cfg.size, rng);
  obj.colour = object_colour(y, cfg.colour_jitter, rng);
  out.params.objects.push_back(obj);
  const Geometry g = object_geometry(obj, cfg.size);

  out.label = y;
  out.present.assign(static_cast<std::size_t>(k), false);
  out.present[static_cast<std::size_t>(y)] = true;
  out.gt_point = g.centroid;
  out.gt_box = g.box;
  out.bg_kind = bg;
  out.correlated = bg == paired_background(y);
  out.byproduct = {simulated_click(g, cfg.click_noise, rng)};
  out.image = render(out.params, cfg);
  return out;
}

SceneSample generate_multilabel_scene(std::uint64_t seed, std::uint64_t index, double co_rate,
                                      const SceneConfig& cfg) {
  validate(cfg);
  if (!(co_rate >= 0.0 && co_rate <= 1.0)) throw Error(ErrorCode::InvalidArgument, "co-occurrence rate must be in [0, 1]");
  if (cfg.classes < 4 || cfg.classes % 2 != 0)
    throw Error(ErrorCode::InvalidArgument, "multi-label scenes need an even number of classes >= 4");
  CounterRng rng(seed, index);
  const int k = cfg.classes;
  const int primary = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
  const int partner = primary ^ 1;
  int second = partner;
  if (!rng.bernoulli(co_rate)) {
    do {
      second = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
    } while (second == primary || second == partner);
  }
  int third = primary;
  while (third == primary || third == second) third = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
  const int bg = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
  SceneSample out;
  out.params = background_params(bg, rng);
  out.present.assign(static_cast<std::size_t>(k), false);
  out.class_points.assign(static_cast<std::size_t>(k), std::nullopt);
  out.class_boxes.assign(static_cast<std::size_t>(k), std::nullopt);
  out.byproduct.assign(static_cast<std::size_t>(k), std::nullopt);
  for (int cat : {primary, second, third}) {
    SceneObject obj;
    obj.category = cat;
    for (int attempt = 0; attempt < 64; ++attempt) {
      obj.radius = rng.uniform(cfg.radius_min, cfg.radius_max);
      obj.cx = place(cfg.layout, obj.radius, cfg.size, rng);
      obj.cy = place(cfg.layout, obj.radius, cfg.size, rng);
      const bool clash = std::any_of(out.params.objects.begin(), out.params.objects.end(),
                                     [&](const SceneObject& o) { return overlaps(o, obj); });
      if (!clash) break;
    }
    obj.colour = object_colour(cat, cfg.colour_jitter, rng);
    out.params.objects.push_back(obj);
  }
  for (const auto& obj : out.params.objects) {
    const auto c = static_cast<std::size_t>(obj.category);
    const Geometry g = object_geometry(obj, cfg.size);
    out.present[c] = true;
    out.class_points[c] = g.centroid;
    out.class_boxes[c] = g.box;
    out.byproduct[c] = simulated_click(g, cfg.click_noise, rng);
  }
  out.label = primary;
  out.gt_point = *out.class_points[static_cast<std::size_t>(primary)];
  out.gt_box = *out.class_boxes[static_cast<std::size_t>(primary)];
  out.bg_kind = bg;
  out.correlated = second == partner;
  out.image = render(out.params, cfg);
  return out;
}

std::vector<SceneSample> generate_dataset(std::uint64_t seed, std::size_t n, double rho, const SceneConfig& cfg) {
  std::vector<SceneSample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(generate_scene(seed, i, rho, cfg));
  return out;
}

std::vector<SceneSample> generate_multilabel_dataset(std::uint64_t seed, std::size_t n, double co_rate,
                                                     const SceneConfig& cfg) {
  std::vector<SceneSample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(generate_multilabel_scene(seed, i, co_rate, cfg));
  return out;
}

Tensor to_tensor(const std::vector<const std::vector<std::uint8_t>*>& images, int size) {
  Tensor t(static_cast<int>(images.size()), size, size, 3);
  const double inv = 1.0 / 255.0;
  for (std::size_t s = 0; s < images.size(); ++s) {
    const auto& img = *images[s];
    if (img.size() != static_cast<std::size_t>(size) * size * 3)
      throw Error(ErrorCode::ShapeMismatch, "image size does not match");
    for (int p = 0; p < size * size; ++p)
      for (int c = 0; c < 3; ++c)
        t.data(static_cast<Eigen::Index>(s) * size * size + p, c) = img[static_cast<std::size_t>(p) * 3 + c] * inv;
  }
  return t;
}

}  // namespace abkit::luab
