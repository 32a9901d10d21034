#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "abkit/byproduct/types.hpp"

namespace abkit::analysis {

// Axis-aligned box in image-normalized coordinates. Closed: boundary points
// are inside.
struct GtBox {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 1.0;
  double y1 = 1.0;

  bool contains(double x, double y) const { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
  double area() const { return (x1 - x0) * (y1 - y0); }
  double center_x() const { return 0.5 * (x0 + x1); }
  double center_y() const { return 0.5 * (y0 + y1); }

  bool operator==(const GtBox&) const = default;
};

// Throws Error(InvalidArgument) unless 0 <= x0 < x1 <= 1 and 0 <= y0 < y1 <= 1.
void validate(const GtBox& box);

// Binary mask rasterized over the whole image, row-major, `rows` x `cols`.
struct Mask {
  int rows = 0;
  int cols = 0;
  std::vector<std::uint8_t> bits;

  bool contains(double x, double y) const;
};

struct Instance {
  std::string category;
  GtBox box;
  std::optional<Mask> mask;

  // Mask membership when a mask exists, box membership otherwise.
  bool covers(double x, double y) const;
};

struct ImageTruth {
  std::string image_id;
  int width = 1;
  int height = 1;
  std::optional<bool> seed;  // browsing: original-dataset image
  std::string assignment_id;  // optional scope for per-HIT truth
  std::vector<Instance> instances;

  std::vector<const Instance*> of_category(const std::string& category) const;
  std::vector<std::string> categories() const;
};

using GroundTruth = std::map<std::string, ImageTruth>;

// JSON Lines, one image per line:
//   {"image_id": "n01440764_18", "width": 500, "height": 375, "seed": true,
//    "instances": [{"category": "n01440764", "box": [x0, y0, x1, y1],
//                   "mask": {"rows": r, "cols": c, "bits": "0110..."}}]}
// Integer image ids are accepted and stored as their decimal string.
GroundTruth load_ground_truth(const std::string& path);
GroundTruth parse_ground_truth(std::istream& in);
nlohmann::ordered_json to_json(const ImageTruth& truth);

}  // namespace abkit::analysis
