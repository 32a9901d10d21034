#include "abkit/byproduct/extract.hpp"

#include <algorithm>
#include <string>

#include "abkit/error.hpp"

namespace abkit::byproduct {

std::optional<ProxyPoint> extract_final_click(const ImageNetRecord& record) {
  if (!record.selected || record.selectedRecord.empty()) return std::nullopt;
  const auto& last = record.selectedRecord.back();
  return ProxyPoint{last.x, last.y};
}

CategoryPoints extract_final_adds(const CocoRecord& record, IconPointRule rule) {
  CategoryPoints points;
  for (const auto& a : record.actionHistories) {
    switch (a.action) {
      case ActionType::Add:
        points[a.category] = ProxyPoint{a.point.x, a.point.y};
        break;
      case ActionType::Move:
        if (rule == IconPointRule::LastLivePosition) {
          if (auto it = points.find(a.category); it != points.end()) {
            it->second = ProxyPoint{a.point.x, a.point.y};
          }
        }
        break;
      case ActionType::Remove:
        points.erase(a.category);
        break;
    }
  }
  return points;
}

ProxyPoint normalize_point(double page_x, double page_y, PixelPoint image_position, int image_width,
                           int image_height) {
  if (image_width <= 0 || image_height <= 0) {
    throw Error(ErrorCode::InvalidArgument, "image size must be positive");
  }
  const double dx = page_x - image_position.x;
  const double dy = page_y - image_position.y;
  constexpr double kSlackPx = 1.0;
  if (dx < -kSlackPx || dy < -kSlackPx || dx > image_width + kSlackPx ||
      dy > image_height + kSlackPx) {
    throw Error(ErrorCode::OutsideImage, "point (" + std::to_string(page_x) + ", " +
                                             std::to_string(page_y) + ") is outside the image");
  }
  return ProxyPoint{std::clamp(dx / image_width, 0.0, 1.0), std::clamp(dy / image_height, 0.0, 1.0)};
}

}  // namespace abkit::byproduct
