#pragma once

#include <optional>

#include "abkit/byproduct/types.hpp"

namespace abkit::byproduct {

// Last toggle in selectedRecord when the image ended up selected. Deselected
// images yield nothing even though their clicks are kept in the record.
std::optional<ProxyPoint> extract_final_click(const ImageNetRecord& record);

enum class IconPointRule {
  FinalAdd,      // point of the last add; later moves are ignored
  LastLivePosition,  // position after the last add or move
};

// One point per category whose icon is still placed at the end of the
// history. Categories whose last action is a remove are absent.
CategoryPoints extract_final_adds(const CocoRecord& record,
                                  IconPointRule rule = IconPointRule::FinalAdd);

// Page-frame pixel position to image-normalized coordinates. Points up to one
// pixel outside the image rectangle are clamped; anything further throws
// Error(OutsideImage).
ProxyPoint normalize_point(double page_x, double page_y, PixelPoint image_position, int image_width,
                           int image_height);

}  // namespace abkit::byproduct
