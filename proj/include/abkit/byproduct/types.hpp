#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace abkit::byproduct {

// Position inside an image in image-normalized coordinates, stamped with
// milliseconds since the assignment started.
struct TracePoint {
  double x = 0.0;
  double y = 0.0;
  std::int64_t t = 0;

  bool operator==(const TracePoint&) const = default;
};

struct PixelPoint {
  int x = 0;
  int y = 0;

  bool operator==(const PixelPoint&) const = default;
};

// Byproducts of one image shown in the browsing (grid selection) interface.
struct ImageNetRecord {
  std::string image_id;
  std::string class_id;
  bool selected = false;
  std::vector<TracePoint> selectedRecord;
  std::vector<TracePoint> mouseTracking;
  PixelPoint imagePosition;
  int imageWidth = 0;
  int imageHeight = 0;
  std::string worker_id;
  std::string assignment_id;
  int page_idx = 0;

  // Unknown fields kept by lenient parsing; emitted after the known ones.
  nlohmann::ordered_json extra = nlohmann::ordered_json::object();

  bool operator==(const ImageNetRecord&) const = default;
};

enum class ActionType { Add, Move, Remove };

std::string_view to_string(ActionType type);
std::optional<ActionType> parse_action_type(std::string_view text);

struct IconAction {
  ActionType action = ActionType::Add;
  std::string category;
  TracePoint point;

  bool operator==(const IconAction&) const = default;
};

struct CategoryVisit {
  std::string superclass;
  std::int64_t t = 0;

  bool operator==(const CategoryVisit&) const = default;
};

// Byproducts of one image annotated in the tagging (icon placement) interface.
struct CocoRecord {
  std::int64_t image_id = 0;
  std::vector<IconAction> actionHistories;
  std::vector<TracePoint> mouseTracking;
  std::vector<CategoryVisit> categoryHistories;
  bool usingKeyboard = false;
  std::int64_t timeSpent = 0;
  int page_idx = 0;
  std::string assignment_id;
  std::string worker_id;

  nlohmann::ordered_json extra = nlohmann::ordered_json::object();

  bool operator==(const CocoRecord&) const = default;
};

// Object-location proxy in [0,1]^2.
struct ProxyPoint {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const ProxyPoint&) const = default;
};

using CategoryPoints = std::map<std::string, ProxyPoint>;

}  // namespace abkit::byproduct
