#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "abkit/byproduct/types.hpp"
#include "abkit/service/hit.hpp"

namespace abkit::service {

enum class EventKind {
  Open,      // page shown to the annotator
  Move,      // pointer sample over an image
  Click,     // selection toggle (browsing)
  Action,    // icon add/move/remove (tagging)
  Category,  // superclass opened in the category browser (tagging)
  Keyboard,  // arrow-key navigation used (tagging)
  Submit,    // page submitted; written by the service, never ingested
};

std::string_view to_string(EventKind kind);

// One UI event. Coordinates are page-frame pixels; they are converted to the
// image frame when records are built.
struct Event {
  int page_idx = 0;
  std::int64_t t = 0;
  EventKind kind = EventKind::Move;
  int slot = 0;
  double px = 0.0;
  double py = 0.0;
  byproduct::ActionType action = byproduct::ActionType::Add;
  std::string category;    // Action
  std::string superclass;  // Category
  std::string worker_id;   // Submit, already anonymized

  bool operator==(const Event&) const = default;
};

nlohmann::ordered_json to_json(const Event& event);
// Throws Error(MalformedRecord). Strict parsing rejects unknown keys.
Event event_from_json(const nlohmann::ordered_json& j, bool strict = true);

// Canonical serialization; also the payload identity used for deduplication.
std::string canonical(const Event& event);

struct RecordOptions {
  // Emit records for shown slots that received no events.
  bool emit_empty_records = false;
};

struct PageRecords {
  std::vector<byproduct::ImageNetRecord> imagenet;
  std::vector<byproduct::CocoRecord> coco;

  // Serialized records in slot order.
  std::vector<std::string> lines() const;
};

// Builds the byproduct records of one page from its events (in log order).
// The page's Submit event supplies the worker id and the submission time.
// Pure: the same hit and events always give the same records.
PageRecords build_page_records(const Hit& hit, int page_idx, std::span<const Event> page_events,
                               const RecordOptions& opts = {});

}  // namespace abkit::service
