#include "abkit/service/session.hpp"

#include <array>
#include <set>

#include "abkit/byproduct/codec.hpp"
#include "abkit/byproduct/extract.hpp"
#include "abkit/error.hpp"

namespace abkit::service {

using json = nlohmann::ordered_json;
using byproduct::TracePoint;

namespace {

constexpr std::array<std::pair<EventKind, std::string_view>, 7> kKindNames = {{
    {EventKind::Open, "open"},
    {EventKind::Move, "move"},
    {EventKind::Click, "click"},
    {EventKind::Action, "action"},
    {EventKind::Category, "category"},
    {EventKind::Keyboard, "keyboard"},
    {EventKind::Submit, "submit"},
}};

bool has_point(EventKind k) {
  return k == EventKind::Move || k == EventKind::Click || k == EventKind::Action;
}

[[noreturn]] void bad(const std::string& what) {
  throw Error(ErrorCode::MalformedRecord, "event: " + what);
}

const json& need(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) bad(std::string("missing field '") + key + "'");
  return *it;
}

TracePoint to_image_frame(const Event& e, const Slot& slot) {
  const auto p = byproduct::normalize_point(e.px, e.py, slot.position, slot.width, slot.height);
  return TracePoint{p.x, p.y, e.t};
}

}  // namespace

std::string_view to_string(EventKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "open";
}

json to_json(const Event& e) {
  json j = json::object();
  j["page_idx"] = e.page_idx;
  j["t"] = e.t;
  j["kind"] = std::string(to_string(e.kind));
  if (has_point(e.kind)) {
    j["slot"] = e.slot;
    j["px"] = e.px;
    j["py"] = e.py;
  }
  if (e.kind == EventKind::Action) {
    j["action"] = std::string(byproduct::to_string(e.action));
    j["category"] = e.category;
  }
  if (e.kind == EventKind::Category) j["superclass"] = e.superclass;
  if (e.kind == EventKind::Submit) j["worker_id"] = e.worker_id;
  return j;
}

std::string canonical(const Event& event) { return to_json(event).dump(); }

Event event_from_json(const json& j, bool strict) {
  if (!j.is_object()) bad("expected object");
  Event e;
  const auto& kind = need(j, "kind");
  if (!kind.is_string()) bad("kind must be a string");
  bool found = false;
  for (const auto& [k, name] : kKindNames) {
    if (kind.get<std::string>() == name) {
      e.kind = k;
      found = true;
    }
  }
  if (!found) bad("unknown kind '" + kind.get<std::string>() + "'");

  const auto& page = need(j, "page_idx");
  const auto& t = need(j, "t");
  if (!page.is_number_integer() || !t.is_number_integer()) bad("page_idx and t must be integers");
  e.page_idx = page.get<int>();
  e.t = t.get<std::int64_t>();
  if (e.page_idx < 0) bad("negative page_idx");
  if (e.t < 0) bad("negative timestamp");

  std::set<std::string> allowed = {"page_idx", "t", "kind"};
  if (has_point(e.kind)) {
    const auto& slot = need(j, "slot");
    const auto& px = need(j, "px");
    const auto& py = need(j, "py");
    if (!slot.is_number_integer() || !px.is_number() || !py.is_number()) bad("bad point fields");
    e.slot = slot.get<int>();
    e.px = px.get<double>();
    e.py = py.get<double>();
    allowed.insert({"slot", "px", "py"});
  }
  if (e.kind == EventKind::Action) {
    const auto& action = need(j, "action");
    const auto& category = need(j, "category");
    if (!action.is_string() || !category.is_string()) bad("bad action fields");
    const auto parsed = byproduct::parse_action_type(action.get<std::string>());
    if (!parsed) bad("unknown action '" + action.get<std::string>() + "'");
    e.action = *parsed;
    e.category = category.get<std::string>();
    allowed.insert({"action", "category"});
  }
  if (e.kind == EventKind::Category) {
    const auto& sc = need(j, "superclass");
    if (!sc.is_string()) bad("superclass must be a string");
    e.superclass = sc.get<std::string>();
    allowed.insert("superclass");
  }
  if (e.kind == EventKind::Submit) {
    const auto& w = need(j, "worker_id");
    if (!w.is_string()) bad("worker_id must be a string");
    e.worker_id = w.get<std::string>();
    allowed.insert("worker_id");
  }
  if (strict) {
    for (const auto& [key, _] : j.items()) {
      if (!allowed.contains(key)) bad("unknown field '" + key + "'");
    }
  }
  return e;
}

std::vector<std::string> PageRecords::lines() const {
  std::vector<std::string> out;
  for (const auto& r : imagenet) out.push_back(byproduct::serialize(r));
  for (const auto& r : coco) out.push_back(byproduct::serialize(r));
  return out;
}

PageRecords build_page_records(const Hit& hit, int page_idx, std::span<const Event> events,
                               const RecordOptions& opts) {
  const auto& all_pages = pages(hit);
  if (page_idx < 0 || page_idx >= static_cast<int>(all_pages.size())) {
    throw Error(ErrorCode::InvalidArgument, "page " + std::to_string(page_idx) + " out of range");
  }
  const Page& page = all_pages[page_idx];

  const Event* submit = nullptr;
  for (const auto& e : events) {
    if (e.page_idx == page_idx && e.kind == EventKind::Submit) submit = &e;
  }
  if (submit == nullptr) {
    throw Error(ErrorCode::InvalidArgument, "page " + std::to_string(page_idx) + " not submitted");
  }

  PageRecords out;
  if (const auto* browsing = std::get_if<BrowsingHit>(&hit)) {
    for (const auto& slot : page.slots) {
      byproduct::ImageNetRecord r;
      r.image_id = slot.image.image_id;
      r.class_id = browsing->class_id;
      bool touched = false;
      for (const auto& e : events) {
        if (e.page_idx != page_idx || e.slot != slot.index) continue;
        if (e.kind == EventKind::Move) {
          r.mouseTracking.push_back(to_image_frame(e, slot));
          touched = true;
        } else if (e.kind == EventKind::Click) {
          r.selectedRecord.push_back(to_image_frame(e, slot));
          touched = true;
        }
      }
      if (!touched && !opts.emit_empty_records) continue;
      r.selected = r.selectedRecord.size() % 2 == 1;
      r.imagePosition = slot.position;
      r.imageWidth = slot.width;
      r.imageHeight = slot.height;
      r.worker_id = submit->worker_id;
      r.assignment_id = browsing->assignment_id;
      r.page_idx = page_idx;
      byproduct::validate(r);
      out.imagenet.push_back(std::move(r));
    }
    return out;
  }

  const auto& tagging = std::get<TaggingHit>(hit);
  const Slot& slot = page.slots.front();
  byproduct::CocoRecord r;
  try {
    r.image_id = std::stoll(slot.image.image_id);
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidArgument, "tagging image id '" + slot.image.image_id +
                                                "' is not an integer");
  }
  bool touched = false;
  for (const auto& e : events) {
    if (e.page_idx != page_idx) continue;
    switch (e.kind) {
      case EventKind::Move:
        r.mouseTracking.push_back(to_image_frame(e, slot));
        touched = true;
        break;
      case EventKind::Action:
        r.actionHistories.push_back({e.action, e.category, to_image_frame(e, slot)});
        touched = true;
        break;
      case EventKind::Category:
        r.categoryHistories.push_back({e.superclass, e.t});
        touched = true;
        break;
      case EventKind::Keyboard:
        r.usingKeyboard = true;
        touched = true;
        break;
      default:
        break;
    }
  }
  if (!touched && !opts.emit_empty_records) return out;
  r.timeSpent = submit->t;
  r.page_idx = page_idx;
  r.assignment_id = tagging.assignment_id;
  r.worker_id = submit->worker_id;
  byproduct::validate(r);
  out.coco.push_back(std::move(r));
  return out;
}

}  // namespace abkit::service
