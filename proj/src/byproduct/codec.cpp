#include "abkit/byproduct/codec.hpp"

#include <array>
#include <fstream>
#include <set>

#include "abkit/error.hpp"

namespace abkit::byproduct {

using json = nlohmann::ordered_json;

namespace {

constexpr std::array kImageNetFields = {
    "image_id",  "class_id",   "selected",    "selectedRecord", "mouseTracking", "imagePosition",
    "imageWidth", "imageHeight", "worker_id", "assignment_id",  "page_idx"};

constexpr std::array kCocoFields = {
    "image_id",      "actionHistories", "mouseTracking", "categoryHistories", "usingKeyboard",
    "timeSpent",     "page_idx",        "assignment_id", "worker_id"};

[[noreturn]] void malformed(const std::string& path, const std::string& what) {
  throw RecordError(ErrorCode::MalformedRecord, path, what);
}

[[noreturn]] void violation(const std::string& path, const std::string& what) {
  throw RecordError(ErrorCode::InvariantViolation, path, what);
}

std::string join(const std::string& parent, const std::string& key) {
  return parent.empty() ? key : parent + "." + key;
}

std::string index(const std::string& parent, std::size_t i) {
  return parent + "[" + std::to_string(i) + "]";
}

const json& field(const json& obj, const char* key, const std::string& parent) {
  auto it = obj.find(key);
  if (it == obj.end()) malformed(join(parent, key), "missing field");
  return *it;
}

double as_double(const json& v, const std::string& path) {
  if (!v.is_number()) malformed(path, "expected number");
  return v.get<double>();
}

std::int64_t as_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) malformed(path, "expected integer");
  return v.get<std::int64_t>();
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) malformed(path, "expected string");
  return v.get<std::string>();
}

bool as_bool(const json& v, const std::string& path) {
  if (!v.is_boolean()) malformed(path, "expected boolean");
  return v.get<bool>();
}

const json& as_array(const json& v, const std::string& path) {
  if (!v.is_array()) malformed(path, "expected array");
  return v;
}

void check_object(const json& v, const std::string& path) {
  if (!v.is_object()) malformed(path, "expected object");
}

// Nested objects are always strict; only top-level unknown keys can be kept.
template <std::size_t N>
void check_keys(const json& obj, const std::array<const char*, N>& allowed, const std::string& path) {
  for (const auto& [key, _] : obj.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) malformed(join(path, key), "unknown field");
  }
}

TracePoint parse_trace_point(const json& v, const std::string& path) {
  check_object(v, path);
  check_keys(v, std::array{"x", "y", "t"}, path);
  TracePoint p;
  p.x = as_double(field(v, "x", path), join(path, "x"));
  p.y = as_double(field(v, "y", path), join(path, "y"));
  p.t = as_int(field(v, "t", path), join(path, "t"));
  return p;
}

std::vector<TracePoint> parse_trace(const json& v, const std::string& path) {
  std::vector<TracePoint> out;
  const auto& arr = as_array(v, path);
  out.reserve(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) out.push_back(parse_trace_point(arr[i], index(path, i)));
  return out;
}

json apply_mapping(json obj, const FieldMapping& mapping) {
  if (mapping.empty()) return obj;
  json renamed = json::object();
  for (auto& [key, value] : obj.items()) {
    auto it = mapping.find(key);
    renamed[it == mapping.end() ? key : it->second] = std::move(value);
  }
  return renamed;
}

json parse_object(std::string_view bytes, const ParseOptions& opts) {
  json obj;
  try {
    obj = json::parse(bytes.begin(), bytes.end());
  } catch (const json::parse_error& e) {
    malformed("", std::string("invalid JSON: ") + e.what());
  }
  check_object(obj, "");
  return apply_mapping(std::move(obj), opts.mapping);
}

template <std::size_t N>
json collect_extra(const json& obj, const std::array<const char*, N>& known, bool strict) {
  json extra = json::object();
  for (const auto& [key, value] : obj.items()) {
    bool is_known = false;
    for (const char* k : known) is_known = is_known || key == k;
    if (is_known) continue;
    if (strict) malformed(key, "unknown field");
    extra[key] = value;
  }
  return extra;
}

void check_point_range(const TracePoint& p, const std::string& path) {
  if (!(p.x >= 0.0 && p.x <= 1.0)) violation(join(path, "x"), "coordinate outside [0,1]");
  if (!(p.y >= 0.0 && p.y <= 1.0)) violation(join(path, "y"), "coordinate outside [0,1]");
  if (p.t < 0) violation(join(path, "t"), "negative timestamp");
}

void check_trace(const std::vector<TracePoint>& trace, const std::string& path) {
  for (std::size_t i = 0; i < trace.size(); ++i) {
    check_point_range(trace[i], index(path, i));
    if (i > 0 && trace[i].t < trace[i - 1].t) violation(index(path, i) + ".t", "timestamps decrease");
  }
}

json point_json(const TracePoint& p) {
  json j = json::object();
  j["x"] = p.x;
  j["y"] = p.y;
  j["t"] = p.t;
  return j;
}

json trace_json(const std::vector<TracePoint>& trace) {
  json arr = json::array();
  for (const auto& p : trace) arr.push_back(point_json(p));
  return arr;
}

void append_extra(json& j, const json& extra) {
  for (const auto& [key, value] : extra.items()) j[key] = value;
}

template <typename Record, typename Parse>
std::vector<Record> read_lines(std::istream& in, const ParseOptions& opts, Parse parse) {
  std::vector<Record> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse(line, opts));
    } catch (const RecordError& e) {
      throw RecordError(e.code(), "line " + std::to_string(lineno) + ":" + e.field_path(), e.detail());
    }
  }
  return out;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  return in;
}

}  // namespace

std::string_view to_string(ActionType type) {
  switch (type) {
    case ActionType::Add: return "add";
    case ActionType::Move: return "move";
    case ActionType::Remove: return "remove";
  }
  return "add";
}

std::optional<ActionType> parse_action_type(std::string_view text) {
  if (text == "add") return ActionType::Add;
  if (text == "move") return ActionType::Move;
  if (text == "remove") return ActionType::Remove;
  return std::nullopt;
}

void validate(const ImageNetRecord& r) {
  if (r.imageWidth <= 0) violation("imageWidth", "must be positive");
  if (r.imageHeight <= 0) violation("imageHeight", "must be positive");
  if (r.page_idx < 0) violation("page_idx", "must be non-negative");
  check_trace(r.selectedRecord, "selectedRecord");
  check_trace(r.mouseTracking, "mouseTracking");
  const bool odd = r.selectedRecord.size() % 2 == 1;
  if (r.selected != odd) {
    violation("selected", "parity mismatch: selected=" + std::string(r.selected ? "true" : "false") +
                              " but selectedRecord has " + std::to_string(r.selectedRecord.size()) +
                              " entries");
  }
}

void validate(const CocoRecord& r) {
  if (r.page_idx < 0) violation("page_idx", "must be non-negative");
  if (r.timeSpent < 0) violation("timeSpent", "must be non-negative");
  check_trace(r.mouseTracking, "mouseTracking");

  std::int64_t last_t = r.mouseTracking.empty() ? 0 : r.mouseTracking.back().t;
  std::map<std::string, bool> live;
  for (std::size_t i = 0; i < r.actionHistories.size(); ++i) {
    const auto& a = r.actionHistories[i];
    const std::string path = index("actionHistories", i);
    check_point_range(a.point, path + ".point");
    if (i > 0 && a.point.t < r.actionHistories[i - 1].point.t) {
      violation(path + ".point.t", "timestamps decrease");
    }
    bool& is_live = live[a.category];
    switch (a.action) {
      case ActionType::Add:
        if (is_live) violation(path, "add of '" + a.category + "' while its icon is already placed");
        is_live = true;
        break;
      case ActionType::Move:
        if (!is_live) violation(path, "move of '" + a.category + "' without a placed icon");
        break;
      case ActionType::Remove:
        if (!is_live) violation(path, "remove of '" + a.category + "' without a placed icon");
        is_live = false;
        break;
    }
  }
  if (!r.actionHistories.empty()) last_t = std::max(last_t, r.actionHistories.back().point.t);

  for (std::size_t i = 0; i < r.categoryHistories.size(); ++i) {
    const auto& c = r.categoryHistories[i];
    const std::string path = index("categoryHistories", i);
    if (c.t < 0) violation(path + ".t", "negative timestamp");
    if (i > 0 && c.t < r.categoryHistories[i - 1].t) violation(path + ".t", "timestamps decrease");
  }
  if (!r.categoryHistories.empty()) last_t = std::max(last_t, r.categoryHistories.back().t);

  if (r.timeSpent < last_t) violation("timeSpent", "earlier than the last recorded event");
}

ImageNetRecord parse_imagenet_record(std::string_view bytes, const ParseOptions& opts) {
  const json obj = parse_object(bytes, opts);
  ImageNetRecord r;
  r.image_id = as_string(field(obj, "image_id", ""), "image_id");
  r.class_id = as_string(field(obj, "class_id", ""), "class_id");
  r.selected = as_bool(field(obj, "selected", ""), "selected");
  r.selectedRecord = parse_trace(field(obj, "selectedRecord", ""), "selectedRecord");
  r.mouseTracking = parse_trace(field(obj, "mouseTracking", ""), "mouseTracking");
  const json& pos = field(obj, "imagePosition", "");
  check_object(pos, "imagePosition");
  check_keys(pos, std::array{"x", "y"}, "imagePosition");
  r.imagePosition.x = static_cast<int>(as_int(field(pos, "x", "imagePosition"), "imagePosition.x"));
  r.imagePosition.y = static_cast<int>(as_int(field(pos, "y", "imagePosition"), "imagePosition.y"));
  r.imageWidth = static_cast<int>(as_int(field(obj, "imageWidth", ""), "imageWidth"));
  r.imageHeight = static_cast<int>(as_int(field(obj, "imageHeight", ""), "imageHeight"));
  r.worker_id = as_string(field(obj, "worker_id", ""), "worker_id");
  r.assignment_id = as_string(field(obj, "assignment_id", ""), "assignment_id");
  r.page_idx = static_cast<int>(as_int(field(obj, "page_idx", ""), "page_idx"));
  r.extra = collect_extra(obj, kImageNetFields, opts.strict);
  validate(r);
  return r;
}

CocoRecord parse_coco_record(std::string_view bytes, const ParseOptions& opts) {
  const json obj = parse_object(bytes, opts);
  CocoRecord r;
  r.image_id = as_int(field(obj, "image_id", ""), "image_id");

  const auto& actions = as_array(field(obj, "actionHistories", ""), "actionHistories");
  for (std::size_t i = 0; i < actions.size(); ++i) {
    const std::string path = index("actionHistories", i);
    const json& a = actions[i];
    check_object(a, path);
    check_keys(a, std::array{"action", "category", "point"}, path);
    const std::string type = as_string(field(a, "action", path), path + ".action");
    const auto parsed = parse_action_type(type);
    if (!parsed) malformed(path + ".action", "unknown action '" + type + "'");
    IconAction act;
    act.action = *parsed;
    act.category = as_string(field(a, "category", path), path + ".category");
    act.point = parse_trace_point(field(a, "point", path), path + ".point");
    r.actionHistories.push_back(std::move(act));
  }

  r.mouseTracking = parse_trace(field(obj, "mouseTracking", ""), "mouseTracking");

  const auto& cats = as_array(field(obj, "categoryHistories", ""), "categoryHistories");
  for (std::size_t i = 0; i < cats.size(); ++i) {
    const std::string path = index("categoryHistories", i);
    check_object(cats[i], path);
    check_keys(cats[i], std::array{"superclass", "t"}, path);
    CategoryVisit v;
    v.superclass = as_string(field(cats[i], "superclass", path), path + ".superclass");
    v.t = as_int(field(cats[i], "t", path), path + ".t");
    r.categoryHistories.push_back(std::move(v));
  }

  r.usingKeyboard = as_bool(field(obj, "usingKeyboard", ""), "usingKeyboard");
  r.timeSpent = as_int(field(obj, "timeSpent", ""), "timeSpent");
  r.page_idx = static_cast<int>(as_int(field(obj, "page_idx", ""), "page_idx"));
  r.assignment_id = as_string(field(obj, "assignment_id", ""), "assignment_id");
  r.worker_id = as_string(field(obj, "worker_id", ""), "worker_id");
  r.extra = collect_extra(obj, kCocoFields, opts.strict);
  validate(r);
  return r;
}

json to_json(const TracePoint& point) { return point_json(point); }

json to_json(const ImageNetRecord& r) {
  json j = json::object();
  j["image_id"] = r.image_id;
  j["class_id"] = r.class_id;
  j["selected"] = r.selected;
  j["selectedRecord"] = trace_json(r.selectedRecord);
  j["mouseTracking"] = trace_json(r.mouseTracking);
  j["imagePosition"] = json{{"x", r.imagePosition.x}, {"y", r.imagePosition.y}};
  j["imageWidth"] = r.imageWidth;
  j["imageHeight"] = r.imageHeight;
  j["worker_id"] = r.worker_id;
  j["assignment_id"] = r.assignment_id;
  j["page_idx"] = r.page_idx;
  append_extra(j, r.extra);
  return j;
}

json to_json(const CocoRecord& r) {
  json j = json::object();
  j["image_id"] = r.image_id;
  json actions = json::array();
  for (const auto& a : r.actionHistories) {
    json aj = json::object();
    aj["action"] = std::string(to_string(a.action));
    aj["category"] = a.category;
    aj["point"] = point_json(a.point);
    actions.push_back(std::move(aj));
  }
  j["actionHistories"] = std::move(actions);
  j["mouseTracking"] = trace_json(r.mouseTracking);
  json cats = json::array();
  for (const auto& c : r.categoryHistories) {
    json cj = json::object();
    cj["superclass"] = c.superclass;
    cj["t"] = c.t;
    cats.push_back(std::move(cj));
  }
  j["categoryHistories"] = std::move(cats);
  j["usingKeyboard"] = r.usingKeyboard;
  j["timeSpent"] = r.timeSpent;
  j["page_idx"] = r.page_idx;
  j["assignment_id"] = r.assignment_id;
  j["worker_id"] = r.worker_id;
  append_extra(j, r.extra);
  return j;
}

std::string serialize(const ImageNetRecord& record) { return to_json(record).dump(); }
std::string serialize(const CocoRecord& record) { return to_json(record).dump(); }

std::vector<ImageNetRecord> read_imagenet_jsonl(std::istream& in, const ParseOptions& opts) {
  return read_lines<ImageNetRecord>(in, opts, [](std::string_view l, const ParseOptions& o) {
    return parse_imagenet_record(l, o);
  });
}

std::vector<CocoRecord> read_coco_jsonl(std::istream& in, const ParseOptions& opts) {
  return read_lines<CocoRecord>(in, opts, [](std::string_view l, const ParseOptions& o) {
    return parse_coco_record(l, o);
  });
}

std::vector<ImageNetRecord> load_imagenet_jsonl(const std::string& path, const ParseOptions& opts) {
  auto in = open_input(path);
  return read_imagenet_jsonl(in, opts);
}

std::vector<CocoRecord> load_coco_jsonl(const std::string& path, const ParseOptions& opts) {
  auto in = open_input(path);
  return read_coco_jsonl(in, opts);
}

}  // namespace abkit::byproduct
