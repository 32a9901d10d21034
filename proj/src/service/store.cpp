#include "abkit/service/store.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <set>

#include "abkit/byproduct/anonymize.hpp"
#include "abkit/byproduct/extract.hpp"
#include "abkit/error.hpp"

namespace abkit::service {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr std::int64_t kRateWindowMs = 1000;

struct PageState {
  std::int64_t max_t = -1;
  bool submitted = false;
  std::map<std::string, bool> live_icons;
  std::map<int, std::deque<std::int64_t>> recent_moves;
};

void append_line(const fs::path& path, const std::string& line) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw Error(ErrorCode::Io, "cannot append to " + path.string());
  out << line << '\n';
}

void append_lines(const fs::path& path, const std::vector<std::string>& lines) {
  if (lines.empty()) return;
  std::ofstream out(path, std::ios::app);
  if (!out) throw Error(ErrorCode::Io, "cannot append to " + path.string());
  for (const auto& l : lines) out << l << '\n';
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::vector<std::string> lines;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

// Drops timestamps that fell out of the rate window ending at t.
void expire(std::deque<std::int64_t>& q, std::int64_t t) {
  while (!q.empty() && q.front() <= t - kRateWindowMs) q.pop_front();
}

}  // namespace

struct AnnotationService::Assignment {
  Hit hit;
  mutable std::mutex mutex;
  AssignmentState state = AssignmentState::Open;
  std::vector<Event> log;
  std::set<std::string> seen;
  // Pointer samples refused by the rate cap; resending them is a no-op.
  std::set<std::string> throttled;
  std::vector<PageState> pages;
  std::vector<int> submission_order;
  std::vector<std::string> records;
  fs::path dir;
};

AnnotationService::AnnotationService(ServiceOptions options) : options_(std::move(options)) {
  if (!options_.data_dir.empty()) {
    fs::create_directories(options_.data_dir / "hits");
    fs::create_directories(options_.data_dir / "assignments");
  }
}

AnnotationService::~AnnotationService() = default;

AnnotationService::Assignment& AnnotationService::find(const std::string& id) const {
  std::shared_lock lock(registry_mutex_);
  auto it = assignments_.find(id);
  if (it == assignments_.end()) throw Error(ErrorCode::UnknownAssignment, "'" + id + "'");
  return *it->second;
}

void AnnotationService::append_index(const json& entry) {
  if (options_.data_dir.empty()) return;
  std::lock_guard lock(index_mutex_);
  append_line(options_.data_dir / "index.jsonl", entry.dump());
}

void AnnotationService::register_hit(const Hit& hit) {
  const std::string id = assignment_id(hit);
  if (id.empty() || id.find_first_of("/\\.") != std::string::npos) {
    throw Error(ErrorCode::InvalidArgument, "invalid assignment id '" + id + "'");
  }
  {
    std::unique_lock lock(registry_mutex_);
    if (auto it = assignments_.find(id); it != assignments_.end()) {
      if (it->second->hit == hit) return;
      throw Error(ErrorCode::InvalidArgument, "assignment '" + id + "' already exists");
    }
    auto a = std::make_unique<Assignment>();
    a->hit = hit;
    a->pages.resize(pages(hit).size());
    if (!options_.data_dir.empty()) a->dir = options_.data_dir / "assignments" / id;
    assignments_.emplace(id, std::move(a));
  }
  if (!options_.data_dir.empty()) {
    const auto hit_path = options_.data_dir / "hits" / (id + ".json");
    if (!fs::exists(hit_path)) {
      std::ofstream out(hit_path);
      out << to_json(hit).dump() << '\n';
    }
    fs::create_directories(options_.data_dir / "assignments" / id);
    append_index(json{{"assignment_id", id}, {"event", "registered"}});
  }
}

void AnnotationService::load() {
  if (options_.data_dir.empty()) return;
  std::vector<fs::path> hit_files;
  for (const auto& entry : fs::directory_iterator(options_.data_dir / "hits")) {
    if (entry.path().extension() == ".json") hit_files.push_back(entry.path());
  }
  std::sort(hit_files.begin(), hit_files.end());
  for (const auto& path : hit_files) {
    std::ifstream in(path);
    const Hit hit = hit_from_json(json::parse(in));
    const std::string id = assignment_id(hit);
    {
      std::unique_lock lock(registry_mutex_);
      if (assignments_.contains(id)) continue;
      auto a = std::make_unique<Assignment>();
      a->hit = hit;
      a->pages.resize(pages(hit).size());
      a->dir = options_.data_dir / "assignments" / id;
      assignments_.emplace(id, std::move(a));
    }
    Assignment& a = find(id);
    std::lock_guard lock(a.mutex);
    for (const auto& line : read_lines(a.dir / "events.jsonl")) {
      const Event e = event_from_json(json::parse(line));
      apply(a, e, false);
    }
    a.records = read_lines(a.dir / "records.jsonl");
    for (auto& key : read_lines(a.dir / "throttled.jsonl")) a.throttled.insert(std::move(key));
  }
  for (const auto& line : read_lines(options_.data_dir / "index.jsonl")) {
    const json entry = json::parse(line);
    const auto id = entry.at("assignment_id").get<std::string>();
    const auto event = entry.at("event").get<std::string>();
    std::shared_lock lock(registry_mutex_);
    auto it = assignments_.find(id);
    if (it == assignments_.end()) continue;
    if (event == "code_issued") it->second->state = AssignmentState::CodeIssued;
    if (event == "rejected") it->second->state = AssignmentState::Rejected;
  }
}

std::vector<std::string> AnnotationService::assignment_ids() const {
  std::shared_lock lock(registry_mutex_);
  std::vector<std::string> ids;
  for (const auto& [id, _] : assignments_) ids.push_back(id);
  return ids;
}

Hit AnnotationService::hit(const std::string& id) const { return find(id).hit; }

AssignmentState AnnotationService::state(const std::string& id) const {
  Assignment& a = find(id);
  std::lock_guard lock(a.mutex);
  return a.state;
}

json AnnotationService::page_payload(const std::string& id, int page_idx) const {
  const Assignment& a = find(id);
  const auto& all = pages(a.hit);
  if (page_idx < 0 || page_idx >= static_cast<int>(all.size())) {
    throw Error(ErrorCode::InvalidArgument, "page " + std::to_string(page_idx) + " out of range");
  }
  json j = json::object();
  j["assignment_id"] = id;
  j["page_idx"] = page_idx;
  j["page_count"] = all.size();
  json slots = json::array();
  for (const auto& s : all[page_idx].slots) {
    // Seed membership is withheld from the annotator.
    slots.push_back(json{{"slot", s.index},
                         {"image_id", s.image.image_id},
                         {"url", s.image.url},
                         {"x", s.position.x},
                         {"y", s.position.y},
                         {"width", s.width},
                         {"height", s.height}});
  }
  if (const auto* b = std::get_if<BrowsingHit>(&a.hit)) {
    j["interface"] = "browsing";
    j["class_id"] = b->class_id;
    j["description"] = b->description;
    j["grid"] = json{{"columns", kGridColumns}, {"rows", kGridRows}};
    j["slots"] = std::move(slots);
  } else {
    j["interface"] = "tagging";
    j["image"] = slots.front();
  }
  return j;
}

void AnnotationService::apply(Assignment& a, const Event& e, bool persist) {
  PageState& page = a.pages.at(e.page_idx);
  page.max_t = std::max(page.max_t, e.t);
  switch (e.kind) {
    case EventKind::Move: {
      auto& q = page.recent_moves[e.slot];
      expire(q, e.t);
      q.push_back(e.t);
      break;
    }
    case EventKind::Action:
      page.live_icons[e.category] = e.action != byproduct::ActionType::Remove;
      break;
    case EventKind::Submit:
      page.submitted = true;
      a.submission_order.push_back(e.page_idx);
      break;
    default:
      break;
  }
  const std::string key = canonical(e);
  a.seen.insert(key);
  a.log.push_back(e);
  if (persist && !a.dir.empty()) append_line(a.dir / "events.jsonl", key);
}

IngestAck AnnotationService::ingest_events(const std::string& id, std::span<const Event> events) {
  Assignment& a = find(id);
  std::lock_guard lock(a.mutex);
  if (a.state != AssignmentState::Open) {
    throw Error(ErrorCode::ClosedAssignment, "'" + id + "' no longer accepts events");
  }
  const auto& all_pages = pages(a.hit);
  const bool browsing = is_browsing(a.hit);

  // Validate against overlays so a failing batch leaves no trace.
  std::map<int, std::int64_t> max_t;
  std::map<std::pair<int, std::string>, bool> live;
  std::map<std::pair<int, int>, std::deque<std::int64_t>> moves;
  std::set<std::string> batch_seen;
  std::vector<const Event*> accepted;
  std::vector<std::string> dropped;

  for (const auto& e : events) {
    if (e.kind == EventKind::Submit) {
      throw Error(ErrorCode::MalformedRecord, "submit events are created by the service");
    }
    if (e.page_idx < 0 || e.page_idx >= static_cast<int>(all_pages.size())) {
      throw Error(ErrorCode::InvalidArgument, "page " + std::to_string(e.page_idx) + " out of range");
    }
    const std::string key = canonical(e);
    if (a.seen.contains(key) || a.throttled.contains(key) || batch_seen.contains(key)) continue;

    const PageState& page = a.pages[e.page_idx];
    if (page.submitted) {
      throw Error(ErrorCode::ClosedAssignment,
                  "page " + std::to_string(e.page_idx) + " has already been submitted");
    }
    auto [mt, inserted] = max_t.try_emplace(e.page_idx, page.max_t);
    if (e.t < mt->second) {
      throw Error(ErrorCode::NonMonotoneTimestamp,
                  "event at t=" + std::to_string(e.t) + " precedes page high-water mark t=" +
                      std::to_string(mt->second));
    }

    const bool pointed = e.kind == EventKind::Move || e.kind == EventKind::Click ||
                         e.kind == EventKind::Action;
    if (pointed) {
      const auto& slots = all_pages[e.page_idx].slots;
      const int slot_count = static_cast<int>(slots.size());
      if (e.slot < 0 || e.slot >= slot_count) {
        throw Error(ErrorCode::InvalidArgument, "slot " + std::to_string(e.slot) + " out of range");
      }
      const Slot& s = slots[e.slot];
      byproduct::normalize_point(e.px, e.py, s.position, s.width, s.height);
    }
    if (browsing && (e.kind == EventKind::Action || e.kind == EventKind::Category ||
                     e.kind == EventKind::Keyboard)) {
      throw Error(ErrorCode::MalformedRecord, "tagging event sent to a browsing HIT");
    }
    if (!browsing && e.kind == EventKind::Click) {
      throw Error(ErrorCode::MalformedRecord, "click event sent to a tagging HIT");
    }

    if (e.kind == EventKind::Move) {
      auto it = moves.find({e.page_idx, e.slot});
      if (it == moves.end()) {
        std::deque<std::int64_t> q;
        if (auto src = page.recent_moves.find(e.slot); src != page.recent_moves.end()) q = src->second;
        it = moves.emplace(std::pair{e.page_idx, e.slot}, std::move(q)).first;
      }
      expire(it->second, e.t);
      if (static_cast<int>(it->second.size()) >= options_.max_moves_per_second) {
        mt->second = e.t;
        batch_seen.insert(key);
        dropped.push_back(key);
        continue;
      }
      it->second.push_back(e.t);
    }

    if (e.kind == EventKind::Action) {
      auto it = live.find({e.page_idx, e.category});
      if (it == live.end()) {
        bool current = false;
        if (auto src = page.live_icons.find(e.category); src != page.live_icons.end()) {
          current = src->second;
        }
        it = live.emplace(std::pair{e.page_idx, e.category}, current).first;
      }
      const auto action = std::string(byproduct::to_string(e.action));
      if (e.action == byproduct::ActionType::Add && it->second) {
        throw RecordError(ErrorCode::InvariantViolation, "actionHistories",
                          "add of '" + e.category + "' while its icon is already placed");
      }
      if (e.action != byproduct::ActionType::Add && !it->second) {
        throw RecordError(ErrorCode::InvariantViolation, "actionHistories",
                          action + " of '" + e.category + "' without a placed icon");
      }
      it->second = e.action != byproduct::ActionType::Remove;
    }

    mt->second = e.t;
    batch_seen.insert(key);
    accepted.push_back(&e);
  }

  for (const Event* e : accepted) apply(a, *e, true);
  for (const auto& [page_idx, t] : max_t) {
    a.pages[page_idx].max_t = std::max(a.pages[page_idx].max_t, t);
  }
  for (auto& key : dropped) {
    if (!a.dir.empty()) append_line(a.dir / "throttled.jsonl", key);
    a.throttled.insert(std::move(key));
  }
  return IngestAck{accepted.size(), a.log.size()};
}

PageRecords AnnotationService::finalize_page(const std::string& id, int page_idx,
                                             const Submission& submission) {
  Assignment& a = find(id);
  std::lock_guard lock(a.mutex);
  if (a.state != AssignmentState::Open) {
    throw Error(ErrorCode::ClosedAssignment, "'" + id + "' no longer accepts submissions");
  }
  if (page_idx < 0 || page_idx >= static_cast<int>(a.pages.size())) {
    throw Error(ErrorCode::InvalidArgument, "page " + std::to_string(page_idx) + " out of range");
  }
  PageState& page = a.pages[page_idx];
  if (page.submitted) {
    throw Error(ErrorCode::PageAlreadySubmitted, "page " + std::to_string(page_idx));
  }
  if (submission.t < page.max_t) {
    throw Error(ErrorCode::NonMonotoneTimestamp, "submission precedes the page's last event");
  }

  Event submit;
  submit.page_idx = page_idx;
  submit.t = submission.t;
  submit.kind = EventKind::Submit;
  submit.worker_id = byproduct::anonymize_worker_id(options_.secret, submission.raw_worker_id);

  std::vector<Event> page_events;
  for (const auto& e : a.log) {
    if (e.page_idx == page_idx) page_events.push_back(e);
  }
  page_events.push_back(submit);
  PageRecords built = build_page_records(a.hit, page_idx, page_events, options_.records);

  apply(a, submit, true);
  const auto lines = built.lines();
  a.records.insert(a.records.end(), lines.begin(), lines.end());
  if (!a.dir.empty()) append_lines(a.dir / "records.jsonl", lines);
  append_index(json{{"assignment_id", id}, {"event", "page_submitted"}, {"page_idx", page_idx}});
  return built;
}

std::string completion_code(const std::string& secret, const std::string& id) {
  std::string code = byproduct::hmac_sha256_hex(secret, "completion:" + id).substr(0, 16);
  std::transform(code.begin(), code.end(), code.begin(), [](unsigned char c) {
    return static_cast<char>(std::toupper(c));
  });
  return code;
}

bool completion_code_valid(const std::string& secret, const std::string& id, const std::string& code) {
  return byproduct::secure_equals(completion_code(secret, id), code);
}

std::string AnnotationService::code_for(const std::string& id) const { return completion_code(options_.secret, id); }

std::string AnnotationService::issue_completion_code(const std::string& id) {
  Assignment& a = find(id);
  {
    std::lock_guard lock(a.mutex);
    if (a.submission_order.empty()) {
      throw Error(ErrorCode::NoPagesSubmitted, "'" + id + "' has no submitted page");
    }
    if (a.state == AssignmentState::Rejected) {
      throw Error(ErrorCode::ClosedAssignment, "'" + id + "' was rejected");
    }
    if (a.state == AssignmentState::Open) {
      a.state = AssignmentState::CodeIssued;
      append_index(json{{"assignment_id", id}, {"event", "code_issued"}});
    }
  }
  return code_for(id);
}

bool AnnotationService::verify_completion_code(const std::string& id, const std::string& code) const {
  find(id);
  return byproduct::secure_equals(code_for(id), code);
}

void AnnotationService::mark_rejected(const std::string& id) {
  Assignment& a = find(id);
  std::lock_guard lock(a.mutex);
  if (a.state == AssignmentState::Rejected) return;
  a.state = AssignmentState::Rejected;
  append_index(json{{"assignment_id", id}, {"event", "rejected"}});
}

std::vector<Event> AnnotationService::event_log(const std::string& id) const {
  const Assignment& a = find(id);
  std::lock_guard lock(a.mutex);
  return a.log;
}

std::vector<int> AnnotationService::submitted_pages(const std::string& id) const {
  const Assignment& a = find(id);
  std::lock_guard lock(a.mutex);
  return a.submission_order;
}

std::vector<std::string> AnnotationService::records(const std::string& id) const {
  const Assignment& a = find(id);
  std::lock_guard lock(a.mutex);
  return a.records;
}

std::vector<std::string> AnnotationService::replay_records(const std::string& id) const {
  const Assignment& a = find(id);
  std::lock_guard lock(a.mutex);
  std::vector<std::string> out;
  for (int page_idx : a.submission_order) {
    std::vector<Event> page_events;
    for (const auto& e : a.log) {
      if (e.page_idx == page_idx) page_events.push_back(e);
    }
    const auto lines = build_page_records(a.hit, page_idx, page_events, options_.records).lines();
    out.insert(out.end(), lines.begin(), lines.end());
  }
  return out;
}

}  // namespace abkit::service
