#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "abkit/service/hit.hpp"
#include "abkit/service/session.hpp"

namespace abkit::service {

struct ServiceOptions {
  // Empty path keeps everything in memory.
  std::filesystem::path data_dir;
  // Key for worker-id anonymization and completion codes.
  std::string secret = "abkit-dev-secret";
  bool strict = true;
  RecordOptions records;
  // Pointer samples accepted per image slot in any one-second window.
  int max_moves_per_second = 60;
};

enum class AssignmentState { Open, CodeIssued, Rejected };

struct IngestAck {
  std::size_t accepted = 0;        // new events appended by this call
  std::size_t high_water_mark = 0; // total events accepted for the assignment
};

struct Submission {
  std::int64_t t = 0;
  std::string raw_worker_id;
};

// Completion code of an assignment: keyed hash of its id, so any holder of
// the secret can check codes without the service state.
std::string completion_code(const std::string& secret, const std::string& assignment_id);
bool completion_code_valid(const std::string& secret, const std::string& assignment_id, const std::string& code);

// Serves HITs, ingests UI events append-only and finalizes pages into
// byproduct records. Thread-safe: each assignment has its own writer lock.
class AnnotationService {
 public:
  explicit AnnotationService(ServiceOptions options = {});
  ~AnnotationService();

  AnnotationService(const AnnotationService&) = delete;
  AnnotationService& operator=(const AnnotationService&) = delete;

  // Registers a new open assignment. Re-registering the same id with identical
  // content is a no-op; different content throws Error(InvalidArgument).
  void register_hit(const Hit& hit);

  // Loads every HIT and event log found under data_dir, restoring state.
  void load();

  std::vector<std::string> assignment_ids() const;
  Hit hit(const std::string& assignment_id) const;
  AssignmentState state(const std::string& assignment_id) const;

  // Task payload for the UI.
  nlohmann::ordered_json page_payload(const std::string& assignment_id, int page_idx) const;

  // Appends the batch atomically: either every new event is validated and
  // appended or none is. Duplicates of logged events are dropped, as are
  // pointer samples over the per-slot rate cap.
  IngestAck ingest_events(const std::string& assignment_id, std::span<const Event> events);

  // Closes the page and persists its records.
  PageRecords finalize_page(const std::string& assignment_id, int page_idx,
                            const Submission& submission);

  std::string issue_completion_code(const std::string& assignment_id);
  bool verify_completion_code(const std::string& assignment_id, const std::string& code) const;

  // Moves a rejected assignment out of circulation; it no longer accepts events.
  void mark_rejected(const std::string& assignment_id);

  std::vector<Event> event_log(const std::string& assignment_id) const;
  std::vector<int> submitted_pages(const std::string& assignment_id) const;
  // All finalized records for the assignment, serialized, in submission order.
  std::vector<std::string> records(const std::string& assignment_id) const;

  // Recomputes every finalized page from the event log alone.
  std::vector<std::string> replay_records(const std::string& assignment_id) const;

  const ServiceOptions& options() const { return options_; }

 private:
  struct Assignment;

  Assignment& find(const std::string& assignment_id) const;
  void append_index(const nlohmann::ordered_json& entry);
  void apply(Assignment& a, const Event& e, bool persist);
  std::string code_for(const std::string& assignment_id) const;

  ServiceOptions options_;
  mutable std::shared_mutex registry_mutex_;
  std::map<std::string, std::unique_ptr<Assignment>> assignments_;
  std::mutex index_mutex_;
};

}  // namespace abkit::service
