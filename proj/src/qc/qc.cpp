#include "abkit/qc/qc.hpp"

#include <regex>
#include <set>

#include "abkit/byproduct/extract.hpp"
#include "abkit/error.hpp"

namespace abkit::qc {

using json = nlohmann::ordered_json;

std::string_view to_string(Decision d) { return d == Decision::Accept ? "Accept" : "Reject"; }

std::string_view to_string(Reason r) {
  switch (r) {
    case Reason::LowRecall: return "LowRecall";
    case Reason::TooFewSelections: return "TooFewSelections";
    case Reason::IncompletePages: return "IncompletePages";
    case Reason::MissingRecordBadCode: return "MissingRecordBadCode";
    case Reason::LowIconAccuracy: return "LowIconAccuracy";
  }
  return "LowRecall";
}

namespace {

HitVerdict finish(std::string id, std::vector<Reason> reasons) {
  HitVerdict v;
  v.assignment_id = std::move(id);
  v.decision = reasons.empty() ? Decision::Accept : Decision::Reject;
  v.reasons = std::move(reasons);
  return v;
}

template <typename Record>
int distinct_pages(std::span<const Record> records) {
  std::set<int> pages;
  for (const auto& r : records) pages.insert(r.page_idx);
  return static_cast<int>(pages.size());
}

template <typename Record>
std::string common_assignment(std::span<const Record> records) {
  return records.empty() ? std::string{} : records.front().assignment_id;
}

}  // namespace

HitVerdict judge(const BrowsingMetrics& m, const CodeCheck& code, std::string id) {
  std::vector<Reason> reasons;
  if (m.recall < kMinRecall) reasons.push_back(Reason::LowRecall);
  if (m.selections < kMinSelections) reasons.push_back(Reason::TooFewSelections);
  if (m.pages_completed < kMinBrowsingPages) reasons.push_back(Reason::IncompletePages);
  if (!m.records_found && !code.code_valid) reasons.push_back(Reason::MissingRecordBadCode);
  return finish(std::move(id), std::move(reasons));
}

HitVerdict judge(const TaggingMetrics& m, const CodeCheck& code, std::string id) {
  std::vector<Reason> reasons;
  if (m.mean_recall < kMinRecall) reasons.push_back(Reason::LowRecall);
  if (m.icon_accuracy < kMinIconAccuracy) reasons.push_back(Reason::LowIconAccuracy);
  if (m.pages_completed < kMinTaggingPages) reasons.push_back(Reason::IncompletePages);
  if (!m.records_found && !code.code_valid) reasons.push_back(Reason::MissingRecordBadCode);
  return finish(std::move(id), std::move(reasons));
}

SeedTruth seed_truth(const service::BrowsingHit& hit) {
  SeedTruth truth;
  for (const auto& page : hit.pages) {
    for (const auto& slot : page.slots) truth[slot.image.image_id] = slot.seed;
  }
  return truth;
}

SeedTruth seed_truth(const analysis::GroundTruth& gt, const std::string& assignment_id) {
  SeedTruth truth;
  for (const auto& [id, t] : gt) {
    if (t.assignment_id == assignment_id && t.seed) truth[id] = *t.seed;
  }
  return truth;
}

BrowsingMetrics browsing_metrics(std::span<const byproduct::ImageNetRecord> records, const SeedTruth& truth) {
  BrowsingMetrics m;
  m.records_found = !records.empty();
  m.pages_completed = distinct_pages(records);
  std::size_t seeds_shown = 0;
  for (const auto& [id, seed] : truth) seeds_shown += seed ? 1 : 0;
  std::set<std::string> selected_seeds;
  for (const auto& r : records) {
    auto it = truth.find(r.image_id);
    if (it == truth.end()) throw Error(ErrorCode::MissingGroundTruth, "image '" + r.image_id + "'");
    if (!r.selected) continue;
    ++m.selections;
    if (it->second) selected_seeds.insert(r.image_id);
  }
  if (m.records_found && seeds_shown == 0) {
    throw Error(ErrorCode::MissingGroundTruth, "no seed images in the HIT's ground truth");
  }
  m.recall = seeds_shown == 0 ? 0.0 : static_cast<double>(selected_seeds.size()) / seeds_shown;
  return m;
}

TaggingMetrics tagging_metrics(std::span<const byproduct::CocoRecord> records, const analysis::GroundTruth& gt) {
  TaggingMetrics m;
  m.records_found = !records.empty();
  m.pages_completed = distinct_pages(records);
  double recall_sum = 0.0;
  std::size_t recall_pages = 0;
  std::size_t placed = 0;
  std::size_t correct = 0;
  for (const auto& r : records) {
    auto it = gt.find(std::to_string(r.image_id));
    if (it == gt.end()) {
      throw Error(ErrorCode::MissingGroundTruth, "image " + std::to_string(r.image_id));
    }
    const auto icons = byproduct::extract_final_adds(r);
    const auto categories = it->second.categories();
    if (!categories.empty()) {
      std::size_t found = 0;
      for (const auto& c : categories) found += icons.contains(c) ? 1 : 0;
      recall_sum += static_cast<double>(found) / categories.size();
      ++recall_pages;
    }
    for (const auto& [category, point] : icons) {
      ++placed;
      for (const auto* inst : it->second.of_category(category)) {
        if (inst->covers(point.x, point.y)) {
          ++correct;
          break;
        }
      }
    }
  }
  m.mean_recall = recall_pages == 0 ? 0.0 : recall_sum / recall_pages;
  m.icon_accuracy = placed == 0 ? 0.0 : static_cast<double>(correct) / placed;
  return m;
}

HitVerdict evaluate_imagenet_hit(std::span<const byproduct::ImageNetRecord> records, const SeedTruth& truth,
                                 const CodeCheck& code) {
  return judge(browsing_metrics(records, truth), code, common_assignment(records));
}

HitVerdict evaluate_coco_hit(std::span<const byproduct::CocoRecord> records, const analysis::GroundTruth& gt,
                             const CodeCheck& code) {
  return judge(tagging_metrics(records, gt), code, common_assignment(records));
}

std::string repost_id(const std::string& id) {
  static const std::regex suffix(R"((.*)-r(\d+))");
  std::smatch m;
  if (std::regex_match(id, m, suffix)) return m[1].str() + "-r" + std::to_string(std::stoi(m[2]) + 1);
  return id + "-r1";
}

std::vector<service::Hit> repost_rejected(std::span<const HitVerdict> verdicts,
                                          const std::map<std::string, service::Hit>& hits) {
  std::vector<service::Hit> fresh;
  for (const auto& v : verdicts) {
    if (v.decision != Decision::Reject) continue;
    auto it = hits.find(v.assignment_id);
    if (it == hits.end()) throw Error(ErrorCode::UnknownAssignment, "'" + v.assignment_id + "'");
    fresh.push_back(service::with_assignment_id(it->second, repost_id(v.assignment_id)));
  }
  return fresh;
}

json to_json(const HitVerdict& v) {
  json j = json::object();
  j["assignment_id"] = v.assignment_id;
  j["decision"] = std::string(to_string(v.decision));
  json reasons = json::array();
  for (auto r : v.reasons) reasons.push_back(std::string(to_string(r)));
  j["reasons"] = std::move(reasons);
  return j;
}

}  // namespace abkit::qc
