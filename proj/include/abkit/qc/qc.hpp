#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "abkit/analysis/ground_truth.hpp"
#include "abkit/byproduct/types.hpp"
#include "abkit/service/hit.hpp"

namespace abkit::qc {

// Rejection thresholds. A HIT is rejected when a metric is strictly below its
// threshold; equality passes.
inline constexpr double kMinRecall = 0.333;
inline constexpr int kMinSelections = 30;
inline constexpr int kMinBrowsingPages = 9;   // of 10
inline constexpr double kMinIconAccuracy = 0.75;
inline constexpr int kMinTaggingPages = 16;   // of 20

enum class Decision { Accept, Reject };

enum class Reason { LowRecall, TooFewSelections, IncompletePages, MissingRecordBadCode, LowIconAccuracy };

std::string_view to_string(Decision d);
std::string_view to_string(Reason r);

struct HitVerdict {
  std::string assignment_id;
  Decision decision = Decision::Accept;
  std::vector<Reason> reasons;

  bool operator==(const HitVerdict&) const = default;
};

struct CodeCheck {
  bool code_valid = true;
};

struct BrowsingMetrics {
  double recall = 0.0;     // selected seed images / seed images shown
  int selections = 0;
  int pages_completed = 0;
  bool records_found = true;
};

struct TaggingMetrics {
  double mean_recall = 0.0;    // per page, then averaged over pages
  double icon_accuracy = 0.0;  // final placements on the category's mask
  int pages_completed = 0;
  bool records_found = true;
};

// Threshold rules on precomputed metrics.
HitVerdict judge(const BrowsingMetrics& m, const CodeCheck& code, std::string assignment_id = {});
HitVerdict judge(const TaggingMetrics& m, const CodeCheck& code, std::string assignment_id = {});

// Ground truth for one browsing HIT: every image shown, with seed membership.
using SeedTruth = std::map<std::string, bool>;

SeedTruth seed_truth(const service::BrowsingHit& hit);
// Images of `gt` scoped to the assignment (via their assignment_id field).
SeedTruth seed_truth(const analysis::GroundTruth& gt, const std::string& assignment_id);

// Throws Error(MissingGroundTruth) when a record's image is not covered.
BrowsingMetrics browsing_metrics(std::span<const byproduct::ImageNetRecord> records, const SeedTruth& truth);
TaggingMetrics tagging_metrics(std::span<const byproduct::CocoRecord> records, const analysis::GroundTruth& gt);

HitVerdict evaluate_imagenet_hit(std::span<const byproduct::ImageNetRecord> records, const SeedTruth& truth,
                                 const CodeCheck& code);
HitVerdict evaluate_coco_hit(std::span<const byproduct::CocoRecord> records, const analysis::GroundTruth& gt,
                             const CodeCheck& code);

// Next id in the repost chain: "a" -> "a-r1" -> "a-r2".
std::string repost_id(const std::string& assignment_id);

// Fresh HITs with identical pages for every rejected verdict, in verdict order.
// Throws Error(UnknownAssignment) when a rejected HIT is not in `hits`.
std::vector<service::Hit> repost_rejected(std::span<const HitVerdict> verdicts,
                                          const std::map<std::string, service::Hit>& hits);

nlohmann::ordered_json to_json(const HitVerdict& v);

}  // namespace abkit::qc
