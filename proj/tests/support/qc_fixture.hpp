#pragma once

#include <string>
#include <vector>

#include "abkit/analysis/ground_truth.hpp"
#include "abkit/byproduct/types.hpp"
#include "abkit/qc/qc.hpp"

namespace abkit::testing {

// Record-level QC fixtures: the metrics are fixed by construction so each
// case lands exactly on (or just off) a rejection threshold.
struct BrowsingCase {
  std::string id;
  int seeds_shown = 40;
  int seeds_selected = 30;
  int distractors_selected = 0;
  int pages = 10;
  qc::Decision expected = qc::Decision::Accept;
  std::vector<qc::Reason> reasons;
};

struct TaggingCase {
  std::string id;
  int pages = 20;
  int icons_per_page = 5;
  int correct_icons = 100;
  qc::Decision expected = qc::Decision::Accept;
  std::vector<qc::Reason> reasons;
};

inline std::vector<BrowsingCase> browsing_boundary_cases() {
  using qc::Decision;
  using qc::Reason;
  return {
      {"recall-0.30", 100, 30, 0, 10, Decision::Reject, {Reason::LowRecall}},
      {"recall-1/3", 120, 40, 0, 10, Decision::Accept, {}},
      {"recall-0.34", 100, 34, 0, 10, Decision::Accept, {}},
      {"selections-29", 40, 29, 0, 10, Decision::Reject, {Reason::TooFewSelections}},
      {"selections-30", 40, 29, 1, 10, Decision::Accept, {}},
      {"pages-8", 40, 30, 0, 8, Decision::Reject, {Reason::IncompletePages}},
      {"pages-9", 40, 30, 0, 9, Decision::Accept, {}},
  };
}

inline std::vector<TaggingCase> tagging_boundary_cases() {
  using qc::Decision;
  using qc::Reason;
  return {
      {"icons-0.74", 20, 5, 74, Decision::Reject, {Reason::LowIconAccuracy}},
      {"icons-0.75", 20, 5, 75, Decision::Accept, {}},
      {"tag-pages-15", 15, 4, 60, Decision::Reject, {Reason::IncompletePages}},
      {"tag-pages-16", 16, 4, 64, Decision::Accept, {}},
  };
}

// A twelfth case failing every browsing rule at once.
inline BrowsingCase browsing_all_rules_case() {
  using qc::Reason;
  return {"all-rules", 100, 29, 0, 8, qc::Decision::Reject,
          {Reason::LowRecall, Reason::TooFewSelections, Reason::IncompletePages}};
}

struct BrowsingFixture {
  std::vector<byproduct::ImageNetRecord> records;
  analysis::GroundTruth gt;
};

inline BrowsingFixture build_browsing(const BrowsingCase& c) {
  BrowsingFixture f;
  std::int64_t t = 1000;
  const auto add = [&](const std::string& image, bool seed, bool selected, int page) {
    byproduct::ImageNetRecord r;
    r.image_id = image;
    r.class_id = "n00000001";
    r.selected = selected;
    r.mouseTracking = {{0.45, 0.45, t}, {0.5, 0.5, t + 40}};
    if (selected) r.selectedRecord = {{0.5, 0.5, t + 50}};
    t += 100;
    r.imageWidth = 200;
    r.imageHeight = 150;
    r.worker_id = "w-" + c.id;
    r.assignment_id = c.id;
    r.page_idx = page;
    f.records.push_back(r);
    analysis::ImageTruth truth;
    truth.image_id = image;
    truth.width = 200;
    truth.height = 150;
    truth.seed = seed;
    truth.assignment_id = c.id;
    if (seed) truth.instances.push_back({"n00000001", {0.2, 0.2, 0.8, 0.8}, std::nullopt});
    f.gt[image] = truth;
  };
  for (int i = 0; i < c.seeds_shown; ++i)
    add(c.id + "_s" + std::to_string(i), true, i < c.seeds_selected, i % c.pages);
  for (int i = 0; i < c.distractors_selected; ++i) add(c.id + "_d" + std::to_string(i), false, true, i % c.pages);
  return f;
}

struct TaggingFixture {
  std::vector<byproduct::CocoRecord> records;
  analysis::GroundTruth gt;
};

inline TaggingFixture build_tagging(const TaggingCase& c, std::int64_t first_image_id) {
  TaggingFixture f;
  int remaining_correct = c.correct_icons;
  for (int p = 0; p < c.pages; ++p) {
    const std::int64_t image_id = first_image_id + p;
    analysis::ImageTruth truth;
    truth.image_id = std::to_string(image_id);
    truth.width = 640;
    truth.height = 480;
    truth.assignment_id = c.id;
    byproduct::CocoRecord r;
    r.image_id = image_id;
    r.page_idx = p;
    r.assignment_id = c.id;
    r.worker_id = "w-" + c.id;
    r.timeSpent = 5000;
    std::int64_t t = 100;
    for (int k = 0; k < c.icons_per_page; ++k) {
      const std::string cat = "cat" + std::to_string(k);
      const double x0 = 0.05 + 0.18 * k;
      truth.instances.push_back({cat, {x0, 0.1, x0 + 0.15, 0.5}, std::nullopt});
      const bool correct = remaining_correct-- > 0;
      r.actionHistories.push_back({byproduct::ActionType::Add, cat, {x0 + 0.075, correct ? 0.3 : 0.9, t}});
      t += 500;
    }
    f.records.push_back(r);
    f.gt[truth.image_id] = truth;
  }
  return f;
}

}  // namespace abkit::testing
