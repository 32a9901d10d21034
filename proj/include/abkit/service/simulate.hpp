#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "abkit/analysis/ground_truth.hpp"
#include "abkit/service/hit.hpp"
#include "abkit/service/session.hpp"

namespace abkit::service {

// Scripted annotators that drive a HIT page by page the way the UI would,
// producing event batches for AnnotationService. Used by tests, the replay
// tooling and the QC simulations.

struct BrowsingBehaviour {
  double p_interact = 0.993;        // image hovered at all
  double p_select_seed = 0.87;      // recall on original images
  double p_select_distractor = 0.05;
  double p_deselect = 0.03;         // select, then undo with a second click
  double p_reselect = 0.3;          // after a deselect, select again
  double click_spread = 0.12;       // click scatter around the object centre
  int pages_to_complete = kBrowsingPages;
};

struct TaggingTarget {
  std::string category;
  analysis::GtBox box;
};

struct TaggingBehaviour {
  double p_recall = 0.62;           // icon placed for a present class
  double p_accurate = 0.93;         // icon dropped inside the object
  double p_move = 0.03;
  double p_remove_readd = 0.02;
  double p_keyboard = 0.1;
  int pages_to_complete = kTaggingPages;
};

struct ScriptedPage {
  int page_idx = 0;
  std::vector<Event> events;
  std::int64_t submit_t = 0;
};

// Object centre per browsing image; images without an entry are treated as
// centred objects.
using ObjectCentres = std::map<std::string, byproduct::ProxyPoint>;

std::vector<ScriptedPage> simulate_browsing(const BrowsingHit& hit, const BrowsingBehaviour& behaviour,
                                            std::uint64_t seed, const ObjectCentres& centres = {});

// targets[page] lists the objects on that page's image.
std::vector<ScriptedPage> simulate_tagging(const TaggingHit& hit,
                                           const std::vector<std::vector<TaggingTarget>>& targets,
                                           const TaggingBehaviour& behaviour, std::uint64_t seed);

}  // namespace abkit::service
