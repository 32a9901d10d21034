#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "abkit/analysis/ground_truth.hpp"
#include "abkit/service/hit.hpp"
#include "abkit/service/simulate.hpp"

namespace abkit::service {

// Synthetic annotation campaign: HITs with ground truth, driven through an
// in-memory AnnotationService by scripted annotators. A fraction of the
// annotators follows the careless behaviour.
struct CorpusOptions {
  int hits = 10;
  std::uint64_t seed = 0;
  double careless_rate = 0.0;
  std::string secret = "abkit-dev-secret";
  BrowsingBehaviour browsing;
  BrowsingBehaviour careless_browsing{.p_select_seed = 0.25, .p_select_distractor = 0.1};
  TaggingBehaviour tagging;
  TaggingBehaviour careless_tagging{.p_recall = 0.5, .p_accurate = 0.55};
};

struct Corpus {
  std::vector<Hit> hits;
  std::vector<std::string> records;  // serialized, in HIT then page order
  analysis::GroundTruth gt;
  std::map<std::string, std::string> codes;  // assignment id -> completion code
  std::vector<std::string> careless;         // assignment ids annotated carelessly
};

Corpus synthetic_browsing_corpus(const CorpusOptions& opts);
Corpus synthetic_tagging_corpus(const CorpusOptions& opts);

}  // namespace abkit::service
