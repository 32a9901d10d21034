#include "abkit/service/corpus.hpp"

#include <algorithm>
#include <array>

#include "abkit/rng.hpp"
#include "abkit/service/store.hpp"

namespace abkit::service {

namespace {

constexpr std::array<const char*, 12> kCategories = {"person", "car",    "dog",    "cat",    "chair", "cup",
                                                     "bicycle", "bottle", "tv",    "laptop", "bird",  "horse"};

analysis::GtBox random_box(CounterRng& rng, double min_side, double max_side) {
  const double w = rng.uniform(min_side, max_side);
  const double h = rng.uniform(min_side, max_side);
  const double cx = std::clamp(rng.normal(0.5, 0.15), w / 2, 1.0 - w / 2);
  const double cy = std::clamp(rng.normal(0.5, 0.15), h / 2, 1.0 - h / 2);
  return {cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2};
}

std::string assignment_name(const char* prefix, int h) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%04d", prefix, h);
  return buf;
}

void drive(AnnotationService& service, const Hit& hit, const std::vector<ScriptedPage>& pages, int worker,
           Corpus& corpus) {
  const auto& id = assignment_id(hit);
  for (const auto& page : pages) {
    service.ingest_events(id, page.events);
    service.finalize_page(id, page.page_idx, {page.submit_t, "worker-" + std::to_string(worker)});
  }
  for (auto& line : service.records(id)) corpus.records.push_back(std::move(line));
  corpus.codes[id] = service.issue_completion_code(id);
}

}  // namespace

Corpus synthetic_browsing_corpus(const CorpusOptions& opts) {
  Corpus corpus;
  ServiceOptions so;
  so.secret = opts.secret;
  AnnotationService service(so);
  for (int h = 0; h < opts.hits; ++h) {
    CounterRng rng(opts.seed, static_cast<std::uint64_t>(h));
    CandidatePool pool;
    char cls[16];
    std::snprintf(cls, sizeof cls, "n%08d", 1440764 + h);
    pool.class_id = cls;
    pool.description = "synthetic class " + std::to_string(h);
    ObjectCentres centres;
    const std::string id = assignment_name("browse-", h);
    for (int i = 0; i < kSeedSlotsPerHit + kDistractorSlotsPerHit; ++i) {
      const bool seed = i < kSeedSlotsPerHit;
      ImageRef ref;
      ref.image_id = pool.class_id + (seed ? "_s" : "_d") + std::to_string(i);
      ref.url = "/images/" + ref.image_id + ".jpg";
      analysis::ImageTruth truth;
      truth.image_id = ref.image_id;
      truth.width = 300 + static_cast<int>(rng.below(201));
      truth.height = 250 + static_cast<int>(rng.below(151));
      truth.seed = seed;
      truth.assignment_id = id;
      if (seed) {
        const auto box = random_box(rng, 0.2, 0.8);
        truth.instances.push_back({pool.class_id, box, std::nullopt});
        centres[ref.image_id] = {box.center_x(), box.center_y()};
        pool.seed_images.push_back(ref);
      } else {
        pool.distractor_images.push_back(ref);
      }
      corpus.gt[ref.image_id] = std::move(truth);
    }
    const BrowsingHit hit = assemble_browsing_hit(pool, mix64(opts.seed + static_cast<std::uint64_t>(h)), id);
    service.register_hit(hit);
    const bool careless = rng.bernoulli(opts.careless_rate);
    if (careless) corpus.careless.push_back(id);
    const auto pages =
        simulate_browsing(hit, careless ? opts.careless_browsing : opts.browsing, mix64(opts.seed ^ (h + 1)), centres);
    drive(service, hit, pages, h, corpus);
    corpus.hits.push_back(hit);
  }
  return corpus;
}

Corpus synthetic_tagging_corpus(const CorpusOptions& opts) {
  Corpus corpus;
  ServiceOptions so;
  so.secret = opts.secret;
  AnnotationService service(so);
  for (int h = 0; h < opts.hits; ++h) {
    CounterRng rng(opts.seed, static_cast<std::uint64_t>(h));
    const std::string id = assignment_name("tag-", h);
    std::vector<ImageRef> images;
    std::vector<std::vector<TaggingTarget>> targets;
    for (int p = 0; p < kTaggingPages; ++p) {
      const long image_id = 100000 + static_cast<long>(h) * kTaggingPages + p;
      images.push_back({std::to_string(image_id), "/images/" + std::to_string(image_id) + ".jpg"});
      analysis::ImageTruth truth;
      truth.image_id = std::to_string(image_id);
      truth.width = 640;
      truth.height = 480;
      truth.assignment_id = id;
      std::vector<std::size_t> cats(kCategories.size());
      for (std::size_t i = 0; i < cats.size(); ++i) cats[i] = i;
      abkit::shuffle(cats.begin(), cats.end(), rng);
      const int n = 1 + static_cast<int>(rng.below(4));
      std::vector<TaggingTarget> page_targets;
      for (int k = 0; k < n; ++k) {
        const auto box = random_box(rng, 0.08, 0.7);
        truth.instances.push_back({kCategories[cats[static_cast<std::size_t>(k)]], box, std::nullopt});
        page_targets.push_back({kCategories[cats[static_cast<std::size_t>(k)]], box});
      }
      corpus.gt[truth.image_id] = std::move(truth);
      targets.push_back(std::move(page_targets));
    }
    const TaggingHit hit = assemble_tagging_hit(images, id);
    service.register_hit(hit);
    const bool careless = rng.bernoulli(opts.careless_rate);
    if (careless) corpus.careless.push_back(id);
    const auto pages =
        simulate_tagging(hit, targets, careless ? opts.careless_tagging : opts.tagging, mix64(opts.seed ^ (h + 1)));
    drive(service, hit, pages, h, corpus);
    corpus.hits.push_back(hit);
  }
  return corpus;
}

}  // namespace abkit::service
