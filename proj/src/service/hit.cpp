#include "abkit/service/hit.hpp"

#include <set>

#include "abkit/error.hpp"
#include "abkit/rng.hpp"

namespace abkit::service {

using json = nlohmann::ordered_json;

namespace {

constexpr int kCellPx = 160;
constexpr int kImagePx = 150;
constexpr int kGridLeftPx = 20;
constexpr int kGridTopPx = 120;

constexpr int kCanvasLeftPx = 40;
constexpr int kCanvasTopPx = 100;
constexpr int kCanvasWidthPx = 640;
constexpr int kCanvasHeightPx = 480;

Slot grid_slot(int index, ImageRef image, bool seed) {
  Slot s;
  s.index = index;
  s.image = std::move(image);
  s.seed = seed;
  s.position = {kGridLeftPx + (index % kGridColumns) * kCellPx,
                kGridTopPx + (index / kGridColumns) * kCellPx};
  s.width = kImagePx;
  s.height = kImagePx;
  return s;
}

json slot_json(const Slot& s) {
  json j = json::object();
  j["slot"] = s.index;
  j["image_id"] = s.image.image_id;
  j["url"] = s.image.url;
  j["seed"] = s.seed;
  j["x"] = s.position.x;
  j["y"] = s.position.y;
  j["width"] = s.width;
  j["height"] = s.height;
  return j;
}

Slot slot_from_json(const json& j) {
  Slot s;
  s.index = j.at("slot").get<int>();
  s.image.image_id = j.at("image_id").get<std::string>();
  s.image.url = j.at("url").get<std::string>();
  s.seed = j.at("seed").get<bool>();
  s.position = {j.at("x").get<int>(), j.at("y").get<int>()};
  s.width = j.at("width").get<int>();
  s.height = j.at("height").get<int>();
  return s;
}

json pages_json(const std::vector<Page>& pages) {
  json arr = json::array();
  for (const auto& p : pages) {
    json slots = json::array();
    for (const auto& s : p.slots) slots.push_back(slot_json(s));
    arr.push_back(std::move(slots));
  }
  return arr;
}

std::vector<Page> pages_from_json(const json& arr) {
  std::vector<Page> pages;
  for (const auto& slots : arr) {
    Page p;
    for (const auto& s : slots) p.slots.push_back(slot_from_json(s));
    pages.push_back(std::move(p));
  }
  return pages;
}

void require_unique(const std::vector<ImageRef>& a, const std::vector<ImageRef>& b) {
  std::set<std::string> seen;
  for (const auto* list : {&a, &b}) {
    for (const auto& img : *list) {
      if (!seen.insert(img.image_id).second) {
        throw Error(ErrorCode::InvalidArgument, "image '" + img.image_id + "' appears twice");
      }
    }
  }
}

}  // namespace

const std::string& assignment_id(const Hit& hit) {
  return std::visit([](const auto& h) -> const std::string& { return h.assignment_id; }, hit);
}

const std::vector<Page>& pages(const Hit& hit) {
  return std::visit([](const auto& h) -> const std::vector<Page>& { return h.pages; }, hit);
}

bool is_browsing(const Hit& hit) { return std::holds_alternative<BrowsingHit>(hit); }

BrowsingHit assemble_browsing_hit(const CandidatePool& pool, std::uint64_t rng_seed,
                                  std::string assignment_id) {
  if (pool.seed_images.size() < kSeedSlotsPerHit ||
      pool.distractor_images.size() < kDistractorSlotsPerHit) {
    throw Error(ErrorCode::InsufficientPool,
                "need at least " + std::to_string(kSeedSlotsPerHit) + " seed and " +
                    std::to_string(kDistractorSlotsPerHit) + " distractor images, got " +
                    std::to_string(pool.seed_images.size()) + " and " +
                    std::to_string(pool.distractor_images.size()));
  }
  require_unique(pool.seed_images, pool.distractor_images);

  CounterRng rng(rng_seed, 0x6869);
  auto seeds = pool.seed_images;
  auto distractors = pool.distractor_images;
  shuffle(seeds.begin(), seeds.end(), rng);
  shuffle(distractors.begin(), distractors.end(), rng);

  std::vector<std::pair<ImageRef, bool>> chosen;
  chosen.reserve(kSeedSlotsPerHit + kDistractorSlotsPerHit);
  for (int i = 0; i < kSeedSlotsPerHit; ++i) chosen.emplace_back(seeds[i], true);
  for (int i = 0; i < kDistractorSlotsPerHit; ++i) chosen.emplace_back(distractors[i], false);
  shuffle(chosen.begin(), chosen.end(), rng);

  BrowsingHit hit;
  hit.assignment_id = std::move(assignment_id);
  hit.class_id = pool.class_id;
  hit.description = pool.description;
  hit.pages.resize(kBrowsingPages);
  for (int p = 0; p < kBrowsingPages; ++p) {
    for (int s = 0; s < kSlotsPerPage; ++s) {
      auto& [image, seed] = chosen[p * kSlotsPerPage + s];
      hit.pages[p].slots.push_back(grid_slot(s, std::move(image), seed));
    }
  }
  return hit;
}

TaggingHit assemble_tagging_hit(std::span<const ImageRef> images, std::string assignment_id) {
  if (images.size() != kTaggingPages) {
    throw Error(ErrorCode::InvalidArgument,
                "tagging HIT needs exactly " + std::to_string(kTaggingPages) + " images");
  }
  require_unique({images.begin(), images.end()}, {});
  TaggingHit hit;
  hit.assignment_id = std::move(assignment_id);
  for (const auto& img : images) {
    Slot s;
    s.image = img;
    s.position = {kCanvasLeftPx, kCanvasTopPx};
    s.width = kCanvasWidthPx;
    s.height = kCanvasHeightPx;
    hit.pages.push_back(Page{{s}});
  }
  return hit;
}

Hit with_assignment_id(const Hit& hit, std::string new_id) {
  Hit copy = hit;
  std::visit([&](auto& h) { h.assignment_id = std::move(new_id); }, copy);
  return copy;
}

json to_json(const Hit& hit) {
  json j = json::object();
  if (const auto* b = std::get_if<BrowsingHit>(&hit)) {
    j["interface"] = "browsing";
    j["assignment_id"] = b->assignment_id;
    j["class_id"] = b->class_id;
    j["description"] = b->description;
    j["seed_fraction_target"] = b->seed_fraction_target;
    j["pages"] = pages_json(b->pages);
  } else {
    const auto& t = std::get<TaggingHit>(hit);
    j["interface"] = "tagging";
    j["assignment_id"] = t.assignment_id;
    j["pages"] = pages_json(t.pages);
  }
  return j;
}

Hit hit_from_json(const json& j) {
  try {
    const auto kind = j.at("interface").get<std::string>();
    if (kind == "browsing") {
      BrowsingHit b;
      b.assignment_id = j.at("assignment_id").get<std::string>();
      b.class_id = j.at("class_id").get<std::string>();
      b.description = j.at("description").get<std::string>();
      b.seed_fraction_target = j.at("seed_fraction_target").get<double>();
      b.pages = pages_from_json(j.at("pages"));
      return b;
    }
    if (kind == "tagging") {
      TaggingHit t;
      t.assignment_id = j.at("assignment_id").get<std::string>();
      t.pages = pages_from_json(j.at("pages"));
      return t;
    }
    throw Error(ErrorCode::MalformedRecord, "unknown interface '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedRecord, std::string("bad HIT definition: ") + e.what());
  }
}

}  // namespace abkit::service
