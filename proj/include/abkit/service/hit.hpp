#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "abkit/byproduct/types.hpp"

namespace abkit::service {

inline constexpr int kBrowsingPages = 10;
inline constexpr int kSlotsPerPage = 48;
inline constexpr int kGridColumns = 8;
inline constexpr int kGridRows = 6;
inline constexpr int kSeedSlotsPerHit = 120;        // 480 slots at 1 seed : 3 distractors
inline constexpr int kDistractorSlotsPerHit = 360;
inline constexpr int kTaggingPages = 20;

struct ImageRef {
  std::string image_id;
  std::string url;

  bool operator==(const ImageRef&) const = default;
};

// Candidates for one class: original dataset images plus distractors.
struct CandidatePool {
  std::string class_id;
  std::string description;
  std::vector<ImageRef> seed_images;
  std::vector<ImageRef> distractor_images;
};

// One image placed on a page, with its on-page rectangle in pixels.
struct Slot {
  int index = 0;
  ImageRef image;
  bool seed = false;
  byproduct::PixelPoint position;
  int width = 0;
  int height = 0;

  bool operator==(const Slot&) const = default;
};

struct Page {
  std::vector<Slot> slots;

  bool operator==(const Page&) const = default;
};

struct BrowsingHit {
  std::string assignment_id;
  std::string class_id;
  std::string description;
  double seed_fraction_target = 0.25;
  std::vector<Page> pages;

  bool operator==(const BrowsingHit&) const = default;
};

// Tagging pages hold exactly one slot each.
struct TaggingHit {
  std::string assignment_id;
  std::vector<Page> pages;

  bool operator==(const TaggingHit&) const = default;
};

using Hit = std::variant<BrowsingHit, TaggingHit>;

const std::string& assignment_id(const Hit& hit);
const std::vector<Page>& pages(const Hit& hit);
bool is_browsing(const Hit& hit);

// Draws 120 seed and 360 distractor images, shuffles them and lays them out
// as 10 pages of an 8x6 grid. Deterministic in rng_seed. Throws
// Error(InsufficientPool) when either list is too short and
// Error(InvalidArgument) when an image appears twice in the pool.
BrowsingHit assemble_browsing_hit(const CandidatePool& pool, std::uint64_t rng_seed,
                                  std::string assignment_id);

// Packs exactly 20 distinct images, one per page.
TaggingHit assemble_tagging_hit(std::span<const ImageRef> images, std::string assignment_id);

// Copy of `hit` under a new assignment id with identical page content.
Hit with_assignment_id(const Hit& hit, std::string new_id);

nlohmann::ordered_json to_json(const Hit& hit);
Hit hit_from_json(const nlohmann::ordered_json& j);

}  // namespace abkit::service
