#include "abkit/service/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "abkit/rng.hpp"

#include <set>

namespace abkit::service {

namespace {

constexpr std::int64_t kPageGapMs = 1500;

Event point_event(EventKind kind, int page_idx, std::int64_t t, const Slot& slot, double u, double v) {
  Event e;
  e.kind = kind;
  e.page_idx = page_idx;
  e.t = t;
  e.slot = slot.index;
  e.px = slot.position.x + std::clamp(u, 0.0, 1.0) * slot.width;
  e.py = slot.position.y + std::clamp(v, 0.0, 1.0) * slot.height;
  return e;
}

// Pointer path from an image edge to the target, sampled every 30-70 ms.
void approach(std::vector<Event>& out, int page_idx, std::int64_t& t, const Slot& slot, double tx, double ty,
              bool from_left, CounterRng& rng) {
  const int steps = 3 + static_cast<int>(rng.below(4));
  const double sx = from_left ? 0.0 : 1.0;
  const double sy = rng.uniform(0.05, 0.95);
  for (int k = 0; k < steps; ++k) {
    const double f = static_cast<double>(k) / steps;
    out.push_back(point_event(EventKind::Move, page_idx, t, slot, sx + f * (tx - sx), sy + f * (ty - sy)));
    t += 30 + static_cast<std::int64_t>(rng.below(41));
  }
}

}  // namespace

std::vector<ScriptedPage> simulate_browsing(const BrowsingHit& hit, const BrowsingBehaviour& b,
                                            std::uint64_t seed, const ObjectCentres& centres) {
  std::vector<ScriptedPage> pages;
  std::int64_t t = 0;
  const int n_pages = std::min<int>(b.pages_to_complete, static_cast<int>(hit.pages.size()));
  for (int p = 0; p < n_pages; ++p) {
    CounterRng rng(seed, static_cast<std::uint64_t>(p));
    ScriptedPage page;
    page.page_idx = p;
    Event open;
    open.kind = EventKind::Open;
    open.page_idx = p;
    open.t = t;
    page.events.push_back(open);
    t += 200;

    const auto& slots = hit.pages[p].slots;
    for (int row = 0; row < kGridRows; ++row) {
      const bool left_to_right = row % 2 == 0;
      for (int c = 0; c < kGridColumns; ++c) {
        const int col = left_to_right ? c : kGridColumns - 1 - c;
        const std::size_t index = static_cast<std::size_t>(row * kGridColumns + col);
        if (index >= slots.size()) continue;
        const Slot& slot = slots[index];
        if (!rng.bernoulli(b.p_interact)) continue;

        double cx = 0.5;
        double cy = 0.5;
        if (auto it = centres.find(slot.image.image_id); it != centres.end()) {
          cx = it->second.x;
          cy = it->second.y;
        }
        const double tx = std::clamp(rng.normal(cx, b.click_spread), 0.02, 0.98);
        const double ty = std::clamp(rng.normal(cy, b.click_spread), 0.02, 0.98);
        approach(page.events, p, t, slot, tx, ty, left_to_right, rng);

        const bool select = rng.bernoulli(slot.seed ? b.p_select_seed : b.p_select_distractor);
        if (select) {
          page.events.push_back(point_event(EventKind::Click, p, t, slot, tx, ty));
          t += 150;
          if (rng.bernoulli(b.p_deselect)) {
            page.events.push_back(point_event(EventKind::Click, p, t, slot, tx, ty));
            t += 250;
            if (rng.bernoulli(b.p_reselect)) {
              const double rx = std::clamp(rng.normal(cx, b.click_spread), 0.02, 0.98);
              const double ry = std::clamp(rng.normal(cy, b.click_spread), 0.02, 0.98);
              page.events.push_back(point_event(EventKind::Click, p, t, slot, rx, ry));
              t += 150;
            }
          }
        }
        t += 100;
      }
    }
    page.submit_t = t + 300;
    t = page.submit_t + kPageGapMs;
    pages.push_back(std::move(page));
  }
  return pages;
}

std::vector<ScriptedPage> simulate_tagging(const TaggingHit& hit,
                                           const std::vector<std::vector<TaggingTarget>>& targets,
                                           const TaggingBehaviour& b, std::uint64_t seed) {
  static const std::vector<std::string> kSuperclasses = {
      "person", "vehicle", "outdoor", "animal", "accessory", "sports",
      "kitchen", "food", "furniture", "electronic", "appliance"};

  std::vector<ScriptedPage> pages;
  std::int64_t t = 0;
  const int n_pages = std::min<int>(b.pages_to_complete, static_cast<int>(hit.pages.size()));
  for (int p = 0; p < n_pages; ++p) {
    CounterRng rng(seed, static_cast<std::uint64_t>(p));
    const Slot& slot = hit.pages[p].slots.front();
    ScriptedPage page;
    page.page_idx = p;
    Event open;
    open.kind = EventKind::Open;
    open.page_idx = p;
    open.t = t;
    page.events.push_back(open);
    t += 300;

    if (rng.bernoulli(b.p_keyboard)) {
      Event k;
      k.kind = EventKind::Keyboard;
      k.page_idx = p;
      k.t = t;
      page.events.push_back(k);
      t += 120;
    }

    auto inside = [&](const analysis::GtBox& box) {
      const double mx = 0.2 * (box.x1 - box.x0);
      const double my = 0.2 * (box.y1 - box.y0);
      return std::pair{rng.uniform(box.x0 + mx, box.x1 - mx), rng.uniform(box.y0 + my, box.y1 - my)};
    };
    auto outside = [&](const analysis::GtBox& box) {
      for (int tries = 0; tries < 64; ++tries) {
        const double x = rng.uniform();
        const double y = rng.uniform();
        if (!box.contains(x, y)) return std::pair{x, y};
      }
      return std::pair{0.0, 0.0};
    };
    auto act = [&](byproduct::ActionType type, const std::string& category, double x, double y) {
      Event e = point_event(EventKind::Action, p, t, slot, x, y);
      e.action = type;
      e.category = category;
      page.events.push_back(e);
      t += 400 + static_cast<std::int64_t>(rng.below(400));
    };

    const auto& page_targets = p < static_cast<int>(targets.size()) ? targets[p] : std::vector<TaggingTarget>{};
    std::set<std::string> placed;
    for (const auto& target : page_targets) {
      if (placed.contains(target.category)) continue;
      Event visit;
      visit.kind = EventKind::Category;
      visit.page_idx = p;
      visit.t = t;
      visit.superclass = kSuperclasses[rng.below(kSuperclasses.size())];
      page.events.push_back(visit);
      t += 250;
      if (!rng.bernoulli(b.p_recall)) continue;

      const auto [x, y] = rng.bernoulli(b.p_accurate) ? inside(target.box) : outside(target.box);
      approach(page.events, p, t, slot, x, y, true, rng);
      act(byproduct::ActionType::Add, target.category, x, y);
      placed.insert(target.category);
      if (rng.bernoulli(b.p_remove_readd)) {
        act(byproduct::ActionType::Remove, target.category, x, y);
        const auto [x2, y2] = inside(target.box);
        act(byproduct::ActionType::Add, target.category, x2, y2);
      } else if (rng.bernoulli(b.p_move)) {
        const auto [x2, y2] = inside(target.box);
        act(byproduct::ActionType::Move, target.category, x2, y2);
      }
    }
    page.submit_t = t + 500;
    t = page.submit_t + kPageGapMs;
    pages.push_back(std::move(page));
  }
  return pages;
}

}  // namespace abkit::service
