#include <malloc.h>
#include <time.h>
#include <unistd.h>

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "abkit/analysis/stats.hpp"
#include "abkit/byproduct/codec.hpp"
#include "abkit/cli/commands.hpp"
#include "abkit/error.hpp"
#include "abkit/luab/experiment.hpp"
#include "abkit/luab/layers.hpp"
#include "abkit/qc/qc.hpp"
#include "abkit/rng.hpp"
#include "abkit/service/corpus.hpp"
#include "abkit/service/hit.hpp"
#include "abkit/service/session.hpp"
#include "abkit/service/simulate.hpp"
#include "abkit/service/store.hpp"
#include "gradcheck.hpp"

using namespace abkit;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double cpu_seconds() {
  timespec ts{};
  clock_gettime(CLOCK_PROCESS_CPUTIME_ID, &ts);
  return static_cast<double>(ts.tv_sec) + 1e-9 * static_cast<double>(ts.tv_nsec);
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(const std::string& name, const std::function<Outcome()>& check) {
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = slurp(e.path());
  }
  return files;
}

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "abkit");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int rc = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  if (rc != 0) throw std::runtime_error("abkit " + args[1] + " exited " + std::to_string(rc) + ": " + err.str());
  return rc;
}

// ---- parity ----------------------------------------------------------------

Outcome parity_invariant() {
  service::CandidatePool pool;
  pool.class_id = "n01440764";
  pool.description = "tench";
  for (int i = 0; i < service::kSeedSlotsPerHit; ++i) pool.seed_images.push_back({"s" + std::to_string(i), "/s"});
  for (int i = 0; i < service::kDistractorSlotsPerHit; ++i)
    pool.distractor_images.push_back({"d" + std::to_string(i), "/d"});
  const service::Hit hit = service::assemble_browsing_hit(pool, 7, "parity");
  const auto& page_list = service::pages(hit);

  const auto t0 = Clock::now();
  std::size_t failures_seen = 0, records_checked = 0, selected_seen = 0;
  for (int session = 0; session < 1000; ++session) {
    CounterRng rng(2024, static_cast<std::uint64_t>(session));
    const int page_idx = static_cast<int>(rng.below(page_list.size()));
    const auto& slots = page_list[page_idx].slots;
    std::vector<service::Event> events;
    std::map<int, int> toggles;
    std::int64_t t = 0;
    const int n_events = 1 + static_cast<int>(rng.below(40));
    for (int k = 0; k < n_events; ++k) {
      const auto& slot = slots[rng.below(slots.size())];
      service::Event e;
      e.page_idx = page_idx;
      e.t = (t += 1 + static_cast<std::int64_t>(rng.below(400)));
      e.slot = slot.index;
      e.px = slot.position.x + rng.uniform() * slot.width;
      e.py = slot.position.y + rng.uniform() * slot.height;
      e.kind = rng.uniform() < 0.5 ? service::EventKind::Click : service::EventKind::Move;
      if (e.kind == service::EventKind::Click) ++toggles[slot.index];
      events.push_back(e);
    }
    service::Event submit;
    submit.page_idx = page_idx;
    submit.t = t + 1;
    submit.kind = service::EventKind::Submit;
    submit.worker_id = "w";
    events.push_back(submit);

    const auto built = service::build_page_records(hit, page_idx, events);
    std::map<std::string, int> slot_of_image;
    for (const auto& s : slots) slot_of_image[s.image.image_id] = s.index;
    for (const auto& line : built.lines()) {
      const auto r = byproduct::parse_imagenet_record(line);
      const int expected_toggles = toggles[slot_of_image.at(r.image_id)];
      const bool odd = r.selectedRecord.size() % 2 == 1;
      if (r.selected != odd || r.selected != (expected_toggles % 2 == 1) ||
          static_cast<int>(r.selectedRecord.size()) != expected_toggles) {
        ++failures_seen;
      }
      selected_seen += r.selected ? 1 : 0;
      ++records_checked;
    }
  }
  const double elapsed = seconds_since(t0);
  return {failures_seen == 0 && elapsed < 1.0 && selected_seen > 0,
          fmt("1000 sessions, %zu records (%zu selected), %zu failures, %.3f s", records_checked, selected_seen,
              failures_seen, elapsed)};
}

// ---- QC ----------------------------------------------------------------------

Outcome qc_exactness() {
  const fs::path dir = fs::path(ABKIT_FIXTURES) / "qc_boundary";
  std::map<std::string, std::string> expected;
  {
    std::ifstream in(dir / "expected.jsonl");
    for (std::string line; std::getline(in, line);) {
      if (line.empty()) continue;
      expected[nlohmann::json::parse(line).at("assignment_id").get<std::string>()] = line;
    }
  }
  std::map<std::string, std::string> got;
  {
    const auto records = byproduct::load_imagenet_jsonl((dir / "imagenet_records.jsonl").string());
    const auto gt = analysis::load_ground_truth((dir / "imagenet_gt.jsonl").string());
    std::map<std::string, std::vector<byproduct::ImageNetRecord>> by_hit;
    for (const auto& r : records) by_hit[r.assignment_id].push_back(r);
    for (const auto& [id, recs] : by_hit) {
      auto v = qc::evaluate_imagenet_hit(recs, qc::seed_truth(gt, id), {});
      v.assignment_id = id;
      got[id] = qc::to_json(v).dump();
    }
  }
  {
    const auto records = byproduct::load_coco_jsonl((dir / "coco_records.jsonl").string());
    const auto gt = analysis::load_ground_truth((dir / "coco_gt.jsonl").string());
    std::map<std::string, std::vector<byproduct::CocoRecord>> by_hit;
    for (const auto& r : records) by_hit[r.assignment_id].push_back(r);
    for (const auto& [id, recs] : by_hit) {
      auto v = qc::evaluate_coco_hit(recs, gt, {});
      v.assignment_id = id;
      got[id] = qc::to_json(v).dump();
    }
  }
  std::size_t fixture_matches = 0;
  std::string mismatch;
  for (const auto& [id, line] : expected) {
    if (got.count(id) && got[id] == line) {
      ++fixture_matches;
    } else if (mismatch.empty()) {
      mismatch = " first mismatch " + id + ": " + (got.count(id) ? got[id] : "missing");
    }
  }

  // Strict-less-than at each threshold: the threshold itself passes, the next
  // representable value below it fails.
  int boundary_ok = 0, boundary_total = 0;
  auto expect = [&](const qc::HitVerdict& v, bool accept) {
    ++boundary_total;
    boundary_ok += (v.decision == qc::Decision::Accept) == accept ? 1 : 0;
  };
  using qc::BrowsingMetrics;
  using qc::TaggingMetrics;
  const double below_recall = std::nextafter(qc::kMinRecall, 0.0);
  const double below_icons = std::nextafter(qc::kMinIconAccuracy, 0.0);
  expect(qc::judge(BrowsingMetrics{qc::kMinRecall, 30, 9, true}, {}), true);
  expect(qc::judge(BrowsingMetrics{below_recall, 30, 9, true}, {}), false);
  expect(qc::judge(BrowsingMetrics{0.30, 30, 9, true}, {}), false);
  expect(qc::judge(BrowsingMetrics{1.0 / 3.0, 30, 9, true}, {}), true);
  expect(qc::judge(BrowsingMetrics{0.34, 30, 9, true}, {}), true);
  expect(qc::judge(BrowsingMetrics{1.0, 29, 9, true}, {}), false);
  expect(qc::judge(BrowsingMetrics{1.0, 30, 9, true}, {}), true);
  expect(qc::judge(BrowsingMetrics{1.0, 30, 8, true}, {}), false);
  expect(qc::judge(BrowsingMetrics{1.0, 30, 9, true}, {}), true);
  expect(qc::judge(TaggingMetrics{1.0, qc::kMinIconAccuracy, 16, true}, {}), true);
  expect(qc::judge(TaggingMetrics{1.0, below_icons, 16, true}, {}), false);
  expect(qc::judge(TaggingMetrics{1.0, 0.74, 16, true}, {}), false);
  expect(qc::judge(TaggingMetrics{1.0, 1.0, 15, true}, {}), false);
  expect(qc::judge(TaggingMetrics{1.0, 1.0, 16, true}, {}), true);
  expect(qc::judge(BrowsingMetrics{1.0, 30, 9, true}, qc::CodeCheck{false}), true);
  expect(qc::judge(BrowsingMetrics{1.0, 30, 9, false}, qc::CodeCheck{true}), true);
  expect(qc::judge(BrowsingMetrics{1.0, 30, 9, false}, qc::CodeCheck{false}), false);

  const bool thresholds = qc::kMinRecall == 0.333 && qc::kMinSelections == 30 && qc::kMinBrowsingPages == 9 &&
                          qc::kMinIconAccuracy == 0.75 && qc::kMinTaggingPages == 16;
  return {fixture_matches == expected.size() && expected.size() == 12 && boundary_ok == boundary_total && thresholds,
          fmt("fixture %zu/%zu verdicts exact, boundary probes %d/%d, thresholds %s", fixture_matches,
              expected.size(), boundary_ok, boundary_total, thresholds ? "as specified" : "WRONG") +
              mismatch};
}

// ---- analytics oracles -------------------------------------------------------

struct AnalyticsFixture {
  std::vector<byproduct::ImageNetRecord> imagenet;
  std::vector<byproduct::CocoRecord> coco;
  analysis::GroundTruth gt;
};

AnalyticsFixture analytics_fixture(std::uint64_t seed) {
  AnalyticsFixture f;
  CounterRng rng(seed, 0);
  for (int i = 0; i < 40; ++i) {
    analysis::ImageTruth t;
    t.image_id = "img" + std::to_string(i);
    t.width = 400;
    t.height = 300;
    const int boxes = static_cast<int>(rng.below(3));
    for (int b = 0; b < boxes; ++b) {
      const double x0 = rng.uniform(0.0, 0.6), y0 = rng.uniform(0.0, 0.6);
      analysis::Instance inst;
      inst.category = rng.uniform() < 0.8 ? "n01" : "n02";
      inst.box = {x0, y0, x0 + rng.uniform(0.05, 0.4), y0 + rng.uniform(0.05, 0.4)};
      t.instances.push_back(inst);
    }
    f.gt[t.image_id] = t;
  }
  for (int i = 0; i < 200; ++i) {
    byproduct::ImageNetRecord r;
    r.image_id = "img" + std::to_string(rng.below(45));
    r.class_id = rng.uniform() < 0.85 ? "n01" : "n02";
    r.imagePosition = {10, 20};
    r.imageWidth = 400;
    r.imageHeight = 300;
    r.worker_id = "w";
    r.assignment_id = "a";
    std::int64_t t = 0;
    const int moves = static_cast<int>(rng.below(30));
    for (int k = 0; k < moves; ++k) r.mouseTracking.push_back({rng.uniform(), rng.uniform(), t += 1 + rng.below(50)});
    const int clicks = static_cast<int>(rng.below(5));
    std::int64_t ct = 0;
    const auto it = f.gt.find(r.image_id);
    for (int k = 0; k < clicks; ++k) {
      double x = rng.uniform(), y = rng.uniform();
      if (it != f.gt.end() && !it->second.instances.empty() && rng.uniform() < 0.7) {
        const auto& box = it->second.instances[rng.below(it->second.instances.size())].box;
        x = std::clamp(rng.uniform(box.x0 - 0.05, box.x1 + 0.05), 0.0, 1.0);
        y = std::clamp(rng.uniform(box.y0 - 0.05, box.y1 + 0.05), 0.0, 1.0);
        if (rng.uniform() < 0.15) x = rng.uniform() < 0.5 ? box.x0 : box.x1;
      }
      r.selectedRecord.push_back({x, y, ct += 1 + rng.below(400)});
    }
    r.selected = clicks % 2 == 1;
    f.imagenet.push_back(byproduct::parse_imagenet_record(byproduct::serialize(r)));
  }
  const std::vector<std::string> categories = {"dog", "cat", "car", "cup", "tv"};
  for (int i = 0; i < 200; ++i) {
    byproduct::CocoRecord r;
    r.image_id = 500 + i;
    r.assignment_id = "a";
    r.worker_id = "w";
    std::map<std::string, bool> placed;
    std::int64_t t = 0;
    const int actions = static_cast<int>(rng.below(9));
    for (int k = 0; k < actions; ++k) {
      const auto& c = categories[rng.below(categories.size())];
      byproduct::IconAction a;
      a.category = c;
      a.point = {rng.uniform(), rng.uniform(), t += 1 + rng.below(300)};
      if (!placed[c]) {
        a.action = byproduct::ActionType::Add;
        placed[c] = true;
      } else if (rng.uniform() < 0.6) {
        a.action = byproduct::ActionType::Move;
      } else {
        a.action = byproduct::ActionType::Remove;
        placed[c] = false;
      }
      r.actionHistories.push_back(a);
    }
    r.timeSpent = t + 10;
    f.coco.push_back(byproduct::parse_coco_record(byproduct::serialize(r)));
  }
  return f;
}

// Brute-force reference: walk every record, decide selection from the toggle
// count and test the last toggle against each box of the labelled class.
std::pair<std::size_t, std::size_t> oracle_final_clicks(const AnalyticsFixture& f) {
  std::size_t n = 0, inside = 0;
  for (const auto& r : f.imagenet) {
    if (r.selectedRecord.size() % 2 == 0) continue;
    if (!f.gt.count(r.image_id)) continue;
    const auto& last = r.selectedRecord[r.selectedRecord.size() - 1];
    bool any_box = false, hit = false;
    for (const auto& inst : f.gt.at(r.image_id).instances) {
      if (inst.category != r.class_id) continue;
      any_box = true;
      if (last.x >= inst.box.x0 && last.x <= inst.box.x1 && last.y >= inst.box.y0 && last.y <= inst.box.y1) hit = true;
    }
    if (!any_box) continue;
    ++n;
    inside += hit ? 1 : 0;
  }
  return {n, inside};
}

std::map<std::string, std::size_t> oracle_action_histogram(const AnalyticsFixture& f) {
  std::map<std::string, std::size_t> hist;
  for (const auto& r : f.coco) {
    std::set<std::string> cats;
    for (const auto& a : r.actionHistories) cats.insert(a.category);
    for (const auto& c : cats) {
      std::string last, seq;
      for (const auto& a : r.actionHistories) {
        if (a.category != c) continue;
        const std::string name = a.action == byproduct::ActionType::Add    ? "add"
                                 : a.action == byproduct::ActionType::Move ? "move"
                                                                           : "remove";
        seq += (seq.empty() ? "" : "-") + name;
        last = name;
      }
      if (last != "remove") ++hist[seq];
    }
  }
  return hist;
}

Outcome analytics_oracles() {
  int agree = 0, total = 0;
  std::string detail;
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    const auto f = analytics_fixture(seed);
    const auto [n, inside] = oracle_final_clicks(f);
    const double oracle_acc = static_cast<double>(inside) / static_cast<double>(n);
    const auto points = analysis::final_click_points(f.imagenet, f.gt);
    const double acc = analysis::click_localization_accuracy(points);
    const auto curve = analysis::trace_quantile_accuracy(f.imagenet, f.gt, analysis::QuantileMode::TraceQuantile, 10);
    const auto hist = analysis::action_sequence_histogram(f.coco);
    const auto oracle_hist = oracle_action_histogram(f);
    total += 3;
    agree += (acc == oracle_acc && points.size() == n) ? 1 : 0;
    agree += (curve.accuracy.back() == oracle_acc && curve.counts.back() == n) ? 1 : 0;
    agree += hist == oracle_hist ? 1 : 0;
    std::size_t icons = 0;
    for (const auto& [k, v] : hist) icons += v;
    if (detail.empty())
      detail = fmt("seed %llu: %zu scored clicks, accuracy %.4f, %zu histogram keys over %zu live icons",
                   static_cast<unsigned long long>(seed), n, oracle_acc, hist.size(), icons);
  }
  return {agree == total, fmt("%d/%d exact agreements over 3 fixtures of 200+200 records; ", agree, total) + detail};
}

// ---- sigma sweep -------------------------------------------------------------

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Probability that clamp(N(0.5, s), 0, 1) lands in [lo, hi].
double clamped_interval(double lo, double hi, double s) {
  if (std::isinf(s)) return hi - lo;
  const double upper = hi >= 1.0 ? 1.0 : normal_cdf((hi - 0.5) / s);
  const double lower = lo <= 0.0 ? 0.0 : normal_cdf((lo - 0.5) / s);
  return upper - lower;
}

Outcome sigma_sweep() {
  struct Fixture {
    int w, h;
    analysis::GtBox box;
    bool object_centric;
  };
  const std::vector<Fixture> fixtures = {
      {500, 500, {0.3, 0.3, 0.7, 0.7}, true},     {500, 375, {0.4, 0.2, 0.9, 0.8}, true},
      {375, 500, {0.0, 0.0, 0.55, 0.6}, true},    {640, 480, {0.45, 0.1, 0.55, 1.0}, true},
      {400, 400, {0.0, 0.0, 0.2, 0.2}, false},    {600, 300, {0.6, 0.0, 1.0, 0.45}, false},
      {300, 300, {0.05, 0.05, 0.95, 0.95}, true},
  };
  analysis::SweepConfig cfg;
  cfg.sigmas = {0.0, 0.05, 0.1, 0.2, 0.35, 0.5, 1.0, 2.0, analysis::kUniformSigma};
  cfg.samples_per_image = 100000;
  cfg.seed = 99;
  double worst = 0.0;
  bool monotone_ok = true;
  for (std::size_t i = 0; i < fixtures.size(); ++i) {
    const auto& fx = fixtures[i];
    const analysis::SweepImage img{fx.w, fx.h, {fx.box}};
    const auto curve = analysis::gaussian_click_sweep(std::span(&img, 1), cfg);
    for (const auto& p : curve) {
      double closed = 0.0;
      if (p.sigma == 0.0) {
        closed = fx.box.contains(0.5, 0.5) ? 1.0 : 0.0;
      } else {
        const double short_side = std::min(fx.w, fx.h);
        const double sx = std::isinf(p.sigma) ? p.sigma : p.sigma * short_side / fx.w;
        const double sy = std::isinf(p.sigma) ? p.sigma : p.sigma * short_side / fx.h;
        closed = clamped_interval(fx.box.x0, fx.box.x1, sx) * clamped_interval(fx.box.y0, fx.box.y1, sy);
      }
      worst = std::max(worst, std::abs(p.accuracy - closed));
    }
    if (fx.object_centric && curve.front().accuracy < curve.back().accuracy) monotone_ok = false;
  }
  return {worst <= 0.005 && monotone_ok,
          fmt("max |MC - closed form| = %.5f over %zu fixtures x %zu sigmas at 100k samples; sigma=0 >= uniform on "
              "object-centric fixtures: %s",
              worst, fixtures.size(), cfg.sigmas.size(), monotone_ok ? "yes" : "no")};
}

// ---- gradients ---------------------------------------------------------------

Outcome gradient_checks() {
  const auto t0 = Clock::now();
  double model_worst = 0.0, loss_worst = 0.0;
  std::size_t checked = 0, skipped = 0;
  for (std::uint64_t k = 0; k < 50; ++k) {
    const auto g = testing::random_instance(k);
    const auto r = testing::model_gradient_check(g);
    model_worst = std::max(model_worst, r.max_error);
    checked += r.checked;
    skipped += r.skipped;
    loss_worst = std::max(loss_worst, testing::loss_gradient_error(g));
  }
  const double elapsed = seconds_since(t0);
  return {model_worst < 1e-4 && loss_worst < 1e-4 && elapsed < 30.0 && skipped == 0,
          fmt("50 instances, %zu parameter coordinates (%zu skipped); max rel. error parameters %.3g, loss inputs "
              "%.3g; %.1f s",
              checked, skipped, model_worst, loss_worst, elapsed)};
}

// ---- attentive pooling -------------------------------------------------------

Outcome attentive_limits() {
  CounterRng rng(31, 0);
  double gap_worst = 0.0, sum_worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int h = 2 + static_cast<int>(rng.below(12)), w = 2 + static_cast<int>(rng.below(12));
    const int c = 1 + static_cast<int>(rng.below(16));
    luab::Mat f(h * w, c);
    for (Eigen::Index i = 0; i < f.size(); ++i) f.data()[i] = 3.0 * rng.normal();
    const double p[2] = {rng.uniform(), rng.uniform()};
    const luab::Vec gap = f.colwise().mean().transpose();
    for (double bw : {std::numeric_limits<double>::infinity(), 1e6, 1e9}) {
      gap_worst = std::max(gap_worst, (luab::attentive_pool_forward(f, h, w, p, bw) - gap).cwiseAbs().maxCoeff());
    }
    for (double bw : {0.02, 0.1, 0.15, 0.5, 3.0, 1e6}) {
      sum_worst = std::max(sum_worst, std::abs(luab::attention_weights(h, w, p[0], p[1], bw).sum() - 1.0));
    }
  }
  return {gap_worst <= 1e-6 && sum_worst <= 1e-9,
          fmt("200 random maps: max |attentive - average| at large bandwidth %.3g, max |sum(weights) - 1| %.3g",
              gap_worst, sum_worst)};
}

// ---- determinism -------------------------------------------------------------

Outcome determinism(const fs::path& work) {
  const auto hits = work / "hits";
  run_cli({"make-hits", "--count", "4", "--seed", "5", "--careless-rate", "0.25", "--out", hits.string()});
  std::vector<std::vector<std::string>> commands = {
      {"train", "--seeds", "3,4", "--train-size", "200", "--val-size", "50", "--test-size", "60", "--epochs", "2",
       "--out", (work / "train").string()},
      {"train", "--mode", "rand", "--labels", "multi", "--seed", "2", "--train-size", "150", "--val-size", "40",
       "--test-size", "40", "--epochs", "1", "--out", (work / "train-multi").string()},
  };
  for (const auto* stat : {"clicks", "sweep", "quantiles", "bias"}) {
    commands.push_back({"analyze", "--records", (hits / "records.jsonl").string(), "--gt",
                        (hits / "gt.jsonl").string(), "--stat", stat, "--samples", "500", "--seed", "8", "--out",
                        (work / "an" / stat).string()});
  }
  std::size_t files = 0;
  std::string differing;
  for (const auto& cmd : commands) {
    const fs::path out = cmd.back();
    run_cli(cmd);
    const auto first = snapshot(out);
    fs::remove_all(out);
    run_cli(cmd);
    const auto second = snapshot(out);
    files += first.size();
    if (first != second && differing.empty()) differing = " differs: " + out.string();
    if (first.empty() && differing.empty()) differing = " no artifacts: " + out.string();
  }
  return {differing.empty(),
          fmt("%zu commands rerun with identical manifests, %zu artifacts compared byte for byte", commands.size(),
              files) +
              differing};
}

// ---- service replay ----------------------------------------------------------

Outcome service_replay(const fs::path& work) {
  service::ServiceOptions opts;
  opts.data_dir = work / "service";
  service::AnnotationService svc(opts);

  service::CandidatePool pool;
  pool.class_id = "n02085620";
  pool.description = "Chihuahua";
  for (int i = 0; i < service::kSeedSlotsPerHit; ++i) pool.seed_images.push_back({"s" + std::to_string(i), "/s"});
  for (int i = 0; i < service::kDistractorSlotsPerHit; ++i)
    pool.distractor_images.push_back({"d" + std::to_string(i), "/d"});
  const auto browsing = service::assemble_browsing_hit(pool, 3, "B");
  std::vector<service::ImageRef> images;
  for (int i = 0; i < service::kTaggingPages; ++i) images.push_back({std::to_string(9000 + i), "/t"});
  const auto tagging = service::assemble_tagging_hit(images, "T");
  std::vector<std::vector<service::TaggingTarget>> targets(service::kTaggingPages);
  for (int p = 0; p < service::kTaggingPages; ++p) {
    targets[p] = {{"dog", {0.1, 0.1, 0.5, 0.6}}, {"cup", {0.6, 0.5, 0.9, 0.9}}};
  }
  service::BrowsingBehaviour bb;
  bb.p_deselect = 0.2;
  service::TaggingBehaviour tb;
  tb.p_move = 0.3;
  tb.p_remove_readd = 0.2;

  svc.register_hit(browsing);
  svc.register_hit(tagging);
  const auto browse_pages = service::simulate_browsing(browsing, bb, 17);
  const auto tag_pages = service::simulate_tagging(tagging, targets, tb, 18);
  auto drive = [&](const std::string& id, const std::vector<service::ScriptedPage>& script) {
    for (const auto& page : script) {
      svc.ingest_events(id, page.events);
      svc.finalize_page(id, page.page_idx, {page.submit_t, "worker-" + id});
    }
  };
  drive("B", browse_pages);
  drive("T", tag_pages);

  bool replay_equal = true, dup_noop = true, reload_equal = true;
  std::size_t lines = 0, resent = 0;
  for (const auto* id : {"B", "T"}) {
    const auto records = svc.records(id);
    lines += records.size();
    replay_equal = replay_equal && !records.empty() && svc.replay_records(id) == records;
    const auto log = svc.event_log(id);
    for (const auto& page : id == std::string("B") ? browse_pages : tag_pages) {
      const auto ack = svc.ingest_events(id, page.events);
      resent += page.events.size();
      dup_noop = dup_noop && ack.accepted == 0;
    }
    dup_noop = dup_noop && svc.event_log(id) == log && svc.records(id) == records && svc.replay_records(id) == records;
  }
  service::AnnotationService reloaded(opts);
  reloaded.load();
  for (const auto* id : {"B", "T"}) {
    reload_equal = reload_equal && reloaded.records(id) == svc.records(id) &&
                   reloaded.replay_records(id) == svc.records(id);
  }
  return {replay_equal && dup_noop && reload_equal,
          fmt("%zu records; replay byte-equal %s; %zu duplicate events re-sent, no-op %s; reload from disk equal %s",
              lines, replay_equal ? "yes" : "no", resent, dup_noop ? "yes" : "no", reload_equal ? "yes" : "no")};
}

// ---- LUAB direction of effect ------------------------------------------------

struct ArmRun {
  luab::ArmResult result;
  double cpu = 0.0;
};

ArmRun timed_arm(const luab::ExperimentConfig& cfg, const luab::ExperimentData& data, std::uint64_t seed) {
  const double c0 = cpu_seconds();
  ArmRun r{luab::run_arm(cfg, data, seed), 0.0};
  r.cpu = cpu_seconds() - c0;
  return r;
}

void luab_group(int seeds) {
  constexpr double kCpuLimit = 300.0;
  luab::ExperimentConfig single;
  std::vector<double> reg_luab, reg_rand, loc_luab, loc_rand, gap_luab, gap_base;
  std::map<std::string, double> worst_cpu;
  for (int seed = 0; seed < seeds; ++seed) {
    const auto data = luab::make_experiment_data(single, seed);
    std::map<luab::Arm, ArmRun> runs;
    for (auto arm : {luab::Arm::Luab, luab::Arm::Rand, luab::Arm::Baseline}) {
      auto cfg = single;
      cfg.arm = arm;
      runs[arm] = timed_arm(cfg, data, seed);
      auto& w = worst_cpu[std::string(luab::to_string(arm))];
      w = std::max(w, runs[arm].cpu);
    }
    const auto& l = runs[luab::Arm::Luab].result;
    const auto& r = runs[luab::Arm::Rand].result;
    const auto& b = runs[luab::Arm::Baseline].result;
    reg_luab.push_back(l.trained.curves.back().regression_loss);
    reg_rand.push_back(r.trained.curves.back().regression_loss);
    loc_luab.push_back(l.trained.curves.back().val_localization);
    loc_rand.push_back(r.trained.curves.back().val_localization);
    gap_luab.push_back(l.report.bg_gap);
    gap_base.push_back(b.report.bg_gap);
    std::printf("  seed %d: reg luab %.4f rand %.4f | val loc luab %.3f rand %.3f | bg_gap luab %.3f baseline %.3f\n",
                seed, reg_luab.back(), reg_rand.back(), loc_luab.back(), loc_rand.back(), gap_luab.back(),
                gap_base.back());
    std::fflush(stdout);
  }

  auto count = [&](auto pred) {
    int n = 0;
    for (int s = 0; s < seeds; ++s) n += pred(s) ? 1 : 0;
    return n;
  };
  auto list = [&](const std::vector<double>& a, const std::vector<double>& b, const char* f) {
    std::string s;
    for (int i = 0; i < seeds; ++i) s += (i ? ", " : "") + fmt(f, a[i], b[i]);
    return s;
  };
  const int a = count([&](int s) { return reg_luab[s] < reg_rand[s]; });
  report("luab_a_regression_below_random", [&] {
    return Outcome{a == seeds, fmt("%d/%d seeds (luab/rand: ", a, seeds) + list(reg_luab, reg_rand, "%.4f/%.4f") + ")"};
  });
  const int b = count([&](int s) { return loc_luab[s] - loc_rand[s] >= 0.15; });
  report("luab_b_localization_beats_random_by_15pts", [&] {
    return Outcome{b == seeds, fmt("%d/%d seeds (luab/rand: ", b, seeds) + list(loc_luab, loc_rand, "%.3f/%.3f") + ")"};
  });
  const int c = count([&](int s) { return gap_luab[s] < gap_base[s]; });
  report("luab_c_bg_gap_below_lambda0", [&] {
    return Outcome{c >= 4 * seeds / 5,
                   fmt("%d/%d seeds (luab/baseline: ", c, seeds) + list(gap_luab, gap_base, "%.3f/%.3f") + ")"};
  });

  luab::ExperimentConfig multi;
  multi.labels = luab::LabelMode::Multi;
  multi.loss.lambda = 5.0;
  std::vector<double> vavg_l, vavg_b, vmin_l, vmin_b;
  for (int seed = 0; seed < seeds; ++seed) {
    const auto data = luab::make_experiment_data(multi, seed);
    std::map<luab::Arm, ArmRun> runs;
    for (auto arm : {luab::Arm::Luab, luab::Arm::Baseline}) {
      auto cfg = multi;
      cfg.arm = arm;
      runs[arm] = timed_arm(cfg, data, seed);
      auto& w = worst_cpu[std::string(luab::to_string(arm)) + "-multi"];
      w = std::max(w, runs[arm].cpu);
    }
    const auto& l = *runs[luab::Arm::Luab].result.report.v;
    const auto& bl = *runs[luab::Arm::Baseline].result.report.v;
    vavg_l.push_back(l.v_avg);
    vavg_b.push_back(bl.v_avg);
    vmin_l.push_back(l.v_min);
    vmin_b.push_back(bl.v_min);
    std::printf("  multi seed %d: V_avg luab %.4f baseline %.4f | V_min luab %.4f baseline %.4f\n", seed, l.v_avg,
                bl.v_avg, l.v_min, bl.v_min);
    std::fflush(stdout);
  }
  const int d = count([&](int s) { return vavg_l[s] <= vavg_b[s] && vmin_l[s] <= vmin_b[s]; });
  report("luab_d_multilabel_v_metrics_not_above_baseline", [&] {
    return Outcome{d >= 4 * seeds / 5, fmt("%d/%d seeds with both V_avg and V_min at or below baseline", d, seeds)};
  });

  report("luab_cpu_budget_per_arm", [&] {
    bool ok = true;
    std::string s;
    for (const auto& [arm, t] : worst_cpu) {
      ok = ok && t <= kCpuLimit;
      s += (s.empty() ? "" : ", ") + fmt("%s %.0f s", arm.c_str(), t);
    }
    return Outcome{ok, "worst CPU per run: " + s + fmt(" (limit %.0f s)", kCpuLimit)};
  });
}

}  // namespace

int main(int argc, char** argv) {
  mallopt(M_MMAP_THRESHOLD, 256 << 20);
  mallopt(M_TRIM_THRESHOLD, 512 << 20);
  CLI::App app{"abkit acceptance checks"};
  std::string group = "core";
  int seeds = 5;
  app.add_option("--group", group)->check(CLI::IsMember({"core", "luab", "all"}));
  app.add_option("--seeds", seeds)->check(CLI::Range(1, 100));
  CLI11_PARSE(app, argc, argv);

  const fs::path work = fs::temp_directory_path() / ("abkit-acceptance-" + std::to_string(::getpid()));
  fs::create_directories(work);
  if (group == "core" || group == "all") {
    report("parity_invariant", parity_invariant);
    report("qc_exactness", qc_exactness);
    report("analytics_oracle_equivalence", analytics_oracles);
    report("sigma_sweep_sanity", sigma_sweep);
    report("gradient_checks", gradient_checks);
    report("attentive_pooling_limits", attentive_limits);
    report("determinism", [&] { return determinism(work / "det"); });
    report("service_replay", [&] { return service_replay(work / "replay"); });
  }
  if (group == "luab" || group == "all") luab_group(seeds);
  fs::remove_all(work);
  std::printf("%s: %d failing\n", failures == 0 ? "ALL PASS" : "SOME FAIL", failures);
  return failures == 0 ? 0 : 1;
}
