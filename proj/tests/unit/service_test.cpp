#include <gtest/gtest.h>

#include <filesystem>
#include <httplib.h>
#include <set>
#include <thread>

#include "abkit/byproduct/codec.hpp"
#include "abkit/error.hpp"
#include "abkit/service/corpus.hpp"
#include "abkit/service/hit.hpp"
#include "abkit/service/http.hpp"
#include "abkit/service/session.hpp"
#include "abkit/service/simulate.hpp"
#include "abkit/service/store.hpp"

using namespace abkit;
using namespace abkit::service;
namespace fs = std::filesystem;

namespace {

CandidatePool make_pool(int seeds = kSeedSlotsPerHit, int distractors = kDistractorSlotsPerHit) {
  CandidatePool p;
  p.class_id = "n02085620";
  p.description = "Chihuahua";
  for (int i = 0; i < seeds; ++i) p.seed_images.push_back({"s" + std::to_string(i), "/img/s" + std::to_string(i)});
  for (int i = 0; i < distractors; ++i)
    p.distractor_images.push_back({"d" + std::to_string(i), "/img/d" + std::to_string(i)});
  return p;
}

TaggingHit make_tagging_hit(const std::string& id) {
  std::vector<ImageRef> images;
  for (int i = 0; i < kTaggingPages; ++i) images.push_back({std::to_string(5000 + i), "/img/" + std::to_string(i)});
  return assemble_tagging_hit(images, id);
}

// Pixel position of a normalized point inside a slot.
std::pair<double, double> at(const Slot& s, double x, double y) {
  return {s.position.x + x * s.width, s.position.y + y * s.height};
}

Event move(int page, std::int64_t t, const Slot& s, double x, double y) {
  auto [px, py] = at(s, x, y);
  Event e;
  e.page_idx = page;
  e.t = t;
  e.kind = EventKind::Move;
  e.slot = s.index;
  e.px = px;
  e.py = py;
  return e;
}

Event click(int page, std::int64_t t, const Slot& s, double x, double y) {
  auto e = move(page, t, s, x, y);
  e.kind = EventKind::Click;
  return e;
}

fs::path temp_dir(const std::string& name) {
  auto d = fs::temp_directory_path() / ("abkit-test-" + name + "-" + std::to_string(::getpid()));
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST(HitAssembly, TenPagesOfFortyEightWithOneInFourSeeds) {
  const auto hit = assemble_browsing_hit(make_pool(), 7, "A");
  ASSERT_EQ(hit.pages.size(), static_cast<std::size_t>(kBrowsingPages));
  std::set<std::string> images;
  int seeds = 0;
  for (const auto& p : hit.pages) {
    ASSERT_EQ(p.slots.size(), static_cast<std::size_t>(kSlotsPerPage));
    for (const auto& s : p.slots) {
      images.insert(s.image.image_id);
      seeds += s.seed ? 1 : 0;
    }
  }
  EXPECT_EQ(images.size(), 480u);
  EXPECT_EQ(seeds, kSeedSlotsPerHit);
}

TEST(HitAssembly, DeterministicInSeed) {
  EXPECT_EQ(to_json(Hit(assemble_browsing_hit(make_pool(), 7, "A"))).dump(),
            to_json(Hit(assemble_browsing_hit(make_pool(), 7, "A"))).dump());
  EXPECT_NE(to_json(Hit(assemble_browsing_hit(make_pool(), 7, "A"))).dump(),
            to_json(Hit(assemble_browsing_hit(make_pool(), 8, "A"))).dump());
}

TEST(HitAssembly, InsufficientPoolRejected) {
  try {
    assemble_browsing_hit(make_pool(100, 360), 1, "A");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientPool);
  }
}

TEST(HitAssembly, JsonRoundTrip) {
  const Hit b = assemble_browsing_hit(make_pool(), 3, "A");
  const Hit t = make_tagging_hit("T");
  EXPECT_EQ(to_json(hit_from_json(to_json(b))).dump(), to_json(b).dump());
  EXPECT_EQ(to_json(hit_from_json(to_json(t))).dump(), to_json(t).dump());
}

TEST(PageRecords, ClickedHoveredIgnored) {
  const auto hit = assemble_browsing_hit(make_pool(), 1, "A");
  const auto& slots = hit.pages[0].slots;
  std::vector<Event> ev = {move(0, 100, slots[0], 0.4, 0.4), click(0, 150, slots[0], 0.5, 0.5),
                           move(0, 200, slots[1], 0.2, 0.3)};
  Event submit;
  submit.page_idx = 0;
  submit.t = 300;
  submit.kind = EventKind::Submit;
  submit.worker_id = "abc";
  ev.push_back(submit);
  const auto recs = build_page_records(hit, 0, ev);
  ASSERT_EQ(recs.imagenet.size(), 2u);
  EXPECT_TRUE(recs.imagenet[0].selected);
  EXPECT_EQ(recs.imagenet[0].selectedRecord.size(), 1u);
  EXPECT_FALSE(recs.imagenet[1].selected);
  EXPECT_FALSE(recs.imagenet[1].mouseTracking.empty());
  RecordOptions all;
  all.emit_empty_records = true;
  EXPECT_EQ(build_page_records(hit, 0, ev, all).imagenet.size(), static_cast<std::size_t>(kSlotsPerPage));
}

TEST(Service, DuplicateBatchChangesNothing) {
  AnnotationService svc;
  const auto hit = assemble_browsing_hit(make_pool(), 1, "A");
  svc.register_hit(hit);
  const auto& s = hit.pages[0].slots[3];
  std::vector<Event> batch = {move(0, 10, s, 0.1, 0.1), move(0, 20, s, 0.2, 0.2), click(0, 30, s, 0.2, 0.2)};
  const auto first = svc.ingest_events("A", batch);
  EXPECT_EQ(first.accepted, 3u);
  const auto again = svc.ingest_events("A", batch);
  EXPECT_EQ(again.accepted, 0u);
  EXPECT_EQ(again.high_water_mark, first.high_water_mark);
  EXPECT_EQ(svc.event_log("A").size(), 3u);
}

TEST(Service, FailingBatchIsAtomic) {
  AnnotationService svc;
  const auto hit = assemble_browsing_hit(make_pool(), 1, "A");
  svc.register_hit(hit);
  const auto& s = hit.pages[0].slots[0];
  svc.ingest_events("A", std::vector<Event>{move(0, 100, s, 0.5, 0.5)});
  std::vector<Event> bad = {move(0, 110, s, 0.5, 0.6), move(0, 50, s, 0.5, 0.7)};
  try {
    svc.ingest_events("A", bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonMonotoneTimestamp);
  }
  EXPECT_EQ(svc.event_log("A").size(), 1u);
}

TEST(Service, PointerRateCapPerSlot) {
  AnnotationService svc;
  const auto hit = assemble_browsing_hit(make_pool(), 1, "A");
  svc.register_hit(hit);
  const auto& s = hit.pages[0].slots[0];
  std::vector<Event> burst;
  for (int i = 0; i < 120; ++i) burst.push_back(move(0, 1000 + i * 8, s, 0.3 + 0.004 * i, 0.5));
  svc.ingest_events("A", burst);
  EXPECT_EQ(svc.event_log("A").size(), 60u);
}

TEST(Service, SubmissionLifecycleAndCodes) {
  AnnotationService svc;
  const auto hit = assemble_browsing_hit(make_pool(), 1, "A");
  svc.register_hit(hit);
  EXPECT_THROW(svc.issue_completion_code("A"), Error);
  const auto& s = hit.pages[0].slots[0];
  svc.ingest_events("A", std::vector<Event>{click(0, 10, s, 0.5, 0.5)});
  const auto recs = svc.finalize_page("A", 0, {20, "WORKER1"});
  ASSERT_EQ(recs.imagenet.size(), 1u);
  EXPECT_NE(recs.imagenet[0].worker_id, "WORKER1");
  try {
    svc.finalize_page("A", 0, {30, "WORKER1"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PageAlreadySubmitted);
  }
  EXPECT_THROW(svc.ingest_events("A", std::vector<Event>{click(0, 40, s, 0.5, 0.5)}), Error);
  const auto code = svc.issue_completion_code("A");
  EXPECT_TRUE(svc.verify_completion_code("A", code));
  EXPECT_TRUE(completion_code_valid(svc.options().secret, "A", code));
  EXPECT_FALSE(svc.verify_completion_code("A", "0000000000000000"));
  svc.mark_rejected("A");
  try {
    svc.ingest_events("A", std::vector<Event>{click(1, 50, hit.pages[1].slots[0], 0.5, 0.5)});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ClosedAssignment);
  }
}

TEST(Service, UnknownAssignment) {
  AnnotationService svc;
  try {
    svc.event_log("nope");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownAssignment);
  }
}

TEST(Service, ReplayReproducesRecordsByteForByte) {
  AnnotationService svc;
  const auto hit = assemble_browsing_hit(make_pool(), 4, "A");
  svc.register_hit(hit);
  for (const auto& page : simulate_browsing(hit, {}, 99)) {
    svc.ingest_events("A", page.events);
    svc.finalize_page("A", page.page_idx, {page.submit_t, "W"});
  }
  EXPECT_FALSE(svc.records("A").empty());
  EXPECT_EQ(svc.replay_records("A"), svc.records("A"));
}

TEST(Service, TaggingIconLegalityEnforced) {
  AnnotationService svc;
  const auto hit = make_tagging_hit("T");
  svc.register_hit(hit);
  const auto& s = hit.pages[0].slots[0];
  Event add = move(0, 10, s, 0.5, 0.5);
  add.kind = EventKind::Action;
  add.action = byproduct::ActionType::Add;
  add.category = "dog";
  svc.ingest_events("T", std::vector<Event>{add});
  Event again = add;
  again.t = 20;
  EXPECT_THROW(svc.ingest_events("T", std::vector<Event>{again}), RecordError);
  Event remove_cat = add;
  remove_cat.t = 30;
  remove_cat.action = byproduct::ActionType::Remove;
  remove_cat.category = "cat";
  EXPECT_THROW(svc.ingest_events("T", std::vector<Event>{remove_cat}), RecordError);
}

TEST(Service, PersistsAndReloads) {
  const auto dir = temp_dir("persist");
  const auto hit = assemble_browsing_hit(make_pool(), 2, "A");
  std::vector<std::string> before;
  {
    ServiceOptions o;
    o.data_dir = dir;
    AnnotationService svc(o);
    svc.register_hit(hit);
    const auto pages = simulate_browsing(hit, {}, 5);
    for (int p = 0; p < 3; ++p) {
      svc.ingest_events("A", pages[p].events);
      svc.finalize_page("A", pages[p].page_idx, {pages[p].submit_t, "W"});
    }
    before = svc.records("A");
  }
  ServiceOptions o;
  o.data_dir = dir;
  AnnotationService svc(o);
  svc.load();
  EXPECT_EQ(svc.records("A"), before);
  EXPECT_EQ(svc.submitted_pages("A").size(), 3u);
  EXPECT_EQ(svc.replay_records("A"), before);
  fs::remove_all(dir);
}

TEST(Http, EndToEndPageEventsSubmitCode) {
  AnnotationService svc;
  const auto hit = assemble_browsing_hit(make_pool(), 1, "A");
  svc.register_hit(hit);
  HttpServer server(svc);
  const int port = server.bind("127.0.0.1", 0);
  ASSERT_GT(port, 0);
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  httplib::Client cli("127.0.0.1", port);

  auto page = cli.Get("/hit/A/page/0");
  ASSERT_TRUE(page);
  EXPECT_EQ(page->status, 200);
  EXPECT_EQ(nlohmann::json::parse(page->body)["slots"].size(), static_cast<std::size_t>(kSlotsPerPage));

  const auto& s = hit.pages[0].slots[2];
  nlohmann::ordered_json body;
  body["events"] = nlohmann::ordered_json::array({to_json(move(0, 5, s, 0.4, 0.4)), to_json(click(0, 9, s, 0.5, 0.5))});
  auto ack = cli.Post("/hit/A/events", body.dump(), "application/json");
  ASSERT_TRUE(ack);
  EXPECT_EQ(ack->status, 200);
  EXPECT_EQ(nlohmann::json::parse(ack->body)["accepted"], 2);
  auto dup = cli.Post("/hit/A/events", body.dump(), "application/json");
  EXPECT_EQ(nlohmann::json::parse(dup->body)["accepted"], 0);

  auto sub = cli.Post("/hit/A/page/0/submit", R"({"t": 20, "worker_id": "W9"})", "application/json");
  ASSERT_TRUE(sub);
  EXPECT_EQ(sub->status, 200);
  const auto records = nlohmann::json::parse(sub->body)["records"];
  ASSERT_EQ(records.size(), 1u);

  auto resub = cli.Post("/hit/A/page/0/submit", R"({"t": 30, "worker_id": "W9"})", "application/json");
  EXPECT_EQ(resub->status, http_status(ErrorCode::PageAlreadySubmitted));
  EXPECT_EQ(nlohmann::json::parse(resub->body)["error"], "PageAlreadySubmitted");

  auto code = cli.Get("/hit/A/code");
  ASSERT_TRUE(code);
  EXPECT_TRUE(svc.verify_completion_code("A", nlohmann::json::parse(code->body)["code"]));
  EXPECT_EQ(cli.Get("/hit/missing/page/0")->status, http_status(ErrorCode::UnknownAssignment));

  server.stop();
  t.join();
}

TEST(Corpus, SyntheticCampaignRecordsValidate) {
  CorpusOptions o;
  o.hits = 2;
  o.seed = 11;
  const auto b = synthetic_browsing_corpus(o);
  EXPECT_EQ(b.hits.size(), 2u);
  for (const auto& line : b.records) EXPECT_NO_THROW(byproduct::parse_imagenet_record(line));
  const auto t = synthetic_tagging_corpus(o);
  for (const auto& line : t.records) EXPECT_NO_THROW(byproduct::parse_coco_record(line));
  EXPECT_EQ(t.records.size(), 2u * kTaggingPages);
  EXPECT_EQ(synthetic_browsing_corpus(o).records, b.records);
}
