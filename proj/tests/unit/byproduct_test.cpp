#include <gtest/gtest.h>

#include <sstream>

#include "abkit/byproduct/anonymize.hpp"
#include "abkit/byproduct/codec.hpp"
#include "abkit/byproduct/extract.hpp"
#include "abkit/error.hpp"
#include "abkit/rng.hpp"

using namespace abkit;
using namespace abkit::byproduct;

namespace {

ImageNetRecord sample_imagenet() {
  ImageNetRecord r;
  r.image_id = "n01440764_18";
  r.class_id = "n01440764";
  r.selected = true;
  r.selectedRecord = {{0.25, 0.5, 1200}};
  r.mouseTracking = {{0.1, 0.2, 1000}, {0.2, 0.4, 1100}, {0.25, 0.5, 1190}};
  r.imagePosition = {120, 40};
  r.imageWidth = 160;
  r.imageHeight = 120;
  r.worker_id = "0a1b2c3d4e5f6071";
  r.assignment_id = "A1";
  r.page_idx = 2;
  return r;
}

CocoRecord sample_coco() {
  CocoRecord r;
  r.image_id = 139;
  r.actionHistories = {{ActionType::Add, "dog", {0.3, 0.4, 100}},
                       {ActionType::Move, "dog", {0.35, 0.45, 200}},
                       {ActionType::Add, "cat", {0.7, 0.6, 300}},
                       {ActionType::Remove, "cat", {0.7, 0.6, 400}}};
  r.mouseTracking = {{0.1, 0.1, 50}, {0.3, 0.4, 90}};
  r.categoryHistories = {{"animal", 60}};
  r.usingKeyboard = false;
  r.timeSpent = 4200;
  r.page_idx = 0;
  r.assignment_id = "T1";
  r.worker_id = "ffeeddccbbaa9988";
  return r;
}

}  // namespace

TEST(ImageNetCodec, RoundTripIsByteExact) {
  const auto line = serialize(sample_imagenet());
  const auto parsed = parse_imagenet_record(line);
  EXPECT_EQ(parsed, sample_imagenet());
  EXPECT_EQ(serialize(parsed), line);
}

TEST(CocoCodec, RoundTripIsByteExact) {
  const auto line = serialize(sample_coco());
  const auto parsed = parse_coco_record(line);
  EXPECT_EQ(parsed, sample_coco());
  EXPECT_EQ(serialize(parsed), line);
}

TEST(ImageNetCodec, ParityViolationCarriesFieldPath) {
  auto j = to_json(sample_imagenet());
  j["selected"] = false;
  try {
    parse_imagenet_record(j.dump());
    FAIL() << "expected a parity violation";
  } catch (const RecordError& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvariantViolation);
    EXPECT_EQ(e.field_path(), "selected");
  }
}

TEST(ImageNetCodec, MissingFieldIsMalformed) {
  auto j = to_json(sample_imagenet());
  j.erase("imageWidth");
  try {
    parse_imagenet_record(j.dump());
    FAIL();
  } catch (const RecordError& e) {
    EXPECT_EQ(e.code(), ErrorCode::MalformedRecord);
    EXPECT_NE(e.field_path().find("imageWidth"), std::string::npos);
  }
}

TEST(ImageNetCodec, StrictRejectsUnknownFieldsLenientKeepsThem) {
  auto j = to_json(sample_imagenet());
  j["hitTypeId"] = "legacy";
  EXPECT_THROW(parse_imagenet_record(j.dump()), RecordError);
  ParseOptions lenient;
  lenient.strict = false;
  const auto r = parse_imagenet_record(j.dump(), lenient);
  EXPECT_EQ(r.extra.at("hitTypeId"), "legacy");
  EXPECT_EQ(serialize(r), j.dump());
}

TEST(ImageNetCodec, FieldMappingRenamesUpstreamKeys) {
  auto j = to_json(sample_imagenet());
  j["selected_record"] = j["selectedRecord"];
  j.erase("selectedRecord");
  ParseOptions opts;
  opts.mapping = {{"selected_record", "selectedRecord"}};
  EXPECT_EQ(parse_imagenet_record(j.dump(), opts).selectedRecord, sample_imagenet().selectedRecord);
}

TEST(ImageNetCodec, DecreasingTimestampsRejected) {
  auto r = sample_imagenet();
  r.mouseTracking[2].t = 900;
  EXPECT_THROW(validate(r), RecordError);
}

TEST(CocoCodec, RemoveOfAbsentIconRejected) {
  auto r = sample_coco();
  r.actionHistories.insert(r.actionHistories.begin(), {ActionType::Remove, "bird", {0.1, 0.1, 10}});
  EXPECT_THROW(validate(r), RecordError);
}

TEST(CocoCodec, DoubleAddRejected) {
  auto r = sample_coco();
  r.actionHistories.push_back({ActionType::Add, "dog", {0.5, 0.5, 500}});
  EXPECT_THROW(validate(r), RecordError);
}

TEST(JsonLines, LineNumberIsPrefixedAndBlankLinesSkipped) {
  std::stringstream in;
  in << serialize(sample_imagenet()) << "\n\n" << "{\"image_id\": 3}\n";
  try {
    read_imagenet_jsonl(in);
    FAIL();
  } catch (const RecordError& e) {
    EXPECT_EQ(e.field_path().rfind("line 3", 0), 0u) << e.field_path();
  }
}

TEST(Extract, FinalToggleOfSelectedImage) {
  auto r = sample_imagenet();
  r.selectedRecord = {{0.1, 0.1, 1000}, {0.2, 0.2, 1100}, {0.6, 0.7, 1200}};
  const auto p = extract_final_click(r);
  ASSERT_TRUE(p);
  EXPECT_EQ(*p, (ProxyPoint{0.6, 0.7}));
}

TEST(Extract, DeselectedImageHasNoProxy) {
  auto r = sample_imagenet();
  r.selected = false;
  r.selectedRecord = {{0.1, 0.1, 1000}, {0.2, 0.2, 1100}};
  EXPECT_FALSE(extract_final_click(r));
}

TEST(Extract, FinalAddIgnoresLaterMovesAndDropsRemoved) {
  const auto pts = extract_final_adds(sample_coco());
  ASSERT_EQ(pts.size(), 1u);
  EXPECT_EQ(pts.at("dog"), (ProxyPoint{0.3, 0.4}));
  const auto live = extract_final_adds(sample_coco(), IconPointRule::LastLivePosition);
  EXPECT_EQ(live.at("dog"), (ProxyPoint{0.35, 0.45}));
}

TEST(Extract, RemoveThenReaddUsesTheReadd) {
  auto r = sample_coco();
  r.actionHistories.push_back({ActionType::Add, "cat", {0.8, 0.8, 500}});
  EXPECT_EQ(extract_final_adds(r).at("cat"), (ProxyPoint{0.8, 0.8}));
}

TEST(Extract, NormalizePointClampsOnePixelAndRejectsFurther) {
  const auto p = normalize_point(100, 50, {100, 50}, 200, 100);
  EXPECT_EQ(p, (ProxyPoint{0.0, 0.0}));
  const auto q = normalize_point(300.5, 150.5, {100, 50}, 200, 100);
  EXPECT_EQ(q, (ProxyPoint{1.0, 1.0}));
  EXPECT_THROW(normalize_point(98, 50, {100, 50}, 200, 100), Error);
}

TEST(Anonymize, StableKeyedAndNotTheRawId) {
  const auto a = anonymize_worker_id("k1", "A2XYZ");
  EXPECT_EQ(a, anonymize_worker_id("k1", "A2XYZ"));
  EXPECT_NE(a, anonymize_worker_id("k2", "A2XYZ"));
  EXPECT_EQ(a.size(), 16u);
  EXPECT_EQ(a.find("A2XYZ"), std::string::npos);
  EXPECT_TRUE(secure_equals(a, a));
  EXPECT_FALSE(secure_equals(a, anonymize_worker_id("k1", "other")));
}

// Property: selected <=> odd number of toggles, for random click sessions.
TEST(ParityProperty, RandomClickSessionsRoundTrip) {
  for (std::uint64_t s = 0; s < 300; ++s) {
    CounterRng rng(17, s);
    auto r = sample_imagenet();
    r.selectedRecord.clear();
    const int clicks = static_cast<int>(rng.below(7));
    std::int64_t t = 2000;
    for (int c = 0; c < clicks; ++c) r.selectedRecord.push_back({rng.uniform(), rng.uniform(), t += 1 + rng.below(500)});
    r.selected = clicks % 2 == 1;
    const auto back = parse_imagenet_record(serialize(r));
    EXPECT_EQ(back.selected, back.selectedRecord.size() % 2 == 1);
    EXPECT_EQ(extract_final_click(back).has_value(), back.selected);
  }
}
