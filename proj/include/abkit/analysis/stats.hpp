#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "abkit/analysis/ground_truth.hpp"
#include "abkit/byproduct/types.hpp"

namespace abkit::analysis {

using byproduct::CocoRecord;
using byproduct::ImageNetRecord;
using byproduct::ProxyPoint;

// A point paired with every box of its image's labelled class; it is correct
// when it lands in any of them.
struct LocatedPoint {
  ProxyPoint point;
  std::vector<GtBox> boxes;
};

// Fraction of points inside (or on the edge of) one of their boxes.
// Throws Error(EmptyInput) on an empty list.
double click_localization_accuracy(std::span<const LocatedPoint> points);

// Final clicks of selected records whose image has boxes for the record's
// class. Records outside that subset are skipped.
std::vector<LocatedPoint> final_click_points(std::span<const ImageNetRecord> records,
                                             const GroundTruth& gt);

// Fraction of final icon placements that land on an instance of the icon's
// category (mask when available, box otherwise). Placements of categories
// absent from the image count as misses. Throws Error(MissingGroundTruth) when
// an image is absent from gt and Error(EmptyInput) when there are no icons.
double icon_placement_precision(std::span<const CocoRecord> records, const GroundTruth& gt);

inline constexpr double kUniformSigma = std::numeric_limits<double>::infinity();

// Image-agnostic click model: clicks ~ N(image centre, sigma^2) clamped to the
// image, sigma in units of min(width, height); infinity means uniform clicks.
struct SweepConfig {
  std::vector<double> sigmas;  // ascending, may end with kUniformSigma
  int samples_per_image = 1000;
  std::uint64_t seed = 0;
};

struct SweepImage {
  int width = 1;
  int height = 1;
  std::vector<GtBox> boxes;
};

struct SweepPoint {
  double sigma = 0.0;
  double accuracy = 0.0;
};

// Per-image Monte Carlo with one counter-based stream per (image, sigma), so
// results do not depend on evaluation order. sigma == 0 is evaluated exactly.
std::vector<SweepPoint> gaussian_click_sweep(std::span<const SweepImage> images,
                                             const SweepConfig& cfg);

std::vector<SweepImage> sweep_images(const GroundTruth& gt);

enum class QuantileMode { LastN, TraceQuantile, TimeQuantile };

std::string_view to_string(QuantileMode mode);

// One accuracy per bin. For TraceQuantile/TimeQuantile, bin b holds the trace
// position at fraction b/(bins-1) of the way from image entry to the final
// click (by index or by time); the last bin is the click itself. For LastN,
// bin n holds the n-th sample before the click (n = 0 is the click); traces
// too short for a bin are left out of it.
struct QuantileCurve {
  QuantileMode mode = QuantileMode::TraceQuantile;
  std::vector<double> positions;
  std::vector<double> accuracy;
  std::vector<std::size_t> counts;
};

QuantileCurve trace_quantile_accuracy(std::span<const ImageNetRecord> records, const GroundTruth& gt,
                                      QuantileMode mode, int bins);

// Clicks in box-relative coordinates on a (bins+2)^2 grid; the outer ring
// collects clicks outside the box. Cell (ix, iy) with 1 <= ix, iy <= bins is
// inside the box; y grows downwards as in the image.
struct RelativeHistogram {
  int bins = 0;
  std::vector<std::size_t> counts;

  int side() const { return bins + 2; }
  std::size_t at(int ix, int iy) const { return counts[static_cast<std::size_t>(iy) * side() + ix]; }
  std::size_t total() const;
};

struct BoxedClick {
  ProxyPoint point;
  GtBox box;
};

// Throws Error(DegenerateBox) for zero-area boxes.
RelativeHistogram relative_click_histogram(std::span<const BoxedClick> clicks, int bins);

// Action-type sequences ("add", "add-move", ...) of icons still placed at the
// end of each record. Counts sum to the number of live icons.
std::map<std::string, std::size_t> action_sequence_histogram(std::span<const CocoRecord> records);

// Box-area fraction bin edges: [0, .2^2, .4^2, .6^2, .8^2, 1].
inline constexpr std::array<double, 6> kSizeBinEdges = {0.0, 0.04, 0.16, 0.36, 0.64, 1.0};
int size_bin(double area_fraction);

struct CategoryRecall {
  std::string category;
  std::size_t images = 0;     // images containing the category
  std::size_t annotated = 0;  // of those, images with a live icon for it
  double recall = 0.0;
  double mean_area = 0.0;
  double mean_size_bin = 0.0;
};

struct SizeBinRecall {
  int bin = 0;
  std::size_t instances = 0;
  std::size_t annotated = 0;
  double recall = 0.0;
};

struct RecallBySize {
  std::vector<CategoryRecall> categories;
  std::vector<SizeBinRecall> bins;
};

// Object size per (image, category) is the largest instance box area.
// Throws Error(MissingGroundTruth) when a record's image is absent from gt.
RecallBySize recall_by_category_and_size(std::span<const CocoRecord> records, const GroundTruth& gt);

double pearson_correlation(std::span<const double> a, std::span<const double> b);

}  // namespace abkit::analysis
