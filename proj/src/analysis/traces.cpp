#include <algorithm>
#include <cmath>

#include "abkit/analysis/stats.hpp"
#include "abkit/byproduct/extract.hpp"
#include "abkit/error.hpp"

namespace abkit::analysis {

using byproduct::TracePoint;

std::string_view to_string(QuantileMode mode) {
  switch (mode) {
    case QuantileMode::LastN: return "lastN";
    case QuantileMode::TraceQuantile: return "traceQuantile";
    case QuantileMode::TimeQuantile: return "timeQuantile";
  }
  return "traceQuantile";
}

namespace {

// Pointer samples from image entry up to the final click, ending with the click.
std::vector<TracePoint> trace_to_click(const ImageNetRecord& r) {
  const TracePoint& click = r.selectedRecord.back();
  std::vector<TracePoint> trace;
  for (const auto& p : r.mouseTracking) {
    if (p.t <= click.t) trace.push_back(p);
  }
  trace.push_back(click);
  return trace;
}

const TracePoint& at_time(const std::vector<TracePoint>& trace, double t) {
  // Last sample at or before t.
  std::size_t best = 0;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (static_cast<double>(trace[i].t) <= t) best = i;
  }
  return trace[best];
}

}  // namespace

QuantileCurve trace_quantile_accuracy(std::span<const ImageNetRecord> records, const GroundTruth& gt,
                                      QuantileMode mode, int bins) {
  const int min_bins = mode == QuantileMode::LastN ? 1 : 2;
  if (bins < min_bins) throw Error(ErrorCode::InvalidArgument, "too few bins");

  QuantileCurve curve;
  curve.mode = mode;
  curve.positions.resize(bins);
  for (int b = 0; b < bins; ++b) {
    curve.positions[b] = mode == QuantileMode::LastN ? b : static_cast<double>(b) / (bins - 1);
  }
  std::vector<std::size_t> hits(bins, 0);
  curve.counts.assign(bins, 0);

  for (const auto& r : records) {
    if (!byproduct::extract_final_click(r)) continue;
    auto it = gt.find(r.image_id);
    if (it == gt.end()) continue;
    const auto instances = it->second.of_category(r.class_id);
    if (instances.empty()) continue;
    auto inside = [&](const TracePoint& p) {
      return std::any_of(instances.begin(), instances.end(),
                         [&](const Instance* inst) { return inst->box.contains(p.x, p.y); });
    };

    const auto trace = trace_to_click(r);
    const std::size_t n = trace.size();
    for (int b = 0; b < bins; ++b) {
      const TracePoint* p = nullptr;
      switch (mode) {
        case QuantileMode::LastN:
          if (static_cast<std::size_t>(b) < n) p = &trace[n - 1 - b];
          break;
        case QuantileMode::TraceQuantile: {
          const auto idx = static_cast<std::size_t>(std::llround(curve.positions[b] * (n - 1)));
          p = &trace[idx];
          break;
        }
        case QuantileMode::TimeQuantile: {
          const double t0 = static_cast<double>(trace.front().t);
          const double t1 = static_cast<double>(trace.back().t);
          p = b == bins - 1 ? &trace.back() : &at_time(trace, t0 + curve.positions[b] * (t1 - t0));
          break;
        }
      }
      if (p == nullptr) continue;
      ++curve.counts[b];
      hits[b] += inside(*p) ? 1 : 0;
    }
  }

  if (curve.counts.back() == 0 && curve.counts.front() == 0) {
    throw Error(ErrorCode::EmptyInput, "no selected records with ground-truth boxes");
  }
  curve.accuracy.resize(bins);
  for (int b = 0; b < bins; ++b) {
    curve.accuracy[b] = curve.counts[b] == 0 ? 0.0 : static_cast<double>(hits[b]) / curve.counts[b];
  }
  return curve;
}

}  // namespace abkit::analysis
