#include <algorithm>
#include <cmath>
#include <set>

#include "abkit/analysis/stats.hpp"
#include "abkit/byproduct/extract.hpp"
#include "abkit/error.hpp"

namespace abkit::analysis {

std::map<std::string, std::size_t> action_sequence_histogram(std::span<const CocoRecord> records) {
  std::map<std::string, std::size_t> hist;
  for (const auto& r : records) {
    std::map<std::string, std::string> sequences;
    std::map<std::string, bool> live;
    for (const auto& a : r.actionHistories) {
      auto& seq = sequences[a.category];
      if (!seq.empty()) seq += '-';
      seq += byproduct::to_string(a.action);
      live[a.category] = a.action != byproduct::ActionType::Remove;
    }
    for (const auto& [category, seq] : sequences) {
      if (live[category]) ++hist[seq];
    }
  }
  return hist;
}

int size_bin(double area) {
  for (int b = 1; b < static_cast<int>(kSizeBinEdges.size()) - 1; ++b) {
    if (area < kSizeBinEdges[b]) return b - 1;
  }
  return static_cast<int>(kSizeBinEdges.size()) - 2;
}

RecallBySize recall_by_category_and_size(std::span<const CocoRecord> records, const GroundTruth& gt) {
  struct Acc {
    std::size_t images = 0;
    std::size_t annotated = 0;
    double area_sum = 0.0;
    double bin_sum = 0.0;
  };
  std::map<std::string, Acc> per_category;
  std::vector<SizeBinRecall> bins(kSizeBinEdges.size() - 1);
  for (std::size_t b = 0; b < bins.size(); ++b) bins[b].bin = static_cast<int>(b);

  for (const auto& r : records) {
    auto it = gt.find(std::to_string(r.image_id));
    if (it == gt.end()) {
      throw Error(ErrorCode::MissingGroundTruth, "image " + std::to_string(r.image_id));
    }
    const auto placed = byproduct::extract_final_adds(r);
    for (const auto& category : it->second.categories()) {
      double area = 0.0;
      for (const auto* inst : it->second.of_category(category)) area = std::max(area, inst->box.area());
      const int bin = size_bin(area);
      const bool annotated = placed.contains(category);
      auto& acc = per_category[category];
      ++acc.images;
      acc.annotated += annotated ? 1 : 0;
      acc.area_sum += area;
      acc.bin_sum += bin;
      ++bins[bin].instances;
      bins[bin].annotated += annotated ? 1 : 0;
    }
  }

  RecallBySize out;
  for (const auto& [category, acc] : per_category) {
    CategoryRecall c;
    c.category = category;
    c.images = acc.images;
    c.annotated = acc.annotated;
    c.recall = static_cast<double>(acc.annotated) / acc.images;
    c.mean_area = acc.area_sum / acc.images;
    c.mean_size_bin = acc.bin_sum / acc.images;
    out.categories.push_back(c);
  }
  for (auto& b : bins) b.recall = b.instances == 0 ? 0.0 : static_cast<double>(b.annotated) / b.instances;
  out.bins = std::move(bins);
  return out;
}

double pearson_correlation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "correlation needs two equal-length series of length >= 2");
  }
  const double n = static_cast<double>(a.size());
  double ma = 0.0;
  double mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double cov = 0.0;
  double va = 0.0;
  double vb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cov += (a[i] - ma) * (b[i] - mb);
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
  }
  if (va == 0.0 || vb == 0.0) return 0.0;
  return cov / std::sqrt(va * vb);
}

}  // namespace abkit::analysis
