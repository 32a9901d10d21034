#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "abkit/analysis/ground_truth.hpp"
#include "abkit/analysis/stats.hpp"

namespace abkit::analysis {

enum class Stat { Clicks, Sweep, Quantiles, Bias, Actions, RecallSize };

Stat parse_stat(const std::string& name);
std::string_view to_string(Stat stat);

struct AnalysisParams {
  std::uint64_t seed = 0;
  int samples_per_image = 1000;
  std::vector<double> sigmas = {0.0, 0.05, 0.1, 0.2, 0.3, 0.5, 1.0, kUniformSigma};
  int quantile_bins = 11;
  int last_n = 16;
  int bias_bins = 10;
};

struct AnalysisInputs {
  std::vector<ImageNetRecord> imagenet;
  std::vector<CocoRecord> coco;
  GroundTruth gt;
};

// Detects the record interface from the first non-empty line.
AnalysisInputs load_analysis_inputs(const std::string& records_path, const std::string& gt_path,
                                    bool strict);

// Computes one statistic, writes `<stat>.csv` (plus extra tables for some
// stats) and `<stat>.json` under out_dir, and returns the JSON summary.
nlohmann::ordered_json run_analysis(const AnalysisInputs& inputs, Stat stat, const AnalysisParams& params,
                                    const std::filesystem::path& out_dir);

}  // namespace abkit::analysis
