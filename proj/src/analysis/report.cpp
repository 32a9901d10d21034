#include "abkit/analysis/report.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "abkit/byproduct/codec.hpp"
#include "abkit/byproduct/extract.hpp"
#include "abkit/error.hpp"

namespace abkit::analysis {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr std::array<std::pair<Stat, std::string_view>, 6> kStatNames = {{
    {Stat::Clicks, "clicks"},
    {Stat::Sweep, "sweep"},
    {Stat::Quantiles, "quantiles"},
    {Stat::Bias, "bias"},
    {Stat::Actions, "actions"},
    {Stat::RecallSize, "recall-size"},
}};

std::string fmt(double v) {
  if (std::isinf(v)) return "inf";
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << content;
}

void require_imagenet(const AnalysisInputs& in, Stat stat) {
  if (in.imagenet.empty()) {
    throw Error(ErrorCode::EmptyInput, std::string(to_string(stat)) + " needs browsing records");
  }
}

void require_coco(const AnalysisInputs& in, Stat stat) {
  if (in.coco.empty()) {
    throw Error(ErrorCode::EmptyInput, std::string(to_string(stat)) + " needs tagging records");
  }
}

json quantile_json(const QuantileCurve& c, std::ostringstream& csv) {
  json j = json::object();
  j["mode"] = std::string(to_string(c.mode));
  j["positions"] = c.positions;
  j["accuracy"] = c.accuracy;
  j["counts"] = c.counts;
  for (std::size_t b = 0; b < c.positions.size(); ++b) {
    csv << to_string(c.mode) << ',' << fmt(c.positions[b]) << ',' << fmt(c.accuracy[b]) << ','
        << c.counts[b] << '\n';
  }
  return j;
}

}  // namespace

Stat parse_stat(const std::string& name) {
  for (const auto& [s, n] : kStatNames) {
    if (n == name) return s;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown stat '" + name + "'");
}

std::string_view to_string(Stat stat) {
  for (const auto& [s, n] : kStatNames) {
    if (s == stat) return n;
  }
  return "clicks";
}

AnalysisInputs load_analysis_inputs(const std::string& records_path, const std::string& gt_path,
                                    bool strict) {
  AnalysisInputs in;
  byproduct::ParseOptions opts;
  opts.strict = strict;
  {
    std::ifstream probe(records_path);
    if (!probe) throw Error(ErrorCode::Io, "cannot open " + records_path);
    std::string line;
    bool coco = false;
    while (std::getline(probe, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      coco = line.find("\"actionHistories\"") != std::string::npos;
      break;
    }
    if (coco) {
      in.coco = byproduct::load_coco_jsonl(records_path, opts);
    } else {
      in.imagenet = byproduct::load_imagenet_jsonl(records_path, opts);
    }
  }
  in.gt = load_ground_truth(gt_path);
  return in;
}

json run_analysis(const AnalysisInputs& in, Stat stat, const AnalysisParams& p, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  const std::string name(to_string(stat));
  json summary = json::object();
  summary["stat"] = name;
  std::ostringstream csv;

  switch (stat) {
    case Stat::Clicks: {
      if (!in.imagenet.empty()) {
        const auto points = final_click_points(in.imagenet, in.gt);
        const double acc = click_localization_accuracy(points);
        summary["interface"] = "browsing";
        summary["records"] = in.imagenet.size();
        summary["evaluated_clicks"] = points.size();
        summary["localization_accuracy"] = acc;
        csv << "metric,value\nevaluated_clicks," << points.size() << "\nlocalization_accuracy,"
            << fmt(acc) << '\n';
      } else {
        require_coco(in, stat);
        const double precision = icon_placement_precision(in.coco, in.gt);
        summary["interface"] = "tagging";
        summary["records"] = in.coco.size();
        summary["icon_precision"] = precision;
        csv << "metric,value\nicon_precision," << fmt(precision) << '\n';
      }
      break;
    }
    case Stat::Sweep: {
      const auto images = sweep_images(in.gt);
      SweepConfig cfg{p.sigmas, p.samples_per_image, p.seed};
      const auto curve = gaussian_click_sweep(images, cfg);
      csv << "sigma,accuracy\n";
      json rows = json::array();
      for (const auto& pt : curve) {
        csv << fmt(pt.sigma) << ',' << fmt(pt.accuracy) << '\n';
        rows.push_back(json{{"sigma", std::isinf(pt.sigma) ? json("inf") : json(pt.sigma)},
                            {"accuracy", pt.accuracy}});
      }
      summary["images"] = images.size();
      summary["samples_per_image"] = p.samples_per_image;
      summary["seed"] = p.seed;
      summary["curve"] = std::move(rows);
      break;
    }
    case Stat::Quantiles: {
      require_imagenet(in, stat);
      csv << "mode,position,accuracy,count\n";
      json curves = json::array();
      curves.push_back(quantile_json(
          trace_quantile_accuracy(in.imagenet, in.gt, QuantileMode::LastN, p.last_n), csv));
      curves.push_back(quantile_json(
          trace_quantile_accuracy(in.imagenet, in.gt, QuantileMode::TraceQuantile, p.quantile_bins), csv));
      curves.push_back(quantile_json(
          trace_quantile_accuracy(in.imagenet, in.gt, QuantileMode::TimeQuantile, p.quantile_bins), csv));
      summary["curves"] = std::move(curves);
      break;
    }
    case Stat::Bias: {
      std::vector<BoxedClick> clicks;
      auto add = [&](const ProxyPoint& pt, const std::vector<const Instance*>& instances) {
        if (instances.empty()) return;
        const Instance* chosen = instances.front();
        for (const auto* inst : instances) {
          if (inst->box.contains(pt.x, pt.y)) {
            chosen = inst;
            break;
          }
        }
        clicks.push_back({pt, chosen->box});
      };
      for (const auto& r : in.imagenet) {
        const auto click = byproduct::extract_final_click(r);
        auto it = in.gt.find(r.image_id);
        if (click && it != in.gt.end()) add(*click, it->second.of_category(r.class_id));
      }
      for (const auto& r : in.coco) {
        auto it = in.gt.find(std::to_string(r.image_id));
        if (it == in.gt.end()) continue;
        for (const auto& [category, pt] : byproduct::extract_final_adds(r)) {
          add(pt, it->second.of_category(category));
        }
      }
      if (clicks.empty()) throw Error(ErrorCode::EmptyInput, "no clicks with ground-truth boxes");
      const auto h = relative_click_histogram(clicks, p.bias_bins);
      csv << "ix,iy,count\n";
      for (int iy = 0; iy < h.side(); ++iy) {
        for (int ix = 0; ix < h.side(); ++ix) csv << ix << ',' << iy << ',' << h.at(ix, iy) << '\n';
      }
      summary["bins"] = h.bins;
      summary["clicks"] = h.total();
      std::size_t outside = 0;
      for (int iy = 0; iy < h.side(); ++iy) {
        for (int ix = 0; ix < h.side(); ++ix) {
          const bool ring = ix == 0 || iy == 0 || ix == h.side() - 1 || iy == h.side() - 1;
          if (ring) outside += h.at(ix, iy);
        }
      }
      summary["outside_box"] = outside;
      break;
    }
    case Stat::Actions: {
      require_coco(in, stat);
      const auto hist = action_sequence_histogram(in.coco);
      std::size_t total = 0;
      for (const auto& [seq, n] : hist) total += n;
      std::vector<std::pair<std::string, std::size_t>> rows(hist.begin(), hist.end());
      std::stable_sort(rows.begin(), rows.end(),
                       [](const auto& a, const auto& b) { return a.second > b.second; });
      csv << "sequence,count,fraction\n";
      json seqs = json::array();
      for (const auto& [seq, n] : rows) {
        const double frac = static_cast<double>(n) / total;
        csv << seq << ',' << n << ',' << fmt(frac) << '\n';
        seqs.push_back(json{{"sequence", seq}, {"count", n}, {"fraction", frac}});
      }
      summary["live_icons"] = total;
      summary["sequences"] = std::move(seqs);
      break;
    }
    case Stat::RecallSize: {
      require_coco(in, stat);
      const auto result = recall_by_category_and_size(in.coco, in.gt);
      csv << "category,images,annotated,recall,mean_area,mean_size_bin\n";
      std::vector<double> sizes;
      std::vector<double> recalls;
      for (const auto& c : result.categories) {
        csv << c.category << ',' << c.images << ',' << c.annotated << ',' << fmt(c.recall) << ','
            << fmt(c.mean_area) << ',' << fmt(c.mean_size_bin) << '\n';
        sizes.push_back(c.mean_size_bin);
        recalls.push_back(c.recall);
      }
      std::ostringstream bins_csv;
      bins_csv << "bin,lo,hi,instances,annotated,recall\n";
      json bins = json::array();
      for (const auto& b : result.bins) {
        bins_csv << b.bin << ',' << fmt(kSizeBinEdges[b.bin]) << ',' << fmt(kSizeBinEdges[b.bin + 1]) << ','
                 << b.instances << ',' << b.annotated << ',' << fmt(b.recall) << '\n';
        bins.push_back(json{{"bin", b.bin}, {"instances", b.instances}, {"recall", b.recall}});
      }
      write_file(out_dir / "recall-size-bins.csv", bins_csv.str());
      summary["categories"] = result.categories.size();
      summary["size_bins"] = std::move(bins);
      if (sizes.size() >= 2) summary["size_recall_correlation"] = pearson_correlation(sizes, recalls);
      break;
    }
  }

  write_file(out_dir / (name + ".csv"), csv.str());
  write_file(out_dir / (name + ".json"), summary.dump(2) + "\n");
  return summary;
}

}  // namespace abkit::analysis
