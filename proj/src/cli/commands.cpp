#include "abkit/cli/commands.hpp"

#include <pthread.h>

#include <algorithm>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "abkit/analysis/ground_truth.hpp"
#include "abkit/analysis/report.hpp"
#include "abkit/byproduct/codec.hpp"
#include "abkit/cli/manifest.hpp"
#include "abkit/error.hpp"
#include "abkit/luab/experiment.hpp"
#include "abkit/luab/serialize.hpp"
#include "abkit/qc/qc.hpp"
#include "abkit/rng.hpp"
#include "abkit/service/corpus.hpp"
#include "abkit/service/http.hpp"
#include "abkit/service/store.hpp"

namespace abkit::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot write " + path.string());
  f << text;
  if (!f) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());
}

std::vector<ordered_json> read_json_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path);
  std::vector<ordered_json> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(ordered_json::parse(line));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::MalformedRecord, path + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string s;
  for (const auto& l : lines) s += l + '\n';
  return s;
}

std::string num(double v) {
  std::ostringstream o;
  o.precision(6);
  o << v;
  return o.str();
}

enum class Interface { Browsing, Tagging };

Interface parse_interface(const std::string& s) {
  if (s == "imagenet" || s == "browsing") return Interface::Browsing;
  if (s == "coco" || s == "tagging") return Interface::Tagging;
  throw Error(ErrorCode::InvalidArgument, "unknown interface " + s);
}

// ---- serve ---------------------------------------------------------------

struct ServeArgs {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string data_dir;
  bool strict = true;
  std::string secret = "abkit-dev-secret";
  std::string hits;
};

int cmd_serve(const ServeArgs& a, std::ostream& out) {
  service::ServiceOptions so;
  so.data_dir = a.data_dir;
  so.secret = a.secret;
  so.strict = a.strict;
  service::AnnotationService svc(so);
  if (!a.data_dir.empty()) {
    ensure_dir(a.data_dir);
    svc.load();
  }
  if (!a.hits.empty())
    for (const auto& j : read_json_lines(a.hits)) svc.register_hit(service::hit_from_json(j));

  if (!a.data_dir.empty()) {
    RunManifest m{"serve", {{"host", a.host}, {"port", a.port}, {"strict", a.strict}}, {}, {}, {}, tool_version()};
    if (!a.hits.empty()) m.inputs.push_back(a.hits);
    write_manifest(a.data_dir, m);
  }

  service::HttpServer server(svc);
  const int port = server.bind(a.host, a.port);
  if (port < 0) throw Error(ErrorCode::Io, "cannot bind " + a.host + ":" + std::to_string(a.port));

  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&set, &sig);
    server.stop();
  });
  out << "listening on " << a.host << ':' << port << std::endl;
  server.listen_after_bind();
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  pthread_sigmask(SIG_UNBLOCK, &set, nullptr);
  out << "stopped" << std::endl;
  return kExitOk;
}

// ---- make-hits -----------------------------------------------------------

struct MakeHitsArgs {
  std::string interface = "imagenet";
  std::string pool;
  int count = 10;
  std::uint64_t seed = 0;
  double careless_rate = 0.1;
  std::string secret = "abkit-dev-secret";
  std::string out;
};

std::vector<service::ImageRef> image_refs(const ordered_json& arr) {
  std::vector<service::ImageRef> refs;
  for (const auto& r : arr) refs.push_back({r.at("image_id").get<std::string>(), r.value("url", std::string())});
  return refs;
}

std::vector<service::Hit> hits_from_pool(const MakeHitsArgs& a, Interface iface) {
  std::vector<service::Hit> hits;
  const auto rows = read_json_lines(a.pool);
  try {
    if (iface == Interface::Browsing) {
      int h = 0;
      for (const auto& row : rows) {
        service::CandidatePool pool;
        pool.class_id = row.at("class_id").get<std::string>();
        pool.description = row.value("description", std::string());
        pool.seed_images = image_refs(row.at("seed_images"));
        pool.distractor_images = image_refs(row.at("distractor_images"));
        char id[32];
        std::snprintf(id, sizeof id, "browse-%04d", h);
        hits.emplace_back(service::assemble_browsing_hit(pool, mix64(a.seed + static_cast<std::uint64_t>(h)), id));
        ++h;
      }
    } else {
      std::vector<service::ImageRef> images;
      for (const auto& row : rows)
        if (row.contains("images"))
          for (auto& r : image_refs(row.at("images"))) images.push_back(std::move(r));
        else
          images.push_back({row.at("image_id").get<std::string>(), row.value("url", std::string())});
      for (std::size_t i = 0; i + service::kTaggingPages <= images.size(); i += service::kTaggingPages) {
        char id[32];
        std::snprintf(id, sizeof id, "tag-%04zu", i / service::kTaggingPages);
        hits.emplace_back(service::assemble_tagging_hit(
            std::span<const service::ImageRef>(images.data() + i, service::kTaggingPages), id));
      }
      if (hits.empty()) throw Error(ErrorCode::InsufficientPool, "fewer than 20 images in pool");
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedRecord, a.pool + ": " + e.what());
  }
  return hits;
}

int cmd_make_hits(const MakeHitsArgs& a, std::ostream& out) {
  const Interface iface = parse_interface(a.interface);
  ensure_dir(a.out);
  const fs::path dir(a.out);
  RunManifest m;
  m.command = "make-hits";
  m.config = {{"interface", iface == Interface::Browsing ? "imagenet" : "coco"}};
  m.tool_version = tool_version();
  m.seeds = {a.seed};

  std::vector<std::string> hit_lines;
  if (!a.pool.empty()) {
    for (const auto& h : hits_from_pool(a, iface)) hit_lines.push_back(service::to_json(h).dump());
    m.inputs = {a.pool};
    m.outputs = {"hits.jsonl"};
  } else {
    if (a.count <= 0) throw Error(ErrorCode::InvalidArgument, "--count must be positive");
    service::CorpusOptions co;
    co.hits = a.count;
    co.seed = a.seed;
    co.careless_rate = a.careless_rate;
    co.secret = a.secret;
    const auto corpus = iface == Interface::Browsing ? service::synthetic_browsing_corpus(co)
                                                     : service::synthetic_tagging_corpus(co);
    for (const auto& h : corpus.hits) hit_lines.push_back(service::to_json(h).dump());
    write_text(dir / "records.jsonl", join_lines(corpus.records));
    std::vector<std::string> gt_lines, code_lines;
    for (const auto& [id, truth] : corpus.gt) gt_lines.push_back(analysis::to_json(truth).dump());
    const std::set<std::string> careless(corpus.careless.begin(), corpus.careless.end());
    for (const auto& [id, code] : corpus.codes)
      code_lines.push_back(
          ordered_json{{"assignment_id", id}, {"code", code}, {"careless", careless.count(id) > 0}}.dump());
    write_text(dir / "gt.jsonl", join_lines(gt_lines));
    write_text(dir / "codes.jsonl", join_lines(code_lines));
    m.config["count"] = a.count;
    m.config["careless_rate"] = a.careless_rate;
    m.outputs = {"hits.jsonl", "records.jsonl", "gt.jsonl", "codes.jsonl"};
    out << corpus.records.size() << " records, " << corpus.careless.size() << " careless assignments\n";
  }
  write_text(dir / "hits.jsonl", join_lines(hit_lines));
  write_manifest(dir, m);
  out << hit_lines.size() << " HITs written to " << dir.string() << '\n';
  return kExitOk;
}

// ---- qc ------------------------------------------------------------------

struct QcArgs {
  std::string records;
  std::string gt;
  std::string interface = "imagenet";
  std::string report;
  std::string codes;
  std::string secret = "abkit-dev-secret";
  std::string hits;
  bool strict = true;
};

std::string reasons_text(const qc::HitVerdict& v) {
  std::string s;
  for (auto r : v.reasons) {
    if (!s.empty()) s += ';';
    s += to_string(r);
  }
  return s;
}

int cmd_qc(const QcArgs& a, std::ostream& out) {
  const Interface iface = parse_interface(a.interface);
  byproduct::ParseOptions po;
  po.strict = a.strict;
  const auto gt = analysis::load_ground_truth(a.gt);

  std::map<std::string, std::string> codes;
  if (!a.codes.empty())
    for (const auto& j : read_json_lines(a.codes)) {
      try {
        codes[j.at("assignment_id").get<std::string>()] = j.at("code").get<std::string>();
      } catch (const json::exception& e) {
        throw Error(ErrorCode::MalformedRecord, a.codes + ": " + e.what());
      }
    }

  std::set<std::string> ids;
  for (const auto& [img, truth] : gt)
    if (!truth.assignment_id.empty()) ids.insert(truth.assignment_id);
  for (const auto& [id, code] : codes) ids.insert(id);

  const auto code_check = [&](const std::string& id) {
    qc::CodeCheck c;
    if (!a.codes.empty()) {
      const auto it = codes.find(id);
      c.code_valid = it != codes.end() && service::completion_code_valid(a.secret, id, it->second);
    }
    return c;
  };

  std::vector<qc::HitVerdict> verdicts;
  std::ostringstream csv;
  if (iface == Interface::Browsing) {
    std::map<std::string, std::vector<byproduct::ImageNetRecord>> by_id;
    for (auto& r : byproduct::load_imagenet_jsonl(a.records, po)) {
      ids.insert(r.assignment_id);
      by_id[r.assignment_id].push_back(std::move(r));
    }
    csv << "assignment_id,decision,reasons,recall,selections,pages_completed,code_valid\n";
    for (const auto& id : ids) {
      const auto& recs = by_id[id];
      const auto truth = qc::seed_truth(gt, id);
      const auto check = code_check(id);
      auto v = qc::evaluate_imagenet_hit(recs, truth, check);
      v.assignment_id = id;
      const auto mtr = recs.empty() ? qc::BrowsingMetrics{0, 0, 0, false} : qc::browsing_metrics(recs, truth);
      csv << id << ',' << to_string(v.decision) << ',' << reasons_text(v) << ',' << num(mtr.recall) << ','
          << mtr.selections << ',' << mtr.pages_completed << ',' << (check.code_valid ? 1 : 0) << '\n';
      verdicts.push_back(std::move(v));
    }
  } else {
    std::map<std::string, std::vector<byproduct::CocoRecord>> by_id;
    for (auto& r : byproduct::load_coco_jsonl(a.records, po)) {
      ids.insert(r.assignment_id);
      by_id[r.assignment_id].push_back(std::move(r));
    }
    csv << "assignment_id,decision,reasons,mean_recall,icon_accuracy,pages_completed,code_valid\n";
    for (const auto& id : ids) {
      const auto& recs = by_id[id];
      const auto check = code_check(id);
      auto v = qc::evaluate_coco_hit(recs, gt, check);
      v.assignment_id = id;
      const auto mtr = recs.empty() ? qc::TaggingMetrics{0, 0, 0, false} : qc::tagging_metrics(recs, gt);
      csv << id << ',' << to_string(v.decision) << ',' << reasons_text(v) << ',' << num(mtr.mean_recall) << ','
          << num(mtr.icon_accuracy) << ',' << mtr.pages_completed << ',' << (check.code_valid ? 1 : 0) << '\n';
      verdicts.push_back(std::move(v));
    }
  }

  const fs::path report(a.report);
  const fs::path dir = report.has_parent_path() ? report.parent_path() : fs::path(".");
  ensure_dir(dir);
  fs::path summary = report;
  summary.replace_extension(".csv");
  if (summary == report) summary = fs::path(report.string() + ".summary.csv");

  std::vector<std::string> lines;
  std::size_t rejected = 0;
  for (const auto& v : verdicts) {
    lines.push_back(qc::to_json(v).dump());
    if (v.decision == qc::Decision::Reject) ++rejected;
  }
  write_text(report, join_lines(lines));
  write_text(summary, csv.str());

  RunManifest m;
  m.command = "qc";
  m.config = {{"interface", iface == Interface::Browsing ? "imagenet" : "coco"}, {"strict", a.strict}};
  m.inputs = {a.records, a.gt};
  if (!a.codes.empty()) m.inputs.push_back(a.codes);
  m.outputs = {report.filename().string(), summary.filename().string()};
  m.tool_version = tool_version();

  if (!a.hits.empty()) {
    std::map<std::string, service::Hit> hits;
    for (const auto& j : read_json_lines(a.hits)) {
      auto h = service::hit_from_json(j);
      hits.emplace(service::assignment_id(h), std::move(h));
    }
    std::vector<std::string> repost_lines;
    for (const auto& h : qc::repost_rejected(verdicts, hits)) repost_lines.push_back(service::to_json(h).dump());
    write_text(dir / "reposts.jsonl", join_lines(repost_lines));
    m.inputs.push_back(a.hits);
    m.outputs.push_back("reposts.jsonl");
  }
  write_manifest(dir, m);
  out << verdicts.size() << " assignments, " << rejected << " rejected\n";
  return kExitOk;
}

// ---- analyze -------------------------------------------------------------

struct AnalyzeArgs {
  std::string records;
  std::string gt;
  std::string stat;
  std::string out;
  std::uint64_t seed = 0;
  int samples = 1000;
  int last_n = 16;
  int bins = 11;
  bool strict = true;
};

int cmd_analyze(const AnalyzeArgs& a, std::ostream& out) {
  const auto stat = analysis::parse_stat(a.stat);
  const auto inputs = analysis::load_analysis_inputs(a.records, a.gt, a.strict);
  analysis::AnalysisParams p;
  p.seed = a.seed;
  p.samples_per_image = a.samples;
  p.last_n = a.last_n;
  p.quantile_bins = a.bins;
  ensure_dir(a.out);
  const auto summary = analysis::run_analysis(inputs, stat, p, a.out);
  RunManifest m;
  m.command = "analyze";
  m.config = {{"stat", std::string(to_string(stat))},
              {"samples_per_image", p.samples_per_image},
              {"quantile_bins", p.quantile_bins},
              {"last_n", p.last_n},
              {"strict", a.strict}};
  m.seeds = {a.seed};
  m.inputs = {a.records, a.gt};
  for (const auto& e : fs::directory_iterator(a.out))
    if (e.is_regular_file() && e.path().filename() != "manifest.json") m.outputs.push_back(e.path().filename());
  std::sort(m.outputs.begin(), m.outputs.end());
  m.tool_version = tool_version();
  write_manifest(a.out, m);
  out << summary.dump(2) << '\n';
  return kExitOk;
}

// ---- train / eval --------------------------------------------------------

struct TrainArgs {
  std::string mode = "luab";
  double lambda = 10.0;
  double beta = 1.0;
  double rho = 0.95;
  double co_rate = 0.9;
  std::vector<std::uint64_t> seeds{0};
  std::string out;
  int epochs = 12;
  std::size_t train_size = 5000;
  std::size_t val_size = 500;
  std::size_t test_size = 1000;
  std::string labels = "single";
  std::string loss = "smooth-l1";
  double lr = 0.02;
  int batch = 32;
  int classes = 8;
};

luab::LabelMode parse_labels(const std::string& s) {
  if (s == "single") return luab::LabelMode::Single;
  if (s == "multi") return luab::LabelMode::Multi;
  throw Error(ErrorCode::InvalidArgument, "unknown label mode " + s);
}

ordered_json report_row(std::uint64_t seed, const luab::ArmResult& r) {
  ordered_json j;
  j["seed"] = seed;
  j["final_classification_loss"] = r.trained.curves.back().classification_loss;
  j["final_regression_loss"] = r.trained.curves.back().regression_loss;
  j["val_localization"] = r.trained.curves.back().val_localization;
  const auto report = luab::to_json(r.report);
  for (const auto& [k, v] : report.items()) j[k] = v;
  return j;
}

int cmd_train(const TrainArgs& a, std::ostream& out) {
  luab::ExperimentConfig cfg;
  cfg.arm = luab::parse_arm(a.mode);
  cfg.labels = parse_labels(a.labels);
  cfg.loss.lambda = a.lambda;
  cfg.loss.beta = a.beta;
  if (a.loss == "smooth-l1")
    cfg.loss.regression = luab::RegressionLoss::SmoothL1;
  else if (a.loss == "mse")
    cfg.loss.regression = luab::RegressionLoss::MeanSquared;
  else
    throw Error(ErrorCode::InvalidArgument, "unknown loss " + a.loss);
  cfg.rho = a.rho;
  cfg.co_rate = a.co_rate;
  cfg.epochs = a.epochs;
  cfg.train_size = a.train_size;
  cfg.val_size = a.val_size;
  cfg.test_size = a.test_size;
  cfg.learning_rate = a.lr;
  cfg.batch_size = a.batch;
  cfg.scene.classes = a.classes;
  if (a.seeds.empty()) throw Error(ErrorCode::InvalidArgument, "no seeds given");

  const fs::path dir(a.out);
  ensure_dir(dir);
  RunManifest m;
  m.command = "train";
  m.config = {{"mode", std::string(to_string(cfg.arm))},
              {"labels", a.labels},
              {"lambda", a.lambda},
              {"beta", a.beta},
              {"loss", a.loss},
              {"rho", a.rho},
              {"co_rate", a.co_rate},
              {"epochs", a.epochs},
              {"train_size", a.train_size},
              {"val_size", a.val_size},
              {"test_size", a.test_size},
              {"learning_rate", a.lr},
              {"batch_size", a.batch},
              {"classes", a.classes}};
  m.seeds = a.seeds;
  m.tool_version = tool_version();

  ordered_json reports = ordered_json::array();
  std::ostringstream summary;
  summary.precision(17);
  summary << "seed,final_classification_loss,final_regression_loss,val_localization,acc_corr,acc_decorr,bg_gap,"
             "localization,mAP,v_avg,v_min\n";
  for (const auto seed : a.seeds) {
    const auto data = luab::make_experiment_data(cfg, seed);
    const auto r = luab::run_arm(cfg, data, seed);
    const std::string tag = "seed" + std::to_string(seed);
    luab::save_model(dir / ("model-" + tag + ".json"), r.trained.model);
    write_text(dir / ("curves-" + tag + ".csv"), luab::curves_csv(r.trained.curves));
    m.outputs.push_back("model-" + tag + ".json");
    m.outputs.push_back("curves-" + tag + ".csv");
    const auto row = report_row(seed, r);
    reports.push_back(row);
    const auto opt = [](const std::optional<double>& v) { return v ? std::to_string(*v) : std::string(); };
    summary << seed << ',' << r.trained.curves.back().classification_loss << ','
            << r.trained.curves.back().regression_loss << ',' << r.trained.curves.back().val_localization << ','
            << r.report.acc_corr << ',' << r.report.acc_decorr << ',' << r.report.bg_gap << ','
            << r.report.localization << ',' << opt(r.report.mean_ap) << ','
            << (r.report.v ? std::to_string(r.report.v->v_avg) : "") << ','
            << (r.report.v ? std::to_string(r.report.v->v_min) : "") << '\n';
    out << tag << ' ' << row.dump() << std::endl;
  }
  write_text(dir / "report.json", reports.dump(2) + "\n");
  write_text(dir / "summary.csv", summary.str());
  m.outputs.push_back("report.json");
  m.outputs.push_back("summary.csv");
  write_manifest(dir, m);
  return kExitOk;
}

struct EvalArgs {
  std::string model;
  std::string suite = "bggap";
  std::uint64_t seed = 0;
  std::size_t test_size = 1000;
  double co_rate = 0.9;
  std::string out;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const auto model = luab::load_model(a.model);
  const auto& spec = model.spec();
  luab::ExperimentConfig cfg;
  cfg.labels = spec.labels;
  cfg.scene.size = spec.height;
  cfg.scene.classes = spec.classes;
  cfg.train_size = 0;
  cfg.val_size = 0;
  cfg.test_size = a.test_size;
  cfg.co_rate = a.co_rate;
  const auto data = luab::make_experiment_data(cfg, a.seed);

  ordered_json result;
  result["suite"] = a.suite;
  if (a.suite == "bggap") {
    if (spec.labels != luab::LabelMode::Single)
      throw Error(ErrorCode::InvalidArgument, "bggap needs a single-label model");
    const auto r = luab::evaluate_robustness(model, data.test_corr, data.test_decorr);
    result["acc_corr"] = r.acc_corr;
    result["acc_decorr"] = r.acc_decorr;
    result["bg_gap"] = r.bg_gap;
  } else if (a.suite == "vmetrics") {
    if (spec.labels != luab::LabelMode::Multi)
      throw Error(ErrorCode::InvalidArgument, "vmetrics needs a multi-label model");
    const auto v = luab::v_metrics(model, data.test_corr, cfg.scene, mix64(a.seed ^ 0x76));
    result["v_avg"] = v.v_avg;
    result["v_min"] = v.v_min;
    result["pairs"] = v.pairs;
  } else if (a.suite == "loc") {
    std::vector<luab::SceneSample> all = data.test_corr;
    all.insert(all.end(), data.test_decorr.begin(), data.test_decorr.end());
    result["localization"] = luab::localization_accuracy(luab::predict(model, all), all, spec.labels);
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown suite " + a.suite);
  }
  if (!a.out.empty()) {
    ensure_dir(a.out);
    const std::string name = "eval-" + a.suite + ".json";
    write_text(fs::path(a.out) / name, result.dump(2) + "\n");
    write_manifest(a.out, RunManifest{"eval",
                                      {{"suite", a.suite}, {"test_size", a.test_size}, {"co_rate", a.co_rate}},
                                      {a.seed},
                                      {a.model},
                                      {name},
                                      tool_version()});
  }
  out << result.dump(2) << '\n';
  return kExitOk;
}

// ---- report --------------------------------------------------------------

struct ReportArgs {
  std::vector<std::string> inputs;
  std::string out;
  std::size_t max_rows = 40;
};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (char ch : line) {
    if (ch == '"') {
      quoted = !quoted;
    } else if (ch == ',' && !quoted) {
      cells.push_back(cell);
      cell.clear();
    } else if (ch != '\r') {
      cell += ch;
    }
  }
  cells.push_back(cell);
  return cells;
}

std::string markdown_table(const fs::path& csv, std::size_t max_rows) {
  std::ifstream in(csv, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + csv.string());
  std::ostringstream md;
  std::string line;
  std::size_t rows = 0, total = 0;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (!header && ++total > max_rows) continue;
    md << '|';
    for (const auto& c : cells) md << ' ' << c << " |";
    md << '\n';
    if (header) {
      md << '|';
      for (std::size_t i = 0; i < cells.size(); ++i) md << " --- |";
      md << '\n';
      header = false;
    } else {
      ++rows;
    }
  }
  if (total > rows) md << "\n_" << total - rows << " more rows in the CSV._\n";
  return md.str();
}

int cmd_report(const ReportArgs& a, std::ostream& out) {
  std::vector<std::pair<std::string, fs::path>> tables;
  for (const auto& root : a.inputs) {
    if (!fs::exists(root)) throw Error(ErrorCode::Io, "no such path " + root);
    if (fs::is_regular_file(root)) {
      tables.emplace_back(fs::path(root).filename().string(), root);
      continue;
    }
    for (const auto& e : fs::recursive_directory_iterator(root))
      if (e.is_regular_file() && e.path().extension() == ".csv")
        tables.emplace_back(fs::relative(e.path(), root).string(), e.path());
  }
  std::sort(tables.begin(), tables.end());
  if (tables.empty()) throw Error(ErrorCode::EmptyInput, "no CSV tables found");

  std::ostringstream md;
  md << "# abkit summary\n";
  std::set<fs::path> seen_dirs;
  for (const auto& [name, path] : tables) {
    md << "\n## " << name << "\n\n";
    const auto manifest_dir = path.parent_path();
    if (fs::exists(manifest_dir / "manifest.json")) {
      const auto mf = read_manifest(manifest_dir);
      md << "Produced by `abkit " << mf.command << "` " << mf.config.dump() << "\n\n";
    }
    md << markdown_table(path, a.max_rows);
  }
  ensure_dir(a.out);
  write_text(fs::path(a.out) / "report.md", md.str());
  RunManifest m{"report", {{"max_rows", a.max_rows}}, {}, a.inputs, {"report.md"}, tool_version()};
  write_manifest(a.out, m);
  out << tables.size() << " tables written to " << (fs::path(a.out) / "report.md").string() << '\n';
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Annotation byproduct toolkit", "abkit"};
  app.set_config("--config", "", "Settings file (TOML/INI sections named after subcommands); flags win");
  app.set_version_flag("--version", tool_version());
  app.require_subcommand(1);

  ServeArgs serve;
  auto* s_serve = app.add_subcommand("serve", "Serve HITs and ingest annotation events over HTTP");
  s_serve->add_option("--host", serve.host, "Bind address")->capture_default_str();
  s_serve->add_option("--port", serve.port, "Port (0 picks a free port)")->capture_default_str();
  s_serve->add_option("--data-dir", serve.data_dir, "Directory for event logs and records");
  s_serve->add_flag("--strict,!--lenient", serve.strict, "Strict record validation (default on)");
  s_serve->add_option("--secret", serve.secret, "Key for worker anonymization and completion codes");
  s_serve->add_option("--hits", serve.hits, "JSON Lines file of HITs to register")->check(CLI::ExistingFile);

  MakeHitsArgs mk;
  auto* s_mk = app.add_subcommand("make-hits", "Assemble HITs from a candidate pool or a synthetic campaign");
  s_mk->add_option("--interface", mk.interface, "imagenet|coco")->capture_default_str();
  s_mk->add_option("--pool", mk.pool, "Candidate pool JSON Lines; omitted: synthetic campaign")
      ->check(CLI::ExistingFile);
  s_mk->add_option("--count", mk.count, "Synthetic HIT count")->capture_default_str();
  s_mk->add_option("--seed", mk.seed, "Seed")->capture_default_str();
  s_mk->add_option("--careless-rate", mk.careless_rate, "Share of careless synthetic annotators")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  s_mk->add_option("--secret", mk.secret, "Key for worker anonymization and completion codes");
  s_mk->add_option("--out", mk.out, "Output directory")->required();

  QcArgs qa;
  auto* s_qc = app.add_subcommand("qc", "Accept or reject submitted HITs");
  s_qc->add_option("--records", qa.records, "Byproduct records (JSON Lines)")->required()->check(CLI::ExistingFile);
  s_qc->add_option("--gt", qa.gt, "Ground truth (JSON Lines)")->required()->check(CLI::ExistingFile);
  s_qc->add_option("--interface", qa.interface, "imagenet|coco")->capture_default_str();
  s_qc->add_option("--report", qa.report, "Verdict JSON Lines path; a summary CSV is written beside it")
      ->required();
  s_qc->add_option("--codes", qa.codes, "Submitted completion codes (JSON Lines)")->check(CLI::ExistingFile);
  s_qc->add_option("--secret", qa.secret, "Key the completion codes were issued with");
  s_qc->add_option("--hits", qa.hits, "HITs (JSON Lines); rejected ones are reposted to reposts.jsonl")
      ->check(CLI::ExistingFile);
  s_qc->add_flag("--strict,!--lenient", qa.strict, "Strict record validation (default on)");

  AnalyzeArgs an;
  auto* s_an = app.add_subcommand("analyze", "Compute byproduct statistics");
  s_an->add_option("--records", an.records, "Byproduct records (JSON Lines)")->required()->check(CLI::ExistingFile);
  s_an->add_option("--gt", an.gt, "Ground truth (JSON Lines)")->required()->check(CLI::ExistingFile);
  s_an->add_option("--stat", an.stat, "clicks|sweep|quantiles|bias|actions|recall-size")->required();
  s_an->add_option("--out", an.out, "Output directory")->required();
  s_an->add_option("--seed", an.seed, "Seed for Monte-Carlo statistics")->capture_default_str();
  s_an->add_option("--samples", an.samples, "Monte-Carlo clicks per image")->capture_default_str();
  s_an->add_option("--last-n", an.last_n, "Trace points before the click for lastN")->capture_default_str();
  s_an->add_option("--bins", an.bins, "Quantile bins")->capture_default_str();
  s_an->add_flag("--strict,!--lenient", an.strict, "Strict record validation (default on)");

  TrainArgs tr;
  auto* s_tr = app.add_subcommand("train", "Train on synthetic scenes and score robustness");
  s_tr->add_option("--mode", tr.mode, "luab|rand|baseline|attpool")->capture_default_str();
  s_tr->add_option("--lambda", tr.lambda, "Regression weight")->capture_default_str();
  s_tr->add_option("--beta", tr.beta, "Smooth-l1 transition point")->capture_default_str();
  s_tr->add_option("--rho", tr.rho, "Train background correlation")->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  s_tr->add_option("--co-rate", tr.co_rate, "Multi-label co-occurrence rate")->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  s_tr->add_option("--seeds,--seed", tr.seeds, "Seeds (comma separated)")->delimiter(',')->capture_default_str();
  s_tr->add_option("--out", tr.out, "Output directory")->required();
  s_tr->add_option("--epochs", tr.epochs, "Epochs")->check(CLI::PositiveNumber)->capture_default_str();
  s_tr->add_option("--train-size", tr.train_size, "Training samples")->capture_default_str();
  s_tr->add_option("--val-size", tr.val_size, "Validation samples")->capture_default_str();
  s_tr->add_option("--test-size", tr.test_size, "Samples per test split")->capture_default_str();
  s_tr->add_option("--labels", tr.labels, "single|multi")->capture_default_str();
  s_tr->add_option("--loss", tr.loss, "smooth-l1|mse")->capture_default_str();
  s_tr->add_option("--lr", tr.lr, "Learning rate")->capture_default_str();
  s_tr->add_option("--batch", tr.batch, "Batch size")->check(CLI::PositiveNumber)->capture_default_str();
  s_tr->add_option("--classes", tr.classes, "Classes (even for multi-label)")->capture_default_str();

  EvalArgs ev;
  auto* s_ev = app.add_subcommand("eval", "Score a trained model on fresh synthetic test splits");
  s_ev->add_option("--model", ev.model, "Model file written by train")->required()->check(CLI::ExistingFile);
  s_ev->add_option("--suite", ev.suite, "bggap|vmetrics|loc")->capture_default_str();
  s_ev->add_option("--seed", ev.seed, "Data seed")->capture_default_str();
  s_ev->add_option("--test-size", ev.test_size, "Samples per test split")->capture_default_str();
  s_ev->add_option("--co-rate", ev.co_rate, "Multi-label co-occurrence rate")->capture_default_str();
  s_ev->add_option("--out", ev.out, "Optional output directory");

  ReportArgs rp;
  auto* s_rp = app.add_subcommand("report", "Aggregate CSV artifacts into one markdown summary");
  s_rp->add_option("--in", rp.inputs, "Artifact directories or CSV files")->required()->check(CLI::ExistingPath);
  s_rp->add_option("--out", rp.out, "Output directory")->required();
  s_rp->add_option("--max-rows", rp.max_rows, "Rows shown per table")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (s_serve->parsed()) return cmd_serve(serve, out);
    if (s_mk->parsed()) return cmd_make_hits(mk, out);
    if (s_qc->parsed()) return cmd_qc(qa, out);
    if (s_an->parsed()) return cmd_analyze(an, out);
    if (s_tr->parsed()) return cmd_train(tr, out);
    if (s_ev->parsed()) return cmd_eval(ev, out);
    if (s_rp->parsed()) return cmd_report(rp, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomain;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomain;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace abkit::cli
