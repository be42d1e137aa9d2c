#include "daa/commands.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "daa/daat_format.hpp"
#include "daa/errors.hpp"
#include "daa/parallel.hpp"
#include "daa/pipeline.hpp"
#include "daa/rer_analysis.hpp"
#include "daa/sweep.hpp"
#include "daa/synthetic.hpp"

namespace daa {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

// Detector flags shared by several subcommands.
struct DetectorFlags {
  std::string method = "both";
  std::string preset = "paper-sd14";
  std::string threshold_file;
  std::optional<std::size_t> t, s;
  std::optional<double> alpha, alpha_i, alpha_s, coupling, gamma_eos;
  std::optional<std::string> metric, token_choice;
  std::string schedule;
};

struct Common {
  unsigned workers = 0;
  std::string out;
  bool verbose = false;
};

double parse_threshold_text(const std::string& text) {
  if (text == "-inf" || text == "-infinity") return -std::numeric_limits<double>::infinity();
  if (text == "inf" || text == "+inf" || text == "infinity") return std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || std::isnan(v)) throw Error(ErrorCode::invalid_params, "bad threshold '" + text + "'");
  return v;
}

ojson threshold_json(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double threshold_from_json(const nlohmann::json& j) {
  if (j.is_string()) return parse_threshold_text(j.get<std::string>());
  if (j.is_number()) return j.get<double>();
  throw Error(ErrorCode::invalid_params, "threshold must be a number or \"inf\"/\"-inf\"");
}

ojson config_json(const DetectorConfig& cfg, Method method) {
  ojson j;
  if (method == Method::daa_i) {
    j["threshold"] = threshold_json(cfg.daa_i.threshold);
    j["start_step"] = cfg.daa_i.start_step;
    j["span"] = cfg.daa_i.span;
    j["token_choice"] = std::string(to_string(cfg.daa_i.token_choice));
  } else {
    j["threshold"] = threshold_json(cfg.daa_s.threshold);
    j["start_step"] = cfg.daa_s.start_step;
    j["span"] = cfg.daa_s.span;
    j["token_choice"] = std::string(to_string(cfg.daa_s.token_choice));
    j["coupling"] = cfg.daa_s.coupling;
    j["gamma_other"] = cfg.daa_s.gamma_other;
    j["gamma_eos"] = cfg.daa_s.gamma_eos;
    j["metric"] = std::string(to_string(cfg.daa_s.metric));
    j["schedule"] = cfg.daa_s.schedule == CouplingSchedule::linear_interpolation ? "linear" : "piecewise";
  }
  return j;
}

void apply_threshold_file(const fs::path& path, DetectorConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot read threshold file " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::invalid_params, "threshold file " + path.string() + ": " + e.what());
  }
  if (j.contains("daa_i")) {
    const auto& d = j["daa_i"];
    cfg.daa_i.threshold = threshold_from_json(d.at("threshold"));
    if (d.contains("start_step")) cfg.daa_i.start_step = d["start_step"].get<std::size_t>();
    if (d.contains("span")) cfg.daa_i.span = d["span"].get<std::size_t>();
    if (d.contains("token_choice")) cfg.daa_i.token_choice = parse_token_choice(d["token_choice"].get<std::string>());
  }
  if (j.contains("daa_s")) {
    const auto& d = j["daa_s"];
    cfg.daa_s.threshold = threshold_from_json(d.at("threshold"));
    if (d.contains("start_step")) cfg.daa_s.start_step = d["start_step"].get<std::size_t>();
    if (d.contains("span")) cfg.daa_s.span = d["span"].get<std::size_t>();
    if (d.contains("token_choice")) cfg.daa_s.token_choice = parse_token_choice(d["token_choice"].get<std::string>());
    if (d.contains("coupling")) cfg.daa_s.coupling = d["coupling"].get<double>();
    if (d.contains("gamma_other")) cfg.daa_s.gamma_other = d["gamma_other"].get<double>();
    if (d.contains("gamma_eos")) cfg.daa_s.gamma_eos = d["gamma_eos"].get<double>();
    if (d.contains("metric")) cfg.daa_s.metric = parse_metric(d["metric"].get<std::string>());
    if (d.contains("schedule")) {
      cfg.daa_s.schedule = d["schedule"].get<std::string>() == "linear" ? CouplingSchedule::linear_interpolation
                                                                      : CouplingSchedule::piecewise_constant;
    }
  }
}

DetectorConfig build_config(const DetectorFlags& f, MethodSelection methods) {
  DetectorConfig cfg = DetectorConfig::preset(f.preset);
  if (!f.threshold_file.empty()) apply_threshold_file(f.threshold_file, cfg);
  if (f.t) cfg.daa_i.start_step = cfg.daa_s.start_step = *f.t;
  if (f.s) {
    if (*f.s < 1) throw Error(ErrorCode::config_out_of_range, "--s must be >= 1");
    cfg.daa_i.span = cfg.daa_s.span = *f.s;
  }
  if (f.alpha) {
    if (methods == MethodSelection::both) {
      throw Error(ErrorCode::invalid_params, "--alpha needs a single --method; use --alpha-i / --alpha-s");
    }
    (methods == MethodSelection::daa_i ? cfg.daa_i.threshold : cfg.daa_s.threshold) = *f.alpha;
  }
  if (f.alpha_i) cfg.daa_i.threshold = *f.alpha_i;
  if (f.alpha_s) cfg.daa_s.threshold = *f.alpha_s;
  if (f.coupling) {
    if (!(*f.coupling > 0.0)) throw Error(ErrorCode::invalid_params, "--c must be positive");
    cfg.daa_s.coupling = *f.coupling;
  }
  if (f.gamma_eos) cfg.daa_s.gamma_eos = *f.gamma_eos;
  if (f.metric) cfg.daa_s.metric = parse_metric(*f.metric);
  if (f.token_choice) cfg.daa_i.token_choice = cfg.daa_s.token_choice = parse_token_choice(*f.token_choice);
  if (f.schedule == "linear") cfg.daa_s.schedule = CouplingSchedule::linear_interpolation;
  else if (f.schedule == "piecewise") cfg.daa_s.schedule = CouplingSchedule::piecewise_constant;
  else if (!f.schedule.empty()) throw Error(ErrorCode::invalid_params, "schedule must be piecewise or linear");
  return cfg;
}

void add_detector_flags(CLI::App* app, DetectorFlags& f, bool with_method = true) {
  if (with_method) app->add_option("--method", f.method, "daa_i, daa_s or both")->capture_default_str();
  app->add_option("--preset", f.preset, "named detector configuration")->capture_default_str();
  app->add_option("--threshold-file", f.threshold_file, "thresholds written by `calibrate`");
  app->add_option("--t", f.t, "start step");
  app->add_option("--s", f.s, "time span");
  app->add_option("--alpha", f.alpha, "threshold of the selected method");
  app->add_option("--alpha-i", f.alpha_i, "DAA-I threshold");
  app->add_option("--alpha-s", f.alpha_s, "DAA-S threshold");
  app->add_option("--c", f.coupling, "DAA-S coupling strength");
  app->add_option("--gamma-eos", f.gamma_eos, "DAA-S stability parameter of the EOS node");
  app->add_option("--metric", f.metric, "frobenius or one_norm");
  app->add_option("--token-choice", f.token_choice, "eos, bos or all_tokens");
  app->add_option("--schedule", f.schedule, "piecewise or linear coupling between steps");
}

void add_common_flags(CLI::App* app, Common& c) {
  app->add_option("--workers", c.workers, "worker threads (0 = all cores)")->capture_default_str();
  app->add_option("--out", c.out, "output directory (default: $DAA_OUT_DIR)");
  app->add_flag("-v,--verbose", c.verbose, "progress on stderr");
}

std::optional<fs::path> out_dir(const Common& c) {
  if (!c.out.empty()) return fs::path(c.out);
  if (const char* env = std::getenv("DAA_OUT_DIR"); env != nullptr && *env != '\0') return fs::path(env);
  return std::nullopt;
}

fs::path require_out_dir(const Common& c) {
  auto dir = out_dir(c);
  if (!dir) throw Error(ErrorCode::invalid_params, "no output directory: pass --out or set DAA_OUT_DIR");
  std::error_code ec;
  fs::create_directories(*dir, ec);
  if (ec) throw Error(ErrorCode::io_error, "cannot create " + dir->string() + ": " + ec.message());
  return *dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out || !(out << text)) throw Error(ErrorCode::io_error, "cannot write " + path.string());
}

bool is_manifest(const fs::path& p) { return p.extension() == ".jsonl"; }

DatasetManifest load_manifest_arg(const std::string& path) {
  if (!is_manifest(path)) throw Error(ErrorCode::invalid_params, path + " is not a manifest (.jsonl)");
  return read_manifest(path);
}

std::vector<Method> methods_of(MethodSelection sel) {
  std::vector<Method> out;
  if (includes(sel, Method::daa_i)) out.push_back(Method::daa_i);
  if (includes(sel, Method::daa_s)) out.push_back(Method::daa_s);
  return out;
}

Method single_method(const std::string& name) {
  const auto sel = parse_method_selection(name);
  if (sel == MethodSelection::both) throw Error(ErrorCode::invalid_params, "this command needs --method daa_i or daa_s");
  return sel == MethodSelection::daa_i ? Method::daa_i : Method::daa_s;
}

std::vector<LabeledTrajectory> load_split(const DatasetManifest& m, std::optional<Split> split, unsigned workers) {
  return load_samples(split ? m.select(*split) : m.entries, workers);
}

std::string roc_csv(const std::vector<ScoredSample>& scores) {
  std::ostringstream out;
  out << "threshold,fpr,tpr\n";
  char buf[96];
  for (const auto& p : roc_points(scores)) {
    std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g\n", p.threshold, p.fpr, p.tpr);
    out << buf;
  }
  return out.str();
}

// ---- score ------------------------------------------------------------------

struct ScoreArgs {
  std::vector<std::string> inputs;
  DetectorFlags det;
  Common common;
};

int cmd_score(const ScoreArgs& a, std::ostream& out, std::ostream& err) {
  const auto sel = parse_method_selection(a.det.method);
  const DetectorConfig cfg = build_config(a.det, sel);

  struct Job {
    fs::path path;
    std::optional<ManifestEntry> entry;
  };
  std::vector<Job> jobs;
  for (const auto& in : a.inputs) {
    if (is_manifest(in)) {
      for (auto& e : read_manifest(in, false).entries) jobs.push_back({e.path, e});
    } else {
      jobs.push_back({in, std::nullopt});
    }
  }

  std::vector<std::string> lines(jobs.size());
  std::vector<char> failed(jobs.size(), 0);
  parallel_for(jobs.size(), a.common.workers, [&](std::size_t i) {
    const auto& job = jobs[i];
    ojson rec;
    try {
      const auto traj = read_trajectory_file(job.path);
      const auto r = score_trajectory(traj, cfg, sel);
      rec["id"] = r.sample_id.empty() ? job.path.stem().string() : r.sample_id;
      rec["path"] = job.path.string();
      if (job.entry) {
        rec["label"] = std::string(to_string(job.entry->label));
        rec["scenario"] = job.entry->scenario;
        rec["split"] = std::string(to_string(job.entry->split));
      }
      if (r.daa_i) {
        rec["daa_i"] = *r.daa_i;
        rec["verdict_i"] = std::string(to_string(*r.verdict_i));
      }
      if (r.daa_s) {
        rec["daa_s"] = *r.daa_s;
        rec["verdict_s"] = std::string(to_string(*r.verdict_s));
      }
      ojson timing;
      if (r.daa_i) timing["daa_i"] = r.daa_i_ms;
      if (r.daa_s) timing["daa_s"] = r.daa_s_ms;
      rec["timing_ms"] = timing;
    } catch (const std::exception& e) {
      rec = ojson();
      rec["id"] = job.path.stem().string();
      rec["path"] = job.path.string();
      rec["error"] = e.what();
      failed[i] = 1;
    }
    lines[i] = rec.dump();
  });

  std::ofstream file;
  std::ostream* sink = &out;
  if (const auto dir = out_dir(a.common)) {
    fs::create_directories(*dir);
    file.open(*dir / "scores.jsonl");
    if (!file) throw Error(ErrorCode::io_error, "cannot write " + (*dir / "scores.jsonl").string());
    sink = &file;
  }
  std::size_t errors = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    *sink << lines[i] << '\n';
    errors += failed[i] ? 1 : 0;
  }
  if (a.common.verbose || errors > 0) {
    err << "scored " << (jobs.size() - errors) << " of " << jobs.size() << " samples";
    if (errors > 0) err << ", " << errors << " failed";
    err << '\n';
  }
  return errors > 0 ? exit_partial_failure : exit_ok;
}

// ---- calibrate --------------------------------------------------------------

struct ManifestArgs {
  std::string manifest;
  DetectorFlags det;
  Common common;
};

int cmd_calibrate(const ManifestArgs& a, std::ostream& out, std::ostream& err) {
  const auto sel = parse_method_selection(a.det.method);
  DetectorConfig cfg = build_config(a.det, sel);
  const auto manifest = load_manifest_arg(a.manifest);
  const auto train = load_split(manifest, Split::train, a.common.workers);

  ojson thresholds;
  ojson reports;
  for (Method m : methods_of(sel)) {
    const auto scores = score_samples(train, cfg, m, a.common.workers);
    const auto cal = calibrate_threshold(scores);
    (m == Method::daa_i ? cfg.daa_i.threshold : cfg.daa_s.threshold) = cal.threshold;
    auto entry = config_json(cfg, m);
    entry["train_f1"] = cal.f1;
    thresholds[std::string(to_string(m))] = entry;
    reports[std::string(to_string(m))] = ojson::parse(to_json(evaluate(scores, cal.threshold)));
  }
  if (const auto dir = out_dir(a.common)) {
    fs::create_directories(*dir);
    write_text(*dir / "thresholds.json", thresholds.dump(2) + "\n");
    if (a.common.verbose) err << "wrote " << (*dir / "thresholds.json").string() << '\n';
  }
  ojson result;
  result["split"] = "train";
  result["thresholds"] = thresholds;
  result["reports"] = reports;
  out << result.dump(2) << '\n';
  return exit_ok;
}

// ---- evaluate ---------------------------------------------------------------

struct EvaluateArgs {
  std::string manifest;
  std::string scores;
  std::string threshold;
  std::string split = "test";
  DetectorFlags det;
  Common common;
};

std::vector<ScoredSample> read_score_stream(const fs::path& path, Method method, const std::string& split) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot read " + path.string());
  const std::string key(to_string(method));
  std::vector<ScoredSample> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::invalid_params, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (rec.contains("error")) continue;
    if (!rec.contains(key)) {
      throw Error(ErrorCode::invalid_params, path.string() + ":" + std::to_string(line_no) + ": no " + key + " score");
    }
    if (!rec.contains("label")) {
      throw Error(ErrorCode::invalid_params, path.string() + ":" + std::to_string(line_no) + ": record has no label");
    }
    if (split != "all" && rec.value("split", split) != split) continue;
    out.push_back({rec.value("id", std::string()), rec[key].get<double>(), parse_label(rec["label"].get<std::string>()),
                   rec.value("scenario", std::string())});
  }
  return out;
}

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out, std::ostream& err) {
  const Method method = single_method(a.det.method);
  const auto sel = method == Method::daa_i ? MethodSelection::daa_i : MethodSelection::daa_s;
  const DetectorConfig cfg = build_config(a.det, sel);
  if (a.split != "train" && a.split != "test" && a.split != "all") {
    throw Error(ErrorCode::invalid_params, "--split must be train, test or all");
  }

  std::vector<ScoredSample> scores;
  if (!a.scores.empty()) {
    scores = read_score_stream(a.scores, method, a.split);
  } else if (!a.manifest.empty()) {
    const auto manifest = load_manifest_arg(a.manifest);
    std::optional<Split> split;
    if (a.split != "all") split = parse_split(a.split);
    const auto samples = load_split(manifest, split, a.common.workers);
    scores = score_samples(samples, cfg, method, a.common.workers);
  } else {
    throw Error(ErrorCode::invalid_params, "evaluate needs a manifest or --scores");
  }

  const double threshold = a.threshold.empty()
                               ? (method == Method::daa_i ? cfg.daa_i.threshold : cfg.daa_s.threshold)
                               : parse_threshold_text(a.threshold);
  const auto report = evaluate(scores, threshold);
  const std::string json = to_json(report);
  if (const auto dir = out_dir(a.common)) {
    fs::create_directories(*dir);
    const std::string name(to_string(method));
    write_text(*dir / ("eval_" + name + ".json"), json + "\n");
    write_text(*dir / ("roc_" + name + ".csv"), roc_csv(scores));
    if (a.common.verbose) err << "wrote eval_" << name << ".json and roc_" << name << ".csv\n";
  }
  out << json << '\n';
  return exit_ok;
}

// ---- sweep / ablate ---------------------------------------------------------

struct SweepArgs {
  std::string manifest;
  std::string t_range = "0:3";
  std::string s_range = "1:9";
  DetectorFlags det;
  Common common;
};

std::vector<std::size_t> parse_range(const std::string& text) {
  std::vector<std::size_t> out;
  const auto colon = text.find(':');
  try {
    if (colon == std::string::npos) {
      std::stringstream ss(text);
      std::string item;
      while (std::getline(ss, item, ',')) out.push_back(std::stoul(item));
    } else {
      const auto lo = std::stoul(text.substr(0, colon));
      const auto hi = std::stoul(text.substr(colon + 1));
      for (auto v = lo; v <= hi; ++v) out.push_back(v);
    }
  } catch (const std::exception&) {
    throw Error(ErrorCode::invalid_params, "bad range '" + text + "' (use lo:hi or a,b,c)");
  }
  if (out.empty()) throw Error(ErrorCode::invalid_params, "empty range '" + text + "'");
  return out;
}

int cmd_sweep(const SweepArgs& a, std::ostream& out, std::ostream& err) {
  const Method method = single_method(a.det.method);
  const DetectorConfig cfg = build_config(a.det, MethodSelection::both);
  const auto ts = parse_range(a.t_range);
  const auto ss = parse_range(a.s_range);
  const auto samples = load_samples(load_manifest_arg(a.manifest).entries, a.common.workers);
  const auto grid = sweep_params(samples, cfg, method, ts, ss, a.common.workers);
  if (const auto dir = out_dir(a.common)) {
    fs::create_directories(*dir);
    const std::string name(to_string(method));
    write_text(*dir / ("sweep_" + name + ".csv"), grid.grid_csv());
    write_text(*dir / ("sweep_" + name + "_cells.csv"), grid.long_csv());
    if (a.common.verbose) err << "wrote sweep_" << name << ".csv\n";
  }
  out << grid.grid_csv();
  return exit_ok;
}

struct AblateArgs {
  std::string manifest;
  std::string axis;
  std::vector<std::string> values;
  DetectorFlags det;
  Common common;
};

int cmd_ablate(const AblateArgs& a, std::ostream& out, std::ostream& err) {
  const Method method = single_method(a.det.method);
  const DetectorConfig cfg = build_config(a.det, MethodSelection::both);
  const AblationAxis axis = parse_ablation_axis(a.axis);
  const auto values = a.values.empty() ? default_ablation_values(axis) : a.values;
  const auto samples = load_samples(load_manifest_arg(a.manifest).entries, a.common.workers);
  const auto rows = run_ablation(samples, cfg, method, axis, values, a.common.workers);
  const std::string csv = ablation_csv(rows);
  if (const auto dir = out_dir(a.common)) {
    fs::create_directories(*dir);
    const std::string stem = "ablation_" + std::string(to_string(method)) + "_" + std::string(to_string(axis));
    write_text(*dir / (stem + ".csv"), csv);
    ojson reports = ojson::object();
    for (const auto& r : rows) reports[r.value] = ojson::parse(to_json(r.report));
    write_text(*dir / (stem + ".json"), reports.dump(2) + "\n");
    if (a.common.verbose) err << "wrote " << stem << ".csv\n";
  }
  out << csv;
  return exit_ok;
}

// ---- viz --------------------------------------------------------------------

struct VizArgs {
  std::vector<std::string> inputs;
  std::string kind;
  std::string pooling = "pooled";
  bool raster = false;
  DetectorFlags det;
  Common common;
};

std::string g9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::vector<LabeledTrajectory> load_inputs(const std::vector<std::string>& inputs, unsigned workers) {
  std::vector<ManifestEntry> entries;
  for (const auto& in : inputs) {
    if (is_manifest(in)) {
      for (auto& e : read_manifest(in).entries) entries.push_back(e);
    } else {
      ManifestEntry e;
      e.path = in;
      entries.push_back(e);
    }
  }
  return load_samples(entries, workers);
}

std::string display_id(const LabeledTrajectory& s) {
  return s.trajectory.sample_id().empty() ? s.entry.path.stem().string() : s.trajectory.sample_id();
}

int viz_rer_heatmap(const VizArgs& a, const fs::path& dir, std::ostream& out) {
  for (const auto& s : load_inputs(a.inputs, a.common.workers)) {
    const auto series = rer_series(s.trajectory);
    const auto res = export_rer_heatmaps(series, dir, "rer_" + display_id(s), a.raster);
    out << res.values_csv.string() << '\n';
  }
  return exit_ok;
}

int viz_pca(const VizArgs& a, const fs::path& dir, std::ostream& out) {
  const auto samples = load_inputs(a.inputs, a.common.workers);
  std::vector<RerSeries> all(samples.size());
  parallel_for(samples.size(), a.common.workers, [&](std::size_t i) { all[i] = rer_series(samples[i].trajectory); });

  std::map<Label, std::vector<RerSeries>> by_label;
  std::vector<RerSeries> fit_set;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    by_label[samples[i].entry.label].push_back(all[i]);
    if (samples[i].entry.split == Split::train) fit_set.push_back(all[i]);
  }
  std::vector<RerSeries> means;
  for (const auto& [label, group] : by_label) means.push_back(average_series(group, std::string(to_string(label))));

  PcaBasis basis;
  if (a.pooling == "pooled") basis = fit_pca(fit_set.empty() ? all : fit_set);
  else if (a.pooling == "class_mean") basis = fit_pca(means);
  else throw Error(ErrorCode::invalid_params, "--pooling must be pooled or class_mean");

  std::ostringstream traj, summary;
  traj << "label,step,pc1,pc2\n";
  summary << "label,mean_step_length,explained_variance_1,explained_variance_2\n";
  for (const auto& m : means) {
    const auto pts = basis.project(m);
    for (Eigen::Index k = 0; k < pts.rows(); ++k) {
      traj << m.sample_id << ',' << k << ',' << g9(pts(k, 0)) << ',' << g9(pts(k, 1)) << '\n';
    }
    summary << m.sample_id << ',' << g9(mean_step_length(pts)) << ',' << g9(basis.explained_variance[0]) << ','
            << g9(basis.explained_variance[1]) << '\n';
  }
  write_text(dir / "pca_traj.csv", traj.str());
  write_text(dir / "pca_summary.csv", summary.str());
  out << summary.str();
  return exit_ok;
}

int viz_lyapunov(const VizArgs& a, const fs::path& dir, std::ostream& out) {
  const auto sel = MethodSelection::daa_s;
  const DetectorConfig cfg = build_config(a.det, sel);
  const auto samples = load_inputs(a.inputs, a.common.workers);
  std::vector<std::vector<double>> profiles(samples.size());
  parallel_for(samples.size(), a.common.workers,
               [&](std::size_t i) { profiles[i] = lyapunov_profile(samples[i].trajectory, cfg.daa_s); });

  std::ostringstream per, mean;
  per << "sample,step,dvdt\n";
  std::map<Label, std::vector<double>> sums;
  std::map<Label, std::size_t> counts;
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    auto& sum = sums[samples[i].entry.label];
    if (sum.size() < profiles[i].size()) sum.resize(profiles[i].size(), 0.0);
    ++counts[samples[i].entry.label];
    for (std::size_t k = 0; k < profiles[i].size(); ++k) {
      per << display_id(samples[i]) << ',' << k << ',' << g9(profiles[i][k]) << '\n';
      sum[k] += profiles[i][k];
      worst = std::max(worst, profiles[i][k]);
    }
  }
  mean << "label,step,dvdt\n";
  for (const auto& [label, sum] : sums) {
    for (std::size_t k = 0; k < sum.size(); ++k) {
      mean << to_string(label) << ',' << k << ',' << g9(sum[k] / static_cast<double>(counts[label])) << '\n';
    }
  }
  write_text(dir / "lyapunov.csv", per.str());
  write_text(dir / "lyapunov_mean.csv", mean.str());
  out << "max dV/dt = " << g9(worst) << (worst < 0.0 ? " (strictly negative)" : " (NOT negative)") << '\n';
  return exit_ok;
}

int cmd_viz(const VizArgs& a, std::ostream& out, std::ostream&) {
  const fs::path dir = require_out_dir(a.common);
  if (a.kind == "rer_heatmap") return viz_rer_heatmap(a, dir, out);
  if (a.kind == "pca_traj") return viz_pca(a, dir, out);
  if (a.kind == "lyapunov") return viz_lyapunov(a, dir, out);
  throw Error(ErrorCode::invalid_params, "--kind must be rer_heatmap, pca_traj or lyapunov");
}

// ---- synth ------------------------------------------------------------------

struct SynthArgs {
  std::size_t n_benign = 100;
  std::size_t n_backdoor = 100;
  SynthDatasetParams params;
  Common common;
};

int cmd_synth(const SynthArgs& a, std::ostream& out, std::ostream& err) {
  const fs::path dir = require_out_dir(a.common);
  const auto m = gen_dataset(a.n_benign, a.n_backdoor, a.params, dir, a.common.workers);
  if (a.common.verbose) err << "wrote " << m.entries.size() << " trajectories\n";
  out << (dir / "manifest.jsonl").string() << '\n';
  return exit_ok;
}

std::vector<char*> to_argv(std::vector<std::string>& storage) {
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());
  argv.push_back(nullptr);
  return argv;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dynamic attention analysis for backdoor sample detection"};
  app.name("daa");
  app.require_subcommand(1);

  ScoreArgs score;
  auto* score_cmd = app.add_subcommand("score", "score DAAT files or manifests (JSON lines on stdout)");
  score_cmd->add_option("inputs", score.inputs, "DAAT files or manifest.jsonl")->required();
  add_detector_flags(score_cmd, score.det);
  add_common_flags(score_cmd, score.common);

  ManifestArgs calibrate;
  auto* cal_cmd = app.add_subcommand("calibrate", "fit thresholds on the train split");
  cal_cmd->add_option("manifest", calibrate.manifest)->required();
  add_detector_flags(cal_cmd, calibrate.det);
  add_common_flags(cal_cmd, calibrate.common);

  EvaluateArgs evaluate_args;
  evaluate_args.det.method = "daa_i";
  auto* eval_cmd = app.add_subcommand("evaluate", "F1/AUC on the test split");
  eval_cmd->add_option("manifest", evaluate_args.manifest);
  eval_cmd->add_option("--scores", evaluate_args.scores, "score stream from `score` instead of a manifest");
  eval_cmd->add_option("--threshold", evaluate_args.threshold, "overrides the configured threshold (accepts -inf)");
  eval_cmd->add_option("--split", evaluate_args.split, "train, test or all")->capture_default_str();
  add_detector_flags(eval_cmd, evaluate_args.det);
  add_common_flags(eval_cmd, evaluate_args.common);

  SweepArgs sweep;
  sweep.det.method = "daa_i";
  auto* sweep_cmd = app.add_subcommand("sweep", "F1 grid over start step and span");
  sweep_cmd->add_option("manifest", sweep.manifest)->required();
  sweep_cmd->add_option("--t-range", sweep.t_range, "lo:hi or list")->capture_default_str();
  sweep_cmd->add_option("--s-range", sweep.s_range, "lo:hi or list")->capture_default_str();
  add_detector_flags(sweep_cmd, sweep.det);
  add_common_flags(sweep_cmd, sweep.common);

  AblateArgs ablate;
  ablate.det.method = "daa_s";
  auto* ablate_cmd = app.add_subcommand("ablate", "rerun calibration and evaluation per axis value");
  ablate_cmd->add_option("manifest", ablate.manifest)->required();
  ablate_cmd->add_option("--axis", ablate.axis, "gamma_eos, coupling, token_choice or metric")->required();
  ablate_cmd->add_option("--values", ablate.values, "axis values (default: built-in list per axis)")->delimiter(',');
  add_detector_flags(ablate_cmd, ablate.det);
  add_common_flags(ablate_cmd, ablate.common);

  VizArgs viz;
  auto* viz_cmd = app.add_subcommand("viz", "export figure data as CSV");
  viz_cmd->add_option("inputs", viz.inputs, "DAAT files or manifest.jsonl")->required();
  viz_cmd->add_option("--kind", viz.kind, "rer_heatmap, pca_traj or lyapunov")->required();
  viz_cmd->add_option("--pooling", viz.pooling, "pca basis: pooled or class_mean")->capture_default_str();
  viz_cmd->add_flag("--raster", viz.raster, "also write PPM heatmaps");
  add_detector_flags(viz_cmd, viz.det, false);
  add_common_flags(viz_cmd, viz.common);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "generate a labelled synthetic dataset");
  synth_cmd->add_option("--n-benign", synth.n_benign)->capture_default_str();
  synth_cmd->add_option("--n-backdoor", synth.n_backdoor)->capture_default_str();
  synth_cmd->add_option("--rho-backdoor", synth.params.rho_backdoor)->capture_default_str();
  synth_cmd->add_option("--rho-benign", synth.params.rho_benign)->capture_default_str();
  synth_cmd->add_option("--noise", synth.params.base.noise_sigma, "noise sigma")->capture_default_str();
  synth_cmd->add_option("--base-rate", synth.params.base.base_rate)->capture_default_str();
  synth_cmd->add_option("--amplitude", synth.params.base.amplitude)->capture_default_str();
  synth_cmd->add_option("--start-jitter", synth.params.base.start_jitter)->capture_default_str();
  synth_cmd->add_option("--warmup", synth.params.base.warmup_steps, "unrecorded steps before frame 0")->capture_default_str();
  synth_cmd->add_option("--L", synth.params.base.tokens, "tokens")->capture_default_str();
  synth_cmd->add_option("--D", synth.params.base.dim, "map side")->capture_default_str();
  synth_cmd->add_option("--T", synth.params.base.steps, "denoising steps")->capture_default_str();
  synth_cmd->add_option("--seed", synth.params.base.seed)->capture_default_str();
  synth_cmd->add_option("--scenario", synth.params.scenario)->capture_default_str();
  add_common_flags(synth_cmd, synth.common);

  std::vector<std::string> storage;
  storage.reserve(args.size() + 1);
  storage.emplace_back("daa");
  storage.insert(storage.end(), args.begin(), args.end());
  auto argv = to_argv(storage);
  try {
    app.parse(static_cast<int>(storage.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_usage;
  }

  try {
    if (*score_cmd) return cmd_score(score, out, err);
    if (*cal_cmd) return cmd_calibrate(calibrate, out, err);
    if (*eval_cmd) return cmd_evaluate(evaluate_args, out, err);
    if (*sweep_cmd) return cmd_sweep(sweep, out, err);
    if (*ablate_cmd) return cmd_ablate(ablate, out, err);
    if (*viz_cmd) return cmd_viz(viz, out, err);
    if (*synth_cmd) return cmd_synth(synth, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    switch (e.code()) {
      case ErrorCode::invalid_params:
      case ErrorCode::invalid_axis_value:
      case ErrorCode::config_out_of_range:
        return exit_usage;
      default:
        return exit_partial_failure;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_partial_failure;
  }
  return exit_usage;
}

}  // namespace daa
