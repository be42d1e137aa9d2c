#include "daa/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "daa/errors.hpp"
#include "daa/parallel.hpp"

namespace daa {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v, const char* spec = "%.9g") {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

bool has_split(const std::vector<LabeledTrajectory>& samples, Split split) {
  return std::any_of(samples.begin(), samples.end(), [&](const auto& s) { return s.entry.split == split; });
}

struct SplitScores {
  std::vector<ScoredSample> train;
  std::vector<ScoredSample> test;
};

SplitScores split_scores(const std::vector<LabeledTrajectory>& samples, const std::vector<double>& scores) {
  SplitScores out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& e = samples[i].entry;
    ScoredSample s{samples[i].trajectory.sample_id(), scores[i], e.label, e.scenario};
    (e.split == Split::train ? out.train : out.test).push_back(std::move(s));
  }
  return out;
}

}  // namespace

const SweepCell& SweepGrid::at(std::size_t t, std::size_t s) const {
  const auto ti = std::find(start_steps.begin(), start_steps.end(), t);
  const auto si = std::find(spans.begin(), spans.end(), s);
  if (ti == start_steps.end() || si == spans.end()) {
    throw Error(ErrorCode::index_out_of_range, "no sweep cell for t=" + std::to_string(t) + ", s=" + std::to_string(s));
  }
  return cells[static_cast<std::size_t>(ti - start_steps.begin()) * spans.size() +
               static_cast<std::size_t>(si - spans.begin())];
}

std::string SweepGrid::grid_csv() const {
  std::ostringstream out;
  out << to_string(method);
  for (std::size_t s : spans) out << ",s=" << s;
  out << '\n';
  for (std::size_t i = 0; i < start_steps.size(); ++i) {
    out << "t=" << start_steps[i];
    for (std::size_t j = 0; j < spans.size(); ++j) {
      const auto& c = cells[i * spans.size() + j];
      out << ',' << (c.valid ? fmt(100.0 * c.train_f1, "%.2f") : "invalid");
    }
    out << '\n';
  }
  return out.str();
}

std::string SweepGrid::long_csv() const {
  std::ostringstream out;
  out << "t,s,valid,threshold,train_f1,test_f1,test_auc\n";
  for (const auto& c : cells) {
    out << c.start_step << ',' << c.span << ',' << (c.valid ? 1 : 0) << ',';
    if (c.valid) {
      out << fmt(c.threshold) << ',' << fmt(c.train_f1) << ',' << fmt(c.test_f1) << ',' << fmt(c.test_auc);
    } else {
      out << ",,,";
    }
    out << '\n';
  }
  return out.str();
}

SweepGrid sweep_params(const std::vector<LabeledTrajectory>& samples, const DetectorConfig& base, Method method,
                       const std::vector<std::size_t>& start_steps, const std::vector<std::size_t>& spans,
                       unsigned workers) {
  if (samples.empty()) throw Error(ErrorCode::invalid_manifest, "sweep needs at least one sample");
  if (!has_split(samples, Split::train)) throw Error(ErrorCode::invalid_manifest, "sweep needs a train split");

  SweepGrid grid;
  grid.method = method;
  grid.start_steps = start_steps;
  grid.spans = spans;

  std::size_t horizon = std::numeric_limits<std::size_t>::max();
  for (const auto& s : samples) horizon = std::min(horizon, s.trajectory.last_step());

  std::size_t needed = 1;
  for (std::size_t t : start_steps) {
    for (std::size_t s : spans) {
      if (s >= 1 && t + s + 1 <= horizon) needed = std::max(needed, t + s + 1);
    }
  }

  // DAA-S traces are integrated once per sample up to the furthest window.
  std::vector<StateTrace> traces;
  if (method == Method::daa_s) {
    traces.resize(samples.size());
    parallel_for(samples.size(), workers,
                 [&](std::size_t i) { traces[i] = integrate_states(samples[i].trajectory, base.daa_s, needed); });
  }

  const bool test = has_split(samples, Split::test);
  for (std::size_t t : start_steps) {
    for (std::size_t s : spans) {
      SweepCell cell;
      cell.start_step = t;
      cell.span = s;
      cell.valid = s >= 1 && t + s + 1 <= horizon;
      if (cell.valid) {
        DetectorConfig cfg = base;
        cfg.daa_i.start_step = cfg.daa_s.start_step = t;
        cfg.daa_i.span = cfg.daa_s.span = s;
        std::vector<double> scores(samples.size());
        parallel_for(samples.size(), workers, [&](std::size_t i) {
          const auto& traj = samples[i].trajectory;
          scores[i] = method == Method::daa_i
                          ? daa_i_score(traj, cfg.daa_i)
                          : daa_s_score(traces[i], cfg.daa_s, traj.eos_position(), traj.bos_position());
        });
        const auto split = split_scores(samples, scores);
        const auto cal = calibrate_threshold(split.train);
        cell.threshold = cal.threshold;
        cell.train_f1 = cal.f1;
        cell.test_f1 = test ? confusion_at(split.test, cal.threshold).f1() : nan;
        cell.test_auc = nan;
        if (test) {
          try {
            cell.test_auc = auc(split.test);
          } catch (const Error& e) {
            if (e.code() != ErrorCode::single_class_dataset) throw;
          }
        }
      }
      grid.cells.push_back(cell);
    }
  }
  return grid;
}

AblationAxis parse_ablation_axis(std::string_view name) {
  if (name == "gamma_eos" || name == "gamma-eos") return AblationAxis::gamma_eos;
  if (name == "coupling" || name == "c") return AblationAxis::coupling;
  if (name == "token_choice" || name == "token-choice" || name == "token") return AblationAxis::token_choice;
  if (name == "metric") return AblationAxis::metric;
  throw Error(ErrorCode::invalid_axis_value, "unknown ablation axis '" + std::string(name) + "'");
}

std::string_view to_string(AblationAxis axis) noexcept {
  switch (axis) {
    case AblationAxis::gamma_eos: return "gamma_eos";
    case AblationAxis::coupling: return "coupling";
    case AblationAxis::token_choice: return "token_choice";
    case AblationAxis::metric: return "metric";
  }
  return "?";
}

std::vector<std::string> default_ablation_values(AblationAxis axis) {
  switch (axis) {
    case AblationAxis::gamma_eos: return {"-0.5", "-1", "-2", "-5", "-10", "-15"};
    case AblationAxis::coupling: return {"0.5", "1", "5", "10"};
    case AblationAxis::token_choice: return {"eos", "bos", "all_tokens"};
    case AblationAxis::metric: return {"frobenius", "one_norm"};
  }
  return {};
}

namespace {

double parse_real(const std::string& text, AblationAxis axis) {
  std::size_t used = 0;
  double v = nan;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || !std::isfinite(v)) {
    throw Error(ErrorCode::invalid_axis_value,
                std::string(to_string(axis)) + " value '" + text + "' is not a finite number");
  }
  return v;
}

DetectorConfig substitute(const DetectorConfig& base, Method method, AblationAxis axis, const std::string& value) {
  if (method == Method::daa_i && axis != AblationAxis::token_choice) {
    throw Error(ErrorCode::invalid_axis_value, std::string(to_string(axis)) + " has no effect on DAA-I");
  }
  DetectorConfig cfg = base;
  switch (axis) {
    case AblationAxis::gamma_eos: {
      const double g = parse_real(value, axis);
      if (!(g < 0.0)) throw Error(ErrorCode::invalid_axis_value, "gamma_eos must be negative, got " + value);
      cfg.daa_s.gamma_eos = g;
      break;
    }
    case AblationAxis::coupling: {
      const double c = parse_real(value, axis);
      if (!(c > 0.0)) throw Error(ErrorCode::invalid_axis_value, "coupling must be positive, got " + value);
      cfg.daa_s.coupling = c;
      break;
    }
    case AblationAxis::token_choice:
      try {
        cfg.daa_i.token_choice = cfg.daa_s.token_choice = parse_token_choice(value);
      } catch (const Error&) {
        throw Error(ErrorCode::invalid_axis_value, "unknown token choice '" + value + "'");
      }
      break;
    case AblationAxis::metric:
      try {
        cfg.daa_s.metric = parse_metric(value);
        cfg.daa_s.custom_distance = nullptr;
      } catch (const Error&) {
        throw Error(ErrorCode::invalid_axis_value, "unknown metric '" + value + "'");
      }
      break;
  }
  return cfg;
}

}  // namespace

std::vector<AblationRow> run_ablation(const std::vector<LabeledTrajectory>& samples, const DetectorConfig& base,
                                      Method method, AblationAxis axis, const std::vector<std::string>& values,
                                      unsigned workers) {
  if (values.empty()) throw Error(ErrorCode::invalid_axis_value, "no values given for " + std::string(to_string(axis)));
  // Validate every value before any scoring runs.
  std::vector<DetectorConfig> configs;
  configs.reserve(values.size());
  for (const auto& v : values) configs.push_back(substitute(base, method, axis, v));

  if (!has_split(samples, Split::train)) throw Error(ErrorCode::invalid_manifest, "ablation needs a train split");
  const bool test = has_split(samples, Split::test);

  std::vector<AblationRow> rows;
  for (std::size_t k = 0; k < values.size(); ++k) {
    const auto scored = score_samples(samples, configs[k], method, workers);
    std::vector<double> scores;
    scores.reserve(scored.size());
    for (const auto& s : scored) scores.push_back(s.score);
    const auto split = split_scores(samples, scores);
    const auto cal = calibrate_threshold(split.train);
    AblationRow row;
    row.value = values[k];
    row.threshold = cal.threshold;
    row.train_f1 = cal.f1;
    row.report = evaluate(test ? split.test : split.train, cal.threshold);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string ablation_csv(const std::vector<AblationRow>& rows) {
  std::ostringstream out;
  out << "value,threshold,train_f1,f1,auc,tp,fp,tn,fn\n";
  for (const auto& r : rows) {
    const auto& c = r.report.counts;
    out << r.value << ',' << fmt(r.threshold) << ',' << fmt(r.train_f1) << ',' << fmt(r.report.f1) << ','
        << fmt(r.report.auc) << ',' << c.tp << ',' << c.fp << ',' << c.tn << ',' << c.fn << '\n';
  }
  return out.str();
}

}  // namespace daa
