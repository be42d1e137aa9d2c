#include "daa/pipeline.hpp"

#include <chrono>
#include <optional>

#include "daa/daat_format.hpp"
#include "daa/errors.hpp"
#include "daa/parallel.hpp"

namespace daa {

MethodSelection parse_method_selection(std::string_view name) {
  if (name == "daa_i" || name == "daa-i" || name == "I") return MethodSelection::daa_i;
  if (name == "daa_s" || name == "daa-s" || name == "S") return MethodSelection::daa_s;
  if (name == "both") return MethodSelection::both;
  throw Error(ErrorCode::invalid_params, "unknown method '" + std::string(name) + "'");
}

std::string_view to_string(MethodSelection m) noexcept {
  switch (m) {
    case MethodSelection::daa_i: return "daa_i";
    case MethodSelection::daa_s: return "daa_s";
    case MethodSelection::both: return "both";
  }
  return "?";
}

bool includes(MethodSelection selection, Method method) noexcept {
  if (selection == MethodSelection::both) return true;
  return (selection == MethodSelection::daa_i) == (method == Method::daa_i);
}

DetectorConfig DetectorConfig::preset(std::string_view name) {
  if (name == "paper-sd14") return {DaaIConfig::paper_sd14(), DaaSConfig::paper_sd14()};
  throw Error(ErrorCode::invalid_params, "unknown preset '" + std::string(name) + "'");
}

namespace {

template <class F>
double timed(F&& f, double& ms) {
  const auto start = std::chrono::steady_clock::now();
  const double value = f();
  ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return value;
}

}  // namespace

double score_with(const Trajectory& traj, const DetectorConfig& cfg, Method method) {
  return method == Method::daa_i ? daa_i_score(traj, cfg.daa_i) : daa_s_score(traj, cfg.daa_s);
}

ScoreReport score_trajectory(const Trajectory& traj, const DetectorConfig& cfg, MethodSelection methods) {
  ScoreReport r;
  r.sample_id = traj.sample_id();
  if (includes(methods, Method::daa_i)) {
    r.daa_i = timed([&] { return daa_i_score(traj, cfg.daa_i); }, r.daa_i_ms);
    r.verdict_i = classify_i(*r.daa_i, cfg.daa_i.threshold);
  }
  if (includes(methods, Method::daa_s)) {
    r.daa_s = timed([&] { return daa_s_score(traj, cfg.daa_s); }, r.daa_s_ms);
    r.verdict_s = classify_s(*r.daa_s, cfg.daa_s.threshold);
  }
  return r;
}

std::vector<LabeledTrajectory> load_samples(const std::vector<ManifestEntry>& entries, unsigned workers) {
  std::vector<std::optional<Trajectory>> loaded(entries.size());
  parallel_for(entries.size(), workers, [&](std::size_t i) { loaded[i] = read_trajectory_file(entries[i].path); });
  std::vector<LabeledTrajectory> out;
  out.reserve(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) out.push_back({entries[i], std::move(*loaded[i])});
  return out;
}

std::vector<ScoredSample> score_samples(const std::vector<LabeledTrajectory>& samples, const DetectorConfig& cfg,
                                        Method method, unsigned workers) {
  std::vector<ScoredSample> out(samples.size());
  parallel_for(samples.size(), workers, [&](std::size_t i) {
    const auto& s = samples[i];
    const std::string id = s.trajectory.sample_id().empty() ? s.entry.path.stem().string() : s.trajectory.sample_id();
    out[i] = {id, score_with(s.trajectory, cfg, method), s.entry.label, s.entry.scenario};
  });
  return out;
}

}  // namespace daa
