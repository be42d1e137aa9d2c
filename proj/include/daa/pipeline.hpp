#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "daa/daa_independent.hpp"
#include "daa/daa_system.hpp"
#include "daa/manifest.hpp"
#include "daa/metrics.hpp"

namespace daa {

enum class MethodSelection { daa_i, daa_s, both };

MethodSelection parse_method_selection(std::string_view name);
std::string_view to_string(MethodSelection m) noexcept;
bool includes(MethodSelection selection, Method method) noexcept;

struct DetectorConfig {
  DaaIConfig daa_i;
  DaaSConfig daa_s;

  /// Known names: "paper-sd14".
  static DetectorConfig preset(std::string_view name);
};

struct ScoreReport {
  std::string sample_id;
  std::optional<double> daa_i;
  std::optional<double> daa_s;
  std::optional<Verdict> verdict_i;
  std::optional<Verdict> verdict_s;
  double daa_i_ms = 0.0;
  double daa_s_ms = 0.0;
};

/// Both detectors share the loaded frames, so one pass serves either or both.
ScoreReport score_trajectory(const Trajectory& traj, const DetectorConfig& cfg, MethodSelection methods);

double score_with(const Trajectory& traj, const DetectorConfig& cfg, Method method);

/// A manifest entry together with its loaded trajectory.
struct LabeledTrajectory {
  ManifestEntry entry;
  Trajectory trajectory;
};

/// Loads every entry in parallel; output order follows the input.
std::vector<LabeledTrajectory> load_samples(const std::vector<ManifestEntry>& entries, unsigned workers = 0);

/// Scores every trajectory with one detector, in input order.
std::vector<ScoredSample> score_samples(const std::vector<LabeledTrajectory>& samples, const DetectorConfig& cfg,
                                        Method method, unsigned workers = 0);

}  // namespace daa
