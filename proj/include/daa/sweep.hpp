#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "daa/pipeline.hpp"

namespace daa {

struct SweepCell {
  std::size_t start_step = 0;
  std::size_t span = 0;
  bool valid = false;
  double threshold = 0.0;
  /// F1 of the calibrated threshold on the train split.
  double train_f1 = 0.0;
  /// NaN when there is no test split.
  double test_f1 = 0.0;
  double test_auc = 0.0;
};

struct SweepGrid {
  Method method = Method::daa_i;
  std::vector<std::size_t> start_steps;
  std::vector<std::size_t> spans;
  /// Row-major: cells[i * spans.size() + j] is (start_steps[i], spans[j]).
  std::vector<SweepCell> cells;

  const SweepCell& at(std::size_t t, std::size_t s) const;

  /// One row per start step, one column per span, train F1 in percent with
  /// two decimals; cells outside the trajectory horizon read "invalid".
  std::string grid_csv() const;
  /// t,s,valid,threshold,train_f1,test_f1,test_auc
  std::string long_csv() const;
};

/// For every (t, s), recalibrates the threshold on the train samples and
/// scores the test samples with it. A cell is valid when t + s + 1 <= T for
/// the shortest trajectory. Each DAA-S trajectory is integrated once and every
/// window is read off that trace, which gives the same numbers as a separate
/// run per cell.
SweepGrid sweep_params(const std::vector<LabeledTrajectory>& samples, const DetectorConfig& base, Method method,
                       const std::vector<std::size_t>& start_steps, const std::vector<std::size_t>& spans,
                       unsigned workers = 0);

enum class AblationAxis { gamma_eos, coupling, token_choice, metric };

AblationAxis parse_ablation_axis(std::string_view name);
std::string_view to_string(AblationAxis axis) noexcept;

struct AblationRow {
  std::string value;
  double threshold = 0.0;
  double train_f1 = 0.0;
  EvalReport report;  // on the test split, or train when no test split exists
};

/// Reruns calibration and evaluation once per value with that value
/// substituted into `base`. gamma_eos, coupling and metric only exist for
/// DAA-S. Throws InvalidAxisValue for values outside their domain.
std::vector<AblationRow> run_ablation(const std::vector<LabeledTrajectory>& samples, const DetectorConfig& base,
                                      Method method, AblationAxis axis, const std::vector<std::string>& values,
                                      unsigned workers = 0);

/// value,threshold,train_f1,f1,auc,tp,fp,tn,fn
std::string ablation_csv(const std::vector<AblationRow>& rows);

/// Built-in value list for each axis.
std::vector<std::string> default_ablation_values(AblationAxis axis);

}  // namespace daa
