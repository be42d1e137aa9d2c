#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "daa/manifest.hpp"

namespace daa {

struct ScoredSample {
  std::string sample_id;
  double score = 0.0;
  Label label = Label::benign;
  std::string scenario;
};

/// Backdoor is the positive class.
struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const noexcept { return tp + fp + tn + fn; }
  double precision() const noexcept;
  double recall() const noexcept;
  double f1() const noexcept;
};

Confusion confusion(std::span<const Verdict> predictions, std::span<const Label> labels);
Confusion confusion_at(std::span<const ScoredSample> scores, double threshold);

/// 0 when precision + recall is 0. Throws LengthMismatch.
double f1_score(std::span<const Verdict> predictions, std::span<const Label> labels);

/// Probability that a random backdoor sample scores strictly below a random
/// benign one, ties counting one half. Throws SingleClassDataset.
double auc(std::span<const ScoredSample> scores);

struct RocPoint {
  double threshold;
  double fpr;
  double tpr;
};

/// Operating points for "backdoor iff score <= threshold", from the
/// all-benign corner (threshold -inf) to the all-backdoor corner. The
/// trapezoidal area under the points equals auc().
std::vector<RocPoint> roc_points(std::span<const ScoredSample> scores);

struct Calibration {
  double threshold = 0.0;
  double f1 = 0.0;
};

/// Candidate thresholds: -inf, the midpoints between consecutive distinct
/// sorted scores, and the largest score (which already labels every sample
/// backdoor). Returns the F1 maximiser; ties go to the smaller threshold.
Calibration calibrate_threshold(std::span<const ScoredSample> scores);

/// The candidate list calibrate_threshold searches, in ascending order.
std::vector<double> threshold_candidates(std::span<const ScoredSample> scores);

struct ScenarioReport {
  Confusion counts;
  double f1 = 0.0;
  /// NaN when the scenario holds a single class.
  double auc = 0.0;
};

struct EvalReport {
  double f1 = 0.0;
  double auc = 0.0;
  double threshold = 0.0;
  Confusion counts;
  std::map<std::string, ScenarioReport> per_scenario;
};

EvalReport evaluate(std::span<const ScoredSample> scores, double threshold);

/// Field names: f1, auc, threshold, tp, fp, tn, fn, n, per_scenario.
std::string to_json(const EvalReport& report, int indent = 2);

}  // namespace daa
