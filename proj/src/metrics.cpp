#include "daa/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "daa/errors.hpp"
#include "daa/scoring.hpp"

namespace daa {

double Confusion::precision() const noexcept {
  return tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
}

double Confusion::recall() const noexcept {
  return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
}

double Confusion::f1() const noexcept {
  // 2PR/(P+R) == 2TP/(2TP+FP+FN), and the latter avoids a 0/0 when TP == 0.
  const std::size_t denom = 2 * tp + fp + fn;
  return denom == 0 || tp == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

Confusion confusion(std::span<const Verdict> predictions, std::span<const Label> labels) {
  if (predictions.size() != labels.size()) {
    throw Error(ErrorCode::length_mismatch, std::to_string(predictions.size()) + " predictions for " +
                                                std::to_string(labels.size()) + " labels");
  }
  Confusion c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool predicted = predictions[i] == Label::backdoor;
    const bool actual = labels[i] == Label::backdoor;
    if (predicted && actual) ++c.tp;
    else if (predicted) ++c.fp;
    else if (actual) ++c.fn;
    else ++c.tn;
  }
  return c;
}

Confusion confusion_at(std::span<const ScoredSample> scores, double threshold) {
  Confusion c;
  for (const auto& s : scores) {
    const bool predicted = classify(s.score, threshold) == Label::backdoor;
    const bool actual = s.label == Label::backdoor;
    if (predicted && actual) ++c.tp;
    else if (predicted) ++c.fp;
    else if (actual) ++c.fn;
    else ++c.tn;
  }
  return c;
}

double f1_score(std::span<const Verdict> predictions, std::span<const Label> labels) {
  return confusion(predictions, labels).f1();
}

namespace {

void require_both_classes(std::span<const ScoredSample> scores) {
  std::size_t backdoor = 0;
  for (const auto& s : scores) {
    if (!std::isfinite(s.score)) {
      throw Error(ErrorCode::non_finite_value, "score of '" + s.sample_id + "' is not finite");
    }
    if (s.label == Label::backdoor) ++backdoor;
  }
  if (backdoor == 0 || backdoor == scores.size()) {
    throw Error(ErrorCode::single_class_dataset,
                std::to_string(scores.size()) + " samples, " + std::to_string(backdoor) + " backdoor");
  }
}

std::vector<double> sorted_scores(std::span<const ScoredSample> scores) {
  std::vector<double> v;
  v.reserve(scores.size());
  for (const auto& s : scores) v.push_back(s.score);
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

double auc(std::span<const ScoredSample> scores) {
  require_both_classes(scores);
  // Mann-Whitney with midranks over ascending scores: the rank sum of the
  // benign class counts (benign, backdoor) pairs where benign is higher.
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a].score < scores[b].score; });
  double benign_rank_sum = 0.0;
  std::size_t n_benign = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]].score == scores[order[i]].score) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (scores[order[k]].label == Label::benign) {
        benign_rank_sum += midrank;
        ++n_benign;
      }
    }
    i = j;
  }
  const double n_g = static_cast<double>(n_benign);
  const double n_b = static_cast<double>(scores.size() - n_benign);
  const double u = benign_rank_sum - n_g * (n_g + 1.0) / 2.0;
  return u / (n_g * n_b);
}

std::vector<RocPoint> roc_points(std::span<const ScoredSample> scores) {
  require_both_classes(scores);
  const auto v = sorted_scores(scores);
  double positives = 0.0;
  for (const auto& s : scores) positives += s.label == Label::backdoor ? 1.0 : 0.0;
  const double negatives = static_cast<double>(scores.size()) - positives;

  std::vector<RocPoint> points;
  points.push_back({-std::numeric_limits<double>::infinity(), 0.0, 0.0});
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i + 1 < v.size() && v[i + 1] == v[i]) continue;
    const Confusion c = confusion_at(scores, v[i]);
    points.push_back({v[i], static_cast<double>(c.fp) / negatives, static_cast<double>(c.tp) / positives});
  }
  return points;
}

std::vector<double> threshold_candidates(std::span<const ScoredSample> scores) {
  const auto v = sorted_scores(scores);
  std::vector<double> out;
  out.push_back(-std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    if (v[i + 1] != v[i]) out.push_back(v[i] + (v[i + 1] - v[i]) / 2.0);
  }
  if (!v.empty()) out.push_back(v.back());
  return out;
}

Calibration calibrate_threshold(std::span<const ScoredSample> scores) {
  require_both_classes(scores);
  Calibration best{0.0, -1.0};
  for (double candidate : threshold_candidates(scores)) {
    const double f1 = confusion_at(scores, candidate).f1();
    if (f1 > best.f1) best = {candidate, f1};
  }
  return best;
}

EvalReport evaluate(std::span<const ScoredSample> scores, double threshold) {
  EvalReport report;
  report.threshold = threshold;
  report.counts = confusion_at(scores, threshold);
  report.f1 = report.counts.f1();
  report.auc = auc(scores);

  std::map<std::string, std::vector<ScoredSample>> groups;
  for (const auto& s : scores) groups[s.scenario].push_back(s);
  for (const auto& [name, group] : groups) {
    ScenarioReport sr;
    sr.counts = confusion_at(group, threshold);
    sr.f1 = sr.counts.f1();
    const bool mixed = sr.counts.tp + sr.counts.fn > 0 && sr.counts.fp + sr.counts.tn > 0;
    sr.auc = mixed ? auc(group) : std::numeric_limits<double>::quiet_NaN();
    report.per_scenario.emplace(name, sr);
  }
  return report;
}

namespace {

nlohmann::ordered_json number_or_null(double v) {
  if (std::isfinite(v)) return v;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return nullptr;
}

void put_counts(nlohmann::ordered_json& j, const Confusion& c) {
  j["tp"] = c.tp;
  j["fp"] = c.fp;
  j["tn"] = c.tn;
  j["fn"] = c.fn;
  j["n"] = c.total();
}

}  // namespace

std::string to_json(const EvalReport& report, int indent) {
  nlohmann::ordered_json j;
  j["f1"] = report.f1;
  j["auc"] = number_or_null(report.auc);
  j["threshold"] = number_or_null(report.threshold);
  j["precision"] = report.counts.precision();
  j["recall"] = report.counts.recall();
  put_counts(j, report.counts);
  auto& scen = j["per_scenario"] = nlohmann::ordered_json::object();
  for (const auto& [name, sr] : report.per_scenario) {
    nlohmann::ordered_json s;
    s["f1"] = sr.f1;
    s["auc"] = number_or_null(sr.auc);
    put_counts(s, sr.counts);
    scen[name] = s;
  }
  return j.dump(indent);
}

}  // namespace daa
