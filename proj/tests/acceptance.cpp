// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "daa/daa_independent.hpp"
#include "daa/daa_system.hpp"
#include "daa/errors.hpp"
#include "daa/metrics.hpp"
#include "daa/pipeline.hpp"
#include "daa/rer_analysis.hpp"
#include "daa/sweep.hpp"
#include "daa/synthetic.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace daa;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Outcome lyapunov_negativity() {
  const auto start = Clock::now();
  std::mt19937_64 rng(1001);
  std::uniform_int_distribution<std::size_t> tokens(2, 20), dims(1, 6);
  std::normal_distribution<double> n01(0.0, 1.0);
  const DaaSConfig cfg;
  std::size_t violations = 0;
  double worst_v = -std::numeric_limits<double>::infinity();
  double worst_eig = -std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t L = tokens(rng);
    const auto traj = daa::testing::random_trajectory(rng, L, 1, dims(rng));
    const auto maps = traj.frame(0);
    const Eigen::MatrixXd a = laplacian(edge_weights(maps)).matrix;
    const auto params = cfg.stability(traj);
    const Eigen::MatrixXd f = params.gamma.asDiagonal();
    Eigen::VectorXd x(static_cast<Eigen::Index>(L));
    do {
      for (auto& v : x) v = n01(rng);
    } while (x.norm() == 0.0);
    const double v = lyapunov_derivative(x, f, a, params.coupling);
    worst_v = std::max(worst_v, v);
    if (!(v < 0.0)) ++violations;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a.transpose() + a);
    worst_eig = std::max(worst_eig, eig.eigenvalues().maxCoeff());
  }
  const double secs = seconds_since(start);
  Outcome o;
  o.pass = violations == 0 && worst_eig <= 1e-9 && secs < 10.0;
  o.detail = fmt("1000 states, max dV/dt %.3g, %zu non-negative, max eig(A^T+A) %.3g, %.2f s", worst_v, violations,
                 worst_eig, secs);
  return o;
}

Outcome ode_oracle() {
  const auto start = Clock::now();
  std::mt19937_64 rng(1002);
  std::uniform_int_distribution<std::size_t> tokens(2, 6), dims(1, 4);
  std::uniform_real_distribution<double> gamma(-10.0, -0.1), coupling(0.5, 10.0);
  constexpr std::size_t horizon = 50;
  double worst_global = 0.0, worst_pointwise = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t L = tokens(rng);
    const auto traj = daa::testing::constant_trajectory(rng, L, horizon, dims(rng));
    DaaSConfig cfg;
    cfg.gamma_other = gamma(rng);
    cfg.gamma_eos = gamma(rng);
    cfg.coupling = coupling(rng);
    const auto trace = integrate_states(traj, cfg, horizon);

    const auto params = cfg.stability(traj);
    const Eigen::MatrixXd m =
        Eigen::MatrixXd(params.gamma.asDiagonal()) + cfg.coupling * oracle::laplacian_of_frame(traj, 0);
    const Eigen::VectorXd x0 = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(L));
    double max_ref = 0.0, max_err = 0.0;
    for (std::size_t k = 0; k <= horizon; ++k) {
      const Eigen::VectorXd ref = oracle::symmetric_expm_apply(m, static_cast<double>(k), x0);
      const Eigen::VectorXd got = trace.states.row(static_cast<Eigen::Index>(k)).transpose();
      const double err = (got - ref).norm();
      max_ref = std::max(max_ref, ref.norm());
      max_err = std::max(max_err, err);
      if (ref.norm() >= 1e-3) worst_pointwise = std::max(worst_pointwise, err / ref.norm());
    }
    worst_global = std::max(worst_global, max_err / max_ref);
  }
  const double secs = seconds_since(start);
  Outcome o;
  o.pass = worst_global < 1e-6 && worst_pointwise < 1e-6 && secs < 30.0;
  o.detail = fmt("50 systems, horizon 50, max relative error %.3g (pointwise where |x| >= 1e-3: %.3g), %.2f s",
                 worst_global, worst_pointwise, secs);
  return o;
}

Outcome brute_force() {
  std::mt19937_64 rng(1003);
  std::uniform_int_distribution<std::size_t> tokens(2, 5), steps(2, 6), dims(1, 4);
  double err_i = 0.0, err_rer = 0.0, err_s = 0.0;
  std::size_t windows = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto traj = daa::testing::random_trajectory(rng, tokens(rng), steps(rng), dims(rng));
    const std::size_t T = traj.last_step();
    for (std::size_t k = 0; k < T; ++k) {
      const Eigen::MatrixXd m = rer_eos(traj, k);
      for (std::size_t r = 0; r < traj.dim(); ++r) {
        for (std::size_t c = 0; c < traj.dim(); ++c) {
          const double d = m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) -
                           oracle::rer_entry(traj, k, r, c);
          err_rer = std::max(err_rer, std::abs(d));
        }
      }
    }
    const DaaSConfig base_s;
    const auto trace = integrate_states(traj, base_s);
    const auto rows = oracle::rows_of(trace.states);
    for (std::size_t t = 0; t + 2 <= T; ++t) {
      for (std::size_t s = 1; t + s + 1 <= T; ++s) {
        DaaIConfig ci;
        ci.start_step = t;
        ci.span = s;
        err_i = std::max(err_i, std::abs(daa_i_score(traj, ci) - oracle::daa_i(traj, t, s)));
        DaaSConfig cs = base_s;
        cs.start_step = t;
        cs.span = s;
        err_s = std::max(err_s, std::abs(daa_s_score(trace, cs, traj.eos_position()) -
                                         oracle::daa_s_from_states(rows, t, s)));
        ++windows;
      }
    }
  }
  Outcome o;
  o.pass = err_i <= 1e-12 && err_rer <= 1e-12 && err_s <= 1e-12 && windows > 0;
  o.detail = fmt("200 trajectories, %zu windows, max |diff| daa_i %.3g, rer_eos %.3g, daa_s %.3g", windows, err_i,
                 err_rer, err_s);
  return o;
}

Outcome laplacian_structure() {
  std::mt19937_64 rng(1004);
  std::uniform_int_distribution<std::size_t> tokens(2, 20), dims(1, 8);
  double worst_sum = 0.0, worst_asym = 0.0;
  std::size_t range_violations = 0, diag_violations = 0;
  for (int frame = 0; frame < 1000; ++frame) {
    const auto traj = frame % 10 == 0 ? daa::testing::constant_trajectory(rng, tokens(rng), 1, dims(rng))
                                      : daa::testing::random_trajectory(rng, tokens(rng), 1, dims(rng));
    const auto maps = traj.frame(0);
    const Metric metric = frame % 2 == 0 ? Metric::frobenius : Metric::one_norm;
    const Eigen::MatrixXd w = edge_weights(maps, metric).weights;
    const Eigen::MatrixXd a = laplacian(EdgeWeights{w}).matrix;
    worst_asym = std::max(worst_asym, (w - w.transpose()).cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      if (w(i, i) != 0.0) ++diag_violations;
      for (Eigen::Index j = 0; j < w.cols(); ++j) {
        if (!(w(i, j) >= 0.0 && w(i, j) <= 1.0)) ++range_violations;
      }
    }
    worst_sum = std::max({worst_sum, a.rowwise().sum().cwiseAbs().maxCoeff(), a.colwise().sum().cwiseAbs().maxCoeff()});
  }
  Outcome o;
  o.pass = worst_sum < 1e-9 && worst_asym == 0.0 && range_violations == 0 && diag_violations == 0;
  o.detail = fmt("1000 frames, max |row/col sum| %.3g, max |W - W^T| %.3g, %zu out of [0,1], %zu nonzero diagonals",
                 worst_sum, worst_asym, range_violations, diag_violations);
  return o;
}

struct SyntheticData {
  daa::testing::TempDir dir{"acceptance"};
  std::vector<LabeledTrajectory> samples;

  SyntheticData() {
    SynthDatasetParams p;
    p.rho_backdoor = 0.6;
    p.rho_benign = 1.2;
    p.base.noise_sigma = 0.05;
    p.base.seed = 2024;
    samples = load_samples(gen_dataset(200, 200, p, dir.path()).entries);
  }
};

SyntheticData& synthetic_data() {
  static SyntheticData data;
  return data;
}

std::vector<LabeledTrajectory> split_of(const std::vector<LabeledTrajectory>& all, Split split) {
  std::vector<LabeledTrajectory> out;
  for (const auto& s : all) {
    if (s.entry.split == split) out.push_back(s);
  }
  return out;
}

Outcome synthetic_end_to_end() {
  const auto start = Clock::now();
  auto& data = synthetic_data();
  const auto train = split_of(data.samples, Split::train);
  const auto test = split_of(data.samples, Split::test);
  const DetectorConfig cfg = DetectorConfig::preset("paper-sd14");
  Outcome o;
  o.detail = fmt("%zu train / %zu test", train.size(), test.size());
  for (Method m : {Method::daa_i, Method::daa_s}) {
    const auto cal = calibrate_threshold(score_samples(train, cfg, m));
    const auto report = evaluate(score_samples(test, cfg, m), cal.threshold);
    o.pass = o.pass && report.auc >= 0.95 && report.f1 >= 0.90;
    o.detail += fmt(", %s AUC %.4f F1 %.4f", std::string(to_string(m)).c_str(), report.auc, report.f1);
  }
  const double secs = seconds_since(start);
  o.pass = o.pass && secs < 120.0;
  o.detail += fmt(", %.2f s", secs);
  return o;
}

Outcome threshold_semantics() {
  std::mt19937_64 rng(1006);
  std::size_t checks = 0, failures = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto traj = daa::testing::random_trajectory(rng, 3 + trial % 5, 8, 3);
    DetectorConfig cfg = DetectorConfig::preset("paper-sd14");
    const auto first = score_trajectory(traj, cfg, MethodSelection::both);
    cfg.daa_i.threshold = *first.daa_i;
    cfg.daa_s.threshold = *first.daa_s;
    const auto at = score_trajectory(traj, cfg, MethodSelection::both);
    if (at.verdict_i != Label::backdoor || at.verdict_s != Label::backdoor) ++failures;
    cfg.daa_i.threshold = std::nextafter(*first.daa_i, -INFINITY);
    cfg.daa_s.threshold = std::nextafter(*first.daa_s, -INFINITY);
    const auto below = score_trajectory(traj, cfg, MethodSelection::both);
    if (below.verdict_i != Label::benign || below.verdict_s != Label::benign) ++failures;
    checks += 4;
  }
  Outcome o;
  o.pass = failures == 0;
  o.detail = fmt("%zu verdicts at alpha = score and one ulp below, %zu wrong", checks, failures);
  return o;
}

Outcome constant_trajectory_sanity() {
  std::mt19937_64 rng(1007);
  std::size_t failures = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto traj = daa::testing::constant_trajectory(rng, 2 + trial % 10, 8, 1 + trial % 6);
    const DetectorConfig cfg = DetectorConfig::preset("paper-sd14");
    const auto r = score_trajectory(traj, cfg, MethodSelection::daa_i);
    worst = std::max(worst, std::abs(*r.daa_i));
    if (*r.daa_i != 0.0 || r.verdict_i != Label::benign) ++failures;
  }
  Outcome o;
  o.pass = failures == 0;
  o.detail = fmt("50 constant trajectories, max |score| %.3g, %zu not benign at alpha -0.0011", worst, failures);
  return o;
}

double median_ms(const std::function<void()>& fn, int repeats) {
  std::vector<double> ms;
  for (int i = 0; i < repeats; ++i) {
    const auto start = Clock::now();
    fn();
    ms.push_back(seconds_since(start) * 1e3);
  }
  std::sort(ms.begin(), ms.end());
  return ms[ms.size() / 2];
}

Outcome performance() {
  std::mt19937_64 rng(1008);
  const auto traj = daa::testing::random_trajectory(rng, 77, 50, 16);
  const DetectorConfig cfg = DetectorConfig::preset("paper-sd14");
  volatile double sink = 0.0;
  const double ms_i = median_ms([&] { sink = sink + daa_i_score(traj, cfg.daa_i); }, 21);
  const double ms_s = median_ms([&] { sink = sink + daa_s_score(traj, cfg.daa_s); }, 11);
  Outcome o;
  o.pass = ms_i < 10.0 && ms_s < 200.0;
  o.detail = fmt("L=77 D=16, single thread, median DAA-I %.3f ms, DAA-S %.3f ms", ms_i, ms_s);
  return o;
}

Outcome sweep_reproducer() {
  const auto start = Clock::now();
  auto& data = synthetic_data();
  const auto train = split_of(data.samples, Split::train);
  const auto test = split_of(data.samples, Split::test);
  const DetectorConfig base = DetectorConfig::preset("paper-sd14");
  const std::vector<std::size_t> ts{0, 1, 2, 3}, ss{1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::size_t cells = 0, mismatches = 0;
  for (Method m : {Method::daa_i, Method::daa_s}) {
    const auto grid = sweep_params(data.samples, base, m, ts, ss);
    for (std::size_t t : ts) {
      for (std::size_t s : ss) {
        const auto& cell = grid.at(t, s);
        DetectorConfig cfg = base;
        cfg.daa_i.start_step = cfg.daa_s.start_step = t;
        cfg.daa_i.span = cfg.daa_s.span = s;
        const auto cal = calibrate_threshold(score_samples(train, cfg, m));
        const auto report = evaluate(score_samples(test, cfg, m), cal.threshold);
        const bool same = cell.valid && cell.threshold == cal.threshold && cell.train_f1 == cal.f1 &&
                          cell.test_f1 == report.f1 && cell.test_auc == report.auc;
        if (!same) ++mismatches;
        ++cells;
      }
    }
  }
  const double secs = seconds_since(start);
  Outcome o;
  o.pass = mismatches == 0 && cells == 72;
  o.detail = fmt("t 0..3 x s 1..9 for both detectors, %zu cells, %zu differ from single runs, %.2f s", cells,
                 mismatches, secs);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, Outcome (*)()>> criteria{
      {"lyapunov_negativity", lyapunov_negativity},
      {"ode_oracle", ode_oracle},
      {"brute_force_equivalence", brute_force},
      {"laplacian_structure", laplacian_structure},
      {"synthetic_end_to_end", synthetic_end_to_end},
      {"threshold_semantics", threshold_semantics},
      {"constant_trajectory_sanity", constant_trajectory_sanity},
      {"performance_envelope", performance},
      {"sweep_reproducer", sweep_reproducer},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("threw: ") + e.what();
    }
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
  return failed == 0 ? 0 : 1;
}
