#include "daa/rkf45.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "daa/errors.hpp"

namespace daa {
namespace {

// Fehlberg (1969) coefficients.
constexpr double c2 = 1.0 / 4.0, c3 = 3.0 / 8.0, c4 = 12.0 / 13.0, c5 = 1.0, c6 = 1.0 / 2.0;

constexpr double a21 = 1.0 / 4.0;
constexpr double a31 = 3.0 / 32.0, a32 = 9.0 / 32.0;
constexpr double a41 = 1932.0 / 2197.0, a42 = -7200.0 / 2197.0, a43 = 7296.0 / 2197.0;
constexpr double a51 = 439.0 / 216.0, a52 = -8.0, a53 = 3680.0 / 513.0, a54 = -845.0 / 4104.0;
constexpr double a61 = -8.0 / 27.0, a62 = 2.0, a63 = -3544.0 / 2565.0, a64 = 1859.0 / 4104.0,
                 a65 = -11.0 / 40.0;

constexpr double b1 = 16.0 / 135.0, b3 = 6656.0 / 12825.0, b4 = 28561.0 / 56430.0, b5 = -9.0 / 50.0,
                 b6 = 2.0 / 55.0;

// fifth-order weights minus fourth-order weights
constexpr double e1 = 1.0 / 360.0, e3 = -128.0 / 4275.0, e4 = -2197.0 / 75240.0, e5 = 1.0 / 50.0,
                 e6 = 2.0 / 55.0;

}  // namespace

Rkf45Result integrate_rkf45(const SegmentRhs& rhs, const Eigen::VectorXd& x0,
                            std::span<const double> breakpoints, const SolverOptions& options) {
  if (breakpoints.empty()) throw Error(ErrorCode::invalid_params, "no integration breakpoints");
  for (std::size_t k = 1; k < breakpoints.size(); ++k) {
    if (!(breakpoints[k] > breakpoints[k - 1])) {
      throw Error(ErrorCode::invalid_params, "breakpoints must be strictly increasing");
    }
  }
  if (!(options.abs_tol > 0.0) || !(options.rel_tol >= 0.0) || !(options.initial_step > 0.0)) {
    throw Error(ErrorCode::invalid_params, "solver tolerances and initial step must be positive");
  }
  if (!x0.allFinite()) throw Error(ErrorCode::non_finite_state, "initial state is not finite");

  const Eigen::Index n = x0.size();
  Rkf45Result result;
  result.samples.reserve(breakpoints.size());
  result.samples.push_back(x0);

  Eigen::VectorXd x = x0;
  Eigen::VectorXd k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), stage(n), x_new(n), err(n);
  double h = options.initial_step;
  auto& stats = result.stats;

  for (std::size_t seg = 0; seg + 1 < breakpoints.size(); ++seg) {
    double t = breakpoints[seg];
    const double t_end = breakpoints[seg + 1];
    while (t < t_end) {
      const double remaining = t_end - t;
      // Swallow a sliver that would otherwise force a near-zero final step.
      const bool last = h >= remaining * (1.0 - 1e-12);
      const double step = last ? remaining : h;

      rhs(seg, t, x, k1);
      if (!k1.allFinite()) {
        throw Error(ErrorCode::non_finite_state, "derivative not finite at t=" + std::to_string(t));
      }
      stage = x + step * (a21 * k1);
      rhs(seg, t + c2 * step, stage, k2);
      stage = x + step * (a31 * k1 + a32 * k2);
      rhs(seg, t + c3 * step, stage, k3);
      stage = x + step * (a41 * k1 + a42 * k2 + a43 * k3);
      rhs(seg, t + c4 * step, stage, k4);
      stage = x + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
      rhs(seg, t + c5 * step, stage, k5);
      stage = x + step * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
      rhs(seg, t + c6 * step, stage, k6);
      stats.rhs_evaluations += 6;

      x_new = x + step * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      err = step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6);

      double norm = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double scale =
            options.abs_tol + options.rel_tol * std::max(std::abs(x[i]), std::abs(x_new[i]));
        norm = std::max(norm, std::abs(err[i]) / scale);
      }
      if (!std::isfinite(norm) || !x_new.allFinite()) {
        if (!x.allFinite()) throw Error(ErrorCode::non_finite_state, "state diverged at t=" + std::to_string(t));
        norm = std::numeric_limits<double>::infinity();
      }

      const double factor =
          norm == 0.0 ? options.max_growth
                      : std::clamp(options.safety * std::pow(norm, -0.2), options.min_growth,
                                   options.max_growth);

      if (norm <= 1.0) {
        x.swap(x_new);
        t = last ? t_end : t + step;
        ++stats.accepted_steps;
        stats.max_error_estimate = std::max(stats.max_error_estimate, err.cwiseAbs().maxCoeff());
        // A step shortened to land on the breakpoint says nothing about the
        // admissible size, so keep the larger of the two proposals.
        h = last ? std::max(h, step * factor) : step * factor;
      } else {
        ++stats.rejected_steps;
        h = step * factor;
      }
      if (h < options.min_step) {
        throw Error(ErrorCode::solver_stalled, "step size " + std::to_string(h) +
                                                   " fell below minimum at t=" + std::to_string(t));
      }
    }
    if (!x.allFinite()) throw Error(ErrorCode::non_finite_state, "state not finite at t=" + std::to_string(t_end));
    result.samples.push_back(x);
  }
  return result;
}

}  // namespace daa
