#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace daa {

struct SolverOptions {
  double abs_tol = 1e-9;
  double rel_tol = 1e-7;
  double initial_step = 1e-2;
  double safety = 0.9;
  double min_growth = 0.2;
  double max_growth = 5.0;
  double min_step = 1e-12;
};

struct SolverStats {
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
  std::size_t rhs_evaluations = 0;
  /// Largest embedded (4th vs 5th order) absolute error estimate among accepted steps.
  double max_error_estimate = 0.0;
};

/// dx = f(segment, t, x). `segment` is the index k of the interval
/// [breakpoints[k], breakpoints[k+1]] that t lies in, so piecewise-defined
/// systems never have to search for it.
using SegmentRhs =
    std::function<void(std::size_t segment, double t, const Eigen::VectorXd& x, Eigen::VectorXd& dx)>;

struct Rkf45Result {
  /// samples[k] is the state at breakpoints[k].
  std::vector<Eigen::VectorXd> samples;
  SolverStats stats;
};

/// Adaptive Runge-Kutta-Fehlberg 4(5) with the classical Fehlberg tableau.
/// The difference between the embedded fourth- and fifth-order solutions
/// drives step-size control, and the fifth-order one is propagated. Steps never straddle a breakpoint; the step size
/// carries over from one segment to the next.
///
/// Throws SolverStalled when the step size falls below min_step and
/// NonFiniteState when the state stops being finite.
Rkf45Result integrate_rkf45(const SegmentRhs& rhs, const Eigen::VectorXd& x0,
                            std::span<const double> breakpoints, const SolverOptions& options = {});

}  // namespace daa
