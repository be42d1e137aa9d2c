#pragma once

#include <cstddef>
#include <vector>

#include "daa/scoring.hpp"
#include "daa/trajectory.hpp"

namespace daa {

/// Spatially independent detector settings. The window covers steps
/// start_step .. start_step + span inclusive, so start_step + span must not
/// exceed T - 1.
struct DaaIConfig {
  std::size_t start_step = 3;
  std::size_t span = 2;
  double threshold = -0.0011;
  TokenChoice token_choice = TokenChoice::eos;

  /// t=3, s=2, alpha=-0.0011 (Stable Diffusion v1.4 calibration).
  static DaaIConfig paper_sd14() { return {}; }
};

/// Frobenius norm of M_token^{step+1} - M_token^{step}.
double evolve_rate(const Trajectory& traj, std::size_t token, std::size_t step);

/// evolve_rate for every token at one step.
std::vector<double> evolve_rates(const Trajectory& traj, std::size_t step);

/// Per-step relative terms for steps start_step .. start_step + span.
std::vector<double> daa_i_terms(const Trajectory& traj, const DaaIConfig& cfg);

/// Sum over the window of (EOS evolve rate - mean evolve rate of the other
/// L - 1 positions, BOS included).
double daa_i_score(const Trajectory& traj, const DaaIConfig& cfg);

}  // namespace daa
