#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "daa/rkf45.hpp"
#include "daa/scoring.hpp"
#include "daa/trajectory.hpp"

namespace daa {

/// Symmetric similarity weights in [0, 1] with a zero diagonal; 1 marks the
/// closest pair of maps in the frame, 0 the farthest.
struct EdgeWeights {
  Eigen::MatrixXd weights;
};

/// Off-diagonal a_ij = W_ij, diagonal a_ii = -sum_{k != i} W_ki. Every row
/// and column sums to zero.
struct LaplacianMatrix {
  Eigen::MatrixXd matrix;
};

/// F = diag(gamma) with every gamma_i < 0, plus coupling strength c >= 0
/// (c = 0 decouples the nodes).
struct StabilityParams {
  Eigen::VectorXd gamma;
  double coupling = 1.0;

  void validate() const;

  /// gamma_other everywhere except the EOS position, which gets gamma_eos.
  static StabilityParams for_tokens(std::size_t tokens, std::size_t eos_position, double gamma_other,
                                    double gamma_eos, double coupling);
};

/// How A(tau) behaves between integer steps k and k + 1.
enum class CouplingSchedule {
  piecewise_constant,    // A(tau) = A_k on [k, k+1)
  linear_interpolation,  // W interpolated linearly between frames k and k+1
};

struct StateTrace {
  /// Row k holds x(k) for the integer step k; columns are token positions.
  Eigen::MatrixXd states;
  SolverStats stats;
};

struct DaaSConfig {
  std::size_t start_step = 1;
  std::size_t span = 5;
  double threshold = -0.0053;
  double coupling = 1.0;
  double gamma_other = -1.0;
  double gamma_eos = -10.0;
  Metric metric = Metric::frobenius;
  /// Overrides `metric` when set; must be symmetric and non-negative.
  MapDistance custom_distance;
  /// Defaults to the all-ones vector.
  std::optional<Eigen::VectorXd> initial_state;
  CouplingSchedule schedule = CouplingSchedule::piecewise_constant;
  SolverOptions solver;
  TokenChoice token_choice = TokenChoice::eos;

  /// t=1, s=5, alpha=-0.0053, c=1, gamma=(-1, ..., -1, -10).
  static DaaSConfig paper_sd14() { return {}; }

  StabilityParams stability(const Trajectory& traj) const;
  Eigen::VectorXd initial(std::size_t tokens) const;
  MapDistance distance() const;
};

/// Pairwise map distances min-max normalised over all unordered pairs. If
/// every pair is equally far apart (spread <= 1e-12) all off-diagonal weights
/// are 1.
EdgeWeights edge_weights(std::span<const MapView> maps, const MapDistance& distance);
EdgeWeights edge_weights(std::span<const MapView> maps, Metric metric = Metric::frobenius);

LaplacianMatrix laplacian(const EdgeWeights& w);

/// F x + c A x, with A x evaluated as sum_{j != i} a_ij (x_j - x_i). For a
/// zero-row-sum A this is exact, and a uniform state gives exactly F x.
Eigen::VectorXd state_derivative(const StabilityParams& params, const LaplacianMatrix& a,
                                 const Eigen::VectorXd& x);

/// One Laplacian per frame in [0, last_frame].
std::vector<LaplacianMatrix> frame_laplacians(const Trajectory& traj, const MapDistance& distance,
                                              std::size_t last_frame);

/// Integrates dX/dtau = (F + c A(tau)) X from tau = 0 to `horizon` (default T)
/// and samples X at every integer tau. Integration never crosses an integer.
StateTrace integrate_states(const Trajectory& traj, const DaaSConfig& cfg,
                            std::optional<std::size_t> horizon = std::nullopt);

/// X^T (F^T + F) X + c X^T (A^T + A) X.
double lyapunov_derivative(const Eigen::VectorXd& x, const Eigen::MatrixXd& f,
                           const Eigen::MatrixXd& a, double coupling);

/// dV/dt at every integer step of the integrated trajectory, using that step's A.
std::vector<double> lyapunov_profile(const Trajectory& traj, const DaaSConfig& cfg);

/// Per-step mean of lyapunov_profile over several trajectories of equal length.
std::vector<double> mean_lyapunov_profile(std::span<const Trajectory> trajs, const DaaSConfig& cfg);

/// Per-step relative terms for steps start_step .. start_step + span of
/// x(j+1) - x(j). Requires start_step + span + 1 rows in the trace.
std::vector<double> daa_s_terms(const StateTrace& trace, const DaaSConfig& cfg,
                                std::size_t eos_position, std::size_t bos_position = Trajectory::npos);

double daa_s_score(const StateTrace& trace, const DaaSConfig& cfg, std::size_t eos_position,
                   std::size_t bos_position = Trajectory::npos);

/// Integrates only as far as the configured window needs, then scores.
double daa_s_score(const Trajectory& traj, const DaaSConfig& cfg);

}  // namespace daa
