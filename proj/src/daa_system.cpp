#include "daa/daa_system.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "daa/errors.hpp"

namespace daa {

void StabilityParams::validate() const {
  if (gamma.size() == 0) throw Error(ErrorCode::invalid_params, "empty stability vector");
  for (Eigen::Index i = 0; i < gamma.size(); ++i) {
    if (!(gamma[i] < 0.0) || !std::isfinite(gamma[i])) {
      throw Error(ErrorCode::invalid_params, "gamma[" + std::to_string(i) + "] = " +
                                                 std::to_string(gamma[i]) + " is not strictly negative");
    }
  }
  if (!(coupling >= 0.0) || !std::isfinite(coupling)) {
    throw Error(ErrorCode::invalid_params, "coupling strength must be non-negative, got " + std::to_string(coupling));
  }
}

StabilityParams StabilityParams::for_tokens(std::size_t tokens, std::size_t eos_position,
                                            double gamma_other, double gamma_eos, double coupling) {
  if (eos_position >= tokens) throw Error(ErrorCode::index_out_of_range, "EOS position outside token range");
  StabilityParams params;
  params.gamma = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(tokens), gamma_other);
  params.gamma[static_cast<Eigen::Index>(eos_position)] = gamma_eos;
  params.coupling = coupling;
  params.validate();
  return params;
}

StabilityParams DaaSConfig::stability(const Trajectory& traj) const {
  return StabilityParams::for_tokens(traj.num_tokens(), traj.eos_position(), gamma_other, gamma_eos,
                                     coupling);
}

Eigen::VectorXd DaaSConfig::initial(std::size_t tokens) const {
  const auto n = static_cast<Eigen::Index>(tokens);
  if (!initial_state) return Eigen::VectorXd::Ones(n);
  if (initial_state->size() != n) {
    throw Error(ErrorCode::shape_mismatch, "initial state has " + std::to_string(initial_state->size()) +
                                               " entries for " + std::to_string(tokens) + " tokens");
  }
  return *initial_state;
}

MapDistance DaaSConfig::distance() const {
  return custom_distance ? custom_distance : distance_function(metric);
}

EdgeWeights edge_weights(std::span<const MapView> maps, const MapDistance& distance) {
  const std::size_t n = maps.size();
  if (n < 2) throw Error(ErrorCode::shape_mismatch, "edge weights need at least two maps");
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dij = distance(maps[i], maps[j]);
      if (!std::isfinite(dij) || dij < 0.0) {
        throw Error(ErrorCode::non_finite_value, "map distance between tokens " + std::to_string(i) +
                                                     " and " + std::to_string(j) + " is " + std::to_string(dij));
      }
      d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = dij;
      lo = std::min(lo, dij);
      hi = std::max(hi, dij);
    }
  }

  EdgeWeights w;
  w.weights = Eigen::MatrixXd::Zero(d.rows(), d.cols());
  const double spread = hi - lo;
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < d.cols(); ++j) {
      const double wij = spread <= 1e-12 ? 1.0 : std::clamp((hi - d(i, j)) / spread, 0.0, 1.0);
      w.weights(i, j) = wij;
      w.weights(j, i) = wij;
    }
  }
  return w;
}

EdgeWeights edge_weights(std::span<const MapView> maps, Metric metric) {
  return edge_weights(maps, distance_function(metric));
}

LaplacianMatrix laplacian(const EdgeWeights& w) {
  const auto& W = w.weights;
  if (W.rows() != W.cols()) throw Error(ErrorCode::shape_mismatch, "edge weights must be square");
  LaplacianMatrix a;
  a.matrix = W;
  for (Eigen::Index i = 0; i < W.rows(); ++i) {
    double column = 0.0;
    for (Eigen::Index k = 0; k < W.rows(); ++k) {
      if (k != i) column += W(k, i);
    }
    a.matrix(i, i) = -column;
  }
  return a;
}

namespace {

// sum_{j != i} a_ij (x_j - x_i), written into out (accumulating with weight).
void add_coupling(const Eigen::MatrixXd& a, const Eigen::VectorXd& x, double weight, Eigen::VectorXd& out) {
  const Eigen::Index n = x.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i) acc += a(i, j) * (x[j] - x[i]);
    }
    out[i] += weight * acc;
  }
}

void check_window(const DaaSConfig& cfg, std::size_t last_sample) {
  if (cfg.span < 1) throw Error(ErrorCode::config_out_of_range, "span must be >= 1");
  if (cfg.start_step + cfg.span + 1 > last_sample) {
    throw Error(ErrorCode::config_out_of_range,
                "window t=" + std::to_string(cfg.start_step) + ", s=" + std::to_string(cfg.span) +
                    " needs states up to step " + std::to_string(cfg.start_step + cfg.span + 1) +
                    ", only " + std::to_string(last_sample) + " available");
  }
}

}  // namespace

Eigen::VectorXd state_derivative(const StabilityParams& params, const LaplacianMatrix& a,
                                 const Eigen::VectorXd& x) {
  if (params.gamma.size() != x.size() || a.matrix.rows() != x.size() || a.matrix.cols() != x.size()) {
    throw Error(ErrorCode::shape_mismatch, "state derivative operands disagree in size");
  }
  Eigen::VectorXd dx = params.gamma.cwiseProduct(x);
  add_coupling(a.matrix, x, params.coupling, dx);
  return dx;
}

std::vector<LaplacianMatrix> frame_laplacians(const Trajectory& traj, const MapDistance& distance,
                                              std::size_t last_frame) {
  if (last_frame > traj.last_step()) throw Error(ErrorCode::index_out_of_range, "frame beyond trajectory");
  std::vector<LaplacianMatrix> out;
  out.reserve(last_frame + 1);
  for (std::size_t k = 0; k <= last_frame; ++k) {
    const auto maps = traj.frame(k);
    out.push_back(laplacian(edge_weights(maps, distance)));
  }
  return out;
}

StateTrace integrate_states(const Trajectory& traj, const DaaSConfig& cfg, std::optional<std::size_t> horizon) {
  const std::size_t end = horizon.value_or(traj.last_step());
  if (end < 1 || end > traj.last_step()) {
    throw Error(ErrorCode::config_out_of_range, "integration horizon " + std::to_string(end) +
                                                    " outside [1, " + std::to_string(traj.last_step()) + "]");
  }
  const StabilityParams params = cfg.stability(traj);
  const Eigen::VectorXd x0 = cfg.initial(traj.num_tokens());

  const bool interpolate = cfg.schedule == CouplingSchedule::linear_interpolation;
  const auto laplacians = frame_laplacians(traj, cfg.distance(), interpolate ? end : end - 1);

  SegmentRhs rhs;
  if (interpolate) {
    rhs = [&](std::size_t seg, double t, const Eigen::VectorXd& x, Eigen::VectorXd& dx) {
      const double theta = std::clamp(t - static_cast<double>(seg), 0.0, 1.0);
      dx = params.gamma.cwiseProduct(x);
      add_coupling(laplacians[seg].matrix, x, params.coupling * (1.0 - theta), dx);
      add_coupling(laplacians[seg + 1].matrix, x, params.coupling * theta, dx);
    };
  } else {
    rhs = [&](std::size_t seg, double, const Eigen::VectorXd& x, Eigen::VectorXd& dx) {
      dx = params.gamma.cwiseProduct(x);
      add_coupling(laplacians[seg].matrix, x, params.coupling, dx);
    };
  }

  std::vector<double> breakpoints(end + 1);
  for (std::size_t k = 0; k <= end; ++k) breakpoints[k] = static_cast<double>(k);
  auto solved = integrate_rkf45(rhs, x0, breakpoints, cfg.solver);

  StateTrace trace;
  trace.states.resize(static_cast<Eigen::Index>(solved.samples.size()), x0.size());
  for (std::size_t k = 0; k < solved.samples.size(); ++k) {
    trace.states.row(static_cast<Eigen::Index>(k)) = solved.samples[k].transpose();
  }
  trace.stats = solved.stats;
  return trace;
}

double lyapunov_derivative(const Eigen::VectorXd& x, const Eigen::MatrixXd& f, const Eigen::MatrixXd& a,
                           double coupling) {
  const Eigen::Index n = x.size();
  if (f.rows() != n || f.cols() != n || a.rows() != n || a.cols() != n) {
    throw Error(ErrorCode::shape_mismatch, "Lyapunov derivative operands disagree in size");
  }
  const double own = x.dot((f.transpose() + f) * x);
  const double graph = x.dot((a.transpose() + a) * x);
  return own + coupling * graph;
}

std::vector<double> lyapunov_profile(const Trajectory& traj, const DaaSConfig& cfg) {
  const StabilityParams params = cfg.stability(traj);
  const auto trace = integrate_states(traj, cfg);
  const auto laplacians = frame_laplacians(traj, cfg.distance(), traj.last_step());
  const Eigen::MatrixXd f = params.gamma.asDiagonal();
  std::vector<double> profile(laplacians.size());
  for (std::size_t k = 0; k < laplacians.size(); ++k) {
    const Eigen::VectorXd x = trace.states.row(static_cast<Eigen::Index>(k)).transpose();
    profile[k] = lyapunov_derivative(x, f, laplacians[k].matrix, params.coupling);
  }
  return profile;
}

std::vector<double> mean_lyapunov_profile(std::span<const Trajectory> trajs, const DaaSConfig& cfg) {
  if (trajs.empty()) throw Error(ErrorCode::invalid_params, "no trajectories to average");
  std::vector<double> mean;
  for (const auto& traj : trajs) {
    const auto profile = lyapunov_profile(traj, cfg);
    if (mean.empty()) mean.assign(profile.size(), 0.0);
    if (profile.size() != mean.size()) {
      throw Error(ErrorCode::shape_mismatch, "trajectories differ in number of steps");
    }
    for (std::size_t k = 0; k < profile.size(); ++k) mean[k] += profile[k];
  }
  for (double& v : mean) v /= static_cast<double>(trajs.size());
  return mean;
}

std::vector<double> daa_s_terms(const StateTrace& trace, const DaaSConfig& cfg, std::size_t eos_position,
                                std::size_t bos_position) {
  const auto rows = static_cast<std::size_t>(trace.states.rows());
  if (rows < 2) throw Error(ErrorCode::config_out_of_range, "state trace has fewer than two samples");
  check_window(cfg, rows - 1);
  const auto n = static_cast<std::size_t>(trace.states.cols());
  std::vector<double> deltas(n);
  std::vector<double> terms;
  terms.reserve(cfg.span + 1);
  for (std::size_t j = cfg.start_step; j <= cfg.start_step + cfg.span; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      deltas[i] = trace.states(static_cast<Eigen::Index>(j + 1), static_cast<Eigen::Index>(i)) -
                  trace.states(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
    }
    terms.push_back(relative_term(deltas, eos_position, bos_position, cfg.token_choice));
  }
  return terms;
}

double daa_s_score(const StateTrace& trace, const DaaSConfig& cfg, std::size_t eos_position,
                   std::size_t bos_position) {
  double score = 0.0;
  for (double term : daa_s_terms(trace, cfg, eos_position, bos_position)) score += term;
  return score;
}

double daa_s_score(const Trajectory& traj, const DaaSConfig& cfg) {
  check_window(cfg, traj.last_step());
  const auto trace = integrate_states(traj, cfg, cfg.start_step + cfg.span + 1);
  return daa_s_score(trace, cfg, traj.eos_position(), traj.bos_position());
}

}  // namespace daa
