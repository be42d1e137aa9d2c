#pragma once

// Literal re-expansions of the detector formulas, written without touching
// the library's numeric helpers so that agreement means something.

#include <cmath>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "daa/trajectory.hpp"

namespace daa::oracle {

inline double entry(const Trajectory& t, std::size_t step, std::size_t token, std::size_t r, std::size_t c) {
  const std::size_t D = t.dim();
  return static_cast<double>(t.payload()[((step * t.num_tokens() + token) * D + r) * D + c]);
}

inline double frobenius_rate(const Trajectory& t, std::size_t token, std::size_t step) {
  double sum = 0.0;
  for (std::size_t r = 0; r < t.dim(); ++r) {
    for (std::size_t c = 0; c < t.dim(); ++c) {
      const double d = entry(t, step + 1, token, r, c) - entry(t, step, token, r, c);
      sum += d * d;
    }
  }
  return std::sqrt(sum);
}

inline double daa_i(const Trajectory& t, std::size_t start, std::size_t span) {
  const std::size_t L = t.num_tokens();
  double score = 0.0;
  for (std::size_t j = start; j <= start + span; ++j) {
    double others = 0.0;
    for (std::size_t i = 0; i + 1 < L; ++i) others += frobenius_rate(t, i, j);
    score += frobenius_rate(t, L - 1, j) - others / static_cast<double>(L - 1);
  }
  return score;
}

inline double rer_entry(const Trajectory& t, std::size_t step, std::size_t r, std::size_t c) {
  const std::size_t L = t.num_tokens();
  double others = 0.0;
  for (std::size_t i = 0; i + 1 < L; ++i) others += entry(t, step + 1, i, r, c) - entry(t, step, i, r, c);
  return (entry(t, step + 1, L - 1, r, c) - entry(t, step, L - 1, r, c)) - others / static_cast<double>(L - 1);
}

/// Window sum of EOS state deltas minus the mean delta of the other nodes.
/// states[k][i] = x_i(k).
inline double daa_s_from_states(const std::vector<std::vector<double>>& states, std::size_t start,
                                std::size_t span) {
  const std::size_t L = states.front().size();
  double score = 0.0;
  for (std::size_t j = start; j <= start + span; ++j) {
    double others = 0.0;
    for (std::size_t i = 0; i + 1 < L; ++i) others += states[j + 1][i] - states[j][i];
    score += (states[j + 1][L - 1] - states[j][L - 1]) - others / static_cast<double>(L - 1);
  }
  return score;
}

inline std::vector<std::vector<double>> rows_of(const Eigen::MatrixXd& m) {
  std::vector<std::vector<double>> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index k = 0; k < m.rows(); ++k) {
    for (Eigen::Index i = 0; i < m.cols(); ++i) out[static_cast<std::size_t>(k)].push_back(m(k, i));
  }
  return out;
}

/// Frobenius-distance similarity graph of frame `step`, min-max scaled, as a
/// Laplacian with the column-sum diagonal.
inline Eigen::MatrixXd laplacian_of_frame(const Trajectory& t, std::size_t step) {
  const std::size_t L = t.num_tokens();
  Eigen::MatrixXd dist = Eigen::MatrixXd::Zero(L, L);
  double lo = 1e300, hi = -1e300;
  for (std::size_t i = 0; i < L; ++i) {
    for (std::size_t j = 0; j < L; ++j) {
      if (i == j) continue;
      double sum = 0.0;
      for (std::size_t r = 0; r < t.dim(); ++r) {
        for (std::size_t c = 0; c < t.dim(); ++c) {
          const double d = entry(t, step, i, r, c) - entry(t, step, j, r, c);
          sum += d * d;
        }
      }
      dist(i, j) = std::sqrt(sum);
      lo = std::min(lo, dist(i, j));
      hi = std::max(hi, dist(i, j));
    }
  }
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(L, L);
  for (std::size_t i = 0; i < L; ++i) {
    for (std::size_t j = 0; j < L; ++j) {
      if (i != j) a(i, j) = hi - lo <= 1e-12 ? 1.0 : (hi - dist(i, j)) / (hi - lo);
    }
  }
  for (std::size_t i = 0; i < L; ++i) a(i, i) = -(a.col(i).sum() - a(i, i));
  return a;
}

/// exp(M * tau) x for symmetric M through its eigendecomposition.
inline Eigen::VectorXd symmetric_expm_apply(const Eigen::MatrixXd& m, double tau, const Eigen::VectorXd& x) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  const Eigen::VectorXd scale = (eig.eigenvalues() * tau).array().exp().matrix();
  return eig.eigenvectors() * scale.asDiagonal() * eig.eigenvectors().transpose() * x;
}

/// Exact piecewise-constant solution sampled at every integer step up to
/// `horizon`, gamma on the diagonal and coupling c.
inline Eigen::MatrixXd exact_states(const Trajectory& t, const Eigen::VectorXd& gamma, double c,
                                    std::size_t horizon) {
  const auto L = static_cast<Eigen::Index>(t.num_tokens());
  Eigen::MatrixXd out(static_cast<Eigen::Index>(horizon + 1), L);
  Eigen::VectorXd x = Eigen::VectorXd::Ones(L);
  out.row(0) = x.transpose();
  for (std::size_t k = 0; k < horizon; ++k) {
    const Eigen::MatrixXd m = Eigen::MatrixXd(gamma.asDiagonal()) + c * laplacian_of_frame(t, k);
    x = symmetric_expm_apply(m, 1.0, x);
    out.row(static_cast<Eigen::Index>(k + 1)) = x.transpose();
  }
  return out;
}

}  // namespace daa::oracle
