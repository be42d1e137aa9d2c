#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "daa/trajectory.hpp"

namespace daa {

/// M_token^{step+1} - M_token^{step}, entrywise in double precision.
Eigen::MatrixXd evolve_rate_map(const Trajectory& traj, std::size_t token, std::size_t step);

/// EOS evolve-rate map minus the entrywise mean of the other L - 1 maps.
Eigen::MatrixXd rer_eos(const Trajectory& traj, std::size_t step);

/// One relative evolve-rate matrix per step 0 .. T-1.
struct RerSeries {
  std::vector<Eigen::MatrixXd> matrices;
  std::string sample_id;

  std::size_t steps() const noexcept { return matrices.size(); }
  std::size_t dim() const noexcept { return matrices.empty() ? 0 : static_cast<std::size_t>(matrices[0].rows()); }
};

RerSeries rer_series(const Trajectory& traj);

/// Step-wise mean of several series with equal length and dimension.
RerSeries average_series(std::span<const RerSeries> series, std::string sample_id = "mean");

struct PcaBasis {
  Eigen::Vector<double, Eigen::Dynamic> mean;  // D*D
  Eigen::Matrix<double, 2, Eigen::Dynamic> components;
  std::array<double, 2> explained_variance{};

  /// Rows of the result are 2-D points, one per matrix of the series.
  Eigen::Matrix<double, Eigen::Dynamic, 2> project(const RerSeries& series) const;
};

struct PcaProjection {
  Eigen::Matrix<double, 2, Eigen::Dynamic> components;
  std::array<double, 2> explained_variance{};
  Eigen::Matrix<double, Eigen::Dynamic, 2> trajectory;
  std::string sample_id;
};

/// Fits the top-two principal directions of all flattened matrices in
/// `series` (pooled), centred on their mean. Each component's first nonzero
/// coordinate is made positive. Throws DegenerateData when there are fewer
/// than two vectors or the pooled variance is zero.
PcaBasis fit_pca(std::span<const RerSeries> series);

/// Fits a pooled basis and projects every input onto it.
std::vector<PcaProjection> pca_project(std::span<const RerSeries> series);

/// Mean Euclidean distance between consecutive points of a 2-D polyline.
double mean_step_length(const Eigen::Matrix<double, Eigen::Dynamic, 2>& points);

struct HeatmapExport {
  std::filesystem::path values_csv;   // step,row,col,value
  std::filesystem::path summary_csv;  // step,min,max
  std::vector<std::filesystem::path> rasters;
};

/// Writes `<stem>_values.csv`, `<stem>_summary.csv` and, when `raster` is set,
/// one binary PPM per step with a blue/white/red scale centred on zero. Values
/// are printed with 9 significant digits.
HeatmapExport export_rer_heatmaps(const RerSeries& series, const std::filesystem::path& dir,
                                  const std::string& stem, bool raster = false);

/// Reads back a values CSV written by export_rer_heatmaps.
RerSeries read_rer_heatmap_csv(const std::filesystem::path& path);

}  // namespace daa
