#include "daa/rer_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "daa/errors.hpp"

namespace daa {

namespace {

Eigen::MatrixXd to_matrix(MapView m) {
  const auto d = static_cast<Eigen::Index>(m.dim());
  Eigen::MatrixXd out(d, d);
  for (Eigen::Index r = 0; r < d; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) {
      out(r, c) = static_cast<double>(m(static_cast<std::size_t>(r), static_cast<std::size_t>(c)));
    }
  }
  return out;
}

std::string format_g9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

Eigen::MatrixXd evolve_rate_map(const Trajectory& traj, std::size_t token, std::size_t step) {
  if (token >= traj.num_tokens() || step >= traj.last_step()) {
    throw Error(ErrorCode::index_out_of_range,
                "evolve rate map for token " + std::to_string(token) + " at step " + std::to_string(step));
  }
  return to_matrix(traj.map(step + 1, token)) - to_matrix(traj.map(step, token));
}

Eigen::MatrixXd rer_eos(const Trajectory& traj, std::size_t step) {
  if (step >= traj.last_step()) {
    throw Error(ErrorCode::index_out_of_range, "RER step " + std::to_string(step) + " beyond T - 1");
  }
  const std::size_t eos = traj.eos_position();
  const auto d = static_cast<Eigen::Index>(traj.dim());
  Eigen::MatrixXd others = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t i = 0; i < traj.num_tokens(); ++i) {
    if (i != eos) others += evolve_rate_map(traj, i, step);
  }
  others /= static_cast<double>(traj.num_tokens() - 1);
  return evolve_rate_map(traj, eos, step) - others;
}

RerSeries rer_series(const Trajectory& traj) {
  RerSeries series;
  series.sample_id = traj.sample_id();
  series.matrices.reserve(traj.last_step());
  for (std::size_t t = 0; t < traj.last_step(); ++t) series.matrices.push_back(rer_eos(traj, t));
  return series;
}

RerSeries average_series(std::span<const RerSeries> series, std::string sample_id) {
  if (series.empty()) throw Error(ErrorCode::degenerate_data, "no series to average");
  RerSeries mean;
  mean.sample_id = std::move(sample_id);
  mean.matrices = series[0].matrices;
  for (std::size_t k = 1; k < series.size(); ++k) {
    if (series[k].steps() != mean.steps() || series[k].dim() != mean.dim()) {
      throw Error(ErrorCode::shape_mismatch, "series '" + series[k].sample_id + "' differs in shape");
    }
    for (std::size_t t = 0; t < mean.steps(); ++t) mean.matrices[t] += series[k].matrices[t];
  }
  for (auto& m : mean.matrices) m /= static_cast<double>(series.size());
  return mean;
}

Eigen::Matrix<double, Eigen::Dynamic, 2> PcaBasis::project(const RerSeries& series) const {
  Eigen::Matrix<double, Eigen::Dynamic, 2> points(static_cast<Eigen::Index>(series.steps()), 2);
  for (std::size_t t = 0; t < series.steps(); ++t) {
    const auto& m = series.matrices[t];
    if (m.size() != mean.size()) throw Error(ErrorCode::shape_mismatch, "series dimension differs from basis");
    const Eigen::Map<const Eigen::VectorXd> flat(m.data(), m.size());
    points.row(static_cast<Eigen::Index>(t)) = (components * (flat - mean)).transpose();
  }
  return points;
}

PcaBasis fit_pca(std::span<const RerSeries> series) {
  Eigen::Index rows = 0;
  Eigen::Index width = -1;
  for (const auto& s : series) {
    for (const auto& m : s.matrices) {
      if (width < 0) width = m.size();
      if (m.size() != width) throw Error(ErrorCode::shape_mismatch, "series disagree in matrix dimension");
      ++rows;
    }
  }
  if (rows < 2) throw Error(ErrorCode::degenerate_data, "PCA needs at least two flattened samples");
  if (width < 2) throw Error(ErrorCode::degenerate_data, "PCA needs at least two features");

  // Column-major storage of each matrix; any fixed flattening order works as
  // long as project() uses the same one.
  Eigen::MatrixXd data(rows, width);
  Eigen::Index r = 0;
  for (const auto& s : series) {
    for (const auto& m : s.matrices) {
      data.row(r++) = Eigen::Map<const Eigen::VectorXd>(m.data(), m.size()).transpose();
    }
  }

  PcaBasis basis;
  basis.mean = data.colwise().mean().transpose();
  data.rowwise() -= basis.mean.transpose();
  if (data.squaredNorm() == 0.0) throw Error(ErrorCode::degenerate_data, "pooled variance is zero");

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(data, Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const Eigen::MatrixXd& v = svd.matrixV();
  basis.components.resize(2, width);
  for (Eigen::Index k = 0; k < 2; ++k) {
    Eigen::VectorXd dir;
    if (k < v.cols() && k < sv.size() && sv[k] > 0.0) {
      dir = v.col(k);
    } else {
      // Rank-1 data: any unit vector orthogonal to the first direction.
      Eigen::FullPivHouseholderQR<Eigen::MatrixXd> qr(basis.components.row(0).transpose());
      dir = qr.matrixQ().col(1);
    }
    for (Eigen::Index i = 0; i < dir.size(); ++i) {
      if (std::abs(dir[i]) > 1e-12) {
        if (dir[i] < 0) dir = -dir;
        break;
      }
    }
    basis.components.row(k) = dir.transpose();
    const double s = k < sv.size() ? sv[k] : 0.0;
    basis.explained_variance[static_cast<std::size_t>(k)] = s * s / static_cast<double>(rows - 1);
  }
  return basis;
}

std::vector<PcaProjection> pca_project(std::span<const RerSeries> series) {
  const PcaBasis basis = fit_pca(series);
  std::vector<PcaProjection> out;
  out.reserve(series.size());
  for (const auto& s : series) {
    out.push_back({basis.components, basis.explained_variance, basis.project(s), s.sample_id});
  }
  return out;
}

double mean_step_length(const Eigen::Matrix<double, Eigen::Dynamic, 2>& points) {
  if (points.rows() < 2) return 0.0;
  double total = 0.0;
  for (Eigen::Index i = 1; i < points.rows(); ++i) total += (points.row(i) - points.row(i - 1)).norm();
  return total / static_cast<double>(points.rows() - 1);
}

namespace {

// White at zero, saturating to pure red (positive) or blue (negative) at the
// largest absolute value of the whole series.
std::array<unsigned char, 3> diverging(double v, double scale) {
  const double x = scale > 0.0 ? std::clamp(v / scale, -1.0, 1.0) : 0.0;
  const auto fade = static_cast<unsigned char>(std::lround(255.0 * (1.0 - std::abs(x))));
  if (x >= 0.0) return {255, fade, fade};
  return {fade, fade, 255};
}

void write_ppm(const std::filesystem::path& path, const Eigen::MatrixXd& m, double scale) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
  out << "P6\n" << m.cols() << ' ' << m.rows() << "\n255\n";
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const auto px = diverging(m(r, c), scale);
      out.write(reinterpret_cast<const char*>(px.data()), 3);
    }
  }
  if (!out) throw Error(ErrorCode::io_error, "write failed for " + path.string());
}

}  // namespace

HeatmapExport export_rer_heatmaps(const RerSeries& series, const std::filesystem::path& dir,
                                  const std::string& stem, bool raster) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::io_error, "cannot create " + dir.string() + ": " + ec.message());

  HeatmapExport result;
  result.values_csv = dir / (stem + "_values.csv");
  result.summary_csv = dir / (stem + "_summary.csv");
  std::ofstream values(result.values_csv);
  std::ofstream summary(result.summary_csv);
  if (!values || !summary) throw Error(ErrorCode::io_error, "cannot write heatmap CSVs in " + dir.string());

  values << "step,row,col,value\n";
  summary << "step,min,max\n";
  double scale = 0.0;
  for (const auto& m : series.matrices) scale = std::max(scale, m.cwiseAbs().maxCoeff());

  for (std::size_t t = 0; t < series.steps(); ++t) {
    const auto& m = series.matrices[t];
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        values << t << ',' << r << ',' << c << ',' << format_g9(m(r, c)) << '\n';
      }
    }
    summary << t << ',' << format_g9(m.minCoeff()) << ',' << format_g9(m.maxCoeff()) << '\n';
    if (raster) {
      char name[32];
      std::snprintf(name, sizeof name, "_step%03zu.ppm", t);
      result.rasters.push_back(dir / (stem + name));
      write_ppm(result.rasters.back(), m, scale);
    }
  }
  if (!values || !summary) throw Error(ErrorCode::io_error, "write failed for heatmap CSVs");
  return result;
}

RerSeries read_rer_heatmap_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot read " + path.string());
  std::string line;
  std::getline(in, line);
  std::map<std::size_t, std::vector<std::array<double, 3>>> cells;
  std::size_t dim = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::size_t step = 0, row = 0, col = 0;
    char comma = 0;
    std::string value;
    if (!(ss >> step >> comma >> row >> comma >> col >> comma) || !std::getline(ss, value)) {
      throw Error(ErrorCode::io_error, "malformed heatmap row: " + line);
    }
    cells[step].push_back({static_cast<double>(row), static_cast<double>(col), std::stod(value)});
    dim = std::max({dim, row + 1, col + 1});
  }
  RerSeries series;
  series.sample_id = path.stem().string();
  for (const auto& [step, entries] : cells) {
    if (step != series.matrices.size()) throw Error(ErrorCode::io_error, "heatmap steps not contiguous");
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (const auto& e : entries) m(static_cast<Eigen::Index>(e[0]), static_cast<Eigen::Index>(e[1])) = e[2];
    series.matrices.push_back(std::move(m));
  }
  return series;
}

}  // namespace daa
