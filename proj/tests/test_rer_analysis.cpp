#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "daa/rer_analysis.hpp"
#include "daa/synthetic.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

namespace daa {
namespace {

Trajectory reversed(const Trajectory& t) {
  std::vector<float> payload;
  for (std::size_t s = t.num_frames(); s-- > 0;) {
    for (std::size_t i = 0; i < t.num_tokens(); ++i) {
      const auto m = t.map(s, i).values();
      payload.insert(payload.end(), m.begin(), m.end());
    }
  }
  return Trajectory::from_payload(t.shape(), t.roles(), payload);
}

RerSeries series_of(std::vector<Eigen::MatrixXd> ms, std::string id = "s") { return {std::move(ms), std::move(id)}; }

TEST(EvolveRateMap, ZeroAndAllOnesSteps) {
  std::mt19937_64 rng(1);
  const auto still = testing::constant_trajectory(rng, 3, 2, 3);
  EXPECT_EQ(evolve_rate_map(still, 1, 0), Eigen::MatrixXd::Zero(3, 3));

  std::vector<float> payload;
  std::uniform_real_distribution<float> u(0.0f, 4.0f);
  std::vector<float> frame(2 * 9);
  for (auto& v : frame) v = std::round(u(rng) * 64.0f) / 64.0f;  // exact in float after +1
  payload = frame;
  for (float v : frame) payload.push_back(v + 1.0f);
  const auto step = Trajectory::from_payload({2, 2, 3}, default_roles(2), payload);
  EXPECT_EQ(evolve_rate_map(step, 0, 0), Eigen::MatrixXd::Ones(3, 3));
  EXPECT_DAA_ERROR(evolve_rate_map(step, 2, 0), ErrorCode::index_out_of_range);
  EXPECT_DAA_ERROR(evolve_rate_map(step, 0, 1), ErrorCode::index_out_of_range);
}

TEST(EvolveRateMap, ReversalNegates) {
  std::mt19937_64 rng(2);
  const auto t = testing::random_trajectory(rng, 3, 5, 3);
  const auto r = reversed(t);
  for (std::size_t s = 0; s < 5; ++s) {
    for (std::size_t i = 0; i < 3; ++i) {
      EXPECT_EQ(evolve_rate_map(r, i, 4 - s), -evolve_rate_map(t, i, s));
    }
  }
}

TEST(RerEos, CancelsForIdenticalEvolution) {
  std::mt19937_64 rng(3);
  const auto base = testing::random_trajectory(rng, 2, 4, 3);
  std::vector<float> payload;
  for (std::size_t s = 0; s <= 4; ++s) {
    for (int copy = 0; copy < 4; ++copy) {
      const auto m = base.map(s, 0).values();
      payload.insert(payload.end(), m.begin(), m.end());
    }
  }
  const auto t = Trajectory::from_payload({5, 4, 3}, default_roles(4), payload);
  for (std::size_t s = 0; s < 4; ++s) EXPECT_LT(rer_eos(t, s).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(RerEos, TwoTokensIsPlainDifference) {
  std::mt19937_64 rng(4);
  const auto t = testing::random_trajectory(rng, 2, 3, 4);
  for (std::size_t s = 0; s < 3; ++s) {
    EXPECT_EQ(rer_eos(t, s), evolve_rate_map(t, 1, s) - evolve_rate_map(t, 0, s));
  }
}

TEST(RerEos, MatchesLiteralExpansion) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t L = 2 + trial % 3, D = 1 + trial % 3, T = 1 + trial % 5;
    const auto t = testing::random_trajectory(rng, L, T, D);
    for (std::size_t s = 0; s < T; ++s) {
      const auto m = rer_eos(t, s);
      for (std::size_t r = 0; r < D; ++r) {
        for (std::size_t c = 0; c < D; ++c) {
          EXPECT_NEAR(m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)), oracle::rer_entry(t, s, r, c),
                      1e-12);
        }
      }
    }
  }
}

TEST(RerEos, TotalIsLinear) {
  std::mt19937_64 rng(6);
  const auto t = testing::random_trajectory(rng, 5, 4, 4);
  for (std::size_t s = 0; s < 4; ++s) {
    double others = 0.0;
    for (std::size_t i = 0; i < 4; ++i) others += evolve_rate_map(t, i, s).sum();
    EXPECT_NEAR(rer_eos(t, s).sum(), evolve_rate_map(t, 4, s).sum() - others / 4.0, 1e-12);
  }
}

TEST(RerEos, InvariantUnderNonEosPermutation) {
  std::mt19937_64 rng(7);
  const auto t = testing::random_trajectory(rng, 4, 3, 3);
  std::vector<float> payload;
  for (std::size_t s = 0; s <= 3; ++s) {
    for (std::size_t i : {1u, 2u, 0u, 3u}) {
      const auto m = t.map(s, i).values();
      payload.insert(payload.end(), m.begin(), m.end());
    }
  }
  const auto p = Trajectory::from_payload(t.shape(), t.roles(), payload);
  for (std::size_t s = 0; s < 3; ++s) EXPECT_LT((rer_eos(t, s) - rer_eos(p, s)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(RerSeries, LengthAndAverage) {
  std::mt19937_64 rng(8);
  const auto a = rer_series(testing::random_trajectory(rng, 3, 6, 2, "a"));
  const auto b = rer_series(testing::random_trajectory(rng, 3, 6, 2, "b"));
  EXPECT_EQ(a.steps(), 6u);
  EXPECT_EQ(a.dim(), 2u);
  EXPECT_EQ(a.sample_id, "a");
  const std::vector<RerSeries> both{a, b};
  const auto m = average_series(both);
  for (std::size_t s = 0; s < 6; ++s) EXPECT_LT((m.matrices[s] - (a.matrices[s] + b.matrices[s]) / 2).norm(), 1e-15);
  const auto c = rer_series(testing::random_trajectory(rng, 3, 5, 2));
  const std::vector<RerSeries> mixed{a, c};
  EXPECT_DAA_ERROR(average_series(mixed), ErrorCode::shape_mismatch);
}

TEST(Pca, RankOneDataRecoversLine) {
  Eigen::MatrixXd dir(2, 2);
  dir << 0.6, 0.0, -0.8, 0.0;  // unit vector in flattened space
  std::vector<Eigen::MatrixXd> ms;
  for (double a : {-2.0, -0.5, 0.0, 1.0, 3.5}) ms.push_back(Eigen::MatrixXd::Constant(2, 2, 0.25) + a * dir);
  const std::vector<RerSeries> data{series_of(ms)};
  const auto basis = fit_pca(data);
  const Eigen::VectorXd flat = Eigen::Map<const Eigen::VectorXd>(dir.data(), 4);
  EXPECT_NEAR(std::abs(basis.components.row(0).dot(flat)), 1.0, 1e-12);
  EXPECT_NEAR(basis.explained_variance[1], 0.0, 1e-20);
  EXPECT_GT(basis.explained_variance[0], 0.0);
  EXPECT_NEAR(basis.components.row(1).norm(), 1.0, 1e-12);
  EXPECT_NEAR(basis.components.row(0).dot(basis.components.row(1)), 0.0, 1e-12);
}

TEST(Pca, OrthonormalBasisAndSignConvention) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n01;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<RerSeries> data;
    for (int k = 0; k < 3; ++k) {
      std::vector<Eigen::MatrixXd> ms;
      for (int s = 0; s < 5; ++s) {
        Eigen::MatrixXd m(3, 3);
        for (auto& v : m.reshaped()) v = n01(rng);
        ms.push_back(m);
      }
      data.push_back(series_of(ms));
    }
    const auto b = fit_pca(data);
    const Eigen::Matrix2d gram = b.components * b.components.transpose();
    EXPECT_NEAR(gram(0, 0), 1.0, 1e-9);
    EXPECT_NEAR(gram(1, 1), 1.0, 1e-9);
    EXPECT_LT(std::abs(gram(0, 1)), 1e-9);
    EXPECT_GE(b.explained_variance[0], b.explained_variance[1]);
    for (Eigen::Index k = 0; k < 2; ++k) {
      for (Eigen::Index i = 0; i < b.components.cols(); ++i) {
        if (std::abs(b.components(k, i)) > 1e-12) {
          EXPECT_GT(b.components(k, i), 0.0);
          break;
        }
      }
    }
    // Repeat fit is identical.
    EXPECT_EQ(fit_pca(data).components, b.components);
  }
}

TEST(Pca, ExplainedVarianceMatchesCovariance) {
  std::mt19937_64 rng(10);
  std::normal_distribution<double> n01;
  std::vector<Eigen::MatrixXd> ms;
  for (int s = 0; s < 40; ++s) {
    Eigen::MatrixXd m(2, 2);
    m << 3.0 * n01(rng), n01(rng), 0.1 * n01(rng), n01(rng) + 5.0;
    ms.push_back(m);
  }
  const std::vector<RerSeries> data{series_of(ms)};
  const auto b = fit_pca(data);
  Eigen::MatrixXd x(40, 4);
  for (int s = 0; s < 40; ++s) x.row(s) = Eigen::Map<const Eigen::VectorXd>(ms[s].data(), 4).transpose();
  const Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
  const Eigen::MatrixXd cov = centered.transpose() * centered / 39.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  EXPECT_NEAR(b.explained_variance[0], eig.eigenvalues()[3], 1e-9);
  EXPECT_NEAR(b.explained_variance[1], eig.eigenvalues()[2], 1e-9);
}

TEST(Pca, MeanProjectsToOrigin) {
  std::mt19937_64 rng(11);
  const std::vector<RerSeries> data{rer_series(testing::random_trajectory(rng, 3, 6, 3)),
                                    rer_series(testing::random_trajectory(rng, 3, 6, 3))};
  const auto b = fit_pca(data);
  Eigen::MatrixXd mean = Eigen::Map<const Eigen::MatrixXd>(b.mean.data(), 3, 3);
  const auto p = b.project(series_of({mean}));
  EXPECT_LT(p.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Pca, DegenerateInputs) {
  const std::vector<RerSeries> flat{series_of({Eigen::MatrixXd::Ones(2, 2), Eigen::MatrixXd::Ones(2, 2)})};
  EXPECT_DAA_ERROR(fit_pca(flat), ErrorCode::degenerate_data);
  const std::vector<RerSeries> single{series_of({Eigen::MatrixXd::Ones(2, 2)})};
  EXPECT_DAA_ERROR(fit_pca(single), ErrorCode::degenerate_data);
}

TEST(Pca, ProjectionsShareBasis) {
  std::mt19937_64 rng(12);
  const std::vector<RerSeries> data{rer_series(testing::random_trajectory(rng, 3, 6, 3, "x")),
                                    rer_series(testing::random_trajectory(rng, 3, 6, 3, "y"))};
  const auto out = pca_project(data);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].components, out[1].components);
  EXPECT_EQ(out[0].trajectory.rows(), 6);
  EXPECT_EQ(out[1].sample_id, "y");
}

TEST(Pca, MeanStepLength) {
  Eigen::Matrix<double, Eigen::Dynamic, 2> pts(3, 2);
  pts << 0, 0, 3, 4, 3, 5;
  EXPECT_DOUBLE_EQ(mean_step_length(pts), 3.0);
}

TEST(Heatmaps, CsvRoundTripAtNineDigits) {
  testing::TempDir dir("heat");
  Eigen::MatrixXd m(2, 2);
  m << 0.123456789, -1.5, 1e-5, -98765.4321;
  Eigen::MatrixXd n(2, 2);
  n << 0.0, 2.0, -3.25, 7.0;
  const auto out = export_rer_heatmaps(series_of({m, n}), dir.path(), "rer");
  const auto back = read_rer_heatmap_csv(out.values_csv);
  ASSERT_EQ(back.steps(), 2u);
  EXPECT_EQ(back.matrices[0], m);
  EXPECT_EQ(back.matrices[1], n);

  std::mt19937_64 rng(13);
  const auto series = rer_series(testing::random_trajectory(rng, 3, 4, 3));
  const auto again = read_rer_heatmap_csv(export_rer_heatmaps(series, dir.path(), "rand").values_csv);
  for (std::size_t s = 0; s < series.steps(); ++s) {
    for (Eigen::Index k = 0; k < 9; ++k) {
      const double v = series.matrices[s].reshaped()[k];
      EXPECT_NEAR(again.matrices[s].reshaped()[k], v, 5e-9 * std::abs(v) + 1e-300);
    }
  }
}

TEST(Heatmaps, SummaryHoldsExtrema) {
  testing::TempDir dir("heat");
  std::mt19937_64 rng(14);
  const auto series = rer_series(testing::random_trajectory(rng, 4, 5, 3));
  const auto out = export_rer_heatmaps(series, dir.path(), "s");
  std::ifstream in(out.summary_csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "step,min,max");
  std::size_t step = 0;
  while (std::getline(in, line)) {
    std::size_t s;
    double lo, hi;
    ASSERT_EQ(std::sscanf(line.c_str(), "%zu,%lf,%lf", &s, &lo, &hi), 3);
    EXPECT_EQ(s, step);
    EXPECT_NEAR(lo, series.matrices[s].minCoeff(), 5e-9 * std::abs(lo));
    EXPECT_NEAR(hi, series.matrices[s].maxCoeff(), 5e-9 * std::abs(hi));
    ++step;
  }
  EXPECT_EQ(step, 5u);
}

TEST(Heatmaps, ZeroSeriesRastersAreWhite) {
  testing::TempDir dir("heat");
  const auto out = export_rer_heatmaps(series_of({Eigen::MatrixXd::Zero(3, 3), Eigen::MatrixXd::Zero(3, 3)}),
                                       dir.path(), "z", true);
  ASSERT_EQ(out.rasters.size(), 2u);
  std::ifstream in(out.rasters[0], std::ios::binary);
  std::string magic;
  int w, h, maxv;
  in >> magic >> w >> h >> maxv;
  in.get();
  EXPECT_EQ(magic, "P6");
  EXPECT_EQ(w, 3);
  EXPECT_EQ(h, 3);
  std::vector<unsigned char> px(27);
  in.read(reinterpret_cast<char*>(px.data()), 27);
  for (unsigned char c : px) EXPECT_EQ(c, 255);
  const auto values = read_rer_heatmap_csv(out.values_csv);
  EXPECT_EQ(values.matrices[1], Eigen::MatrixXd::Zero(3, 3));
}

TEST(Heatmaps, SignedColourScale) {
  testing::TempDir dir("heat");
  Eigen::MatrixXd m(1, 2);
  m << 2.0, -2.0;
  const auto out = export_rer_heatmaps(series_of({m}), dir.path(), "c", true);
  std::ifstream in(out.rasters[0], std::ios::binary);
  std::string magic;
  int w, h, maxv;
  in >> magic >> w >> h >> maxv;
  in.get();
  unsigned char px[6];
  in.read(reinterpret_cast<char*>(px), 6);
  EXPECT_EQ(px[0], 255);  // positive: red
  EXPECT_EQ(px[1], 0);
  EXPECT_EQ(px[5], 255);  // negative: blue
  EXPECT_EQ(px[3], 0);
}

}  // namespace
}  // namespace daa
