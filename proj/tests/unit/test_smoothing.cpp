#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gflm/smoothing.hpp"
#include "expect_error.hpp"
#include "oracles.hpp"

using namespace gflm;

namespace {

struct Scatter {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
};

Scatter affine_scatter(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-2.0, 3.0);
  Scatter s{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (int i = 0; i < n; ++i) {
    s.x[i] = u(rng);
    s.y[i] = -1.25 + 0.8 * s.x[i];
  }
  return s;
}

}  // namespace

class AffineReproduction : public ::testing::TestWithParam<std::tuple<KernelKind, int>> {};

TEST_P(AffineReproduction, ValuesAndSlopes) {
  const auto [kernel, degree] = GetParam();
  const Scatter s = affine_scatter(300, 3);
  SmootherConfig cfg;
  cfg.bandwidth = 0.3;
  cfg.kernel = kernel;
  cfg.degree = degree;
  const Eigen::VectorXd at = Eigen::VectorXd::LinSpaced(57, -2.0, 3.0);
  const Eigen::VectorXd v = local_poly_smooth(s.x, s.y, at, cfg, 0);
  const Eigen::VectorXd d = local_poly_smooth(s.x, s.y, at, cfg, 1);
  for (Eigen::Index k = 0; k < at.size(); ++k) {
    EXPECT_NEAR(v[k], -1.25 + 0.8 * at[k], 1e-8);
    EXPECT_NEAR(d[k], 0.8, 1e-8);
  }
}

INSTANTIATE_TEST_SUITE_P(Kernels, AffineReproduction,
                         ::testing::Combine(::testing::Values(KernelKind::kEpanechnikov, KernelKind::kGaussian),
                                            ::testing::Values(1, 2)));

TEST(LocalLinear, SineAgainstDenseOracle) {
  const int n = 500;
  const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(n, 0.0, M_PI);
  const Eigen::VectorXd y = x.array().sin().matrix();
  SmootherConfig cfg;
  cfg.bandwidth = 0.2;
  const Eigen::VectorXd at = Eigen::VectorXd::LinSpaced(2001, 0.0, M_PI);
  const SmoothResult v = local_poly_fit(x, y, at, cfg, 0);
  const Eigen::VectorXd d = local_poly_smooth(x, y, at, cfg, 1);
  EXPECT_EQ(v.inflated_points, 0);
  double oracle_sup_v = 0.0;
  double oracle_sup_d = 0.0;
  double sup_v = 0.0;
  double sup_d = 0.0;
  for (Eigen::Index k = 0; k < at.size(); ++k) {
    const auto [ov, od] = oracle::local_linear(x, y, at[k], 0.2, oracle::epanechnikov);
    EXPECT_NEAR(v.values[k], ov, 1e-10);
    EXPECT_NEAR(d[k], od, 1e-9);
    oracle_sup_v = std::max(oracle_sup_v, std::abs(ov - std::sin(at[k])));
    oracle_sup_d = std::max(oracle_sup_d, std::abs(od - std::cos(at[k])));
    sup_v = std::max(sup_v, std::abs(v.values[k] - std::sin(at[k])));
    sup_d = std::max(sup_d, std::abs(d[k] - std::cos(at[k])));
  }
  EXPECT_LE(sup_v, oracle_sup_v + 1e-10);
  EXPECT_LE(sup_d, oracle_sup_d + 1e-9);
  // second-order bias with h = 0.2 stays small
  EXPECT_LT(oracle_sup_v, 0.02);
  EXPECT_LT(oracle_sup_d, 0.1);
}

TEST(LocalLinear, SparseRegionInflates) {
  Eigen::VectorXd x(6);
  x << 0.0, 0.1, 0.2, 5.0, 5.1, 5.2;
  const Eigen::VectorXd y = x;
  SmootherConfig cfg;
  cfg.bandwidth = 0.3;
  const SmoothResult r = local_poly_fit(x, y, Eigen::Vector3d(0.1, 2.6, 5.1), cfg, 0);
  EXPECT_EQ(r.inflated_points, 1);
  EXPECT_NEAR(r.values[1], 2.6, 1e-10);
}

TEST(LocalLinear, HopelessDataIsSmoothingError) {
  Eigen::VectorXd x(2);
  x << 0.0, 100.0;
  SmootherConfig cfg;
  cfg.bandwidth = 0.1;
  EXPECT_EQ(kind_of([&] { local_poly_fit(x, x, Eigen::VectorXd::Constant(1, 50.0), cfg, 0); }),
            ErrorKind::kSmoothing);
}

TEST(LocalLinear, ConfigErrors) {
  const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(10, 0, 1);
  SmootherConfig cfg;
  EXPECT_EQ(kind_of([&] { local_poly_fit(x, x, x, cfg, 0); }), ErrorKind::kConfig);
  cfg.bandwidth = 0.5;
  cfg.degree = 3;
  EXPECT_EQ(kind_of([&] { local_poly_fit(x, x, x, cfg, 0); }), ErrorKind::kConfig);
  cfg.degree = 1;
  EXPECT_EQ(kind_of([&] { local_poly_fit(x, x, x, cfg, 2); }), ErrorKind::kConfig);
  EXPECT_EQ(kind_of([&] { parse_kernel("triangle"); }), ErrorKind::kConfig);
}

TEST(Pava, KnownSolution) {
  Eigen::VectorXd v(6);
  v << 1, 3, 2, 4, 3.5, 5;
  const Eigen::VectorXd r = pool_adjacent_violators(v, Eigen::VectorXd::Ones(6));
  Eigen::VectorXd want(6);
  want << 1, 2.5, 2.5, 3.75, 3.75, 5;
  EXPECT_LT((r - want).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Pava, WeightedPooling) {
  const Eigen::VectorXd r = pool_adjacent_violators(Eigen::Vector2d(2.0, 0.0), Eigen::Vector2d(3.0, 1.0));
  EXPECT_DOUBLE_EQ(r[0], 1.5);
  EXPECT_DOUBLE_EQ(r[1], 1.5);
}

TEST(Pava, MonotoneAndMeanPreserving) {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> z;
  Eigen::VectorXd v(200);
  for (Eigen::Index i = 0; i < 200; ++i) v[i] = 0.01 * i + z(rng);
  const Eigen::VectorXd r = pool_adjacent_violators(v, Eigen::VectorXd::Ones(200));
  for (Eigen::Index i = 1; i < 200; ++i) EXPECT_GE(r[i], r[i - 1]);
  EXPECT_NEAR(r.sum(), v.sum(), 1e-9);
  // already sorted input is left alone
  EXPECT_EQ(pool_adjacent_violators(r, Eigen::VectorXd::Ones(200)), r);
}

TEST(Bandwidth, RuleOfThumb) {
  const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(32, 0.0, 31.0);
  const double mean = x.mean();
  const double s = std::sqrt((x.array() - mean).square().sum() / 31.0);
  EXPECT_NEAR(rule_of_thumb_bandwidth(x), 1.2 * s * std::pow(32.0, -0.2), 1e-14);
  EXPECT_EQ(kind_of([] { rule_of_thumb_bandwidth(Eigen::VectorXd::Zero(1)); }), ErrorKind::kPrecondition);
}
