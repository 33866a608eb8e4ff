#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gflm/curve.hpp"
#include "expect_error.hpp"
#include "oracles.hpp"

using namespace gflm;

TEST(TimeGrid, RejectsBadPoints) {
  EXPECT_EQ(kind_of([] { TimeGrid g(std::vector<double>{0.0}); }), ErrorKind::kInvalidInput);
  EXPECT_EQ(kind_of([] { TimeGrid g(std::vector<double>{0.0, 0.5, 0.5}); }), ErrorKind::kInvalidInput);
  EXPECT_EQ(kind_of([] { TimeGrid g(std::vector<double>{0.0, NAN}); }), ErrorKind::kInvalidInput);
}

TEST(TimeGrid, Uniform) {
  const TimeGrid g = TimeGrid::uniform(2.0, 4.0, 5);
  EXPECT_EQ(g.size(), 5u);
  EXPECT_DOUBLE_EQ(g[1], 2.5);
  EXPECT_DOUBLE_EQ(g.length(), 2.0);
}

TEST(WeightMeasure, RejectsNegativeAndZero) {
  EXPECT_EQ(kind_of([] { WeightMeasure w(Eigen::Vector3d(1.0, -1.0, 1.0)); }), ErrorKind::kInvalidInput);
  EXPECT_EQ(kind_of([] { WeightMeasure w(Eigen::Vector3d::Zero()); }), ErrorKind::kInvalidInput);
}

TEST(Curve, RejectsNonFinite) {
  EXPECT_EQ(kind_of([] { Curve c(Eigen::Vector2d(1.0, INFINITY)); }), ErrorKind::kInvalidInput);
}

TEST(InnerProduct, SineAgainstAdaptiveQuadrature) {
  const TimeGrid g = TimeGrid::uniform(0.0, 1.0, 1001);
  Eigen::VectorXd v(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) v[k] = std::sqrt(2.0) * std::sin(M_PI * g[k]);
  const Curve f(v);
  const double got = inner_product(f, f, WeightMeasure::uniform(g.size()), g);
  const double ref = oracle::integrate([](double t) { return 2.0 * std::pow(std::sin(M_PI * t), 2); }, 0.0, 1.0);
  EXPECT_NEAR(ref, 1.0, 1e-10);
  EXPECT_NEAR(got, ref, 1e-6);
}

TEST(InnerProduct, WeightedAgainstAdaptiveQuadrature) {
  const TimeGrid g = TimeGrid::uniform(0.0, 2.0, 801);
  Eigen::VectorXd a(g.size()), b(g.size()), w(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    a[k] = std::exp(-g[k]);
    b[k] = g[k] * g[k];
    w[k] = 1.0 + g[k];
  }
  const double got = inner_product(Curve(a), Curve(b), WeightMeasure(w), g);
  const double ref = oracle::integrate([](double t) { return std::exp(-t) * t * t * (1.0 + t); }, 0.0, 2.0);
  EXPECT_NEAR(got, ref, 1e-5);
}

TEST(InnerProduct, LengthMismatch) {
  const TimeGrid g = TimeGrid::uniform(0.0, 1.0, 5);
  EXPECT_EQ(kind_of([&] { inner_product(Curve::zeros(4), Curve::zeros(5), WeightMeasure::uniform(5), g); }),
            ErrorKind::kAlignment);
}

TEST(Dataset, CenteringRemovesColumnMeans) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> z(3.0, 2.0);
  Eigen::MatrixXd c(100, 50);
  for (Eigen::Index i = 0; i < c.rows(); ++i)
    for (Eigen::Index k = 0; k < c.cols(); ++k) c(i, k) = z(rng);
  const FunctionalDataset ds(TimeGrid::uniform(0, 1, 50), WeightMeasure::uniform(50), c, Eigen::VectorXd::Zero(100),
                             ResponseKind::kContinuous);
  const auto [centered, mean] = center_dataset(ds);
  const Eigen::VectorXd means = centered.curves().colwise().mean();
  EXPECT_LT(means.cwiseAbs().maxCoeff(), 1e-12);
  for (Eigen::Index k = 0; k < c.cols(); ++k) EXPECT_NEAR(mean[static_cast<std::size_t>(k)], c.col(k).mean(), 1e-12);
}

TEST(Dataset, Validation) {
  const TimeGrid g = TimeGrid::uniform(0, 1, 4);
  const auto w = WeightMeasure::uniform(4);
  EXPECT_EQ(kind_of([&] {
              FunctionalDataset d(g, w, Eigen::MatrixXd::Zero(3, 5), Eigen::VectorXd::Zero(3),
                                  ResponseKind::kContinuous);
            }),
            ErrorKind::kAlignment);
  EXPECT_EQ(kind_of([&] {
              FunctionalDataset d(g, w, Eigen::MatrixXd::Zero(3, 4), Eigen::VectorXd::Zero(2),
                                  ResponseKind::kContinuous);
            }),
            ErrorKind::kAlignment);
  EXPECT_EQ(kind_of([&] {
              FunctionalDataset d(g, w, Eigen::MatrixXd::Zero(2, 4), Eigen::Vector2d(0.0, 0.5), ResponseKind::kBinary);
            }),
            ErrorKind::kInvalidInput);
  EXPECT_EQ(kind_of([&] {
              FunctionalDataset d(g, w, Eigen::MatrixXd::Zero(2, 4), Eigen::Vector2d(1.0, -1.0), ResponseKind::kCount);
            }),
            ErrorKind::kInvalidInput);
}

TEST(Dataset, SubsetKeepsOrder) {
  Eigen::MatrixXd c(3, 2);
  c << 1, 2, 3, 4, 5, 6;
  const FunctionalDataset ds(TimeGrid::uniform(0, 1, 2), WeightMeasure::uniform(2), c, Eigen::Vector3d(0, 1, 0),
                             ResponseKind::kBinary, {"a", "b", "c"});
  const auto s = ds.subset({2, 0});
  EXPECT_EQ(s.n(), 2u);
  EXPECT_EQ(s.curves()(0, 0), 5.0);
  EXPECT_EQ(s.ids()[1], "a");
  EXPECT_EQ(kind_of([&] { ds.subset({3}); }), ErrorKind::kRange);
  EXPECT_EQ(kind_of([&] { ds.curve(9); }), ErrorKind::kRange);
}

TEST(Resample, LinearFunctionsSurvive) {
  const TimeGrid from = TimeGrid::uniform(0, 1, 11);
  const TimeGrid to = TimeGrid::uniform(0.05, 0.95, 37);
  Eigen::VectorXd v = (2.0 * from.points().array() - 1.0).matrix();
  const Eigen::VectorXd r = resample_linear(from, v, to);
  for (std::size_t k = 0; k < to.size(); ++k) EXPECT_NEAR(r[static_cast<Eigen::Index>(k)], 2.0 * to[k] - 1.0, 1e-12);
}

TEST(Resample, FlatBeyondEnds) {
  const TimeGrid from = TimeGrid::uniform(0, 1, 3);
  const TimeGrid to(std::vector<double>{-1.0, 2.0});
  const Eigen::VectorXd r = resample_linear(from, Eigen::Vector3d(4, 5, 6), to);
  EXPECT_EQ(r[0], 4.0);
  EXPECT_EQ(r[1], 6.0);
}
