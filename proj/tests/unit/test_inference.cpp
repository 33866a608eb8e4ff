#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gflm/inference.hpp"
#include "gflm/simulation.hpp"
#include "expect_error.hpp"
#include "oracles.hpp"

using namespace gflm;

namespace {

struct Fitted {
  FunctionalDataset ds;
  Basis basis;
  ScoreMatrix scores;
  ModelFit fit;
};

Fitted fitted(std::size_t n, std::size_t p, double delta = 1.0, std::uint64_t rep = 0) {
  SimDesign d;
  d.n = n;
  d.coeff_scale = delta;
  FunctionalDataset ds = generate_sample(d, rep);
  Basis b = fourier_basis(p, ds.grid());
  ScoreMatrix s = project_scores(ds, b, p);
  ModelFit fit = iwls_fit(s, ds.responses(), Link(LinkKind::kLogit));
  return {std::move(ds), std::move(b), std::move(s), std::move(fit)};
}

// Linear predictors of the generating model from its scores.
Eigen::VectorXd true_eta(const Eigen::MatrixXd& eps, double delta) {
  return (delta + delta * eps.col(0).array() + delta / 2 * eps.col(1).array() + delta / 3 * eps.col(2).array())
      .matrix();
}

}  // namespace

TEST(Normal, KnownQuantiles) {
  EXPECT_NEAR(normal_quantile(0.95), 1.6448536269514722, 1e-12);
  EXPECT_NEAR(normal_quantile(0.025), -1.959963984540054, 1e-12);
  EXPECT_NEAR(normal_cdf(1.0), 0.8413447460685429, 1e-14);
  EXPECT_EQ(kind_of([] { normal_quantile(1.0); }), ErrorKind::kInvalidInput);
}

TEST(Statistic, DirectFormula) {
  Eigen::Vector3d b(0.5, 1.0, -0.5), b0(0.0, 0.5, 0.0);
  Eigen::Matrix3d g;
  g << 2, 0.5, 0.1, 0.5, 1, 0.2, 0.1, 0.2, 0.5;
  const Eigen::Vector3d d = b - b0;
  EXPECT_NEAR(test_statistic(b, b0, g, 100, true), (100 * d.dot(g * d) - 3) / std::sqrt(6.0), 1e-12);
  const Eigen::Vector2d ds = d.tail(2);
  EXPECT_NEAR(test_statistic(b, b0, g, 100, false), (100 * ds.dot(g.bottomRightCorner(2, 2) * ds) - 2) / 2.0, 1e-12);
}

TEST(Statistic, GammaValidation) {
  Eigen::Matrix2d g;
  g << 1, 0.5, 0.2, 1;
  const Eigen::Vector2d b(1, 1);
  EXPECT_EQ(kind_of([&] { test_statistic(b, b, g, 10, true); }), ErrorKind::kInvalidInput);
  EXPECT_EQ(kind_of([&] { test_statistic(b, Eigen::Vector3d::Zero(), Eigen::Matrix2d::Identity(), 10, true); }),
            ErrorKind::kAlignment);
  Eigen::Matrix2d neg;
  neg << 1, 0, 0, -1;
  EXPECT_EQ(kind_of([&] { test_statistic(b, b, neg, 10, true); }), ErrorKind::kInvalidInput);
}

TEST(NoEffect, UsesSlopesOnly) {
  const Fitted f = fitted(300, 3);
  const InferenceReport r = no_effect_test(f.fit, 0.05);
  const Eigen::VectorXd s = f.fit.slopes();
  const double form = s.dot(f.fit.gamma.bottomRightCorner(3, 3) * s);
  EXPECT_NEAR(r.statistic, (300 * form - 3) / std::sqrt(6.0), 1e-10);
  EXPECT_EQ(r.dof_terms, 3);
  EXPECT_NEAR(r.p_value, 1.0 - normal_cdf(r.statistic), 1e-15);
  EXPECT_TRUE(r.reject);
  ModelFit bad = f.fit;
  bad.converged = false;
  EXPECT_EQ(kind_of([&] { no_effect_test(bad, 0.05); }), ErrorKind::kPrecondition);
  EXPECT_EQ(kind_of([&] { no_effect_test(f.fit, 1.5); }), ErrorKind::kConfig);
}

TEST(Band, ConstantSpotCheck) {
  EXPECT_NEAR(band_constant(7, 534, 0.05), (7 + std::sqrt(14.0) * 1.6448536269514722) / 534, 1e-15);
  EXPECT_NEAR(band_constant(7, 534, 0.05), 0.02464, 1e-5);
}

TEST(Band, HalfWidthIsQuadraticFormMaximum) {
  const Fitted f = fitted(500, 3);
  const Band b = simultaneous_band(f.fit, f.basis, 0.05);
  const Eigen::MatrixXd ginv = f.fit.gamma.inverse();
  for (std::size_t k = 0; k < f.basis.grid().size(); k += 20) {
    Eigen::VectorXd psi(4);
    psi[0] = 1.0;
    for (std::size_t j = 1; j <= 3; ++j) psi[static_cast<Eigen::Index>(j)] = f.basis.functions()(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j - 1));
    const double half = std::sqrt(b.c_alpha * psi.dot(ginv * psi));
    EXPECT_NEAR(b.upper[k] - b.estimate[k], half, 1e-10);
    EXPECT_NEAR(b.estimate[k] - b.lower[k], half, 1e-10);
    EXPECT_NEAR(b.estimate[k], psi.dot(f.fit.beta), 1e-12);
  }
  EXPECT_NEAR(b.c_alpha, band_constant(4, 500, 0.05), 1e-15);
}

TEST(Band, NearSingularGamma) {
  Fitted f = fitted(200, 2);
  f.fit.gamma(2, 2) = 1e-13;
  f.fit.gamma(1, 2) = f.fit.gamma(2, 1) = 0.0;
  f.fit.gamma(0, 2) = f.fit.gamma(2, 0) = 0.0;
  EXPECT_EQ(kind_of([&] { simultaneous_band(f.fit, f.basis, 0.05); }), ErrorKind::kConditioning);
}

TEST(Metric, MatchesStatisticQuadraticForm) {
  const Fitted f = fitted(400, 4);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z;
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::VectorXd cf(5), cg(5);
    for (int k = 0; k < 5; ++k) {
      cf[k] = z(rng);
      cg[k] = z(rng);
    }
    const ParameterFunction pf{cf[0], reconstruct(cf, f.basis).second};
    const ParameterFunction pg{cg[0], reconstruct(cg, f.basis).second};
    const double d2 = dg_distance(pf, pg, f.scores, f.fit, Link(LinkKind::kLogit), f.basis);
    const double t = test_statistic(cf, cg, f.fit.gamma, 400, true);
    const double form = 400.0 * d2;
    EXPECT_NEAR(form, t * std::sqrt(10.0) + 5.0, 1e-10 * std::max(1.0, form));
    const double d2g = dg_distance(pf, pg, f.basis, f.fit.gamma);
    EXPECT_NEAR(d2g, d2, 1e-10 * std::max(1.0, d2));
  }
}

TEST(Metric, IgnoresInterceptWithoutSlot) {
  const Fitted f = fitted(100, 2);
  const ParameterFunction a{5.0, Curve::zeros(f.basis.grid().size())};
  const ParameterFunction b{-1.0, Curve::zeros(f.basis.grid().size())};
  EXPECT_EQ(dg_distance(a, b, f.basis, Eigen::Matrix2d::Identity(), false), 0.0);
  EXPECT_NEAR(dg_distance(a, b, f.basis, Eigen::Matrix3d::Identity(), true), 36.0, 1e-12);
}

TEST(GeneralizedCovariance, SymmetricPlugIn) {
  const Fitted f = fitted(150, 3);
  const Eigen::MatrixXd g = generalized_covariance(f.ds, f.fit.eta, Link(LinkKind::kLogit));
  EXPECT_LT((g - g.transpose()).cwiseAbs().maxCoeff(), 1e-12);
  Eigen::MatrixXd ref = Eigen::MatrixXd::Zero(g.rows(), g.cols());
  for (std::size_t i = 0; i < f.ds.n(); ++i) {
    const double p = oracle::sigmoid(f.fit.eta[static_cast<Eigen::Index>(i)]);
    const Eigen::VectorXd x = f.ds.curves().row(static_cast<Eigen::Index>(i)).transpose();
    ref += p * (1 - p) * x * x.transpose();
  }
  ref /= 150.0;
  EXPECT_LT((g - ref).cwiseAbs().maxCoeff(), 1e-12);
}

// Weighted scores on the eigenbasis of G are uncorrelated with variances lambda^G.
// The basis comes from one sample and the moments from an independent one.
TEST(GeneralizedCovariance, EigenScoresDecorrelate) {
  const Link link(LinkKind::kLogit);
  SimDesign d;
  d.n = 5000;
  const FunctionalDataset a = generate_sample(d, 100);
  const FunctionalDataset b = generate_sample(d, 101);
  const Eigen::VectorXd eta_a = true_eta(generate_scores(d, 100), 1.0);
  const Eigen::VectorXd eta_b = true_eta(generate_scores(d, 101), 1.0);
  const Basis gb = eigenbasis(generalized_covariance(a, eta_a, link), a.grid(), a.weight(), 3);
  const Eigen::MatrixXd m = eigen_score_diagnostic(b, eta_b, link, gb);

  const ScoreMatrix raw = project_scores(b, gb, 3);
  Eigen::VectorXd w(5000);
  for (Eigen::Index i = 0; i < 5000; ++i) w[i] = std::pow(link.mean_deriv(eta_b[i]), 2) / link.variance(link.mean(eta_b[i]));
  for (Eigen::Index k = 0; k < 3; ++k) {
    EXPECT_NEAR(m(k, k), (*gb.eigenvalues())[k], 0.1 * (*gb.eigenvalues())[k]) << k;
    for (Eigen::Index l = k + 1; l < 3; ++l) {
      const Eigen::VectorXd prod = (w.array() * raw.slopes().col(k).array() * raw.slopes().col(l).array()).matrix();
      const double mean = prod.mean();
      const double se = std::sqrt((prod.array() - mean).square().sum() / 4999.0 / 5000.0);
      EXPECT_NEAR(mean, m(k, l), 1e-12);
      EXPECT_LT(std::abs(m(k, l)), 3.0 * se) << k << "," << l;
    }
  }
}
