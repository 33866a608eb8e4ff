#include <gtest/gtest.h>

#include <cmath>

#include "gflm/simulation.hpp"
#include "gflm/spqr.hpp"
#include "expect_error.hpp"
#include "oracles.hpp"

using namespace gflm;

namespace {

struct Frame {
  ScoreMatrix scores;
  Eigen::VectorXd y;
};

Frame generator_frame(std::size_t n, std::uint64_t rep, LinkKind link = LinkKind::kLogit, std::size_t p = 3) {
  SimDesign d;
  d.n = n;
  d.link_true = link;
  const FunctionalDataset ds = generate_sample(d, rep);
  return {project_scores(ds, fourier_basis(p, ds.grid()), p), ds.responses()};
}

// Link estimate holding the exact logistic link on a fine grid.
LinkEstimate logistic_estimate() {
  LinkEstimate est;
  est.eval_grid = Eigen::VectorXd::LinSpaced(20001, -15.0, 15.0);
  est.g_hat.resize(est.eval_grid.size());
  for (Eigen::Index k = 0; k < est.eval_grid.size(); ++k) est.g_hat[k] = oracle::sigmoid(est.eval_grid[k]);
  est.g_prime_hat = (est.g_hat.array() * (1.0 - est.g_hat.array())).matrix();
  est.sigma2_hat = est.g_prime_hat;
  est.variance_floor = 1e-12;
  return est;
}

double angle(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return std::acos(std::clamp(std::abs(a.dot(b)) / (a.norm() * b.norm()), -1.0, 1.0));
}

}  // namespace

TEST(QuasiDeviance, ExactLogisticLinkGivesBernoulliDeviance) {
  const LinkEstimate est = logistic_estimate();
  Eigen::VectorXd eta(6), y(6);
  eta << -2.0, -0.5, 0.0, 0.3, 1.2, 2.5;
  y << 0, 1, 1, 0, 1, 0;
  double ref = 0.0;
  for (Eigen::Index i = 0; i < 6; ++i) {
    const double p = oracle::sigmoid(eta[i]);
    ref += -2.0 * (y[i] * std::log(p) + (1 - y[i]) * std::log(1 - p));
  }
  EXPECT_NEAR(quasi_deviance(y, eta, est), ref, 1e-4 * ref);
}

TEST(GammaHat, PlugInFormula) {
  const LinkEstimate est = logistic_estimate();
  const Frame f = generator_frame(200, 1);
  Eigen::VectorXd beta(3);
  beta << 0.8, 0.5, 0.33;
  beta.normalize();
  const Eigen::VectorXd eta = f.scores.slopes() * beta;
  int floored = -1;
  const Eigen::MatrixXd g = gamma_hat(f.scores, eta, est, &floored);
  EXPECT_EQ(floored, 0);
  Eigen::MatrixXd ref = Eigen::MatrixXd::Zero(3, 3);
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    const double p = oracle::sigmoid(eta[i]);
    const Eigen::VectorXd x = f.scores.slopes().row(i).transpose();
    ref += p * (1 - p) * x * x.transpose();
  }
  ref /= 200.0;
  EXPECT_LT((g - ref).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(EstimateLink, MonotoneAndInsideResponseRange) {
  const Frame f = generator_frame(500, 2);
  Eigen::VectorXd beta = Eigen::Vector3d(1.0, 0.5, 0.33).normalized();
  const Eigen::VectorXd eta = f.scores.slopes() * beta;
  const LinkEstimate est = estimate_link(eta, f.y, SpqrConfig{}, rule_of_thumb_bandwidth(eta));
  for (Eigen::Index k = 1; k < est.g_hat.size(); ++k) EXPECT_GE(est.g_hat[k], est.g_hat[k - 1]);
  EXPECT_GE(est.g_hat.minCoeff(), 0.0);
  EXPECT_LE(est.g_hat.maxCoeff(), 1.0);
  EXPECT_GT(est.g_prime_hat.minCoeff(), 0.0);
  EXPECT_GE(est.sigma2_hat.minCoeff(), est.variance_floor);
  EXPECT_DOUBLE_EQ(est.derivative_bandwidth, 2.0 * est.bandwidth);
}

TEST(EstimateLink, Errors) {
  const Eigen::VectorXd y = Eigen::Vector3d(0, 1, 0);
  EXPECT_EQ(kind_of([&] { estimate_link(Eigen::Vector3d::Ones(), y, SpqrConfig{}, 0.5); }),
            ErrorKind::kDegenerateLink);
  SpqrConfig cfg;
  cfg.derivative_bandwidth_scale = 0.0;
  EXPECT_EQ(kind_of([&] { estimate_link(Eigen::Vector3d(0, 1, 2), y, cfg, 0.5); }), ErrorKind::kConfig);
  EXPECT_EQ(kind_of([&] { estimate_link(Eigen::Vector2d(0, 1), y, SpqrConfig{}, 0.5); }), ErrorKind::kAlignment);
}

TEST(SpqrFit, UnitNormAndMonotoneLinkEveryIteration) {
  for (std::uint64_t rep : {0u, 1u, 2u}) {
    const Frame f = generator_frame(400, rep);
    const SpqrResult r = spqr_fit(f.scores, f.y, SpqrConfig{}, Link(LinkKind::kLogit));
    ASSERT_FALSE(r.trace.empty());
    for (const auto& it : r.trace) {
      EXPECT_NEAR(it.beta.norm(), 1.0, 1e-10);
      EXPECT_TRUE(it.link_monotone);
    }
    EXPECT_NEAR(r.fit.beta.norm(), 1.0, 1e-10);
    EXPECT_FALSE(r.fit.has_intercept);
    EXPECT_EQ(r.fit.gamma.rows(), 3);
  }
}

TEST(SpqrFit, DirectionCloseToLogitFit) {
  double total = 0.0;
  const int seeds = 5;
  for (int rep = 0; rep < seeds; ++rep) {
    const Frame f = generator_frame(1000, static_cast<std::uint64_t>(rep));
    const ModelFit logit = iwls_fit(f.scores, f.y, Link(LinkKind::kLogit));
    const SpqrResult r = spqr_fit(f.scores, f.y, SpqrConfig{}, Link(LinkKind::kLogit));
    total += angle(r.fit.beta, logit.slopes());
  }
  EXPECT_LT(total / seeds, 0.15);
}

// Gamma-hat refers to slopes of unit norm, so it estimates |b|^2 Gamma-tilde
// over the slope block, b the known-link slopes.
TEST(SpqrFit, GammaHatNearKnownLinkGamma) {
  const Frame f = generator_frame(2000, 4);
  const ModelFit logit = iwls_fit(f.scores, f.y, Link(LinkKind::kLogit));
  const SpqrResult r = spqr_fit(f.scores, f.y, SpqrConfig{}, Link(LinkKind::kLogit));
  ASSERT_TRUE(r.fit.converged);
  const double s2 = logit.slopes().squaredNorm();
  const Eigen::MatrixXd ref = s2 * logit.gamma.bottomRightCorner(3, 3);
  for (Eigen::Index k = 0; k < 3; ++k)
    for (Eigen::Index l = 0; l < 3; ++l)
      EXPECT_NEAR(r.fit.gamma(k, l), ref(k, l), 0.1 * std::sqrt(ref(k, k) * ref(l, l))) << k << "," << l;
}

TEST(SpqrFit, Preconditions) {
  const Frame f = generator_frame(100, 0);
  EXPECT_EQ(kind_of([&] { spqr_fit(f.scores, Eigen::VectorXd::Ones(100), SpqrConfig{}, Link(LinkKind::kLogit)); }),
            ErrorKind::kPrecondition);
  SpqrConfig cfg;
  cfg.max_outer = 0;
  EXPECT_EQ(kind_of([&] { spqr_fit(f.scores, f.y, cfg, Link(LinkKind::kLogit)); }), ErrorKind::kConfig);
  const ModelFit logit = iwls_fit(f.scores, f.y, Link(LinkKind::kLogit));
  EXPECT_EQ(kind_of([&] { spqr_predict(f.scores, logit, logistic_estimate()); }), ErrorKind::kPrecondition);
}

TEST(SpqrFit, PredictUsesEstimatedLink) {
  const Frame f = generator_frame(300, 3);
  const SpqrResult r = spqr_fit(f.scores, f.y, SpqrConfig{}, Link(LinkKind::kLogit));
  const Eigen::VectorXd mu = spqr_predict(f.scores, r.fit, r.link);
  EXPECT_LT((mu - r.fit.mu).cwiseAbs().maxCoeff(), 1e-14);
}
