#pragma once

#include <cstddef>
#include <string_view>

#include <Eigen/Dense>

#include "gflm/basis.hpp"
#include "gflm/link.hpp"

namespace gflm {

struct SolverConfig {
  double tol = 1e-8;        // on max |beta change| and on max |U(beta)|
  int max_iter = 100;
  double clamp_eps = 1e-10;
  int max_halvings = 20;
  double separation_norm = 1e4;
};

/// Which matrix stands in for Gamma in a fit or a test.
enum class GammaSource { kPopulation, kEmpiricalKnownLink, kEmpiricalSpqr };

std::string_view to_string(GammaSource source);

/// Result of a quasi-likelihood fit of the p-truncated model.
///
/// With an intercept, beta = (beta_0, beta_1..beta_p) and gamma is
/// (p+1) x (p+1). Semiparametric fits carry no intercept (the location is
/// absorbed by the estimated link): beta = (beta_1..beta_p) with unit norm and
/// gamma is p x p.
struct ModelFit {
  Eigen::VectorXd beta;
  bool has_intercept = true;
  Eigen::MatrixXd gamma;
  GammaSource gamma_source = GammaSource::kEmpiricalKnownLink;
  Eigen::VectorXd eta;
  Eigen::VectorXd mu;
  bool converged = false;
  int iterations = 0;
  double deviance = 0.0;
  double score_norm = 0.0;  // max |U(beta)| at the returned beta

  std::size_t n() const { return static_cast<std::size_t>(eta.size()); }
  std::size_t p() const { return static_cast<std::size_t>(beta.size()) - (has_intercept ? 1 : 0); }
  /// (beta_0, beta_1..beta_p); beta_0 is 0 when no intercept was fit.
  Eigen::VectorXd full_coefficients() const;
  Eigen::VectorXd slopes() const { return beta.tail(static_cast<Eigen::Index>(p())); }
};

/// Quasi-score U(beta) = sum_i (Y_i - mu_i) g'(eta_i) eps_i / sigma^2(mu_i).
Eigen::VectorXd score_vector(const Eigen::VectorXd& beta, const ScoreMatrix& scores, const Eigen::VectorXd& y,
                             const Link& link);

/// Solves U(beta) = 0 by iterated weighted least squares (Fisher scoring).
///
/// Starts from beta = 0 with intercept g^{-1}(ybar); each full step is halved
/// (up to max_halvings times) while the deviance increases. Converged means
/// max |beta change| <= tol and max |U| <= tol. Reaching max_iter returns the
/// last iterate with converged = false.
///
/// Throws kRankDeficient for singular weighted normal equations and
/// kSeparation when a binary fit diverges (||beta|| > separation_norm or
/// a perfectly saturated fit that never converges).
ModelFit iwls_fit(const ScoreMatrix& scores, const Eigen::VectorXd& y, const Link& link,
                  const SolverConfig& cfg = {});

/// (1/n) sum_i g'(eta_i)^2 / sigma^2(mu_i) eps_i eps_i^T at the fitted predictors.
Eigen::MatrixXd gamma_population_estimate(const ScoreMatrix& scores, const ModelFit& fit, const Link& link);

/// Weighted Gram matrix (1/n) sum_i w_i x_i x_i^T, symmetric by construction.
Eigen::MatrixXd weighted_gram(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::VectorXd& w);

}  // namespace gflm
