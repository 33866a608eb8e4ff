#pragma once

#include <cstddef>
#include <optional>

#include <Eigen/Dense>

#include "gflm/basis.hpp"
#include "gflm/glm.hpp"
#include "gflm/link.hpp"

namespace gflm {

double normal_cdf(double x);
double normal_quantile(double prob);

struct InferenceReport {
  double statistic = 0.0;
  double p_value = 1.0;  // 1 - Phi(statistic)
  int dof_terms = 0;     // q: number of coefficients in the quadratic form
  double alpha = 0.05;
  double critical_value = 0.0;
  bool reject = false;   // |T| > Phi^{-1}(1 - alpha)
  std::optional<Curve> band_lower;
  std::optional<Curve> band_upper;
  GammaSource gamma_used = GammaSource::kEmpiricalKnownLink;
};

/// T = (n d' Gamma d - q) / sqrt(2 q) with d = beta_hat - beta_0.
///
/// When include_intercept is false the first entry of both vectors and the
/// first row/column of gamma are dropped, so q = p; otherwise q = p + 1.
double test_statistic(const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& beta_0, const Eigen::MatrixXd& gamma,
                      std::size_t n, bool include_intercept);

/// Test of H0: all slopes vanish, using the fit's own Gamma.
InferenceReport no_effect_test(const ModelFit& fit, double alpha);

/// c(alpha) = [q + sqrt(2 q) Phi^{-1}(1 - alpha)] / n.
double band_constant(std::size_t q, std::size_t n, double alpha);

struct Band {
  Curve estimate;   // beta_hat(t)
  Curve lower;
  Curve upper;
  double c_alpha = 0.0;
};

/// beta_hat(t) +- sqrt(c(alpha) sum_k omega_k(t)^2 / lambda_k) from the
/// eigendecomposition (e_k, lambda_k) of the fit's Gamma, with
/// omega_k(t) = sum_l rho_l(t) e_kl and rho_0 = 1 when an intercept was fit.
/// Throws kConditioning if some lambda_k <= 1e-10.
Band simultaneous_band(const ModelFit& fit, const Basis& basis, double alpha);

/// An intercept plus a curve, e.g. (beta_0, beta(t)).
struct ParameterFunction {
  double intercept = 0.0;
  Curve curve;
};

/// Coefficients (intercept, <f, rho_1>, ..., <f, rho_p>) of a parameter function.
Eigen::VectorXd parameter_coefficients(const ParameterFunction& f, const Basis& basis, std::size_t p);

/// d^2_{G,p}(f, g) = c' Gamma c where c are the basis coefficients of f - g.
/// Without an intercept slot in gamma (p x p) the intercepts are ignored.
double dg_distance(const ParameterFunction& f, const ParameterFunction& g, const Basis& basis,
                   const Eigen::MatrixXd& gamma, bool gamma_has_intercept = true);

/// Same, with the plug-in Gamma-tilde recomputed from a known-link fit.
double dg_distance(const ParameterFunction& f, const ParameterFunction& g, const ScoreMatrix& scores,
                   const ModelFit& fit, const Link& link, const Basis& basis);

/// Plug-in kernel G(s, t) = (1/n) sum_i g'(eta_i)^2 / sigma^2(mu_i) X_i(s) X_i(t).
Eigen::MatrixXd generalized_covariance(const FunctionalDataset& ds, const Eigen::VectorXd& eta, const Link& link);

/// Sample cross-moments (1/n) sum_i eps^G_i eps^G_i' of the weighted scores
/// eps^G_ij = g'(eta_i) / sigma(mu_i) <X_i, rho_j>, rho_j from `g_basis`.
Eigen::MatrixXd eigen_score_diagnostic(const FunctionalDataset& ds, const Eigen::VectorXd& eta, const Link& link,
                                       const Basis& g_basis);

}  // namespace gflm
