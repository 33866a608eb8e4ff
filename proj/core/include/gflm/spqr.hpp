#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "gflm/basis.hpp"
#include "gflm/glm.hpp"
#include "gflm/link.hpp"
#include "gflm/smoothing.hpp"

namespace gflm {

/// Nonparametric link, link derivative and variance, tabulated on an
/// equispaced grid over the range of the linear predictor.
///
/// Lookups interpolate linearly and extrapolate flat beyond the grid ends.
/// sigma2_hat is stored against the linear predictor: sigma2_hat[k] is the
/// smoothed variance at mean g_hat[k].
struct LinkEstimate {
  Eigen::VectorXd eval_grid;
  Eigen::VectorXd g_hat;
  Eigen::VectorXd g_prime_hat;
  Eigen::VectorXd sigma2_hat;
  double bandwidth = 0.0;
  double derivative_bandwidth = 0.0;
  double variance_floor = 0.0;
  bool variance_on_eta = false;  // squared residuals smoothed against eta (ties in the fitted means)

  double g(double eta) const;
  double g_prime(double eta) const;
  double sigma2(double eta) const;
  /// Smallest eta on the grid with g(eta) = mu; clipped to the grid ends.
  double inverse(double mu) const;
};

struct SpqrConfig {
  SmootherConfig smoother;       // bandwidth <= 0: 1.2 sd(eta) n^{-1/5} at the starting direction
  int max_outer = 25;
  double tol = 1e-5;             // on max |change| of the normalized coefficients
  int inner_steps = 1;           // Fisher scoring steps per outer step
  std::size_t grid_points = 201;
  double derivative_floor = 1e-6;
  double derivative_bandwidth_scale = 2.0;  // g' smooths g_hat with h times this
  double variance_floor_fraction = 0.05;     // floor = max(1e-8, fraction * var(y))
  SolverConfig solver;           // for the parametric initialization
};

struct SpqrIteration {
  Eigen::VectorXd beta;  // normalized slopes after this outer step
  double change = 0.0;
  double bandwidth = 0.0;
  bool link_monotone = false;
};

struct SpqrResult {
  ModelFit fit;
  LinkEstimate link;
  std::vector<SpqrIteration> trace;
  int variance_fallbacks = 0;
  int floored_variances = 0;
};

/// Estimates link and variance by local polynomial smoothing for fixed
/// linear predictors (slopes normalized to unit length, no intercept).
LinkEstimate estimate_link(const Eigen::VectorXd& eta, const Eigen::VectorXd& y, const SpqrConfig& cfg,
                           double bandwidth);

/// Semiparametric quasi-likelihood fit alternating link/variance smoothing
/// with quasi-score updates under ||beta|| = 1.
///
/// `init_link` supplies the parametric starting direction. The returned fit
/// has has_intercept = false, gamma = Gamma-hat and deviance = quasi-deviance.
SpqrResult spqr_fit(const ScoreMatrix& scores, const Eigen::VectorXd& y, const SpqrConfig& cfg,
                    const Link& init_link);

/// Gamma-hat: (1/n) sum_i g'^2(eta_i) / sigma^2(eta_i) eps_i eps_i^T over the slope columns.
/// Variances below the floor are raised to it; `floored` receives the count.
Eigen::MatrixXd gamma_hat(const ScoreMatrix& scores, const Eigen::VectorXd& eta_hat, const LinkEstimate& est,
                          int* floored = nullptr);

/// Quasi-deviance 2 sum_i integral_{eta_i}^{g^{-1}(y_i)} (y_i - g(s)) g'(s) / sigma^2(s) ds
/// by the trapezoid rule on the link grid.
double quasi_deviance(const Eigen::VectorXd& y, const Eigen::VectorXd& eta, const LinkEstimate& est);

/// Slope-only prediction g_hat(x^T beta) for rows of a score matrix.
Eigen::VectorXd spqr_predict(const ScoreMatrix& scores, const ModelFit& fit, const LinkEstimate& est);

}  // namespace gflm
