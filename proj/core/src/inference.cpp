#include "gflm/inference.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/distributions/normal.hpp>

#include "gflm/error.hpp"

namespace gflm {

double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

double normal_quantile(double prob) {
  if (!(prob > 0.0 && prob < 1.0)) fail(ErrorKind::kInvalidInput, "normal quantile needs a probability in (0, 1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), prob);
}

namespace {

void check_gamma(const Eigen::MatrixXd& gamma) {
  if (gamma.rows() != gamma.cols()) fail(ErrorKind::kAlignment, "Gamma must be square");
  if (!gamma.allFinite()) fail(ErrorKind::kInvalidInput, "Gamma contains non-finite values");
  if ((gamma - gamma.transpose()).cwiseAbs().maxCoeff() > 1e-8 * std::max(1.0, gamma.cwiseAbs().maxCoeff()))
    fail(ErrorKind::kInvalidInput, "Gamma is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gamma, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-8) {
    std::ostringstream os;
    os << "Gamma is not positive semidefinite (eigenvalue " << es.eigenvalues().minCoeff() << ")";
    fail(ErrorKind::kInvalidInput, os.str());
  }
}

}  // namespace

double test_statistic(const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& beta_0, const Eigen::MatrixXd& gamma,
                      std::size_t n, bool include_intercept) {
  if (beta_hat.size() != beta_0.size() || gamma.rows() != beta_hat.size())
    fail(ErrorKind::kAlignment, "coefficient vectors and Gamma disagree in dimension");
  if (n < 1) fail(ErrorKind::kInvalidInput, "sample size must be positive");
  check_gamma(gamma);
  const Eigen::Index skip = include_intercept ? 0 : 1;
  const Eigen::Index q = beta_hat.size() - skip;
  if (q < 1) fail(ErrorKind::kAlignment, "no coefficients left in the quadratic form");
  const Eigen::VectorXd d = (beta_hat - beta_0).tail(q);
  const double form = d.dot(gamma.bottomRightCorner(q, q) * d);
  const auto qd = static_cast<double>(q);
  return (static_cast<double>(n) * form - qd) / std::sqrt(2.0 * qd);
}

InferenceReport no_effect_test(const ModelFit& fit, double alpha) {
  if (!fit.converged) fail(ErrorKind::kPrecondition, "no-effect test needs a converged fit");
  if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorKind::kConfig, "alpha must lie in (0, 1)");
  InferenceReport r;
  const Eigen::VectorXd null_beta = Eigen::VectorXd::Zero(fit.beta.size());
  // The intercept slot is excluded; a slope-only fit has none to drop.
  r.statistic = test_statistic(fit.beta, null_beta, fit.gamma, fit.n(), !fit.has_intercept);
  r.dof_terms = static_cast<int>(fit.p());
  r.p_value = 1.0 - normal_cdf(r.statistic);
  r.alpha = alpha;
  r.critical_value = normal_quantile(1.0 - alpha);
  r.reject = std::abs(r.statistic) > r.critical_value;
  r.gamma_used = fit.gamma_source;
  return r;
}

double band_constant(std::size_t q, std::size_t n, double alpha) {
  if (n < 1 || q < 1) fail(ErrorKind::kInvalidInput, "band constant needs positive q and n");
  if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorKind::kConfig, "alpha must lie in (0, 1)");
  const auto qd = static_cast<double>(q);
  return (qd + std::sqrt(2.0 * qd) * normal_quantile(1.0 - alpha)) / static_cast<double>(n);
}

Band simultaneous_band(const ModelFit& fit, const Basis& basis, double alpha) {
  const std::size_t p = fit.p();
  if (p > basis.size()) fail(ErrorKind::kRange, "fit order exceeds basis size");
  check_gamma(fit.gamma);
  const auto q = static_cast<Eigen::Index>(fit.beta.size());
  const auto m = static_cast<Eigen::Index>(basis.grid().size());

  // Rows: grid points; columns: the functions multiplying each coefficient.
  Eigen::MatrixXd design(m, q);
  Eigen::Index col = 0;
  if (fit.has_intercept) design.col(col++).setOnes();
  design.rightCols(static_cast<Eigen::Index>(p)) = basis.functions().leftCols(static_cast<Eigen::Index>(p));

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(fit.gamma);
  const Eigen::VectorXd& lambda = es.eigenvalues();
  for (Eigen::Index k = 0; k < q; ++k) {
    if (!(lambda[k] > 1e-10)) {
      std::ostringstream os;
      os << "Gamma is near-singular: eigenvalue " << lambda[k];
      fail(ErrorKind::kConditioning, os.str());
    }
  }
  const Eigen::MatrixXd omega = design * es.eigenvectors();  // omega_k(t) in column k
  const Eigen::VectorXd spread = omega.array().square().matrix() * lambda.cwiseInverse();

  Band band{Curve(design * fit.beta), Curve::zeros(static_cast<std::size_t>(m)),
            Curve::zeros(static_cast<std::size_t>(m)), band_constant(static_cast<std::size_t>(q), fit.n(), alpha)};
  const Eigen::VectorXd half = (band.c_alpha * spread.array()).sqrt().matrix();
  band.lower = Curve(band.estimate.values() - half);
  band.upper = Curve(band.estimate.values() + half);
  return band;
}

Eigen::VectorXd parameter_coefficients(const ParameterFunction& f, const Basis& basis, std::size_t p) {
  if (p > basis.size()) fail(ErrorKind::kRange, "order exceeds basis size");
  if (f.curve.size() != basis.grid().size()) fail(ErrorKind::kAlignment, "curve does not match basis grid");
  Eigen::VectorXd c(static_cast<Eigen::Index>(p + 1));
  c[0] = f.intercept;
  const Eigen::VectorXd q = quadrature_weights(basis.grid(), basis.weight());
  if (p > 0)
    c.tail(static_cast<Eigen::Index>(p)) =
        basis.functions().leftCols(static_cast<Eigen::Index>(p)).transpose() * q.cwiseProduct(f.curve.values());
  return c;
}

double dg_distance(const ParameterFunction& f, const ParameterFunction& g, const Basis& basis,
                   const Eigen::MatrixXd& gamma, bool gamma_has_intercept) {
  check_gamma(gamma);
  const Eigen::Index dim = gamma.rows();
  const Eigen::Index p = gamma_has_intercept ? dim - 1 : dim;
  if (p < 0) fail(ErrorKind::kAlignment, "Gamma is empty");
  const ParameterFunction diff{f.intercept - g.intercept, Curve(f.curve.values() - g.curve.values())};
  const Eigen::VectorXd c = parameter_coefficients(diff, basis, static_cast<std::size_t>(p));
  const Eigen::VectorXd d = c.tail(dim);
  return d.dot(gamma * d);
}

double dg_distance(const ParameterFunction& f, const ParameterFunction& g, const ScoreMatrix& scores,
                   const ModelFit& fit, const Link& link, const Basis& basis) {
  if (!fit.has_intercept) fail(ErrorKind::kPrecondition, "known-link plug-in Gamma needs an intercept fit");
  const Eigen::MatrixXd gamma = gamma_population_estimate(scores.truncated(fit.p()), fit, link);
  const ParameterFunction diff{f.intercept - g.intercept, Curve(f.curve.values() - g.curve.values())};
  const Eigen::VectorXd c = parameter_coefficients(diff, basis, fit.p());
  return c.dot(gamma * c);
}

Eigen::MatrixXd generalized_covariance(const FunctionalDataset& ds, const Eigen::VectorXd& eta, const Link& link) {
  if (static_cast<std::size_t>(eta.size()) != ds.n()) fail(ErrorKind::kAlignment, "predictor length differs from n");
  Eigen::VectorXd w(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    const double d = link.mean_deriv(eta[i]);
    w[i] = d * d / link.variance(link.mean(eta[i]));
  }
  return weighted_gram(ds.curves(), w);
}

Eigen::MatrixXd eigen_score_diagnostic(const FunctionalDataset& ds, const Eigen::VectorXd& eta, const Link& link,
                                       const Basis& g_basis) {
  if (static_cast<std::size_t>(eta.size()) != ds.n()) fail(ErrorKind::kAlignment, "predictor length differs from n");
  const ScoreMatrix raw = project_scores(ds, g_basis, g_basis.size());
  Eigen::VectorXd w(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    const double d = link.mean_deriv(eta[i]);
    w[i] = d * d / link.variance(link.mean(eta[i]));
  }
  return weighted_gram(raw.slopes(), w);
}

}  // namespace gflm
