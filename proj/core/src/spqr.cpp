#include "gflm/spqr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "gflm/error.hpp"

namespace gflm {

namespace {

// Linear interpolation on an increasing grid with flat extrapolation.
double interp_flat(const Eigen::VectorXd& grid, const Eigen::VectorXd& values, double x) {
  const Eigen::Index m = grid.size();
  if (x <= grid[0]) return values[0];
  if (x >= grid[m - 1]) return values[m - 1];
  const auto* it = std::upper_bound(grid.data(), grid.data() + m, x);
  const auto hi = static_cast<Eigen::Index>(it - grid.data());
  const auto lo = hi - 1;
  const double frac = (x - grid[lo]) / (grid[hi] - grid[lo]);
  return values[lo] + frac * (values[hi] - values[lo]);
}

Eigen::VectorXd linspace(double a, double b, std::size_t m) {
  return Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(m), a, b);
}

double sample_variance(const Eigen::VectorXd& v) {
  if (v.size() < 2) return 0.0;
  const double mean = v.mean();
  return (v.array() - mean).square().sum() / static_cast<double>(v.size() - 1);
}

// Cumulative trapezoid integral on the grid.
Eigen::VectorXd cumulative(const Eigen::VectorXd& grid, const Eigen::VectorXd& f) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(grid.size());
  for (Eigen::Index k = 1; k < grid.size(); ++k) c[k] = c[k - 1] + 0.5 * (f[k] + f[k - 1]) * (grid[k] - grid[k - 1]);
  return c;
}

}  // namespace

double LinkEstimate::g(double eta) const { return interp_flat(eval_grid, g_hat, eta); }
double LinkEstimate::g_prime(double eta) const { return interp_flat(eval_grid, g_prime_hat, eta); }
double LinkEstimate::sigma2(double eta) const { return interp_flat(eval_grid, sigma2_hat, eta); }

double LinkEstimate::inverse(double mu) const {
  const Eigen::Index m = eval_grid.size();
  if (mu <= g_hat[0]) return eval_grid[0];
  if (mu >= g_hat[m - 1]) return eval_grid[m - 1];
  for (Eigen::Index k = 1; k < m; ++k) {
    if (g_hat[k] >= mu) {
      const double span = g_hat[k] - g_hat[k - 1];
      if (span <= 0.0) return eval_grid[k];
      return eval_grid[k - 1] + (mu - g_hat[k - 1]) / span * (eval_grid[k] - eval_grid[k - 1]);
    }
  }
  return eval_grid[m - 1];
}

LinkEstimate estimate_link(const Eigen::VectorXd& eta, const Eigen::VectorXd& y, const SpqrConfig& cfg,
                           double bandwidth) {
  if (eta.size() != y.size()) fail(ErrorKind::kAlignment, "predictor and response lengths differ");
  if (cfg.grid_points < 2) fail(ErrorKind::kConfig, "link grid needs at least two points");
  if (!(cfg.derivative_bandwidth_scale > 0.0)) fail(ErrorKind::kConfig, "derivative bandwidth scale must be positive");
  const double lo = eta.minCoeff();
  const double hi = eta.maxCoeff();
  if (!(hi > lo)) fail(ErrorKind::kDegenerateLink, "linear predictor has zero range");

  LinkEstimate est;
  est.bandwidth = bandwidth;
  est.eval_grid = linspace(lo, hi, cfg.grid_points);

  SmootherConfig sm = cfg.smoother;
  sm.bandwidth = bandwidth;
  const Eigen::VectorXd g_raw = local_poly_smooth(eta, y, est.eval_grid, sm, 0);
  // A mean outside the observed response range is never plausible (binary: [0, 1]).
  est.g_hat = pool_adjacent_violators(g_raw, Eigen::VectorXd::Ones(g_raw.size()))
                  .cwiseMax(y.minCoeff())
                  .cwiseMin(y.maxCoeff());
  const double range = est.g_hat.maxCoeff() - est.g_hat.minCoeff();
  if (!(range > 1e-10 * std::max(1.0, est.g_hat.cwiseAbs().maxCoeff())))
    fail(ErrorKind::kDegenerateLink, "estimated link collapsed to a constant after monotonization");
  // Slope of the monotone link itself, so g' vanishes wherever g_hat is flat.
  SmootherConfig sd = sm;
  sd.bandwidth = bandwidth * cfg.derivative_bandwidth_scale;
  est.derivative_bandwidth = sd.bandwidth;
  est.g_prime_hat = local_poly_smooth(est.eval_grid, est.g_hat, est.eval_grid, sd, 1).cwiseMax(cfg.derivative_floor);

  Eigen::VectorXd mu(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) mu[i] = est.g(eta[i]);
  const Eigen::VectorXd resid2 = (y - mu).array().square().matrix();
  est.variance_floor = std::max(1e-8, cfg.variance_floor_fraction * sample_variance(y));

  Eigen::VectorXd s2;
  bool smoothed = false;
  if (sample_variance(mu) > 0.0) {
    try {
      SmootherConfig smu = cfg.smoother;
      smu.bandwidth = rule_of_thumb_bandwidth(mu);
      s2 = local_poly_smooth(mu, resid2, est.g_hat, smu, 0);
      smoothed = true;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kSmoothing && e.kind() != ErrorKind::kConfig) throw;
    }
  }
  if (!smoothed) {
    s2 = local_poly_smooth(eta, resid2, est.eval_grid, sm, 0);
    est.variance_on_eta = true;
  }
  est.sigma2_hat = s2.cwiseMax(est.variance_floor);
  return est;
}

Eigen::MatrixXd gamma_hat(const ScoreMatrix& scores, const Eigen::VectorXd& eta_hat, const LinkEstimate& est,
                          int* floored) {
  const Eigen::MatrixXd& x = scores.matrix();
  if (eta_hat.size() != x.rows()) fail(ErrorKind::kAlignment, "predictor length does not match score rows");
  Eigen::VectorXd w(x.rows());
  int count = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double v = est.sigma2(eta_hat[i]);
    if (v < est.variance_floor || !(v > 0.0)) {
      v = std::max(est.variance_floor, std::numeric_limits<double>::min());
      ++count;
    }
    const double d = est.g_prime(eta_hat[i]);
    w[i] = d * d / v;
  }
  if (floored) *floored = count;
  return weighted_gram(x.rightCols(x.cols() - 1), w);
}

double quasi_deviance(const Eigen::VectorXd& y, const Eigen::VectorXd& eta, const LinkEstimate& est) {
  if (y.size() != eta.size()) fail(ErrorKind::kAlignment, "response and predictor lengths differ");
  const Eigen::VectorXd& s = est.eval_grid;
  const Eigen::VectorXd a = (est.g_prime_hat.array() / est.sigma2_hat.array()).matrix();
  const Eigen::VectorXd b = (est.g_hat.array() * a.array()).matrix();
  const Eigen::VectorXd ca = cumulative(s, a);
  const Eigen::VectorXd cb = cumulative(s, b);
  double total = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double from = std::clamp(eta[i], s[0], s[s.size() - 1]);
    const double to = est.inverse(y[i]);
    const double part = y[i] * (interp_flat(s, ca, to) - interp_flat(s, ca, from)) -
                        (interp_flat(s, cb, to) - interp_flat(s, cb, from));
    total += 2.0 * part;
  }
  return total;
}

Eigen::VectorXd spqr_predict(const ScoreMatrix& scores, const ModelFit& fit, const LinkEstimate& est) {
  if (fit.has_intercept) fail(ErrorKind::kPrecondition, "semiparametric prediction expects a slope-only fit");
  if (scores.p() < fit.p()) fail(ErrorKind::kAlignment, "score matrix has fewer columns than the fit");
  const Eigen::VectorXd eta = scores.slopes().leftCols(static_cast<Eigen::Index>(fit.p())) * fit.beta;
  Eigen::VectorXd out(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) out[i] = est.g(eta[i]);
  return out;
}

SpqrResult spqr_fit(const ScoreMatrix& scores, const Eigen::VectorXd& y, const SpqrConfig& cfg,
                    const Link& init_link) {
  if (y.size() != static_cast<Eigen::Index>(scores.n()))
    fail(ErrorKind::kAlignment, "response length does not match score rows");
  if (y.maxCoeff() == y.minCoeff()) fail(ErrorKind::kPrecondition, "responses are all equal");
  if (cfg.max_outer < 1) fail(ErrorKind::kConfig, "outer iteration cap must be positive");

  const Eigen::MatrixXd x = scores.slopes();

  const ModelFit init = iwls_fit(scores, y, init_link, cfg.solver);
  Eigen::VectorXd beta = init.slopes();
  if (!(beta.norm() > 0.0)) fail(ErrorKind::kDegenerateLink, "parametric initialization has zero slopes");
  beta /= beta.norm();

  // Chosen once at the starting direction; a bandwidth that moves with beta keeps the iteration from settling.
  const double h = cfg.smoother.bandwidth > 0.0 ? cfg.smoother.bandwidth : rule_of_thumb_bandwidth(x * beta);

  SpqrResult res;
  bool converged = false;
  Eigen::VectorXd best = beta;
  double best_change = std::numeric_limits<double>::infinity();
  int outer = 0;
  double relax = 1.0;
  double prev_change = std::numeric_limits<double>::infinity();
  while (outer < cfg.max_outer) {
    ++outer;
    const Eigen::VectorXd eta = x * beta;
    const LinkEstimate est = estimate_link(eta, y, cfg, h);
    if (est.variance_on_eta) ++res.variance_fallbacks;

    Eigen::VectorXd next = beta;
    for (int step = 0; step < cfg.inner_steps; ++step) {
      const Eigen::VectorXd e = x * next;
      Eigen::VectorXd r(e.size());
      Eigen::VectorXd w(e.size());
      for (Eigen::Index i = 0; i < e.size(); ++i) {
        const double g = est.g(e[i]);
        const double d = est.g_prime(e[i]);
        const double v = std::max(est.sigma2(e[i]), est.variance_floor);
        r[i] = (y[i] - g) * d / v;
        w[i] = d * d / v;
      }
      const Eigen::VectorXd u = x.transpose() * r;
      const Eigen::MatrixXd info = weighted_gram(x, w) * static_cast<double>(x.rows());
      Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
      if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
        fail(ErrorKind::kRankDeficient, "semiparametric information matrix is singular");
      const Eigen::VectorXd delta = ldlt.solve(u);
      if (!delta.allFinite()) fail(ErrorKind::kNumeric, "non-finite semiparametric score step");
      next += delta;
    }
    const double norm = next.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) fail(ErrorKind::kNumeric, "semiparametric update has zero norm");
    next /= norm;
    if (next.dot(beta) < 0.0) next = -next;

    // Convergence is judged on the full step; relaxation only tames two-cycles.
    const double change = (next - beta).cwiseAbs().maxCoeff();
    if (change > prev_change) relax = std::max(0.125, 0.5 * relax);
    prev_change = change;
    if (relax < 1.0 && change > cfg.tol) {
      next = beta + relax * (next - beta);
      next /= next.norm();
    }
    beta = next;
    const Eigen::Index gm = est.g_hat.size();
    const bool monotone = (est.g_hat.tail(gm - 1) - est.g_hat.head(gm - 1)).minCoeff() >= 0.0;
    res.trace.push_back({beta, change, h, monotone});
    if (change < best_change) {
      best_change = change;
      best = beta;
    }
    if (change <= cfg.tol) {
      converged = true;
      break;
    }
  }
  if (!converged) beta = best;

  const Eigen::VectorXd eta = x * beta;
  res.link = estimate_link(eta, y, cfg, h);
  if (res.link.variance_on_eta) ++res.variance_fallbacks;

  ModelFit& fit = res.fit;
  fit.beta = beta;
  fit.has_intercept = false;
  fit.eta = eta;
  fit.mu.resize(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) fit.mu[i] = res.link.g(eta[i]);
  fit.converged = converged;
  fit.iterations = outer;
  fit.score_norm = converged ? res.trace.back().change : best_change;
  fit.gamma = gamma_hat(scores, eta, res.link, &res.floored_variances);
  fit.gamma_source = GammaSource::kEmpiricalSpqr;
  fit.deviance = quasi_deviance(y, eta, res.link);
  return res;
}

}  // namespace gflm
