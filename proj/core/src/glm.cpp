#include "gflm/glm.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gflm/error.hpp"

namespace gflm {

std::string_view to_string(GammaSource source) {
  switch (source) {
    case GammaSource::kPopulation: return "population";
    case GammaSource::kEmpiricalKnownLink: return "empirical_known_link";
    case GammaSource::kEmpiricalSpqr: return "empirical_spqr";
  }
  return "empirical_known_link";
}

Eigen::VectorXd ModelFit::full_coefficients() const {
  if (has_intercept) return beta;
  Eigen::VectorXd full(beta.size() + 1);
  full[0] = 0.0;
  full.tail(beta.size()) = beta;
  return full;
}

Eigen::MatrixXd weighted_gram(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::VectorXd& w) {
  const Eigen::Index q = x.cols();
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(q, q);
  const Eigen::MatrixXd xw = w.cwiseSqrt().asDiagonal() * x;
  g.selfadjointView<Eigen::Lower>().rankUpdate(xw.transpose(), 1.0 / static_cast<double>(x.rows()));
  g.triangularView<Eigen::StrictlyUpper>() = g.transpose();
  return g;
}

namespace {

struct Evaluation {
  Eigen::VectorXd eta;
  Eigen::VectorXd mu;
  Eigen::VectorXd deriv;
  Eigen::VectorXd var;
  double deviance = 0.0;
};

[[noreturn]] void non_finite(std::string_view what, Eigen::Index row) {
  std::ostringstream os;
  os << "non-finite " << what << " at row " << row;
  fail(ErrorKind::kNumeric, os.str());
}

Evaluation evaluate(const Eigen::VectorXd& beta, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                    const Link& link) {
  Evaluation e;
  e.eta = x * beta;
  const Eigen::Index n = x.rows();
  e.mu.resize(n);
  e.deriv.resize(n);
  e.var.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double eta = e.eta[i];
    if (!std::isfinite(eta)) non_finite("linear predictor", i);
    e.mu[i] = link.mean(eta);
    e.deriv[i] = link.mean_deriv(eta);
    e.var[i] = link.variance(e.mu[i]);
    if (!std::isfinite(e.mu[i])) non_finite("mean", i);
    if (!std::isfinite(e.deriv[i])) non_finite("link derivative", i);
    if (!(e.var[i] > 0.0) || !std::isfinite(e.var[i])) non_finite("variance", i);
    e.deviance += link.unit_deviance(y[i], e.mu[i]);
  }
  return e;
}

Eigen::VectorXd score_from(const Evaluation& e, const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  const Eigen::VectorXd r = ((y - e.mu).array() * e.deriv.array() / e.var.array()).matrix();
  return x.transpose() * r;
}

bool is_binary_link(const Link& link) {
  return link.kind() == LinkKind::kLogit || link.kind() == LinkKind::kCloglog;
}

}  // namespace

Eigen::VectorXd score_vector(const Eigen::VectorXd& beta, const ScoreMatrix& scores, const Eigen::VectorXd& y,
                             const Link& link) {
  const Eigen::MatrixXd& x = scores.matrix();
  if (beta.size() != x.cols()) fail(ErrorKind::kAlignment, "coefficient length does not match score columns");
  if (y.size() != x.rows()) fail(ErrorKind::kAlignment, "response length does not match score rows");
  return score_from(evaluate(beta, x, y, link), x, y);
}

ModelFit iwls_fit(const ScoreMatrix& scores, const Eigen::VectorXd& y, const Link& link, const SolverConfig& cfg) {
  const Eigen::MatrixXd& x = scores.matrix();
  const Eigen::Index n = x.rows();
  const Eigen::Index q = x.cols();
  if (y.size() != n) fail(ErrorKind::kAlignment, "response length does not match score rows");
  if (n <= q) {
    std::ostringstream os;
    os << "need n > p + 1 observations, got n = " << n << " for p = " << q - 1;
    fail(ErrorKind::kPrecondition, os.str());
  }
  for (Eigen::Index k = 1; k < q; ++k) {
    if (x.col(k).cwiseAbs().maxCoeff() == 0.0) {
      std::ostringstream os;
      os << "score column " << k << " is identically zero";
      fail(ErrorKind::kRankDeficient, os.str());
    }
  }

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(q);
  beta[0] = link.inverse(y.mean());
  Evaluation cur = evaluate(beta, x, y, link);

  ModelFit fit;
  fit.has_intercept = true;
  int iter = 0;
  bool converged = false;
  Eigen::VectorXd u = score_from(cur, x, y);
  while (iter < cfg.max_iter) {
    ++iter;
    const Eigen::VectorXd w = (cur.deriv.array().square() / cur.var.array()).matrix();
    const Eigen::MatrixXd xw = w.cwiseSqrt().asDiagonal() * x;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xw);
    if (qr.rank() < q) {
      std::ostringstream os;
      os << "weighted normal equations are singular (rank " << qr.rank() << " < " << q << ") at iteration " << iter;
      fail(is_binary_link(link) && beta.norm() > 10.0 ? ErrorKind::kSeparation : ErrorKind::kRankDeficient,
           os.str());
    }
    // Working residual scaled so that the LS solution is the Fisher step.
    Eigen::VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      z[i] = w[i] > 0.0 ? (y[i] - cur.mu[i]) * cur.deriv[i] / cur.var[i] / std::sqrt(w[i]) : 0.0;
    }
    const Eigen::VectorXd step = qr.solve(z);

    double t = 1.0;
    Eigen::VectorXd next = beta + step;
    Evaluation cand = evaluate(next, x, y, link);
    const double slack = 1e-12 * (1.0 + std::abs(cur.deviance));
    for (int h = 0; h < cfg.max_halvings && cand.deviance > cur.deviance + slack; ++h) {
      t *= 0.5;
      next = beta + t * step;
      cand = evaluate(next, x, y, link);
    }
    const double change = (next - beta).cwiseAbs().maxCoeff();
    beta = next;
    cur = std::move(cand);
    u = score_from(cur, x, y);

    if (is_binary_link(link) && beta.norm() > cfg.separation_norm) {
      std::ostringstream os;
      os << "coefficients diverge (norm " << beta.norm() << "): complete separation";
      fail(ErrorKind::kSeparation, os.str());
    }
    if (change <= cfg.tol && u.cwiseAbs().maxCoeff() <= cfg.tol) {
      converged = true;
      break;
    }
  }

  if (!converged && is_binary_link(link) && (y - cur.mu).cwiseAbs().maxCoeff() < 1e-6) {
    fail(ErrorKind::kSeparation, "fitted means saturate at the responses without convergence: complete separation");
  }

  fit.beta = beta;
  fit.eta = cur.eta;
  fit.mu = cur.mu;
  fit.converged = converged;
  fit.iterations = iter;
  fit.deviance = cur.deviance;
  fit.score_norm = u.cwiseAbs().maxCoeff();
  fit.gamma = gamma_population_estimate(scores, fit, link);
  fit.gamma_source = GammaSource::kEmpiricalKnownLink;
  return fit;
}

Eigen::MatrixXd gamma_population_estimate(const ScoreMatrix& scores, const ModelFit& fit, const Link& link) {
  const Eigen::MatrixXd& x = scores.matrix();
  if (fit.eta.size() != x.rows()) fail(ErrorKind::kAlignment, "fit and score matrix disagree on n");
  Eigen::VectorXd w(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double eta = fit.eta[i];
    const double d = link.mean_deriv(eta);
    const double v = link.variance(link.mean(eta));
    w[i] = d * d / v;
    if (!std::isfinite(w[i])) non_finite("weight", i);
  }
  if (fit.has_intercept) return weighted_gram(x, w);
  return weighted_gram(x.rightCols(x.cols() - 1), w);
}

}  // namespace gflm
