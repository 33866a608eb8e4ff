#include "gflm/model_select.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "gflm/error.hpp"
#include "gflm/parallel.hpp"

namespace gflm {

std::string method_name(const FitMethod& method) {
  if (const auto* known = std::get_if<KnownLinkMethod>(&method)) return std::string(known->link.name());
  return "spqr";
}

FittedModel fit_model(const ScoreMatrix& scores, const Eigen::VectorXd& y, const FitMethod& method) {
  FittedModel out;
  if (const auto* known = std::get_if<KnownLinkMethod>(&method)) {
    out.fit = iwls_fit(scores, y, known->link, known->solver);
    out.fit.deviance = deviance(out.fit, y, known->link);
    return out;
  }
  const auto& spqr = std::get<SpqrMethod>(method);
  SpqrResult res = spqr_fit(scores, y, spqr.config, spqr.init_link);
  out.fit = std::move(res.fit);
  out.link_estimate = std::move(res.link);
  out.floored_variances = res.floored_variances;
  out.variance_fallbacks = res.variance_fallbacks;
  return out;
}

Eigen::VectorXd predict_mean(const FittedModel& model, const ScoreMatrix& scores, const FitMethod& method) {
  const ModelFit& fit = model.fit;
  if (scores.p() < fit.p()) fail(ErrorKind::kAlignment, "score matrix has fewer columns than the fit");
  if (const auto* known = std::get_if<KnownLinkMethod>(&method)) {
    const Eigen::VectorXd eta = scores.matrix().leftCols(fit.beta.size()) * fit.beta;
    Eigen::VectorXd mu(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) mu[i] = known->link.mean(eta[i]);
    return mu;
  }
  if (!model.link_estimate) fail(ErrorKind::kPrecondition, "semiparametric model lacks a link estimate");
  return spqr_predict(scores, fit, *model.link_estimate);
}

double deviance(const ModelFit& fit, const Eigen::VectorXd& y, const Link& link) {
  if (y.size() != fit.eta.size()) fail(ErrorKind::kAlignment, "response length differs from fit");
  double total = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double mu = link.mean(fit.eta[i]);
    // Saturated model: mean y_i, clipped into the range of g.
    total += link.unit_deviance(y[i], mu) - link.unit_deviance(y[i], link.clamp_mean(y[i]));
  }
  return total;
}

double deviance(const ModelFit& fit, const Eigen::VectorXd& y, const LinkEstimate& est) {
  return quasi_deviance(y, fit.eta, est);
}

std::string_view to_string(Criterion c) { return c == Criterion::kAic ? "aic" : "bic"; }

Criterion parse_criterion(std::string_view name) {
  if (name == "aic") return Criterion::kAic;
  if (name == "bic") return Criterion::kBic;
  fail(ErrorKind::kConfig, "unknown criterion '" + std::string(name) + "'");
}

double penalty(Criterion c, std::size_t p, std::size_t n) {
  const auto pd = static_cast<double>(p);
  return c == Criterion::kAic ? 2.0 * pd : pd * std::log(static_cast<double>(n));
}

std::pair<std::size_t, std::size_t> default_order_range(std::size_t n, std::size_t basis_size) {
  const auto rate = static_cast<std::size_t>(std::ceil(2.0 * std::pow(static_cast<double>(n), 0.25)));
  std::size_t hi = std::min<std::size_t>({20, rate, basis_size});
  if (n >= 3) hi = std::min(hi, n - 2);
  return {1, std::max<std::size_t>(1, hi)};
}

namespace {

bool fit_failed(const FittedModel& m, const FitMethod& method) {
  return std::holds_alternative<KnownLinkMethod>(method) && !m.fit.converged;
}

}  // namespace

OrderSelection select_order(const FunctionalDataset& ds, const Basis& basis, const FitMethod& method,
                            Criterion criterion, std::optional<std::pair<std::size_t, std::size_t>> p_range,
                            int threads) {
  const std::size_t n = ds.n();
  const auto [lo, hi] = p_range ? *p_range : default_order_range(n, basis.size());
  const std::size_t cap = std::min(basis.size(), n >= 2 ? n - 2 : std::size_t{0});
  if (lo < 1 || hi < lo || hi > cap) {
    std::ostringstream os;
    os << "order range " << lo << ".." << hi << " outside 1.." << cap;
    fail(ErrorKind::kRange, os.str());
  }
  const ScoreMatrix all = project_scores(ds, basis, hi);
  const std::size_t count = hi - lo + 1;
  std::vector<double> dev(count, std::numeric_limits<double>::quiet_NaN());
  std::vector<std::string> why(count);
  parallel_for(count, threads, [&](std::size_t k) {
    const std::size_t p = lo + k;
    try {
      const FittedModel m = fit_model(all.truncated(p), ds.responses(), method);
      if (fit_failed(m, method)) {
        why[k] = "p = " + std::to_string(p) + ": fit did not converge";
        return;
      }
      dev[k] = m.fit.deviance;
    } catch (const Error& e) {
      why[k] = "p = " + std::to_string(p) + ": " + e.what();
    }
  });

  OrderSelection sel;
  sel.criterion = criterion;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < count; ++k) {
    if (!why[k].empty()) {
      sel.diagnostics.push_back(why[k]);
      continue;
    }
    const std::size_t p = lo + k;
    const double c = dev[k] + penalty(criterion, p, n);
    sel.candidate_orders.push_back(p);
    sel.deviances.push_back(dev[k]);
    sel.criterion_values.push_back(c);
    if (c < best) {
      best = c;
      sel.chosen = p;
    }
  }
  if (sel.candidate_orders.empty()) fail(ErrorKind::kSelection, "every candidate order failed to fit");
  return sel;
}

LooPredictions loo_predictions(const FunctionalDataset& ds, const Basis& basis, std::size_t p,
                               const FitMethod& method, int threads) {
  const std::size_t n = ds.n();
  if (n < 10) fail(ErrorKind::kPrecondition, "leave-one-out needs n >= 10");
  const ScoreMatrix scores = project_scores(ds, basis, p);
  const Eigen::VectorXd& y = ds.responses();

  FitMethod fold_method = method;
  if (auto* spqr = std::get_if<SpqrMethod>(&fold_method); spqr && !(spqr->config.smoother.bandwidth > 0.0)) {
    const FittedModel full = fit_model(scores, y, method);
    spqr->config.smoother.bandwidth = full.link_estimate->bandwidth;
  }

  LooPredictions out;
  out.predictions = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), std::numeric_limits<double>::quiet_NaN());
  parallel_for(n, threads, [&](std::size_t i) {
    std::vector<std::size_t> rows;
    rows.reserve(n - 1);
    for (std::size_t r = 0; r < n; ++r)
      if (r != i) rows.push_back(r);
    try {
      Eigen::VectorXd y_fold(static_cast<Eigen::Index>(n - 1));
      for (std::size_t r = 0; r < rows.size(); ++r) y_fold[static_cast<Eigen::Index>(r)] = y[static_cast<Eigen::Index>(rows[r])];
      const FittedModel m = fit_model(scores.subset(rows), y_fold, fold_method);
      if (fit_failed(m, fold_method)) return;
      out.predictions[static_cast<Eigen::Index>(i)] = predict_mean(m, scores.subset({i}), fold_method)[0];
    } catch (const Error&) {
    }
  });
  for (Eigen::Index i = 0; i < out.predictions.size(); ++i)
    if (std::isnan(out.predictions[i])) ++out.skipped;
  return out;
}

LooError loo_prediction_error(const FunctionalDataset& ds, const Basis& basis, std::size_t p,
                              const FitMethod& method, int threads) {
  const LooPredictions pred = loo_predictions(ds, basis, p, method, threads);
  LooError out;
  out.skipped = pred.skipped;
  double sum = 0.0;
  std::size_t used = 0;
  for (Eigen::Index i = 0; i < pred.predictions.size(); ++i) {
    if (std::isnan(pred.predictions[i])) continue;
    const double r = ds.responses()[i] - pred.predictions[i];
    sum += r * r;
    ++used;
  }
  if (used == 0) fail(ErrorKind::kSelection, "every leave-one-out fit failed");
  out.prediction_error = sum / static_cast<double>(used);
  return out;
}

Misclassification tabulate_misclassification(const Eigen::VectorXd& y, const Eigen::VectorXd& predictions,
                                             double threshold) {
  if (y.size() != predictions.size()) fail(ErrorKind::kAlignment, "responses and predictions differ in length");
  Misclassification m;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] != 0.0 && y[i] != 1.0) fail(ErrorKind::kPrecondition, "misclassification needs binary responses");
    if (std::isnan(predictions[i])) {
      ++m.skipped;
      continue;
    }
    const bool predicted_one = predictions[i] >= threshold;
    if (y[i] == 1.0) {
      ++m.n_class1;
      if (!predicted_one) ++m.wrong_class1;
    } else {
      ++m.n_class0;
      if (predicted_one) ++m.wrong_class0;
    }
  }
  auto rate = [](std::size_t wrong, std::size_t total) {
    return total == 0 ? 0.0 : static_cast<double>(wrong) / static_cast<double>(total);
  };
  m.rate_class0 = rate(m.wrong_class0, m.n_class0);
  m.rate_class1 = rate(m.wrong_class1, m.n_class1);
  m.overall = rate(m.wrong_class0 + m.wrong_class1, m.n_class0 + m.n_class1);
  return m;
}

Misclassification loo_misclassification(const FunctionalDataset& ds, const Basis& basis, std::size_t p,
                                        const FitMethod& method, double threshold, int threads) {
  if (ds.response_kind() != ResponseKind::kBinary)
    fail(ErrorKind::kPrecondition, "misclassification needs binary responses");
  const LooPredictions pred = loo_predictions(ds, basis, p, method, threads);
  return tabulate_misclassification(ds.responses(), pred.predictions, threshold);
}

}  // namespace gflm
