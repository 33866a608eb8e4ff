#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "gflm/basis.hpp"
#include "gflm/glm.hpp"
#include "gflm/link.hpp"
#include "gflm/spqr.hpp"

namespace gflm {

struct KnownLinkMethod {
  Link link{LinkKind::kLogit};
  SolverConfig solver;
};

struct SpqrMethod {
  SpqrConfig config;
  Link init_link{LinkKind::kLogit};
};

/// How the p-truncated model is fit: a fixed link, or the semiparametric route.
using FitMethod = std::variant<KnownLinkMethod, SpqrMethod>;

std::string method_name(const FitMethod& method);

struct FittedModel {
  ModelFit fit;
  std::optional<LinkEstimate> link_estimate;  // semiparametric fits only
  int floored_variances = 0;
  int variance_fallbacks = 0;
};

FittedModel fit_model(const ScoreMatrix& scores, const Eigen::VectorXd& y, const FitMethod& method);

/// Fitted mean for each row of `scores` (which may hold more columns than the fit uses).
Eigen::VectorXd predict_mean(const FittedModel& model, const ScoreMatrix& scores, const FitMethod& method);

/// Deviance 2 sum_i integral_{mu_i}^{y_i} (y_i - u) / sigma^2(u) du under a known link;
/// binary responses use the clipped saturated mean.
double deviance(const ModelFit& fit, const Eigen::VectorXd& y, const Link& link);

/// Quasi-deviance of a semiparametric fit, integrating the estimated quasi-score.
double deviance(const ModelFit& fit, const Eigen::VectorXd& y, const LinkEstimate& est);

enum class Criterion { kAic, kBic };

std::string_view to_string(Criterion c);
Criterion parse_criterion(std::string_view name);

/// 2p (AIC) or p log n (BIC).
double penalty(Criterion c, std::size_t p, std::size_t n);

struct OrderSelection {
  std::vector<std::size_t> candidate_orders;
  std::vector<double> criterion_values;
  std::vector<double> deviances;
  std::size_t chosen = 0;
  Criterion criterion = Criterion::kAic;
  std::vector<std::string> diagnostics;  // excluded orders and why
};

/// 1 .. min(20, ceil(2 n^{1/4}), J), further capped at n - 2.
std::pair<std::size_t, std::size_t> default_order_range(std::size_t n, std::size_t basis_size);

/// Fits every candidate order and minimizes C(p) = D(p) + P(p).
///
/// Orders whose fit throws (or, with a known link, fails to converge) are
/// excluded with a diagnostic; if none survive, throws kSelection. Ties go to
/// the smallest p.
OrderSelection select_order(const FunctionalDataset& ds, const Basis& basis, const FitMethod& method,
                            Criterion criterion, std::optional<std::pair<std::size_t, std::size_t>> p_range = {},
                            int threads = 1);

struct LooPredictions {
  Eigen::VectorXd predictions;  // NaN where the fold failed
  std::size_t skipped = 0;
};

/// Leave-one-out fitted means p_i^{(-i)}. Semiparametric folds reuse the
/// bandwidth of the full-data fit.
LooPredictions loo_predictions(const FunctionalDataset& ds, const Basis& basis, std::size_t p,
                               const FitMethod& method, int threads = 1);

struct LooError {
  double prediction_error = 0.0;  // (1/n) sum (Y_i - p_i^{(-i)})^2 over completed folds
  std::size_t skipped = 0;
};

LooError loo_prediction_error(const FunctionalDataset& ds, const Basis& basis, std::size_t p,
                              const FitMethod& method, int threads = 1);

struct Misclassification {
  double rate_class0 = 0.0;
  double rate_class1 = 0.0;
  double overall = 0.0;
  std::size_t n_class0 = 0;
  std::size_t n_class1 = 0;
  std::size_t wrong_class0 = 0;
  std::size_t wrong_class1 = 0;
  std::size_t skipped = 0;
};

/// Classifies by p_i^{(-i)} >= threshold and tabulates errors per class.
Misclassification loo_misclassification(const FunctionalDataset& ds, const Basis& basis, std::size_t p,
                                        const FitMethod& method, double threshold = 0.5, int threads = 1);

/// Tabulation used by loo_misclassification, exposed for precomputed predictions.
Misclassification tabulate_misclassification(const Eigen::VectorXd& y, const Eigen::VectorXd& predictions,
                                             double threshold);

}  // namespace gflm
