#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gflm/basis.hpp"
#include "gflm/curve.hpp"
#include "gflm/link.hpp"
#include "gflm/model_select.hpp"

namespace gflm {

enum class SimBasisMode {
  kTrueFourier,  // fit in the generating basis
  kEigen,        // center, then estimate the eigenbasis from each sample
};

std::string_view to_string(SimBasisMode mode);
SimBasisMode parse_sim_basis_mode(std::string_view text);

/// Binary-response functional process on [0, 1]:
///   X_i(t) = sum_{j <= n_components} eps_ij phi_j(t),  eps_ij ~ N(0, 1/j^2),
///   eta_i  = delta + delta eps_i1 + (delta/2) eps_i2 + (delta/3) eps_i3,
///   Y_i    ~ Bernoulli(g(eta_i)) under link_true.
struct SimDesign {
  std::size_t n = 200;
  std::size_t n_components = 20;
  double coeff_scale = 1.0;  // delta
  LinkKind link_true = LinkKind::kLogit;
  std::string link_fit = "logit";  // logit, cloglog or spqr
  std::size_t n_reps = 500;
  std::uint64_t seed = 2005;
  std::size_t grid_size = 201;

  void validate() const;
};

/// Coefficients (beta_0, beta_1, beta_2, beta_3) of the generating model.
Eigen::VectorXd true_coefficients(double delta);

/// Sample number `rep` of the design. Draws come from the Philox stream
/// (seed, rep); subject i consumes its scores then one uniform, so a smaller
/// n reproduces a prefix of a larger sample.
FunctionalDataset generate_sample(const SimDesign& design, std::uint64_t rep = 0);

/// Generating scores eps_ij of the same sample (n x n_components).
Eigen::MatrixXd generate_scores(const SimDesign& design, std::uint64_t rep = 0);

/// Common knobs of the replicated experiments.
struct ExperimentOptions {
  std::size_t p = 3;
  SimBasisMode basis_mode = SimBasisMode::kTrueFourier;
  bool select_p_by_aic = false;   // choose p per replication instead of fixing it
  SpqrConfig spqr;
  SolverConfig solver;
  int threads = 1;
};

/// Fitting basis for one sample plus the truth expressed in it.
struct FittingFrame {
  Basis basis;
  FunctionalDataset data;                // centered in eigen mode
  Eigen::VectorXd truth;                 // (beta_0, <beta, rho_1>, ..., <beta, rho_J>)
};

FittingFrame fitting_frame(const FunctionalDataset& raw, double delta, SimBasisMode mode, std::size_t J);

FitMethod fit_method_for(const std::string& tag, const ExperimentOptions& opt);

// Power -----------------------------------------------------------------

struct PowerRep {
  double delta = 0.0;
  std::size_t n = 0;
  std::size_t rep = 0;
  std::size_t p = 0;
  double statistic = 0.0;
  bool reject = false;
  bool failed = false;
};

struct PowerCell {
  double delta = 0.0;
  std::size_t n = 0;
  double rejection_rate = 0.0;
  std::size_t completed = 0;
  std::size_t failed = 0;
};

struct PowerResult {
  std::vector<PowerCell> cells;
  std::vector<PowerRep> reps;
  std::vector<std::string> warnings;  // cells with more than 2% failed fits
};

/// Rejection rate of the no-effect test at level alpha for every (delta, n).
/// `base` supplies link_true, link_fit, n_reps, seed and grid size.
PowerResult power_experiment(const SimDesign& base, const std::vector<double>& deltas,
                             const std::vector<std::size_t>& sizes, double alpha, const ExperimentOptions& opt);

// Link misspecification -------------------------------------------------

struct MisspecCell {
  LinkKind generator = LinkKind::kLogit;
  std::string fitter;
  Curve mean_curve;               // pointwise mean of the L2-normalized beta_hat(t)
  double mean_l2_error = 0.0;     // mean over reps of || beta_hat / |beta_hat| - beta / |beta| ||
  std::vector<double> rep_errors; // NaN where the fit failed
  std::size_t failed = 0;
};

struct MisspecResult {
  Curve truth;  // L2-normalized true beta(t)
  TimeGrid grid;
  std::vector<MisspecCell> cells;
};

/// Every generator is fit by every fitter tag on the same samples.
MisspecResult link_misspec_experiment(const SimDesign& base, const std::vector<LinkKind>& generators,
                                      const std::vector<std::string>& fitters, const ExperimentOptions& opt);

// Calibration ------------------------------------------------------------

enum class CalibrationGamma {
  kEmpirical,   // Gamma-tilde of each fit
  kPopulation,  // Gamma at the truth, from one large auxiliary sample
};

struct CalibrationResult {
  std::vector<double> statistics;  // NaN where the fit failed
  std::size_t failed = 0;
  double mean = 0.0;
  double sd = 0.0;
  double ks_distance = 0.0;
  std::vector<std::pair<double, double>> qq;  // (normal quantile, sorted T)
};

/// T at the true truncated beta, replicated n_reps times. Uses the known link
/// the design generates with.
CalibrationResult statistic_calibration(const SimDesign& design, const ExperimentOptions& opt,
                                        CalibrationGamma gamma = CalibrationGamma::kEmpirical,
                                        std::size_t aux_n = 200000);

/// sup_x |F_n(x) - Phi(x)| of the finite values in `values`.
double ks_distance_normal(std::vector<double> values);

// Coverage ---------------------------------------------------------------

struct CoverageResult {
  std::vector<int> covered;  // 1, 0, or -1 where the fit failed
  std::size_t failed = 0;
  double rate = 0.0;
};

/// Fraction of replications whose simultaneous band contains the truth
/// beta_0 + sum_{j <= p} beta_j rho_j(t) at every grid point.
CoverageResult coverage_experiment(const SimDesign& design, double alpha, const ExperimentOptions& opt);

}  // namespace gflm
