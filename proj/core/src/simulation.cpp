#include "gflm/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/random/normal_distribution.hpp>

#include "gflm/error.hpp"
#include "gflm/inference.hpp"
#include "gflm/parallel.hpp"
#include "gflm/random.hpp"

namespace gflm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Auxiliary draws live far away from the replication streams.
constexpr std::uint64_t kAuxStream = std::uint64_t{1} << 63;

bool known_link_failed(const FittedModel& m, const FitMethod& method) {
  return std::holds_alternative<KnownLinkMethod>(method) && !m.fit.converged;
}

Curve true_curve(double delta, const TimeGrid& grid) {
  const Basis phi = fourier_basis(3, grid);
  const Eigen::VectorXd b = true_coefficients(delta);
  return Curve(phi.functions() * b.tail(3));
}

double l2_norm(const Curve& f, const TimeGrid& grid) {
  return std::sqrt(inner_product(f, f, WeightMeasure::uniform(grid.size()), grid));
}

}  // namespace

std::string_view to_string(SimBasisMode mode) { return mode == SimBasisMode::kTrueFourier ? "fourier" : "eigen"; }

SimBasisMode parse_sim_basis_mode(std::string_view text) {
  if (text == "fourier") return SimBasisMode::kTrueFourier;
  if (text == "eigen") return SimBasisMode::kEigen;
  fail(ErrorKind::kConfig, "unknown simulation basis mode '" + std::string(text) + "'");
}

void SimDesign::validate() const {
  if (n < 1 || n_reps < 1 || grid_size < 2) fail(ErrorKind::kConfig, "n, n_reps and grid_size must be positive");
  if (n_components < 3) fail(ErrorKind::kConfig, "the generator needs at least 3 components");
  if (grid_size < 4 * n_components + 1) fail(ErrorKind::kConfig, "grid too coarse for the number of components");
  if (!std::isfinite(coeff_scale)) fail(ErrorKind::kConfig, "coefficient scale must be finite");
  if (link_true != LinkKind::kLogit && link_true != LinkKind::kCloglog)
    fail(ErrorKind::kConfig, "generating link must be logit or cloglog");
  if (link_fit != "logit" && link_fit != "cloglog" && link_fit != "spqr")
    fail(ErrorKind::kConfig, "fitting link must be logit, cloglog or spqr");
}

Eigen::VectorXd true_coefficients(double delta) {
  Eigen::VectorXd b(4);
  b << delta, delta, delta / 2.0, delta / 3.0;
  return b;
}

namespace {

struct Draw {
  Eigen::MatrixXd scores;
  Eigen::VectorXd y;
};

Draw draw_sample(const SimDesign& d, std::uint64_t stream, bool with_response) {
  PhiloxStream rng(d.seed, stream);
  boost::random::normal_distribution<double> normal;
  const Link link(d.link_true);
  const Eigen::VectorXd b = true_coefficients(d.coeff_scale);
  const auto n = static_cast<Eigen::Index>(d.n);
  const auto J = static_cast<Eigen::Index>(d.n_components);
  Draw out{Eigen::MatrixXd(n, J), Eigen::VectorXd(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < J; ++j) out.scores(i, j) = normal(rng) / static_cast<double>(j + 1);
    const double u = rng.uniform();
    if (!with_response) continue;
    const double eta = b[0] + b[1] * out.scores(i, 0) + b[2] * out.scores(i, 1) + b[3] * out.scores(i, 2);
    out.y[i] = u < link.mean(eta) ? 1.0 : 0.0;
  }
  return out;
}

}  // namespace

Eigen::MatrixXd generate_scores(const SimDesign& design, std::uint64_t rep) {
  design.validate();
  return draw_sample(design, rep, false).scores;
}

FunctionalDataset generate_sample(const SimDesign& design, std::uint64_t rep) {
  design.validate();
  const TimeGrid grid = TimeGrid::uniform(0.0, 1.0, design.grid_size);
  const Basis phi = fourier_basis(design.n_components, grid);
  Draw d = draw_sample(design, rep, true);
  Eigen::MatrixXd curves = d.scores * phi.functions().transpose();
  return FunctionalDataset(grid, WeightMeasure::uniform(grid.size()), std::move(curves), std::move(d.y),
                           ResponseKind::kBinary);
}

FittingFrame fitting_frame(const FunctionalDataset& raw, double delta, SimBasisMode mode, std::size_t J) {
  const Eigen::VectorXd b = true_coefficients(delta);
  if (mode == SimBasisMode::kTrueFourier) {
    Basis basis = fourier_basis(J, raw.grid());
    Eigen::VectorXd truth = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(J + 1));
    const Eigen::Index k = std::min<Eigen::Index>(4, truth.size());
    truth.head(k) = b.head(k);
    return {std::move(basis), raw, std::move(truth)};
  }
  auto [centered, mean] = center_dataset(raw);
  Basis basis = eigenbasis(estimate_covariance(centered), raw.grid(), raw.weight(), J);
  const Curve beta = true_curve(delta, raw.grid());
  Eigen::VectorXd truth(static_cast<Eigen::Index>(basis.size() + 1));
  // Centering moves <mean, beta> into the intercept.
  truth[0] = b[0] + inner_product(mean, beta, raw.weight(), raw.grid());
  for (std::size_t j = 1; j <= basis.size(); ++j)
    truth[static_cast<Eigen::Index>(j)] = inner_product(beta, basis.function(j), raw.weight(), raw.grid());
  return {std::move(basis), std::move(centered), std::move(truth)};
}

FitMethod fit_method_for(const std::string& tag, const ExperimentOptions& opt) {
  if (tag == "spqr") return SpqrMethod{opt.spqr, Link(LinkKind::kLogit)};
  if (tag == "logit" || tag == "cloglog") return KnownLinkMethod{Link::parse(tag, opt.solver.clamp_eps), opt.solver};
  fail(ErrorKind::kConfig, "unknown fitting method '" + tag + "'");
}

namespace {

std::size_t choose_order(const FittingFrame& frame, const FitMethod& method, const ExperimentOptions& opt) {
  if (!opt.select_p_by_aic) return opt.p;
  return select_order(frame.data, frame.basis, method, Criterion::kAic).chosen;
}

}  // namespace

PowerResult power_experiment(const SimDesign& base, const std::vector<double>& deltas,
                             const std::vector<std::size_t>& sizes, double alpha, const ExperimentOptions& opt) {
  base.validate();
  if (deltas.empty() || sizes.empty()) fail(ErrorKind::kConfig, "power experiment needs deltas and sample sizes");
  if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorKind::kConfig, "alpha must lie in (0, 1)");
  const FitMethod method = fit_method_for(base.link_fit, opt);
  const std::size_t reps = base.n_reps;
  const std::size_t n_cells = deltas.size() * sizes.size();

  PowerResult out;
  out.reps.resize(n_cells * reps);
  // Every cell reuses streams 0..reps-1: common random numbers across delta and n.
  parallel_for(n_cells * reps, opt.threads, [&](std::size_t k) {
    const std::size_t cell = k / reps;
    const std::size_t rep = k % reps;
    SimDesign d = base;
    d.coeff_scale = deltas[cell / sizes.size()];
    d.n = sizes[cell % sizes.size()];
    PowerRep& r = out.reps[k];
    r.delta = d.coeff_scale;
    r.n = d.n;
    r.rep = rep;
    r.statistic = kNaN;
    try {
      const FittingFrame frame = fitting_frame(generate_sample(d, rep), d.coeff_scale, opt.basis_mode, d.n_components);
      r.p = choose_order(frame, method, opt);
      const FittedModel m = fit_model(project_scores(frame.data, frame.basis, r.p), frame.data.responses(), method);
      if (known_link_failed(m, method)) {
        r.failed = true;
        return;
      }
      const InferenceReport rep_report = no_effect_test(m.fit, alpha);
      r.statistic = rep_report.statistic;
      r.reject = rep_report.reject;
    } catch (const Error&) {
      r.failed = true;
    }
  });

  for (std::size_t cell = 0; cell < n_cells; ++cell) {
    PowerCell c;
    c.delta = deltas[cell / sizes.size()];
    c.n = sizes[cell % sizes.size()];
    std::size_t rejected = 0;
    for (std::size_t rep = 0; rep < reps; ++rep) {
      const PowerRep& r = out.reps[cell * reps + rep];
      if (r.failed) {
        ++c.failed;
        continue;
      }
      ++c.completed;
      if (r.reject) ++rejected;
    }
    c.rejection_rate = c.completed ? static_cast<double>(rejected) / static_cast<double>(c.completed) : kNaN;
    if (static_cast<double>(c.failed) > 0.02 * static_cast<double>(reps)) {
      std::ostringstream os;
      os << "delta = " << c.delta << ", n = " << c.n << ": " << c.failed << " of " << reps << " fits failed";
      out.warnings.push_back(os.str());
    }
    out.cells.push_back(c);
  }
  return out;
}

MisspecResult link_misspec_experiment(const SimDesign& base, const std::vector<LinkKind>& generators,
                                      const std::vector<std::string>& fitters, const ExperimentOptions& opt) {
  base.validate();
  if (generators.empty() || fitters.empty()) fail(ErrorKind::kConfig, "need at least one generator and one fitter");
  std::vector<FitMethod> methods;
  for (const auto& f : fitters) methods.push_back(fit_method_for(f, opt));

  const TimeGrid grid = TimeGrid::uniform(0.0, 1.0, base.grid_size);
  const Curve beta = true_curve(base.coeff_scale, grid);
  const double beta_norm = l2_norm(beta, grid);
  if (!(beta_norm > 0.0)) fail(ErrorKind::kConfig, "misspecification experiment needs a nonzero delta");
  const Curve truth(beta.values() / beta_norm);

  const std::size_t reps = base.n_reps;
  const std::size_t nf = fitters.size();
  const auto m = static_cast<Eigen::Index>(grid.size());
  // Slot (g, rep, f): normalized curve or NaN.
  std::vector<Eigen::VectorXd> curves(generators.size() * reps * nf, Eigen::VectorXd::Constant(m, kNaN));

  parallel_for(generators.size() * reps, opt.threads, [&](std::size_t k) {
    SimDesign d = base;
    d.link_true = generators[k / reps];
    const std::size_t rep = k % reps;
    std::optional<FittingFrame> frame;
    try {
      frame.emplace(fitting_frame(generate_sample(d, rep), d.coeff_scale, opt.basis_mode, d.n_components));
    } catch (const Error&) {
      return;
    }
    for (std::size_t f = 0; f < nf; ++f) {
      try {
        const std::size_t p = choose_order(*frame, methods[f], opt);
        const FittedModel fm =
            fit_model(project_scores(frame->data, frame->basis, p), frame->data.responses(), methods[f]);
        if (known_link_failed(fm, methods[f])) continue;
        const Eigen::VectorXd curve =
            frame->basis.functions().leftCols(static_cast<Eigen::Index>(p)) * fm.fit.slopes();
        const double norm = l2_norm(Curve(curve), grid);
        if (!(norm > 0.0)) continue;
        curves[k * nf + f] = curve / norm;
      } catch (const Error&) {
      }
    }
  });

  MisspecResult out{truth, grid, {}};
  for (std::size_t g = 0; g < generators.size(); ++g) {
    for (std::size_t f = 0; f < nf; ++f) {
      MisspecCell cell{generators[g], fitters[f], Curve::zeros(grid.size()), 0.0, {}, 0};
      Eigen::VectorXd sum = Eigen::VectorXd::Zero(m);
      double err_sum = 0.0;
      std::size_t used = 0;
      for (std::size_t rep = 0; rep < reps; ++rep) {
        const Eigen::VectorXd& c = curves[(g * reps + rep) * nf + f];
        if (std::isnan(c[0])) {
          cell.rep_errors.push_back(kNaN);
          ++cell.failed;
          continue;
        }
        const double e = l2_norm(Curve(c - truth.values()), grid);
        cell.rep_errors.push_back(e);
        err_sum += e;
        sum += c;
        ++used;
      }
      if (used > 0) {
        cell.mean_curve = Curve(sum / static_cast<double>(used));
        cell.mean_l2_error = err_sum / static_cast<double>(used);
      } else {
        cell.mean_l2_error = kNaN;  // mean_curve stays zero
      }
      out.cells.push_back(std::move(cell));
    }
  }
  return out;
}

double ks_distance_normal(std::vector<double> values) {
  values.erase(std::remove_if(values.begin(), values.end(), [](double v) { return !std::isfinite(v); }),
               values.end());
  if (values.empty()) fail(ErrorKind::kInvalidInput, "no finite values for the Kolmogorov distance");
  std::sort(values.begin(), values.end());
  const auto n = static_cast<double>(values.size());
  double d = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double f = normal_cdf(values[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

namespace {

Eigen::MatrixXd population_gamma(const SimDesign& design, std::size_t p, std::size_t aux_n) {
  SimDesign aux = design;
  aux.n = aux_n;
  const Eigen::MatrixXd eps = draw_sample(aux, kAuxStream, false).scores;
  const Link link(design.link_true);
  const Eigen::VectorXd b = true_coefficients(design.coeff_scale);
  const auto n = eps.rows();
  Eigen::MatrixXd x(n, static_cast<Eigen::Index>(p + 1));
  x.col(0).setOnes();
  x.rightCols(static_cast<Eigen::Index>(p)) = eps.leftCols(static_cast<Eigen::Index>(p));
  Eigen::VectorXd w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double eta = b[0] + b[1] * eps(i, 0) + b[2] * eps(i, 1) + b[3] * eps(i, 2);
    const double d = link.mean_deriv(eta);
    w[i] = d * d / link.variance(link.mean(eta));
  }
  return weighted_gram(x, w);
}

}  // namespace

CalibrationResult statistic_calibration(const SimDesign& design, const ExperimentOptions& opt,
                                        CalibrationGamma gamma, std::size_t aux_n) {
  design.validate();
  if (opt.select_p_by_aic) fail(ErrorKind::kConfig, "calibration needs a fixed p");
  if (opt.p < 1 || opt.p > design.n_components) fail(ErrorKind::kConfig, "p must lie in 1..n_components");
  std::optional<Eigen::MatrixXd> pop;
  if (gamma == CalibrationGamma::kPopulation) {
    if (opt.basis_mode != SimBasisMode::kTrueFourier)
      fail(ErrorKind::kConfig, "population Gamma is defined in the generating basis only");
    pop = population_gamma(design, opt.p, aux_n);
  }
  const KnownLinkMethod method{Link(design.link_true, opt.solver.clamp_eps), opt.solver};

  CalibrationResult out;
  out.statistics.assign(design.n_reps, kNaN);
  parallel_for(design.n_reps, opt.threads, [&](std::size_t rep) {
    try {
      const FittingFrame frame =
          fitting_frame(generate_sample(design, rep), design.coeff_scale, opt.basis_mode, design.n_components);
      const ModelFit fit =
          iwls_fit(project_scores(frame.data, frame.basis, opt.p), frame.data.responses(), method.link, method.solver);
      if (!fit.converged) return;
      const Eigen::VectorXd beta0 = frame.truth.head(static_cast<Eigen::Index>(opt.p + 1));
      out.statistics[rep] = test_statistic(fit.beta, beta0, pop ? *pop : fit.gamma, fit.n(), true);
    } catch (const Error&) {
    }
  });

  std::vector<double> ok;
  for (double t : out.statistics)
    if (std::isfinite(t)) ok.push_back(t);
  out.failed = design.n_reps - ok.size();
  if (ok.size() < 2) fail(ErrorKind::kConvergence, "fewer than two calibration replications succeeded");
  const auto k = static_cast<double>(ok.size());
  double sum = 0.0;
  for (double t : ok) sum += t;
  out.mean = sum / k;
  double ss = 0.0;
  for (double t : ok) ss += (t - out.mean) * (t - out.mean);
  out.sd = std::sqrt(ss / (k - 1.0));
  out.ks_distance = ks_distance_normal(ok);
  std::sort(ok.begin(), ok.end());
  for (std::size_t i = 0; i < ok.size(); ++i)
    out.qq.emplace_back(normal_quantile((static_cast<double>(i) + 0.5) / k), ok[i]);
  return out;
}

CoverageResult coverage_experiment(const SimDesign& design, double alpha, const ExperimentOptions& opt) {
  design.validate();
  if (opt.select_p_by_aic) fail(ErrorKind::kConfig, "coverage needs a fixed p");
  if (design.link_fit == "spqr") fail(ErrorKind::kConfig, "coverage is defined for known-link fits");
  const FitMethod method = fit_method_for(design.link_fit, opt);
  const auto p = static_cast<Eigen::Index>(opt.p);

  CoverageResult out;
  out.covered.assign(design.n_reps, -1);
  parallel_for(design.n_reps, opt.threads, [&](std::size_t rep) {
    try {
      const FittingFrame frame =
          fitting_frame(generate_sample(design, rep), design.coeff_scale, opt.basis_mode, design.n_components);
      const FittedModel m = fit_model(project_scores(frame.data, frame.basis, opt.p), frame.data.responses(), method);
      if (!m.fit.converged) return;
      const Band band = simultaneous_band(m.fit, frame.basis, alpha);
      const Eigen::VectorXd target =
          (frame.basis.functions().leftCols(p) * frame.truth.segment(1, p)).array() + frame.truth[0];
      const bool inside = ((target - band.lower.values()).array() >= 0.0).all() &&
                          ((band.upper.values() - target).array() >= 0.0).all();
      out.covered[rep] = inside ? 1 : 0;
    } catch (const Error&) {
    }
  });
  std::size_t hits = 0;
  for (int c : out.covered) {
    if (c < 0) ++out.failed;
    if (c == 1) ++hits;
  }
  const std::size_t done = design.n_reps - out.failed;
  if (done == 0) fail(ErrorKind::kConvergence, "every coverage replication failed");
  out.rate = static_cast<double>(hits) / static_cast<double>(done);
  return out;
}

}  // namespace gflm
