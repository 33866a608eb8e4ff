// gflm: fit, classify, select, band and simulate from the command line.
//
// Exit codes: 0 success, 2 data error, 3 config error, 4 convergence failure.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gflm/basis.hpp"
#include "gflm/error.hpp"
#include "gflm/glm.hpp"
#include "gflm/inference.hpp"
#include "gflm/io.hpp"
#include "gflm/model_select.hpp"
#include "gflm/parallel.hpp"
#include "gflm/simulation.hpp"
#include "gflm/spqr.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "0.1.0";

enum Exit { kOk = 0, kDataError = 2, kConfigError = 3, kConvergenceError = 4 };

int exit_code(gflm::ErrorKind kind) {
  using gflm::ErrorKind;
  switch (kind) {
    case ErrorKind::kConfig:
    case ErrorKind::kRange:
    case ErrorKind::kResolution:
      return kConfigError;
    case ErrorKind::kConvergence:
    case ErrorKind::kSeparation:
    case ErrorKind::kRankDeficient:
    case ErrorKind::kSmoothing:
    case ErrorKind::kDegenerateLink:
    case ErrorKind::kNumeric:
    case ErrorKind::kConditioning:
    case ErrorKind::kSelection:
      return kConvergenceError;
    default:
      return kDataError;
  }
}

struct Options {
  std::string config;
  std::string data;
  std::string grid;
  std::string basis = "empirical:20";
  std::string link = "logit";
  std::optional<std::size_t> p;
  double alpha = 0.05;
  std::string criterion = "aic";
  std::string out = ".";
  std::uint64_t seed = 2005;
  int threads = 1;

  gflm::SolverConfig solver;
  double bandwidth = 0.0;
  int degree = 1;
  std::string kernel = "epanechnikov";
  int max_outer = 25;
  double spqr_tol = 1e-5;
  int inner_steps = 1;
  double derivative_scale = 2.0;
  double variance_floor = 0.05;
  double threshold = 0.5;

  // simulate
  std::string experiment = "power";
  std::vector<std::size_t> sizes{200};
  std::vector<double> deltas{0.0};
  std::size_t reps = 500;
  std::size_t components = 20;
  std::size_t grid_size = 201;
  std::string link_true = "logit";
  std::string sim_basis = "fourier";
  bool aic_per_rep = false;
  std::string gamma = "empirical";
  std::size_t aux_n = 200000;
  std::vector<std::string> generators{"logit", "cloglog"};
  std::vector<std::string> fitters{"logit", "cloglog", "spqr"};
};

struct BasisSpec {
  gflm::BasisKind kind;
  std::size_t J;
};

BasisSpec parse_basis_spec(const std::string& text) {
  const auto colon = text.find(':');
  const std::string name = text.substr(0, colon);
  std::size_t J = 20;
  if (colon != std::string::npos) {
    try {
      std::size_t used = 0;
      const long v = std::stol(text.substr(colon + 1), &used);
      if (used != text.size() - colon - 1 || v < 1) throw std::invalid_argument("J");
      J = static_cast<std::size_t>(v);
    } catch (const std::exception&) {
      gflm::fail(gflm::ErrorKind::kConfig, "basis size in '" + text + "' must be a positive integer");
    }
  }
  if (name == "fourier") return {gflm::BasisKind::kFourier, J};
  if (name == "empirical") return {gflm::BasisKind::kEmpirical, J};
  gflm::fail(gflm::ErrorKind::kConfig, "basis must be fourier:J or empirical:J, got '" + text + "'");
}

gflm::FitMethod make_method(const Options& o) {
  gflm::SolverConfig solver = o.solver;
  if (o.link == "spqr") {
    gflm::SpqrConfig cfg;
    cfg.smoother.bandwidth = o.bandwidth;
    cfg.smoother.degree = o.degree;
    cfg.smoother.kernel = gflm::parse_kernel(o.kernel);
    cfg.max_outer = o.max_outer;
    cfg.tol = o.spqr_tol;
    cfg.inner_steps = o.inner_steps;
    cfg.derivative_bandwidth_scale = o.derivative_scale;
    cfg.variance_floor_fraction = o.variance_floor;
    cfg.solver = solver;
    return gflm::SpqrMethod{cfg, gflm::Link(gflm::LinkKind::kLogit, solver.clamp_eps)};
  }
  try {
    return gflm::KnownLinkMethod{gflm::Link::parse(o.link, solver.clamp_eps), solver};
  } catch (const gflm::Error& e) {
    gflm::fail(gflm::ErrorKind::kConfig, e.what());
  }
}

// Data, the basis built from it, and the (possibly centered) copy that is projected.
struct Prepared {
  gflm::FunctionalDataset raw;
  gflm::FunctionalDataset fit_data;
  gflm::Basis basis;
  std::optional<gflm::Curve> mean;
};

Prepared prepare(const Options& o) {
  const BasisSpec spec = parse_basis_spec(o.basis);
  if (o.data.empty()) gflm::fail(gflm::ErrorKind::kConfig, "--data is required");
  std::optional<std::string> grid;
  if (!o.grid.empty()) grid = o.grid;
  gflm::FunctionalDataset raw = gflm::read_dataset_csv(o.data, grid);
  if (spec.kind == gflm::BasisKind::kFourier) {
    gflm::Basis b = gflm::fourier_basis(spec.J, raw.grid());
    return {raw, raw, std::move(b), std::nullopt};
  }
  auto [centered, mean] = gflm::center_dataset(raw);
  gflm::Basis b = gflm::eigenbasis(gflm::estimate_covariance(centered), raw.grid(), raw.weight(), spec.J);
  return {raw, std::move(centered), std::move(b), std::move(mean)};
}

void check_order(std::size_t p, const Prepared& prep) {
  if (p < 1 || p > prep.basis.size())
    gflm::fail(gflm::ErrorKind::kConfig,
               "p = " + std::to_string(p) + " outside 1.." + std::to_string(prep.basis.size()) + " (basis size)");
}

std::size_t resolve_order(const Options& o, const Prepared& prep, const gflm::FitMethod& method, json& report) {
  if (o.p) {
    check_order(*o.p, prep);
    return *o.p;
  }
  const auto sel = gflm::select_order(prep.fit_data, prep.basis, method, gflm::parse_criterion(o.criterion), {},
                                      o.threads);
  report["order_selected_by"] = o.criterion;
  return sel.chosen;
}

fs::path out_dir(const Options& o) {
  fs::path dir(o.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) gflm::fail(gflm::ErrorKind::kConfig, "cannot create output directory '" + o.out + "'");
  return dir;
}

void write_json(const json& j, const fs::path& path) {
  std::ofstream out(path);
  if (!out) gflm::fail(gflm::ErrorKind::kInvalidInput, "cannot write '" + path.string() + "'");
  out << std::setw(2) << j << '\n';
}

json vec_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

void write_manifest(const CLI::App& app, const std::string& command, const Options& o, const fs::path& dir,
                    const std::vector<std::string>& outputs) {
  json m;
  m["tool"] = "gflm";
  m["version"] = kVersion;
  m["command"] = command;
  m["seed"] = o.seed;
  m["effective_config"] = app.config_to_str(true, false);
  m["outputs"] = outputs;
  write_json(m, dir / "manifest.json");
}

json fit_summary(const gflm::ModelFit& fit, const gflm::FitMethod& method) {
  json r;
  r["n"] = fit.n();
  r["p"] = fit.p();
  r["link"] = gflm::method_name(method);
  r["has_intercept"] = fit.has_intercept;
  r["converged"] = fit.converged;
  r["iterations"] = fit.iterations;
  r["deviance"] = fit.deviance;
  r["score_norm"] = fit.score_norm;
  r["gamma_source"] = std::string(gflm::to_string(fit.gamma_source));
  r["beta"] = vec_json(fit.beta);
  return r;
}

json test_json(const gflm::InferenceReport& t) {
  return json{{"statistic", t.statistic}, {"p_value", t.p_value},       {"q", t.dof_terms},
              {"alpha", t.alpha},         {"critical_value", t.critical_value}, {"reject", t.reject},
              {"gamma_used", std::string(gflm::to_string(t.gamma_used))}};
}

void write_curve_csv(const gflm::TimeGrid& grid, const Eigen::VectorXd& values, const fs::path& path,
                     const std::string& name) {
  std::ofstream out(path);
  out << std::setprecision(17) << "t," << name << '\n';
  for (std::size_t k = 0; k < grid.size(); ++k) out << grid[k] << ',' << values[static_cast<Eigen::Index>(k)] << '\n';
}

// Shared by fit and band: fit at the resolved order and write the standard artifacts.
struct FitOutcome {
  gflm::FittedModel model;
  std::size_t p;
  json report;
  std::vector<std::string> outputs;
};

FitOutcome run_fit(const Options& o, const Prepared& prep, const gflm::FitMethod& method, const fs::path& dir) {
  FitOutcome res;
  res.p = resolve_order(o, prep, method, res.report);
  const gflm::ScoreMatrix scores = gflm::project_scores(prep.fit_data, prep.basis, res.p);
  res.model = gflm::fit_model(scores, prep.fit_data.responses(), method);
  const gflm::ModelFit& fit = res.model.fit;

  res.report.update(fit_summary(fit, method));
  res.report["basis"] = o.basis;
  if (fit.converged) res.report["no_effect_test"] = test_json(gflm::no_effect_test(fit, o.alpha));

  std::ofstream coef(dir / "coefficients.csv");
  coef << std::setprecision(17) << "index,beta\n";
  const Eigen::VectorXd full = fit.full_coefficients();
  for (Eigen::Index j = 0; j < full.size(); ++j) coef << j << ',' << full[j] << '\n';
  const auto [b0, curve] = gflm::reconstruct(full, prep.basis.truncated(res.p));
  res.report["intercept"] = b0;
  write_curve_csv(prep.basis.grid(), curve.values(), dir / "beta_curve.csv", "beta");
  gflm::write_matrix_csv(fit.gamma, (dir / "gamma.csv").string());
  gflm::write_basis_csv(prep.basis, (dir / "basis.csv").string());
  res.outputs = {"coefficients.csv", "beta_curve.csv", "gamma.csv", "basis.csv"};
  if (res.model.link_estimate) {
    gflm::write_link_estimate_csv(*res.model.link_estimate, (dir / "link_estimate.csv").string());
    res.outputs.push_back("link_estimate.csv");
    res.report["floored_variances"] = res.model.floored_variances;
    res.report["variance_fallbacks"] = res.model.variance_fallbacks;
  }
  return res;
}

int cmd_fit(const CLI::App& app, const Options& o) {
  const fs::path dir = out_dir(o);
  const Prepared prep = prepare(o);
  const gflm::FitMethod method = make_method(o);
  FitOutcome res = run_fit(o, prep, method, dir);
  write_json(res.report, dir / "report.json");
  res.outputs.push_back("report.json");
  write_manifest(app, "fit", o, dir, res.outputs);
  std::cout << "n = " << res.model.fit.n() << ", p = " << res.p << ", deviance = " << res.model.fit.deviance
            << ", converged = " << std::boolalpha << res.model.fit.converged << '\n';
  return res.model.fit.converged ? kOk : kConvergenceError;
}

int cmd_band(const CLI::App& app, const Options& o) {
  const fs::path dir = out_dir(o);
  const Prepared prep = prepare(o);
  const gflm::FitMethod method = make_method(o);
  FitOutcome res = run_fit(o, prep, method, dir);
  if (!res.model.fit.converged) gflm::fail(gflm::ErrorKind::kConvergence, "fit did not converge; no band");
  const gflm::Band band = gflm::simultaneous_band(res.model.fit, prep.basis, o.alpha);
  gflm::write_band_csv(band, prep.basis.grid(), (dir / "band.csv").string());
  res.report["band"] = {{"alpha", o.alpha}, {"c_alpha", band.c_alpha}, {"q", res.model.fit.beta.size()}};
  write_json(res.report, dir / "report.json");
  res.outputs.insert(res.outputs.end(), {"band.csv", "report.json"});
  write_manifest(app, "band", o, dir, res.outputs);
  std::cout << "c(alpha) = " << band.c_alpha << ", band written to " << (dir / "band.csv").string() << '\n';
  return kOk;
}

int cmd_select(const CLI::App& app, const Options& o) {
  const fs::path dir = out_dir(o);
  const Prepared prep = prepare(o);
  const gflm::FitMethod method = make_method(o);
  std::optional<std::pair<std::size_t, std::size_t>> range;
  if (o.p) {
    check_order(*o.p, prep);
    range = std::make_pair(std::size_t{1}, *o.p);
  }
  const gflm::OrderSelection sel =
      gflm::select_order(prep.fit_data, prep.basis, method, gflm::parse_criterion(o.criterion), range, o.threads);
  gflm::write_selection_csv(sel, (dir / "selection.csv").string());
  json r;
  r["criterion"] = o.criterion;
  r["link"] = gflm::method_name(method);
  r["basis"] = o.basis;
  r["n"] = prep.raw.n();
  r["chosen_p"] = sel.chosen;
  r["candidate_orders"] = sel.candidate_orders;
  r["criterion_values"] = sel.criterion_values;
  r["deviances"] = sel.deviances;
  r["diagnostics"] = sel.diagnostics;
  write_json(r, dir / "selection.json");
  write_manifest(app, "select", o, dir, {"selection.csv", "selection.json"});
  for (const auto& d : sel.diagnostics) std::cerr << "warning: " << d << '\n';
  std::cout << "chosen p = " << sel.chosen << " (" << o.criterion << ")\n";
  return kOk;
}

int cmd_classify(const CLI::App& app, const Options& o) {
  const fs::path dir = out_dir(o);
  const Prepared prep = prepare(o);
  if (prep.raw.response_kind() != gflm::ResponseKind::kBinary)
    gflm::fail(gflm::ErrorKind::kPrecondition, "classify needs 0/1 responses");
  const gflm::FitMethod method = make_method(o);
  json report;
  const std::size_t p = resolve_order(o, prep, method, report);
  const gflm::ScoreMatrix scores = gflm::project_scores(prep.fit_data, prep.basis, p);
  const gflm::FittedModel model = gflm::fit_model(scores, prep.fit_data.responses(), method);
  if (std::holds_alternative<gflm::KnownLinkMethod>(method) && !model.fit.converged)
    gflm::fail(gflm::ErrorKind::kConvergence, "full-data fit did not converge");
  const Eigen::VectorXd p_hat = gflm::predict_mean(model, scores, method);
  const gflm::LooPredictions loo = gflm::loo_predictions(prep.fit_data, prep.basis, p, method, o.threads);
  const gflm::Misclassification tab =
      gflm::tabulate_misclassification(prep.fit_data.responses(), loo.predictions, o.threshold);

  std::ofstream pr(dir / "probabilities.csv");
  pr << std::setprecision(17) << "id,response,p_hat,class,p_loo,class_loo\n";
  for (std::size_t i = 0; i < prep.raw.n(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    pr << prep.raw.ids()[i] << ',' << prep.raw.responses()[r] << ',' << p_hat[r] << ','
       << (p_hat[r] >= o.threshold ? 1 : 0) << ',';
    if (std::isnan(loo.predictions[r]))
      pr << "NA,NA\n";
    else
      pr << loo.predictions[r] << ',' << (loo.predictions[r] >= o.threshold ? 1 : 0) << '\n';
  }

  std::ofstream mc(dir / "misclassification.csv");
  mc << std::setprecision(17) << "class,n,misclassified,rate\n"
     << "0," << tab.n_class0 << ',' << tab.wrong_class0 << ',' << tab.rate_class0 << '\n'
     << "1," << tab.n_class1 << ',' << tab.wrong_class1 << ',' << tab.rate_class1 << '\n'
     << "all," << tab.n_class0 + tab.n_class1 << ',' << tab.wrong_class0 + tab.wrong_class1 << ',' << tab.overall
     << '\n';

  report.update(fit_summary(model.fit, method));
  report["basis"] = o.basis;
  report["threshold"] = o.threshold;
  report["loo"] = {{"rate_class0", tab.rate_class0}, {"rate_class1", tab.rate_class1}, {"overall", tab.overall},
                   {"n_class0", tab.n_class0},       {"n_class1", tab.n_class1},       {"skipped", tab.skipped}};
  write_json(report, dir / "report.json");
  write_manifest(app, "classify", o, dir, {"probabilities.csv", "misclassification.csv", "report.json"});
  std::cout << std::fixed << std::setprecision(1) << "p = " << p << "; leave-one-out misclassification: class 0 "
            << 100.0 * tab.rate_class0 << "%, class 1 " << 100.0 * tab.rate_class1 << "%, overall "
            << 100.0 * tab.overall << "%";
  if (tab.skipped) std::cout << " (" << tab.skipped << " folds skipped)";
  std::cout << '\n';
  return kOk;
}

gflm::LinkKind generator_kind(const std::string& tag) {
  if (tag == "logit") return gflm::LinkKind::kLogit;
  if (tag == "cloglog") return gflm::LinkKind::kCloglog;
  gflm::fail(gflm::ErrorKind::kConfig, "generating link must be logit or cloglog, got '" + tag + "'");
}

int cmd_simulate(const CLI::App& app, const Options& o) {
  const fs::path dir = out_dir(o);
  gflm::SimDesign d;
  d.n = o.sizes.front();
  d.n_components = o.components;
  d.coeff_scale = o.deltas.front();
  d.link_true = generator_kind(o.link_true);
  d.link_fit = o.link;
  d.n_reps = o.reps;
  d.seed = o.seed;
  d.grid_size = o.grid_size;
  d.validate();

  gflm::ExperimentOptions opt;
  opt.p = o.p.value_or(3);
  opt.basis_mode = gflm::parse_sim_basis_mode(o.sim_basis);
  opt.select_p_by_aic = o.aic_per_rep;
  opt.solver = o.solver;
  opt.threads = o.threads;
  if (o.link == "spqr") opt.spqr = std::get<gflm::SpqrMethod>(make_method(o)).config;

  std::vector<std::string> outputs;
  json summary;
  summary["experiment"] = o.experiment;
  std::ofstream csv;
  auto open_csv = [&](const std::string& name) {
    csv = std::ofstream(dir / name);
    csv << std::setprecision(17);
    outputs.push_back(name);
  };

  if (o.experiment == "sample") {
    gflm::write_dataset_csv(gflm::generate_sample(d, 0), (dir / "sample.csv").string());
    outputs.push_back("sample.csv");
  } else if (o.experiment == "power") {
    const gflm::PowerResult r = gflm::power_experiment(d, o.deltas, o.sizes, o.alpha, opt);
    open_csv("power.csv");
    csv << "delta,n,rate,completed,failed\n";
    for (const auto& c : r.cells)
      csv << c.delta << ',' << c.n << ',' << c.rejection_rate << ',' << c.completed << ',' << c.failed << '\n';
    open_csv("power_reps.csv");
    csv << "delta,n,rep,p,T,reject,failed\n";
    for (const auto& x : r.reps)
      csv << x.delta << ',' << x.n << ',' << x.rep << ',' << x.p << ',' << x.statistic << ',' << x.reject << ','
          << x.failed << '\n';
    for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
    summary["warnings"] = r.warnings;
  } else if (o.experiment == "calibration") {
    if (o.gamma != "empirical" && o.gamma != "population")
      gflm::fail(gflm::ErrorKind::kConfig, "gamma must be empirical or population");
    const auto g = o.gamma == "population" ? gflm::CalibrationGamma::kPopulation : gflm::CalibrationGamma::kEmpirical;
    const gflm::CalibrationResult r = gflm::statistic_calibration(d, opt, g, o.aux_n);
    open_csv("calibration.csv");
    csv << "rep,T\n";
    for (std::size_t k = 0; k < r.statistics.size(); ++k) csv << k << ',' << r.statistics[k] << '\n';
    open_csv("calibration_qq.csv");
    csv << "normal_quantile,T\n";
    for (const auto& [zq, t] : r.qq) csv << zq << ',' << t << '\n';
    summary.update({{"mean", r.mean}, {"sd", r.sd}, {"ks_distance", r.ks_distance}, {"failed", r.failed}});
  } else if (o.experiment == "coverage") {
    const gflm::CoverageResult r = gflm::coverage_experiment(d, o.alpha, opt);
    open_csv("coverage.csv");
    csv << "rep,covered\n";
    for (std::size_t k = 0; k < r.covered.size(); ++k) {
      csv << k << ',';
      if (r.covered[k] < 0)
        csv << "NA\n";
      else
        csv << r.covered[k] << '\n';
    }
    summary.update({{"rate", r.rate}, {"failed", r.failed}, {"alpha", o.alpha}});
  } else if (o.experiment == "misspec") {
    std::vector<gflm::LinkKind> gens;
    for (const auto& g : o.generators) gens.push_back(generator_kind(g));
    const gflm::MisspecResult r = gflm::link_misspec_experiment(d, gens, o.fitters, opt);
    open_csv("misspec_curves.csv");
    csv << "t,truth";
    for (const auto& c : r.cells) csv << ',' << gflm::Link(c.generator).name() << '_' << c.fitter;
    csv << '\n';
    for (std::size_t k = 0; k < r.grid.size(); ++k) {
      csv << r.grid[k] << ',' << r.truth[k];
      for (const auto& c : r.cells) csv << ',' << c.mean_curve[k];
      csv << '\n';
    }
    open_csv("misspec_errors.csv");
    csv << "generator,fitter,rep,l2_error\n";
    json cells = json::array();
    for (const auto& c : r.cells) {
      const std::string gname(gflm::Link(c.generator).name());
      for (std::size_t k = 0; k < c.rep_errors.size(); ++k)
        csv << gname << ',' << c.fitter << ',' << k << ',' << c.rep_errors[k] << '\n';
      cells.push_back({{"generator", gname}, {"fitter", c.fitter}, {"mean_l2_error", c.mean_l2_error},
                       {"failed", c.failed}});
    }
    summary["cells"] = cells;
  } else {
    gflm::fail(gflm::ErrorKind::kConfig, "unknown experiment '" + o.experiment + "'");
  }
  csv.close();
  write_json(summary, dir / "summary.json");
  outputs.push_back("summary.json");
  write_manifest(app, "simulate", o, dir, outputs);
  std::cout << summary.dump() << '\n';
  return kOk;
}

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--data", o.data, "Wide CSV: id, response, curve values");
  sub->add_option("--grid", o.grid, "Grid points file (otherwise read from the CSV header)");
  sub->add_option("--basis", o.basis, "fourier:J or empirical:J")->capture_default_str();
  sub->add_option("--p", o.p, "Truncation order (default: chosen by --criterion)");
  sub->add_option("--criterion", o.criterion, "aic or bic")->capture_default_str()->check(CLI::IsMember({"aic", "bic"}));
}

void add_fit_knobs(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config, "key = value file of long option names; flags override it");
  sub->add_option("--link", o.link, "logit, cloglog, identity, log or spqr")->capture_default_str();
  sub->add_option("--alpha", o.alpha, "Test / band level")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  sub->add_option("--tol", o.solver.tol, "IWLS tolerance")->capture_default_str();
  sub->add_option("--max-iter", o.solver.max_iter, "IWLS iteration cap")->capture_default_str();
  sub->add_option("--clamp-eps", o.solver.clamp_eps, "Mean clamp epsilon")->capture_default_str();
  sub->add_option("--bandwidth", o.bandwidth, "SPQR bandwidth (0: rule of thumb)")->capture_default_str();
  sub->add_option("--degree", o.degree, "Local polynomial degree")->capture_default_str();
  sub->add_option("--kernel", o.kernel, "epanechnikov or gaussian")->capture_default_str();
  sub->add_option("--max-outer", o.max_outer, "SPQR outer iteration cap")->capture_default_str();
  sub->add_option("--spqr-tol", o.spqr_tol, "SPQR tolerance")->capture_default_str();
  sub->add_option("--inner-steps", o.inner_steps, "Scoring steps per SPQR outer step")->capture_default_str();
  sub->add_option("--derivative-scale", o.derivative_scale, "SPQR: g' bandwidth as a multiple of h")
      ->capture_default_str();
  sub->add_option("--variance-floor", o.variance_floor, "SPQR: variance floor as a fraction of var(y)")
      ->capture_default_str();
  sub->add_option("--seed", o.seed, "Seed (recorded in the manifest)")->capture_default_str();
  sub->add_option("--threads", o.threads, "Worker threads")->capture_default_str();
  sub->add_option("--out", o.out, "Output directory")->capture_default_str();
}

// Fills options the command line left unset from the config file.
void apply_config(CLI::App* sub, const std::string& path) {
  for (const auto& [key, value] : gflm::read_config(path)) {
    const std::string name = key.rfind("--", 0) == 0 ? key : "--" + key;
    CLI::Option* opt = sub->get_option_no_throw(name);
    if (opt == nullptr || name == "--config")
      gflm::fail(gflm::ErrorKind::kConfig, path + ": unknown key '" + key + "' for " + sub->get_name());
    if (opt->count() > 0) continue;
    for (const auto& v : CLI::detail::split(value, opt->get_delimiter() ? opt->get_delimiter() : '\n'))
      opt->add_result(CLI::detail::trim_copy(v));
    try {
      opt->run_callback();
    } catch (const CLI::Error& e) {
      gflm::fail(gflm::ErrorKind::kConfig, path + ": " + key + ": " + e.what());
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generalized functional linear models"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  Options o;
  o.threads = gflm::default_thread_count();

  CLI::App* fit = app.add_subcommand("fit", "Fit the p-truncated model, write coefficients, beta(t), Gamma");
  CLI::App* classify = app.add_subcommand("classify", "Fit, predict and tabulate leave-one-out misclassification");
  CLI::App* select = app.add_subcommand("select", "Tabulate C(p) and choose p");
  CLI::App* band = app.add_subcommand("band", "Simultaneous confidence band for beta(t)");
  for (CLI::App* sub : {fit, classify, select, band}) {
    add_common(sub, o);
    add_fit_knobs(sub, o);
  }
  classify->add_option("--threshold", o.threshold, "Classification threshold")->capture_default_str();

  CLI::App* sim = app.add_subcommand("simulate", "Monte Carlo experiments on the Fourier process");
  add_fit_knobs(sim, o);
  sim->add_option("--experiment", o.experiment, "power, calibration, coverage, misspec or sample")
      ->capture_default_str()
      ->check(CLI::IsMember({"power", "calibration", "coverage", "misspec", "sample"}));
  sim->add_option("--n", o.sizes, "Sample size(s)")->delimiter(',')->capture_default_str();
  sim->add_option("--delta", o.deltas, "Coefficient scale(s)")->delimiter(',')->capture_default_str();
  sim->add_option("--reps", o.reps, "Replications")->capture_default_str();
  sim->add_option("--components", o.components, "Number of Fourier components")->capture_default_str();
  sim->add_option("--grid-size", o.grid_size, "Grid points on [0, 1]")->capture_default_str();
  sim->add_option("--link-true", o.link_true, "Generating link (logit or cloglog)")->capture_default_str();
  sim->add_option("--p", o.p, "Truncation order (default 3)");
  sim->add_option("--sim-basis", o.sim_basis, "fourier (true basis) or eigen (estimated)")->capture_default_str();
  sim->add_flag("--aic-per-rep", o.aic_per_rep, "Choose p by AIC in every replication");
  sim->add_option("--gamma", o.gamma, "Calibration Gamma: empirical or population")->capture_default_str();
  sim->add_option("--aux-n", o.aux_n, "Auxiliary sample size for the population Gamma")->capture_default_str();
  sim->add_option("--generators", o.generators, "Generating links for misspec")->delimiter(',')->capture_default_str();
  sim->add_option("--fitters", o.fitters, "Fitting methods for misspec")->delimiter(',')->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    if (!o.config.empty()) apply_config(app.get_subcommands().front(), o.config);
    if (*fit) return cmd_fit(app, o);
    if (*classify) return cmd_classify(app, o);
    if (*select) return cmd_select(app, o);
    if (*band) return cmd_band(app, o);
    return cmd_simulate(app, o);
  } catch (const gflm::Error& e) {
    std::cerr << "error (" << gflm::to_string(e.kind()) << "): " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDataError;
  }
}
