#include "gflm/basis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "gflm/error.hpp"

namespace gflm {

std::string_view to_string(BasisKind kind) {
  return kind == BasisKind::kFourier ? "fourier" : "empirical";
}

Basis::Basis(BasisKind kind, TimeGrid grid, WeightMeasure weight, Eigen::MatrixXd functions,
             std::optional<Eigen::VectorXd> eigenvalues)
    : kind_(kind),
      grid_(std::move(grid)),
      weight_(std::move(weight)),
      functions_(std::move(functions)),
      eigenvalues_(std::move(eigenvalues)) {
  if (functions_.cols() < 1) fail(ErrorKind::kInvalidInput, "basis needs at least one function");
  if (static_cast<std::size_t>(functions_.rows()) != grid_.size())
    fail(ErrorKind::kAlignment, "basis functions do not match grid length");
  if (weight_.size() != grid_.size()) fail(ErrorKind::kAlignment, "weight length does not match grid length");
  if (!functions_.allFinite()) fail(ErrorKind::kInvalidInput, "basis functions contain non-finite values");

  const Eigen::VectorXd q = quadrature_weights(grid_, weight_);
  const Eigen::MatrixXd gram = functions_.transpose() * q.asDiagonal() * functions_;
  const Eigen::MatrixXd dev = gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols());
  if (dev.cwiseAbs().maxCoeff() > kGramTolerance) {
    std::ostringstream os;
    os << "basis is not orthonormal: max Gram deviation " << dev.cwiseAbs().maxCoeff();
    fail(ErrorKind::kInvalidInput, os.str());
  }

  if (eigenvalues_) {
    const auto& ev = *eigenvalues_;
    if (ev.size() != functions_.cols()) fail(ErrorKind::kAlignment, "eigenvalue count does not match basis size");
    for (Eigen::Index j = 0; j < ev.size(); ++j) {
      if (ev[j] < -1e-10) fail(ErrorKind::kInvalidInput, "negative eigenvalue in basis");
      if (j > 0 && ev[j] > ev[j - 1]) fail(ErrorKind::kInvalidInput, "eigenvalues are not nonincreasing");
    }
  }
}

Curve Basis::function(std::size_t j) const {
  if (j < 1 || j > size()) fail(ErrorKind::kRange, "basis function index out of range");
  return Curve(functions_.col(static_cast<Eigen::Index>(j - 1)));
}

Basis Basis::truncated(std::size_t p) const {
  if (p < 1 || p > size()) fail(ErrorKind::kRange, "truncation order out of range");
  const auto cols = static_cast<Eigen::Index>(p);
  std::optional<Eigen::VectorXd> ev;
  if (eigenvalues_) ev = eigenvalues_->head(cols);
  return Basis(kind_, grid_, weight_, functions_.leftCols(cols), std::move(ev));
}

ScoreMatrix::ScoreMatrix(Eigen::MatrixXd scores) : scores_(std::move(scores)) {
  if (scores_.rows() < 1) fail(ErrorKind::kInvalidInput, "score matrix needs at least one row");
  if (scores_.cols() < 2) fail(ErrorKind::kInvalidInput, "score matrix needs at least one slope column");
  if (!(scores_.col(0).array() == 1.0).all()) fail(ErrorKind::kInvalidInput, "score column 0 must be all ones");
  if (!scores_.allFinite()) fail(ErrorKind::kInvalidInput, "score matrix contains non-finite values");
}

ScoreMatrix ScoreMatrix::from_slopes(const Eigen::MatrixXd& slopes) {
  Eigen::MatrixXd s(slopes.rows(), slopes.cols() + 1);
  s.col(0).setOnes();
  s.rightCols(slopes.cols()) = slopes;
  return ScoreMatrix(std::move(s));
}

ScoreMatrix ScoreMatrix::subset(const std::vector<std::size_t>& rows) const {
  Eigen::MatrixXd s(static_cast<Eigen::Index>(rows.size()), scores_.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= n()) fail(ErrorKind::kRange, "score row out of range");
    s.row(static_cast<Eigen::Index>(r)) = scores_.row(static_cast<Eigen::Index>(rows[r]));
  }
  return ScoreMatrix(std::move(s));
}

ScoreMatrix ScoreMatrix::truncated(std::size_t p) const {
  if (p < 1 || p > this->p()) fail(ErrorKind::kRange, "truncation order out of range");
  return ScoreMatrix(scores_.leftCols(static_cast<Eigen::Index>(p + 1)));
}

Basis fourier_basis(std::size_t J, const TimeGrid& grid) {
  if (J < 1) fail(ErrorKind::kRange, "Fourier basis needs J >= 1");
  if (grid.size() < 4 * J + 1) {
    std::ostringstream os;
    os << "grid of " << grid.size() << " points is too coarse for " << J << " Fourier functions (need "
       << 4 * J + 1 << ")";
    fail(ErrorKind::kResolution, os.str());
  }
  const auto m = static_cast<Eigen::Index>(grid.size());
  const double a = grid.front();
  const double len = grid.length();
  const double scale = std::sqrt(2.0 / len);
  Eigen::MatrixXd f(m, static_cast<Eigen::Index>(J));
  for (Eigen::Index k = 0; k < m; ++k) {
    const double u = (grid[static_cast<std::size_t>(k)] - a) / len;
    for (std::size_t j = 1; j <= J; ++j)
      f(k, static_cast<Eigen::Index>(j - 1)) = scale * std::sin(std::numbers::pi * static_cast<double>(j) * u);
  }
  return Basis(BasisKind::kFourier, grid, WeightMeasure::uniform(grid.size()), std::move(f));
}

Eigen::MatrixXd estimate_covariance(const FunctionalDataset& ds) {
  const Eigen::RowVectorXd means = ds.curves().colwise().mean();
  if (means.cwiseAbs().maxCoeff() > 1e-6)
    fail(ErrorKind::kPrecondition, "covariance estimation requires centered curves (column mean exceeds 1e-6)");
  const auto m = static_cast<Eigen::Index>(ds.m());
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(m, m);
  K.selfadjointView<Eigen::Lower>().rankUpdate(ds.curves().transpose(), 1.0 / static_cast<double>(ds.n()));
  K.triangularView<Eigen::StrictlyUpper>() = K.transpose();
  return K;
}

Basis eigenbasis(const Eigen::MatrixXd& K, const TimeGrid& grid, const WeightMeasure& w, std::size_t J) {
  const auto m = static_cast<Eigen::Index>(grid.size());
  if (K.rows() != m || K.cols() != m) fail(ErrorKind::kAlignment, "kernel size does not match grid");
  if (J < 1 || J > grid.size()) fail(ErrorKind::kRange, "requested eigenbasis size out of range");
  if (!K.allFinite()) fail(ErrorKind::kInvalidInput, "kernel contains non-finite values");
  const double scale = std::max(1.0, K.cwiseAbs().maxCoeff());
  if ((K - K.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale)
    fail(ErrorKind::kInvalidInput, "kernel is not symmetric");

  const Eigen::VectorXd q = quadrature_weights(grid, w);
  const Eigen::VectorXd root = q.cwiseSqrt();
  Eigen::MatrixXd M = root.asDiagonal() * K * root.asDiagonal();
  M = 0.5 * (M + M.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(M);
  if (solver.info() != Eigen::Success) fail(ErrorKind::kNumeric, "symmetric eigensolver failed");
  const Eigen::VectorXd& values = solver.eigenvalues();  // ascending
  const Eigen::MatrixXd& vectors = solver.eigenvectors();

  const double top = values[m - 1];
  if (!(top > 0.0)) fail(ErrorKind::kInvalidInput, "kernel has no positive eigenvalue");
  std::size_t keep = 0;
  while (keep < J && values[m - 1 - static_cast<Eigen::Index>(keep)] > 1e-10 * top) ++keep;

  const auto cols = static_cast<Eigen::Index>(keep);
  Eigen::MatrixXd funcs(m, cols);
  Eigen::VectorXd lambdas(cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    const Eigen::Index src = m - 1 - j;
    const double lambda = values[src];
    const Eigen::VectorXd u = vectors.col(src);
    Eigen::VectorXd rho(m);
    for (Eigen::Index k = 0; k < m; ++k) rho[k] = root[k] > 0.0 ? u[k] / root[k] : 0.0;
    // Nystrom extension at points carrying no quadrature mass.
    for (Eigen::Index k = 0; k < m; ++k) {
      if (root[k] == 0.0) rho[k] = K.row(k).dot(q.cwiseProduct(rho)) / lambda;
    }
    const double integral = q.dot(rho);
    bool flip = integral < 0.0;
    if (std::abs(integral) < 1e-10) {
      Eigen::Index arg = 0;
      rho.cwiseAbs().maxCoeff(&arg);
      flip = rho[arg] < 0.0;
    }
    if (flip) rho = -rho;
    funcs.col(j) = rho;
    lambdas[j] = lambda;
  }
  return Basis(BasisKind::kEmpirical, grid, w, std::move(funcs), std::move(lambdas));
}

ScoreMatrix project_scores(const FunctionalDataset& ds, const Basis& basis, std::size_t p) {
  if (p < 1 || p > basis.size()) {
    std::ostringstream os;
    os << "order p = " << p << " outside 1.." << basis.size();
    fail(ErrorKind::kRange, os.str());
  }
  if (!(ds.grid() == basis.grid())) fail(ErrorKind::kAlignment, "dataset and basis use different grids");
  const Eigen::VectorXd q = quadrature_weights(ds.grid(), ds.weight());
  const Eigen::MatrixXd slopes =
      ds.curves() * q.asDiagonal() * basis.functions().leftCols(static_cast<Eigen::Index>(p));
  return ScoreMatrix::from_slopes(slopes);
}

std::pair<double, Curve> reconstruct(const Eigen::VectorXd& coeffs, const Basis& basis) {
  if (coeffs.size() < 1) fail(ErrorKind::kInvalidInput, "coefficient vector is empty");
  const auto p = static_cast<std::size_t>(coeffs.size() - 1);
  if (p > basis.size()) fail(ErrorKind::kRange, "more coefficients than basis functions");
  Eigen::VectorXd curve = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis.grid().size()));
  if (p > 0) curve = basis.functions().leftCols(static_cast<Eigen::Index>(p)) * coeffs.tail(static_cast<Eigen::Index>(p));
  return {coeffs[0], Curve(std::move(curve))};
}

}  // namespace gflm
