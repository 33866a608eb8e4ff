#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <utility>

#include <Eigen/Dense>

#include "gflm/curve.hpp"

namespace gflm {

enum class BasisKind { kFourier, kEmpirical };

std::string_view to_string(BasisKind kind);

/// Ordered orthonormal system rho_1..rho_J sampled on a grid.
///
/// Column j-1 of functions() holds rho_j. Eigenvalues are present only for
/// an empirical eigenbasis and are sorted nonincreasing. Construction checks
/// that the Gram matrix under the trapezoid inner product is the identity
/// within 1e-6.
class Basis {
 public:
  Basis(BasisKind kind, TimeGrid grid, WeightMeasure weight, Eigen::MatrixXd functions,
        std::optional<Eigen::VectorXd> eigenvalues = std::nullopt);

  BasisKind kind() const { return kind_; }
  const TimeGrid& grid() const { return grid_; }
  const WeightMeasure& weight() const { return weight_; }
  const Eigen::MatrixXd& functions() const { return functions_; }
  const std::optional<Eigen::VectorXd>& eigenvalues() const { return eigenvalues_; }
  std::size_t size() const { return static_cast<std::size_t>(functions_.cols()); }

  /// rho_j for j in 1..size().
  Curve function(std::size_t j) const;

  /// First p functions (and eigenvalues).
  Basis truncated(std::size_t p) const;

  static constexpr double kGramTolerance = 1e-6;

 private:
  BasisKind kind_;
  TimeGrid grid_;
  WeightMeasure weight_;
  Eigen::MatrixXd functions_;
  std::optional<Eigen::VectorXd> eigenvalues_;
};

/// n x (p+1) design of projection scores; column 0 is the intercept slot (all ones).
class ScoreMatrix {
 public:
  explicit ScoreMatrix(Eigen::MatrixXd scores);

  /// Prepends the column of ones to an n x p matrix of slope scores.
  static ScoreMatrix from_slopes(const Eigen::MatrixXd& slopes);

  const Eigen::MatrixXd& matrix() const { return scores_; }
  std::size_t n() const { return static_cast<std::size_t>(scores_.rows()); }
  std::size_t p() const { return static_cast<std::size_t>(scores_.cols() - 1); }
  auto slopes() const { return scores_.rightCols(scores_.cols() - 1); }

  ScoreMatrix subset(const std::vector<std::size_t>& rows) const;
  /// Keeps the intercept and the first p slope columns.
  ScoreMatrix truncated(std::size_t p) const;

 private:
  Eigen::MatrixXd scores_;
};

/// phi_j(t) = sqrt(2) sin(pi j t), j = 1..J, mapped affinely onto the grid's domain.
Basis fourier_basis(std::size_t J, const TimeGrid& grid);

/// Sample covariance kernel (1/n) sum_i X_i(s) X_i(t) of a centered dataset (m x m).
Eigen::MatrixXd estimate_covariance(const FunctionalDataset& ds);

/// Top-J eigenfunctions of the integral operator with kernel K under dw.
///
/// The operator is discretized as W^{1/2} K W^{1/2} with W the trapezoid
/// weights, so eigenfunctions come out orthonormal under the same quadrature.
/// Eigenvalues below 1e-10 times the largest are dropped, which can return
/// fewer than J functions. Signs are fixed so that the integral of rho_j is
/// nonnegative (largest-magnitude entry positive when that integral vanishes).
Basis eigenbasis(const Eigen::MatrixXd& K, const TimeGrid& grid, const WeightMeasure& w, std::size_t J);

/// scores[i][j] = <X_i, rho_j> for j = 1..p; column 0 is 1.
ScoreMatrix project_scores(const FunctionalDataset& ds, const Basis& basis, std::size_t p);

/// Returns beta_0 and the curve sum_{j=1..p} beta_j rho_j(t).
std::pair<double, Curve> reconstruct(const Eigen::VectorXd& coeffs, const Basis& basis);

}  // namespace gflm
