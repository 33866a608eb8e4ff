#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace gflm {

/// Strictly increasing sampling points shared by every curve of a dataset.
class TimeGrid {
 public:
  explicit TimeGrid(Eigen::VectorXd points);
  explicit TimeGrid(const std::vector<double>& points);

  static TimeGrid uniform(double first, double last, std::size_t m);

  std::size_t size() const { return static_cast<std::size_t>(points_.size()); }
  double operator[](std::size_t k) const { return points_[static_cast<Eigen::Index>(k)]; }
  double front() const { return points_[0]; }
  double back() const { return points_[points_.size() - 1]; }
  double length() const { return back() - front(); }
  const Eigen::VectorXd& points() const { return points_; }

  bool operator==(const TimeGrid& other) const;

 private:
  Eigen::VectorXd points_;
};

/// Density v(t) of the integration measure dw(t) = v(t) dt at the grid points.
class WeightMeasure {
 public:
  explicit WeightMeasure(Eigen::VectorXd values);

  /// v(t) = 1 on the whole grid.
  static WeightMeasure uniform(std::size_t m);

  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }
  const Eigen::VectorXd& values() const { return values_; }

 private:
  Eigen::VectorXd values_;
};

/// One sampled function on a TimeGrid. Values must be finite.
class Curve {
 public:
  explicit Curve(Eigen::VectorXd values);

  static Curve zeros(std::size_t m) { return Curve(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m))); }

  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }
  double operator[](std::size_t k) const { return values_[static_cast<Eigen::Index>(k)]; }
  const Eigen::VectorXd& values() const { return values_; }

 private:
  Eigen::VectorXd values_;
};

enum class ResponseKind { kContinuous, kBinary, kCount };

std::string_view to_string(ResponseKind kind);
ResponseKind parse_response_kind(std::string_view text);

/// n predictor curves sampled on a common grid, plus their scalar responses.
///
/// Curves are stored row-wise: row i of curves() holds X_i at every grid point.
class FunctionalDataset {
 public:
  FunctionalDataset(TimeGrid grid, WeightMeasure weight, Eigen::MatrixXd curves,
                    Eigen::VectorXd responses, ResponseKind kind,
                    std::vector<std::string> ids = {});

  const TimeGrid& grid() const { return grid_; }
  const WeightMeasure& weight() const { return weight_; }
  const Eigen::MatrixXd& curves() const { return curves_; }
  const Eigen::VectorXd& responses() const { return responses_; }
  ResponseKind response_kind() const { return kind_; }
  const std::vector<std::string>& ids() const { return ids_; }

  std::size_t n() const { return static_cast<std::size_t>(curves_.rows()); }
  std::size_t m() const { return grid_.size(); }
  Curve curve(std::size_t i) const;

  /// Copy with rows listed in `rows`, in that order.
  FunctionalDataset subset(const std::vector<std::size_t>& rows) const;
  /// Copy with every curve replaced (same grid, weight and responses).
  FunctionalDataset with_curves(Eigen::MatrixXd curves) const;

 private:
  TimeGrid grid_;
  WeightMeasure weight_;
  Eigen::MatrixXd curves_;
  Eigen::VectorXd responses_;
  ResponseKind kind_;
  std::vector<std::string> ids_;
};

/// Composite trapezoid weights on the grid multiplied by v; sum(q .* f) integrates f dw.
Eigen::VectorXd quadrature_weights(const TimeGrid& grid, const WeightMeasure& w);

/// Trapezoid approximation of the integral of f(t) g(t) v(t) dt.
double inner_product(const Curve& f, const Curve& g, const WeightMeasure& w, const TimeGrid& grid);

/// Subtracts the pointwise sample mean; returns the centered dataset and the mean curve.
std::pair<FunctionalDataset, Curve> center_dataset(const FunctionalDataset& ds);

/// Linear interpolation of curves sampled on `from` onto `to`, constant beyond the ends.
/// Lossy: features finer than the source spacing are not recovered.
Eigen::VectorXd resample_linear(const TimeGrid& from, const Eigen::VectorXd& values, const TimeGrid& to);

}  // namespace gflm
