#include "gflm/curve.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gflm/error.hpp"

namespace gflm {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kAlignment: return "alignment";
    case ErrorKind::kInvalidInput: return "invalid_input";
    case ErrorKind::kPrecondition: return "precondition";
    case ErrorKind::kRange: return "range";
    case ErrorKind::kResolution: return "resolution";
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kNumeric: return "numeric";
    case ErrorKind::kRankDeficient: return "rank_deficient";
    case ErrorKind::kSeparation: return "separation";
    case ErrorKind::kConvergence: return "convergence";
    case ErrorKind::kSmoothing: return "smoothing";
    case ErrorKind::kDegenerateLink: return "degenerate_link";
    case ErrorKind::kConditioning: return "conditioning";
    case ErrorKind::kSelection: return "selection";
  }
  return "unknown";
}

namespace {

bool all_finite(const Eigen::Ref<const Eigen::VectorXd>& v) {
  return v.allFinite();
}

}  // namespace

TimeGrid::TimeGrid(Eigen::VectorXd points) : points_(std::move(points)) {
  if (points_.size() < 2) fail(ErrorKind::kInvalidInput, "time grid needs at least 2 points");
  if (!all_finite(points_)) fail(ErrorKind::kInvalidInput, "time grid contains non-finite points");
  for (Eigen::Index k = 0; k + 1 < points_.size(); ++k) {
    if (!(points_[k + 1] > points_[k])) {
      std::ostringstream os;
      os << "time grid not strictly increasing at index " << k + 1;
      fail(ErrorKind::kInvalidInput, os.str());
    }
  }
}

TimeGrid::TimeGrid(const std::vector<double>& points)
    : TimeGrid(Eigen::Map<const Eigen::VectorXd>(points.data(), static_cast<Eigen::Index>(points.size()))) {}

TimeGrid TimeGrid::uniform(double first, double last, std::size_t m) {
  if (m < 2) fail(ErrorKind::kInvalidInput, "time grid needs at least 2 points");
  Eigen::VectorXd pts(static_cast<Eigen::Index>(m));
  const double step = (last - first) / static_cast<double>(m - 1);
  for (std::size_t k = 0; k < m; ++k) pts[static_cast<Eigen::Index>(k)] = first + step * static_cast<double>(k);
  pts[pts.size() - 1] = last;
  return TimeGrid(std::move(pts));
}

bool TimeGrid::operator==(const TimeGrid& other) const {
  return points_.size() == other.points_.size() && points_ == other.points_;
}

WeightMeasure::WeightMeasure(Eigen::VectorXd values) : values_(std::move(values)) {
  if (values_.size() == 0) fail(ErrorKind::kInvalidInput, "weight measure is empty");
  if (!all_finite(values_)) fail(ErrorKind::kInvalidInput, "weight measure contains non-finite values");
  if ((values_.array() < 0.0).any()) fail(ErrorKind::kInvalidInput, "weight measure has negative values");
  if (!(values_.array() > 0.0).any()) fail(ErrorKind::kInvalidInput, "weight measure is identically zero");
}

WeightMeasure WeightMeasure::uniform(std::size_t m) {
  return WeightMeasure(Eigen::VectorXd::Ones(static_cast<Eigen::Index>(m)));
}

Curve::Curve(Eigen::VectorXd values) : values_(std::move(values)) {
  if (!all_finite(values_)) fail(ErrorKind::kInvalidInput, "curve contains non-finite values");
}

std::string_view to_string(ResponseKind kind) {
  switch (kind) {
    case ResponseKind::kContinuous: return "continuous";
    case ResponseKind::kBinary: return "binary";
    case ResponseKind::kCount: return "count";
  }
  return "continuous";
}

ResponseKind parse_response_kind(std::string_view text) {
  if (text == "continuous") return ResponseKind::kContinuous;
  if (text == "binary") return ResponseKind::kBinary;
  if (text == "count") return ResponseKind::kCount;
  fail(ErrorKind::kConfig, "unknown response kind '" + std::string(text) + "'");
}

FunctionalDataset::FunctionalDataset(TimeGrid grid, WeightMeasure weight, Eigen::MatrixXd curves,
                                     Eigen::VectorXd responses, ResponseKind kind,
                                     std::vector<std::string> ids)
    : grid_(std::move(grid)),
      weight_(std::move(weight)),
      curves_(std::move(curves)),
      responses_(std::move(responses)),
      kind_(kind),
      ids_(std::move(ids)) {
  if (curves_.rows() < 1) fail(ErrorKind::kInvalidInput, "dataset needs at least one curve");
  if (static_cast<std::size_t>(curves_.cols()) != grid_.size())
    fail(ErrorKind::kAlignment, "curve length does not match grid length");
  if (weight_.size() != grid_.size()) fail(ErrorKind::kAlignment, "weight length does not match grid length");
  if (responses_.size() != curves_.rows())
    fail(ErrorKind::kAlignment, "number of responses does not match number of curves");
  if (!curves_.allFinite()) fail(ErrorKind::kInvalidInput, "curves contain non-finite values");
  if (!responses_.allFinite()) fail(ErrorKind::kInvalidInput, "responses contain non-finite values");
  for (Eigen::Index i = 0; i < responses_.size(); ++i) {
    const double y = responses_[i];
    if (kind_ == ResponseKind::kBinary && y != 0.0 && y != 1.0) {
      std::ostringstream os;
      os << "binary response expected at row " << i << ", got " << y;
      fail(ErrorKind::kInvalidInput, os.str());
    }
    if (kind_ == ResponseKind::kCount && (y < 0.0 || y != std::floor(y))) {
      std::ostringstream os;
      os << "count response expected at row " << i << ", got " << y;
      fail(ErrorKind::kInvalidInput, os.str());
    }
  }
  if (ids_.empty()) {
    ids_.reserve(n());
    for (std::size_t i = 0; i < n(); ++i) ids_.push_back(std::to_string(i + 1));
  } else if (ids_.size() != n()) {
    fail(ErrorKind::kAlignment, "number of ids does not match number of curves");
  }
}

Curve FunctionalDataset::curve(std::size_t i) const {
  if (i >= n()) fail(ErrorKind::kRange, "curve index out of range");
  return Curve(curves_.row(static_cast<Eigen::Index>(i)).transpose());
}

FunctionalDataset FunctionalDataset::subset(const std::vector<std::size_t>& rows) const {
  Eigen::MatrixXd c(static_cast<Eigen::Index>(rows.size()), curves_.cols());
  Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
  std::vector<std::string> ids;
  ids.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= n()) fail(ErrorKind::kRange, "subset row out of range");
    const auto src = static_cast<Eigen::Index>(rows[r]);
    c.row(static_cast<Eigen::Index>(r)) = curves_.row(src);
    y[static_cast<Eigen::Index>(r)] = responses_[src];
    ids.push_back(ids_[rows[r]]);
  }
  return FunctionalDataset(grid_, weight_, std::move(c), std::move(y), kind_, std::move(ids));
}

FunctionalDataset FunctionalDataset::with_curves(Eigen::MatrixXd curves) const {
  return FunctionalDataset(grid_, weight_, std::move(curves), responses_, kind_, ids_);
}

Eigen::VectorXd quadrature_weights(const TimeGrid& grid, const WeightMeasure& w) {
  if (w.size() != grid.size()) fail(ErrorKind::kAlignment, "weight length does not match grid length");
  const auto m = static_cast<Eigen::Index>(grid.size());
  Eigen::VectorXd q = Eigen::VectorXd::Zero(m);
  const auto& t = grid.points();
  for (Eigen::Index k = 0; k + 1 < m; ++k) {
    const double half = 0.5 * (t[k + 1] - t[k]);
    q[k] += half;
    q[k + 1] += half;
  }
  return q.cwiseProduct(w.values());
}

double inner_product(const Curve& f, const Curve& g, const WeightMeasure& w, const TimeGrid& grid) {
  if (f.size() != grid.size() || g.size() != grid.size())
    fail(ErrorKind::kAlignment, "curve length does not match grid length");
  const Eigen::VectorXd q = quadrature_weights(grid, w);
  return (q.array() * f.values().array() * g.values().array()).sum();
}

std::pair<FunctionalDataset, Curve> center_dataset(const FunctionalDataset& ds) {
  const Eigen::RowVectorXd mean = ds.curves().colwise().mean();
  Eigen::MatrixXd centered = ds.curves().rowwise() - mean;
  return {ds.with_curves(std::move(centered)), Curve(mean.transpose())};
}

Eigen::VectorXd resample_linear(const TimeGrid& from, const Eigen::VectorXd& values, const TimeGrid& to) {
  if (static_cast<std::size_t>(values.size()) != from.size())
    fail(ErrorKind::kAlignment, "values do not match source grid");
  const auto& src = from.points();
  Eigen::VectorXd out(static_cast<Eigen::Index>(to.size()));
  for (std::size_t k = 0; k < to.size(); ++k) {
    const double t = to[k];
    double v;
    if (t <= src[0]) {
      v = values[0];
    } else if (t >= src[src.size() - 1]) {
      v = values[values.size() - 1];
    } else {
      const auto* it = std::upper_bound(src.data(), src.data() + src.size(), t);
      const auto hi = static_cast<Eigen::Index>(it - src.data());
      const auto lo = hi - 1;
      const double frac = (t - src[lo]) / (src[hi] - src[lo]);
      v = values[lo] + frac * (values[hi] - values[lo]);
    }
    out[static_cast<Eigen::Index>(k)] = v;
  }
  return out;
}

}  // namespace gflm
