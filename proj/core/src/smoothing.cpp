#include "gflm/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "gflm/error.hpp"

namespace gflm {

std::string_view to_string(KernelKind kind) {
  return kind == KernelKind::kEpanechnikov ? "epanechnikov" : "gaussian";
}

KernelKind parse_kernel(std::string_view name) {
  if (name == "epanechnikov") return KernelKind::kEpanechnikov;
  if (name == "gaussian") return KernelKind::kGaussian;
  fail(ErrorKind::kConfig, "unknown kernel '" + std::string(name) + "'");
}

namespace {

double kernel_weight(KernelKind kind, double u) {
  if (kind == KernelKind::kEpanechnikov) return std::abs(u) < 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
  return std::exp(-0.5 * u * u);
}

// Sorted copy of the data so compact kernels only touch their window.
struct SortedData {
  std::vector<double> x;
  std::vector<double> y;
};

SortedData sort_by_x(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(x.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return x[a] < x[b]; });
  SortedData s;
  s.x.reserve(order.size());
  s.y.reserve(order.size());
  for (auto i : order) {
    s.x.push_back(x[i]);
    s.y.push_back(y[i]);
  }
  return s;
}

// One local fit at x0 with bandwidth h; false when the local system is deficient.
bool fit_at(const SortedData& d, double x0, double h, const SmootherConfig& cfg, int deriv, double& out) {
  std::size_t lo = 0;
  std::size_t hi = d.x.size();
  if (cfg.kernel == KernelKind::kEpanechnikov) {
    lo = static_cast<std::size_t>(std::upper_bound(d.x.begin(), d.x.end(), x0 - h) - d.x.begin());
    hi = static_cast<std::size_t>(std::lower_bound(d.x.begin(), d.x.end(), x0 + h) - d.x.begin());
  }
  const int order = cfg.degree + 1;
  // Moments of the scaled offset u = (x - x0) / h.
  double s[5] = {0, 0, 0, 0, 0};
  double t[3] = {0, 0, 0};
  int positive = 0;
  for (std::size_t i = lo; i < hi; ++i) {
    const double u = (d.x[i] - x0) / h;
    const double w = kernel_weight(cfg.kernel, u);
    if (w <= 0.0) continue;
    ++positive;
    double up = 1.0;
    for (int k = 0; k <= 2 * cfg.degree; ++k) {
      s[k] += w * up;
      if (k < order) t[k] += w * up * d.y[i];
      up *= u;
    }
  }
  if (positive < order) return false;
  Eigen::MatrixXd a(order, order);
  Eigen::VectorXd b(order);
  for (int r = 0; r < order; ++r) {
    b[r] = t[r];
    for (int c = 0; c < order; ++c) a(r, c) = s[r + c];
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  lu.setThreshold(1e-10);
  if (lu.rank() < order) return false;
  const Eigen::VectorXd coef = lu.solve(b);
  out = deriv == 0 ? coef[0] : coef[1] / h;
  return std::isfinite(out);
}

}  // namespace

SmoothResult local_poly_fit(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& at,
                            const SmootherConfig& cfg, int deriv) {
  if (x.size() != y.size()) fail(ErrorKind::kAlignment, "smoother inputs differ in length");
  if (!(cfg.bandwidth > 0.0) || !std::isfinite(cfg.bandwidth))
    fail(ErrorKind::kConfig, "smoother bandwidth must be positive");
  if (cfg.degree != 1 && cfg.degree != 2) fail(ErrorKind::kConfig, "smoother degree must be 1 or 2");
  if (deriv != 0 && deriv != 1) fail(ErrorKind::kConfig, "smoother derivative order must be 0 or 1");
  if (!x.allFinite() || !y.allFinite()) fail(ErrorKind::kNumeric, "smoother inputs contain non-finite values");

  const SortedData d = sort_by_x(x, y);
  SmoothResult res;
  res.values.resize(at.size());
  for (Eigen::Index k = 0; k < at.size(); ++k) {
    double h = cfg.bandwidth;
    double value = 0.0;
    bool ok = fit_at(d, at[k], h, cfg, deriv, value);
    for (int attempt = 0; !ok && attempt < 5; ++attempt) {
      h *= 2.0;
      ok = fit_at(d, at[k], h, cfg, deriv, value);
    }
    if (!ok) {
      std::ostringstream os;
      os << "insufficient local data at " << at[k] << " even with bandwidth " << h;
      fail(ErrorKind::kSmoothing, os.str());
    }
    if (h != cfg.bandwidth) ++res.inflated_points;
    res.values[k] = value;
  }
  return res;
}

Eigen::VectorXd pool_adjacent_violators(const Eigen::VectorXd& values, const Eigen::VectorXd& weights) {
  if (values.size() != weights.size()) fail(ErrorKind::kAlignment, "PAVA inputs differ in length");
  struct Block {
    double mean;
    double weight;
    Eigen::Index count;
  };
  std::vector<Block> blocks;
  blocks.reserve(static_cast<std::size_t>(values.size()));
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    blocks.push_back({values[i], weights[i], 1});
    while (blocks.size() > 1 && blocks[blocks.size() - 2].mean > blocks.back().mean) {
      Block top = blocks.back();
      blocks.pop_back();
      Block& prev = blocks.back();
      const double w = prev.weight + top.weight;
      prev.mean = w > 0.0 ? (prev.mean * prev.weight + top.mean * top.weight) / w : 0.5 * (prev.mean + top.mean);
      prev.weight = w;
      prev.count += top.count;
    }
  }
  Eigen::VectorXd out(values.size());
  Eigen::Index pos = 0;
  for (const auto& b : blocks) {
    out.segment(pos, b.count).setConstant(b.mean);
    pos += b.count;
  }
  return out;
}

double rule_of_thumb_bandwidth(const Eigen::VectorXd& x) {
  const auto n = static_cast<double>(x.size());
  if (x.size() < 2) fail(ErrorKind::kPrecondition, "bandwidth rule needs at least two points");
  const double mean = x.mean();
  const double sd = std::sqrt((x.array() - mean).square().sum() / (n - 1.0));
  return 1.2 * sd * std::pow(n, -0.2);
}

}  // namespace gflm
