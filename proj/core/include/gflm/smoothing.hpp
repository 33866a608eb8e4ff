#pragma once

#include <string_view>

#include <Eigen/Dense>

namespace gflm {

enum class KernelKind { kEpanechnikov, kGaussian };

std::string_view to_string(KernelKind kind);
KernelKind parse_kernel(std::string_view name);

struct SmootherConfig {
  double bandwidth = 0.0;  // <= 0 selects the rule-of-thumb default where one applies
  int degree = 1;          // 1 = local linear, 2 = local quadratic
  KernelKind kernel = KernelKind::kEpanechnikov;
};

struct SmoothResult {
  Eigen::VectorXd values;
  int inflated_points = 0;  // evaluation points that needed a wider window
};

/// Kernel-weighted local polynomial regression of y on x, evaluated at `at`.
///
/// deriv = 0 returns the fitted value, deriv = 1 the fitted slope. Where
/// fewer than degree + 1 points get positive weight (or the local system is
/// singular) the bandwidth is doubled, at most five times, before throwing
/// kSmoothing.
SmoothResult local_poly_fit(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& at,
                            const SmootherConfig& cfg, int deriv);

inline Eigen::VectorXd local_poly_smooth(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                         const Eigen::VectorXd& at, const SmootherConfig& cfg, int deriv) {
  return local_poly_fit(x, y, at, cfg, deriv).values;
}

/// Weighted least-squares nondecreasing fit (pool adjacent violators).
Eigen::VectorXd pool_adjacent_violators(const Eigen::VectorXd& values, const Eigen::VectorXd& weights);

/// 1.2 * sd(x) * n^{-1/5}.
double rule_of_thumb_bandwidth(const Eigen::VectorXd& x);

}  // namespace gflm
