#pragma once

#include <string_view>

#include "gflm/curve.hpp"

namespace gflm {

enum class LinkKind { kLogit, kCloglog, kIdentity, kLog };

/// A fully specified link g (mapping the linear predictor to the mean), its
/// derivative, and the variance function of the matching response family.
///
///   logit     g(x) = exp(x) / (1 + exp(x))   variance mu (1 - mu)
///   cloglog   g(x) = exp(-exp(-x))           variance mu (1 - mu)
///   identity  g(x) = x                       variance 1
///   log       g(x) = exp(x)                  variance mu
///
/// The cloglog form is the reflected one, mapping large x to 1.
/// Binomial means are clipped to [eps, 1 - eps] inside the variance so that
/// it stays bounded away from zero; Poisson means are floored at eps.
class Link {
 public:
  explicit Link(LinkKind kind, double clamp_eps = 1e-10);

  static Link parse(std::string_view name, double clamp_eps = 1e-10);

  LinkKind kind() const { return kind_; }
  std::string_view name() const;
  double clamp_eps() const { return eps_; }

  double mean(double eta) const;
  double mean_deriv(double eta) const;
  double variance(double mu) const;
  /// g^{-1}(mu), with mu first clipped into the open range of g.
  double inverse(double mu) const;
  /// mu clipped into [eps, 1 - eps] (binomial) or [eps, inf) (Poisson).
  double clamp_mean(double mu) const;

  /// Contribution of one observation to the deviance, 2 * integral_mu^y (y - u) / V(u) du.
  double unit_deviance(double y, double mu) const;

  /// Response family implied by the variance function.
  ResponseKind natural_response() const;

 private:
  LinkKind kind_;
  double eps_;
};

}  // namespace gflm
