#include "gflm/link.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gflm/error.hpp"

namespace gflm {

namespace {

// y log(y / mu) with the 0 log 0 = 0 convention.
double ylogy_over(double y, double mu) {
  return y == 0.0 ? 0.0 : y * std::log(y / mu);
}

}  // namespace

Link::Link(LinkKind kind, double clamp_eps) : kind_(kind), eps_(clamp_eps) {
  if (!(clamp_eps > 0.0 && clamp_eps < 0.5)) fail(ErrorKind::kConfig, "clamp epsilon must lie in (0, 0.5)");
}

Link Link::parse(std::string_view name, double clamp_eps) {
  if (name == "logit") return Link(LinkKind::kLogit, clamp_eps);
  if (name == "cloglog") return Link(LinkKind::kCloglog, clamp_eps);
  if (name == "identity") return Link(LinkKind::kIdentity, clamp_eps);
  if (name == "log") return Link(LinkKind::kLog, clamp_eps);
  fail(ErrorKind::kConfig, "unknown link '" + std::string(name) + "'");
}

std::string_view Link::name() const {
  switch (kind_) {
    case LinkKind::kLogit: return "logit";
    case LinkKind::kCloglog: return "cloglog";
    case LinkKind::kIdentity: return "identity";
    case LinkKind::kLog: return "log";
  }
  return "logit";
}

double Link::mean(double eta) const {
  switch (kind_) {
    case LinkKind::kLogit:
      if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
      return std::exp(eta) / (1.0 + std::exp(eta));
    case LinkKind::kCloglog: return std::exp(-std::exp(-eta));
    case LinkKind::kIdentity: return eta;
    case LinkKind::kLog: return std::exp(eta);
  }
  return eta;
}

double Link::mean_deriv(double eta) const {
  switch (kind_) {
    case LinkKind::kLogit: {
      const double e = std::exp(-std::abs(eta));
      return e / ((1.0 + e) * (1.0 + e));
    }
    case LinkKind::kCloglog: return std::exp(-eta - std::exp(-eta));
    case LinkKind::kIdentity: return 1.0;
    case LinkKind::kLog: return std::exp(eta);
  }
  return 1.0;
}

double Link::clamp_mean(double mu) const {
  switch (kind_) {
    case LinkKind::kLogit:
    case LinkKind::kCloglog: return std::clamp(mu, eps_, 1.0 - eps_);
    case LinkKind::kLog: return std::max(mu, eps_);
    case LinkKind::kIdentity: return mu;
  }
  return mu;
}

double Link::variance(double mu) const {
  switch (kind_) {
    case LinkKind::kLogit:
    case LinkKind::kCloglog: {
      const double m = clamp_mean(mu);
      return m * (1.0 - m);
    }
    case LinkKind::kIdentity: return 1.0;
    case LinkKind::kLog: return clamp_mean(mu);
  }
  return 1.0;
}

double Link::inverse(double mu) const {
  const double m = clamp_mean(mu);
  switch (kind_) {
    case LinkKind::kLogit: return std::log(m / (1.0 - m));
    case LinkKind::kCloglog: return -std::log(-std::log(m));
    case LinkKind::kIdentity: return m;
    case LinkKind::kLog: return std::log(m);
  }
  return m;
}

double Link::unit_deviance(double y, double mu) const {
  switch (kind_) {
    case LinkKind::kLogit:
    case LinkKind::kCloglog: {
      const double m = clamp_mean(mu);
      return 2.0 * (ylogy_over(y, m) + ylogy_over(1.0 - y, 1.0 - m));
    }
    case LinkKind::kIdentity: return (y - mu) * (y - mu);
    case LinkKind::kLog: {
      const double m = clamp_mean(mu);
      return 2.0 * (ylogy_over(y, m) - (y - m));
    }
  }
  return 0.0;
}

ResponseKind Link::natural_response() const {
  switch (kind_) {
    case LinkKind::kLogit:
    case LinkKind::kCloglog: return ResponseKind::kBinary;
    case LinkKind::kLog: return ResponseKind::kCount;
    case LinkKind::kIdentity: return ResponseKind::kContinuous;
  }
  return ResponseKind::kContinuous;
}

}  // namespace gflm
