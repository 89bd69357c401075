#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qstab/algebra.hpp"
#include "qstab/error.hpp"
#include "qstab/quasi_norm.hpp"

namespace qstab {

/// The perturbation budget phi(x_1..x_n) that bounds ||D_u f||.
///   power(eps, r)   eps * sum_i ||x_i||^r
///   constant(theta) theta
///   custom          any callable on the tuple
class ControlFunction {
 public:
  enum class Variant { power, constant, custom };
  using Fn = std::function<double(std::span<const ModulePoint>)>;

  static ControlFunction power(double epsilon, double r) {
    require(epsilon >= 0.0 && std::isfinite(epsilon), ErrorKind::invalid_argument, "epsilon must be >= 0");
    require(r > 0.0 && std::isfinite(r), ErrorKind::invalid_argument, "power exponent r must be > 0");
    return ControlFunction(Variant::power, epsilon, r, {});
  }
  static ControlFunction constant(double theta) {
    require(theta >= 0.0 && std::isfinite(theta), ErrorKind::invalid_argument, "theta must be >= 0");
    return ControlFunction(Variant::constant, theta, 0.0, {});
  }
  static ControlFunction custom(Fn fn) { return ControlFunction(Variant::custom, 0.0, 0.0, std::move(fn)); }

  Variant variant() const { return variant_; }
  /// epsilon for power, theta for constant.
  double amplitude() const { return amplitude_; }
  double exponent() const { return exponent_; }

  double operator()(std::span<const ModulePoint> xs, const QuasiNormSpec& norm) const {
    switch (variant_) {
      case Variant::power: {
        double acc = 0.0;
        for (const auto& x : xs) acc += std::pow(norm_eval(norm.with_dim(x.rank()), x), exponent_);
        return amplitude_ * acc;
      }
      case Variant::constant: return amplitude_;
      case Variant::custom: return fn_(xs);
    }
    return 0.0;
  }

 private:
  ControlFunction(Variant v, double amplitude, double exponent, Fn fn)
      : variant_(v), amplitude_(amplitude), exponent_(exponent), fn_(std::move(fn)) {}

  Variant variant_;
  double amplitude_;
  double exponent_;
  Fn fn_;
};

/// phi on the tuple that is zero except for x in slot i (1-based).
inline double phi_component(const ControlFunction& phi, int n, int i, const ModulePoint& x, const QuasiNormSpec& norm) {
  require(i >= 1 && i <= n, ErrorKind::invalid_argument,
          "slot " + std::to_string(i) + " outside 1.." + std::to_string(n));
  std::vector<ModulePoint> xs(static_cast<std::size_t>(n), ModulePoint::zero(x.algebra_dim(), x.rank()));
  xs[static_cast<std::size_t>(i - 1)] = x;
  return phi(xs, norm);
}

/// min over adjacent slot pairs of phi_i(x) + phi_{i+1}(x).
inline double phi_tilde(const ControlFunction& phi, int n, const ModulePoint& x, const QuasiNormSpec& norm) {
  require(n >= 2, ErrorKind::invalid_argument, "phi_tilde needs n >= 2");
  double best = std::numeric_limits<double>::infinity();
  double prev = phi_component(phi, n, 1, x, norm);
  for (int i = 1; i < n; ++i) {
    const double next = phi_component(phi, n, i + 1, x, norm);
    best = std::min(best, prev + next);
    prev = next;
  }
  return best;
}

/// |(n^2 + 1) - (i + 1) n|, the weight of phi_tilde in slot i of Phi.
inline int phi_cap_weight(int n, int i) { return std::abs((n * n + 1) - (i + 1) * n); }

/// Phi(x) = min_i { phi_i(-x) + |(n^2+1) - (i+1)n| / n * phi_tilde(x) }.
inline double phi_cap(const ControlFunction& phi, int n, const ModulePoint& x, const QuasiNormSpec& norm) {
  require(n >= 3, ErrorKind::invalid_argument, "Phi needs n >= 3");
  const double tilde = phi_tilde(phi, n, x, norm);
  const ModulePoint neg = -x;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= n; ++i) {
    best = std::min(best, phi_component(phi, n, i, neg, norm) + phi_cap_weight(n, i) / static_cast<double>(n) * tilde);
  }
  return best;
}

}  // namespace qstab
