#pragma once

// Error bounds of the direct method, as truncated series in the control
// function and, for the power and constant families, in closed form.
//
//   forward,  quasi:   K/(n-1)^2 * sum_{i>=0} K^i Phi((n-1)^i x) / (n-1)^{2i}
//   backward, quasi:   1/(n-1)^2 * sum_{i>=1} K^i (n-1)^{2i} Phi(x / (n-1)^i)
//   forward,  p-norm:  1/(n-1)^2 * [sum_{i>=0} Phi((n-1)^i x)^p / (n-1)^{2ip}]^{1/p}
//   backward, p-norm:  1/(n-1)^2 * [sum_{i>=1} (n-1)^{2ip} Phi(x / (n-1)^i)^p]^{1/p}

#include <cmath>
#include <functional>
#include <optional>
#include <string>

#include "qstab/control.hpp"
#include "qstab/error.hpp"

namespace qstab {

enum class Direction { forward, backward };
enum class BoundSetting { quasi, p_banach };

inline const char* to_string(Direction d) { return d == Direction::forward ? "forward" : "backward"; }

/// Largest dilation factor (n-1)^i the engine will form.
inline constexpr double kDilationGuard = 1e100;

struct SeriesBound {
  double truncated = 0.0;
  std::optional<double> closed_form;
  int terms = 0;

  double value() const { return closed_form ? *closed_form : truncated; }
};

struct ClosedFormParams {
  BoundSetting setting = BoundSetting::quasi;
  int n = 3;
  double K = 1.0;  // quasi setting
  double p = 1.0;  // p-norm setting
  ControlFunction::Variant variant = ControlFunction::Variant::power;
  double amplitude = 1.0;  // epsilon or theta
  double r = 1.0;          // power exponent
  double norm_x = 1.0;
};

struct ClosedFormBound {
  double value = 0.0;
  Direction branch = Direction::forward;
  /// The bracket that must stay positive: (n-1)^2 - K(n-1)^r, (n-1)^r - K(n-1)^2,
  /// (n-1)^2 - K, or the p-norm analogues before the 1/p root.
  double denominator = 0.0;
};

/// Quasi-norm power-family branch condition: forward iff r - 2 < -log_{n-1} K,
/// backward iff r - 2 > log_{n-1} K. Between the two there is no bound.
inline std::optional<Direction> power_branch(int n, double K, double r) {
  const double logk = std::log(K) / std::log(n - 1.0);
  if (r - 2.0 < -logk) return Direction::forward;
  if (r - 2.0 > logk) return Direction::backward;
  return std::nullopt;
}

/// Closed-form bounds for the power and constant control families. Parameters
/// outside every convergent branch are rejected with ErrorKind::open_problem.
inline ClosedFormBound closed_form_bounds(const ClosedFormParams& prm) {
  require(prm.n >= 3, ErrorKind::invalid_argument, "n must be >= 3");
  require(prm.amplitude >= 0.0, ErrorKind::invalid_argument, "amplitude must be >= 0");
  require(prm.norm_x >= 0.0, ErrorKind::invalid_argument, "norm must be >= 0");
  const double n = prm.n;
  const double b = n - 1.0;
  const double lead = (n + 2.0) * prm.amplitude / n;
  ClosedFormBound out;

  if (prm.setting == BoundSetting::quasi) {
    require(prm.K >= 1.0, ErrorKind::invalid_argument, "modulus of concavity must be >= 1");
    const double K = prm.K;
    if (prm.variant == ControlFunction::Variant::constant) {
      out.denominator = b * b - K;
      if (!(K < b * b)) {
        throw Error(ErrorKind::open_problem, "constant control needs K < (n-1)^2; got K = " + std::to_string(K) +
                                                 ", (n-1)^2 = " + std::to_string(b * b));
      }
      out.value = lead * K / out.denominator;
      return out;
    }
    require(prm.variant == ControlFunction::Variant::power, ErrorKind::invalid_argument,
            "closed forms exist only for power and constant control");
    const auto branch = power_branch(prm.n, K, prm.r);
    if (!branch) {
      out.denominator = b * b - K * std::pow(b, prm.r);
      throw Error(ErrorKind::open_problem, "r = " + std::to_string(prm.r) + " lies in |r - 2| <= log_{n-1} K = " +
                                               std::to_string(std::log(K) / std::log(b)));
    }
    out.branch = *branch;
    out.denominator = *branch == Direction::forward ? b * b - K * std::pow(b, prm.r) : std::pow(b, prm.r) - K * b * b;
    out.value = lead * K * std::pow(prm.norm_x, prm.r) / out.denominator;
    return out;
  }

  require(prm.p > 0.0 && prm.p <= 1.0, ErrorKind::invalid_argument, "p must lie in (0, 1]");
  const double p = prm.p;
  if (prm.variant == ControlFunction::Variant::constant) {
    out.denominator = std::pow(b, 2.0 * p) - 1.0;
    out.value = lead / std::pow(out.denominator, 1.0 / p);
    return out;
  }
  require(prm.variant == ControlFunction::Variant::power, ErrorKind::invalid_argument,
          "closed forms exist only for power and constant control");
  if (prm.r == 2.0) throw Error(ErrorKind::open_problem, "p-norm power bound excludes r = 2");
  out.branch = prm.r < 2.0 ? Direction::forward : Direction::backward;
  out.denominator = out.branch == Direction::forward ? std::pow(b, 2.0 * p) - std::pow(b, prm.r * p)
                                                     : std::pow(b, prm.r * p) - std::pow(b, 2.0 * p);
  out.value = lead * std::pow(prm.norm_x, prm.r) / std::pow(out.denominator, 1.0 / p);
  return out;
}

namespace detail {

struct SeriesShape {
  BoundSetting setting;
  Direction direction;
  double K;  // quasi
  double p;  // p-norm
};

/// Geometric ratio of the series terms for the families that have one.
inline std::optional<double> known_ratio(const ControlFunction& phi, int n, const SeriesShape& s) {
  const double b = n - 1.0;
  const bool fwd = s.direction == Direction::forward;
  switch (phi.variant()) {
    case ControlFunction::Variant::power: {
      const double r = phi.exponent();
      if (s.setting == BoundSetting::quasi) return fwd ? s.K * std::pow(b, r - 2.0) : s.K * std::pow(b, 2.0 - r);
      return fwd ? std::pow(b, (r - 2.0) * s.p) : std::pow(b, (2.0 - r) * s.p);
    }
    case ControlFunction::Variant::constant:
      if (s.setting == BoundSetting::quasi) return fwd ? s.K / (b * b) : s.K * b * b;
      return fwd ? std::pow(b, -2.0 * s.p) : std::pow(b, 2.0 * s.p);
    case ControlFunction::Variant::custom: return std::nullopt;
  }
  return std::nullopt;
}

inline std::optional<double> closed_form_for(const ControlFunction& phi, int n, const SeriesShape& s, double norm_x) {
  if (phi.variant() == ControlFunction::Variant::custom) return std::nullopt;
  const double b = n - 1.0;
  const double lead = (n + 2.0) * phi.amplitude() / n;
  const bool fwd = s.direction == Direction::forward;
  if (phi.variant() == ControlFunction::Variant::constant) {
    if (!fwd) return std::nullopt;
    if (s.setting == BoundSetting::quasi) return lead * s.K / (b * b - s.K);
    return lead / std::pow(std::pow(b, 2.0 * s.p) - 1.0, 1.0 / s.p);
  }
  const double r = phi.exponent();
  const double xr = std::pow(norm_x, r);
  if (s.setting == BoundSetting::quasi) {
    const double den = fwd ? b * b - s.K * std::pow(b, r) : std::pow(b, r) - s.K * b * b;
    return lead * s.K * xr / den;
  }
  const double den = fwd ? std::pow(b, 2.0 * s.p) - std::pow(b, r * s.p) : std::pow(b, r * s.p) - std::pow(b, 2.0 * s.p);
  return lead * xr / std::pow(den, 1.0 / s.p);
}

inline SeriesBound series_bound(const ControlFunction& phi, int n, const SeriesShape& s, const ModulePoint& x,
                                double series_tol, const QuasiNormSpec& norm) {
  require(n >= 3, ErrorKind::invalid_argument, "n must be >= 3");
  require(series_tol > 0.0, ErrorKind::invalid_argument, "series tolerance must be > 0");
  if (s.setting == BoundSetting::quasi) {
    require(s.K >= 1.0, ErrorKind::invalid_argument, "modulus of concavity must be >= 1");
  } else {
    require(s.p > 0.0 && s.p <= 1.0, ErrorKind::invalid_argument, "p must lie in (0, 1]");
  }
  const bool fwd = s.direction == Direction::forward;
  const double b = n - 1.0;
  const auto ratio = known_ratio(phi, n, s);
  if (ratio && !(*ratio < 1.0)) {
    throw Error(ErrorKind::divergent, std::string(to_string(s.direction)) + " series has term ratio " +
                                          std::to_string(*ratio) + " >= 1");
  }

  const double prefactor = s.setting == BoundSetting::quasi && fwd ? s.K / (b * b) : 1.0 / (b * b);
  const double root = s.setting == BoundSetting::quasi ? 1.0 : 1.0 / s.p;
  auto finish = [&](double acc) { return prefactor * std::pow(acc, root); };

  // term i of the inner sum (before the p-th root and the prefactor)
  auto term = [&](int i, double& dilation) {
    const double scale = fwd ? std::pow(b, i) : std::pow(b, -i);
    dilation = std::pow(b, i);
    const double cap = phi_cap(phi, n, scale * x, norm);
    if (s.setting == BoundSetting::quasi) {
      const double kpow = std::pow(s.K, i);
      return fwd ? kpow * cap / std::pow(b, 2.0 * i) : kpow * std::pow(b, 2.0 * i) * cap;
    }
    return fwd ? std::pow(cap, s.p) / std::pow(b, 2.0 * i * s.p) : std::pow(b, 2.0 * i * s.p) * std::pow(cap, s.p);
  };

  SeriesBound out;
  double acc = 0.0;
  double prev = -1.0;
  for (int i = fwd ? 0 : 1;; ++i) {
    double dilation = 0.0;
    const double t = term(i, dilation);
    if (dilation > kDilationGuard) {
      throw Error(ErrorKind::divergent, "series did not reach tolerance before the dilation guard");
    }
    acc += t;
    ++out.terms;
    double rho = ratio ? *ratio : (prev > 0.0 ? t / prev : 1.0);
    prev = t;
    if (t == 0.0) {
      if (ratio || out.terms > 2) break;
      continue;
    }
    if (rho < 1.0) {
      const double tail = t * rho / (1.0 - rho);
      if (finish(acc + tail) - finish(acc) <= series_tol) break;
    }
  }
  out.truncated = finish(acc);
  out.closed_form = closed_form_for(phi, n, s, norm_eval(norm.with_dim(x.rank()), x));
  return out;
}

}  // namespace detail

inline SeriesBound series_bound_forward(const ControlFunction& phi, int n, double K, const ModulePoint& x,
                                        double series_tol, const QuasiNormSpec& norm) {
  return detail::series_bound(phi, n, {BoundSetting::quasi, Direction::forward, K, 1.0}, x, series_tol, norm);
}

inline SeriesBound series_bound_backward(const ControlFunction& phi, int n, double K, const ModulePoint& x,
                                         double series_tol, const QuasiNormSpec& norm) {
  return detail::series_bound(phi, n, {BoundSetting::quasi, Direction::backward, K, 1.0}, x, series_tol, norm);
}

inline SeriesBound series_bound_forward_p(const ControlFunction& phi, int n, double p, const ModulePoint& x,
                                          double series_tol, const QuasiNormSpec& norm) {
  return detail::series_bound(phi, n, {BoundSetting::p_banach, Direction::forward, 1.0, p}, x, series_tol, norm);
}

inline SeriesBound series_bound_backward_p(const ControlFunction& phi, int n, double p, const ModulePoint& x,
                                           double series_tol, const QuasiNormSpec& norm) {
  return detail::series_bound(phi, n, {BoundSetting::p_banach, Direction::backward, 1.0, p}, x, series_tol, norm);
}

/// Dispatch on setting and direction.
inline SeriesBound series_bound(const ControlFunction& phi, int n, BoundSetting setting, Direction direction,
                                const QuasiNormSpec& norm, const ModulePoint& x, double series_tol) {
  return detail::series_bound(phi, n, {setting, direction, norm.K(), norm.p()}, x, series_tol, norm);
}

}  // namespace qstab
