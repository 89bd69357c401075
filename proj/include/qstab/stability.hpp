#pragma once

// Direct-method construction of the quadratic map near an approximately
// quadratic f, and comparison of the observed deviation with the theoretical
// bound.
//
// Forward scheme:  Q(x) = lim g((n-1)^m x) / (n-1)^{2m},  g = f + (n-1) f(0) / 2
// Backward scheme: Q(x) = lim (n-1)^{2m} f(x / (n-1)^m),   requires f(0) = 0

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "qstab/algebra.hpp"
#include "qstab/bounds.hpp"
#include "qstab/control.hpp"
#include "qstab/equations.hpp"
#include "qstab/mapping.hpp"
#include "qstab/quasi_norm.hpp"

namespace qstab {

inline constexpr double kZeroTol = 1e-12;

namespace detail {

inline double magnitude(const ModulePoint& p) {
  double s = 0.0;
  for (const auto& c : p.coords()) s += c.frobenius();
  return s;
}

inline double dilation(int n, int m) {
  const double s = std::pow(n - 1.0, m);
  if (s > kDilationGuard) {
    throw Error(ErrorKind::overflow, "(n-1)^m = " + std::to_string(s) + " exceeds the dilation guard");
  }
  return s;
}

}  // namespace detail

/// The m-th iterate of the chosen scheme at x.
inline ModulePoint hyers_iterate(const Mapping& f, int n, int m, const ModulePoint& x, Direction direction) {
  require(n >= 3, ErrorKind::invalid_argument, "n must be >= 3");
  require(m >= 0, ErrorKind::invalid_argument, "iteration index must be >= 0");
  const double s = detail::dilation(n, m);
  const ModulePoint f0 = f(ModulePoint::zero(x.algebra_dim(), x.rank()));
  ModulePoint out;
  if (direction == Direction::forward) {
    const ModulePoint g = f(s * x) + ((n - 1.0) / 2.0) * f0;
    out = (1.0 / (s * s)) * g;
  } else {
    require(detail::magnitude(f0) <= kZeroTol, ErrorKind::invalid_argument, "backward scheme requires f(0) = 0");
    out = (s * s) * f((1.0 / s) * x);
  }
  require(out.is_finite(), ErrorKind::overflow, "iterate is not finite");
  return out;
}

/// f shifted as the forward scheme prescribes: f(x) + (n-1) f(0) / 2.
inline ModulePoint shifted(const Mapping& f, int n, const ModulePoint& x) {
  return f(x) + ((n - 1.0) / 2.0) * f(ModulePoint::zero(x.algebra_dim(), x.rank()));
}

struct StabilityConfig {
  int n = 3;
  QuasiNormSpec norm = QuasiNormSpec::euclidean(1);  // domain norm; the codomain reuses its family
  Direction direction = Direction::forward;
  BoundSetting setting = BoundSetting::quasi;
  int m_max = 80;
  double tol = 1e-9;
  double series_tol = 1e-13;
  std::vector<ModulePoint> probes;
  ScalarField field = ScalarField::real;
  std::uint64_t seed = 1;
  int consistency_trials = 200;
  double sample_box = 10.0;

  void validate() const {
    require(n >= 3, ErrorKind::invalid_argument, "n must be >= 3");
    require(m_max >= 1, ErrorKind::invalid_argument, "m_max must be >= 1");
    require(tol > 0.0 && series_tol > 0.0, ErrorKind::invalid_argument, "tolerances must be > 0");
    require(!probes.empty(), ErrorKind::invalid_argument, "at least one probe is required");
    for (const auto& p : probes) {
      require(p.rank() == norm.dim(), ErrorKind::dimension_mismatch, "probe rank does not match the norm");
      require(p.algebra_dim() == probes.front().algebra_dim(), ErrorKind::dimension_mismatch,
              "probes must share one algebra dimension");
    }
  }
};

struct LimitTrace {
  ModulePoint value;
  std::vector<ModulePoint> iterates;  // iterates[m] for m = 0..iterations
  std::vector<double> gaps;           // gaps[m-1] = ||iterate_m - iterate_{m-1}||
  std::vector<double> tails;          // theoretical distance to the limit after step m, when phi is known
  int iterations = 0;
  bool converged = false;
};

struct ProbeReport {
  ModulePoint probe;
  double norm_x = 0.0;
  LimitTrace trace;
  double deviation = 0.0;  // ||g(x) - Q_est(x)|| (forward) or ||f(x) - Q_est(x)|| (backward)
  double bound = 0.0;
  double margin = 0.0;
  bool within_bound = false;
};

struct StabilityReport {
  std::vector<ProbeReport> probes;
  int phi_violations = 0;  // sampled tuples where ||D_u f|| exceeded phi
  bool all_within_bound = true;
  bool all_converged = true;

  bool ok() const { return all_within_bound && all_converged; }
};

/// Distance from the m-th iterate to the limit implied by the Cauchy estimate:
/// forward  bound((n-1)^m x) / (n-1)^{2m}
/// backward (n-1)^{2m} bound(x / (n-1)^m)
inline double tail_bound(const ControlFunction& phi, const StabilityConfig& cfg, const ModulePoint& x, int m) {
  const double s = detail::dilation(cfg.n, m);
  const ModulePoint y = cfg.direction == Direction::forward ? s * x : (1.0 / s) * x;
  const SeriesBound b = series_bound(phi, cfg.n, cfg.setting, cfg.direction, cfg.norm, y, cfg.series_tol);
  return cfg.direction == Direction::forward ? b.value() / (s * s) : b.value() * s * s;
}

/// Runs the scheme until successive iterates differ by less than tol (and the
/// theoretical tail is below tol when phi is given) or m_max is reached.
inline LimitTrace estimate_limit(const Mapping& f, const StabilityConfig& cfg, const ModulePoint& x,
                                 const ControlFunction* phi = nullptr) {
  LimitTrace tr;
  tr.iterates.push_back(hyers_iterate(f, cfg.n, 0, x, cfg.direction));
  const QuasiNormSpec out_norm = cfg.norm.with_dim(tr.iterates.front().rank());
  for (int m = 1; m <= cfg.m_max; ++m) {
    ModulePoint it = hyers_iterate(f, cfg.n, m, x, cfg.direction);
    const double gap = norm_eval(out_norm, it - tr.iterates.back());
    tr.gaps.push_back(gap);
    tr.iterates.push_back(std::move(it));
    tr.iterations = m;
    bool tail_ok = true;
    if (phi != nullptr) {
      const double tail = tail_bound(*phi, cfg, x, m);
      tr.tails.push_back(tail);
      tail_ok = tail < cfg.tol;
    }
    if (gap < cfg.tol && tail_ok) {
      tr.converged = true;
      break;
    }
  }
  tr.value = tr.iterates.back();
  return tr;
}

/// Counts sampled tuples (with sampled unitaries) where ||D_u f|| > phi.
inline int count_phi_violations(const Mapping& f, const ControlFunction& phi, const StabilityConfig& cfg, int k) {
  BoxSampler sampler({k, cfg.norm.dim(), cfg.field}, cfg.seed ^ 0x5a5a5a5aULL, cfg.sample_box);
  int bad = 0;
  for (int t = 0; t < cfg.consistency_trials; ++t) {
    const auto xs = sampler.tuple(cfg.n);
    const ModulePoint r = approximate_remainder(f, sampler.unitary(), cfg.n, xs);
    if (norm_eval(cfg.norm.with_dim(r.rank()), r) > phi(xs, cfg.norm) * (1.0 + 1e-12) + 1e-12) ++bad;
  }
  return bad;
}

inline StabilityReport stabilize(const Mapping& f, const ControlFunction& phi, const StabilityConfig& cfg) {
  cfg.validate();
  // Rejects divergent parameter sets before any iteration.
  (void)series_bound(phi, cfg.n, cfg.setting, cfg.direction, cfg.norm, cfg.probes.front(), cfg.series_tol);

  StabilityReport rep;
  rep.phi_violations = count_phi_violations(f, phi, cfg, cfg.probes.front().algebra_dim());
  for (const auto& x : cfg.probes) {
    ProbeReport pr;
    pr.probe = x;
    pr.norm_x = norm_eval(cfg.norm, x);
    pr.trace = estimate_limit(f, cfg, x, &phi);
    const ModulePoint base = cfg.direction == Direction::forward ? shifted(f, cfg.n, x) : f(x);
    pr.deviation = norm_eval(cfg.norm.with_dim(base.rank()), base - pr.trace.value);
    pr.bound = series_bound(phi, cfg.n, cfg.setting, cfg.direction, cfg.norm, x, cfg.series_tol).value();
    pr.margin = pr.bound - pr.deviation;
    pr.within_bound = pr.margin >= -cfg.tol;
    rep.all_within_bound = rep.all_within_bound && pr.within_bound;
    rep.all_converged = rep.all_converged && pr.trace.converged;
    rep.probes.push_back(std::move(pr));
  }
  return rep;
}

/// Tuples the fits always include: x in one slot (and -x), zeros elsewhere, for
/// every anchor and every dilation of it the iteration visits.
inline std::vector<std::vector<ModulePoint>> anchor_tuples(const StabilityConfig& cfg, int dilations) {
  std::vector<std::vector<ModulePoint>> out;
  for (const auto& x : cfg.probes) {
    for (int m = 0; m <= dilations; ++m) {
      const double s = std::pow(cfg.n - 1.0, m);
      if (s > kDilationGuard) break;
      const ModulePoint y = cfg.direction == Direction::forward ? s * x : (1.0 / s) * x;
      for (const ModulePoint& v : {y, ModulePoint(-y)}) {
        for (int slot = 0; slot < cfg.n; ++slot) {
          std::vector<ModulePoint> xs(static_cast<std::size_t>(cfg.n), ModulePoint::zero(x.algebra_dim(), x.rank()));
          xs[static_cast<std::size_t>(slot)] = v;
          out.push_back(std::move(xs));
        }
      }
    }
  }
  return out;
}

/// Smallest epsilon with ||D_u f(xs)|| <= epsilon * sum ||x_i||^r on every
/// sampled tuple and every anchor tuple (identity unitary on anchors).
inline double fit_power_epsilon(const Mapping& f, double r, const StabilityConfig& cfg, int trials) {
  const int k = cfg.probes.front().algebra_dim();
  BoxSampler sampler({k, cfg.norm.dim(), cfg.field}, cfg.seed, cfg.sample_box);
  const ControlFunction unit = ControlFunction::power(1.0, r);
  double best = 0.0;
  auto score = [&](const std::vector<ModulePoint>& xs, const Unitary& u) {
    const ModulePoint res = approximate_remainder(f, u, cfg.n, xs);
    const double denom = unit(xs, cfg.norm);
    if (denom > 0.0) best = std::max(best, norm_eval(cfg.norm.with_dim(res.rank()), res) / denom);
  };
  for (int t = 0; t < trials; ++t) {
    const auto xs = sampler.tuple(cfg.n);
    score(xs, sampler.unitary());
  }
  // Dilations past (n-1)^20 lose the residual to cancellation in f itself.
  for (const auto& xs : anchor_tuples(cfg, std::min(cfg.m_max, 20))) score(xs, Unitary::identity(k));
  return best;
}

/// Largest ||D_u f|| over sampled and anchor tuples.
inline double fit_constant_theta(const Mapping& f, const StabilityConfig& cfg, int trials) {
  const int k = cfg.probes.front().algebra_dim();
  BoxSampler sampler({k, cfg.norm.dim(), cfg.field}, cfg.seed, cfg.sample_box);
  double best = 0.0;
  auto score = [&](const std::vector<ModulePoint>& xs, const Unitary& u) {
    const ModulePoint res = approximate_remainder(f, u, cfg.n, xs);
    best = std::max(best, norm_eval(cfg.norm.with_dim(res.rank()), res));
  };
  for (int t = 0; t < trials; ++t) {
    const auto xs = sampler.tuple(cfg.n);
    score(xs, sampler.unitary());
  }
  for (const auto& xs : anchor_tuples(cfg, std::min(cfg.m_max, 8))) score(xs, Unitary::identity(k));
  return best;
}

enum class CovarianceKind { conjugation, hat };

struct CovarianceReport {
  double max_relative_deviation = 0.0;
  int samples = 0;
  bool pass = false;
};

/// max over probes x and sampled unitaries u of
///   ||Q_est(ux) - u Q_est(x) u*|| / (1 + ||Q_est(x)||)       (conjugation)
///   ||Q_est(ux) - hat(u) Q_est(x)|| / (1 + ||Q_est(x)||)     (hat, any mode)
/// where Q_est is the converged forward limit.
inline CovarianceReport verify_unitary_covariance(const Mapping& f, const StabilityConfig& cfg, int unitary_samples,
                                                  CovarianceKind kind = CovarianceKind::conjugation,
                                                  HatMode mode = HatMode::avg) {
  cfg.validate();
  require(unitary_samples >= 1, ErrorKind::invalid_argument, "need at least one unitary sample");
  StabilityConfig fwd = cfg;
  fwd.direction = Direction::forward;
  const int k = cfg.probes.front().algebra_dim();
  BoxSampler sampler({k, cfg.norm.dim(), cfg.field}, cfg.seed, cfg.sample_box);
  CovarianceReport rep;
  for (const auto& x : cfg.probes) {
    const ModulePoint qx = estimate_limit(f, fwd, x).value;
    const QuasiNormSpec out_norm = cfg.norm.with_dim(qx.rank());
    const double scale = 1.0 + norm_eval(out_norm, qx);
    for (int s = 0; s < unitary_samples; ++s) {
      const Unitary u = sampler.unitary();
      const ModulePoint qux = estimate_limit(f, fwd, x.act(u.element())).value;
      const ModulePoint expected = kind == CovarianceKind::conjugation ? qx.conjugate_by(u.element())
                                                                       : qx.act(hat(u.element(), mode));
      rep.max_relative_deviation = std::max(rep.max_relative_deviation, norm_eval(out_norm, qux - expected) / scale);
      ++rep.samples;
    }
  }
  rep.pass = rep.max_relative_deviation <= cfg.tol;
  return rep;
}

}  // namespace qstab
