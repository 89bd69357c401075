#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "qstab/bounds.hpp"
#include "qstab/characterization.hpp"
#include "qstab/control.hpp"
#include "qstab/finite_field.hpp"
#include "qstab/harness/results.hpp"
#include "qstab/harness/scenario.hpp"
#include "qstab/stability.hpp"

namespace qstab::harness {

struct RunResult {
  std::vector<ResultRow> rows;
  std::vector<std::string> summary;
  ExitCode code = ExitCode::ok;

  Status overall() const {
    if (code == ExitCode::bound_violation) return Status::fail;
    for (const auto& r : rows) {
      if (is_rejection(r.status)) return r.status;
    }
    return Status::pass;
  }
};

namespace detail {

inline std::string describe(const ControlFunction& phi) {
  if (phi.variant() == ControlFunction::Variant::constant) return "constant(theta=" + fmt(phi.amplitude()) + ")";
  return "power(epsilon=" + fmt(phi.amplitude()) + ", r=" + fmt(phi.exponent()) + ")";
}

inline ControlFunction build_control(const ControlSpec& c, const Mapping& f, const StabilityConfig& cfg) {
  if (c.variant == ControlFunction::Variant::constant) {
    return ControlFunction::constant(c.amplitude ? *c.amplitude : fit_constant_theta(f, cfg, c.fit_trials));
  }
  return ControlFunction::power(c.amplitude ? *c.amplitude : fit_power_epsilon(f, c.r, cfg, c.fit_trials), c.r);
}

inline Status rejection_status(const Error& e) {
  return e.kind() == ErrorKind::open_problem ? Status::rejected_open_problem : Status::rejected_divergent;
}

inline bool is_rejection_error(const Error& e) {
  return e.kind() == ErrorKind::open_problem || e.kind() == ErrorKind::divergent;
}

/// Classifies (phi, cfg) before iterating: the closed form catches the dead
/// zones, the series catches a scheme run in the wrong direction.
inline void admit(const ControlFunction& phi, const StabilityConfig& cfg) {
  if (phi.variant() != ControlFunction::Variant::custom) {
    ClosedFormParams prm;
    prm.setting = cfg.setting;
    prm.n = cfg.n;
    prm.K = cfg.norm.K();
    prm.p = cfg.norm.p();
    prm.variant = phi.variant();
    prm.amplitude = phi.amplitude();
    prm.r = phi.variant() == ControlFunction::Variant::power ? phi.exponent() : 1.0;
    (void)closed_form_bounds(prm);
  }
  (void)series_bound(phi, cfg.n, cfg.setting, cfg.direction, cfg.norm, cfg.probes.front(), cfg.series_tol);
}

inline ResultRow rejection_row(const Scenario& s, const std::string& probe, const Error& e) {
  ResultRow r;
  r.scenario = s.name;
  r.probe = probe;
  r.status = rejection_status(e);
  r.detail = std::string(to_string(e.kind())) + ": " + e.what();
  return r;
}

inline void run_stability(const Scenario& s, RunResult& out) {
  const StabilityConfig& cfg = *s.stability;
  const ControlFunction phi = build_control(*s.control, *s.mapping, cfg);
  try {
    admit(phi, cfg);
  } catch (const Error& e) {
    if (!is_rejection_error(e)) throw;
    out.rows.push_back(rejection_row(s, "", e));
    out.summary.push_back(s.name + ": rejected, " + e.what());
    return;
  }
  const StabilityReport rep = stabilize(*s.mapping, phi, cfg);
  int passed = 0;
  double worst = 0.0;
  for (const auto& p : rep.probes) {
    ResultRow r;
    r.scenario = s.name;
    r.probe = fmt(p.probe);
    r.norm_x = p.norm_x;
    r.q_estimate = fmt(p.trace.value);
    r.deviation = p.deviation;
    r.bound = p.bound;
    r.margin = p.margin;
    r.iterations = p.trace.iterations;
    const bool ok = p.within_bound && p.trace.converged;
    r.status = ok ? Status::pass : Status::fail;
    if (!p.trace.converged) r.detail = "not converged at m_max";
    else if (!p.within_bound) r.detail = "deviation exceeds bound";
    passed += ok;
    if (p.bound > 0.0) worst = std::max(worst, p.deviation / p.bound);
    out.rows.push_back(std::move(r));
  }
  out.summary.push_back(s.name + ": " + std::to_string(passed) + "/" + std::to_string(rep.probes.size()) +
                        " probes within bound; phi = " + describe(phi) + "; max deviation/bound = " + fmt(worst));
  if (rep.phi_violations > 0) {
    out.summary.push_back("warning: ||D_u f|| exceeded phi on " + std::to_string(rep.phi_violations) + "/" +
                          std::to_string(cfg.consistency_trials) + " sampled tuples");
  }
}

inline void run_covariance(const Scenario& s, RunResult& out) {
  const StabilityConfig& cfg = *s.stability;
  const CovarianceSpec& cs = *s.covariance;
  StabilityConfig fwd = cfg;
  fwd.direction = Direction::forward;
  double worst = 0.0;
  int passed = 0;
  for (std::size_t i = 0; i < cfg.probes.size(); ++i) {
    StabilityConfig one = cfg;
    one.probes = {cfg.probes[i]};
    one.seed = cfg.seed + i;
    const CovarianceReport rep = verify_unitary_covariance(*s.mapping, one, cs.unitary_samples, cs.kind, cs.mode);
    const LimitTrace tr = estimate_limit(*s.mapping, fwd, cfg.probes[i]);
    ResultRow r;
    r.scenario = s.name;
    r.probe = fmt(cfg.probes[i]);
    r.norm_x = norm_eval(cfg.norm, cfg.probes[i]);
    r.q_estimate = fmt(tr.value);
    r.deviation = rep.max_relative_deviation;
    r.bound = cfg.tol;
    r.margin = cfg.tol - rep.max_relative_deviation;
    r.iterations = tr.iterations;
    r.status = rep.pass ? Status::pass : Status::fail;
    r.detail = std::to_string(rep.samples) + " unitaries";
    passed += rep.pass;
    worst = std::max(worst, rep.max_relative_deviation);
    out.rows.push_back(std::move(r));
  }
  out.summary.push_back(s.name + ": " + std::to_string(passed) + "/" + std::to_string(cfg.probes.size()) +
                        " probes covariant; max relative deviation = " + fmt(worst));
}

/// gap_m = ||it_m - it_{m-1}|| against C / (n-1)^{2m}, where C is the sup over
/// m of (n-1)^{2m} times the Cauchy tail after step m-1.
inline void run_convergence(const Scenario& s, RunResult& out) {
  const StabilityConfig& cfg = *s.stability;
  const int steps = s.convergence->steps;
  const ControlFunction phi = build_control(*s.control, *s.mapping, cfg);
  try {
    admit(phi, cfg);
  } catch (const Error& e) {
    if (!is_rejection_error(e)) throw;
    out.rows.push_back(rejection_row(s, "", e));
    out.summary.push_back(s.name + ": rejected, " + e.what());
    return;
  }
  const double b2 = (cfg.n - 1.0) * (cfg.n - 1.0);
  int passed = 0;
  int total = 0;
  double worst_c = 0.0;
  for (const auto& x : cfg.probes) {
    double c = 0.0;
    for (int m = 1; m <= steps; ++m) c = std::max(c, std::pow(b2, m) * tail_bound(phi, cfg, x, m - 1));
    worst_c = std::max(worst_c, c);
    ModulePoint prev = hyers_iterate(*s.mapping, cfg.n, 0, x, Direction::forward);
    for (int m = 1; m <= steps; ++m) {
      ModulePoint it = hyers_iterate(*s.mapping, cfg.n, m, x, Direction::forward);
      const double gap = norm_eval(cfg.norm.with_dim(it.rank()), it - prev);
      prev = std::move(it);
      ResultRow r;
      r.scenario = s.name;
      r.probe = fmt(x);
      r.norm_x = norm_eval(cfg.norm, x);
      r.q_estimate = fmt(prev);
      r.deviation = gap;
      r.bound = c / std::pow(b2, m);
      r.margin = *r.bound - gap;
      r.iterations = m;
      const bool ok = *r.margin >= -cfg.tol;
      r.status = ok ? Status::pass : Status::fail;
      r.detail = "C = " + fmt(c);
      passed += ok;
      ++total;
      out.rows.push_back(std::move(r));
    }
  }
  out.summary.push_back(s.name + ": " + std::to_string(passed) + "/" + std::to_string(total) +
                        " steps within C/(n-1)^{2m}; phi = " + describe(phi) + "; largest C = " + fmt(worst_c));
}

inline void run_oracle(const Scenario& s, RunResult& out) {
  const OracleSpec& o = *s.oracle;
  int equal = 0;
  int compared = 0;
  std::vector<std::string> skipped;
  std::string last;
  for (const auto& [a, b] : o.pairs) {
    for (int q : o.qs) {
      for (int d : o.ds) {
        const std::string label = "F_" + std::to_string(q) + "^" + std::to_string(d) + " " + a.name() + " ~ " + b.name();
        const ff::GroupSpec g(q, d);
        if (o.enforce_obstruction) {
          auto bad = ff::obstruction(a, q);
          if (!bad) bad = ff::obstruction(b, q);
          if (bad) {
            skipped.push_back(label + " (q divides " + bad->name + ")");
            continue;
          }
        }
        const ff::EquivalenceReport rep = ff::spaces_equal(a, b, g, o.enforce_obstruction);
        ResultRow r;
        r.scenario = s.name;
        r.probe = label;
        r.iterations = static_cast<int>(rep.dim_a);
        r.status = rep.equal ? Status::pass : Status::fail;
        r.detail = rep.equal ? "spaces equal, dim " + std::to_string(rep.dim_a)
                             : "spaces differ, dims " + std::to_string(rep.dim_a) + " and " + std::to_string(rep.dim_b);
        if (rep.subsampled) r.detail += ", subsampled tuples";
        last = r.detail;
        equal += rep.equal;
        ++compared;
        out.rows.push_back(std::move(r));
      }
    }
  }
  if (compared == 1) {
    out.summary.push_back(s.name + ": " + last);
  } else {
    out.summary.push_back(s.name + ": " + std::to_string(equal) + "/" + std::to_string(compared) + " comparisons equal");
  }
  for (const auto& sk : skipped) out.summary.push_back("skipped " + sk);
  if (compared == 0) throw Error(ErrorKind::obstruction, "every comparison is obstructed");
}

inline void run_characterization(const Scenario& s, RunResult& out) {
  const CharacterizationSpec& c = *s.characterization;
  for (const auto& mode : c.modes) {
    const bool is_b = mode.identity == CharacterizationMode::Identity::b;
    const std::string label = is_b ? "b(a=" + std::to_string(mode.parameter) + ")" : "c(n=" + std::to_string(mode.parameter) + ")";
    const CharacterizationResult res = inner_product_characterization(*s.norm, mode, c.trials, s.seed);
    ResultRow r;
    r.scenario = s.name;
    r.probe = label;
    r.deviation = res.sup_relative_residual;
    r.bound = 1e-9;
    r.iterations = c.trials + 1;
    r.status = res.inner_product == c.expect_inner_product ? Status::pass : Status::fail;
    if (res.inner_product) {
      r.detail = "identity holds";
    } else {
      r.detail = "witness";
      for (const auto& x : res.witness) r.detail += " (" + fmt(x) + ")";
      r.detail += " residual " + fmt(res.witness_residual);
    }
    out.summary.push_back(s.name + " " + label + ": " + (res.inner_product ? "inner product" : "not an inner product") +
                          (res.inner_product ? std::string() : ", " + r.detail));
    out.rows.push_back(std::move(r));
  }
}

inline double sweep_denominator(const ClosedFormParams& p) {
  const double b = p.n - 1.0;
  if (p.setting == BoundSetting::p_banach) {
    if (p.variant == ControlFunction::Variant::constant) return std::pow(b, 2.0 * p.p) - 1.0;
    return std::abs(std::pow(b, 2.0 * p.p) - std::pow(b, p.r * p.p));
  }
  if (p.variant == ControlFunction::Variant::constant) return b * b - p.K;
  return std::max(b * b - p.K * std::pow(b, p.r), std::pow(b, p.r) - p.K * b * b);
}

inline void run_sweep(const Scenario& s, RunResult& out) {
  const SweepSpec& sw = *s.sweep;
  std::vector<double> crossings;
  double prev_den = 0.0;
  for (std::size_t i = 0; i < sw.values.size(); ++i) {
    ClosedFormParams p = sw.base;
    (sw.parameter == "K" ? p.K : p.r) = sw.values[i];
    const double den = sweep_denominator(p);
    if (i > 0 && (prev_den > 0.0) != (den > 0.0)) crossings.push_back(sw.values[i]);
    prev_den = den;
    ResultRow r;
    r.scenario = s.name;
    r.probe = sw.parameter + "=" + fmt(sw.values[i]);
    r.norm_x = p.norm_x;
    try {
      const ClosedFormBound cf = closed_form_bounds(p);
      r.bound = cf.value;
      r.status = Status::pass;
      r.detail = "denominator " + fmt(cf.denominator);
    } catch (const Error& e) {
      if (!is_rejection_error(e)) throw;
      r.status = rejection_status(e);
      r.detail = "denominator " + fmt(den) + "; " + e.what();
    }
    out.rows.push_back(std::move(r));
  }
  std::string cross = crossings.empty() ? "never" : "";
  for (double v : crossings) cross += (cross.empty() ? "at " : ", ") + sw.parameter + "=" + fmt(v);
  out.summary.push_back(s.name + ": denominator changes sign " + cross);
}

inline void run_equality(const Scenario& s, RunResult& out) {
  const EqualitySpec& e = *s.equality;
  const QuasiNormSpec norm = QuasiNormSpec::euclidean(1);
  auto rel = [](double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); };
  int passed = 0;
  int total = 0;
  auto emit = [&](const std::string& label, double nx, double diff) {
    ResultRow r;
    r.scenario = s.name;
    r.probe = label;
    r.norm_x = nx;
    r.deviation = diff;
    r.bound = e.rel_tol;
    r.margin = e.rel_tol - diff;
    r.status = diff <= e.rel_tol ? Status::pass : Status::fail;
    passed += r.status == Status::pass;
    ++total;
    out.rows.push_back(std::move(r));
  };
  for (int n : e.ns) {
    for (double nx : e.norms) {
      const ModulePoint x = ModulePoint::from_reals({nx});
      std::vector<std::pair<ControlFunction, std::string>> phis;
      for (double r : e.rs) phis.emplace_back(ControlFunction::power(1.0, r), "power r=" + fmt(r));
      phis.emplace_back(ControlFunction::constant(1.0), "constant");
      for (const auto& [phi, name] : phis) {
        const bool power = phi.variant() == ControlFunction::Variant::power;
        const Direction dir = power && phi.exponent() > 2.0 ? Direction::backward : Direction::forward;
        const std::string label = "n=" + std::to_string(n) + " " + name + " " + to_string(dir);
        const SeriesBound quasi = dir == Direction::forward ? series_bound_forward(phi, n, 1.0, x, 1e-15, norm)
                                                            : series_bound_backward(phi, n, 1.0, x, 1e-15, norm);
        const SeriesBound pnorm = dir == Direction::forward ? series_bound_forward_p(phi, n, 1.0, x, 1e-15, norm)
                                                            : series_bound_backward_p(phi, n, 1.0, x, 1e-15, norm);
        ClosedFormParams cq;
        cq.n = n;
        cq.K = 1.0;
        cq.variant = phi.variant();
        cq.amplitude = 1.0;
        cq.r = power ? phi.exponent() : 1.0;
        cq.norm_x = nx;
        ClosedFormParams cp = cq;
        cp.setting = BoundSetting::p_banach;
        cp.p = 1.0;
        const double diff = std::max({rel(quasi.truncated, pnorm.truncated), rel(quasi.value(), pnorm.value()),
                                      rel(closed_form_bounds(cq).value, closed_form_bounds(cp).value)});
        emit(label, nx, diff);
      }
    }
  }
  out.summary.push_back(s.name + ": " + std::to_string(passed) + "/" + std::to_string(total) +
                        " parameter sets agree within " + fmt(e.rel_tol));
}

}  // namespace detail

/// Runs a validated scenario. Deterministic given the scenario (seed
/// included); writes nothing.
inline RunResult run_scenario(const Scenario& s) {
  RunResult out;
  switch (s.kind) {
    case ScenarioKind::stability: detail::run_stability(s, out); break;
    case ScenarioKind::covariance: detail::run_covariance(s, out); break;
    case ScenarioKind::convergence: detail::run_convergence(s, out); break;
    case ScenarioKind::oracle: detail::run_oracle(s, out); break;
    case ScenarioKind::characterization: detail::run_characterization(s, out); break;
    case ScenarioKind::bound_sweep: detail::run_sweep(s, out); break;
    case ScenarioKind::bound_equality: detail::run_equality(s, out); break;
  }
  out.code = exit_code_for(out.rows);
  return out;
}

struct WrittenFiles {
  std::filesystem::path csv;
  std::optional<std::filesystem::path> plotdata;
};

/// Writes the results CSV (and plot data when configured) after the run has
/// finished, each file atomically.
inline WrittenFiles write_outputs(const Scenario& s, const RunResult& r) {
  const std::filesystem::path dir = output_dir(s.output.dir);
  WrittenFiles w;
  std::optional<std::string> plot;
  if (s.output.plotdata) plot = emit_plotdata(r.rows);
  w.csv = dir / s.output.csv;
  write_atomic(w.csv, to_csv(r.rows));
  if (plot) {
    w.plotdata = dir / *s.output.plotdata;
    write_atomic(*w.plotdata, *plot);
  }
  return w;
}

}  // namespace qstab::harness
