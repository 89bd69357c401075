#pragma once

// Scenario configs: JSON in, fully validated typed objects out. Every error
// names the offending field as a dotted path, e.g. "stability.probes[2]".

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "qstab/algebra.hpp"
#include "qstab/bounds.hpp"
#include "qstab/characterization.hpp"
#include "qstab/control.hpp"
#include "qstab/equations.hpp"
#include "qstab/error.hpp"
#include "qstab/finite_field.hpp"
#include "qstab/mapping.hpp"
#include "qstab/quasi_norm.hpp"
#include "qstab/stability.hpp"

namespace qstab::harness {

using json = nlohmann::json;

class ConfigError : public Error {
 public:
  ConfigError(const std::string& path, const std::string& what)
      : Error(ErrorKind::config, (path.empty() ? std::string("<root>") : path) + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

enum class ScenarioKind { stability, covariance, convergence, oracle, characterization, bound_sweep, bound_equality };

inline const char* to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::stability: return "stability";
    case ScenarioKind::covariance: return "covariance";
    case ScenarioKind::convergence: return "convergence";
    case ScenarioKind::oracle: return "oracle";
    case ScenarioKind::characterization: return "characterization";
    case ScenarioKind::bound_sweep: return "bound_sweep";
    case ScenarioKind::bound_equality: return "bound_equality";
  }
  return "?";
}

/// Control function as configured. A missing amplitude means "fit it from f".
struct ControlSpec {
  ControlFunction::Variant variant = ControlFunction::Variant::power;
  std::optional<double> amplitude;
  double r = 1.0;
  int fit_trials = 2000;
};

struct OracleSpec {
  std::vector<std::pair<EquationSpec, EquationSpec>> pairs;
  std::vector<int> qs;
  std::vector<int> ds;
  bool enforce_obstruction = true;
};

struct CharacterizationSpec {
  std::vector<CharacterizationMode> modes;
  int trials = 10000;
  bool expect_inner_product = true;
};

struct SweepSpec {
  std::string parameter;  // "K" or "r"
  std::vector<double> values;
  ClosedFormParams base;
};

struct EqualitySpec {
  std::vector<int> ns;
  std::vector<double> rs;
  std::vector<double> norms;
  double rel_tol = 1e-12;
};

struct CovarianceSpec {
  int unitary_samples = 100;
  CovarianceKind kind = CovarianceKind::conjugation;
  HatMode mode = HatMode::avg;
};

struct ConvergenceSpec {
  int steps = 20;
};

struct OutputSpec {
  std::string dir = ".";
  std::string csv;
  std::optional<std::string> plotdata;
};

struct Scenario {
  std::string name;
  std::string description;
  ScenarioKind kind = ScenarioKind::stability;
  std::uint64_t seed = 1;

  // stability, covariance, convergence
  std::optional<Mapping> mapping;
  std::optional<ControlSpec> control;
  std::optional<StabilityConfig> stability;

  std::optional<OracleSpec> oracle;
  std::optional<QuasiNormSpec> norm;  // characterization
  std::optional<CharacterizationSpec> characterization;
  std::optional<SweepSpec> sweep;
  std::optional<EqualitySpec> equality;
  std::optional<CovarianceSpec> covariance;
  std::optional<ConvergenceSpec> convergence;
  OutputSpec output;
};

namespace detail {

inline std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
inline std::string index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

/// Rewraps library precondition failures with the field path they came from.
template <class Fn>
auto at(const std::string& path, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(path, e.what());
  }
}

inline void expect_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
}

inline void allow_keys(const json& j, const std::string& path, std::initializer_list<const char*> keys) {
  expect_object(j, path);
  std::set<std::string> ok(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items()) {
    if (!ok.count(k)) throw ConfigError(join(path, k), "unknown field");
  }
}

inline const json& need(const json& j, const std::string& path, const char* key) {
  expect_object(j, path);
  if (!j.contains(key)) throw ConfigError(join(path, key), "required field missing");
  return j.at(key);
}

inline double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  return j.get<double>();
}

inline int as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ConfigError(path, "expected an integer");
  return j.get<int>();
}

inline std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path, "expected a string");
  return j.get<std::string>();
}

inline bool as_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) throw ConfigError(path, "expected true or false");
  return j.get<bool>();
}

template <class T, class Conv>
T opt(const json& j, const std::string& path, const char* key, T fallback, Conv conv) {
  if (!j.contains(key)) return fallback;
  return conv(j.at(key), join(path, key));
}

template <class Conv>
auto list_of(const json& j, const std::string& path, Conv conv) {
  if (!j.is_array() || j.empty()) throw ConfigError(path, "expected a non-empty array");
  std::vector<decltype(conv(j.front(), path))> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(conv(j[i], index(path, i)));
  return out;
}

/// Accepts either a scalar or a non-empty array of scalars.
template <class Conv>
auto scalar_or_list(const json& j, const std::string& path, Conv conv) {
  if (j.is_array()) return list_of(j, path, conv);
  return std::vector<decltype(conv(j, path))>{conv(j, path)};
}

template <class E>
E choose(const json& j, const std::string& path, std::initializer_list<std::pair<const char*, E>> options) {
  const std::string s = as_string(j, path);
  std::string names;
  for (const auto& [name, value] : options) {
    if (s == name) return value;
    names += names.empty() ? name : std::string("|") + name;
  }
  throw ConfigError(path, "expected one of " + names + ", got '" + s + "'");
}

inline EquationSpec parse_equation(const json& j, const std::string& path) {
  const std::string text = as_string(j, path);
  return at(path, [&] { return EquationSpec::parse(text); });
}

inline QuasiNormSpec parse_norm(const json& j, const std::string& path) {
  allow_keys(j, path, {"kind", "dim", "p", "weights"});
  const auto kind = choose<NormKind>(need(j, path, "kind"), join(path, "kind"),
                                     {{"euclidean", NormKind::euclidean},
                                      {"l1", NormKind::l1},
                                      {"lp_quasi", NormKind::lp_quasi},
                                      {"weighted", NormKind::weighted}});
  if (kind == NormKind::weighted) {
    auto w = list_of(need(j, path, "weights"), join(path, "weights"), as_number);
    return at(join(path, "weights"), [&] { return QuasiNormSpec::weighted(w); });
  }
  const int dim = as_int(need(j, path, "dim"), join(path, "dim"));
  switch (kind) {
    case NormKind::euclidean: return at(join(path, "dim"), [&] { return QuasiNormSpec::euclidean(dim); });
    case NormKind::l1: return at(join(path, "dim"), [&] { return QuasiNormSpec::l1(dim); });
    default: {
      const double p = as_number(need(j, path, "p"), join(path, "p"));
      return at(path, [&] { return QuasiNormSpec::lp_quasi(dim, p); });
    }
  }
}

inline Mapping parse_mapping(const json& j, const std::string& path) {
  expect_object(j, path);
  const std::string family = as_string(need(j, path, "family"), join(path, "family"));
  if (family == "quadratic_form") {
    allow_keys(j, path, {"family", "coeffs"});
    const std::string cp = join(path, "coeffs");
    const auto rows = list_of(need(j, path, "coeffs"), cp, [](const json& r, const std::string& p) {
      return list_of(r, p, as_number);
    });
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != rows.front().size()) throw ConfigError(index(cp, r), "ragged coefficient matrix");
      for (std::size_t c = 0; c < rows[r].size(); ++c) {
        m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
      }
    }
    return at(cp, [&] { return Mapping::quadratic_form(m); });
  }
  if (family == "monomial") {
    allow_keys(j, path, {"family", "degree"});
    const int degree = as_int(need(j, path, "degree"), join(path, "degree"));
    return at(join(path, "degree"), [&] { return Mapping::monomial(degree); });
  }
  if (family == "constant") {
    allow_keys(j, path, {"family", "value"});
    return Mapping::constant(as_number(need(j, path, "value"), join(path, "value")));
  }
  if (family == "perturbed") {
    allow_keys(j, path, {"family", "base", "bump", "amplitude"});
    Mapping base = parse_mapping(need(j, path, "base"), join(path, "base"));
    Mapping bump = parse_mapping(need(j, path, "bump"), join(path, "bump"));
    const double amp = as_number(need(j, path, "amplitude"), join(path, "amplitude"));
    return at(path, [&] { return Mapping::perturbed(std::move(base), std::move(bump), amp); });
  }
  if (family == "sum") {
    allow_keys(j, path, {"family", "terms"});
    auto terms = list_of(need(j, path, "terms"), join(path, "terms"), parse_mapping);
    return at(path, [&] { return Mapping::sum(std::move(terms)); });
  }
  allow_keys(j, path, {"family"});
  if (family == "matrix_square") return Mapping::matrix_square();
  if (family == "sine") return Mapping::sine();
  if (family == "rational_odd") return Mapping::rational_odd();
  if (family == "hermitian_bump") return Mapping::hermitian_bump();
  throw ConfigError(join(path, "family"), "unknown mapping family '" + family + "'");
}

inline ControlSpec parse_control(const json& j, const std::string& path) {
  allow_keys(j, path, {"variant", "epsilon", "theta", "r", "fit_trials"});
  ControlSpec c;
  c.variant = choose<ControlFunction::Variant>(need(j, path, "variant"), join(path, "variant"),
                                               {{"power", ControlFunction::Variant::power},
                                                {"constant", ControlFunction::Variant::constant}});
  const char* amp_key = c.variant == ControlFunction::Variant::power ? "epsilon" : "theta";
  const char* other = c.variant == ControlFunction::Variant::power ? "theta" : "epsilon";
  if (j.contains(other)) throw ConfigError(join(path, other), "not used by this variant");
  if (j.contains(amp_key)) {
    const json& a = j.at(amp_key);
    if (!(a.is_string() && a.get<std::string>() == "fit")) {
      const double v = as_number(a, join(path, amp_key));
      if (!(v >= 0.0)) throw ConfigError(join(path, amp_key), "must be >= 0 or \"fit\"");
      c.amplitude = v;
    }
  } else {
    throw ConfigError(join(path, amp_key), "required field missing (a number or \"fit\")");
  }
  if (c.variant == ControlFunction::Variant::power) {
    c.r = as_number(need(j, path, "r"), join(path, "r"));
    if (!(c.r > 0.0)) throw ConfigError(join(path, "r"), "must be > 0");
  } else if (j.contains("r")) {
    throw ConfigError(join(path, "r"), "not used by this variant");
  }
  c.fit_trials = opt(j, path, "fit_trials", 2000, as_int);
  if (c.fit_trials < 1) throw ConfigError(join(path, "fit_trials"), "must be >= 1");
  return c;
}

inline std::vector<ModulePoint> parse_probes(const json& j, const std::string& path, const ModuleShape& shape,
                                             std::uint64_t seed, double box) {
  if (j.is_array()) {
    if (shape.k != 1) throw ConfigError(path, "explicit probes are real coordinate lists; use {\"random\": N} for k > 1");
    auto rows = list_of(j, path, [](const json& r, const std::string& p) { return list_of(r, p, as_number); });
    std::vector<ModulePoint> out;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (static_cast<int>(rows[i].size()) != shape.d) {
        throw ConfigError(index(path, i), "probe has " + std::to_string(rows[i].size()) +
                                              " coordinates, the norm expects " + std::to_string(shape.d));
      }
      out.push_back(at(index(path, i), [&] { return ModulePoint::from_reals(rows[i]); }));
    }
    return out;
  }
  allow_keys(j, path, {"random"});
  const int count = as_int(need(j, path, "random"), join(path, "random"));
  if (count < 1) throw ConfigError(join(path, "random"), "must be >= 1");
  BoxSampler sampler(shape, seed ^ 0x243f6a8885a308d3ULL, box);
  std::vector<ModulePoint> out;
  for (int i = 0; i < count; ++i) out.push_back(sampler.point());
  return out;
}

inline StabilityConfig parse_stability(const json& j, const std::string& path, int n, const QuasiNormSpec& norm,
                                       std::uint64_t seed) {
  allow_keys(j, path, {"direction", "setting", "m_max", "tol", "series_tol", "field", "algebra_dim", "probes",
                       "consistency_trials", "sample_box"});
  StabilityConfig c;
  c.n = n;
  c.norm = norm;
  c.seed = seed;
  c.direction = opt(j, path, "direction", Direction::forward, [](const json& v, const std::string& p) {
    return choose<Direction>(v, p, {{"forward", Direction::forward}, {"backward", Direction::backward}});
  });
  c.setting = opt(j, path, "setting", BoundSetting::quasi, [](const json& v, const std::string& p) {
    return choose<BoundSetting>(v, p, {{"quasi", BoundSetting::quasi}, {"p_banach", BoundSetting::p_banach}});
  });
  c.field = opt(j, path, "field", ScalarField::real, [](const json& v, const std::string& p) {
    return choose<ScalarField>(v, p, {{"real", ScalarField::real}, {"complex", ScalarField::complex}});
  });
  c.m_max = opt(j, path, "m_max", c.m_max, as_int);
  c.tol = opt(j, path, "tol", c.tol, as_number);
  c.series_tol = opt(j, path, "series_tol", c.series_tol, as_number);
  c.consistency_trials = opt(j, path, "consistency_trials", c.consistency_trials, as_int);
  c.sample_box = opt(j, path, "sample_box", c.sample_box, as_number);
  if (c.m_max < 1) throw ConfigError(join(path, "m_max"), "must be >= 1");
  if (!(c.tol > 0.0)) throw ConfigError(join(path, "tol"), "must be > 0");
  if (!(c.series_tol > 0.0)) throw ConfigError(join(path, "series_tol"), "must be > 0");
  if (c.consistency_trials < 0) throw ConfigError(join(path, "consistency_trials"), "must be >= 0");
  if (!(c.sample_box > 0.0 && c.sample_box <= 10.0)) throw ConfigError(join(path, "sample_box"), "must lie in (0, 10]");
  const int k = opt(j, path, "algebra_dim", 1, as_int);
  if (k < 1) throw ConfigError(join(path, "algebra_dim"), "must be >= 1");
  c.probes = parse_probes(need(j, path, "probes"), join(path, "probes"), {k, norm.dim(), c.field}, seed, c.sample_box);
  at(path, [&] { c.validate(); });
  return c;
}

inline int arity_for_engine(const EquationSpec& eq, const std::string& path) {
  if (eq.id() == EquationId::fe3) return eq.n();
  if (eq.id() == EquationId::fe2) return 3;
  throw ConfigError(path, "the stability engine needs fe2 or fe3:<n>, got " + eq.name());
}

inline OracleSpec parse_oracle(const json& j, const std::string& path) {
  allow_keys(j, path, {"pairs", "q", "d", "enforce_obstruction"});
  OracleSpec o;
  o.pairs = list_of(need(j, path, "pairs"), join(path, "pairs"), [](const json& pr, const std::string& p) {
    if (!pr.is_array() || pr.size() != 2) throw ConfigError(p, "expected a pair of equation names");
    return std::make_pair(parse_equation(pr[0], index(p, 0)), parse_equation(pr[1], index(p, 1)));
  });
  o.qs = scalar_or_list(need(j, path, "q"), join(path, "q"), as_int);
  for (std::size_t i = 0; i < o.qs.size(); ++i) {
    if (!(o.qs[i] >= 5 && ff::is_prime(o.qs[i]))) throw ConfigError(index(join(path, "q"), i), "must be a prime >= 5");
  }
  o.ds = scalar_or_list(need(j, path, "d"), join(path, "d"), as_int);
  for (std::size_t i = 0; i < o.ds.size(); ++i) {
    if (o.ds[i] < 1) throw ConfigError(index(join(path, "d"), i), "must be >= 1");
  }
  for (int q : o.qs) {
    for (std::size_t i = 0; i < o.ds.size(); ++i) {
      if (std::pow(static_cast<double>(q), o.ds[i]) > static_cast<double>(ff::kMaxColumns)) {
        throw ConfigError(index(join(path, "d"), i), "q^d exceeds " + std::to_string(ff::kMaxColumns) + " columns");
      }
    }
  }
  o.enforce_obstruction = opt(j, path, "enforce_obstruction", true, as_bool);
  return o;
}

inline CharacterizationSpec parse_characterization(const json& j, const std::string& path) {
  allow_keys(j, path, {"modes", "trials", "expect_inner_product"});
  CharacterizationSpec c;
  c.modes = list_of(need(j, path, "modes"), join(path, "modes"), [](const json& m, const std::string& p) {
    allow_keys(m, p, {"identity", "a", "n"});
    const std::string id = as_string(need(m, p, "identity"), join(p, "identity"));
    if (id == "b") {
      const int a = as_int(need(m, p, "a"), join(p, "a"));
      if (std::abs(a) == 1) throw ConfigError(join(p, "a"), "identity (b) needs |a| != 1");
      return CharacterizationMode::b(a);
    }
    if (id == "c") {
      const int n = as_int(need(m, p, "n"), join(p, "n"));
      if (n < 3) throw ConfigError(join(p, "n"), "identity (c) needs n >= 3");
      return CharacterizationMode::c(n);
    }
    throw ConfigError(join(p, "identity"), "expected b or c");
  });
  c.trials = opt(j, path, "trials", c.trials, as_int);
  if (c.trials < 1) throw ConfigError(join(path, "trials"), "must be >= 1");
  c.expect_inner_product = opt(j, path, "expect_inner_product", true, as_bool);
  return c;
}

inline SweepSpec parse_sweep(const json& j, const std::string& path) {
  allow_keys(j, path, {"parameter", "values", "n", "K", "p", "setting", "variant", "amplitude", "r", "norm_x"});
  SweepSpec s;
  s.parameter = as_string(need(j, path, "parameter"), join(path, "parameter"));
  if (s.parameter != "K" && s.parameter != "r") throw ConfigError(join(path, "parameter"), "expected K or r");
  s.values = list_of(need(j, path, "values"), join(path, "values"), as_number);
  ClosedFormParams& b = s.base;
  b.n = opt(j, path, "n", 3, as_int);
  if (b.n < 3) throw ConfigError(join(path, "n"), "must be >= 3");
  b.K = opt(j, path, "K", 1.0, as_number);
  b.p = opt(j, path, "p", 1.0, as_number);
  b.setting = opt(j, path, "setting", BoundSetting::quasi, [](const json& v, const std::string& p) {
    return choose<BoundSetting>(v, p, {{"quasi", BoundSetting::quasi}, {"p_banach", BoundSetting::p_banach}});
  });
  b.variant = opt(j, path, "variant", ControlFunction::Variant::constant, [](const json& v, const std::string& p) {
    return choose<ControlFunction::Variant>(
        v, p, {{"power", ControlFunction::Variant::power}, {"constant", ControlFunction::Variant::constant}});
  });
  b.amplitude = opt(j, path, "amplitude", 1.0, as_number);
  b.r = opt(j, path, "r", 1.0, as_number);
  b.norm_x = opt(j, path, "norm_x", 1.0, as_number);
  if (s.parameter == "r" && b.variant != ControlFunction::Variant::power) {
    throw ConfigError(join(path, "variant"), "an r sweep needs the power variant");
  }
  return s;
}

inline EqualitySpec parse_equality(const json& j, const std::string& path) {
  allow_keys(j, path, {"n", "r", "norm_x", "rel_tol"});
  EqualitySpec e;
  e.ns = scalar_or_list(need(j, path, "n"), join(path, "n"), as_int);
  for (std::size_t i = 0; i < e.ns.size(); ++i) {
    if (e.ns[i] < 3) throw ConfigError(index(join(path, "n"), i), "must be >= 3");
  }
  e.rs = scalar_or_list(need(j, path, "r"), join(path, "r"), as_number);
  for (std::size_t i = 0; i < e.rs.size(); ++i) {
    if (!(e.rs[i] > 0.0) || e.rs[i] == 2.0) throw ConfigError(index(join(path, "r"), i), "must be > 0 and != 2");
  }
  e.norms = scalar_or_list(need(j, path, "norm_x"), join(path, "norm_x"), as_number);
  e.rel_tol = opt(j, path, "rel_tol", e.rel_tol, as_number);
  return e;
}

}  // namespace detail

/// Parses and validates a scenario. Throws ConfigError with a field path on
/// the first problem found; nothing is computed before this returns.
inline Scenario parse_scenario(const json& j) {
  using namespace detail;
  allow_keys(j, "", {"name", "description", "kind", "seed", "equation", "norm", "mapping", "control", "stability",
                     "oracle", "characterization", "sweep", "equality", "covariance", "convergence", "output"});
  Scenario s;
  s.name = as_string(need(j, "", "name"), "name");
  if (s.name.empty() || s.name.find_first_of(",\"/\\\n") != std::string::npos) {
    throw ConfigError("name", "must be non-empty without commas, quotes, slashes or newlines");
  }
  s.description = opt(j, "", "description", std::string(), as_string);
  s.kind = choose<ScenarioKind>(need(j, "", "kind"), "kind",
                                {{"stability", ScenarioKind::stability},
                                 {"covariance", ScenarioKind::covariance},
                                 {"convergence", ScenarioKind::convergence},
                                 {"oracle", ScenarioKind::oracle},
                                 {"characterization", ScenarioKind::characterization},
                                 {"bound_sweep", ScenarioKind::bound_sweep},
                                 {"bound_equality", ScenarioKind::bound_equality}});
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw ConfigError("seed", "expected a non-negative integer");
    s.seed = j["seed"].get<std::uint64_t>();
  }

  auto forbid_except = [&](std::initializer_list<const char*> used) {
    static const char* blocks[] = {"equation", "norm",     "mapping",  "control",    "stability",   "oracle",
                                   "characterization", "sweep", "equality", "covariance", "convergence"};
    std::set<std::string> ok(used.begin(), used.end());
    for (const char* b : blocks) {
      if (j.contains(b) && !ok.count(b)) throw ConfigError(b, std::string("not used by kind ") + to_string(s.kind));
    }
  };

  switch (s.kind) {
    case ScenarioKind::stability:
    case ScenarioKind::covariance:
    case ScenarioKind::convergence: {
      if (s.kind == ScenarioKind::stability) forbid_except({"equation", "norm", "mapping", "control", "stability"});
      if (s.kind == ScenarioKind::covariance) forbid_except({"equation", "norm", "mapping", "control", "stability", "covariance"});
      if (s.kind == ScenarioKind::convergence) forbid_except({"equation", "norm", "mapping", "control", "stability", "convergence"});
      const EquationSpec eq = parse_equation(need(j, "", "equation"), "equation");
      const int n = arity_for_engine(eq, "equation");
      const QuasiNormSpec norm = parse_norm(need(j, "", "norm"), "norm");
      s.mapping = parse_mapping(need(j, "", "mapping"), "mapping");
      if (auto r = s.mapping->domain_rank(); r && *r != norm.dim()) {
        throw ConfigError("mapping", "domain rank " + std::to_string(*r) + " does not match norm dim " +
                                         std::to_string(norm.dim()));
      }
      if (s.kind != ScenarioKind::covariance || j.contains("control")) {
        s.control = parse_control(need(j, "", "control"), "control");
      }
      s.stability = parse_stability(need(j, "", "stability"), "stability", n, norm, s.seed);
      if (s.stability->setting == BoundSetting::p_banach && norm.kind() == NormKind::weighted) {
        throw ConfigError("stability.setting", "p_banach needs a norm with a known p");
      }
      if (s.kind == ScenarioKind::covariance) {
        const json& c = need(j, "", "covariance");
        allow_keys(c, "covariance", {"unitary_samples", "kind", "hat_mode"});
        CovarianceSpec cs;
        cs.unitary_samples = opt(c, "covariance", "unitary_samples", 100, as_int);
        if (cs.unitary_samples < 1) throw ConfigError("covariance.unitary_samples", "must be >= 1");
        cs.kind = opt(c, "covariance", "kind", CovarianceKind::conjugation, [](const json& v, const std::string& p) {
          return choose<CovarianceKind>(v, p, {{"conjugation", CovarianceKind::conjugation}, {"hat", CovarianceKind::hat}});
        });
        cs.mode = opt(c, "covariance", "hat_mode", HatMode::avg, [](const json& v, const std::string& p) {
          return choose<HatMode>(v, p, {{"left", HatMode::left}, {"right", HatMode::right}, {"avg", HatMode::avg}});
        });
        s.covariance = cs;
      }
      if (s.kind == ScenarioKind::convergence) {
        const json& c = need(j, "", "convergence");
        allow_keys(c, "convergence", {"steps"});
        ConvergenceSpec cs;
        cs.steps = opt(c, "convergence", "steps", 20, as_int);
        if (cs.steps < 1) throw ConfigError("convergence.steps", "must be >= 1");
        if (s.stability->direction != Direction::forward) throw ConfigError("stability.direction", "convergence runs are forward");
        s.convergence = cs;
      }
      break;
    }
    case ScenarioKind::oracle:
      forbid_except({"oracle"});
      s.oracle = parse_oracle(need(j, "", "oracle"), "oracle");
      break;
    case ScenarioKind::characterization:
      forbid_except({"norm", "characterization"});
      s.norm = parse_norm(need(j, "", "norm"), "norm");
      s.characterization = parse_characterization(need(j, "", "characterization"), "characterization");
      break;
    case ScenarioKind::bound_sweep:
      forbid_except({"sweep"});
      s.sweep = parse_sweep(need(j, "", "sweep"), "sweep");
      break;
    case ScenarioKind::bound_equality:
      forbid_except({"equality"});
      s.equality = parse_equality(need(j, "", "equality"), "equality");
      break;
  }

  if (j.contains("output")) {
    const json& o = j.at("output");
    allow_keys(o, "output", {"dir", "csv", "plotdata"});
    s.output.dir = opt(o, "output", "dir", s.output.dir, as_string);
    s.output.csv = opt(o, "output", "csv", std::string(), as_string);
    if (o.contains("plotdata")) s.output.plotdata = as_string(o.at("plotdata"), "output.plotdata");
  }
  if (s.output.csv.empty()) s.output.csv = s.name + ".csv";
  return s;
}

inline Scenario parse_scenario_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("JSON parse error: ") + e.what());
  }
  return parse_scenario(j);
}

}  // namespace qstab::harness
