#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qstab/harness/scenario.hpp"

namespace qstab::harness {

struct Preset {
  std::string name;
  std::string tag;
  std::string description;
  std::string config;  // scenario JSON
};

inline const std::vector<Preset>& presets() {
  static const std::vector<Preset> registry = {
      {"lemma21-oracle", "oracle: three-point equation",
       "fe2 and fe1 have the same solutions over F_q^d, q in {5,7,11,13}, d in {1,2}",
       R"({"name": "lemma21-oracle", "kind": "oracle",
           "oracle": {"pairs": [["fe2", "fe1"]], "q": [5, 7, 11, 13], "d": [1, 2]}})"},
      {"lemma23-oracle", "oracle: scaled two-point equation",
       "fe3_0(a) and fe1 have the same solutions for a in {0,2,3,4} over admissible F_q^d",
       R"({"name": "lemma23-oracle", "kind": "oracle",
           "oracle": {"pairs": [["fe3_0:0", "fe1"], ["fe3_0:2", "fe1"], ["fe3_0:3", "fe1"], ["fe3_0:4", "fe1"]],
                      "q": [5, 7, 11, 13], "d": [1, 2]}})"},
      {"thm24-oracle", "oracle: n-point equation",
       "fe3 with n=3 and fe1 over F_5: spaces equal, dim 1",
       R"({"name": "thm24-oracle", "kind": "oracle",
           "oracle": {"pairs": [["fe3:3", "fe1"]], "q": 5, "d": 1}})"},
      {"thm24-grid", "oracle: n-point equation",
       "fe3 with n in {3,4,5} against fe1 over admissible F_q^d, q in {5,7,11,13}, d in {1,2}",
       R"({"name": "thm24-grid", "kind": "oracle",
           "oracle": {"pairs": [["fe3:3", "fe1"], ["fe3:4", "fe1"], ["fe3:5", "fe1"]],
                      "q": [5, 7, 11, 13], "d": [1, 2]}})"},
      {"cor25-euclidean", "characterization: inner product",
       "the squared Euclidean norm on R^3 satisfies identities (b) and (c)",
       R"({"name": "cor25-euclidean", "kind": "characterization", "seed": 7,
           "norm": {"kind": "euclidean", "dim": 3},
           "characterization": {"modes": [{"identity": "b", "a": 2}, {"identity": "b", "a": 0},
                                          {"identity": "b", "a": 3}, {"identity": "c", "n": 3},
                                          {"identity": "c", "n": 4}],
                                "trials": 10000, "expect_inner_product": true}})"},
      {"cor25-l1", "characterization: inner product",
       "the squared l1 norm on R^2 violates identity (b); the witness is (e1, e2)",
       R"({"name": "cor25-l1", "kind": "characterization", "seed": 7,
           "norm": {"kind": "l1", "dim": 2},
           "characterization": {"modes": [{"identity": "b", "a": 2}], "trials": 1000,
                                "expect_inner_product": false}})"},
      {"cor33-forward", "stability: quasi-Banach, power control, forward",
       "n=3, K=1, r=1, f = t^2 + 0.1 t^3/(1+t^2): deviation within 5/6 |x| on 100 probes",
       R"({"name": "cor33-forward", "kind": "stability", "seed": 11,
           "equation": "fe3:3", "norm": {"kind": "euclidean", "dim": 1},
           "mapping": {"family": "perturbed", "base": {"family": "monomial", "degree": 2},
                       "bump": {"family": "rational_odd"}, "amplitude": 0.1},
           "control": {"variant": "power", "epsilon": 1, "r": 1},
           "stability": {"direction": "forward", "probes": {"random": 100}},
           "output": {"plotdata": "cor33-forward.plot.csv"}})"},
      {"cor33-backward", "stability: quasi-Banach, power control, backward",
       "n=3, K=1, r=3, f = t^2 + 0.1 t^3 with fitted epsilon: deviation within 5 epsilon |x|^3 / 12",
       R"({"name": "cor33-backward", "kind": "stability", "seed": 12,
           "equation": "fe3:3", "norm": {"kind": "euclidean", "dim": 1},
           "mapping": {"family": "perturbed", "base": {"family": "monomial", "degree": 2},
                       "bump": {"family": "monomial", "degree": 3}, "amplitude": 0.1},
           "control": {"variant": "power", "epsilon": "fit", "r": 3},
           "stability": {"direction": "backward", "probes": {"random": 100}},
           "output": {"plotdata": "cor33-backward.plot.csv"}})"},
      {"cor35-quasi", "stability: quasi-Banach, constant control",
       "l^(1/2) quasi-norm on R^2 (K=2), f = x*x + 0.1 sin x, fitted theta: deviation within 5 theta / 3",
       R"({"name": "cor35-quasi", "kind": "stability", "seed": 13,
           "equation": "fe3:3", "norm": {"kind": "lp_quasi", "dim": 2, "p": 0.5},
           "mapping": {"family": "perturbed", "base": {"family": "matrix_square"},
                       "bump": {"family": "sine"}, "amplitude": 0.1},
           "control": {"variant": "constant", "theta": "fit"},
           "stability": {"direction": "forward", "probes": {"random": 100}},
           "output": {"plotdata": "cor35-quasi.plot.csv"}})"},
      {"cor35-constant", "stability: quasi-Banach, constant control",
       "n=3, K=1, theta=1.2, f = t^2 + 0.1 sin t: deviation within 2/3",
       R"({"name": "cor35-constant", "kind": "stability", "seed": 14,
           "equation": "fe3:3", "norm": {"kind": "euclidean", "dim": 1},
           "mapping": {"family": "perturbed", "base": {"family": "monomial", "degree": 2},
                       "bump": {"family": "sine"}, "amplitude": 0.1},
           "control": {"variant": "constant", "theta": 1.2},
           "stability": {"direction": "forward", "probes": {"random": 100}},
           "output": {"plotdata": "cor35-constant.plot.csv"}})"},
      {"cor43-p1", "stability: p-Banach, p = 1",
       "p=1, n=3, r=1, f = t^2 + 0.1 t^3/(1+t^2), fitted epsilon: deviation within 5 epsilon |x| / 6",
       R"({"name": "cor43-p1", "kind": "stability", "seed": 15,
           "equation": "fe3:3", "norm": {"kind": "euclidean", "dim": 1},
           "mapping": {"family": "perturbed", "base": {"family": "monomial", "degree": 2},
                       "bump": {"family": "rational_odd"}, "amplitude": 0.1},
           "control": {"variant": "power", "epsilon": "fit", "r": 1},
           "stability": {"direction": "forward", "setting": "p_banach", "probes": {"random": 100}},
           "output": {"plotdata": "cor43-p1.plot.csv"}})"},
      {"cor43-p-half", "stability: p-Banach, p = 1/2",
       "l^(1/2) on R^2 as a 1/2-norm, r=1, f = x*x + 0.1 x^3/(1+x^2), fitted epsilon",
       R"({"name": "cor43-p-half", "kind": "stability", "seed": 16,
           "equation": "fe3:3", "norm": {"kind": "lp_quasi", "dim": 2, "p": 0.5},
           "mapping": {"family": "perturbed", "base": {"family": "matrix_square"},
                       "bump": {"family": "rational_odd"}, "amplitude": 0.1},
           "control": {"variant": "power", "epsilon": "fit", "r": 1},
           "stability": {"direction": "forward", "setting": "p_banach", "probes": {"random": 100}},
           "output": {"plotdata": "cor43-p-half.plot.csv"}})"},
      {"rem44-equality", "bounds: p = 1 against K = 1",
       "series and closed-form bounds agree between the K=1 quasi and p=1 settings",
       R"({"name": "rem44-equality", "kind": "bound_equality",
           "equality": {"n": [3, 4, 5], "r": [0.5, 1, 1.5, 3, 4], "norm_x": [0.5, 1, 2, 7]}})"},
      {"unitary-covariance", "stability: unitary covariance",
       "M_2(C), f = x x* + 0.1 hermitian bump: Q(ux) = u Q(x) u* over 100 Haar unitaries",
       R"({"name": "unitary-covariance", "kind": "covariance", "seed": 17,
           "equation": "fe3:3", "norm": {"kind": "euclidean", "dim": 1},
           "mapping": {"family": "perturbed", "base": {"family": "matrix_square"},
                       "bump": {"family": "hermitian_bump"}, "amplitude": 0.1},
           "stability": {"direction": "forward", "field": "complex", "algebra_dim": 2, "tol": 1e-6,
                         "probes": {"random": 5}},
           "covariance": {"unitary_samples": 100}})"},
      {"convergence-rate", "stability: rate of the direct method",
       "f = t^2 + sin t, n=3: the gap at step m stays below C 4^-m for m <= 20",
       R"({"name": "convergence-rate", "kind": "convergence", "seed": 18,
           "equation": "fe3:3", "norm": {"kind": "euclidean", "dim": 1},
           "mapping": {"family": "perturbed", "base": {"family": "monomial", "degree": 2},
                       "bump": {"family": "sine"}, "amplitude": 1},
           "control": {"variant": "constant", "theta": "fit"},
           "stability": {"direction": "forward", "tol": 1e-15, "probes": [[1], [0.5], [-3], [7]]},
           "convergence": {"steps": 20}})"},
      {"open-problem-3.6", "open problem: constant control",
       "K sweep 1..5 with n=3: the denominator (n-1)^2 - K crosses 0 at K=4, beyond which no bound exists",
       R"({"name": "open-problem-3.6", "kind": "bound_sweep",
           "sweep": {"parameter": "K", "values": [1, 1.5, 2, 2.5, 3, 3.5, 3.9, 4, 4.5, 5],
                     "n": 3, "variant": "constant", "amplitude": 1}})"},
      {"open-problem-3.4", "open problem: power control",
       "r sweep with n=3, K=2: no bound for |r - 2| <= log_2 K",
       R"({"name": "open-problem-3.4", "kind": "bound_sweep",
           "sweep": {"parameter": "r", "values": [0.25, 0.5, 0.75, 1, 1.5, 2, 2.5, 3, 3.5, 4],
                     "n": 3, "K": 2, "variant": "power", "amplitude": 1, "norm_x": 1}})"},
  };
  return registry;
}

inline const Preset* find_preset(const std::string& name) {
  const auto& all = presets();
  auto it = std::find_if(all.begin(), all.end(), [&](const Preset& p) { return p.name == name; });
  return it == all.end() ? nullptr : &*it;
}

/// The preset's scenario, with the seed replaced when one is given.
inline Scenario preset_scenario(const Preset& p, std::optional<std::uint64_t> seed = std::nullopt) {
  nlohmann::json j = nlohmann::json::parse(p.config);
  if (seed) j["seed"] = *seed;
  return parse_scenario(j);
}

}  // namespace qstab::harness
