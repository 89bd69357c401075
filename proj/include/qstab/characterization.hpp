#pragma once

// Polarization of quadratic maps into biadditive forms, and the test of
// whether a norm comes from an inner product via the quadratic identities
// applied to Q = ||.||^2.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "qstab/algebra.hpp"
#include "qstab/equations.hpp"
#include "qstab/mapping.hpp"
#include "qstab/quasi_norm.hpp"

namespace qstab {

/// Real codomains use B(x,y) = [Q(x+y) - Q(x-y)]/4; complex codomains add the
/// i-twisted pair, B(x,y) = [Q(x+y) - Q(x-y) + iQ(x+iy) - iQ(x-iy)]/4.
inline ModulePoint biadditive_from_quadratic(const Mapping& quad, const ModulePoint& x, const ModulePoint& y,
                                             ScalarField field = ScalarField::real) {
  ModulePoint b = quad(x + y) - quad(x - y);
  if (field == ScalarField::complex) {
    const Complex i(0.0, 1.0);
    b += i * quad(x + i * y);
    b += -i * quad(x - i * y);
  }
  return 0.25 * b;
}

struct DiagonalReport {
  bool holds = true;
  std::string reason;
  double worst = 0.0;  // largest normalized defect seen
};

/// Checks on sampled triples that the polarized B is symmetric, additive in
/// each slot and recovers Q on the diagonal. Defects are measured in the
/// Frobenius sense and normalized by 1 + the magnitudes of the values compared.
inline DiagonalReport check_diagonal(const Mapping& quad, BoxSampler& sampler, int samples, double tol = 1e-9) {
  DiagonalReport rep;
  auto size = [](const ModulePoint& p) {
    double s = 0.0;
    for (const auto& c : p.coords()) s += c.frobenius();
    return s;
  };
  auto check = [&](const char* what, const ModulePoint& lhs, const ModulePoint& rhs) {
    const double defect = size(lhs - rhs) / (1.0 + size(lhs) + size(rhs));
    rep.worst = std::max(rep.worst, defect);
    if (defect > tol && rep.holds) {
      rep.holds = false;
      rep.reason = std::string(what) + " defect " + std::to_string(defect);
    }
  };
  for (int s = 0; s < samples; ++s) {
    const ModulePoint x = sampler.point();
    const ModulePoint y = sampler.point();
    const ModulePoint z = sampler.point();
    const ModulePoint bxy = biadditive_from_quadratic(quad, x, y);
    check("symmetry", bxy, biadditive_from_quadratic(quad, y, x));
    check("additivity (first slot)", biadditive_from_quadratic(quad, x + z, y), bxy + biadditive_from_quadratic(quad, z, y));
    check("additivity (second slot)", biadditive_from_quadratic(quad, x, y + z), bxy + biadditive_from_quadratic(quad, x, z));
    check("diagonal", quad(x), biadditive_from_quadratic(quad, x, x));
  }
  return rep;
}

/// Which quadratic identity the squared norm is tested against.
struct CharacterizationMode {
  enum class Identity { b, c } identity = Identity::b;
  int parameter = 2;  // a for identity (b), n for identity (c)

  static CharacterizationMode b(int a) { return {Identity::b, a}; }
  static CharacterizationMode c(int n) { return {Identity::c, n}; }
};

struct CharacterizationResult {
  bool inner_product = true;
  double sup_relative_residual = 0.0;
  std::vector<ModulePoint> witness;  // first violating tuple, if any
  double witness_residual = 0.0;
};

namespace detail {

inline std::vector<ModulePoint> unit_vector_tuple(int dim, int count) {
  std::vector<ModulePoint> xs;
  for (int i = 0; i < count; ++i) {
    std::vector<double> v(static_cast<std::size_t>(dim), 0.0);
    if (i < dim) v[static_cast<std::size_t>(i)] = 1.0;
    xs.push_back(ModulePoint::from_reals(v));
  }
  return xs;
}

}  // namespace detail

/// Evaluates identity (b) or (c) with Q = ||.||^2 on real vectors of the norm's
/// dimension. The tuple of leading unit vectors (e_1, e_2, 0, ...) is scored
/// first, then `trials` random tuples. Passes iff every residual is within
/// tol * (1 + sum of the squared norms involved).
inline CharacterizationResult inner_product_characterization(const QuasiNormSpec& spec, CharacterizationMode mode,
                                                             int trials, std::uint64_t seed, double tol = 1e-9) {
  require(trials >= 1, ErrorKind::invalid_argument, "trials must be >= 1");
  const bool is_b = mode.identity == CharacterizationMode::Identity::b;
  if (is_b) {
    require(std::abs(mode.parameter) != 1, ErrorKind::invalid_argument, "identity (b) needs |a| != 1");
  } else {
    require(mode.parameter >= 3, ErrorKind::invalid_argument, "identity (c) needs n >= 3");
  }
  const Mapping squared_norm = Mapping::custom(
      [spec](const ModulePoint& x) {
        const double v = norm_eval(spec, x);
        return ModulePoint::from_reals({v * v});
      },
      "squared_norm");
  auto sq = [&](const ModulePoint& x) { return std::pow(norm_eval(spec, x), 2); };

  CharacterizationResult out;
  auto score = [&](const std::vector<ModulePoint>& xs) {
    const ModulePoint r = is_b ? residual_fe3_0(squared_norm, mode.parameter, xs[0], xs[1])
                               : residual_fe3(squared_norm, mode.parameter, xs);
    double scale = 1.0;
    for (const auto& x : xs) scale += sq(x);
    if (is_b) scale *= 1.0 + mode.parameter * mode.parameter;
    else scale *= mode.parameter * mode.parameter;
    const double res = std::abs(r.scalar());
    out.sup_relative_residual = std::max(out.sup_relative_residual, res / scale);
    if (res > tol * scale && out.inner_product) {
      out.inner_product = false;
      out.witness = xs;
      out.witness_residual = res;
    }
  };

  const int arity = is_b ? 2 : mode.parameter;
  score(detail::unit_vector_tuple(spec.dim(), arity));
  BoxSampler sampler({1, spec.dim(), ScalarField::real}, seed);
  for (int t = 0; t < trials; ++t) score(sampler.tuple(arity));
  return out;
}

}  // namespace qstab
