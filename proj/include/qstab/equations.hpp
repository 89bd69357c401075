#pragma once

// Residuals (left side minus right side) of the quadratic functional equations
// and of their unitary-twisted approximate remainders. Residuals are codomain
// values; norms are taken separately so matrix- and scalar-valued maps share
// one path.
//
//   fe1      f(x+y) + f(x-y) - 2f(x) - 2f(y)
//   fe2      3f(x-y) + 3f(y-z) + 3f(x-z) - f(y+z-2x) - f(x+z-2y) - f(x+y-2z)
//   fe3(n)   n sum_{i<j} f(x_i - x_j) - sum_i f(S - n x_i),   S = sum_j x_j
//   fe3_0(a) f(ax+y) + f(x+ay) + (a-1)f(x-y) - (a+1)f(x+y) - (a^2-1)[f(x)+f(y)]

#include <algorithm>
#include <cstdlib>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qstab/algebra.hpp"
#include "qstab/error.hpp"
#include "qstab/mapping.hpp"
#include "qstab/quasi_norm.hpp"

namespace qstab {

enum class EquationId { fe1, fe2, fe3, fe3_0 };

class EquationSpec {
 public:
  static EquationSpec fe1() { return EquationSpec(EquationId::fe1, 0, 0); }
  static EquationSpec fe2() { return EquationSpec(EquationId::fe2, 3, 0); }
  static EquationSpec fe3(int n) {
    require(n >= 3, ErrorKind::invalid_argument, "fe3 arity must be >= 3, got " + std::to_string(n));
    return EquationSpec(EquationId::fe3, n, 0);
  }
  static EquationSpec fe3_0(int a) {
    require(std::abs(a) != 1, ErrorKind::invalid_argument, "fe3_0 needs |a| != 1, got a = " + std::to_string(a));
    return EquationSpec(EquationId::fe3_0, 0, a);
  }

  /// Parses "fe1", "fe2", "fe3:<n>", "fe3_0:<a>".
  static EquationSpec parse(const std::string& text) {
    const auto colon = text.find(':');
    const std::string head = text.substr(0, colon);
    auto arg = [&]() -> int {
      require(colon != std::string::npos, ErrorKind::invalid_argument, "equation '" + text + "' needs a parameter");
      try {
        std::size_t used = 0;
        const int v = std::stoi(text.substr(colon + 1), &used);
        require(used == text.size() - colon - 1, ErrorKind::invalid_argument, "bad parameter in '" + text + "'");
        return v;
      } catch (const std::logic_error&) {
        throw Error(ErrorKind::invalid_argument, "bad parameter in '" + text + "'");
      }
    };
    if (head == "fe1" && colon == std::string::npos) return fe1();
    if (head == "fe2" && colon == std::string::npos) return fe2();
    if (head == "fe3") return fe3(arg());
    if (head == "fe3_0") return fe3_0(arg());
    throw Error(ErrorKind::invalid_argument, "unknown equation '" + text + "'");
  }

  EquationId id() const { return id_; }
  int n() const { return n_; }
  int a() const { return a_; }

  /// Number of points one instance of the equation consumes.
  int arity() const {
    switch (id_) {
      case EquationId::fe1:
      case EquationId::fe3_0: return 2;
      case EquationId::fe2: return 3;
      case EquationId::fe3: return n_;
    }
    return 0;
  }

  std::string name() const {
    switch (id_) {
      case EquationId::fe1: return "fe1";
      case EquationId::fe2: return "fe2";
      case EquationId::fe3: return "fe3:" + std::to_string(n_);
      case EquationId::fe3_0: return "fe3_0:" + std::to_string(a_);
    }
    return "?";
  }

 private:
  EquationSpec(EquationId id, int n, int a) : id_(id), n_(n), a_(a) {}
  EquationId id_;
  int n_;
  int a_;
};

namespace detail {

inline void check_domain(const Mapping& f, std::span<const ModulePoint> xs) {
  for (const auto& x : xs) {
    require(x.rank() == xs.front().rank() && x.algebra_dim() == xs.front().algebra_dim(),
            ErrorKind::dimension_mismatch, "residual arguments differ in shape");
  }
  if (auto r = f.domain_rank()) {
    require(*r == xs.front().rank(), ErrorKind::dimension_mismatch,
            "mapping domain rank " + std::to_string(*r) + " does not match argument rank " +
                std::to_string(xs.front().rank()));
  }
}

/// Shared core of fe3 and D_u f: n sum_{i<j} f(inner(x_i) - inner(x_j)) - sum_i outer(f(S - n x_i)).
template <typename Inner, typename Outer>
ModulePoint centroid_residual(const Mapping& f, int n, std::span<const ModulePoint> xs, Inner&& inner,
                              Outer&& outer) {
  require(n >= 3, ErrorKind::invalid_argument, "arity must be >= 3, got " + std::to_string(n));
  require(static_cast<int>(xs.size()) == n, ErrorKind::invalid_argument,
          "expected " + std::to_string(n) + " points, got " + std::to_string(xs.size()));
  check_domain(f, xs);
  std::vector<ModulePoint> moved;
  moved.reserve(xs.size());
  for (const auto& x : xs) moved.push_back(inner(x));

  std::optional<ModulePoint> pair_sum;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      ModulePoint v = f(moved[i] - moved[j]);
      if (pair_sum) *pair_sum += v;
      else pair_sum = std::move(v);
    }
  }
  ModulePoint total = xs[0];
  for (int j = 1; j < n; ++j) total += xs[j];
  ModulePoint result = static_cast<double>(n) * *pair_sum;
  for (int i = 0; i < n; ++i) {
    result += -outer(f(total - static_cast<double>(n) * xs[i]));
  }
  return result;
}

}  // namespace detail

inline ModulePoint residual_fe1(const Mapping& f, const ModulePoint& x, const ModulePoint& y) {
  const ModulePoint args[] = {x, y};
  detail::check_domain(f, args);
  return f(x + y) + f(x - y) - 2.0 * f(x) - 2.0 * f(y);
}

inline ModulePoint residual_fe2(const Mapping& f, const ModulePoint& x, const ModulePoint& y, const ModulePoint& z) {
  const ModulePoint args[] = {x, y, z};
  detail::check_domain(f, args);
  const ModulePoint lhs = 3.0 * f(x - y) + 3.0 * f(y - z) + 3.0 * f(x - z);
  const ModulePoint rhs = f(y + z - 2.0 * x) + f(x + z - 2.0 * y) + f(x + y - 2.0 * z);
  return lhs - rhs;
}

inline ModulePoint residual_fe3(const Mapping& f, int n, std::span<const ModulePoint> xs) {
  auto same = [](const ModulePoint& p) { return p; };
  return detail::centroid_residual(f, n, xs, same, same);
}

inline ModulePoint residual_fe3_0(const Mapping& f, int a, const ModulePoint& x, const ModulePoint& y) {
  require(std::abs(a) != 1, ErrorKind::invalid_argument, "fe3_0 needs |a| != 1, got a = " + std::to_string(a));
  const ModulePoint args[] = {x, y};
  detail::check_domain(f, args);
  const double ad = a;
  const ModulePoint lhs = f(ad * x + y) + f(x + ad * y) + (ad - 1.0) * f(x - y);
  const ModulePoint rhs = (ad + 1.0) * f(x + y) + (ad * ad - 1.0) * (f(x) + f(y));
  return lhs - rhs;
}

/// D_u f(x_1..x_n) = n sum_{i<j} f(u x_i - u x_j) - sum_i u f(S - n x_i) u*.
inline ModulePoint approximate_remainder(const Mapping& f, const Unitary& u, int n, std::span<const ModulePoint> xs) {
  require(!xs.empty() && xs.front().algebra_dim() == u.dim(), ErrorKind::dimension_mismatch,
          "unitary dimension does not match the module's algebra");
  const AlgebraElement& ue = u.element();
  return detail::centroid_residual(
      f, n, xs, [&](const ModulePoint& p) { return p.act(ue); },
      [&](const ModulePoint& v) {
        require(v.algebra_dim() == ue.dim(), ErrorKind::dimension_mismatch,
                "codomain algebra dimension does not match the unitary");
        return v.conjugate_by(ue);
      });
}

/// Variant with the self-adjoint weight hat(u): n sum f(u x_i - u x_j) - sum hat(u) f(S - n x_i),
/// for algebra elements of operator norm one.
inline ModulePoint approximate_remainder_sa(const Mapping& f, const AlgebraElement& u, HatMode mode, int n,
                                            std::span<const ModulePoint> xs) {
  const double unorm = u.operator_norm();
  require(std::abs(unorm - 1.0) <= 1e-9, ErrorKind::invalid_argument,
          "element must have norm 1, got " + std::to_string(unorm));
  require(!xs.empty() && xs.front().algebra_dim() == u.dim(), ErrorKind::dimension_mismatch,
          "element dimension does not match the module's algebra");
  const AlgebraElement weight = hat(u, mode);
  return detail::centroid_residual(
      f, n, xs, [&](const ModulePoint& p) { return p.act(u); },
      [&](const ModulePoint& v) { return v.act(weight); });
}

/// Residual of `eq` at the tuple xs (fe3 without twisting).
inline ModulePoint residual(const Mapping& f, const EquationSpec& eq, std::span<const ModulePoint> xs) {
  require(static_cast<int>(xs.size()) == eq.arity(), ErrorKind::invalid_argument,
          eq.name() + " expects " + std::to_string(eq.arity()) + " points");
  switch (eq.id()) {
    case EquationId::fe1: return residual_fe1(f, xs[0], xs[1]);
    case EquationId::fe2: return residual_fe2(f, xs[0], xs[1], xs[2]);
    case EquationId::fe3: return residual_fe3(f, eq.n(), xs);
    case EquationId::fe3_0: return residual_fe3_0(f, eq.a(), xs[0], xs[1]);
  }
  throw Error(ErrorKind::invalid_argument, "unknown equation");
}

/// Max residual norm over `trials` sampled tuples. For fe3 each tuple is paired
/// with a sampled unitary and the twisted remainder D_u f is measured.
inline double empirical_sup_residual(const Mapping& f, const EquationSpec& eq, BoxSampler& sampler, int trials,
                                     const QuasiNormSpec& codomain_norm) {
  require(trials >= 1, ErrorKind::invalid_argument, "trials must be >= 1");
  double best = 0.0;
  for (int t = 0; t < trials; ++t) {
    const std::vector<ModulePoint> xs = sampler.tuple(eq.arity());
    ModulePoint r = eq.id() == EquationId::fe3 ? approximate_remainder(f, sampler.unitary(), eq.n(), xs)
                                               : residual(f, eq, xs);
    best = std::max(best, norm_eval(codomain_norm.with_dim(r.rank()), r));
  }
  return best;
}

}  // namespace qstab
