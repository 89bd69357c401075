#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "qstab/algebra.hpp"
#include "qstab/error.hpp"

namespace qstab {

class Mapping;

namespace family {

/// x -> sum_ij M_ij x_i x_j^*; real symmetric M, output rank 1.
/// Over real scalars this is x^T M x; over M_k it is covariant, Q(ux) = uQ(x)u*.
struct QuadraticForm {
  Eigen::MatrixXd coeffs;
};
/// x_i -> x_i x_i^*, coordinatewise.
struct MatrixSquare {};
/// x_i -> x_i^degree (matrix power), coordinatewise.
struct Monomial {
  int degree = 2;
};
/// Entrywise sin.
struct Sine {};
/// Entrywise t^3 / (1 + t^2): odd, linear growth, cubic near zero.
struct RationalOdd {};
/// x_i -> value * I, coordinatewise.
struct Constant {
  double value = 0.0;
};
/// x_i -> sin(Re tr x_i) * diag(1, -1, 1, ...): bounded, self-adjoint, not covariant.
struct HermitianBump {};
struct Perturbed {
  std::shared_ptr<const Mapping> base;
  std::shared_ptr<const Mapping> bump;
  double amplitude = 0.0;
};
struct Sum {
  std::vector<Mapping> terms;
};
/// Arbitrary callable; not serializable, intended for tests.
struct Custom {
  std::function<ModulePoint(const ModulePoint&)> fn;
  std::string label = "custom";
};

}  // namespace family

/// Evaluatable f: A^d -> A^e from a closed family. Values are immutable.
class Mapping {
 public:
  using Node = std::variant<family::QuadraticForm, family::MatrixSquare, family::Monomial, family::Sine,
                            family::RationalOdd, family::Constant, family::HermitianBump, family::Perturbed,
                            family::Sum, family::Custom>;

  static Mapping quadratic_form(Eigen::MatrixXd coeffs) {
    require(coeffs.rows() == coeffs.cols() && coeffs.rows() >= 1, ErrorKind::invalid_argument,
            "quadratic form needs a square coefficient matrix");
    require((coeffs - coeffs.transpose()).norm() <= 1e-12 * (1.0 + coeffs.norm()), ErrorKind::invalid_argument,
            "quadratic form coefficients must be symmetric");
    return Mapping(family::QuadraticForm{std::move(coeffs)});
  }
  static Mapping matrix_square() { return Mapping(family::MatrixSquare{}); }
  static Mapping monomial(int degree) {
    require(degree >= 0, ErrorKind::invalid_argument, "monomial degree must be >= 0");
    return Mapping(family::Monomial{degree});
  }
  static Mapping sine() { return Mapping(family::Sine{}); }
  static Mapping rational_odd() { return Mapping(family::RationalOdd{}); }
  static Mapping constant(double value) { return Mapping(family::Constant{value}); }
  static Mapping hermitian_bump() { return Mapping(family::HermitianBump{}); }
  static Mapping perturbed(Mapping base, Mapping bump, double amplitude) {
    return Mapping(family::Perturbed{std::make_shared<const Mapping>(std::move(base)),
                                     std::make_shared<const Mapping>(std::move(bump)), amplitude});
  }
  static Mapping sum(std::vector<Mapping> terms) {
    require(!terms.empty(), ErrorKind::invalid_argument, "sum mapping needs at least one term");
    return Mapping(family::Sum{std::move(terms)});
  }
  static Mapping custom(std::function<ModulePoint(const ModulePoint&)> fn, std::string label = "custom") {
    return Mapping(family::Custom{std::move(fn), std::move(label)});
  }

  const Node& node() const { return node_; }

  /// Domain rank the family insists on, if any.
  std::optional<int> domain_rank() const {
    return std::visit(
        [](const auto& f) -> std::optional<int> {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, family::QuadraticForm>) {
            return static_cast<int>(f.coeffs.rows());
          } else if constexpr (std::is_same_v<T, family::Perturbed>) {
            return f.base->domain_rank() ? f.base->domain_rank() : f.bump->domain_rank();
          } else if constexpr (std::is_same_v<T, family::Sum>) {
            for (const auto& t : f.terms) {
              if (auto r = t.domain_rank()) return r;
            }
            return std::nullopt;
          } else {
            return std::nullopt;
          }
        },
        node_);
  }

  ModulePoint operator()(const ModulePoint& x) const { return eval(x); }

  ModulePoint eval(const ModulePoint& x) const {
    if (auto r = domain_rank()) {
      require(*r == x.rank(), ErrorKind::dimension_mismatch,
              "mapping expects rank " + std::to_string(*r) + ", got " + std::to_string(x.rank()));
    }
    return std::visit([&x](const auto& f) { return eval_node(f, x); }, node_);
  }

  std::string describe() const {
    return std::visit(
        [](const auto& f) -> std::string {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, family::QuadraticForm>) return "quadratic_form";
          else if constexpr (std::is_same_v<T, family::MatrixSquare>) return "matrix_square";
          else if constexpr (std::is_same_v<T, family::Monomial>) return "monomial(" + std::to_string(f.degree) + ")";
          else if constexpr (std::is_same_v<T, family::Sine>) return "sine";
          else if constexpr (std::is_same_v<T, family::RationalOdd>) return "rational_odd";
          else if constexpr (std::is_same_v<T, family::Constant>) return "constant";
          else if constexpr (std::is_same_v<T, family::HermitianBump>) return "hermitian_bump";
          else if constexpr (std::is_same_v<T, family::Perturbed>)
            return f.base->describe() + " + a*" + f.bump->describe();
          else if constexpr (std::is_same_v<T, family::Sum>) return "sum";
          else return f.label;
        },
        node_);
  }

 private:
  explicit Mapping(Node node) : node_(std::move(node)) {}

  template <typename Entry>
  static ModulePoint entrywise(const ModulePoint& x, Entry&& fn) {
    return x.map([&](const AlgebraElement& a) { return AlgebraElement(a.matrix().unaryExpr(fn)); });
  }

  static ModulePoint eval_node(const family::QuadraticForm& f, const ModulePoint& x) {
    const int d = x.rank();
    const int k = x.algebra_dim();
    CMatrix acc = CMatrix::Zero(k, k);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        const double c = f.coeffs(i, j);
        if (c != 0.0) acc += c * (x[i].matrix() * x[j].matrix().adjoint());
      }
    }
    return ModulePoint({AlgebraElement(std::move(acc))});
  }
  static ModulePoint eval_node(const family::MatrixSquare&, const ModulePoint& x) {
    return x.map([](const AlgebraElement& a) { return a * a.adjoint(); });
  }
  static ModulePoint eval_node(const family::Monomial& f, const ModulePoint& x) {
    return x.map([&f](const AlgebraElement& a) {
      AlgebraElement out = AlgebraElement::identity(a.dim());
      for (int i = 0; i < f.degree; ++i) out = out * a;
      return out;
    });
  }
  static ModulePoint eval_node(const family::Sine&, const ModulePoint& x) {
    return entrywise(x, [](Complex z) { return std::sin(z); });
  }
  static ModulePoint eval_node(const family::RationalOdd&, const ModulePoint& x) {
    return entrywise(x, [](Complex z) {
      // t - t/(1+t^2) avoids forming t^3 for large arguments.
      return z - z / (1.0 + z * z);
    });
  }
  static ModulePoint eval_node(const family::Constant& f, const ModulePoint& x) {
    return x.map([&f](const AlgebraElement& a) { return f.value * AlgebraElement::identity(a.dim()); });
  }
  static ModulePoint eval_node(const family::HermitianBump&, const ModulePoint& x) {
    return x.map([](const AlgebraElement& a) {
      const int k = a.dim();
      CMatrix m = CMatrix::Zero(k, k);
      const double s = std::sin(a.matrix().trace().real());
      for (int i = 0; i < k; ++i) m(i, i) = (i % 2 == 0 ? s : -s);
      return AlgebraElement(std::move(m));
    });
  }
  static ModulePoint eval_node(const family::Perturbed& f, const ModulePoint& x) {
    return f.base->eval(x) + f.amplitude * f.bump->eval(x);
  }
  static ModulePoint eval_node(const family::Sum& f, const ModulePoint& x) {
    ModulePoint acc = f.terms.front().eval(x);
    for (std::size_t i = 1; i < f.terms.size(); ++i) acc += f.terms[i].eval(x);
    return acc;
  }
  static ModulePoint eval_node(const family::Custom& f, const ModulePoint& x) { return f.fn(x); }

  Node node_;
};

}  // namespace qstab
