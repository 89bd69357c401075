#pragma once

// Concrete model of the C*-algebra as M_k(C), elements of finitely generated
// modules over it, and Haar sampling of its unitary group.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "qstab/error.hpp"

namespace qstab {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;

inline constexpr double kUnitaryTol = 1e-10;

class AlgebraElement {
 public:
  AlgebraElement() : m_(CMatrix::Zero(1, 1)) {}

  explicit AlgebraElement(CMatrix m) : m_(std::move(m)) {
    require(m_.rows() == m_.cols() && m_.rows() >= 1, ErrorKind::dimension_mismatch,
            "algebra element must be a non-empty square matrix");
    require(m_.allFinite(), ErrorKind::invalid_argument, "algebra element has non-finite entries");
  }

  static AlgebraElement scalar(Complex z) {
    CMatrix m(1, 1);
    m(0, 0) = z;
    return AlgebraElement(std::move(m));
  }
  static AlgebraElement identity(int k) { return AlgebraElement(CMatrix::Identity(k, k)); }
  static AlgebraElement zero(int k) { return AlgebraElement(CMatrix::Zero(k, k)); }

  int dim() const { return static_cast<int>(m_.rows()); }
  const CMatrix& matrix() const { return m_; }
  Complex operator()(int r, int c) const { return m_(r, c); }

  AlgebraElement adjoint() const { return raw(m_.adjoint()); }
  double frobenius() const { return m_.norm(); }
  bool is_finite() const { return m_.allFinite(); }

  double operator_norm() const {
    Eigen::JacobiSVD<CMatrix> svd(m_);
    return svd.singularValues()(0);
  }

  bool is_self_adjoint(double tol = kUnitaryTol) const { return (m_ - m_.adjoint()).norm() <= tol; }

  friend AlgebraElement operator+(const AlgebraElement& a, const AlgebraElement& b) {
    check_same(a, b);
    return raw(a.m_ + b.m_);
  }
  friend AlgebraElement operator-(const AlgebraElement& a, const AlgebraElement& b) {
    check_same(a, b);
    return raw(a.m_ - b.m_);
  }
  friend AlgebraElement operator*(const AlgebraElement& a, const AlgebraElement& b) {
    check_same(a, b);
    return raw(a.m_ * b.m_);
  }
  friend AlgebraElement operator*(Complex s, const AlgebraElement& a) { return raw(s * a.m_); }
  friend AlgebraElement operator*(double s, const AlgebraElement& a) { return raw(s * a.m_); }
  AlgebraElement operator-() const { return raw(-m_); }

  AlgebraElement& operator+=(const AlgebraElement& b) {
    check_same(*this, b);
    m_ += b.m_;
    return *this;
  }

 private:
  // Arithmetic results skip the finiteness check; overflow is detected by the
  // iteration guards that produce large arguments in the first place.
  static AlgebraElement raw(CMatrix m) {
    AlgebraElement e;
    e.m_ = std::move(m);
    return e;
  }
  static void check_same(const AlgebraElement& a, const AlgebraElement& b) {
    require(a.dim() == b.dim(), ErrorKind::dimension_mismatch,
            "algebra dimensions differ: " + std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
  }

  CMatrix m_;
};

/// An algebra element U with UU* = I (within kUnitaryTol in Frobenius norm).
class Unitary {
 public:
  static Unitary from(const AlgebraElement& u) {
    const int k = u.dim();
    const double defect = (u.matrix() * u.matrix().adjoint() - CMatrix::Identity(k, k)).norm();
    require(defect <= kUnitaryTol, ErrorKind::invalid_argument,
            "not unitary: ||UU* - I||_F = " + std::to_string(defect));
    return Unitary(u);
  }
  static Unitary identity(int k) { return Unitary(AlgebraElement::identity(k)); }

  const AlgebraElement& element() const { return u_; }
  int dim() const { return u_.dim(); }

 private:
  explicit Unitary(AlgebraElement u) : u_(std::move(u)) {}
  AlgebraElement u_;
};

enum class ScalarField { real, complex };

/// Haar-distributed unitary (complex field) or orthogonal (real field) matrix:
/// QR of a Gaussian matrix with the phases of diag(R) folded back into Q.
inline Unitary sample_unitary(int k, std::uint64_t seed, ScalarField field = ScalarField::complex) {
  require(k >= 1, ErrorKind::invalid_argument, "unitary dimension must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  CMatrix z(k, k);
  for (int r = 0; r < k; ++r) {
    for (int c = 0; c < k; ++c) {
      const double re = gauss(rng);
      const double im = field == ScalarField::complex ? gauss(rng) : 0.0;
      z(r, c) = Complex(re, im) / std::sqrt(2.0);
    }
  }
  Eigen::HouseholderQR<CMatrix> qr(z);
  CMatrix q = qr.householderQ();
  const CMatrix& packed = qr.matrixQR();
  for (int i = 0; i < k; ++i) {
    const Complex rii = packed(i, i);
    const double mag = std::abs(rii);
    const Complex phase = mag > 0.0 ? rii / mag : Complex(1.0, 0.0);
    q.col(i) *= phase;
  }
  return Unitary::from(AlgebraElement(std::move(q)));
}

enum class HatMode { left, right, avg };

/// aa*, a*a or their mean.
inline AlgebraElement hat(const AlgebraElement& a, HatMode mode) {
  const AlgebraElement aa = a * a.adjoint();
  const AlgebraElement a_a = a.adjoint() * a;
  switch (mode) {
    case HatMode::left: return aa;
    case HatMode::right: return a_a;
    case HatMode::avg: return 0.5 * (aa + a_a);
  }
  return aa;
}

/// Element of the module A^d: d coordinates in M_k(C).
class ModulePoint {
 public:
  ModulePoint() = default;

  explicit ModulePoint(std::vector<AlgebraElement> coords) : coords_(std::move(coords)) {
    require(!coords_.empty(), ErrorKind::dimension_mismatch, "module point needs at least one coordinate");
    for (const auto& c : coords_) {
      require(c.dim() == coords_.front().dim(), ErrorKind::dimension_mismatch,
              "module coordinates must share one algebra dimension");
    }
  }

  static ModulePoint zero(int k, int d) {
    return ModulePoint(std::vector<AlgebraElement>(static_cast<std::size_t>(d), AlgebraElement::zero(k)));
  }

  static ModulePoint from_reals(const std::vector<double>& xs) {
    std::vector<AlgebraElement> c;
    c.reserve(xs.size());
    for (double x : xs) c.push_back(AlgebraElement::scalar(x));
    return ModulePoint(std::move(c));
  }

  static ModulePoint from_scalars(const std::vector<Complex>& xs) {
    std::vector<AlgebraElement> c;
    c.reserve(xs.size());
    for (Complex x : xs) c.push_back(AlgebraElement::scalar(x));
    return ModulePoint(std::move(c));
  }

  int rank() const { return static_cast<int>(coords_.size()); }
  int algebra_dim() const { return coords_.empty() ? 0 : coords_.front().dim(); }
  const AlgebraElement& operator[](int i) const { return coords_[static_cast<std::size_t>(i)]; }
  const std::vector<AlgebraElement>& coords() const { return coords_; }

  bool is_finite() const {
    for (const auto& c : coords_) {
      if (!c.is_finite()) return false;
    }
    return true;
  }

  /// Scalar value of a rank-1 point over M_1(C); convenience for scalar tests.
  Complex scalar() const {
    require(rank() == 1 && algebra_dim() == 1, ErrorKind::dimension_mismatch, "point is not a scalar");
    return coords_.front()(0, 0);
  }

  friend ModulePoint operator+(const ModulePoint& x, const ModulePoint& y) {
    return zip(x, y, [](const AlgebraElement& a, const AlgebraElement& b) { return a + b; });
  }
  friend ModulePoint operator-(const ModulePoint& x, const ModulePoint& y) {
    return zip(x, y, [](const AlgebraElement& a, const AlgebraElement& b) { return a - b; });
  }
  friend ModulePoint operator*(double s, const ModulePoint& x) {
    return x.map([s](const AlgebraElement& a) { return s * a; });
  }
  friend ModulePoint operator*(Complex s, const ModulePoint& x) {
    return x.map([s](const AlgebraElement& a) { return s * a; });
  }
  ModulePoint operator-() const {
    return map([](const AlgebraElement& a) { return -a; });
  }
  ModulePoint& operator+=(const ModulePoint& y) {
    check_shape(*this, y);
    for (std::size_t i = 0; i < coords_.size(); ++i) coords_[i] += y.coords_[i];
    return *this;
  }

  /// Left module action a·x, coordinatewise.
  ModulePoint act(const AlgebraElement& a) const {
    return map([&a](const AlgebraElement& c) { return a * c; });
  }

  /// b -> u b u*, coordinatewise.
  ModulePoint conjugate_by(const AlgebraElement& u) const {
    const AlgebraElement ua = u.adjoint();
    return map([&](const AlgebraElement& c) { return u * c * ua; });
  }

  template <typename F>
  ModulePoint map(F&& fn) const {
    std::vector<AlgebraElement> out;
    out.reserve(coords_.size());
    for (const auto& c : coords_) out.push_back(fn(c));
    ModulePoint p;
    p.coords_ = std::move(out);
    return p;
  }

 private:
  template <typename F>
  static ModulePoint zip(const ModulePoint& x, const ModulePoint& y, F&& fn) {
    check_shape(x, y);
    std::vector<AlgebraElement> out;
    out.reserve(x.coords_.size());
    for (std::size_t i = 0; i < x.coords_.size(); ++i) out.push_back(fn(x.coords_[i], y.coords_[i]));
    ModulePoint p;
    p.coords_ = std::move(out);
    return p;
  }
  static void check_shape(const ModulePoint& x, const ModulePoint& y) {
    require(x.rank() == y.rank() && x.algebra_dim() == y.algebra_dim(), ErrorKind::dimension_mismatch,
            "module points differ in shape");
  }

  std::vector<AlgebraElement> coords_;
};

inline ModulePoint sum(const std::vector<ModulePoint>& xs) {
  require(!xs.empty(), ErrorKind::invalid_argument, "sum of empty tuple");
  ModulePoint s = xs.front();
  for (std::size_t i = 1; i < xs.size(); ++i) s += xs[i];
  return s;
}

/// Shape of a module A^d over M_k; real modules carry real coordinates only.
struct ModuleShape {
  int k = 1;
  int d = 1;
  ScalarField field = ScalarField::real;
};

/// Seeded uniform sampler over the box [-half_width, half_width] in every real
/// (and, for complex modules, imaginary) coordinate entry.
class BoxSampler {
 public:
  BoxSampler(ModuleShape shape, std::uint64_t seed, double half_width = 10.0)
      : shape_(shape), rng_(seed), half_width_(half_width) {
    require(shape.k >= 1 && shape.d >= 1, ErrorKind::invalid_argument, "module shape must be positive");
    require(half_width > 0.0, ErrorKind::invalid_argument, "sampling box must be non-degenerate");
  }

  const ModuleShape& shape() const { return shape_; }

  ModulePoint point() {
    std::uniform_real_distribution<double> unif(-half_width_, half_width_);
    std::vector<AlgebraElement> coords;
    coords.reserve(static_cast<std::size_t>(shape_.d));
    for (int i = 0; i < shape_.d; ++i) {
      CMatrix m(shape_.k, shape_.k);
      for (int r = 0; r < shape_.k; ++r) {
        for (int c = 0; c < shape_.k; ++c) {
          const double re = unif(rng_);
          const double im = shape_.field == ScalarField::complex ? unif(rng_) : 0.0;
          m(r, c) = Complex(re, im);
        }
      }
      coords.emplace_back(std::move(m));
    }
    return ModulePoint(std::move(coords));
  }

  std::vector<ModulePoint> tuple(int n) {
    std::vector<ModulePoint> xs;
    xs.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) xs.push_back(point());
    return xs;
  }

  Unitary unitary() { return sample_unitary(shape_.k, rng_(), shape_.field); }

  std::uint64_t next_seed() { return rng_(); }

 private:
  ModuleShape shape_;
  std::mt19937_64 rng_;
  double half_width_;
};

}  // namespace qstab
