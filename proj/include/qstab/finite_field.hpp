#pragma once

// Exact solution spaces of the quadratic functional equations over the finite
// group F_q^d. A map f: F_q^d -> F_q is a table of q^d values; every
// instantiated equation tuple is one linear constraint on that table, so the
// solution space is the nullspace of the constraint matrix over F_q.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "qstab/equations.hpp"
#include "qstab/error.hpp"

namespace qstab::ff {

inline constexpr std::size_t kFullEnumerationLimit = 1'000'000;
inline constexpr std::size_t kSubsampleTuples = 1'000'000;
inline constexpr std::size_t kMaxColumns = 10'000;
inline constexpr std::uint64_t kSubsampleSeed = 0x9e3779b97f4a7c15ULL;

inline bool is_prime(long q) {
  if (q < 2) return false;
  for (long p = 2; p * p <= q; ++p) {
    if (q % p == 0) return false;
  }
  return true;
}

inline long mod(long v, long q) {
  const long r = v % q;
  return r < 0 ? r + q : r;
}

inline long inverse_mod(long v, long q) {
  v = mod(v, q);
  require(v != 0, ErrorKind::invalid_argument, "zero has no inverse mod " + std::to_string(q));
  long result = 1;
  long base = v;
  for (long e = q - 2; e > 0; e >>= 1) {
    if (e & 1) result = result * base % q;
    base = base * base % q;
  }
  return result;
}

/// The additive group F_q^d with elements indexed by their base-q digits
/// (coordinate 0 least significant).
class GroupSpec {
 public:
  GroupSpec(int q, int d) : q_(q), d_(d) {
    require(is_prime(q) && q >= 5, ErrorKind::invalid_argument, "q must be a prime >= 5, got " + std::to_string(q));
    require(d >= 1, ErrorKind::invalid_argument, "rank d must be >= 1");
    std::size_t size = 1;
    for (int i = 0; i < d; ++i) {
      size *= static_cast<std::size_t>(q);
      require(size <= kMaxColumns, ErrorKind::too_large,
              "group F_" + std::to_string(q) + "^" + std::to_string(d) + " exceeds " + std::to_string(kMaxColumns) +
                  " elements");
    }
    size_ = size;
    build_tables();
  }

  int q() const { return q_; }
  int d() const { return d_; }
  std::size_t size() const { return size_; }

  std::vector<int> coords(std::size_t idx) const {
    std::vector<int> c(static_cast<std::size_t>(d_));
    for (int i = 0; i < d_; ++i) {
      c[static_cast<std::size_t>(i)] = static_cast<int>(idx % static_cast<std::size_t>(q_));
      idx /= static_cast<std::size_t>(q_);
    }
    return c;
  }
  std::size_t index(const std::vector<int>& c) const {
    std::size_t idx = 0;
    for (int i = d_ - 1; i >= 0; --i) idx = idx * static_cast<std::size_t>(q_) + static_cast<std::size_t>(mod(c[static_cast<std::size_t>(i)], q_));
    return idx;
  }

  std::size_t add(std::size_t a, std::size_t b) const { return add_[a * size_ + b]; }
  std::size_t neg(std::size_t a) const { return scale(a, q_ - 1); }
  std::size_t sub(std::size_t a, std::size_t b) const { return add(a, neg(b)); }
  std::size_t scale(std::size_t a, long c) const {
    return scale_[a * static_cast<std::size_t>(q_) + static_cast<std::size_t>(mod(c, q_))];
  }

 private:
  void build_tables() {
    add_.resize(size_ * size_);
    scale_.resize(size_ * static_cast<std::size_t>(q_));
    for (std::size_t a = 0; a < size_; ++a) {
      const auto ca = coords(a);
      for (std::size_t b = 0; b < size_; ++b) {
        const auto cb = coords(b);
        std::vector<int> s(ca.size());
        for (std::size_t i = 0; i < s.size(); ++i) s[i] = (ca[i] + cb[i]) % q_;
        add_[a * size_ + b] = static_cast<std::uint32_t>(index(s));
      }
      for (int c = 0; c < q_; ++c) {
        std::vector<int> s(ca.size());
        for (std::size_t i = 0; i < s.size(); ++i) s[i] = (ca[i] * c) % q_;
        scale_[a * static_cast<std::size_t>(q_) + static_cast<std::size_t>(c)] = static_cast<std::uint32_t>(index(s));
      }
    }
  }

  int q_;
  int d_;
  std::size_t size_ = 1;
  std::vector<std::uint32_t> add_;
  std::vector<std::uint32_t> scale_;
};

/// A map F_q^d -> F_q stored as its value table.
class FunctionVector {
 public:
  FunctionVector(int q, std::vector<int> table) : q_(q), table_(std::move(table)) {
    for (int& v : table_) v = static_cast<int>(mod(v, q_));
  }

  static FunctionVector from(const GroupSpec& g, const std::function<long(const std::vector<int>&)>& fn) {
    std::vector<int> t(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) t[i] = static_cast<int>(mod(fn(g.coords(i)), g.q()));
    return FunctionVector(g.q(), std::move(t));
  }

  int q() const { return q_; }
  std::size_t size() const { return table_.size(); }
  int operator[](std::size_t idx) const { return table_[idx]; }
  const std::vector<int>& table() const { return table_; }

  friend bool operator==(const FunctionVector&, const FunctionVector&) = default;

 private:
  int q_;
  std::vector<int> table_;
};

/// Sparse constraint rows over F_q, stored flat: row r owns entries
/// [offsets[r], offsets[r+1]).
class ConstraintMatrix {
 public:
  ConstraintMatrix(int q, std::size_t cols) : q_(q), cols_(cols) { offsets_.push_back(0); }

  int q() const { return q_; }
  std::size_t cols() const { return cols_; }
  std::size_t rows() const { return offsets_.size() - 1; }
  bool subsampled() const { return subsampled_; }
  void mark_subsampled() { subsampled_ = true; }

  /// Appends a row given as (column, coefficient) terms; repeated columns are
  /// merged and zero coefficients dropped.
  void add_row(std::vector<std::pair<std::size_t, long>> terms) {
    std::sort(terms.begin(), terms.end());
    std::size_t i = 0;
    while (i < terms.size()) {
      const std::size_t col = terms[i].first;
      require(col < cols_, ErrorKind::dimension_mismatch, "constraint column out of range");
      long acc = 0;
      for (; i < terms.size() && terms[i].first == col; ++i) acc += terms[i].second;
      acc = mod(acc, q_);
      if (acc != 0) {
        cols_idx_.push_back(static_cast<std::uint16_t>(col));
        coefs_.push_back(static_cast<std::uint16_t>(acc));
      }
    }
    offsets_.push_back(cols_idx_.size());
  }

  template <typename F>
  void for_each_term(std::size_t row, F&& fn) const {
    for (std::size_t k = offsets_[row]; k < offsets_[row + 1]; ++k) fn(std::size_t{cols_idx_[k]}, long{coefs_[k]});
  }

  /// Dense copy of one row, for inspection and tests.
  std::vector<int> dense_row(std::size_t row) const {
    std::vector<int> out(cols_, 0);
    for_each_term(row, [&](std::size_t c, long v) { out[c] = static_cast<int>(v); });
    return out;
  }

  bool annihilates(const FunctionVector& f) const {
    for (std::size_t r = 0; r < rows(); ++r) {
      long acc = 0;
      for_each_term(r, [&](std::size_t c, long v) { acc += v * f[c]; });
      if (acc % q_ != 0) return false;
    }
    return true;
  }

 private:
  int q_;
  std::size_t cols_;
  std::vector<std::size_t> offsets_;
  std::vector<std::uint16_t> cols_idx_;
  std::vector<std::uint16_t> coefs_;
  bool subsampled_ = false;
};

struct ObstructionFactor {
  std::string name;
  long value;
};

/// Constants the equivalence derivation inverts, for the equation on its own.
///
/// fe1 needs 2. fe3_0(a) needs 2, 3, a-1, a+1, and for every induction step
/// b = 2..|a|-1 that lifts the result from b to b+1 also b-1, b+1, 2b-1, 2b+1
/// and 3b^2-3b+12. fe3(n) reduces to fe3_0(n-1) after establishing Q(0) = 0
/// and evenness, which need n, n-1 and C(n,2)-1. fe2 is fe3(3).
inline std::vector<ObstructionFactor> obstruction_factors(const EquationSpec& eq) {
  std::vector<ObstructionFactor> out{{"2", 2}};
  auto add_fe3_0 = [&out](long a) {
    a = a < 0 ? -a : a;
    if (a == 0) return;
    out.push_back({"3", 3});
    out.push_back({"a-1", a - 1});
    out.push_back({"a+1", a + 1});
    for (long b = 2; b < a; ++b) {
      const std::string at = " at step " + std::to_string(b);
      out.push_back({"b-1" + at, b - 1});
      out.push_back({"b+1" + at, b + 1});
      out.push_back({"2b-1" + at, 2 * b - 1});
      out.push_back({"2b+1" + at, 2 * b + 1});
      out.push_back({"3b^2-3b+12" + at, 3 * b * b - 3 * b + 12});
    }
  };
  switch (eq.id()) {
    case EquationId::fe1: break;
    case EquationId::fe2:
    case EquationId::fe3: {
      const long n = eq.n();
      out.push_back({"n", n});
      out.push_back({"n-1", n - 1});
      out.push_back({"C(n,2)-1", n * (n - 1) / 2 - 1});
      add_fe3_0(n - 1);
      break;
    }
    case EquationId::fe3_0: add_fe3_0(eq.a()); break;
  }
  return out;
}

/// First factor divisible by q, if any.
inline std::optional<ObstructionFactor> obstruction(const EquationSpec& eq, int q) {
  for (const auto& f : obstruction_factors(eq)) {
    if (f.value % q == 0) return f;
  }
  return std::nullopt;
}

inline bool admissible(const EquationSpec& eq, const GroupSpec& g) { return !obstruction(eq, g.q()).has_value(); }

namespace detail {

using Tuple = std::vector<std::size_t>;
using Terms = std::vector<std::pair<std::size_t, long>>;

inline Terms row_terms(const EquationSpec& eq, const GroupSpec& g, const Tuple& t) {
  Terms terms;
  switch (eq.id()) {
    case EquationId::fe1: {
      const auto x = t[0], y = t[1];
      terms = {{g.add(x, y), 1}, {g.sub(x, y), 1}, {x, -2}, {y, -2}};
      break;
    }
    case EquationId::fe2:
    case EquationId::fe3: {
      const int n = eq.id() == EquationId::fe2 ? 3 : eq.n();
      std::size_t total = 0;
      for (auto x : t) total = g.add(total, x);
      for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) terms.emplace_back(g.sub(t[i], t[j]), n);
      }
      for (int i = 0; i < n; ++i) terms.emplace_back(g.sub(total, g.scale(t[i], n)), -1);
      break;
    }
    case EquationId::fe3_0: {
      const long a = eq.a();
      const auto x = t[0], y = t[1];
      terms = {{g.add(g.scale(x, a), y), 1},
               {g.add(x, g.scale(y, a)), 1},
               {g.sub(x, y), a - 1},
               {g.add(x, y), -(a + 1)},
               {x, -(a * a - 1)},
               {y, -(a * a - 1)}};
      break;
    }
  }
  return terms;
}

// Tuples supported on at most two slots, plus the (x, ..., x, 0) pattern; these
// are the substitutions the equivalence derivation consumes.
inline void structured_tuples(std::size_t group, int arity, const std::function<void(const Tuple&)>& emit) {
  Tuple t(static_cast<std::size_t>(arity), 0);
  for (int i = 0; i < arity; ++i) {
    for (int j = i + 1; j < arity; ++j) {
      for (std::size_t x = 0; x < group; ++x) {
        for (std::size_t y = 0; y < group; ++y) {
          std::fill(t.begin(), t.end(), 0);
          t[static_cast<std::size_t>(i)] = x;
          t[static_cast<std::size_t>(j)] = y;
          emit(t);
        }
      }
    }
  }
  for (std::size_t x = 0; x < group; ++x) {
    std::fill(t.begin(), t.end(), x);
    t.back() = 0;
    emit(t);
  }
}

}  // namespace detail

/// One row per tuple in G^arity. When |G|^arity exceeds kFullEnumerationLimit
/// the rows are the structured tuples followed by kSubsampleTuples tuples drawn
/// from a fixed-seed generator, and the matrix is marked subsampled.
inline ConstraintMatrix enumerate_constraints(const EquationSpec& eq, const GroupSpec& g,
                                              bool enforce_obstruction = true) {
  if (enforce_obstruction) {
    if (auto bad = obstruction(eq, g.q())) {
      throw Error(ErrorKind::obstruction, eq.name() + " over F_" + std::to_string(g.q()) + ": q divides " +
                                              bad->name + " = " + std::to_string(bad->value));
    }
  }
  const int arity = eq.arity();
  const std::size_t group = g.size();
  ConstraintMatrix m(g.q(), group);

  double tuples = 1.0;
  for (int i = 0; i < arity; ++i) tuples *= static_cast<double>(group);

  if (tuples <= static_cast<double>(kFullEnumerationLimit)) {
    detail::Tuple t(static_cast<std::size_t>(arity), 0);
    const auto count = static_cast<std::size_t>(tuples);
    for (std::size_t idx = 0; idx < count; ++idx) {
      std::size_t rest = idx;
      for (int i = arity - 1; i >= 0; --i) {
        t[static_cast<std::size_t>(i)] = rest % group;
        rest /= group;
      }
      m.add_row(detail::row_terms(eq, g, t));
    }
    return m;
  }

  m.mark_subsampled();
  detail::structured_tuples(group, arity, [&](const detail::Tuple& t) { m.add_row(detail::row_terms(eq, g, t)); });
  std::mt19937_64 rng(kSubsampleSeed);
  std::uniform_int_distribution<std::size_t> pick(0, group - 1);
  detail::Tuple t(static_cast<std::size_t>(arity), 0);
  for (std::size_t s = 0; s < kSubsampleTuples; ++s) {
    for (auto& x : t) x = pick(rng);
    m.add_row(detail::row_terms(eq, g, t));
  }
  return m;
}

/// Rows f(lambda x) - lambda^degree f(x) for every x: the homogeneity equation
/// of the given degree, used to build non-quadratic comparison systems.
inline ConstraintMatrix homogeneity_constraints(const GroupSpec& g, long lambda, int degree) {
  ConstraintMatrix m(g.q(), g.size());
  long power = 1;
  for (int i = 0; i < degree; ++i) power = mod(power * lambda, g.q());
  for (std::size_t x = 0; x < g.size(); ++x) m.add_row({{g.scale(x, lambda), 1}, {x, -power}});
  return m;
}

/// Incremental reduced row echelon form over F_q. Rows are fed one at a time;
/// each stored basis row has a unit pivot and zeros in every other pivot column.
class RowReducer {
 public:
  RowReducer(int q, std::size_t cols)
      : q_(q), cols_(cols), pivot_row_(cols, -1), scratch_(cols, 0), inverse_(static_cast<std::size_t>(q), 0) {
    require(cols <= kMaxColumns, ErrorKind::too_large, "more than " + std::to_string(kMaxColumns) + " columns");
    for (long v = 1; v < q; ++v) inverse_[static_cast<std::size_t>(v)] = inverse_mod(v, q);
    free_.reserve(cols);
    for (std::size_t c = 0; c < cols; ++c) free_.push_back(c);
  }

  void insert(const ConstraintMatrix& m, std::size_t row) {
    if (free_.empty()) return;
    support_.clear();
    m.for_each_term(row, [&](std::size_t c, long v) {
      scratch_[c] = v;
      support_.push_back(c);
    });
    // Basis rows are zero on foreign pivot columns, so eliminating one pivot
    // only touches free columns and never disturbs another pivot entry.
    for (std::size_t c : support_) {
      const int pr = pivot_row_[c];
      if (pr < 0) continue;
      const long coef = scratch_[c];
      if (coef == 0) continue;
      const auto& b = basis_[static_cast<std::size_t>(pr)];
      for (std::size_t f : free_) {
        if (b[f] != 0) scratch_[f] = mod(scratch_[f] - coef * b[f], q_);
      }
      scratch_[c] = 0;
    }
    std::size_t pos = free_.size();
    for (std::size_t i = 0; i < free_.size(); ++i) {
      if (scratch_[free_[i]] != 0) {
        pos = i;
        break;
      }
    }
    if (pos == free_.size()) {
      clear_scratch();
      return;
    }
    const std::size_t pc = free_[pos];
    free_.erase(free_.begin() + static_cast<std::ptrdiff_t>(pos));
    const long inv = inverse_[static_cast<std::size_t>(scratch_[pc])];
    std::vector<long> fresh(cols_, 0);
    fresh[pc] = 1;
    for (std::size_t f : free_) {
      if (scratch_[f] != 0) fresh[f] = scratch_[f] * inv % q_;
    }
    for (auto& b : basis_) {
      const long coef = b[pc];
      if (coef == 0) continue;
      for (std::size_t f : free_) {
        if (fresh[f] != 0) b[f] = mod(b[f] - coef * fresh[f], q_);
      }
      b[pc] = 0;
    }
    pivot_row_[pc] = static_cast<int>(basis_.size());
    basis_.push_back(std::move(fresh));
    clear_scratch();
  }

  std::size_t rank() const { return basis_.size(); }

  /// One basis vector per free column c: 1 at c, minus the pivot rows' entries
  /// in column c at the pivot positions.
  std::vector<FunctionVector> nullspace() const {
    std::vector<FunctionVector> out;
    out.reserve(free_.size());
    for (std::size_t f : free_) {
      std::vector<int> v(cols_, 0);
      v[f] = 1;
      for (std::size_t c = 0; c < cols_; ++c) {
        const int pr = pivot_row_[c];
        if (pr >= 0) v[c] = static_cast<int>(mod(-basis_[static_cast<std::size_t>(pr)][f], q_));
      }
      out.emplace_back(q_, std::move(v));
    }
    return out;
  }

 private:
  void clear_scratch() {
    for (std::size_t c : support_) scratch_[c] = 0;
    for (std::size_t f : free_) scratch_[f] = 0;
  }

  int q_;
  std::size_t cols_;
  std::vector<int> pivot_row_;
  std::vector<std::size_t> free_;
  std::vector<std::vector<long>> basis_;
  std::vector<long> scratch_;
  std::vector<std::size_t> support_;
  std::vector<long> inverse_;
};

inline std::size_t rank(const ConstraintMatrix& m) {
  RowReducer rr(m.q(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r) rr.insert(m, r);
  return rr.rank();
}

/// Basis of {f : M f = 0}; its size is cols - rank.
inline std::vector<FunctionVector> nullspace_basis(const ConstraintMatrix& m) {
  RowReducer rr(m.q(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r) rr.insert(m, r);
  return rr.nullspace();
}

struct EquivalenceReport {
  bool equal = false;
  std::size_t dim_a = 0;
  std::size_t dim_b = 0;
  bool subsampled = false;
  /// When unequal: a solution of one system that violates the other, scaled so
  /// its first nonzero value is 1.
  std::optional<FunctionVector> witness;
  /// "a" when the witness solves the first system only, "b" for the second.
  std::string witness_side;
};

namespace detail {

inline FunctionVector normalized(const FunctionVector& f) {
  std::vector<int> t = f.table();
  const auto it = std::find_if(t.begin(), t.end(), [](int v) { return v != 0; });
  if (it == t.end()) return f;
  const long inv = inverse_mod(*it, f.q());
  for (int& v : t) v = static_cast<int>(v * inv % f.q());
  return FunctionVector(f.q(), std::move(t));
}

}  // namespace detail

/// Nullspaces are equal iff each basis of one is annihilated by the other system.
/// Solutions of b missing from a are reported before the reverse.
inline EquivalenceReport spaces_equal(const ConstraintMatrix& a, const ConstraintMatrix& b) {
  require(a.q() == b.q() && a.cols() == b.cols(), ErrorKind::dimension_mismatch,
          "constraint systems live on different groups");
  EquivalenceReport rep;
  rep.subsampled = a.subsampled() || b.subsampled();
  const auto na = nullspace_basis(a);
  const auto nb = nullspace_basis(b);
  rep.dim_a = na.size();
  rep.dim_b = nb.size();
  for (const auto& f : nb) {
    if (!a.annihilates(f)) {
      rep.witness = detail::normalized(f);
      rep.witness_side = "b";
      return rep;
    }
  }
  for (const auto& f : na) {
    if (!b.annihilates(f)) {
      rep.witness = detail::normalized(f);
      rep.witness_side = "a";
      return rep;
    }
  }
  rep.equal = true;
  return rep;
}

inline EquivalenceReport spaces_equal(const EquationSpec& a, const EquationSpec& b, const GroupSpec& g,
                                      bool enforce_obstruction = true) {
  return spaces_equal(enumerate_constraints(a, g, enforce_obstruction), enumerate_constraints(b, g, enforce_obstruction));
}

/// B(x, y) = (Q(x+y) - Q(x-y)) / 4 in F_q.
inline int biadditive_from_quadratic(const FunctionVector& quad, const GroupSpec& g, std::size_t x, std::size_t y) {
  require(g.q() % 2 != 0, ErrorKind::invalid_argument, "polarization needs 4 invertible (q odd)");
  require(quad.size() == g.size(), ErrorKind::dimension_mismatch, "table does not match the group");
  const long inv4 = inverse_mod(4, g.q());
  return static_cast<int>(mod((quad[g.add(x, y)] - quad[g.sub(x, y)]) * inv4, g.q()));
}

struct DiagonalCheck {
  bool holds = true;
  std::string reason;
};

/// Symmetry, additivity in both slots, and Q(x) = B(x, x) for the polarized B.
/// Exhaustive over triples when |G|^3 is at most 2e6, otherwise seeded samples.
inline DiagonalCheck check_diagonal(const FunctionVector& quad, const GroupSpec& g, std::size_t samples = 200'000) {
  const std::size_t n = g.size();
  auto bform = [&](std::size_t x, std::size_t y) { return biadditive_from_quadratic(quad, g, x, y); };
  auto describe = [&](const char* what, std::size_t x, std::size_t y, std::size_t z) {
    return std::string(what) + " fails at x=" + std::to_string(x) + " y=" + std::to_string(y) +
           " z=" + std::to_string(z);
  };
  for (std::size_t x = 0; x < n; ++x) {
    if (bform(x, x) != quad[x]) return {false, describe("Q(x) = B(x,x)", x, x, 0)};
  }
  auto triple = [&](std::size_t x, std::size_t y, std::size_t z) -> std::optional<DiagonalCheck> {
    const long q = g.q();
    if (bform(x, y) != bform(y, x)) return DiagonalCheck{false, describe("symmetry", x, y, z)};
    if (bform(g.add(x, z), y) != mod(bform(x, y) + bform(z, y), q))
      return DiagonalCheck{false, describe("additivity (first slot)", x, y, z)};
    if (bform(x, g.add(y, z)) != mod(bform(x, y) + bform(x, z), q))
      return DiagonalCheck{false, describe("additivity (second slot)", x, y, z)};
    return std::nullopt;
  };
  if (static_cast<double>(n) * n * n <= 2e6) {
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = 0; y < n; ++y)
        for (std::size_t z = 0; z < n; ++z)
          if (auto bad = triple(x, y, z)) return *bad;
    return {};
  }
  std::mt19937_64 rng(kSubsampleSeed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (std::size_t s = 0; s < samples; ++s) {
    const std::size_t x = pick(rng), y = pick(rng), z = pick(rng);
    if (auto bad = triple(x, y, z)) return *bad;
  }
  return {};
}

}  // namespace qstab::ff
