#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qstab/algebra.hpp"
#include "qstab/error.hpp"

namespace qstab {

enum class NormKind { lp_quasi, euclidean, l1, weighted };

inline const char* to_string(NormKind kind) {
  switch (kind) {
    case NormKind::lp_quasi: return "lp_quasi";
    case NormKind::euclidean: return "euclidean";
    case NormKind::l1: return "l1";
    case NormKind::weighted: return "weighted";
  }
  return "unknown";
}

/// A quasi-norm on A^d. Each coordinate contributes its Frobenius norm and the
/// d resulting magnitudes are aggregated by the chosen family:
///   lp_quasi  (sum c_i^p)^(1/p), 0 < p <= 1, modulus of concavity 2^(1/p - 1)
///   euclidean (sum c_i^2)^(1/2)
///   l1        sum c_i
///   weighted  (sum w_i c_i^2)^(1/2), w_i > 0
class QuasiNormSpec {
 public:
  static QuasiNormSpec euclidean(int dim) { return QuasiNormSpec(NormKind::euclidean, dim, 1.0, {}); }
  static QuasiNormSpec l1(int dim) { return QuasiNormSpec(NormKind::l1, dim, 1.0, {}); }
  static QuasiNormSpec lp_quasi(int dim, double p) { return QuasiNormSpec(NormKind::lp_quasi, dim, p, {}); }
  static QuasiNormSpec weighted(std::vector<double> weights) {
    const int dim = static_cast<int>(weights.size());
    return QuasiNormSpec(NormKind::weighted, dim, 1.0, std::move(weights));
  }

  NormKind kind() const { return kind_; }
  int dim() const { return dim_; }
  /// Exponent p; 1 for every family except lp_quasi.
  double p() const { return p_; }
  /// Modulus of concavity.
  double K() const { return kind_ == NormKind::lp_quasi ? std::pow(2.0, 1.0 / p_ - 1.0) : 1.0; }
  const std::vector<double>& weights() const { return weights_; }

  /// Same family on a module of a different rank (codomain norms, etc.).
  /// Weighted norms cannot be re-ranked since their weights are per coordinate.
  QuasiNormSpec with_dim(int dim) const {
    if (dim == dim_) return *this;
    require(kind_ != NormKind::weighted, ErrorKind::dimension_mismatch,
            "weighted norm of rank " + std::to_string(dim_) + " cannot be applied to rank " + std::to_string(dim));
    return QuasiNormSpec(kind_, dim, p_, {});
  }

  double aggregate(std::span<const double> mags) const {
    require(static_cast<int>(mags.size()) == dim_, ErrorKind::dimension_mismatch,
            "norm of rank " + std::to_string(dim_) + " applied to " + std::to_string(mags.size()) + " coordinates");
    double acc = 0.0;
    switch (kind_) {
      case NormKind::euclidean:
        for (double c : mags) acc += c * c;
        return std::sqrt(acc);
      case NormKind::l1:
        for (double c : mags) acc += c;
        return acc;
      case NormKind::weighted:
        for (std::size_t i = 0; i < mags.size(); ++i) acc += weights_[i] * mags[i] * mags[i];
        return std::sqrt(acc);
      case NormKind::lp_quasi: {
        // Scale by the largest magnitude so c^p and the 1/p root stay in range.
        const double top = *std::max_element(mags.begin(), mags.end());
        if (top == 0.0) return 0.0;
        for (double c : mags) acc += std::pow(c / top, p_);
        return top * std::pow(acc, 1.0 / p_);
      }
    }
    return acc;
  }

 private:
  QuasiNormSpec(NormKind kind, int dim, double p, std::vector<double> weights)
      : kind_(kind), dim_(dim), p_(p), weights_(std::move(weights)) {
    require(dim >= 1, ErrorKind::invalid_argument, "norm dimension must be >= 1");
    if (kind == NormKind::lp_quasi) {
      require(p > 0.0 && p <= 1.0, ErrorKind::invalid_argument, "lp_quasi exponent must lie in (0, 1]");
    }
    for (double w : weights_) {
      require(w > 0.0 && std::isfinite(w), ErrorKind::invalid_argument, "norm weights must be positive");
    }
  }

  NormKind kind_;
  int dim_;
  double p_;
  std::vector<double> weights_;
};

inline double norm_eval(const QuasiNormSpec& spec, const ModulePoint& x) {
  require(spec.dim() == x.rank(), ErrorKind::dimension_mismatch,
          "norm dimension " + std::to_string(spec.dim()) + " does not match point rank " + std::to_string(x.rank()));
  std::vector<double> mags;
  mags.reserve(static_cast<std::size_t>(x.rank()));
  for (const auto& c : x.coords()) mags.push_back(c.frobenius());
  return spec.aggregate(mags);
}

using PointPair = std::pair<ModulePoint, ModulePoint>;

/// sup over sampled pairs of ||x+y|| / (||x|| + ||y||). The fixed pairs are
/// scored first, then `trials` random pairs from the sampler.
inline double concavity_modulus_estimate(const QuasiNormSpec& spec, BoxSampler& sampler, int trials,
                                         std::span<const PointPair> fixed = {}) {
  require(trials >= 1, ErrorKind::invalid_argument, "trials must be >= 1");
  double best = 0.0;
  auto score = [&](const ModulePoint& x, const ModulePoint& y) {
    const double denom = norm_eval(spec, x) + norm_eval(spec, y);
    if (denom > 0.0) best = std::max(best, norm_eval(spec, x + y) / denom);
  };
  for (const auto& [x, y] : fixed) score(x, y);
  for (int t = 0; t < trials; ++t) {
    const ModulePoint x = sampler.point();
    const ModulePoint y = sampler.point();
    score(x, y);
  }
  return best;
}

}  // namespace qstab
