#include <cmath>
#include <complex>
#include <vector>

#include <gtest/gtest.h>

#include "qstab/algebra.hpp"
#include "qstab/quasi_norm.hpp"

using namespace qstab;

namespace {

ModulePoint R(std::vector<double> v) { return ModulePoint::from_reals(v); }

// (sum |x_i|^p)^(1/p) written out by hand.
double lp_by_hand(const std::vector<double>& v, double p) {
  double s = 0.0;
  for (double x : v) s += std::pow(std::abs(x), p);
  return std::pow(s, 1.0 / p);
}

std::vector<QuasiNormSpec> registered_specs() {
  return {QuasiNormSpec::euclidean(3), QuasiNormSpec::l1(3), QuasiNormSpec::lp_quasi(3, 0.5),
          QuasiNormSpec::lp_quasi(3, 0.25), QuasiNormSpec::weighted({1.0, 2.0, 0.5})};
}

}  // namespace

TEST(NormEval, EuclideanPythagorean) { EXPECT_DOUBLE_EQ(norm_eval(QuasiNormSpec::euclidean(2), R({3, 4})), 5.0); }

TEST(NormEval, HalfQuasiNormOfOnes) {
  EXPECT_DOUBLE_EQ(norm_eval(QuasiNormSpec::lp_quasi(2, 0.5), R({1, 1})), 4.0);
}

TEST(NormEval, ZeroIsZeroForEverySpec) {
  for (const auto& s : registered_specs()) EXPECT_EQ(norm_eval(s, ModulePoint::zero(1, 3)), 0.0);
}

TEST(NormEval, MatchesHandComputedLp) {
  BoxSampler sampler({1, 3, ScalarField::real}, 3);
  for (int t = 0; t < 200; ++t) {
    const ModulePoint x = sampler.point();
    std::vector<double> v{x[0](0, 0).real(), x[1](0, 0).real(), x[2](0, 0).real()};
    EXPECT_NEAR(norm_eval(QuasiNormSpec::lp_quasi(3, 0.5), x), lp_by_hand(v, 0.5), 1e-10 * lp_by_hand(v, 0.5));
    EXPECT_NEAR(norm_eval(QuasiNormSpec::l1(3), x), lp_by_hand(v, 1.0), 1e-12 * lp_by_hand(v, 1.0));
    EXPECT_NEAR(norm_eval(QuasiNormSpec::euclidean(3), x), lp_by_hand(v, 2.0), 1e-12 * lp_by_hand(v, 2.0));
  }
}

TEST(NormEval, MatrixCoordinatesUseFrobenius) {
  CMatrix m(2, 2);
  m << Complex(1, 1), 0, 0, Complex(0, 1);
  const ModulePoint x(std::vector<AlgebraElement>{AlgebraElement(m)});
  EXPECT_NEAR(norm_eval(QuasiNormSpec::euclidean(1), x), std::sqrt(3.0), 1e-15);
}

TEST(NormEval, RejectsDimensionMismatch) {
  try {
    norm_eval(QuasiNormSpec::euclidean(3), R({1, 2}));
    FAIL() << "expected a dimension mismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::dimension_mismatch);
  }
}

TEST(QuasiNormSpec, ModulusOfConcavity) {
  EXPECT_DOUBLE_EQ(QuasiNormSpec::euclidean(2).K(), 1.0);
  EXPECT_DOUBLE_EQ(QuasiNormSpec::l1(2).K(), 1.0);
  EXPECT_DOUBLE_EQ(QuasiNormSpec::lp_quasi(2, 0.5).K(), 2.0);
  EXPECT_DOUBLE_EQ(QuasiNormSpec::lp_quasi(2, 0.25).K(), 8.0);
}

TEST(QuasiNormSpec, RejectsBadParameters) {
  EXPECT_THROW(QuasiNormSpec::lp_quasi(2, 0.0), Error);
  EXPECT_THROW(QuasiNormSpec::lp_quasi(2, 1.5), Error);
  EXPECT_THROW(QuasiNormSpec::euclidean(0), Error);
  EXPECT_THROW(QuasiNormSpec::weighted({1.0, -1.0}), Error);
}

TEST(QuasiNormAxioms, HoldOnRandomPoints) {
  for (const auto& spec : registered_specs()) {
    BoxSampler sampler({2, 3, ScalarField::complex}, 99);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> lam(-5.0, 5.0);
    for (int t = 0; t < 10000; ++t) {
      const ModulePoint x = sampler.point();
      const ModulePoint y = sampler.point();
      const double nx = norm_eval(spec, x);
      const double ny = norm_eval(spec, y);
      ASSERT_GT(nx, 0.0);
      const double l = lam(rng);
      ASSERT_NEAR(norm_eval(spec, l * x), std::abs(l) * nx, 1e-10 * (1.0 + std::abs(l) * nx));
      ASSERT_LE(norm_eval(spec, x + y), spec.K() * (nx + ny) * (1.0 + 1e-10));
      if (spec.kind() == NormKind::lp_quasi) {
        const double p = spec.p();
        ASSERT_LE(std::pow(norm_eval(spec, x + y), p), (std::pow(nx, p) + std::pow(ny, p)) * (1.0 + 1e-10));
      }
    }
  }
}

TEST(ConcavityEstimate, EuclideanAndL1AtMostOne) {
  BoxSampler s1({1, 2, ScalarField::real}, 1);
  EXPECT_LE(concavity_modulus_estimate(QuasiNormSpec::euclidean(2), s1, 5000), 1.0 + 1e-12);
  BoxSampler s2({1, 2, ScalarField::real}, 2);
  EXPECT_LE(concavity_modulus_estimate(QuasiNormSpec::l1(2), s2, 5000), 1.0 + 1e-12);
}

TEST(ConcavityEstimate, HalfQuasiNormAttainsTwoOnUnitVectors) {
  const std::vector<PointPair> fixed{{R({1, 0}), R({0, 1})}};
  BoxSampler sampler({1, 2, ScalarField::real}, 3);
  const double k = concavity_modulus_estimate(QuasiNormSpec::lp_quasi(2, 0.5), sampler, 1000, fixed);
  EXPECT_DOUBLE_EQ(k, 2.0);
}

TEST(ConcavityEstimate, NeverExceedsTheoreticalK) {
  for (double p : {0.25, 0.5, 0.75}) {
    BoxSampler sampler({1, 3, ScalarField::real}, 4);
    const auto spec = QuasiNormSpec::lp_quasi(3, p);
    EXPECT_LE(concavity_modulus_estimate(spec, sampler, 5000), spec.K() * (1.0 + 1e-12));
  }
}

TEST(SampleUnitary, ScalarHasModulusOne) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Unitary u = sample_unitary(1, seed);
    EXPECT_NEAR(std::abs(u.element()(0, 0)), 1.0, 1e-12);
  }
}

TEST(SampleUnitary, IsUnitaryToTolerance) {
  for (int k : {2, 3}) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const CMatrix u = sample_unitary(k, seed).element().matrix();
      EXPECT_LE((u * u.adjoint() - CMatrix::Identity(k, k)).norm(), 1e-10);
      EXPECT_LE((u.adjoint() * u - CMatrix::Identity(k, k)).norm(), 1e-10);
    }
  }
}

TEST(SampleUnitary, DeterministicPerSeed) {
  EXPECT_EQ(sample_unitary(2, 42).element().matrix(), sample_unitary(2, 42).element().matrix());
  EXPECT_NE(sample_unitary(2, 42).element().matrix(), sample_unitary(2, 43).element().matrix());
}

TEST(SampleUnitary, RealFieldGivesOrthogonal) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const CMatrix u = sample_unitary(2, seed, ScalarField::real).element().matrix();
    EXPECT_EQ(u.imag().norm(), 0.0);
    const double s = sample_unitary(1, seed, ScalarField::real).element()(0, 0).real();
    EXPECT_EQ(std::abs(s), 1.0);
  }
}

TEST(SampleUnitary, HaarPhaseIsSpread) {
  // For Haar measure on U(1) the phase is uniform; its mean resultant is near 0.
  Complex mean = 0.0;
  const int n = 4000;
  for (int s = 0; s < n; ++s) mean += sample_unitary(1, static_cast<std::uint64_t>(s)).element()(0, 0);
  EXPECT_LT(std::abs(mean) / n, 0.05);
}

TEST(Unitary, FromRejectsNonUnitary) {
  EXPECT_THROW(Unitary::from(AlgebraElement::scalar(2.0)), Error);
  EXPECT_NO_THROW(Unitary::from(AlgebraElement::scalar(Complex(0.6, 0.8))));
}

TEST(Hat, ScalarGivesSquaredModulus) {
  for (HatMode m : {HatMode::left, HatMode::right, HatMode::avg}) {
    const AlgebraElement h = hat(AlgebraElement::scalar(Complex(3, 4)), m);
    EXPECT_NEAR(std::abs(h(0, 0) - Complex(25, 0)), 0.0, 1e-12);
  }
}

TEST(Hat, IdentityIsFixed) {
  for (HatMode m : {HatMode::left, HatMode::right, HatMode::avg}) {
    EXPECT_LE((hat(AlgebraElement::identity(2), m).matrix() - CMatrix::Identity(2, 2)).norm(), 1e-15);
  }
}

TEST(Hat, DiagonalPhaseAveragesToIdentity) {
  CMatrix a = CMatrix::Zero(2, 2);
  a(0, 0) = 1.0;
  a(1, 1) = Complex(0, 1);
  EXPECT_LE((hat(AlgebraElement(a), HatMode::avg).matrix() - CMatrix::Identity(2, 2)).norm(), 1e-15);
}

TEST(Hat, SelfAdjointAndPositive) {
  BoxSampler sampler({3, 1, ScalarField::complex}, 8);
  for (int t = 0; t < 200; ++t) {
    const AlgebraElement a = sampler.point()[0];
    for (HatMode m : {HatMode::left, HatMode::right, HatMode::avg}) {
      const AlgebraElement h = hat(a, m);
      EXPECT_TRUE(h.is_self_adjoint(1e-9));
      Eigen::SelfAdjointEigenSolver<CMatrix> es(h.matrix());
      EXPECT_GE(es.eigenvalues().minCoeff(), -1e-9 * h.frobenius());
    }
  }
}

TEST(ModulePoint, UnitaryActionPreservesFrobenius) {
  BoxSampler sampler({2, 3, ScalarField::complex}, 21);
  for (int t = 0; t < 200; ++t) {
    const ModulePoint x = sampler.point();
    const Unitary u = sampler.unitary();
    const ModulePoint ux = x.act(u.element());
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(ux[i].frobenius(), x[i].frobenius(), 1e-10 * (1 + x[i].frobenius()));
  }
}

TEST(ModulePoint, ArithmeticAndShapeChecks) {
  const ModulePoint a = R({1, 2});
  const ModulePoint b = R({3, -1});
  const ModulePoint c = 2.0 * a - b;
  EXPECT_EQ(c[0](0, 0), Complex(-1, 0));
  EXPECT_EQ(c[1](0, 0), Complex(5, 0));
  EXPECT_THROW(a + R({1, 2, 3}), Error);
  EXPECT_THROW(AlgebraElement(CMatrix::Zero(2, 3)), Error);
}

TEST(ModulePoint, ConjugationMatchesMatrixProduct) {
  BoxSampler sampler({2, 1, ScalarField::complex}, 5);
  const ModulePoint x = sampler.point();
  const Unitary u = sampler.unitary();
  const CMatrix expect = u.element().matrix() * x[0].matrix() * u.element().matrix().adjoint();
  EXPECT_LE((x.conjugate_by(u.element())[0].matrix() - expect).norm(), 1e-12);
}

TEST(BoxSampler, StaysInsideBox) {
  BoxSampler sampler({2, 2, ScalarField::complex}, 6, 3.0);
  for (int t = 0; t < 500; ++t) {
    const ModulePoint x = sampler.point();
    for (const auto& c : x.coords()) {
      EXPECT_LE(c.matrix().real().cwiseAbs().maxCoeff(), 3.0);
      EXPECT_LE(c.matrix().imag().cwiseAbs().maxCoeff(), 3.0);
    }
  }
}

TEST(BoxSampler, RealFieldStaysReal) {
  BoxSampler sampler({2, 2, ScalarField::real}, 6);
  for (int t = 0; t < 50; ++t) {
    const ModulePoint p = sampler.point();
    for (const auto& c : p.coords()) EXPECT_EQ(c.matrix().imag().norm(), 0.0);
  }
}
