#include <gtest/gtest.h>

#include "oracles.hpp"
#include "supershift/trigpoly.hpp"

using namespace supershift;

TEST(BernsteinCoefficients, Examples) {
  auto c1 = bernstein_coefficients<Rational>(5, Rational(1));
  EXPECT_EQ(c1, (std::vector<Rational>{1, 0, 0, 0, 0, 0}));
  EXPECT_EQ(bernstein_coefficients<Rational>(2, Rational(2)),
            (std::vector<Rational>{Rational(9, 4), Rational(-3, 2), Rational(1, 4)}));
  EXPECT_EQ(bernstein_coefficients<Rational>(3, Rational(0)),
            (std::vector<Rational>{Rational(1, 8), Rational(3, 8), Rational(3, 8), Rational(1, 8)}));
  auto cr = bernstein_coefficients<Real>(2, Real(2));
  EXPECT_EQ(cr[0], Real(2.25));
  EXPECT_EQ(cr[1], Real(-1.5));
}

TEST(BernsteinCoefficients, ExactPartitionOfUnity) {
  for (int N = 1; N <= 16; ++N) {
    for (Rational a : {Rational(-3), Rational(1, 3), Rational(7, 2)}) {
      Rational s = 0;
      for (const auto& c : bernstein_coefficients<Rational>(N, a)) s += c;
      EXPECT_EQ(s, 1);
    }
  }
}

TEST(BernsteinCoefficients, PrecisionGuard) {
  EXPECT_EQ(required_bits(8, 0.0), 113U);
  EXPECT_EQ(required_bits(64, 3.0), 192U);
  ScopedPrecision p(128);
  EXPECT_THROW(bernstein_coefficients<Real>(64, Real(3)), precision_error);
  ScopedPrecision q(192);
  EXPECT_NO_THROW(bernstein_coefficients<Real>(64, Real(3)));
}

TEST(LagrangeWeights, Examples) {
  std::vector<Rational> nodes{1, 0, -1};
  EXPECT_EQ(lagrange_weights<Rational>(nodes, Rational(1)), (std::vector<Rational>{1, 0, 0}));
  EXPECT_EQ(lagrange_weights<Rational>(nodes, Rational(2)), (std::vector<Rational>{3, -3, 1}));
  std::vector<Rational> dup{1, 1, -1};
  EXPECT_THROW(lagrange_weights<Rational>(dup, Rational(2)), degenerate_nodes_error);
  std::vector<Real> rdup{Real(1), Real(1) - pow2(-300), Real(-1)};
  EXPECT_THROW(lagrange_weights<Real>(rdup, Real(2)), degenerate_nodes_error);
}

TEST(LagrangeWeights, ReproducesPolynomialsExactly) {
  std::vector<Rational> nodes{Rational(9, 10), Rational(1, 3), Rational(1, 7), Rational(-1, 2), Rational(-1)};
  const std::vector<Rational> p{Rational(2), Rational(-1, 3), 5, 0, Rational(7, 4)};  // degree 4
  auto poly = [&](const Rational& x) {
    Rational s = 0;
    for (std::size_t k = p.size(); k-- > 0;) s = s * x + p[k];
    return s;
  };
  for (Rational a : {Rational(3), Rational(-5, 2), Rational(1, 11)}) {
    auto w = lagrange_weights<Rational>(nodes, a);
    Rational s = 0, sum = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      s += w[i] * poly(nodes[i]);
      sum += w[i];
    }
    EXPECT_EQ(s, poly(a));
    EXPECT_EQ(sum, 1);
  }
}

TEST(Eval, Examples) {
  ScopedPrecision p(256);
  TrigPoly<Real> single({{CReal(Real(1)), Real(0)}}, {});
  EXPECT_EQ(eval(single, CReal(Real(5))), CReal(Real(1)));
  auto T = bernstein_trigpoly<Real>(7, Real(0.25), Real(-2.5));
  EXPECT_LT(abs(eval(T, CReal()) - CReal(Real(1))), pow2(-200));
  auto T2 = bernstein_trigpoly<Real>(2, Real(0), Real(2));
  EXPECT_LT(abs(eval(T2, CReal(pi())) - CReal(Real(-4))), pow2(-240));
  EXPECT_LT(abs(eval_regular_closed_form(2, Real(0), Real(2), CReal(pi())) - CReal(Real(-4))), pow2(-240));
  Real x("0.7");
  EXPECT_LT(abs(eval_regular_closed_form(1, Real(0), Real(0), CReal(x)) - CReal(cos(x))), pow2(-250));
  EXPECT_EQ(eval_regular_closed_form(5, Real(0.5), Real(3), CReal()), CReal(Real(1)));
  TrigPoly<Real> wide({{CReal(Real(1)), Real(1)}}, {});
  EXPECT_THROW(eval(wide, CReal(Real(0), Real(1e9))), overflow_error);
}

TEST(Eval, MatchesMonomialOracle) {
  ScopedPrecision p(256);
  // Independent oracle: e^{i eps z} sum_k binom(N,k) cos^{N-k} (i lambda sin)^k of z(1-eps)/N.
  for (int N : {3, 9}) {
    for (double l : {-3.0, 0.5, 4.0}) {
      CReal z(Real("1.75"), Real("-0.5"));
      auto T = bernstein_trigpoly<Real>(N, Real(0.125), Real(l));
      auto expect = oracles::closed_form_by_binomial(N, Real(0.125), Real(l), z);
      EXPECT_LT(abs(eval(T, z) - expect), pow2(-128) * max(Real(1), abs(expect)));
    }
  }
}

TEST(Eval, ExactSumsAreExact) {
  auto T = bernstein_trigpoly<Rational>(4, Rational(1, 4), Rational(3));
  EXPECT_EQ(T.amplitude_sum(), CRational(Rational(1)));
  EXPECT_EQ(T.terms().back().frequency, -1);
}

TEST(XiProduct, Examples) {
  ScopedPrecision p(256);
  std::mt19937_64 rng(3);
  auto xi = random_xi_row(5, rng);
  CReal z(Real("2.5"), Real("0.75"));
  Real s(0);
  for (const auto& x : xi) s += Real(1) - x / 5;
  CReal expect = exp(i_times(s / 5, z));
  EXPECT_LT(abs(eval_xi_product(5, xi, Real(1), z) - expect), pow2(-240));
  std::vector<Real> zero{Real(0), Real(0)};
  EXPECT_LT(abs(eval_xi_product(2, zero, Real(1.5), z) - eval_regular_closed_form(2, Real(0), Real(1.5), z)),
            pow2(-240));
  std::vector<Real> xi8 = random_xi_row(8, rng);
  EXPECT_LE(abs(eval_xi_product(8, xi8, Real(2), CReal(Real(3)))), exp(Real(9)));
}

TEST(XiProduct, ExpandedFormAgreesWithProduct) {
  ScopedPrecision p(256);
  std::mt19937_64 rng(7);
  auto xi = random_xi_row(10, rng);
  auto T = xi_trigpoly(10, xi, Real(-2));
  CReal z(Real("-3.25"), Real("0.5"));
  CReal prod = eval_xi_product(10, xi, Real(-2), z);
  EXPECT_LT(abs(eval(T, z) - prod), pow2(-128) * abs(prod));
}

TEST(Certificates, Examples) {
  ScopedPrecision p(128);
  auto c = error_certificate(CertificateKind::LagrangeFactorial, Real(0), CReal(Real(1)), 3);
  EXPECT_LT(abs(c.bound_value - Real(1) / 24), pow2(-120));
  EXPECT_TRUE(error_certificate(CertificateKind::LagrangeFactorial, Real(1.5), CReal(), 7).bound_value.is_zero());
  EXPECT_EQ(error_certificate(CertificateKind::HermiteContour, Real(0), CReal(), 4).bound_value, Real(1));
  EXPECT_THROW(certificate_kind_from_string("Taylor"), domain_error);
}

TEST(Certificates, LagrangeRemainderHolds) {
  ScopedPrecision p(256);
  std::mt19937_64 rng(19);
  for (int N : {4, 12, 25}) {
    FrequencyRow row{N, {}};
    for (int k = 0; k <= N; ++k) row.values.push_back(Real(2) * uniform_unit(rng) - 1);
    std::sort(row.values.begin(), row.values.end(), std::greater<>());
    for (double l : {-2.0, 0.3, 1.7}) {
      auto T = lagrange_trigpoly(row, Real(l));
      for (double x : {-5.0, -1.25, 2.0, 5.0}) {
        CReal dev = eval(T, CReal(Real(x))) - expi(Real(l) * Real(x));
        auto cert = error_certificate(CertificateKind::LagrangeFactorial, Real(l), CReal(Real(x)), N);
        EXPECT_LE(abs(dev), cert.bound_value + pow2(-100));
      }
    }
  }
}

TEST(TrigPolyInvariants, RejectsBadTerms) {
  EXPECT_THROW(TrigPoly<Real>({{CReal(Real(1)), Real(0)}, {CReal(Real(1)), Real(0.5)}}, {}), validation_error);
  Provenance<Real> meta{ProvenanceKind::Bernstein, 1, Real(0), Real(0)};
  EXPECT_THROW(TrigPoly<Real>({{CReal(Real(0.6)), Real(1)}, {CReal(Real(0.6)), Real(-1)}}, meta), validation_error);
}

TEST(TrigPolyJson, RoundTrip) {
  ScopedPrecision p(256);
  auto T = bernstein_trigpoly<Real>(6, Real(1) / 7, Real(2.5));
  auto back = trigpoly_from_json(nlohmann::json::parse(to_json(T).dump()));
  ASSERT_EQ(back.size(), T.size());
  for (std::size_t i = 0; i < T.size(); ++i) {
    EXPECT_EQ(back.terms()[i].amplitude, T.terms()[i].amplitude);
    EXPECT_EQ(back.terms()[i].frequency, T.terms()[i].frequency);
  }
}
