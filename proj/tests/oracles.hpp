#pragma once

// Independent reference computations used by the unit tests. They take a
// different route from the library code (monomial expansions, direct
// quadrature, hand formulas) so agreement is evidence of correctness.

#include "supershift/numeric.hpp"

namespace oracles {

using supershift::CReal;
using supershift::Real;

/// e^{-i eps z} (cos w + i lambda sin w)^N expanded by the binomial theorem.
inline CReal closed_form_by_binomial(int N, const Real& eps, const Real& lambda, const CReal& z) {
  const Real s = (Real(1) - eps) / N;
  const CReal w{z.re * s, z.im * s};
  const CReal c = supershift::cos(w);
  const CReal is = CReal(Real(0), lambda) * supershift::sin(w);
  CReal sum;
  for (int k = 0; k <= N; ++k) {
    Real b(supershift::binomial(static_cast<unsigned long>(N), static_cast<unsigned long>(k)));
    sum += b * (supershift::ipow(c, static_cast<unsigned long>(N - k)) * supershift::ipow(is, static_cast<unsigned long>(k)));
  }
  return supershift::exp(CReal(eps * z.im, -(eps * z.re))) * sum;
}

}  // namespace oracles
