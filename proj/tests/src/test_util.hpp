#pragma once

// Shared helpers for the test suites.

#include <array>
#include <cmath>

#include "jnr/cmatrix.hpp"
#include "jnr/qops.hpp"
#include "jnr/rng.hpp"

namespace testutil {

inline jnr::CMatrix random_hermitian(jnr::RandomStream& rng, int n) {
  jnr::CMatrix m(n);
  for (int i = 0; i < n; ++i) {
    m(i, i) = rng.gaussian();
    for (int j = i + 1; j < n; ++j) {
      jnr::cplx v{rng.gaussian(), rng.gaussian()};
      m(i, j) = v;
      m(j, i) = std::conj(v);
    }
  }
  return m;
}

inline jnr::CVector random_unit_cvector(jnr::RandomStream& rng, int n) {
  jnr::CVector v;
  v.n = n;
  double s = 0;
  while (s < 1e-12) {
    for (int i = 0; i < n; ++i) v[i] = {rng.gaussian(), rng.gaussian()};
    s = v.norm();
  }
  for (int i = 0; i < n; ++i) v[i] /= s;
  return v;
}

inline jnr::Mat3 random_sym3(jnr::RandomStream& rng) {
  jnr::Mat3 m;
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) m(i, j) = m(j, i) = rng.gaussian();
  return m;
}

// |m| entrywise max of a matrix difference.
inline double max_abs_diff(const jnr::CMatrix& a, const jnr::CMatrix& b) {
  double r = 0;
  for (int i = 0; i < a.order(); ++i)
    for (int j = 0; j < a.order(); ++j) r = std::max(r, std::abs(a(i, j) - b(i, j)));
  return r;
}

} // namespace testutil
