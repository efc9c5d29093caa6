#pragma once

#include <array>
#include <cmath>
#include <complex>

#include "jnr/errors.hpp"

namespace jnr {

using cplx = std::complex<double>;

// Dense complex matrix of order n <= 4. Small fixed storage keeps everything
// on the stack and deterministic; this library never needs larger operators.
class CMatrix {
public:
  CMatrix() = default;
  explicit CMatrix(int n) : n_(n) {
    if (n < 1 || n > 4) throw BadDimError("CMatrix: order must be in [1,4]");
  }

  int order() const { return n_; }

  cplx& operator()(int i, int j) { return a_[i * n_ + j]; }
  const cplx& operator()(int i, int j) const { return a_[i * n_ + j]; }

  static CMatrix zero(int n) { return CMatrix(n); }
  static CMatrix identity(int n) {
    CMatrix m(n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  CMatrix operator+(const CMatrix& o) const {
    CMatrix r(n_);
    for (int i = 0; i < n_ * n_; ++i) r.a_[i] = a_[i] + o.a_[i];
    return r;
  }
  CMatrix operator-(const CMatrix& o) const {
    CMatrix r(n_);
    for (int i = 0; i < n_ * n_; ++i) r.a_[i] = a_[i] - o.a_[i];
    return r;
  }
  CMatrix operator*(cplx s) const {
    CMatrix r(n_);
    for (int i = 0; i < n_ * n_; ++i) r.a_[i] = a_[i] * s;
    return r;
  }
  CMatrix operator*(const CMatrix& o) const {
    CMatrix r(n_);
    for (int i = 0; i < n_; ++i)
      for (int k = 0; k < n_; ++k) {
        cplx aik = (*this)(i, k);
        if (aik == cplx{}) continue;
        for (int j = 0; j < n_; ++j) r(i, j) += aik * o(k, j);
      }
    return r;
  }

  CMatrix adjoint() const {
    CMatrix r(n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) r(i, j) = std::conj((*this)(j, i));
    return r;
  }

  cplx trace() const {
    cplx t = 0.0;
    for (int i = 0; i < n_; ++i) t += (*this)(i, i);
    return t;
  }

  double frobenius_norm() const {
    double s = 0.0;
    for (int i = 0; i < n_ * n_; ++i) s += std::norm(a_[i]);
    return std::sqrt(s);
  }

  double max_abs_asymmetry() const {
    double m = 0.0;
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j)
        m = std::max(m, std::abs((*this)(i, j) - std::conj((*this)(j, i))));
    return m;
  }

private:
  int n_ = 0;
  std::array<cplx, 16> a_{};
};

inline CMatrix operator*(cplx s, const CMatrix& m) { return m * s; }
inline CMatrix operator*(double s, const CMatrix& m) { return m * cplx(s); }

// Complex state vector of dimension n <= 4.
struct CVector {
  int n = 0;
  std::array<cplx, 4> v{};

  cplx& operator[](int i) { return v[i]; }
  const cplx& operator[](int i) const { return v[i]; }

  double norm() const {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += std::norm(v[i]);
    return std::sqrt(s);
  }
};

// Kronecker product of two 2x2 matrices (index convention (i,j) -> 2i+j).
inline CMatrix kron2(const CMatrix& a, const CMatrix& b) {
  if (a.order() != 2 || b.order() != 2)
    throw BadDimError("kron2: both factors must be 2x2");
  CMatrix r(4);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l)
          r(2 * i + k, 2 * j + l) = a(i, j) * b(k, l);
  return r;
}

// Tensor product of two 2-component vectors.
inline CVector tensor2(const CVector& a, const CVector& b) {
  CVector r;
  r.n = 4;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) r[2 * i + j] = a[i] * b[j];
  return r;
}

} // namespace jnr
