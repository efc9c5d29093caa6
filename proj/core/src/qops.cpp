#include "jnr/qops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace jnr {

namespace {

CMatrix make_pauli(int a) {
  CMatrix m(2);
  switch (a) {
    case 0:
      m(0, 0) = 1;
      m(1, 1) = 1;
      break;
    case 1:
      m(0, 1) = 1;
      m(1, 0) = 1;
      break;
    case 2:
      m(0, 1) = cplx(0, -1);
      m(1, 0) = cplx(0, 1);
      break;
    case 3:
      m(0, 0) = 1;
      m(1, 1) = -1;
      break;
    default:
      throw BadIndexError("pauli index must be 0..3");
  }
  return m;
}

} // namespace

const CMatrix& pauli(int a) {
  static const CMatrix table[4] = {make_pauli(0), make_pauli(1), make_pauli(2),
                                   make_pauli(3)};
  if (a < 0 || a > 3) throw BadIndexError("pauli index must be 0..3");
  return table[a];
}

HermitianOperator validate_hermitian(const CMatrix& m) {
  const int n = m.order();
  if (n != 2 && n != 4)
    throw BadDimError("observable dimension must be 2 or 4, got " +
                      std::to_string(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const cplx v = m(i, j);
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
        throw NotHermitianError("matrix entry (" + std::to_string(i) + "," +
                                std::to_string(j) + ") is not finite");
    }
  const double asym = m.max_abs_asymmetry();
  if (asym > 1e-12)
    throw NotHermitianError("max |M - M^dag| entry is " +
                            std::to_string(asym) + ", above 1e-12");
  HermitianOperator h;
  h.m = CMatrix(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      h.m(i, j) = 0.5 * (m(i, j) + std::conj(m(j, i)));
  h.hermitization_correction = asym;
  return h;
}

ObservableTriple make_triple(const CMatrix& h1, const CMatrix& h2,
                             const CMatrix& h3) {
  ObservableTriple tr{{validate_hermitian(h1), validate_hermitian(h2),
                       validate_hermitian(h3)}};
  if (tr.h[1].dim() != tr.h[0].dim() || tr.h[2].dim() != tr.h[0].dim())
    throw BadDimError("the three observables must share one dimension");
  return tr;
}

EigenDecomposition eigh(const CMatrix& m) {
  const int n = m.order();
  CMatrix a = m;
  // Work on the exact Hermitian part so roundoff in the input cannot leak
  // imaginary diagonals into the rotations.
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = 0.5 * (a(i, j) + std::conj(m(j, i)));

  CMatrix v = CMatrix::identity(n);
  const double fnorm = std::max(1.0, a.frobenius_norm());
  const double stop = 1e-14 * fnorm;

  auto off_norm = [&]() {
    double s = 0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) s += std::norm(a(p, q));
    return std::sqrt(2 * s);
  };

  bool converged = off_norm() <= stop;
  for (int sweep = 0; sweep < 100 && !converged; ++sweep) {
    for (int p = 0; p < n - 1; ++p)
      for (int q = p + 1; q < n; ++q) {
        const cplx apq = a(p, q);
        const double g = std::abs(apq);
        if (g <= 1e-18 * fnorm) continue;
        const cplx phase = apq / g; // e^{i phi}
        const double tau = (a(q, q).real() - a(p, p).real()) / (2 * g);
        const double t =
            (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1 + tau * tau));
        const double c = 1 / std::sqrt(1 + t * t);
        const double s = t * c;
        // Columns p,q of a and v mix by U = [[c, s*phase], [-s*conj(phase), c]].
        for (int k = 0; k < n; ++k) {
          const cplx akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * std::conj(phase) * akq;
          a(k, q) = s * phase * akp + c * akq;
          const cplx vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * std::conj(phase) * vkq;
          v(k, q) = s * phase * vkp + c * vkq;
        }
        // Rows p,q by U^dag on the left.
        for (int k = 0; k < n; ++k) {
          const cplx apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * phase * aqk;
          a(q, k) = s * std::conj(phase) * apk + c * aqk;
        }
        a(p, q) = 0.5 * (a(p, q) + std::conj(a(q, p)));
        a(q, p) = std::conj(a(p, q));
      }
    converged = off_norm() <= stop;
  }
  if (!converged)
    throw NoConvergenceError("eigensolver did not reach tolerance in 100 sweeps");

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) {
    return a(i, i).real() < a(j, j).real();
  });

  EigenDecomposition ed;
  ed.values.resize(n);
  ed.vectors.resize(n);
  for (int k = 0; k < n; ++k) {
    ed.values[k] = a(order[k], order[k]).real();
    CVector vec;
    vec.n = n;
    for (int i = 0; i < n; ++i) vec[i] = v(i, order[k]);
    ed.vectors[k] = vec;
  }

  // Degenerate clusters: re-orthonormalize in index order so downstream
  // code sees one deterministic basis.
  int k = 0;
  while (k < n) {
    int e = k + 1;
    while (e < n && ed.values[e] - ed.values[e - 1] < 1e-9) ++e;
    for (int i = k; i < e; ++i) {
      for (int j = k; j < i; ++j) {
        cplx dot = 0;
        for (int r = 0; r < n; ++r)
          dot += std::conj(ed.vectors[j][r]) * ed.vectors[i][r];
        for (int r = 0; r < n; ++r) ed.vectors[i][r] -= dot * ed.vectors[j][r];
      }
      const double nrm = ed.vectors[i].norm();
      if (nrm < 1e-8)
        throw NoConvergenceError("degenerate cluster lost rank during re-orthonormalization");
      for (int r = 0; r < n; ++r) ed.vectors[i][r] /= nrm;
    }
    k = e;
  }

  for (int i = 0; i < n; ++i) {
    int best = 0;
    double bm = -1;
    for (int r = 0; r < n; ++r) {
      const double m2 = std::abs(ed.vectors[i][r]);
      if (m2 > bm + 1e-15) {
        bm = m2;
        best = r;
      }
    }
    const cplx piv = ed.vectors[i][best];
    if (std::abs(piv) > 0) {
      const cplx ph = std::conj(piv) / std::abs(piv);
      for (int r = 0; r < n; ++r) ed.vectors[i][r] *= ph;
    }
  }
  return ed;
}

void eigh_sym3(const Mat3& m, Vec3& evals, std::array<Vec3, 3>& evecs) {
  CMatrix cm(3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) cm(i, j) = 0.5 * (m(i, j) + m(j, i));
  const EigenDecomposition ed = eigh(cm);
  evals = {ed.values[0], ed.values[1], ed.values[2]};
  for (int k = 0; k < 3; ++k)
    evecs[k] = {ed.vectors[k][0].real(), ed.vectors[k][1].real(),
                ed.vectors[k][2].real()};
}

PauliCoeffs16 pauli_decompose(const HermitianOperator& h) {
  if (h.dim() != 4) throw BadDimError("pauli decomposition needs a 4x4 operator");
  PauliCoeffs16 out;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      const CMatrix basis = kron2(pauli(a), pauli(b));
      cplx tr = 0;
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) tr += h.m(i, j) * basis(j, i);
      out.c[a][b] = tr.real() / 4;
    }
  return out;
}

CMatrix pauli_compose(const PauliCoeffs16& c) {
  CMatrix m(4);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      if (c.c[a][b] == 0) continue;
      const CMatrix basis = kron2(pauli(a), pauli(b));
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) m(i, j) += c.c[a][b] * basis(i, j);
    }
  return m;
}

SymmetricPauliCoeffs symmetric_pauli(const PauliCoeffs16& c) {
  double worst = 0;
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b)
      worst = std::max(worst, std::abs(c.c[a][b] - c.c[b][a]));
  if (worst > 1e-12)
    throw NotSwapSymmetricError(
        "operator does not commute with the two-qubit swap (coefficient "
        "asymmetry " +
        std::to_string(worst) + ")");
  SymmetricPauliCoeffs s;
  s.c0 = c.c[0][0];
  s.cxx = c.c[1][1];
  s.cyy = c.c[2][2];
  s.czz = c.c[3][3];
  s.cxy = c.c[1][2];
  s.cxz = c.c[1][3];
  s.cyz = c.c[2][3];
  s.cx = c.c[0][1];
  s.cy = c.c[0][2];
  s.cz = c.c[0][3];
  return s;
}

SymmetricPauliCoeffs symmetric_pauli(const HermitianOperator& h) {
  return symmetric_pauli(pauli_decompose(h));
}

HermitianOperator block_compose(const HermitianOperator& block_a,
                                const HermitianOperator& block_b) {
  if (block_a.dim() != 2 || block_b.dim() != 2)
    throw BadDimError("block composition takes two 2x2 operators");
  CMatrix m(4);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      m(i, j) = block_a.m(i, j);
      m(i + 2, j + 2) = block_b.m(i, j);
    }
  return validate_hermitian(m);
}

double expectation(const HermitianOperator& h, const CVector& v) {
  const int n = h.dim();
  if (v.n != n) throw BadDimError("state dimension does not match the operator");
  if (std::abs(v.norm() - 1.0) > 1e-10)
    throw NotNormalizedError("expectation needs a unit state");
  cplx acc = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) acc += std::conj(v[i]) * h.m(i, j) * v[j];
  if (std::abs(acc.imag()) > 1e-10 * std::max(1.0, std::abs(acc.real())))
    throw NotHermitianError("expectation acquired an imaginary part");
  return acc.real();
}

Vec3 expectation_triple(const ObservableTriple& tr, const CVector& v) {
  return {expectation(tr.h[0], v), expectation(tr.h[1], v),
          expectation(tr.h[2], v)};
}

} // namespace jnr
