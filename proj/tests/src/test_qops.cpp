#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "jnr/bloch.hpp"
#include "jnr/qops.hpp"
#include "jnr/rng.hpp"
#include "test_util.hpp"

using namespace jnr;
using testutil::max_abs_diff;
using testutil::random_hermitian;
using testutil::random_unit_cvector;

TEST_CASE("pauli matrix algebra") {
  const CMatrix& I = pauli(0);
  const CMatrix& X = pauli(1);
  const CMatrix& Y = pauli(2);
  const CMatrix& Z = pauli(3);
  CHECK(X(0, 1) == cplx{1, 0});
  CHECK(X(1, 0) == cplx{1, 0});
  CHECK(Y(0, 1) == cplx{0, -1});
  CHECK(Y(1, 0) == cplx{0, 1});
  CHECK(Z(0, 0) == cplx{1, 0});
  CHECK(Z(1, 1) == cplx{-1, 0});
  for (int a = 0; a < 4; ++a) {
    const CMatrix& s = pauli(a);
    CHECK(s.order() == 2);
    CHECK(max_abs_diff(s * s, I) < 1e-15);           // involutions
    CHECK(s.max_abs_asymmetry() < 1e-15);            // Hermitian
    if (a > 0) CHECK(std::abs(s.trace()) < 1e-15);   // traceless
  }
  // anticommutation XY + YX = 0
  CHECK(max_abs_diff(X * Y + Y * X, CMatrix::zero(2)) < 1e-15);
  CHECK_THROWS_AS(pauli(4), BadIndexError);
  CHECK_THROWS_AS(pauli(-1), BadIndexError);
}

TEST_CASE("validate_hermitian accepts, corrects, and rejects") {
  HermitianOperator z = validate_hermitian(pauli(3));
  CHECK(z.hermitization_correction == 0.0);

  // anti-Hermitian off-diagonal: [[0, i],[i, 0]]
  CMatrix bad(2);
  bad(0, 1) = cplx{0, 1};
  bad(1, 0) = cplx{0, 1};
  CHECK_THROWS_AS(validate_hermitian(bad), NotHermitianError);

  // sub-tolerance asymmetry is symmetrized and recorded
  CMatrix close(2);
  close(0, 0) = 1;
  close(1, 1) = 1;
  close(0, 1) = cplx{1, 1e-13};
  close(1, 0) = cplx{1, 9e-14};
  HermitianOperator h = validate_hermitian(close);
  CHECK(h.hermitization_correction > 0);
  CHECK(h.hermitization_correction <= 1e-12);
  CHECK(h.m.max_abs_asymmetry() < 1e-15);

  CHECK_THROWS_AS(validate_hermitian(CMatrix::identity(3)), BadDimError);
}

TEST_CASE("eigh fixed examples") {
  EigenDecomposition z = eigh(pauli(3));
  CHECK(z.values[0] == doctest::Approx(-1).epsilon(1e-12));
  CHECK(z.values[1] == doctest::Approx(1).epsilon(1e-12));
  // ascending order puts |1> (eigenvalue -1) first
  CHECK(std::abs(z.vectors[0][1]) == doctest::Approx(1).epsilon(1e-12));
  CHECK(std::abs(z.vectors[1][0]) == doctest::Approx(1).epsilon(1e-12));

  EigenDecomposition xx = eigh(kron2(pauli(1), pauli(1)));
  std::vector<double> want{-1, -1, 1, 1};
  for (int i = 0; i < 4; ++i) CHECK(xx.values[i] == doctest::Approx(want[i]).epsilon(1e-12));

  // block diag(X, [[1,1],[1,1]]) has spectrum (-1, 0, 1, 2)
  CMatrix ones(2);
  ones(0, 0) = ones(0, 1) = ones(1, 0) = ones(1, 1) = 1;
  HermitianOperator h1 =
      block_compose(validate_hermitian(pauli(1)), validate_hermitian(ones));
  EigenDecomposition d = eigh(h1);
  std::vector<double> w2{-1, 0, 1, 2};
  for (int i = 0; i < 4; ++i) CHECK(d.values[i] == doctest::Approx(w2[i]).epsilon(1e-12));
}

TEST_CASE("eigh random-matrix invariants") {
  RandomStream rng(101, 1);
  for (int trial = 0; trial < 300; ++trial) {
    int n = trial % 2 ? 2 : 4;
    CMatrix m = random_hermitian(rng, n);
    EigenDecomposition ed = eigh(m);
    REQUIRE((int)ed.values.size() == n);

    double fro = std::max(1.0, m.frobenius_norm());
    double trace_sum = 0, prod = 1;
    for (int k = 0; k < n; ++k) {
      trace_sum += ed.values[k];
      prod *= ed.values[k];
      if (k + 1 < n) CHECK(ed.values[k] <= ed.values[k + 1]);

      // residual ||H v - lambda v||
      double res = 0;
      for (int i = 0; i < n; ++i) {
        cplx acc = 0;
        for (int j = 0; j < n; ++j) acc += m(i, j) * ed.vectors[k][j];
        res += std::norm(acc - ed.values[k] * ed.vectors[k][i]);
      }
      CHECK(std::sqrt(res) <= 1e-10 * fro);

      // orthonormality against every other vector
      for (int l = 0; l <= k; ++l) {
        cplx ip = 0;
        for (int i = 0; i < n; ++i) ip += std::conj(ed.vectors[l][i]) * ed.vectors[k][i];
        CHECK(std::abs(ip - (l == k ? cplx{1, 0} : cplx{0, 0})) < 1e-10);
      }

      // phase convention: largest-modulus component real nonnegative
      int arg = 0;
      for (int i = 1; i < n; ++i)
        if (std::abs(ed.vectors[k][i]) > std::abs(ed.vectors[k][arg])) arg = i;
      CHECK(ed.vectors[k][arg].imag() == doctest::Approx(0).epsilon(1e-10));
      CHECK(ed.vectors[k][arg].real() >= -1e-12);
    }
    CHECK(trace_sum == doctest::Approx(m.trace().real()).epsilon(1e-10));

    // determinant via Gaussian elimination as the product oracle
    CMatrix a = m;
    cplx det = 1.0;
    std::array<int, 4> rows{0, 1, 2, 3};
    for (int c = 0; c < n; ++c) {
      int piv = c;
      for (int r = c + 1; r < n; ++r)
        if (std::abs(a(rows[r], c)) > std::abs(a(rows[piv], c))) piv = r;
      if (piv != c) {
        std::swap(rows[piv], rows[c]);
        det = -det;
      }
      cplx dd = a(rows[c], c);
      det *= dd;
      if (std::abs(dd) < 1e-300) break;
      for (int r = c + 1; r < n; ++r) {
        cplx f = a(rows[r], c) / dd;
        for (int cc = c; cc < n; ++cc) a(rows[r], cc) -= f * a(rows[c], cc);
      }
    }
    CHECK(std::abs(prod - det.real()) <= 1e-8 * std::max(1.0, std::abs(det.real())));
  }
}

TEST_CASE("eigh determinism and degenerate input") {
  RandomStream rng(7, 2);
  CMatrix m = random_hermitian(rng, 4);
  EigenDecomposition a = eigh(m), b = eigh(m);
  for (int k = 0; k < 4; ++k) {
    CHECK(a.values[k] == b.values[k]);
    for (int i = 0; i < 4; ++i) CHECK(a.vectors[k][i] == b.vectors[k][i]);
  }
  // fully degenerate: identity
  EigenDecomposition id = eigh(CMatrix::identity(4));
  for (int k = 0; k < 4; ++k) {
    CHECK(id.values[k] == doctest::Approx(1).epsilon(1e-14));
    for (int l = 0; l < k; ++l) {
      cplx ip = 0;
      for (int i = 0; i < 4; ++i) ip += std::conj(id.vectors[l][i]) * id.vectors[k][i];
      CHECK(std::abs(ip) < 1e-10);
    }
  }
}

TEST_CASE("eigh_sym3 matches apply") {
  RandomStream rng(5, 3);
  for (int trial = 0; trial < 200; ++trial) {
    Mat3 m = testutil::random_sym3(rng);
    Vec3 evals;
    std::array<Vec3, 3> evecs;
    eigh_sym3(m, evals, evecs);
    CHECK(evals.x <= evals.y);
    CHECK(evals.y <= evals.z);
    std::array<double, 3> lam{evals.x, evals.y, evals.z};
    for (int k = 0; k < 3; ++k) {
      Vec3 r = m.apply(evecs[k]) - evecs[k] * lam[k];
      CHECK(r.norm() < 1e-9);
      CHECK(evecs[k].norm() == doctest::Approx(1).epsilon(1e-10));
    }
    CHECK(std::abs(evecs[0].dot(evecs[1])) < 1e-9);
    CHECK(std::abs(evecs[0].dot(evecs[2])) < 1e-9);
  }
}

TEST_CASE("pauli decompose round trip") {
  RandomStream rng(11, 4);
  for (int trial = 0; trial < 1000; ++trial) {
    HermitianOperator h = validate_hermitian(random_hermitian(rng, 4));
    PauliCoeffs16 c = pauli_decompose(h);
    CHECK(max_abs_diff(pauli_compose(c), h.m) < 1e-12);
  }
  // X(x)X picks out exactly c[X][X]
  PauliCoeffs16 cxx = pauli_decompose(validate_hermitian(kron2(pauli(1), pauli(1))));
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      CHECK(cxx.c[a][b] == doctest::Approx(a == 1 && b == 1 ? 1 : 0).epsilon(1e-14));
  PauliCoeffs16 cid = pauli_decompose(validate_hermitian(CMatrix::identity(4)));
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      CHECK(cid.c[a][b] == doctest::Approx(a == 0 && b == 0 ? 1 : 0).epsilon(1e-14));
  CHECK_THROWS_AS(pauli_decompose(validate_hermitian(pauli(3))), BadDimError);
}

TEST_CASE("pauli_decompose of a block composition via the trace oracle") {
  CMatrix ones(2);
  ones(0, 0) = 1;
  ones(0, 1) = ones(1, 0) = 1;
  ones(1, 1) = 1;
  HermitianOperator h1 =
      block_compose(validate_hermitian(pauli(1)), validate_hermitian(ones));
  PauliCoeffs16 c = pauli_decompose(h1);
  CHECK(c.c[0][1] == doctest::Approx(1).epsilon(1e-14)); // I(x)X coefficient
  // oracle: c[a][b] = Tr(H (sigma_a (x) sigma_b)) / 4, spot-checked for Z(x)X
  cplx t = (h1.m * kron2(pauli(3), pauli(1))).trace();
  CHECK(c.c[3][1] == doctest::Approx(t.real() / 4).epsilon(1e-14));
}

TEST_CASE("symmetric_pauli pattern and rejection") {
  CMatrix xy = kron2(pauli(1), pauli(2)) + kron2(pauli(2), pauli(1));
  SymmetricPauliCoeffs s = symmetric_pauli(validate_hermitian(xy));
  CHECK(s.cxy == doctest::Approx(1).epsilon(1e-14));
  CHECK(s.c0 == doctest::Approx(0).epsilon(1e-14));
  CHECK(s.cxx == doctest::Approx(0).epsilon(1e-14));
  CHECK(s.cx == doctest::Approx(0).epsilon(1e-14));

  // X(x)I alone is not swap-symmetric
  CHECK_THROWS_AS(symmetric_pauli(validate_hermitian(kron2(pauli(1), pauli(0)))),
                  NotSwapSymmetricError);
}

TEST_CASE("block_compose layout and spectra") {
  HermitianOperator x = validate_hermitian(pauli(1));
  HermitianOperator h = block_compose(x, x);
  CHECK(max_abs_diff(h.m, kron2(pauli(0), pauli(1))) < 1e-15); // X (+) X = I(x)X

  HermitianOperator zz =
      block_compose(validate_hermitian(pauli(3)), validate_hermitian(pauli(3) * cplx{-1, 0}));
  CHECK(zz.m(0, 0) == cplx{1, 0});
  CHECK(zz.m(1, 1) == cplx{-1, 0});
  CHECK(zz.m(2, 2) == cplx{-1, 0});
  CHECK(zz.m(3, 3) == cplx{1, 0});
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (i != j) CHECK(std::abs(zz.m(i, j)) < 1e-15);

  // spectrum of the composition = sorted union of block spectra
  RandomStream rng(13, 5);
  for (int trial = 0; trial < 100; ++trial) {
    HermitianOperator a = validate_hermitian(testutil::random_hermitian(rng, 2));
    HermitianOperator b = validate_hermitian(testutil::random_hermitian(rng, 2));
    EigenDecomposition ea = eigh(a), eb = eigh(b), ec = eigh(block_compose(a, b));
    std::vector<double> both{ea.values[0], ea.values[1], eb.values[0], eb.values[1]};
    std::sort(both.begin(), both.end());
    for (int k = 0; k < 4; ++k) CHECK(std::abs(ec.values[k] - both[k]) < 1e-10);
  }
}

TEST_CASE("expectation values") {
  CVector ket0;
  ket0.n = 2;
  ket0[0] = 1;
  CHECK(expectation(validate_hermitian(pauli(3)), ket0) == doctest::Approx(1).epsilon(1e-14));

  CVector ket00;
  ket00.n = 4;
  ket00[0] = 1;
  CHECK(expectation(validate_hermitian(kron2(pauli(1), pauli(1))), ket00) ==
        doctest::Approx(0).epsilon(1e-14));

  // block diag(X, [[1,1],[1,1]]) at |1> (x) |+> evaluates the lower block: 2
  CMatrix ones(2);
  ones(0, 0) = ones(0, 1) = ones(1, 0) = ones(1, 1) = 1;
  HermitianOperator h1 =
      block_compose(validate_hermitian(pauli(1)), validate_hermitian(ones));
  CVector ket1;
  ket1.n = 2;
  ket1[1] = 1;
  CVector plus;
  plus.n = 2;
  plus[0] = plus[1] = 1.0 / std::sqrt(2.0);
  CHECK(expectation(h1, tensor2(ket1, plus)) == doctest::Approx(2).epsilon(1e-12));

  CVector unnorm;
  unnorm.n = 2;
  unnorm[0] = 2;
  CHECK_THROWS_AS(expectation(validate_hermitian(pauli(3)), unnorm), NotNormalizedError);

  // random states stay within the spectrum
  RandomStream rng(17, 6);
  for (int trial = 0; trial < 200; ++trial) {
    HermitianOperator h = validate_hermitian(testutil::random_hermitian(rng, 4));
    EigenDecomposition ed = eigh(h);
    double e = expectation(h, random_unit_cvector(rng, 4));
    CHECK(e >= ed.values.front() - 1e-10);
    CHECK(e <= ed.values.back() + 1e-10);
  }
}

TEST_CASE("make_triple validation") {
  CHECK_THROWS_AS(make_triple(pauli(1), pauli(2), CMatrix::identity(4)), BadDimError);
  CMatrix bad(2);
  bad(0, 1) = cplx{0, 1};
  bad(1, 0) = cplx{0, 1};
  CHECK_THROWS_AS(make_triple(pauli(1), bad, pauli(3)), NotHermitianError);
  ObservableTriple t = make_triple(pauli(1), pauli(2), pauli(3));
  CHECK(t.dim() == 2);
}

TEST_CASE("tensor2 factorizes expectations") {
  RandomStream rng(19, 7);
  for (int trial = 0; trial < 100; ++trial) {
    CMatrix a = testutil::random_hermitian(rng, 2);
    CMatrix b = testutil::random_hermitian(rng, 2);
    CVector va = random_unit_cvector(rng, 2), vb = random_unit_cvector(rng, 2);
    double lhs = expectation(validate_hermitian(kron2(a, b)), tensor2(va, vb));
    double rhs = expectation(validate_hermitian(a), va) * expectation(validate_hermitian(b), vb);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
  }
}
