#pragma once

#include <array>
#include <vector>

#include "jnr/cmatrix.hpp"
#include "jnr/errors.hpp"
#include "jnr/vec3.hpp"

namespace jnr {

// Hermitian observable of dimension 2 or 4. Construct via validate_hermitian;
// the constructor symmetrizes sub-tolerance asymmetry and records it.
struct HermitianOperator {
  CMatrix m;
  // Largest |M(i,j) - conj(M(j,i))| found on input; zero for exact input.
  double hermitization_correction = 0.0;

  int dim() const { return m.order(); }
};

struct ObservableTriple {
  std::array<HermitianOperator, 3> h;

  int dim() const { return h[0].dim(); }
  const HermitianOperator& operator[](int i) const { return h[i]; }
  HermitianOperator& operator[](int i) { return h[i]; }
};

// Coefficients c[a][b] of H = sum c[a][b] sigma_a (x) sigma_b over the
// two-qubit Pauli basis; index order I,X,Y,Z. Entries are real for
// Hermitian H.
struct PauliCoeffs16 {
  std::array<std::array<double, 4>, 4> c{};
};

// The ten coefficients of a swap-symmetric two-qubit observable:
// H = c0 I(x)I + cxx X(x)X + cyy Y(x)Y + czz Z(x)Z
//   + cxy (X(x)Y + Y(x)X) + cxz (X(x)Z + Z(x)X) + cyz (Y(x)Z + Z(x)Y)
//   + cx (X(x)I + I(x)X) + cy (Y(x)I + I(x)Y) + cz (Z(x)I + I(x)Z).
struct SymmetricPauliCoeffs {
  double c0 = 0, cxx = 0, cyy = 0, czz = 0;
  double cxy = 0, cxz = 0, cyz = 0;
  double cx = 0, cy = 0, cz = 0;
};

struct EigenDecomposition {
  std::vector<double> values;   // ascending
  std::vector<CVector> vectors; // orthonormal, phase-fixed, values order
};

// Pauli basis matrices, index order I, X, Y, Z.
const CMatrix& pauli(int a);

// Validates hermiticity within 1e-12 max entrywise asymmetry and dimension
// in {2,4}. Sub-tolerance asymmetry is symmetrized to (M+M^dag)/2 and the
// applied correction recorded. Throws NotHermitianError / BadDimError.
HermitianOperator validate_hermitian(const CMatrix& m);

ObservableTriple make_triple(const CMatrix& h1, const CMatrix& h2,
                             const CMatrix& h3);

// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi sweeps
// (fixed rotation order, hard cap 100 sweeps -> NoConvergenceError).
// Eigenvalues ascending; each eigenvector's largest-modulus component
// (lowest index on ties) is made real nonnegative. Eigenvalue clusters with
// gap < 1e-9 are re-orthonormalized by Gram-Schmidt in index order.
// Accepts any order <= 4 (real symmetric input stays real).
EigenDecomposition eigh(const CMatrix& m);
inline EigenDecomposition eigh(const HermitianOperator& h) { return eigh(h.m); }

// Real symmetric 3x3 eigendecomposition through the same Jacobi kernel
// (real input keeps the rotations real). Ascending eigenvalues.
void eigh_sym3(const Mat3& m, Vec3& evals, std::array<Vec3, 3>& evecs);

// c[a][b] = Tr(h (sigma_a (x) sigma_b)) / 4; requires dim 4.
PauliCoeffs16 pauli_decompose(const HermitianOperator& h);

// Rebuild the 4x4 operator from Pauli coefficients (test/loader helper).
CMatrix pauli_compose(const PauliCoeffs16& c);

// Extract the 10 symmetric coefficients; throws NotSwapSymmetricError if any
// |c[a][b] - c[b][a]| > 1e-12.
SymmetricPauliCoeffs symmetric_pauli(const PauliCoeffs16& c);
SymmetricPauliCoeffs symmetric_pauli(const HermitianOperator& h);

// Block-diagonal composition diag(block_a, block_b) of two 2x2 operators.
HermitianOperator block_compose(const HermitianOperator& block_a,
                                const HermitianOperator& block_b);

// <v|h|v> for a unit vector (tolerance 1e-10 on the norm); real by
// hermiticity. Throws NotNormalizedError / BadDimError.
double expectation(const HermitianOperator& h, const CVector& v);

// Expectation triple (<v|H1|v>, <v|H2|v>, <v|H3|v>).
Vec3 expectation_triple(const ObservableTriple& tr, const CVector& v);

} // namespace jnr
