#pragma once

#include <array>
#include <optional>
#include <vector>

#include "jnr/cloud.hpp"
#include "jnr/qops.hpp"
#include "jnr/rng.hpp"
#include "jnr/vec3.hpp"

namespace jnr {

// Unit Bloch pair parameterizing a product state |alpha> (x) |beta>.
struct ProductState {
  Vec3 alpha;
  Vec3 beta;
};

struct SamplerConfig {
  int n_dirs = 2000;
  int n_grid_a = 200;
  int n_grid_b = 200;
  uint64_t seed = 1;
  int restarts = 8;
  int max_iters = 200;

  // Throws BadIndexError on nonpositive fields or n_dirs < 12.
  void validate() const;
};

// f(r,s,t) = constant + linear.(r,s,t) + (r,s,t)^T quad (r,s,t).
struct QuadraticForm {
  double constant = 0;
  Vec3 linear{0, 0, 0};
  Mat3 quad;

  double eval(const Vec3& n) const {
    return constant + linear.dot(n) + quad.quad(n);
  }
  Vec3 gradient(const Vec3& n) const;
};

struct QuadraticFormTriple {
  std::array<QuadraticForm, 3> f;

  Vec3 eval(const Vec3& n) const {
    return {f[0].eval(n), f[1].eval(n), f[2].eval(n)};
  }
};

// Product expectations from Pauli coefficients: with at = (1, a) and
// bt = (1, b) the i-th expectation is sum_{j,k} c_i[j][k] at_j bt_k.
// Affine in each Bloch factor, which makes gradients and the per-factor
// exact minimizers cheap.
struct ProductMap {
  std::array<PauliCoeffs16, 3> c;

  static ProductMap from_triple(const ObservableTriple& tr);

  Vec3 eval(const Vec3& alpha, const Vec3& beta) const;
  // d(w.F)/d(alpha) and /d(beta) for a weight vector w.
  void weighted_gradients(const Vec3& w, const Vec3& alpha, const Vec3& beta,
                          Vec3& g_alpha, Vec3& g_beta) const;
  // Effective single-qubit field: w.F(a,b) = e0 + e.a for fixed b (or
  // fixed a with on_alpha=false). Exact per-factor linearization.
  void effective_field(const Vec3& w, const Vec3& other, bool on_alpha,
                       double& e0, Vec3& e) const;
};

Vec3 product_expectation(const ObservableTriple& tr, const ProductState& p);

// Pi over a Fibonacci grid product n_grid_a x n_grid_b; provenance kept.
PointCloud3 sample_pi(const ObservableTriple& tr, const SamplerConfig& cfg);

// Pi_plus over a single n_grid_a Fibonacci grid (alpha = beta); requires
// every H_i swap-symmetric.
PointCloud3 sample_pi_plus(const ObservableTriple& tr,
                           const SamplerConfig& cfg);

// The paper-form polynomials f_i(r,s,t) of the symmetric case.
QuadraticFormTriple quadratic_map(const std::array<SymmetricPauliCoeffs, 3>& c);
QuadraticFormTriple quadratic_map(const ObservableTriple& tr);

// True iff all constant and linear coefficients vanish within 1e-12.
bool is_homogeneous(const QuadraticFormTriple& q);

// Homogeneous case only: the real symmetric matrices with f_i = n^T M_i n
// on the unit sphere (constant folded into the diagonal would be zero here).
// Throws NotHomogeneousError.
std::array<Mat3, 3> m_matrices(const QuadraticFormTriple& q);

// Boundary samples of Lambda: per direction, the expectation triple of the
// minimal eigenvector of dir.H; a degenerate bottom cluster (gap < 1e-9)
// additionally emits each cluster eigenvector and 8 seeded random unit
// combinations inside the cluster. dim 2 or 4.
PointCloud3 sample_lambda_boundary(const ObservableTriple& tr,
                                   const std::vector<Vec3>& dirs,
                                   uint64_t seed = 1);

// Quadratic-form triples of real unit vectors over a Fibonacci grid.
PointCloud3 sample_lambda_r(const std::array<Mat3, 3>& m,
                            const SamplerConfig& cfg);

struct SupportPoint {
  double value = 0;
  Vec3 point{0, 0, 0};
};

// Exact minimum of dir.(n^T M n) over unit n: minimal eigenpair of
// dir1*M1 + dir2*M2 + dir3*M3. value = dir.point.
SupportPoint support_lambda_r(const std::array<Mat3, 3>& m, const Vec3& dir);

// v = x + i y split into normalized real parts with weight t = <x|x>:
// <v|M|v> = t x'^T M x' + (1-t) y'^T M y' for every real symmetric M.
struct RealSplit {
  double t = 1;
  std::optional<Vec3> x;
  std::optional<Vec3> y;
};

RealSplit complex_to_real_split(const CVector& v);

struct SeesawResult {
  double value = 0;
  ProductState state{{0, 0, 1}, {0, 0, 1}};
  int iterations = 0;
};

// Minimum of dir.F over product states by alternating exact per-factor
// minimization, from cfg.restarts seeded random starts plus a start at the
// best point of a coarse grid scan (so the result never exceeds any grid
// value). Upper bound on the true product minimum, never below the global
// minimal eigenvalue of dir.H minus 1e-10.
SeesawResult seesaw_support(const ObservableTriple& tr, const Vec3& dir,
                            const SamplerConfig& cfg);

// Same alternating descent started from one given state; deterministic,
// used to polish grid argmins and segment endpoints.
SeesawResult seesaw_polish(const ProductMap& pm, const Vec3& dir,
                           const ProductState& start, int max_iters = 200);

// Symmetric-mode polish: minimize dir.f(n) over one Bloch sphere by
// projected gradient descent with backtracking, from the given start.
SeesawResult symmetric_polish(const QuadraticFormTriple& q, const Vec3& dir,
                              const Vec3& start, int max_iters = 200);

// Symmetric-mode analog of seesaw_support: minimum of dir.f over one Bloch
// sphere, polished from the best point of a coarse grid scan plus
// cfg.restarts seeded random starts. Never exceeds any grid value.
SeesawResult symmetric_support(const QuadraticFormTriple& q, const Vec3& dir,
                               const SamplerConfig& cfg);

} // namespace jnr
