#include "jnr/ranges.hpp"

#include <algorithm>
#include <cmath>

#include "jnr/bloch.hpp"

namespace jnr {

void SamplerConfig::validate() const {
  if (n_dirs < 12) throw BadIndexError("n_dirs must be at least 12");
  if (n_grid_a < 1 || n_grid_b < 1)
    throw BadIndexError("grid sizes must be positive");
  if (restarts < 1) throw BadIndexError("restarts must be positive");
  if (max_iters < 1) throw BadIndexError("max_iters must be positive");
}

Vec3 QuadraticForm::gradient(const Vec3& n) const {
  Vec3 g = linear;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const double q = quad(i, j) + quad(j, i);
      g[i] += q * n[j];
    }
  return g;
}

ProductMap ProductMap::from_triple(const ObservableTriple& tr) {
  if (tr.dim() != 4)
    throw BadDimError("product expectations need a two-qubit triple");
  ProductMap pm;
  for (int i = 0; i < 3; ++i) pm.c[i] = pauli_decompose(tr.h[i]);
  return pm;
}

namespace {

inline void tilde(const Vec3& a, double out[4]) {
  out[0] = 1;
  out[1] = a.x;
  out[2] = a.y;
  out[3] = a.z;
}

} // namespace

Vec3 ProductMap::eval(const Vec3& alpha, const Vec3& beta) const {
  double at[4], bt[4];
  tilde(alpha, at);
  tilde(beta, bt);
  Vec3 out{0, 0, 0};
  for (int i = 0; i < 3; ++i) {
    double acc = 0;
    for (int j = 0; j < 4; ++j) {
      double row = 0;
      for (int k = 0; k < 4; ++k) row += c[i].c[j][k] * bt[k];
      acc += at[j] * row;
    }
    out[i] = acc;
  }
  return out;
}

void ProductMap::weighted_gradients(const Vec3& w, const Vec3& alpha,
                                    const Vec3& beta, Vec3& g_alpha,
                                    Vec3& g_beta) const {
  double at[4], bt[4];
  tilde(alpha, at);
  tilde(beta, bt);
  g_alpha = {0, 0, 0};
  g_beta = {0, 0, 0};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k) {
        const double wc = w[i] * c[i].c[j][k];
        if (j > 0) g_alpha[j - 1] += wc * bt[k];
        if (k > 0) g_beta[k - 1] += wc * at[j];
      }
}

void ProductMap::effective_field(const Vec3& w, const Vec3& other,
                                 bool on_alpha, double& e0, Vec3& e) const {
  double ot[4];
  tilde(other, ot);
  e0 = 0;
  e = {0, 0, 0};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k) {
        const double wc = w[i] * c[i].c[j][k];
        if (on_alpha) {
          // variable index j, fixed index k
          if (j == 0)
            e0 += wc * ot[k];
          else
            e[j - 1] += wc * ot[k];
        } else {
          if (k == 0)
            e0 += wc * ot[j];
          else
            e[k - 1] += wc * ot[j];
        }
      }
}

Vec3 product_expectation(const ObservableTriple& tr, const ProductState& p) {
  if (tr.dim() != 4)
    throw BadDimError("product expectations need a two-qubit triple");
  const CVector va = bloch_to_state(p.alpha);
  const CVector vb = bloch_to_state(p.beta);
  const CVector v = tensor2(va, vb);
  return expectation_triple(tr, v);
}

PointCloud3 sample_pi(const ObservableTriple& tr, const SamplerConfig& cfg) {
  cfg.validate();
  const ProductMap pm = ProductMap::from_triple(tr);
  const std::vector<Vec3> ga = fibonacci_sphere(cfg.n_grid_a);
  const std::vector<Vec3> gb = fibonacci_sphere(cfg.n_grid_b);
  PointCloud3 cloud;
  cloud.tag = RangeKind::Pi;
  cloud.pts.reserve(ga.size() * gb.size());
  cloud.prov.reserve(ga.size() * gb.size());
  for (const Vec3& a : ga)
    for (const Vec3& b : gb) cloud.push(pm.eval(a, b), Provenance{a, b});
  return cloud;
}

PointCloud3 sample_pi_plus(const ObservableTriple& tr,
                           const SamplerConfig& cfg) {
  cfg.validate();
  const QuadraticFormTriple q = quadratic_map(tr);
  PointCloud3 cloud;
  cloud.tag = RangeKind::PiPlus;
  const std::vector<Vec3> grid = fibonacci_sphere(cfg.n_grid_a);
  cloud.pts.reserve(grid.size());
  cloud.prov.reserve(grid.size());
  for (const Vec3& n : grid) cloud.push(q.eval(n), Provenance{n, n});
  return cloud;
}

QuadraticFormTriple quadratic_map(
    const std::array<SymmetricPauliCoeffs, 3>& c) {
  QuadraticFormTriple q;
  for (int i = 0; i < 3; ++i) {
    const SymmetricPauliCoeffs& s = c[i];
    QuadraticForm& f = q.f[i];
    f.constant = s.c0;
    f.linear = Vec3{s.cx, s.cy, s.cz} * 2.0;
    f.quad = Mat3();
    f.quad(0, 0) = s.cxx;
    f.quad(1, 1) = s.cyy;
    f.quad(2, 2) = s.czz;
    f.quad(0, 1) = f.quad(1, 0) = s.cxy;
    f.quad(0, 2) = f.quad(2, 0) = s.cxz;
    f.quad(1, 2) = f.quad(2, 1) = s.cyz;
  }
  return q;
}

QuadraticFormTriple quadratic_map(const ObservableTriple& tr) {
  if (tr.dim() != 4)
    throw BadDimError("the symmetric polynomial map needs a two-qubit triple");
  std::array<SymmetricPauliCoeffs, 3> c;
  for (int i = 0; i < 3; ++i) c[i] = symmetric_pauli(tr.h[i]);
  return quadratic_map(c);
}

bool is_homogeneous(const QuadraticFormTriple& q) {
  for (const QuadraticForm& f : q.f) {
    if (std::abs(f.constant) > 1e-12) return false;
    if (std::abs(f.linear.x) > 1e-12 || std::abs(f.linear.y) > 1e-12 ||
        std::abs(f.linear.z) > 1e-12)
      return false;
  }
  return true;
}

std::array<Mat3, 3> m_matrices(const QuadraticFormTriple& q) {
  if (!is_homogeneous(q))
    throw NotHomogeneousError(
        "quadratic map has constant or linear terms; no pure matrix form");
  std::array<Mat3, 3> m;
  for (int i = 0; i < 3; ++i)
    for (int r = 0; r < 3; ++r)
      for (int col = 0; col < 3; ++col)
        m[i](r, col) = 0.5 * (q.f[i].quad(r, col) + q.f[i].quad(col, r));
  return m;
}

PointCloud3 sample_lambda_boundary(const ObservableTriple& tr,
                                   const std::vector<Vec3>& dirs,
                                   uint64_t seed) {
  const int n = tr.dim();
  PointCloud3 cloud;
  cloud.tag = RangeKind::Lambda;
  for (size_t d = 0; d < dirs.size(); ++d) {
    const Vec3& dir = dirs[d];
    if (std::abs(dir.norm() - 1.0) > 1e-10)
      throw NotNormalizedError("sweep directions must be unit vectors");
    CMatrix h(n);
    for (int i = 0; i < 3; ++i) h = h + dir[i] * tr.h[i].m;
    const EigenDecomposition ed = eigh(h);
    int cluster = 1;
    while (cluster < n && ed.values[cluster] - ed.values[0] < 1e-9) ++cluster;
    if (cluster == 1) {
      cloud.push(expectation_triple(tr, ed.vectors[0]));
      continue;
    }
    for (int k = 0; k < cluster; ++k)
      cloud.push(expectation_triple(tr, ed.vectors[k]));
    RandomStream rng(seed, d);
    for (int probe = 0; probe < 8; ++probe) {
      CVector v;
      v.n = n;
      for (int i = 0; i < n; ++i) v[i] = 0;
      for (int k = 0; k < cluster; ++k) {
        const cplx w(rng.gaussian(), rng.gaussian());
        for (int i = 0; i < n; ++i) v[i] += w * ed.vectors[k][i];
      }
      const double nrm = v.norm();
      if (nrm < 1e-12) continue;
      for (int i = 0; i < n; ++i) v[i] /= nrm;
      cloud.push(expectation_triple(tr, v));
    }
  }
  return cloud;
}

PointCloud3 sample_lambda_r(const std::array<Mat3, 3>& m,
                            const SamplerConfig& cfg) {
  cfg.validate();
  PointCloud3 cloud;
  cloud.tag = RangeKind::LambdaR;
  const std::vector<Vec3> grid = fibonacci_sphere(cfg.n_grid_a);
  cloud.pts.reserve(grid.size());
  cloud.prov.reserve(grid.size());
  for (const Vec3& n : grid) {
    cloud.push({m[0].quad(n), m[1].quad(n), m[2].quad(n)}, Provenance{n, n});
  }
  return cloud;
}

SupportPoint support_lambda_r(const std::array<Mat3, 3>& m, const Vec3& dir) {
  Mat3 a;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c)
      a(r, c) = dir.x * m[0](r, c) + dir.y * m[1](r, c) + dir.z * m[2](r, c);
  Vec3 evals;
  std::array<Vec3, 3> evecs;
  eigh_sym3(a, evals, evecs);
  SupportPoint sp;
  const Vec3& n = evecs[0];
  sp.point = {m[0].quad(n), m[1].quad(n), m[2].quad(n)};
  sp.value = dir.dot(sp.point);
  return sp;
}

RealSplit complex_to_real_split(const CVector& v) {
  if (v.n != 3) throw BadDimError("real split is defined for 3-vectors");
  if (std::abs(v.norm() - 1.0) > 1e-10)
    throw NotNormalizedError("real split needs a unit vector");
  Vec3 x{v[0].real(), v[1].real(), v[2].real()};
  Vec3 y{v[0].imag(), v[1].imag(), v[2].imag()};
  const double nx = x.norm(), ny = y.norm();
  RealSplit out;
  if (nx < 1e-12) {
    out.t = 0;
    out.y = y / ny;
    return out;
  }
  if (ny < 1e-12) {
    out.t = 1;
    out.x = x / nx;
    return out;
  }
  out.t = nx * nx;
  out.x = x / nx;
  out.y = y / ny;
  return out;
}

namespace {

struct SeesawState {
  double value = 0;
  Vec3 a{0, 0, 1};
  Vec3 b{0, 0, 1};
  int iterations = 0;
};

SeesawState descend(const ProductMap& pm, const Vec3& dir, Vec3 a, Vec3 b,
                    int max_iters) {
  double e0;
  Vec3 e;
  double value = dir.dot(pm.eval(a, b));
  int it = 0;
  for (; it < max_iters; ++it) {
    pm.effective_field(dir, b, true, e0, e);
    if (e.norm() > 1e-15) a = e * (-1.0 / e.norm());
    pm.effective_field(dir, a, false, e0, e);
    if (e.norm() > 1e-15) b = e * (-1.0 / e.norm());
    const double next = e0 + e.dot(b);
    if (std::abs(value - next) < 1e-12) {
      value = next;
      ++it;
      break;
    }
    value = next;
  }
  return SeesawState{value, a, b, it};
}

bool state_less(const ProductState& p, const ProductState& q) {
  if (lex_less(p.alpha, q.alpha)) return true;
  if (lex_less(q.alpha, p.alpha)) return false;
  return lex_less(p.beta, q.beta);
}

} // namespace

SeesawResult seesaw_support(const ObservableTriple& tr, const Vec3& dir,
                            const SamplerConfig& cfg) {
  cfg.validate();
  const ProductMap pm = ProductMap::from_triple(tr);

  // Best grid point first, so the result can never exceed any grid value.
  const std::vector<Vec3> ga = fibonacci_sphere(cfg.n_grid_a);
  const std::vector<Vec3> gb = fibonacci_sphere(cfg.n_grid_b);
  Vec3 best_a = ga[0], best_b = gb[0];
  double best_grid = dir.dot(pm.eval(best_a, best_b));
  for (const Vec3& a : ga)
    for (const Vec3& b : gb) {
      const double v = dir.dot(pm.eval(a, b));
      if (v < best_grid) {
        best_grid = v;
        best_a = a;
        best_b = b;
      }
    }

  SeesawState best = descend(pm, dir, best_a, best_b, cfg.max_iters);
  RandomStream rng(cfg.seed, 2);
  for (int r = 0; r < cfg.restarts; ++r) {
    const Vec3 a0 = rng.unit_vec3();
    const Vec3 b0 = rng.unit_vec3();
    const SeesawState cand = descend(pm, dir, a0, b0, cfg.max_iters);
    const bool better =
        cand.value < best.value ||
        (cand.value == best.value &&
         state_less(ProductState{cand.a, cand.b}, ProductState{best.a, best.b}));
    if (better) best = cand;
  }
  return SeesawResult{best.value, ProductState{best.a, best.b},
                      best.iterations};
}

SeesawResult seesaw_polish(const ProductMap& pm, const Vec3& dir,
                           const ProductState& start, int max_iters) {
  Vec3 a = start.alpha, b = start.beta;
  const double na = a.norm(), nb = b.norm();
  a = na > 1e-12 ? a / na : Vec3{0, 0, 1};
  b = nb > 1e-12 ? b / nb : Vec3{0, 0, 1};
  const SeesawState s = descend(pm, dir, a, b, max_iters);
  return SeesawResult{s.value, ProductState{s.a, s.b}, s.iterations};
}

SeesawResult symmetric_polish(const QuadraticFormTriple& q, const Vec3& dir,
                              const Vec3& start, int max_iters) {
  Vec3 n = start;
  const double nn = n.norm();
  n = nn > 1e-12 ? n / nn : Vec3{0, 0, 1};

  auto value_at = [&](const Vec3& p) { return dir.dot(q.eval(p)); };
  double value = value_at(n);
  int it = 0;
  double step = 0.5;
  for (; it < max_iters; ++it) {
    Vec3 g{0, 0, 0};
    for (int i = 0; i < 3; ++i) g = g + q.f[i].gradient(n) * dir[i];
    // Project onto the tangent plane of the sphere.
    g = g - n * g.dot(n);
    if (g.norm() < 1e-13) break;
    bool moved = false;
    while (step > 1e-14) {
      Vec3 cand = n - g * step;
      cand = cand / cand.norm();
      const double cv = value_at(cand);
      if (cv < value - 1e-15) {
        n = cand;
        value = cv;
        moved = true;
        step *= 1.6;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  return SeesawResult{value, ProductState{n, n}, it};
}

SeesawResult symmetric_support(const QuadraticFormTriple& q, const Vec3& dir,
                               const SamplerConfig& cfg) {
  cfg.validate();
  const std::vector<Vec3> grid = fibonacci_sphere(cfg.n_grid_a);
  Vec3 best_n = grid[0];
  double best_grid = dir.dot(q.eval(best_n));
  for (const Vec3& n : grid) {
    const double v = dir.dot(q.eval(n));
    if (v < best_grid) {
      best_grid = v;
      best_n = n;
    }
  }
  SeesawResult best = symmetric_polish(q, dir, best_n, cfg.max_iters);
  RandomStream rng(cfg.seed, 3);
  for (int r = 0; r < cfg.restarts; ++r) {
    const SeesawResult cand =
        symmetric_polish(q, dir, rng.unit_vec3(), cfg.max_iters);
    const bool better = cand.value < best.value ||
                        (cand.value == best.value &&
                         state_less(cand.state, best.state));
    if (better) best = cand;
  }
  return best;
}

} // namespace jnr
