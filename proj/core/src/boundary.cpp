#include "jnr/boundary.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "jnr/bloch.hpp"
#include "jnr/qops.hpp"
#include "jnr/rng.hpp"

namespace jnr {

namespace {

// Classification and assembly constants. Scale-free quantities; everything
// geometric is multiplied by the cloud diameter (or ctol) at the call site.
//
// kGaplessRel: a segment counts as gapless only when every probe sits this
// close (relative) to the product range. Ruled boundary next to a gapless
// seam approaches the range quartically in the offset angle, so the
// threshold has to sit orders of magnitude under eps_member to keep
// near-seam rulings out of the gapless bucket while staying far above the
// solver's noise floor (~1e-10 relative after the Gauss-Newton tail).
constexpr double kGaplessRel = 1e-7;
// A gapless chord must also touch the hull boundary: its midpoint may sit
// at most this far (relative) inside the raw facet planes. Catches chords
// through solid regions of the product range, which membership probes alone
// cannot distinguish from seams. Wide enough for the sag of polished chords
// whose ends land a hair past their edge curves.
constexpr double kDepthGateRel = 1e-6;
// Greedy dedup radius between segment footprints, in units of ctol.
constexpr double kDedupRadius = 0.4;
// A segment is refined only if no earlier refined footprint is this close.
constexpr double kRefineRadius = 2.0;
// Local sampling caps appended around segment endpoint provenance.
constexpr double kCapRho = 0.18;
constexpr int kCapBeta = 48;
constexpr int kGeoAlpha = 14;
constexpr int kCapSym = 60;
// Floor of the facet-normal direction budget.
constexpr int kFacetDirFloor = 256;
// Phase-scan contact matching, in units of the cloud diameter: a contact
// inherits Gapless only within the first radius of a gapless feature, and
// SymmetryBreaking within the second radius of any ruled/flat feature.
constexpr double kPhaseProxGapless = 1.4e-2;
constexpr double kPhaseProxStruct = 2.2e-2;
// Direction polish: tilt applied along the segment axis to expose the two
// stable support vertices flanking a ruled segment, and the largest
// direction correction accepted from one polish pass.
constexpr double kPolishLambda = 0.1;
constexpr int kPolishRounds = 2;
constexpr double kPolishMaxTilt = 0.35;
// Family walking. Tracking steps follow the band with moves of at most
// kWalkTrack*ctol between re-locks; a link is recorded every time the walk
// gets kWalkRecord*ctol away from the last one, which keeps consecutive
// records under the chaining tolerance yet above the dedup radius. Step
// sizes are direction-space angles in radians.
constexpr double kWalkTrack = 0.30;
constexpr double kWalkRecord = 0.55;
constexpr double kWalkStep0 = 0.02;
constexpr double kWalkStepMin = 1e-4;
constexpr double kWalkStepMax = 0.35;
constexpr int kWalkIters = 400;
constexpr size_t kWalkBudget = 1200;

double point_line_dist(const Vec3& p, const Vec3& origin, const Vec3& u) {
  const Vec3 d = p - origin;
  const Vec3 off = d - u * d.dot(u);
  return off.norm();
}

double point_seg_dist(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double len2 = ab.norm2();
  if (len2 < 1e-300) return dist(p, a);
  double t = (p - a).dot(ab) / len2;
  t = std::clamp(t, 0.0, 1.0);
  return dist(p, a + ab * t);
}

double seg_seg_dist(const Vec3& a1, const Vec3& b1, const Vec3& a2,
                    const Vec3& b2) {
  // Closest distance between two segments; clamped-parameter iteration is
  // exact for the generic case and a safe upper bound on degenerate input.
  const Vec3 u = b1 - a1, v = b2 - a2, w = a1 - a2;
  const double uu = u.norm2(), vv = v.norm2(), uv = u.dot(v);
  const double uw = u.dot(w), vw = v.dot(w);
  const double den = uu * vv - uv * uv;
  double s, t;
  if (den > 1e-14 * std::max(uu * vv, 1e-300)) {
    s = std::clamp((uv * vw - vv * uw) / den, 0.0, 1.0);
  } else {
    s = 0;
  }
  if (vv > 1e-300) {
    t = std::clamp((uv * s + vw) / vv, 0.0, 1.0);
  } else {
    t = 0;
  }
  if (uu > 1e-300) s = std::clamp((uv * t - uw) / uu, 0.0, 1.0);
  double best = dist(a1 + u * s, a2 + v * t);
  best = std::min(best, point_seg_dist(a1, a2, b2));
  best = std::min(best, point_seg_dist(b1, a2, b2));
  best = std::min(best, point_seg_dist(a2, a1, b1));
  best = std::min(best, point_seg_dist(b2, a1, b1));
  return best;
}

// Endpoint mismatch between two segments under the better of the two
// endpoint pairings (the patch-continuity metric).
double pairing_cost(const Vec3& a1, const Vec3& b1, const Vec3& a2,
                    const Vec3& b2) {
  const double direct = std::max(dist(a1, a2), dist(b1, b2));
  const double crossed = std::max(dist(a1, b2), dist(b1, a2));
  return std::min(direct, crossed);
}

double pairing_cost(const BoundaryFeature& f, const BoundaryFeature& g) {
  return pairing_cost(f.seg_a, f.seg_b, g.seg_a, g.seg_b);
}

void orthonormal_frame(const Vec3& n, Vec3& e1, Vec3& e2) {
  const Vec3 pick = std::abs(n.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
  e1 = n.cross(pick).normalized();
  e2 = n.cross(e1);
}

// Sunflower layout on the spherical cap of angular radius rho around
// `center`; includes the center itself.
std::vector<Vec3> sunflower_cap(const Vec3& center, double rho, int count) {
  const Vec3 c = center.normalized();
  std::vector<Vec3> out;
  out.reserve(count + 1);
  out.push_back(c);
  Vec3 e1, e2;
  orthonormal_frame(c, e1, e2);
  const double golden = 2.0 * M_PI * (1.0 - 1.0 / ((1.0 + std::sqrt(5.0)) / 2.0));
  for (int i = 0; i < count; ++i) {
    const double r = rho * std::sqrt((i + 0.5) / count);
    const double phi = golden * i;
    out.push_back(c * std::cos(r) +
                  (e1 * std::cos(phi) + e2 * std::sin(phi)) * std::sin(r));
  }
  return out;
}

// `count` points along the unit-sphere geodesic from a to b, inclusive.
std::vector<Vec3> geodesic_points(const Vec3& a, const Vec3& b, int count) {
  const Vec3 u = a.normalized();
  Vec3 w = b - u * u.dot(b);
  std::vector<Vec3> out;
  out.reserve(count);
  if (w.norm() < 1e-9) {
    // Collinear (or antipodal) endpoints: pick an arbitrary transverse arc.
    Vec3 e1, e2;
    orthonormal_frame(u, e1, e2);
    w = e1;
  } else {
    w = w.normalized();
  }
  const double span = std::atan2((b.normalized() - u * u.dot(b.normalized())).norm(),
                                 u.dot(b.normalized()));
  const double total = span > 1e-12 ? span : M_PI;
  for (int i = 0; i < count; ++i) {
    const double t = total * i / (count - 1);
    out.push_back(u * std::cos(t) + w * std::sin(t));
  }
  return out;
}

// Dense linear solve with partial pivoting for the small LM systems.
template <int N>
bool solve_dense(std::array<std::array<double, N + 1>, N>& m,
                 std::array<double, N>& x) {
  for (int col = 0; col < N; ++col) {
    int piv = col;
    for (int r = col + 1; r < N; ++r)
      if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
    if (std::abs(m[piv][col]) < 1e-300) return false;
    std::swap(m[col], m[piv]);
    for (int r = col + 1; r < N; ++r) {
      const double f = m[r][col] / m[col][col];
      for (int c = col; c <= N; ++c) m[r][c] -= f * m[col][c];
    }
  }
  for (int r = N - 1; r >= 0; --r) {
    double acc = m[r][N];
    for (int c = r + 1; c < N; ++c) acc -= m[r][c] * x[c];
    x[r] = acc / m[r][r];
  }
  return true;
}

struct QuantKey {
  long long a, b, c;
  bool operator<(const QuantKey& o) const {
    if (a != o.a) return a < o.a;
    if (b != o.b) return b < o.b;
    return c < o.c;
  }
};

QuantKey quantize(const Vec3& v, double cell) {
  return QuantKey{static_cast<long long>(std::llround(v.x / cell)),
                  static_cast<long long>(std::llround(v.y / cell)),
                  static_cast<long long>(std::llround(v.z / cell))};
}

// Distance from a point to a convex planar polygon (ordered perimeter).
double point_poly_dist(const Vec3& p, const std::vector<Vec3>& poly,
                       const Vec3& normal) {
  if (poly.empty()) return std::numeric_limits<double>::infinity();
  if (poly.size() == 1) return dist(p, poly[0]);
  const Vec3 n = normal.normalized();
  const double h = (p - poly[0]).dot(n);
  const Vec3 proj = p - n * h;
  bool inside = true;
  double edge_best = std::numeric_limits<double>::infinity();
  for (size_t k = 0; k < poly.size(); ++k) {
    const Vec3& v0 = poly[k];
    const Vec3& v1 = poly[(k + 1) % poly.size()];
    if ((v1 - v0).cross(proj - v0).dot(n) < 0) inside = false;
    edge_best = std::min(edge_best, point_seg_dist(p, v0, v1));
  }
  if (inside) return std::abs(h);
  return edge_best;
}

ProductState to_state(const Provenance& pr) {
  return ProductState{pr.alpha, pr.beta};
}

// Prune a raw segment's active set to the support-attaining line, refit the
// axis, and replace the endpoints by the extreme kept cloud points. Returns
// false when the kept extent no longer clears delta_line (the slice then
// degrades to an exposed point).
bool lock_segment(const PointCloud3& cloud, const SupportSlice& s,
                  BoundaryFeature& f, double eps_slab, double delta_line) {
  Vec3 u = f.seg_b - f.seg_a;
  const double raw_len = u.norm();
  if (raw_len < 1e-300) return false;
  u = u / raw_len;

  int anchor = s.active.front();
  double best = s.direction.dot(cloud[anchor]);
  for (int idx : s.active) {
    const double v = s.direction.dot(cloud[idx]);
    if (v > best) {
      best = v;
      anchor = idx;
    }
  }
  const double tol_lock = std::max(3.0 * eps_slab, 5e-3 * raw_len);
  std::vector<int> kept;
  kept.reserve(s.active.size());
  for (int idx : s.active)
    if (point_line_dist(cloud[idx], cloud[anchor], u) <= tol_lock)
      kept.push_back(idx);
  if (kept.size() < 2) return false;

  Vec3 c{0, 0, 0};
  for (int idx : kept) c = c + cloud[idx];
  c = c / static_cast<double>(kept.size());
  Mat3 cov = Mat3::zero();
  for (int idx : kept) {
    const Vec3 d = cloud[idx] - c;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) cov(i, j) += d[i] * d[j];
  }
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) cov(i, j) /= static_cast<double>(kept.size());
  Vec3 evals;
  std::array<Vec3, 3> evecs;
  eigh_sym3(cov, evals, evecs);
  Vec3 axis = evecs[2];
  if (axis.dot(u) < 0) axis = axis * -1.0;

  int imin = kept.front(), imax = kept.front();
  double tmin = cloud[imin].dot(axis), tmax = tmin;
  for (int idx : kept) {
    const double t = cloud[idx].dot(axis);
    if (t < tmin) {
      tmin = t;
      imin = idx;
    }
    if (t > tmax) {
      tmax = t;
      imax = idx;
    }
  }
  if (tmax - tmin < delta_line) return false;

  f.seg_a = cloud[imin];
  f.seg_b = cloud[imax];
  if (cloud.has_provenance()) {
    f.prov_a = to_state(cloud.prov[imin]);
    f.prov_b = to_state(cloud.prov[imax]);
  }
  if (lex_less(f.seg_b, f.seg_a)) {
    std::swap(f.seg_a, f.seg_b);
    std::swap(f.prov_a, f.prov_b);
  }
  f.point = (f.seg_a + f.seg_b) * 0.5;
  return true;
}

// Sharpens a detected segment into the exact exposed segment of the body.
// A support sweep alone cannot do this: over nearly flat boundary the
// support argmax drifts like the cube root of the direction error, so no
// realistic direction budget pins a ruled segment's normal. The support
// vertices just beyond the segment ends are recoverable though: tilting the
// direction by lambda along the axis exposes them, and extrapolating their
// slide back to zero tilt across three tilt scales lands on the true chord
// ends. Only the chord component of the direction is corrected afterwards;
// transverse rotations are left alone, since over a nearly flat valley the
// exposed vertices answer those with arbitrarily large hops along the edge
// curves. The extrapolated ends are snapped back onto the product range by
// the membership solver and the rewrite is accepted only if the chord really
// supports the cloud. Candidates detected anywhere on one
// nearly flat valley all converge onto the same exposed segment.
class SegmentPolisher {
 public:
  SegmentPolisher(const PointCloud3& cloud, const ProductMap& pm,
                  const QuadraticFormTriple* qf, const MembershipSolver& ms,
                  double eps_slab, double delta_line, double eps_member)
      : cloud_(cloud), pm_(pm), qf_(qf), ms_(ms), eps_slab_(eps_slab),
        delta_line_(delta_line), eps_member_(eps_member) {}

  Vec3 support_vertex(const Vec3& d) const {
    int arg = 0;
    double best = d.dot(cloud_[0]);
    for (int i = 1; i < cloud_.size(); ++i) {
      const double v = d.dot(cloud_[i]);
      if (v > best) {
        best = v;
        arg = i;
      }
    }
    if (!cloud_.has_provenance()) return cloud_[arg];
    if (qf_) {
      const SeesawResult r =
          symmetric_polish(*qf_, d * -1.0, cloud_.prov[arg].alpha);
      return qf_->eval(r.state.alpha);
    }
    const SeesawResult r =
        seesaw_polish(pm_, d * -1.0, to_state(cloud_.prov[arg]), 200);
    return pm_.eval(r.state.alpha, r.state.beta);
  }

  // Quadratic model of one exposed end: support vertices at tilt scales
  // lambda/4, lambda/2, lambda fit g(s) = a + b s + c s^2, with s the tilt
  // in lambda/4 units. g(0) extrapolates the zero-tilt vertex, b is the
  // slide velocity (about zero when the end is pinned on a pointed vertex)
  // and c bends the model along the edge curve so tangents stay usable a
  // short way outside the sampled window.
  void slide_fit(const Vec3& d, const Vec3& u, double sign, Vec3& a, Vec3& b,
                 Vec3& c) const {
    const Vec3 v1 =
        support_vertex((d + u * (sign * 0.25 * kPolishLambda)).normalized());
    const Vec3 v2 =
        support_vertex((d + u * (sign * 0.5 * kPolishLambda)).normalized());
    const Vec3 v4 =
        support_vertex((d + u * (sign * kPolishLambda)).normalized());
    a = (v1 * 8.0 - v2 * 6.0 + v4) / 3.0;
    b = (v2 * 5.0 - v1 * 4.0 - v4) * 0.5;
    c = (v4 - v2 * 3.0 + v1 * 2.0) / 6.0;
  }

  bool polish(BoundaryFeature& f) const {
    const Vec3 d0 = f.direction;
    Vec3 d = d0;
    Vec3 hi = f.seg_b, lo = f.seg_a;
    for (int round = 0; round < kPolishRounds; ++round) {
      Vec3 u = hi - lo;
      if (u.norm() < delta_line_) return false;
      u = u.normalized();
      Vec3 ap, bp, cp, aq, bq, cq;
      slide_fit(d, u, -1.0, ap, bp, cp);
      slide_fit(d, u, 1.0, aq, bq, cq);
      lo = ap;
      hi = aq;
      Vec3 w = hi - lo;
      if (w.norm() < delta_line_) return false;
      w = w.normalized();

      // Direction update: only the chord component is removed. Rotating the
      // direction transversally is never safe here, because over a nearly
      // flat valley the exposed vertices answer such rotations with large
      // hops along the boundary's edge curves.
      Vec3 nd = d - w * d.dot(w);
      if (nd.dot(d) < 0) nd = nd * -1.0;
      if (nd.norm() < 1e-9) return false;
      nd = nd.normalized();
      if (nd.dot(d0) < std::cos(kPolishMaxTilt)) return false;
      d = nd;
    }

    const MembershipResult ma = ms_.query(lo, eps_member_);
    const MembershipResult mb = ms_.query(hi, eps_member_);
    if (ma.distance > eps_member_ || mb.distance > eps_member_) return false;
    const auto on_range = [&](const ProductState& s) {
      return qf_ ? qf_->eval(s.alpha) : pm_.eval(s.alpha, s.beta);
    };
    Vec3 a = on_range(ma.certificate);
    Vec3 b = on_range(mb.certificate);
    if (dist(a, b) < delta_line_) return false;

    // The rewritten chord must still be a support segment of the cloud.
    double sup = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < cloud_.size(); ++i)
      sup = std::max(sup, d.dot(cloud_[i]));
    const double va = d.dot(a), vb = d.dot(b);
    if (std::abs(va - vb) > eps_slab_) return false;
    if (sup - std::max(va, vb) > eps_slab_) return false;

    ProductState pa = ma.certificate, pb = mb.certificate;
    if (lex_less(b, a)) {
      std::swap(a, b);
      std::swap(pa, pb);
    }
    f.seg_a = a;
    f.seg_b = b;
    f.prov_a = pa;
    f.prov_b = pb;
    f.direction = d;
    f.point = (a + b) * 0.5;
    return true;
  }

 private:
  const PointCloud3& cloud_;
  const ProductMap& pm_;
  const QuadraticFormTriple* qf_;
  const MembershipSolver& ms_;
  double eps_slab_, delta_line_, eps_member_;
};

}  // namespace

const char* feature_kind_name(FeatureKind k) {
  switch (k) {
    case FeatureKind::ExposedPoint:
      return "exposed_point";
    case FeatureKind::Segment:
      return "segment";
    case FeatureKind::PlanarFace:
      return "planar_face";
  }
  return "unknown";
}

const char* phase_class_name(PhaseClass c) {
  switch (c) {
    case PhaseClass::Gapless:
      return "gapless";
    case PhaseClass::SymmetryBreaking:
      return "symmetry_breaking";
    case PhaseClass::Unclassified:
      return "unclassified";
    case PhaseClass::None:
      return "none";
  }
  return "unknown";
}

std::vector<SupportSlice> sweep(const PointCloud3& cloud,
                                const std::vector<Vec3>& dirs,
                                double eps_slab) {
  if (cloud.empty()) throw EmptyCloudError("sweep needs a non-empty cloud");
  std::vector<SupportSlice> out;
  out.reserve(dirs.size());
  for (const Vec3& raw : dirs) {
    if (raw.norm2() < 1e-24) continue;  // zero input direction
    const Vec3 d = raw.normalized();
    SupportSlice s;
    s.direction = d;
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < cloud.size(); ++i) best = std::max(best, d.dot(cloud[i]));
    s.value = best;
    for (int i = 0; i < cloud.size(); ++i)
      if (d.dot(cloud[i]) >= best - eps_slab) s.active.push_back(i);
    out.push_back(std::move(s));
  }
  return out;
}

BoundaryFeature feature_of_slice(const PointCloud3& cloud,
                                 const SupportSlice& s, double delta_line) {
  if (s.active.empty())
    throw DegenerateSliceError("slice has an empty active set");
  BoundaryFeature f;
  f.direction = s.direction;

  Vec3 c{0, 0, 0};
  for (int idx : s.active) c = c + cloud[idx];
  c = c / static_cast<double>(s.active.size());
  f.point = c;

  if (s.active.size() == 1) {
    f.kind = FeatureKind::ExposedPoint;
    f.cls = PhaseClass::Unclassified;
    if (cloud.has_provenance()) f.prov_a = f.prov_b = to_state(cloud.prov[s.active[0]]);
    return f;
  }

  Mat3 cov = Mat3::zero();
  for (int idx : s.active) {
    const Vec3 d = cloud[idx] - c;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) cov(i, j) += d[i] * d[j];
  }
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) cov(i, j) /= static_cast<double>(s.active.size());
  Vec3 evals;
  std::array<Vec3, 3> evecs;
  eigh_sym3(cov, evals, evecs);
  const double s_max = std::sqrt(std::max(0.0, evals[2]));
  const double s_mid = std::sqrt(std::max(0.0, evals[1]));

  if (s_max <= delta_line) {
    f.kind = FeatureKind::ExposedPoint;
    f.cls = PhaseClass::Unclassified;
    return f;
  }
  if (s_mid <= delta_line) {
    f.kind = FeatureKind::Segment;
    const Vec3 axis = evecs[2];
    int imin = s.active.front(), imax = s.active.front();
    double tmin = cloud[imin].dot(axis), tmax = tmin;
    for (int idx : s.active) {
      const double t = cloud[idx].dot(axis);
      if (t < tmin) {
        tmin = t;
        imin = idx;
      }
      if (t > tmax) {
        tmax = t;
        imax = idx;
      }
    }
    f.seg_a = cloud[imin];
    f.seg_b = cloud[imax];
    if (cloud.has_provenance()) {
      f.prov_a = to_state(cloud.prov[imin]);
      f.prov_b = to_state(cloud.prov[imax]);
    }
    if (lex_less(f.seg_b, f.seg_a)) {
      std::swap(f.seg_a, f.seg_b);
      std::swap(f.prov_a, f.prov_b);
    }
    return f;
  }

  f.kind = FeatureKind::PlanarFace;
  std::vector<Vec3> pts;
  pts.reserve(s.active.size());
  for (int idx : s.active) pts.push_back(cloud[idx]);
  const std::vector<int> order = planar_hull_order(pts, s.direction);
  f.polygon.reserve(order.size());
  for (int k : order) f.polygon.push_back(pts[k]);
  return f;
}

MembershipSolver::MembershipSolver(const ObservableTriple& tr,
                                   const SamplerConfig& cfg, bool symmetric)
    : pm_(ProductMap::from_triple(tr)), symmetric_(symmetric), cfg_(cfg) {
  cfg_.validate();
  if (symmetric_) {
    qf_ = quadratic_map(tr);
    seeds_a_ = fibonacci_sphere(cfg_.n_grid_a * cfg_.n_grid_b);
    seed_values_.reserve(seeds_a_.size());
    for (const Vec3& n : seeds_a_) seed_values_.push_back(qf_.eval(n));
  } else {
    seeds_a_ = fibonacci_sphere(cfg_.n_grid_a);
    seeds_b_ = fibonacci_sphere(cfg_.n_grid_b);
    seed_values_.reserve(seeds_a_.size() * seeds_b_.size());
    for (const Vec3& a : seeds_a_)
      for (const Vec3& b : seeds_b_) seed_values_.push_back(pm_.eval(a, b));
  }
}

MembershipResult MembershipSolver::refine(const Vec3& q, ProductState s,
                                          int iters) const {
  Vec3 a = s.alpha.norm() > 1e-12 ? s.alpha.normalized() : Vec3{0, 0, 1};
  Vec3 b = s.beta.norm() > 1e-12 ? s.beta.normalized() : Vec3{0, 0, 1};

  auto value = [&](const Vec3& va, const Vec3& vb) {
    return symmetric_ ? qf_.eval(va) : pm_.eval(va, vb);
  };
  Vec3 f = value(a, b);
  double d2 = (f - q).norm2();

  // Phase 1: projected gradient descent with backtracking, for
  // globalization from the grid seed.
  const int gd_iters = std::min(40, iters);
  double step = 0.25;
  for (int it = 0; it < gd_iters; ++it) {
    const Vec3 w = f - q;
    if (w.norm2() < 1e-30) break;
    Vec3 ga{0, 0, 0}, gb{0, 0, 0};
    if (symmetric_) {
      for (int i = 0; i < 3; ++i) ga = ga + qf_.f[i].gradient(a) * w[i];
    } else {
      pm_.weighted_gradients(w, a, b, ga, gb);
    }
    ga = ga - a * ga.dot(a);
    gb = gb - b * gb.dot(b);
    const double g2 = ga.norm2() + gb.norm2();
    if (g2 < 1e-26) break;
    bool moved = false;
    while (step > 1e-10) {
      const Vec3 ca = (a - ga * step).normalized();
      const Vec3 cb = symmetric_ ? ca : (b - gb * step).normalized();
      const Vec3 nf = value(ca, cb);
      const double nd2 = (nf - q).norm2();
      if (nd2 < d2) {
        a = ca;
        b = symmetric_ ? ca : cb;
        f = nf;
        d2 = nd2;
        step = std::min(1.0, step * 1.6);
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }

  // Phase 2: Levenberg-Marquardt tail. Quadratic convergence near
  // zero-residual optima pushes member distances to the noise floor.
  const int lm_iters = std::min(25, std::max(0, iters - gd_iters));
  double mu = 1e-6;
  for (int it = 0; it < lm_iters; ++it) {
    const Vec3 w = f - q;
    if (w.norm2() < 1e-30) break;
    if (symmetric_) {
      std::array<Vec3, 3> jrows;  // tangent-projected gradient of each F_i
      for (int i = 0; i < 3; ++i) {
        Vec3 g = qf_.f[i].gradient(a);
        jrows[i] = g - a * g.dot(a);
      }
      bool accepted = false;
      for (int tries = 0; tries < 8 && !accepted; ++tries) {
        std::array<std::array<double, 4>, 3> m{};
        for (int r = 0; r < 3; ++r) {
          for (int c = 0; c < 3; ++c) {
            double acc = 0;
            for (int i = 0; i < 3; ++i) acc += jrows[i][r] * jrows[i][c];
            m[r][c] = acc + (r == c ? mu : 0.0);
          }
          double rhs = 0;
          for (int i = 0; i < 3; ++i) rhs -= jrows[i][r] * w[i];
          m[r][3] = rhs;
        }
        std::array<double, 3> dx{};
        if (!solve_dense<3>(m, dx)) break;
        const Vec3 ca = (a + Vec3{dx[0], dx[1], dx[2]}).normalized();
        const Vec3 nf = value(ca, ca);
        const double nd2 = (nf - q).norm2();
        if (nd2 < d2) {
          a = ca;
          b = ca;
          f = nf;
          d2 = nd2;
          mu = std::max(mu / 3.0, 1e-12);
          accepted = true;
        } else {
          mu *= 4.0;
        }
      }
      if (!accepted) break;
    } else {
      double at[4] = {1, a.x, a.y, a.z};
      double bt[4] = {1, b.x, b.y, b.z};
      double Ja[3][3], Jb[3][3];
      for (int i = 0; i < 3; ++i)
        for (int u = 0; u < 3; ++u) {
          double sa = 0, sb = 0;
          for (int k = 0; k < 4; ++k) sa += pm_.c[i].c[u + 1][k] * bt[k];
          for (int j = 0; j < 4; ++j) sb += pm_.c[i].c[j][u + 1] * at[j];
          Ja[i][u] = sa;
          Jb[i][u] = sb;
        }
      // Project parameter directions onto the tangent planes.
      for (int i = 0; i < 3; ++i) {
        double da = 0, db = 0;
        for (int u = 0; u < 3; ++u) {
          da += Ja[i][u] * a[u];
          db += Jb[i][u] * b[u];
        }
        for (int u = 0; u < 3; ++u) {
          Ja[i][u] -= da * a[u];
          Jb[i][u] -= db * b[u];
        }
      }
      bool accepted = false;
      for (int tries = 0; tries < 8 && !accepted; ++tries) {
        std::array<std::array<double, 7>, 6> m{};
        for (int r = 0; r < 6; ++r) {
          for (int c = 0; c < 6; ++c) {
            double acc = 0;
            for (int i = 0; i < 3; ++i) {
              const double jr = r < 3 ? Ja[i][r] : Jb[i][r - 3];
              const double jc = c < 3 ? Ja[i][c] : Jb[i][c - 3];
              acc += jr * jc;
            }
            m[r][c] = acc + (r == c ? mu : 0.0);
          }
          double rhs = 0;
          for (int i = 0; i < 3; ++i)
            rhs -= (r < 3 ? Ja[i][r] : Jb[i][r - 3]) * w[i];
          m[r][6] = rhs;
        }
        std::array<double, 6> dx{};
        if (!solve_dense<6>(m, dx)) break;
        const Vec3 ca = (a + Vec3{dx[0], dx[1], dx[2]}).normalized();
        const Vec3 cb = (b + Vec3{dx[3], dx[4], dx[5]}).normalized();
        const Vec3 nf = value(ca, cb);
        const double nd2 = (nf - q).norm2();
        if (nd2 < d2) {
          a = ca;
          b = cb;
          f = nf;
          d2 = nd2;
          mu = std::max(mu / 3.0, 1e-12);
          accepted = true;
        } else {
          mu *= 4.0;
        }
      }
      if (!accepted) break;
    }
  }

  MembershipResult r;
  r.distance = std::sqrt(d2);
  r.certificate = ProductState{a, b};
  return r;
}

MembershipResult MembershipSolver::query(const Vec3& q,
                                         double eps_member) const {
  // Nearest grid seeds.
  constexpr int kSeedCandidates = 8;
  std::array<int, kSeedCandidates> best_idx;
  std::array<double, kSeedCandidates> best_d2;
  best_idx.fill(-1);
  best_d2.fill(std::numeric_limits<double>::infinity());
  for (size_t i = 0; i < seed_values_.size(); ++i) {
    const double d2 = (seed_values_[i] - q).norm2();
    if (d2 >= best_d2.back()) continue;
    int pos = kSeedCandidates - 1;
    while (pos > 0 && best_d2[pos - 1] > d2) {
      best_d2[pos] = best_d2[pos - 1];
      best_idx[pos] = best_idx[pos - 1];
      --pos;
    }
    best_d2[pos] = d2;
    best_idx[pos] = static_cast<int>(i);
  }

  MembershipResult best;
  best.distance = std::numeric_limits<double>::infinity();
  auto consider = [&](const ProductState& start) {
    if (best.distance < 1e-10) return;
    const MembershipResult r = refine(q, start, cfg_.max_iters);
    if (r.distance < best.distance) best = r;
  };

  const int nb = symmetric_ ? 1 : cfg_.n_grid_b;
  for (int k = 0; k < kSeedCandidates; ++k) {
    if (best_idx[k] < 0) break;
    if (symmetric_) {
      consider(ProductState{seeds_a_[best_idx[k]], seeds_a_[best_idx[k]]});
    } else {
      const int ia = best_idx[k] / nb;
      const int ib = best_idx[k] % nb;
      consider(ProductState{seeds_a_[ia], seeds_b_[ib]});
    }
  }
  RandomStream rng(cfg_.seed, 3);
  for (int r = 0; r < cfg_.restarts; ++r) {
    const Vec3 a0 = rng.unit_vec3();
    const Vec3 b0 = rng.unit_vec3();
    consider(symmetric_ ? ProductState{a0, a0} : ProductState{a0, b0});
  }
  best.member = best.distance <= eps_member;
  return best;
}

void classify_segment(const MembershipSolver& solver, BoundaryFeature& seg,
                      const BoundaryParams& bp, double diameter,
                      const std::vector<std::pair<Vec3, double>>&
                          boundary_planes) {
  const double eps_m = bp.eps_member_rel * diameter;
  const double eps_g = kGaplessRel * diameter;
  const int n = std::max(1, bp.n_probes);
  seg.probe_distances.clear();
  seg.probe_distances.reserve(n);
  int members = 0;
  double worst = 0;
  for (int k = 0; k < n; ++k) {
    const double t =
        n == 1 ? 0.5
               : bp.probe_margin + (1.0 - 2.0 * bp.probe_margin) * k / (n - 1);
    const Vec3 q = seg.seg_a + (seg.seg_b - seg.seg_a) * t;
    const MembershipResult r = solver.query(q, eps_m);
    seg.probe_distances.push_back(r.distance);
    worst = std::max(worst, r.distance);
    if (r.member) ++members;
  }
  if (worst <= eps_g)
    seg.cls = PhaseClass::Gapless;
  else if (members <= 0.1 * n)
    seg.cls = PhaseClass::SymmetryBreaking;
  else
    seg.cls = PhaseClass::Unclassified;

  // Membership probes cannot tell a gapless seam from a chord crossing a
  // solid region of the product range; both probe to zero. Only the former
  // lies on the hull boundary, so demote gapless chords whose midpoint sits
  // measurably inside every facet plane.
  if (seg.cls == PhaseClass::Gapless && !boundary_planes.empty()) {
    const Vec3 mid = (seg.seg_a + seg.seg_b) * 0.5;
    double closest = -std::numeric_limits<double>::infinity();
    for (const auto& [pn, off] : boundary_planes)
      closest = std::max(closest, pn.dot(mid) - off);
    if (closest < -kDepthGateRel * diameter) seg.cls = PhaseClass::Unclassified;
  }
}

void classify_face(const MembershipSolver& solver, BoundaryFeature& face,
                   const BoundaryParams& bp, double diameter) {
  const double eps_m = bp.eps_member_rel * diameter;
  const double eps_g = kGaplessRel * diameter;
  const int budget = std::max(1, bp.n_probes);
  Vec3 c{0, 0, 0};
  for (const Vec3& v : face.polygon) c = c + v;
  if (!face.polygon.empty())
    c = c / static_cast<double>(face.polygon.size());
  else
    c = face.point;

  std::vector<Vec3> probes;
  probes.push_back(c);
  if (!face.polygon.empty() && budget > 1) {
    const double shrink = 1.0 - 2.0 * bp.probe_margin;
    const int take = std::min<int>(budget - 1, face.polygon.size());
    const size_t stride = std::max<size_t>(1, face.polygon.size() / take);
    for (size_t k = 0; k < face.polygon.size() && (int)probes.size() < budget;
         k += stride)
      probes.push_back(c + (face.polygon[k] - c) * shrink);
  }

  face.probe_distances.clear();
  face.probe_distances.reserve(probes.size());
  int members = 0;
  double worst = 0;
  for (const Vec3& q : probes) {
    const MembershipResult r = solver.query(q, eps_m);
    face.probe_distances.push_back(r.distance);
    worst = std::max(worst, r.distance);
    if (r.member) ++members;
  }
  const int n = static_cast<int>(probes.size());
  if (worst <= eps_g)
    face.cls = PhaseClass::Gapless;
  else if (members <= 0.1 * n)
    face.cls = PhaseClass::SymmetryBreaking;
  else
    face.cls = PhaseClass::Unclassified;
}

std::vector<RuledPatch> assemble_patches(
    const std::vector<BoundaryFeature>& segments, const BoundaryParams& bp,
    double diameter) {
  const int n = static_cast<int>(segments.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };

  const double ctol = bp.continuity_tol_rel * diameter;
  const double cos_adj = std::cos(bp.adjacency_angle);

  std::vector<Vec3> u(n), mid(n);
  for (int i = 0; i < n; ++i) {
    u[i] = (segments[i].seg_b - segments[i].seg_a).normalized();
    mid[i] = (segments[i].seg_a + segments[i].seg_b) * 0.5;
  }

  // An opposite-class segment g sitting between two candidates marks a
  // crossing feature (a gapless seam inside ruled boundary, say); unions
  // straddling it are blocked so the patches stay on their own side. The
  // blocker must lie metrically between the pair: long chords from far
  // parts of the body can pass nearby without separating anything.
  auto blocked = [&](int i, int j, double pc_ij) {
    for (int g = 0; g < n; ++g) {
      if (segments[g].cls == segments[i].cls) continue;
      if (pairing_cost(segments[i], segments[g]) > pc_ij) continue;
      if (pairing_cost(segments[j], segments[g]) > pc_ij) continue;
      Vec3 w = segments[g].direction.cross(u[g]);
      if (w.norm2() < 0.25) continue;
      w = w.normalized();
      const double pi = (mid[i] - mid[g]).dot(w);
      const double pj = (mid[j] - mid[g]).dot(w);
      if (pi * pj < 0) return true;
    }
    return false;
  };

  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if (segments[i].cls != segments[j].cls) continue;
      if (std::abs(u[i].dot(u[j])) < cos_adj) continue;
      const double pc_ij = pairing_cost(segments[i], segments[j]);
      if (pc_ij > ctol) continue;
      const int ri = find(i), rj = find(j);
      if (ri == rj) continue;
      if (blocked(i, j, pc_ij)) continue;
      parent[std::max(ri, rj)] = std::min(ri, rj);
    }

  std::vector<RuledPatch> out;
  std::vector<int> root_to_patch(n, -1);
  for (int i = 0; i < n; ++i) {
    const int r = find(i);
    if (root_to_patch[r] < 0) {
      root_to_patch[r] = static_cast<int>(out.size());
      RuledPatch p;
      p.cls = segments[i].cls;
      out.push_back(p);
    }
    out[root_to_patch[r]].feature_ids.push_back(i);
  }
  for (RuledPatch& p : out) {
    double best = std::numeric_limits<double>::infinity();
    for (int id : p.feature_ids) {
      double worst = 0;
      for (double d : segments[id].probe_distances) worst = std::max(worst, d);
      if (worst < best) {
        best = worst;
        p.representative = id;
      }
    }
  }
  return out;
}

int ClassifyResult::count_patches(PhaseClass c) const {
  int n = 0;
  for (const RuledPatch& p : patches)
    if (p.cls == c) ++n;
  return n;
}

std::vector<const BoundaryFeature*> ClassifyResult::representatives(
    PhaseClass c) const {
  std::vector<const BoundaryFeature*> out;
  for (const RuledPatch& p : patches)
    if (p.cls == c && p.representative >= 0)
      out.push_back(&segments[p.representative]);
  return out;
}

namespace {

// Sweep directions: a Fibonacci covering plus the largest hull facet
// normals. Ridges lie in their flanking facets, so facet normals expose
// whole ruling families exactly where a generic covering misses them.
std::vector<Vec3> sweep_directions(const ConvexPolytope3& hull,
                                   const SamplerConfig& cfg) {
  std::vector<Vec3> dirs = fibonacci_sphere(cfg.n_dirs);
  std::vector<int> order(hull.facets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
    return hull.facets[x].area > hull.facets[y].area;
  });
  const size_t budget =
      std::max(cfg.n_dirs, kFacetDirFloor) < (int)order.size()
          ? static_cast<size_t>(std::max(cfg.n_dirs, kFacetDirFloor))
          : order.size();

  std::vector<QuantKey> seen;
  seen.reserve(dirs.size() + budget);
  for (const Vec3& d : dirs) seen.push_back(quantize(d, 1e-6));
  std::sort(seen.begin(), seen.end());
  for (size_t k = 0; k < budget; ++k) {
    const Vec3 nrm = hull.facets[order[k]].normal;
    const QuantKey key = quantize(nrm, 1e-6);
    if (std::binary_search(seen.begin(), seen.end(), key)) continue;
    dirs.push_back(nrm);
  }
  return dirs;
}

struct PipelinePass {
  std::vector<BoundaryFeature> segments;
  std::vector<BoundaryFeature> faces;
  int n_exposed = 0;
  double diameter = 1;
};

PipelinePass run_pass(const PointCloud3& cloud, const ConvexPolytope3& hull,
                      const SamplerConfig& cfg, const BoundaryParams& bp,
                      const ProductMap& pm, const QuadraticFormTriple* qf,
                      const MembershipSolver& solver) {
  PipelinePass out;
  out.diameter = std::max(cloud.diameter(), 1e-12);
  const double eps_slab = bp.eps_slab_rel * out.diameter;
  const double delta_line = bp.delta_line_rel * out.diameter;
  const SegmentPolisher polisher(cloud, pm, qf, solver, eps_slab, delta_line,
                                 bp.eps_member_rel * out.diameter);
  const std::vector<Vec3> dirs = sweep_directions(hull, cfg);
  const std::vector<SupportSlice> slices = sweep(cloud, dirs, eps_slab);
  for (const SupportSlice& s : slices) {
    BoundaryFeature f = feature_of_slice(cloud, s, delta_line);
    if (f.kind == FeatureKind::Segment) {
      if (lock_segment(cloud, s, f, eps_slab, delta_line)) {
        polisher.polish(f);
        out.segments.push_back(std::move(f));
      } else {
        ++out.n_exposed;
      }
    } else if (f.kind == FeatureKind::PlanarFace) {
      out.faces.push_back(std::move(f));
    } else {
      ++out.n_exposed;
    }
  }
  return out;
}

// A sweep catches a ruling only when some direction lines up with the
// ruling's normal to within about eps_slab over the ruling length. Where a
// band's normal turns quickly from one ruling to the next, no budget of
// scattered directions covers every stretch, and the band fragments into
// islands around the few lucky hits. Walking closes those gaps: starting
// from each detected segment, rotate the direction a little inside the
// plane orthogonal to the chord, re-derive the ruling there, and repeat.
// The step adapts so consecutive records stay between the dedup radius and
// the chaining tolerance, and a walk retires when it loses the family or
// enters territory another segment already covers.
void walk_families(const SegmentPolisher& polisher, double delta_line,
                   double ctol, std::vector<BoundaryFeature>& segments) {
  const double stop_r = kDedupRadius * ctol;
  const size_t n_seeds = segments.size();
  size_t recorded = 0;
  for (size_t si = 0; si < n_seeds && recorded < kWalkBudget; ++si) {
    for (const int sgn : {1, -1}) {
      BoundaryFeature ref = segments[si];     // tracking state
      BoundaryFeature anchor = ref;           // last recorded link
      int last_rec = -1;
      Vec3 e_prev{0, 0, 0};
      double h = kWalkStep0;
      int stall = 0;
      for (int it = 0; it < kWalkIters && recorded < kWalkBudget; ++it) {
        Vec3 u = ref.seg_b - ref.seg_a;
        if (u.norm() < delta_line) break;
        u = u.normalized();
        Vec3 e = ref.direction.cross(u);
        if (e.norm() < 1e-9) break;
        e = e.normalized();
        // The chord's lexicographic orientation can flip between re-locks;
        // keep the transverse tangent pointing the way the walk is going.
        if (e_prev.norm2() > 0.5 && e.dot(e_prev) < 0) e = e * -1.0;
        const Vec3 d = (ref.direction + e * (sgn * h)).normalized();

        // Slabs over the sampled cloud are useless between the rulings the
        // grid happened to hit, so the step re-derives the ruling exposed at
        // the stepped direction from the body itself: the polisher's support
        // vertices are seesaw-refined exact extreme points, and the cloud
        // only seeds their basins.
        BoundaryFeature f = ref;
        f.direction = d;
        const bool ok = polisher.polish(f);
        const double step = ok ? pairing_cost(f, ref)
                               : std::numeric_limits<double>::infinity();
        if (!ok || step > kWalkTrack * ctol) {
          h *= 0.5;
          if (h < kWalkStepMin) break;
          continue;
        }
        if (step < 0.05 * ctol) {
          // The ruling barely answers direction moves here (a pinched
          // corner of the band, or the step is too timid). Give up once
          // longer strides stop helping.
          if (++stall > 12) break;
        } else {
          stall = 0;
        }
        if (step < 0.15 * ctol) h = std::min(h * 1.6, kWalkStepMax);
        e_prev = e;
        const double adv = pairing_cost(f, anchor);
        ref = std::move(f);
        if (adv < kWalkRecord * ctol) continue;

        bool known = false;
        for (size_t k = 0; k < segments.size() && !known; ++k)
          known = static_cast<int>(k) != last_rec &&
                  pairing_cost(ref, segments[k]) < stop_r;
        if (known) break;
        anchor = ref;
        last_rec = static_cast<int>(segments.size());
        segments.push_back(anchor);
        ++recorded;
      }
    }
  }
}

}  // namespace

ClassifyResult classify_instance(const ObservableTriple& tr,
                                 const SamplerConfig& cfg,
                                 const BoundaryParams& bp) {
  cfg.validate();
  bool symmetric = true;
  try {
    (void)quadratic_map(tr);
  } catch (const NotSwapSymmetricError&) {
    symmetric = false;
  }

  // Symmetric instances restrict to one Bloch sphere; spend the same point
  // budget there that the full product grid would have used.
  SamplerConfig grid_cfg = cfg;
  if (symmetric) grid_cfg.n_grid_a = cfg.n_grid_a * cfg.n_grid_b;
  PointCloud3 cloud =
      symmetric ? sample_pi_plus(tr, grid_cfg) : sample_pi(tr, cfg);

  const ProductMap pm = ProductMap::from_triple(tr);
  QuadraticFormTriple qf;
  if (symmetric) qf = quadratic_map(tr);

  ClassifyResult R;
  R.symmetric_mode = symmetric;

  const MembershipSolver solver(tr, cfg, symmetric);
  std::vector<BoundaryFeature> refined_marks;
  PipelinePass pass;
  const int max_rounds = std::max(0, bp.refine_rounds);
  for (int round = 0;; ++round) {
    R.hull = convex_hull(cloud);
    merge_coplanar(R.hull, 1e-5);
    pass = run_pass(cloud, R.hull, cfg, bp, pm, symmetric ? &qf : nullptr,
                    solver);
    if (round >= max_rounds || pass.segments.empty()) break;

    // Adaptive sampling: drop local caps around each distinct segment's
    // endpoint provenance so the next pass sees sharply resolved ridges.
    const double ctol = bp.continuity_tol_rel * pass.diameter;
    size_t added = 0;
    for (const BoundaryFeature& seg : pass.segments) {
      bool seen = false;
      for (const BoundaryFeature& m : refined_marks)
        if (pairing_cost(seg, m) <= kRefineRadius * ctol) {
          seen = true;
          break;
        }
      if (seen) continue;
      refined_marks.push_back(seg);
      if (symmetric) {
        for (const Vec3& center : {seg.prov_a.alpha, seg.prov_b.alpha})
          for (const Vec3& v : sunflower_cap(center, kCapRho, kCapSym)) {
            cloud.push(qf.eval(v), Provenance{v, v});
            ++added;
          }
      } else {
        const std::vector<Vec3> alphas =
            geodesic_points(seg.prov_a.alpha, seg.prov_b.alpha, kGeoAlpha);
        std::vector<Vec3> betas = sunflower_cap(seg.prov_a.beta, kCapRho, kCapBeta);
        if (dist(seg.prov_a.beta.normalized(), seg.prov_b.beta.normalized()) >
            0.08) {
          const std::vector<Vec3> extra =
              sunflower_cap(seg.prov_b.beta, kCapRho, kCapBeta);
          betas.insert(betas.end(), extra.begin(), extra.end());
        }
        for (const Vec3& a : alphas)
          for (const Vec3& b : betas) {
            cloud.push(pm.eval(a, b), Provenance{a, b});
            ++added;
          }
      }
    }
    if (added == 0) break;
  }

  const double diam = pass.diameter;
  const double ctol = bp.continuity_tol_rel * diam;
  const double eps_m = bp.eps_member_rel * diam;

  // Chase every detected band end to end before committing results, so
  // fragmented detections of one ruled family knit into a single chain.
  if (!pass.segments.empty()) {
    const SegmentPolisher polisher(cloud, pm, symmetric ? &qf : nullptr,
                                   solver, bp.eps_slab_rel * diam,
                                   bp.delta_line_rel * diam, eps_m);
    walk_families(polisher, bp.delta_line_rel * diam, ctol, pass.segments);
  }

  // Polished endpoints are exact extreme points of the body, usually just
  // outside the sampled hull; adding them makes the hull contain every
  // reported segment and pins its vertices to the true ridge ends.
  if (!pass.segments.empty()) {
    for (const BoundaryFeature& s : pass.segments) {
      cloud.push(s.seg_a, Provenance{s.prov_a.alpha, s.prov_a.beta});
      cloud.push(s.seg_b, Provenance{s.prov_b.alpha, s.prov_b.beta});
    }
    R.hull = convex_hull(cloud);
    R.support_planes.reserve(R.hull.facets.size());
    for (const Facet& fc : R.hull.facets)
      R.support_planes.emplace_back(fc.normal, fc.offset);
    merge_coplanar(R.hull, 1e-5);
  }

  // Deduplicate segments. Footprints are visited in order of midpoint
  // membership distance so a gapless seam is always the representative of
  // its own neighborhood rather than a nearby ruling.
  std::vector<double> middist(pass.segments.size());
  for (size_t i = 0; i < pass.segments.size(); ++i)
    middist[i] =
        solver.query((pass.segments[i].seg_a + pass.segments[i].seg_b) * 0.5,
                     eps_m)
            .distance;
  std::vector<int> order(pass.segments.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int x, int y) { return middist[x] < middist[y]; });
  std::vector<int> kept_ids;
  for (int id : order) {
    bool dup = false;
    for (int k : kept_ids)
      if (pairing_cost(pass.segments[id], pass.segments[k]) <=
          kDedupRadius * ctol) {
        dup = true;
        break;
      }
    if (!dup) kept_ids.push_back(id);
  }
  std::sort(kept_ids.begin(), kept_ids.end());
  for (int id : kept_ids) R.segments.push_back(pass.segments[id]);

  // Faces collapse on (normal, offset); the widest view of a plane wins.
  for (const BoundaryFeature& f : pass.faces) {
    const double off = f.direction.dot(f.point);
    bool dup = false;
    for (BoundaryFeature& k : R.faces) {
      if (std::abs(f.direction.dot(k.direction)) < 0.9999) continue;
      if (std::abs(off - k.direction.dot(k.point)) >
          3.0 * bp.eps_slab_rel * diam)
        continue;
      if (f.polygon.size() > k.polygon.size()) k = f;
      dup = true;
      break;
    }
    if (!dup) R.faces.push_back(f);
  }

  R.n_exposed_dirs = pass.n_exposed;
  for (BoundaryFeature& s : R.segments)
    classify_segment(solver, s, bp, diam, R.support_planes);
  for (BoundaryFeature& f : R.faces) classify_face(solver, f, bp, diam);

  // Candidates polished off one flat seam halo all classify Gapless and can
  // land anywhere inside the tolerance band around the true seam. Collapse
  // overlapping gapless segments onto the copy whose chord digs least below
  // the cloud's support: on a quartically flat valley that gap grows like
  // the fourth power of the offset, so the best-supported copy is the seam.
  // Only chords that measurably sag below the support are merged away;
  // distinct rulings of a fully gapless band all sit flush on it and
  // survive, however tightly the band is enumerated.
  {
    std::vector<int> gapless;
    for (size_t i = 0; i < R.segments.size(); ++i)
      if (R.segments[i].cls == PhaseClass::Gapless)
        gapless.push_back(static_cast<int>(i));
    if (gapless.size() > 1) {
      std::vector<double> gap(R.segments.size(), 0.0);
      for (int id : gapless) {
        const BoundaryFeature& s = R.segments[id];
        double sup = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < cloud.size(); ++i)
          sup = std::max(sup, s.direction.dot(cloud[i]));
        gap[id] = sup - s.direction.dot(s.point);
      }
      std::stable_sort(gapless.begin(), gapless.end(),
                       [&](int x, int y) { return gap[x] < gap[y]; });
      std::vector<char> drop(R.segments.size(), 0);
      std::vector<int> keep;
      for (int id : gapless) {
        bool dup = false;
        if (gap[id] > kDepthGateRel * diam)
          for (int k : keep)
            if (pairing_cost(R.segments[id], R.segments[k]) <= ctol) {
              dup = true;
              break;
            }
        if (dup)
          drop[id] = 1;
        else
          keep.push_back(id);
      }
      std::vector<BoundaryFeature> left;
      left.reserve(R.segments.size());
      for (size_t i = 0; i < R.segments.size(); ++i)
        if (!drop[i]) left.push_back(std::move(R.segments[i]));
      R.segments = std::move(left);
    }
  }

  R.patches = assemble_patches(R.segments, bp, diam);
  R.cloud = std::move(cloud);
  return R;
}

double product_ground_energy(const ProductMap& pm, const PointCloud3& cloud,
                             const Vec3& dir) {
  if (cloud.empty())
    throw EmptyCloudError("ground energy needs a sampled cloud");
  if (!cloud.has_provenance())
    throw EmptyCloudError("ground energy needs provenance-tagged samples");
  int arg = 0;
  double best = dir.dot(cloud[0]);
  for (int i = 1; i < cloud.size(); ++i) {
    const double v = dir.dot(cloud[i]);
    if (v < best) {
      best = v;
      arg = i;
    }
  }
  const SeesawResult r =
      seesaw_polish(pm, dir, to_state(cloud.prov[arg]), 200);
  return std::min(best, r.value);
}

double symmetric_ground_energy(const QuadraticFormTriple& qf,
                               const PointCloud3& cloud, const Vec3& dir) {
  if (cloud.empty())
    throw EmptyCloudError("ground energy needs a sampled cloud");
  if (!cloud.has_provenance())
    throw EmptyCloudError("ground energy needs provenance-tagged samples");
  int arg = 0;
  double best = dir.dot(cloud[0]);
  for (int i = 1; i < cloud.size(); ++i) {
    const double v = dir.dot(cloud[i]);
    if (v < best) {
      best = v;
      arg = i;
    }
  }
  const SeesawResult r = symmetric_polish(qf, dir, cloud.prov[arg].alpha, 200);
  return std::min(best, r.value);
}

PhaseScanResult phase_scan(const ObservableTriple& tr,
                           const std::vector<Vec3>& path,
                           const SamplerConfig& cfg,
                           const BoundaryParams& bp) {
  if (tr.dim() != 4) throw BadDimError("phase scans need a two-qubit triple");
  PhaseScanResult out;
  if (path.empty()) return out;

  const ClassifyResult R = classify_instance(tr, cfg, bp);
  const MembershipSolver solver(tr, cfg, R.symmetric_mode);
  const ProductMap& pm = solver.map();
  // In symmetric mode the scanned body is the symmetric range, so both
  // energy routes must minimize over alpha = beta states as well.
  QuadraticFormTriple qf;
  if (R.symmetric_mode) qf = quadratic_map(tr);
  const double diam = std::max(R.cloud.diameter(), 1e-12);
  const double eps_slab = bp.eps_slab_rel * diam;
  const double delta_line = bp.delta_line_rel * diam;
  const double energy_tol = 1e-4 * diam;

  // Contact classing for smooth (exposed-point) contacts: gapless only
  // right on a gapless feature, symmetry-breaking while tracking any
  // ruled/flat structure, otherwise no label.
  auto match_class = [&](const Vec3& contact) {
    double d_gapless = std::numeric_limits<double>::infinity();
    double d_struct = std::numeric_limits<double>::infinity();
    for (const BoundaryFeature& s : R.segments) {
      const double d = point_seg_dist(contact, s.seg_a, s.seg_b);
      d_struct = std::min(d_struct, d);
      if (s.cls == PhaseClass::Gapless) d_gapless = std::min(d_gapless, d);
    }
    for (const BoundaryFeature& f : R.faces) {
      const double d = point_poly_dist(contact, f.polygon, f.direction);
      d_struct = std::min(d_struct, d);
      if (f.cls == PhaseClass::Gapless) d_gapless = std::min(d_gapless, d);
    }
    if (d_gapless <= kPhaseProxGapless * diam) return PhaseClass::Gapless;
    if (d_struct <= kPhaseProxStruct * diam)
      return PhaseClass::SymmetryBreaking;
    return PhaseClass::None;
  };

  for (const Vec3& raw : path) {
    if (raw.norm() < 1e-12)
      throw OutOfDomainError("phase scan paths need nonzero directions");
    const Vec3 lam = raw.normalized();
    PhasePoint pp;
    pp.lambda = lam;
    if (R.symmetric_mode) {
      pp.e0 = symmetric_ground_energy(qf, R.cloud, lam);
      pp.e0_seesaw = symmetric_support(qf, lam, cfg).value;
    } else {
      pp.e0 = product_ground_energy(pm, R.cloud, lam);
      pp.e0_seesaw = seesaw_support(tr, lam, cfg).value;
    }
    pp.flagged = std::abs(pp.e0 - pp.e0_seesaw) > energy_tol;

    const std::vector<Vec3> one{lam * -1.0};
    const std::vector<SupportSlice> sl = sweep(R.cloud, one, eps_slab);
    BoundaryFeature f = feature_of_slice(R.cloud, sl[0], delta_line);
    if (f.kind == FeatureKind::Segment &&
        !lock_segment(R.cloud, sl[0], f, eps_slab, delta_line)) {
      f.kind = FeatureKind::ExposedPoint;
      f.cls = PhaseClass::Unclassified;
    }
    pp.kind = f.kind;
    pp.contact = f.point;
    if (f.kind == FeatureKind::Segment) {
      classify_segment(solver, f, bp, diam, R.support_planes);
      pp.cls = f.cls;
      pp.contact = (f.seg_a + f.seg_b) * 0.5;
    } else if (f.kind == FeatureKind::PlanarFace) {
      classify_face(solver, f, bp, diam);
      pp.cls = f.cls;
    } else {
      pp.cls = match_class(pp.contact);
    }
    out.points.push_back(pp);
  }

  const int n = static_cast<int>(out.points.size());
  if (n >= 3) {
    double total = 0;
    for (int i = 0; i + 1 < n; ++i)
      total += dist(out.points[i + 1].lambda, out.points[i].lambda);
    const double mean_step = total / (n - 1);
    out.closed_path =
        dist(out.points[n - 1].lambda, out.points[0].lambda) <=
        1.75 * mean_step;
  }

  const double jump_tol = bp.jump_tol_rel * diam;
  const int nb = out.closed_path ? n : n - 1;
  std::vector<char> changed(std::max(nb, 0), 0);
  for (int i = 0; i < nb; ++i) {
    const PhasePoint& p = out.points[i];
    const PhasePoint& q = out.points[(i + 1) % n];
    changed[i] = p.kind != q.kind || p.cls != q.cls ||
                 dist(p.contact, q.contact) > jump_tol;
  }
  if (nb > 0) {
    bool all = true;
    for (char c : changed)
      if (!c) all = false;
    if (all && out.closed_path) {
      if (changed[0]) out.transitions.push_back(0);
    } else {
      for (int i = 0; i < nb; ++i) {
        const bool prev =
            out.closed_path ? changed[(i + nb - 1) % nb] : (i > 0 && changed[i - 1]);
        if (changed[i] && !prev) out.transitions.push_back(i);
      }
    }
  }
  return out;
}

std::vector<Vec3> great_circle_path(const Vec3& a, const Vec3& b, int steps) {
  if (steps < 2) throw BadIndexError("a great-circle path needs at least 2 steps");
  if (a.norm() < 1e-12 || b.norm() < 1e-12)
    throw OutOfDomainError("great-circle anchors must be nonzero");
  const Vec3 u = a.normalized();
  Vec3 w = b - u * u.dot(b);
  if (w.norm() < 1e-12)
    throw OutOfDomainError("great-circle anchors must not be collinear");
  w = w.normalized();
  std::vector<Vec3> out;
  out.reserve(steps);
  for (int k = 0; k < steps; ++k) {
    const double t = 2.0 * M_PI * k / steps;
    out.push_back(u * std::cos(t) + w * std::sin(t));
  }
  return out;
}

}  // namespace jnr
