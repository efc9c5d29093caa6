#include "jnr/hull.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <unordered_map>

#include "jnr/errors.hpp"
#include "jnr/qops.hpp"

namespace jnr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double point_segment_dist(const Vec3& q, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double len2 = ab.norm2();
  if (len2 <= 0) return dist(q, a);
  const double t = std::clamp((q - a).dot(ab) / len2, 0.0, 1.0);
  return dist(q, a + ab * t);
}

// Closest-point distance to a triangle by barycentric region analysis.
double point_triangle_dist(const Vec3& q, const Vec3& a, const Vec3& b,
                           const Vec3& c) {
  const Vec3 ab = b - a, ac = c - a, aq = q - a;
  const double d1 = ab.dot(aq), d2 = ac.dot(aq);
  if (d1 <= 0 && d2 <= 0) return dist(q, a);

  const Vec3 bq = q - b;
  const double d3 = ab.dot(bq), d4 = ac.dot(bq);
  if (d3 >= 0 && d4 <= d3) return dist(q, b);

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0) {
    const double t = d1 / (d1 - d3);
    return dist(q, a + ab * t);
  }

  const Vec3 cq = q - c;
  const double d5 = ab.dot(cq), d6 = ac.dot(cq);
  if (d6 >= 0 && d5 <= d6) return dist(q, c);

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0) {
    const double t = d2 / (d2 - d6);
    return dist(q, a + ac * t);
  }

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) {
    const double t = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return dist(q, b + (c - b) * t);
  }

  const double denom = 1.0 / (va + vb + vc);
  const double v = vb * denom, w = vc * denom;
  return dist(q, a + ab * v + ac * w);
}

// Orthonormal in-plane frame with u x v = n.
void plane_frame(const Vec3& n, Vec3& u, Vec3& v) {
  const Vec3 seed =
      std::abs(n.x) <= std::abs(n.y) && std::abs(n.x) <= std::abs(n.z)
          ? Vec3{1, 0, 0}
          : (std::abs(n.y) <= std::abs(n.z) ? Vec3{0, 1, 0} : Vec3{0, 0, 1});
  u = n.cross(seed).normalized();
  v = n.cross(u); // u x (n x u) = n for unit orthogonal n, u
}

double polygon_area_2d(const std::vector<double>& xs,
                       const std::vector<double>& ys) {
  double s = 0;
  const size_t n = xs.size();
  for (size_t i = 0; i < n; ++i) {
    const size_t j = (i + 1) % n;
    s += xs[i] * ys[j] - xs[j] * ys[i];
  }
  return 0.5 * s;
}

} // namespace

std::vector<int> planar_hull_order(const std::vector<Vec3>& pts,
                                   const Vec3& normal) {
  const int n = static_cast<int>(pts.size());
  if (n == 0) return {};
  Vec3 u, v;
  plane_frame(normal.normalized(), u, v);
  std::vector<double> xs(n), ys(n);
  double ext = 0;
  for (int i = 0; i < n; ++i) {
    xs[i] = pts[i].dot(u);
    ys[i] = pts[i].dot(v);
    ext = std::max({ext, std::abs(xs[i]), std::abs(ys[i])});
  }
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](int i, int j) {
    if (xs[i] != xs[j]) return xs[i] < xs[j];
    if (ys[i] != ys[j]) return ys[i] < ys[j];
    return i < j;
  });
  idx.erase(std::unique(idx.begin(), idx.end(),
                        [&](int i, int j) {
                          return xs[i] == xs[j] && ys[i] == ys[j];
                        }),
            idx.end());
  const int m = static_cast<int>(idx.size());
  if (m <= 2) return idx;

  const double eps2 = 1e-14 * std::max(ext * ext, 1e-30);
  auto cross2 = [&](int o, int p, int q) {
    return (xs[p] - xs[o]) * (ys[q] - ys[o]) -
           (ys[p] - ys[o]) * (xs[q] - xs[o]);
  };
  std::vector<int> hull;
  hull.reserve(2 * m);
  for (int pass = 0; pass < 2; ++pass) {
    const size_t base = hull.size();
    for (int k = 0; k < m; ++k) {
      const int i = idx[pass == 0 ? k : m - 1 - k];
      while (hull.size() >= base + 2 &&
             cross2(hull[hull.size() - 2], hull[hull.size() - 1], i) <= eps2)
        hull.pop_back();
      hull.push_back(i);
    }
    hull.pop_back(); // endpoint repeats as the next pass's start
  }
  return hull;
}

namespace {

// ---- quickhull over full-rank clouds ----

struct QFace {
  std::array<int, 3> v{};
  Vec3 n{0, 0, 1};
  double off = 0;
  std::array<int, 3> nb{-1, -1, -1}; // across edge (v[i], v[(i+1)%3])
  std::vector<int> pts;
  bool alive = true;
};

struct HullBuilder {
  const std::vector<Vec3>& p;
  double eps;
  Vec3 inner{0, 0, 0};
  std::vector<QFace> faces;
  std::deque<int> pending;

  HullBuilder(const std::vector<Vec3>& pts, double eps_above)
      : p(pts), eps(eps_above) {}

  double signed_dist(int f, const Vec3& q) const {
    return faces[f].n.dot(q) - faces[f].off;
  }

  int make_face(int a, int b, int c) {
    QFace f;
    f.v = {a, b, c};
    Vec3 n = (p[b] - p[a]).cross(p[c] - p[a]);
    const double nn = n.norm();
    if (nn > 0) n = n / nn;
    f.n = n;
    f.off = n.dot(p[a]);
    if (f.n.dot(inner) > f.off) { // keep outward orientation
      std::swap(f.v[1], f.v[2]);
      f.n = -f.n;
      f.off = -f.off;
    }
    faces.push_back(std::move(f));
    return static_cast<int>(faces.size()) - 1;
  }

  static std::uint64_t edge_key(int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) |
           static_cast<std::uint32_t>(b);
  }

  void link_all_edges(const std::vector<int>& ids) {
    std::unordered_map<std::uint64_t, std::pair<int, int>> open;
    for (int f : ids)
      for (int e = 0; e < 3; ++e) {
        const std::uint64_t k =
            edge_key(faces[f].v[e], faces[f].v[(e + 1) % 3]);
        auto it = open.find(k);
        if (it == open.end()) {
          open[k] = {f, e};
        } else {
          faces[f].nb[e] = it->second.first;
          faces[it->second.first].nb[it->second.second] = f;
          open.erase(it);
        }
      }
  }

  void assign_points(const std::vector<int>& candidates,
                     const std::vector<int>& face_ids) {
    for (int pi : candidates) {
      int best_f = -1;
      double best_d = eps;
      for (int f : face_ids) {
        const double d = signed_dist(f, p[pi]);
        if (d > best_d) {
          best_d = d;
          best_f = f;
        }
      }
      if (best_f >= 0) faces[best_f].pts.push_back(pi);
    }
    for (int f : face_ids)
      if (!faces[f].pts.empty()) pending.push_back(f);
  }

  bool init_simplex() {
    const int n = static_cast<int>(p.size());
    auto better_min = [&](int i, int j, int axis) {
      if (p[i][axis] != p[j][axis]) return p[i][axis] < p[j][axis];
      return lex_less(p[i], p[j]);
    };
    std::vector<int> cand;
    for (int axis = 0; axis < 3; ++axis) {
      int lo = 0, hi = 0;
      for (int i = 1; i < n; ++i) {
        if (better_min(i, lo, axis)) lo = i;
        if (better_min(hi, i, axis)) hi = i;
      }
      cand.push_back(lo);
      cand.push_back(hi);
    }
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());

    int a = -1, b = -1;
    double best = -1;
    for (size_t i = 0; i < cand.size(); ++i)
      for (size_t j = i + 1; j < cand.size(); ++j) {
        const double d = (p[cand[i]] - p[cand[j]]).norm2();
        if (d > best) {
          best = d;
          a = cand[i];
          b = cand[j];
        }
      }
    if (best <= 0) return false;

    int c = -1;
    best = -1;
    const Vec3 ab = (p[b] - p[a]).normalized();
    for (int i = 0; i < n; ++i) {
      const Vec3 r = p[i] - p[a];
      const double d = (r - ab * r.dot(ab)).norm2();
      if (d > best || (d == best && c >= 0 && lex_less(p[i], p[c]))) {
        best = d;
        c = i;
      }
    }
    if (c < 0 || best <= 0) return false;

    const Vec3 nrm = (p[b] - p[a]).cross(p[c] - p[a]);
    int d4 = -1;
    best = -1;
    for (int i = 0; i < n; ++i) {
      const double d = std::abs(nrm.dot(p[i] - p[a]));
      if (d > best || (d == best && d4 >= 0 && lex_less(p[i], p[d4]))) {
        best = d;
        d4 = i;
      }
    }
    if (d4 < 0 || best <= 0) return false;

    inner = (p[a] + p[b] + p[c] + p[d4]) * 0.25;
    const std::vector<int> f = {make_face(a, b, c), make_face(a, b, d4),
                                make_face(a, c, d4), make_face(b, c, d4)};
    link_all_edges(f);

    std::vector<int> rest;
    rest.reserve(p.size());
    for (int i = 0; i < n; ++i)
      if (i != a && i != b && i != c && i != d4) rest.push_back(i);
    assign_points(rest, f);
    return true;
  }

  void run() {
    while (!pending.empty()) {
      const int f0 = pending.front();
      pending.pop_front();
      if (!faces[f0].alive || faces[f0].pts.empty()) continue;

      // Furthest conflict point; ties break to the smaller index.
      int apex = -1;
      double best = -kInf;
      for (int pi : faces[f0].pts) {
        const double d = signed_dist(f0, p[pi]);
        if (d > best || (d == best && (apex < 0 || pi < apex))) {
          best = d;
          apex = pi;
        }
      }
      const Vec3& q = p[apex];

      // Faces visible from the apex, found by BFS over adjacency.
      std::vector<int> vis = {f0};
      std::vector<int> stack = {f0};
      faces[f0].alive = false;
      while (!stack.empty()) {
        const int f = stack.back();
        stack.pop_back();
        for (int e = 0; e < 3; ++e) {
          const int g = faces[f].nb[e];
          if (g < 0 || !faces[g].alive) continue;
          if (signed_dist(g, q) > eps) {
            faces[g].alive = false;
            vis.push_back(g);
            stack.push_back(g);
          }
        }
      }

      // Horizon: edges from a visible face into a still-alive (hidden) one.
      struct HEdge {
        int a, b, hidden, hidden_slot;
      };
      std::vector<HEdge> horizon;
      for (int f : vis)
        for (int e = 0; e < 3; ++e) {
          const int g = faces[f].nb[e];
          if (g < 0 || !faces[g].alive) continue;
          const int a = faces[f].v[e], b = faces[f].v[(e + 1) % 3];
          int slot = -1;
          for (int ge = 0; ge < 3; ++ge) {
            const int ga = faces[g].v[ge], gb = faces[g].v[(ge + 1) % 3];
            if ((ga == a && gb == b) || (ga == b && gb == a)) {
              slot = ge;
              break;
            }
          }
          if (slot < 0)
            throw NoConvergenceError("hull adjacency lost during expansion");
          horizon.push_back({a, b, g, slot});
        }

      // New cone of faces joining the horizon to the apex.
      std::vector<int> created;
      created.reserve(horizon.size());
      std::unordered_map<std::uint64_t, std::pair<int, int>> open;
      for (const HEdge& h : horizon) {
        const int nf = make_face(h.a, h.b, apex);
        created.push_back(nf);
        for (int e = 0; e < 3; ++e) {
          const int ea = faces[nf].v[e], eb = faces[nf].v[(e + 1) % 3];
          if ((ea == h.a && eb == h.b) || (ea == h.b && eb == h.a)) {
            faces[nf].nb[e] = h.hidden;
            faces[h.hidden].nb[h.hidden_slot] = nf;
          } else {
            const std::uint64_t k = edge_key(ea, eb);
            auto it = open.find(k);
            if (it == open.end()) {
              faces[nf].nb[e] = -1;
              open[k] = {nf, e};
            } else {
              faces[nf].nb[e] = it->second.first;
              faces[it->second.first].nb[it->second.second] = nf;
              open.erase(it);
            }
          }
        }
      }

      // Re-home the conflict points of the removed faces.
      std::vector<int> orphans;
      for (int f : vis) {
        for (int pi : faces[f].pts)
          if (pi != apex) orphans.push_back(pi);
        faces[f].pts.clear();
        faces[f].pts.shrink_to_fit();
      }
      std::sort(orphans.begin(), orphans.end());
      orphans.erase(std::unique(orphans.begin(), orphans.end()),
                    orphans.end());
      assign_points(orphans, created);
    }
  }
};

struct RankFrame {
  int rank = 3;
  Vec3 mean{0, 0, 0};
  std::array<Vec3, 3> axes{Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, 0, 1}};
};

RankFrame detect_rank(const std::vector<Vec3>& pts, double diam) {
  RankFrame rf;
  Vec3 mean{0, 0, 0};
  for (const Vec3& q : pts) mean += q;
  mean = mean / static_cast<double>(pts.size());
  rf.mean = mean;
  if (diam <= 0) {
    rf.rank = 0;
    return rf;
  }
  Mat3 cov;
  for (const Vec3& q : pts) {
    const Vec3 r = q - mean;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) cov(i, j) += r[i] * r[j];
  }
  cov = cov * (1.0 / static_cast<double>(pts.size()));
  Vec3 evals;
  std::array<Vec3, 3> evecs;
  eigh_sym3(cov, evals, evecs);
  rf.axes = {evecs[2], evecs[1], evecs[0]}; // descending spread
  const double thr = 1e-9 * diam;
  int rank = 0;
  for (int k = 0; k < 3; ++k)
    if (std::sqrt(std::max(evals[k], 0.0)) >= thr) ++rank;
  rf.rank = rank;
  return rf;
}

void build_rank2(ConvexPolytope3& out, const std::vector<Vec3>& pts,
                 const RankFrame& rf) {
  const Vec3 n = rf.axes[0].cross(rf.axes[1]).normalized();
  const std::vector<int> order = planar_hull_order(pts, n);
  out.affine_rank = 2;
  out.frame_origin = rf.mean;
  out.frame_axes = {rf.axes[0], rf.axes[1], n};
  out.vertices.reserve(order.size());
  for (int i : order) out.vertices.push_back(pts[i]);
  const int m = static_cast<int>(out.vertices.size());
  Vec3 c{0, 0, 0};
  for (const Vec3& q : out.vertices) c += q;
  out.interior = c / static_cast<double>(std::max(1, m));

  Facet front;
  front.normal = n;
  front.offset = n.dot(rf.mean);
  front.vertex_ids.resize(m);
  for (int i = 0; i < m; ++i) front.vertex_ids[i] = i;
  Vec3 u, v;
  plane_frame(n, u, v);
  std::vector<double> xs(m), ys(m);
  for (int i = 0; i < m; ++i) {
    xs[i] = out.vertices[i].dot(u);
    ys[i] = out.vertices[i].dot(v);
  }
  front.area = std::abs(polygon_area_2d(xs, ys));

  Facet back = front;
  back.normal = -n;
  back.offset = -front.offset;
  std::reverse(back.vertex_ids.begin(), back.vertex_ids.end());
  out.facets = {front, back};
}

} // namespace

ConvexPolytope3 convex_hull(const PointCloud3& cloud) {
  if (cloud.empty()) throw EmptyCloudError("convex hull of an empty cloud");
  for (const Vec3& q : cloud.pts)
    if (!std::isfinite(q.x) || !std::isfinite(q.y) || !std::isfinite(q.z))
      throw OutOfDomainError("cloud has non-finite coordinates");

  // Exact duplicates only inflate the conflict lists; drop them up front.
  std::vector<Vec3> pts = cloud.pts;
  std::sort(pts.begin(), pts.end(), lex_less);
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Vec3& a, const Vec3& b) {
                          return a.x == b.x && a.y == b.y && a.z == b.z;
                        }),
            pts.end());

  ConvexPolytope3 out;
  out.diameter = cloud.diameter();
  const RankFrame rf = detect_rank(pts, out.diameter);
  out.frame_origin = rf.mean;
  out.frame_axes = rf.axes;
  out.affine_rank = rf.rank;

  if (rf.rank == 0) {
    out.vertices = {pts[0]};
    out.interior = pts[0];
    return out;
  }
  if (rf.rank == 1) {
    const Vec3 axis = rf.axes[0];
    int lo = 0, hi = 0;
    for (int i = 1; i < static_cast<int>(pts.size()); ++i) {
      const double t = (pts[i] - rf.mean).dot(axis);
      if (t < (pts[lo] - rf.mean).dot(axis)) lo = i;
      if (t > (pts[hi] - rf.mean).dot(axis)) hi = i;
    }
    out.vertices = {pts[lo], pts[hi]};
    out.interior = (pts[lo] + pts[hi]) * 0.5;
    return out;
  }
  if (rf.rank == 2) {
    build_rank2(out, pts, rf);
    return out;
  }

  HullBuilder hb(pts, std::max(1e-10 * out.diameter, 1e-12));
  if (!hb.init_simplex())
    throw NoConvergenceError(
        "rank detection reported 3 but no non-degenerate simplex was found");
  hb.run();

  std::vector<int> remap(pts.size(), -1);
  std::vector<int> used;
  for (const QFace& f : hb.faces)
    if (f.alive)
      for (int vid : f.v)
        if (remap[vid] < 0) {
          remap[vid] = 0;
          used.push_back(vid);
        }
  std::sort(used.begin(), used.end());
  out.vertices.reserve(used.size());
  for (size_t i = 0; i < used.size(); ++i) {
    remap[used[i]] = static_cast<int>(i);
    out.vertices.push_back(pts[used[i]]);
  }
  for (const QFace& f : hb.faces)
    if (f.alive)
      out.triangles.push_back({remap[f.v[0]], remap[f.v[1]], remap[f.v[2]]});

  Vec3 c{0, 0, 0};
  for (const Vec3& q : out.vertices) c += q;
  out.interior = c / static_cast<double>(out.vertices.size());

  merge_coplanar(out, 1e-4);
  return out;
}

void merge_coplanar(ConvexPolytope3& p, double angle_tol) {
  if (p.affine_rank < 3) return;
  const int nt = static_cast<int>(p.triangles.size());
  std::vector<Vec3> tnormal(nt);
  std::vector<double> toff(nt), tarea(nt);
  for (int t = 0; t < nt; ++t) {
    const auto& tri = p.triangles[t];
    const Vec3 cr = (p.vertices[tri[1]] - p.vertices[tri[0]])
                        .cross(p.vertices[tri[2]] - p.vertices[tri[0]]);
    tarea[t] = 0.5 * cr.norm();
    tnormal[t] = cr.normalized();
    toff[t] = tnormal[t].dot(p.vertices[tri[0]]);
  }

  auto edge_key = [](int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) |
           static_cast<std::uint32_t>(b);
  };
  std::unordered_map<std::uint64_t, std::pair<int, int>> open;
  std::vector<std::array<int, 3>> nb(nt, {-1, -1, -1});
  for (int t = 0; t < nt; ++t)
    for (int e = 0; e < 3; ++e) {
      const std::uint64_t k =
          edge_key(p.triangles[t][e], p.triangles[t][(e + 1) % 3]);
      auto it = open.find(k);
      if (it == open.end()) {
        open[k] = {t, e};
      } else {
        nb[t][e] = it->second.first;
        nb[it->second.first][it->second.second] = t;
        open.erase(it);
      }
    }

  std::vector<int> by_area(nt);
  for (int t = 0; t < nt; ++t) by_area[t] = t;
  std::sort(by_area.begin(), by_area.end(), [&](int a, int b) {
    if (tarea[a] != tarea[b]) return tarea[a] > tarea[b];
    return a < b;
  });

  const double tol_plane = 1e-7 * (p.diameter > 0 ? p.diameter : 1.0);
  const double cos_tol = std::cos(angle_tol);
  std::vector<int> group(nt, -1);
  std::vector<std::vector<int>> groups;
  for (int seed : by_area) {
    if (group[seed] >= 0) continue;
    const int gid = static_cast<int>(groups.size());
    const Vec3 sn = tnormal[seed];
    const double so = toff[seed];
    std::vector<int> members = {seed};
    group[seed] = gid;
    std::vector<int> stack = {seed};
    while (!stack.empty()) {
      const int t = stack.back();
      stack.pop_back();
      for (int e = 0; e < 3; ++e) {
        const int g = nb[t][e];
        if (g < 0 || group[g] >= 0) continue;
        if (tnormal[g].dot(sn) < cos_tol) continue;
        bool coplanar = true;
        for (int vid : p.triangles[g])
          if (std::abs(sn.dot(p.vertices[vid]) - so) > tol_plane) {
            coplanar = false;
            break;
          }
        if (!coplanar) continue;
        group[g] = gid;
        members.push_back(g);
        stack.push_back(g);
      }
    }
    groups.push_back(std::move(members));
  }

  p.facets.clear();
  p.facets.reserve(groups.size());
  for (const std::vector<int>& g : groups) {
    Facet f;
    Vec3 n{0, 0, 0};
    for (int t : g) n += tnormal[t] * tarea[t];
    f.normal = n.normalized();

    std::vector<int> vids;
    for (int t : g)
      for (int vid : p.triangles[t]) vids.push_back(vid);
    std::sort(vids.begin(), vids.end());
    vids.erase(std::unique(vids.begin(), vids.end()), vids.end());

    double off = -kInf;
    for (int vid : vids) off = std::max(off, f.normal.dot(p.vertices[vid]));
    f.offset = off;

    std::vector<Vec3> pos;
    pos.reserve(vids.size());
    for (int vid : vids) pos.push_back(p.vertices[vid]);
    const std::vector<int> order = planar_hull_order(pos, f.normal);
    f.vertex_ids.reserve(order.size());
    for (int i : order) f.vertex_ids.push_back(vids[i]);

    Vec3 u, v;
    plane_frame(f.normal, u, v);
    std::vector<double> xs, ys;
    xs.reserve(f.vertex_ids.size());
    ys.reserve(f.vertex_ids.size());
    for (int vid : f.vertex_ids) {
      xs.push_back(p.vertices[vid].dot(u));
      ys.push_back(p.vertices[vid].dot(v));
    }
    f.area = std::abs(polygon_area_2d(xs, ys));
    p.facets.push_back(std::move(f));
  }
}

SupportResult support(const ConvexPolytope3& p, const Vec3& dir,
                      double tol_active) {
  if (p.vertices.empty())
    throw EmptyCloudError("support of an empty polytope");
  SupportResult r;
  r.value = -kInf;
  for (const Vec3& v : p.vertices) r.value = std::max(r.value, dir.dot(v));
  for (int i = 0; i < static_cast<int>(p.vertices.size()); ++i)
    if (dir.dot(p.vertices[i]) >= r.value - tol_active) r.active.push_back(i);
  return r;
}

namespace {

// Per-triangle planes, computed once per polytope for repeated queries.
struct PlaneCache {
  std::vector<Vec3> n;
  std::vector<double> off;

  void build(const ConvexPolytope3& p) {
    const int nt = static_cast<int>(p.triangles.size());
    n.resize(nt);
    off.resize(nt);
    for (int t = 0; t < nt; ++t) {
      const auto& tri = p.triangles[t];
      n[t] = (p.vertices[tri[1]] - p.vertices[tri[0]])
                 .cross(p.vertices[tri[2]] - p.vertices[tri[0]])
                 .normalized();
      off[t] = n[t].dot(p.vertices[tri[0]]);
    }
  }
};

// ub0, when finite, must upper-bound the true distance (e.g. the distance
// to the nearest vertex); it prunes the triangle scan.
double distance_rank3(const ConvexPolytope3& p, const PlaneCache& pc,
                      const Vec3& q, double ub0) {
  const int nt = static_cast<int>(p.triangles.size());
  double max_viol = -kInf;
  std::vector<double> pd(nt);
  for (int t = 0; t < nt; ++t) {
    pd[t] = pc.n[t].dot(q) - pc.off[t];
    max_viol = std::max(max_viol, pd[t]);
  }
  if (max_viol <= 0) return 0;

  double ub = ub0;
  if (!(ub < kInf))
    for (const Vec3& v : p.vertices) ub = std::min(ub, dist(q, v));
  for (int t = 0; t < nt; ++t) {
    if (std::abs(pd[t]) >= ub) continue;
    const auto& tri = p.triangles[t];
    ub = std::min(ub, point_triangle_dist(q, p.vertices[tri[0]],
                                          p.vertices[tri[1]],
                                          p.vertices[tri[2]]));
  }
  return ub;
}

double distance_rank2(const ConvexPolytope3& p, const Vec3& q) {
  const Facet& f = p.facets[0];
  const double h = f.normal.dot(q) - f.offset;
  const Vec3 proj = q - f.normal * h;
  bool inside = true;
  const int m = static_cast<int>(f.vertex_ids.size());
  for (int i = 0; i < m && inside; ++i) {
    const Vec3& a = p.vertices[f.vertex_ids[i]];
    const Vec3& b = p.vertices[f.vertex_ids[(i + 1) % m]];
    const Vec3 edge_out = (b - a).cross(f.normal);
    if (edge_out.dot(proj - a) > 0) inside = false;
  }
  if (inside) return std::abs(h);
  double best = kInf;
  for (int i = 0; i < m; ++i) {
    const Vec3& a = p.vertices[f.vertex_ids[i]];
    const Vec3& b = p.vertices[f.vertex_ids[(i + 1) % m]];
    best = std::min(best, point_segment_dist(q, a, b));
  }
  return best;
}

} // namespace

double distance_to(const ConvexPolytope3& p, const Vec3& q) {
  if (p.vertices.empty())
    throw EmptyCloudError("distance to an empty polytope");
  switch (p.affine_rank) {
    case 0:
      return dist(q, p.vertices[0]);
    case 1:
      return point_segment_dist(q, p.vertices[0], p.vertices[1]);
    case 2:
      return distance_rank2(p, q);
    default: {
      PlaneCache pc;
      pc.build(p);
      return distance_rank3(p, pc, q, kInf);
    }
  }
}

bool contains(const ConvexPolytope3& p, const Vec3& q, double eps) {
  return distance_to(p, q) <= eps;
}

namespace {

// Uniform spatial bins for nearest-neighbour queries against a fixed cloud.
struct BinGrid {
  Vec3 lo{0, 0, 0};
  double cell = 1;
  int nx = 1, ny = 1, nz = 1;
  std::unordered_map<std::uint64_t, std::vector<int>> bins;
  const std::vector<Vec3>* pts = nullptr;

  static std::uint64_t key(int i, int j, int k) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(i)) << 42) ^
           (static_cast<std::uint64_t>(static_cast<std::uint32_t>(j)) << 21) ^
           static_cast<std::uint64_t>(static_cast<std::uint32_t>(k));
  }

  void build(const std::vector<Vec3>& p, double diam) {
    pts = &p;
    Vec3 hi = p[0];
    lo = p[0];
    for (const Vec3& q : p) {
      lo = {std::min(lo.x, q.x), std::min(lo.y, q.y), std::min(lo.z, q.z)};
      hi = {std::max(hi.x, q.x), std::max(hi.y, q.y), std::max(hi.z, q.z)};
    }
    const int target = std::max(
        1, static_cast<int>(std::cbrt(static_cast<double>(p.size()))));
    cell = diam > 0 ? diam / target : 1.0;
    nx = static_cast<int>((hi.x - lo.x) / cell) + 1;
    ny = static_cast<int>((hi.y - lo.y) / cell) + 1;
    nz = static_cast<int>((hi.z - lo.z) / cell) + 1;
    for (int i = 0; i < static_cast<int>(p.size()); ++i) {
      const Vec3& q = p[i];
      bins[key(static_cast<int>((q.x - lo.x) / cell),
               static_cast<int>((q.y - lo.y) / cell),
               static_cast<int>((q.z - lo.z) / cell))]
          .push_back(i);
    }
  }

  double nearest(const Vec3& q) const {
    const int ci = static_cast<int>(std::floor((q.x - lo.x) / cell));
    const int cj = static_cast<int>(std::floor((q.y - lo.y) / cell));
    const int ck = static_cast<int>(std::floor((q.z - lo.z) / cell));
    double best = kInf;
    // Expand Chebyshev shells; points in unvisited shells lie at least
    // r * cell away, so stopping once best <= r * cell is exact.
    const int rmax =
        std::max({std::abs(ci) + nx, std::abs(cj) + ny, std::abs(ck) + nz}) +
        1;
    for (int r = 0; r <= rmax; ++r) {
      for (int i = std::max(0, ci - r); i <= std::min(nx - 1, ci + r); ++i)
        for (int j = std::max(0, cj - r); j <= std::min(ny - 1, cj + r); ++j)
          for (int k = std::max(0, ck - r); k <= std::min(nz - 1, ck + r);
               ++k) {
            if (std::max({std::abs(i - ci), std::abs(j - cj),
                          std::abs(k - ck)}) != r)
              continue;
            const auto it = bins.find(key(i, j, k));
            if (it == bins.end()) continue;
            for (int idx : it->second)
              best = std::min(best, dist(q, (*pts)[idx]));
          }
      if (best <= r * cell) return best;
    }
    return best;
  }
};

double directed_cloud_dist(const std::vector<Vec3>& a, const BinGrid& gb) {
  double worst = 0;
  for (const Vec3& q : a) worst = std::max(worst, gb.nearest(q));
  return worst;
}

// max over vertices of A of the distance to the solid B.  The nearest
// B-vertex distance is a sound upper bound per query, so sorting queries
// by that bound and stopping once it falls below the running maximum
// skips the expensive exact computation for almost all vertices.
double directed_hull_dist(const ConvexPolytope3& a, const ConvexPolytope3& b) {
  if (a.vertices.empty() || b.vertices.empty())
    throw EmptyCloudError("Hausdorff distance of an empty polytope");
  if (b.affine_rank < 3) {
    double worst = 0;
    for (const Vec3& v : a.vertices)
      worst = std::max(worst, distance_to(b, v));
    return worst;
  }
  BinGrid gb;
  gb.build(b.vertices, b.diameter > 0 ? b.diameter : 1.0);
  std::vector<std::pair<double, int>> order;
  order.reserve(a.vertices.size());
  for (int i = 0; i < static_cast<int>(a.vertices.size()); ++i)
    order.push_back({gb.nearest(a.vertices[i]), i});
  std::sort(order.begin(), order.end(), [](const auto& x, const auto& y) {
    if (x.first != y.first) return x.first > y.first;
    return x.second < y.second;
  });
  PlaneCache pc;
  pc.build(b);
  double worst = 0;
  for (const auto& [ub, i] : order) {
    if (ub <= worst) break;
    worst = std::max(worst, distance_rank3(b, pc, a.vertices[i], ub));
  }
  return worst;
}

} // namespace

double hausdorff(const PointCloud3& a, const PointCloud3& b) {
  if (a.empty() || b.empty())
    throw EmptyCloudError("Hausdorff distance of an empty cloud");
  BinGrid ga, gb;
  ga.build(a.pts, a.diameter() > 0 ? a.diameter() : 1.0);
  gb.build(b.pts, b.diameter() > 0 ? b.diameter() : 1.0);
  return std::max(directed_cloud_dist(a.pts, gb),
                  directed_cloud_dist(b.pts, ga));
}

double hull_hausdorff(const ConvexPolytope3& a, const ConvexPolytope3& b) {
  return std::max(directed_hull_dist(a, b), directed_hull_dist(b, a));
}

} // namespace jnr
