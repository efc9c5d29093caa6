#pragma once

#include <array>
#include <vector>

#include "jnr/cloud.hpp"
#include "jnr/vec3.hpp"

namespace jnr {

// Merged coplanar facet of a hull: a convex polygon with perimeter-ordered
// vertex indices. plane: normal.x = offset, outward normal.
struct Facet {
  Vec3 normal{0, 0, 1};
  double offset = 0;
  std::vector<int> vertex_ids;
  double area = 0;
};

struct ConvexPolytope3 {
  std::vector<Vec3> vertices;                // subset of the input points
  std::vector<std::array<int, 3>> triangles; // outward oriented, rank 3 only
  std::vector<Facet> facets;
  int affine_rank = 3;
  Vec3 interior{0, 0, 0}; // vertex centroid
  double diameter = 0;    // input cloud bbox diagonal

  // Affine support frame for rank < 3: origin + `affine_rank` axes.
  Vec3 frame_origin{0, 0, 0};
  std::array<Vec3, 3> frame_axes{Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, 0, 1}};

  double tol_hull() const { return 1e-9 * (diameter > 0 ? diameter : 1.0); }
};

// Quickhull with principal-component rank detection (singular value below
// 1e-9 * diameter drops a dimension); rank < 3 clouds are hulled in their
// affine subspace and embedded back. Deterministic for identical input.
// Coplanar triangles are merged into facets at angle_tol 1e-4 rad.
// Throws EmptyCloudError.
ConvexPolytope3 convex_hull(const PointCloud3& cloud);

// Re-merge facets at a different angle tolerance (coplanarity within
// tol_plane = 1e-7 * diameter is still required).
void merge_coplanar(ConvexPolytope3& p, double angle_tol);

// Counter-clockwise convex hull order (seen against `normal`) of points
// known to lie near a common plane; returns indices into pts.
std::vector<int> planar_hull_order(const std::vector<Vec3>& pts,
                                   const Vec3& normal);

struct SupportResult {
  double value = 0;
  std::vector<int> active; // vertex ids within tol_active of the max
};

SupportResult support(const ConvexPolytope3& p, const Vec3& dir,
                      double tol_active);

// Euclidean distance from q to the polytope (0 inside).
double distance_to(const ConvexPolytope3& p, const Vec3& q);

bool contains(const ConvexPolytope3& p, const Vec3& q, double eps);

// Symmetric point-cloud Hausdorff distance (nearest-neighbor maxima both
// ways) with uniform-grid binning.
double hausdorff(const PointCloud3& a, const PointCloud3& b);

// Hausdorff distance between two polytopes as convex SETS: the directed
// distances are attained at vertices, so this is exact given distance_to.
double hull_hausdorff(const ConvexPolytope3& a, const ConvexPolytope3& b);

} // namespace jnr
