#pragma once

#include <vector>

#include "jnr/vec3.hpp"

namespace jnr {

enum class RangeKind { Lambda, Pi, Theta, PiPlus, ThetaPlus, LambdaR };

const char* range_kind_name(RangeKind k);

// Generating parameters of a sampled point: Bloch vectors of the product
// state (alpha only for the symmetric ranges, neither for Lambda).
struct Provenance {
  Vec3 alpha{0, 0, 0};
  Vec3 beta{0, 0, 0};
};

// A finite set of points in R^3. "diameter" is the bounding-box diagonal;
// all relative tolerances downstream scale with it. `prov` is either empty
// or parallel to `pts`.
struct PointCloud3 {
  std::vector<Vec3> pts;
  std::vector<Provenance> prov;
  RangeKind tag = RangeKind::Pi;

  PointCloud3() = default;
  explicit PointCloud3(std::vector<Vec3> p, RangeKind k = RangeKind::Pi)
      : pts(std::move(p)), tag(k) {}

  int size() const { return static_cast<int>(pts.size()); }
  bool empty() const { return pts.empty(); }
  bool has_provenance() const { return prov.size() == pts.size(); }
  const Vec3& operator[](int i) const { return pts[static_cast<size_t>(i)]; }

  Vec3 bbox_min() const;
  Vec3 bbox_max() const;
  // Bounding-box diagonal; 0 for empty or single-point clouds.
  double diameter() const;
  Vec3 centroid() const;

  void push(const Vec3& p) { pts.push_back(p); }
  void push(const Vec3& p, const Provenance& pr) {
    pts.push_back(p);
    prov.push_back(pr);
  }
  void append(const PointCloud3& other);
};

} // namespace jnr
