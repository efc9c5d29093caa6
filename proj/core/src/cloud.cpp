#include "jnr/cloud.hpp"

#include <algorithm>
#include <limits>

#include "jnr/errors.hpp"

namespace jnr {

const char* range_kind_name(RangeKind k) {
  switch (k) {
    case RangeKind::Lambda: return "lambda";
    case RangeKind::Pi: return "pi";
    case RangeKind::Theta: return "theta";
    case RangeKind::PiPlus: return "pi_plus";
    case RangeKind::ThetaPlus: return "theta_plus";
    case RangeKind::LambdaR: return "lambda_r";
  }
  return "unknown";
}

Vec3 PointCloud3::bbox_min() const {
  if (pts.empty()) throw EmptyCloudError("bbox of an empty cloud");
  Vec3 lo = pts[0];
  for (const Vec3& p : pts) {
    lo.x = std::min(lo.x, p.x);
    lo.y = std::min(lo.y, p.y);
    lo.z = std::min(lo.z, p.z);
  }
  return lo;
}

Vec3 PointCloud3::bbox_max() const {
  if (pts.empty()) throw EmptyCloudError("bbox of an empty cloud");
  Vec3 hi = pts[0];
  for (const Vec3& p : pts) {
    hi.x = std::max(hi.x, p.x);
    hi.y = std::max(hi.y, p.y);
    hi.z = std::max(hi.z, p.z);
  }
  return hi;
}

double PointCloud3::diameter() const {
  if (pts.size() < 2) return 0;
  return (bbox_max() - bbox_min()).norm();
}

Vec3 PointCloud3::centroid() const {
  if (pts.empty()) throw EmptyCloudError("centroid of an empty cloud");
  Vec3 c{0, 0, 0};
  for (const Vec3& p : pts) c = c + p;
  return c * (1.0 / static_cast<double>(pts.size()));
}

void PointCloud3::append(const PointCloud3& other) {
  const bool keep_prov =
      (pts.empty() || has_provenance()) && other.has_provenance();
  pts.insert(pts.end(), other.pts.begin(), other.pts.end());
  if (keep_prov)
    prov.insert(prov.end(), other.prov.begin(), other.prov.end());
  else
    prov.clear();
}

} // namespace jnr
