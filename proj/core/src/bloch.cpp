#include "jnr/bloch.hpp"

#include <cmath>

namespace jnr {

CVector bloch_to_state(const Vec3& n) {
  const double len = n.norm();
  if (std::abs(len - 1.0) > 1e-9)
    throw NotNormalizedError("Bloch vector must lie on the unit sphere");
  CVector v;
  v.n = 2;
  const double r = n.x, s = n.y, t = n.z;
  if (t > -1.0 + 1e-12) {
    const double d = std::sqrt(2 * (1 + t));
    v[0] = cplx((1 + t) / d, 0);
    v[1] = cplx(r / d, s / d);
  } else {
    // Near the south pole the usual branch divides by ~0; anchor on the
    // second component instead.
    const double d = std::sqrt(2 * (1 - t));
    v[0] = cplx(r / d, -s / d);
    v[1] = cplx((1 - t) / d, 0);
  }
  const double nrm = v.norm();
  v[0] /= nrm;
  v[1] /= nrm;
  return v;
}

Vec3 state_to_bloch(const CVector& v) {
  if (v.n != 2) throw BadDimError("Bloch coordinates exist for qubits only");
  if (std::abs(v.norm() - 1.0) > 1e-9)
    throw NotNormalizedError("state must be normalized");
  const cplx a = v[0], b = v[1];
  const cplx ab = std::conj(a) * b;
  return {2 * ab.real(), 2 * ab.imag(), std::norm(a) - std::norm(b)};
}

std::vector<Vec3> fibonacci_sphere(int n) {
  if (n < 1) throw BadIndexError("point count must be positive");
  std::vector<Vec3> pts;
  pts.reserve(n);
  const double golden = (1 + std::sqrt(5.0)) / 2;
  const double step = 2 * M_PI * (1 - 1 / golden);
  for (int i = 0; i < n; ++i) {
    const double z = 1 - (2.0 * i + 1) / n;
    const double rad = std::sqrt(std::max(0.0, 1 - z * z));
    const double az = step * i;
    pts.push_back({rad * std::cos(az), rad * std::sin(az), z});
  }
  return pts;
}

std::vector<Vec3> sphere_grid(int n_z, int n_az) {
  if (n_z < 2 || n_az < 3) throw BadIndexError("grid needs n_z >= 2, n_az >= 3");
  std::vector<Vec3> pts;
  pts.reserve(static_cast<size_t>(n_z) * n_az);
  for (int i = 0; i < n_z; ++i) {
    const double z = 1 - 2.0 * i / (n_z - 1);
    const double rad = std::sqrt(std::max(0.0, 1 - z * z));
    for (int j = 0; j < n_az; ++j) {
      const double az = 2 * M_PI * j / n_az;
      pts.push_back({rad * std::cos(az), rad * std::sin(az), z});
    }
  }
  return pts;
}

} // namespace jnr
