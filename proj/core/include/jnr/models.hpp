#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "jnr/qops.hpp"
#include "jnr/ranges.hpp"

namespace jnr {

// A bundled instance with, where available, a closed-form oracle for its
// product range. The oracle takes the generating parameters of a product
// state (see parameter_point) and returns the exact expectation triple.
struct InstanceSpec {
  std::string name;
  ObservableTriple triple;
  bool has_oracle = false;
  std::string notes;

  // Closed-form product-range point from a product state's parameters.
  std::function<Vec3(const ProductState&)> oracle;
};

// conv of two unit disks in perpendicular planes, each through the other's
// center. Blocks: H1 = X / I+X, H2 = Y / 0, H3 = 0 / Y.
InstanceSpec oloid_instance();

// (1-s1+s2 cos t, s1 s2 sin t, (1-s1) s2 sin t); throws OutOfDomainError
// outside 0<=s1,s2<=1, 0<=t<=2pi.
Vec3 oloid_pi_oracle(double s1, double s2, double t);

// H1 = XX - YY, H2 = XY + YX, H3 = ZZ; symmetric image is the cone
// x^2 + y^2 = (1-z)^2.
InstanceSpec cone_instance();

// H1 = XX, H2 = (ZI + IZ)/2, H3 = (XI + IX)/2; symmetric map (r^2, t, r).
InstanceSpec ising_instance();

// H1 = XX, H2 = YY, H3 = (ZI + IZ)/2; symmetric map (r^2, s^2, t).
InstanceSpec xy_instance();

// Three block-diagonal triples sharing the capsule hull conv(unit spheres
// at (+-1,0,0)) while their product ranges differ:
//   1: H1 = (I+Z) / (-I+Z), H2 = X / X,  H3 = Y / Y
//   2: H1 as 1,             H2 = X / -X, H3 = Y / -Y
//   3: H1 = (I+Z) / (-I-Z), H2 = X / -X, H3 = Y / -Y
// Throws BadIndexError for k outside 1..3.
InstanceSpec appendix_instance(int k);

// Lookup by CLI name: oloid, cone, ising, xy, eg1, eg2, eg3.
// Throws NotFoundError.
InstanceSpec catalog_instance(const std::string& name);
std::vector<std::string> catalog_names();

} // namespace jnr
