#include "jnr/models.hpp"

#include <cmath>

#include "jnr/cmatrix.hpp"
#include "jnr/errors.hpp"

namespace jnr {

namespace {

CMatrix block(const CMatrix& top, const CMatrix& bottom) {
  return block_compose(validate_hermitian(top), validate_hermitian(bottom)).m;
}

const CMatrix& I2() { return pauli(0); }
const CMatrix& X2() { return pauli(1); }
const CMatrix& Y2() { return pauli(2); }
const CMatrix& Z2() { return pauli(3); }

double clampz(double v) { return std::abs(v) < 1e-15 ? 0.0 : v; }

}  // namespace

Vec3 oloid_pi_oracle(double s1, double s2, double t) {
  if (s1 < 0 || s1 > 1 || s2 < 0 || s2 > 1 || t < 0 || t > 2 * M_PI)
    throw OutOfDomainError("oloid oracle needs 0<=s1,s2<=1 and 0<=t<=2pi");
  return {clampz(1 - s1 + s2 * std::cos(t)), clampz(s1 * s2 * std::sin(t)),
          clampz((1 - s1) * s2 * std::sin(t))};
}

InstanceSpec oloid_instance() {
  InstanceSpec s;
  s.name = "oloid";
  s.triple = make_triple(block(X2(), I2() + X2()), block(Y2(), CMatrix::zero(2)),
                         block(CMatrix::zero(2), Y2()));
  s.has_oracle = true;
  s.notes =
      "Block-diagonal pair of perpendicular unit disks, each passing "
      "through the other's center; the hull is the oloid body.";
  s.oracle = [](const ProductState& p) {
    const Vec3 a = p.alpha.normalized();
    const Vec3 b = p.beta.normalized();
    const double s1 = 0.5 * (1.0 + a.z);
    return Vec3{1 - s1 + b.x, s1 * b.y, (1 - s1) * b.y};
  };
  return s;
}

InstanceSpec cone_instance() {
  InstanceSpec s;
  s.name = "cone";
  s.triple = make_triple(kron2(X2(), X2()) - kron2(Y2(), Y2()),
                         kron2(X2(), Y2()) + kron2(Y2(), X2()),
                         kron2(Z2(), Z2()));
  s.has_oracle = true;
  s.notes =
      "Swap-symmetric; the symmetric product range is exactly the cone "
      "x^2 + y^2 = (1-z)^2, 0 <= z <= 1.";
  s.oracle = [](const ProductState& p) {
    const Vec3 n = p.alpha.normalized();
    return Vec3{n.x * n.x - n.y * n.y, 2 * n.x * n.y, n.z * n.z};
  };
  return s;
}

InstanceSpec ising_instance() {
  InstanceSpec s;
  s.name = "ising";
  const CMatrix h2 = 0.5 * (kron2(Z2(), I2()) + kron2(I2(), Z2()));
  const CMatrix h3 = 0.5 * (kron2(X2(), I2()) + kron2(I2(), X2()));
  s.triple = make_triple(kron2(X2(), X2()), h2, h3);
  s.has_oracle = true;
  s.notes =
      "Transverse-field pair (coupling, field, magnetization); symmetric "
      "product map (r^2, t, r) over the Bloch sphere.";
  s.oracle = [](const ProductState& p) {
    const Vec3 n = p.alpha.normalized();
    return Vec3{n.x * n.x, n.z, n.x};
  };
  return s;
}

InstanceSpec xy_instance() {
  InstanceSpec s;
  s.name = "xy";
  const CMatrix h3 = 0.5 * (kron2(Z2(), I2()) + kron2(I2(), Z2()));
  s.triple = make_triple(kron2(X2(), X2()), kron2(Y2(), Y2()), h3);
  s.has_oracle = true;
  s.notes =
      "Two exchange couplings and a field; symmetric product map "
      "(r^2, s^2, t) over the Bloch sphere.";
  s.oracle = [](const ProductState& p) {
    const Vec3 n = p.alpha.normalized();
    return Vec3{n.x * n.x, n.y * n.y, n.z};
  };
  return s;
}

InstanceSpec appendix_instance(int k) {
  if (k < 1 || k > 3)
    throw BadIndexError("capsule instances are numbered 1..3");
  InstanceSpec s;
  s.name = "eg" + std::to_string(k);
  const CMatrix h1_top = I2() + Z2();
  const CMatrix h1_bottom = k == 3 ? CMatrix::zero(2) - I2() - Z2()
                                   : Z2() - I2();
  const double sign = k == 1 ? 1.0 : -1.0;
  s.triple = make_triple(block(h1_top, h1_bottom),
                         block(X2(), sign * X2()),
                         block(Y2(), sign * Y2()));
  s.has_oracle = true;
  switch (k) {
    case 1:
      s.notes =
          "Capsule hull conv(unit spheres at (+-1,0,0)); the product range "
          "fills the whole capsule.";
      s.oracle = [](const ProductState& p) {
        const Vec3 a = p.alpha.normalized();
        const Vec3 b = p.beta.normalized();
        return Vec3{a.z + b.z, b.x, b.y};
      };
      break;
    case 2:
      s.notes =
          "Same capsule hull; the product range pinches on the axis circle "
          "x = 0 so cylinder rulings leave the range.";
      s.oracle = [](const ProductState& p) {
        const Vec3 a = p.alpha.normalized();
        const Vec3 b = p.beta.normalized();
        return Vec3{a.z + b.z, a.z * b.x, a.z * b.y};
      };
      break;
    default:
      s.notes =
          "Same capsule hull with a doubly signed first block; oracle "
          "derived from the matrices (the two blocks of the first "
          "observable differ by an overall sign).";
      s.oracle = [](const ProductState& p) {
        const Vec3 a = p.alpha.normalized();
        const Vec3 b = p.beta.normalized();
        return Vec3{a.z * (1 + b.z), a.z * b.x, a.z * b.y};
      };
      break;
  }
  return s;
}

InstanceSpec catalog_instance(const std::string& name) {
  if (name == "oloid") return oloid_instance();
  if (name == "cone") return cone_instance();
  if (name == "ising") return ising_instance();
  if (name == "xy") return xy_instance();
  if (name == "eg1") return appendix_instance(1);
  if (name == "eg2") return appendix_instance(2);
  if (name == "eg3") return appendix_instance(3);
  throw NotFoundError("no bundled instance named '" + name + "'");
}

std::vector<std::string> catalog_names() {
  return {"oloid", "cone", "ising", "xy", "eg1", "eg2", "eg3"};
}

}  // namespace jnr
