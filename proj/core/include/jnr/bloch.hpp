#pragma once

#include <vector>

#include "jnr/cmatrix.hpp"
#include "jnr/vec3.hpp"

namespace jnr {

// Unit Bloch vector (r,s,t) -> qubit state. For t > -1 + 1e-12 the branch
//   (1+t, r+is) / sqrt(2(1+t))
// is used, otherwise (r-is, 1-t) / sqrt(2(1-t)); both give a unit state with
// <sigma> = (r,s,t). Throws NotNormalizedError if | |n|-1 | > 1e-9.
CVector bloch_to_state(const Vec3& n);

// Inverse map: (<X>, <Y>, <Z>) of a 2-dim unit state.
Vec3 state_to_bloch(const CVector& v);

// Deterministic Fibonacci sphere lattice: n points with
//   z_i = 1 - (2i+1)/n,  azimuth_i = 2*pi*i*(1 - 1/phi), phi golden ratio.
std::vector<Vec3> fibonacci_sphere(int n);

// Uniform grid on the sphere in (z, azimuth): rows at z centered in n_z
// equal bands, each row holding round(n_az * sin(theta)) + 1 azimuth steps.
// Used where a stratified, pole-free net is wanted.
std::vector<Vec3> sphere_grid(int n_z, int n_az);

} // namespace jnr
