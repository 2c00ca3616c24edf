#pragma once

#include <vector>

#include "spinorlab/geometry.hpp"

namespace spinorlab::fields {

using geometry::Geometry;
using geometry::Grid;

struct SpinorField {
  std::vector<Vec4C> d;
  static SpinorField zero(const Grid& g) { return SpinorField{std::vector<Vec4C>(g.size(), Vec4C::Zero())}; }
};

struct CospinorField {
  std::vector<RowVec4C> d;
  static CospinorField zero(const Grid& g) {
    return CospinorField{std::vector<RowVec4C>(g.size(), RowVec4C::Zero())};
  }
};

// Spinor + cospinor pair u + v on one slab.
struct DoubleField {
  SpinorField u;
  CospinorField v;
  static DoubleField zero(const Grid& g) { return DoubleField{SpinorField::zero(g), CospinorField::zero(g)}; }
};

// ---- pointwise algebra --------------------------------------------------

DoubleField add(const DoubleField& a, const DoubleField& b);
DoubleField sub(const DoubleField& a, const DoubleField& b);
DoubleField scale(const DoubleField& a, cd c);
double max_abs(const DoubleField& a);
double max_abs_slice(const DoubleField& a, const Grid& g, int it);

// (u + v)^+ = v^+ + u^+ (slots swap), pointwise with the A matrix.
DoubleField adjoint(const Geometry& geo, const DoubleField& f);
// (u + v)^c, pointwise with the C matrix.
DoubleField charge_conj(const Geometry& geo, const DoubleField& f);
// R(u + v) = u + (-v).
DoubleField rmap(const DoubleField& f);
// gamma_mu acting diagonally (left on u, right on v) with the curved gamma
// carrying a lower coordinate index mu.
DoubleField mul_gamma_low(const Geometry& geo, const DoubleField& f, int mu);
// constant frame gamma_a (lower frame index) acting diagonally
DoubleField mul_gamma_frame(const Geometry& geo, const DoubleField& f, int a);
DoubleField covariant_deriv(const Geometry& geo, const DoubleField& f, int a);
// pointwise scalar multiplication by a function of the grid point
DoubleField mul_scalar_field(const DoubleField& f, const std::vector<double>& s);

// <f1, f2> at point p: u1^dag A u2 + v2 Ainv v1^dag.
cd pair_point(const Geometry& geo, const DoubleField& f1, const DoubleField& f2, std::size_t p);

// ---- derivatives and the Dirac operator ---------------------------------

// 4th-order lattice derivative of every component (periodic in x, one-sided
// near the t boundary).
SpinorField dt_field(const Grid& g, const SpinorField& f);
SpinorField dx_field(const Grid& g, const SpinorField& f);
CospinorField dt_field(const Grid& g, const CospinorField& f);
CospinorField dx_field(const Grid& g, const CospinorField& f);

// Frame covariant derivative: D_a u = e_a^mu d_mu u + sigma_a u and
// D_a v = e_a^mu d_mu v - v sigma_a.
SpinorField covariant_deriv(const Geometry& geo, const SpinorField& f, int a);
CospinorField covariant_deriv(const Geometry& geo, const CospinorField& f, int a);

// slash = gamma^a D_a.
SpinorField slash(const Geometry& geo, const SpinorField& f);
CospinorField slash(const Geometry& geo, const CospinorField& f);

// P u = (-i slash + m) u, P_c v = (i slash + m) v, P(u + v) = Pu + P_c v.
SpinorField apply_P(const Geometry& geo, const SpinorField& f, double mass);
CospinorField apply_Pc(const Geometry& geo, const CospinorField& f, double mass);
DoubleField apply_P(const Geometry& geo, const DoubleField& f, double mass);
DoubleField slash(const Geometry& geo, const DoubleField& f);

// Frame divergence of a frame-indexed family Z^a (one field per leg):
// D_a Z^a = e_a^mu d_mu Z^a + sigma-action + Gamma^b_{ba} Z^a.
SpinorField frame_divergence(const Geometry& geo, const std::array<SpinorField, 4>& Z);
CospinorField frame_divergence(const Geometry& geo, const std::array<CospinorField, 4>& Z);

// ---- test helpers --------------------------------------------------------

// Plane wave w e^{-i(omega t - k x)} solving the flat Dirac equation with
// omega = sqrt(k^2 + m^2); w from the algebraic projector.
SpinorField plane_wave(const Grid& g, double k, double mass, int branch = 0);

// L2-type norms over the slab.
double l2_norm(const Geometry& geo, const DoubleField& f);

}  // namespace spinorlab::fields
