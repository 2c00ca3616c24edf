#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "spinorlab/fields.hpp"
#include "spinorlab/geometry.hpp"
#include "spinorlab/util.hpp"

namespace spinorlab::solver {

using fields::CospinorField;
using fields::DoubleField;
using fields::SpinorField;
using geometry::Geometry;
using geometry::Grid;
using geometry::MetricSlab;

struct SolverConfig {
  double mass = 1.0;
  double cfl = 0.45;
};

struct SliceData {
  std::vector<Vec4C> u;
  std::vector<RowVec4C> v;
  static SliceData zero(int nx) {
    return SliceData{std::vector<Vec4C>(nx, Vec4C::Zero()),
                     std::vector<RowVec4C>(nx, RowVec4C::Zero())};
  }
};

// Smooth time cutoffs for the time-slice machinery: phi_plus vanishes to the
// past of t_lo and is 1 to the future of t_hi; phi_minus = 1 - phi_plus.
struct PartitionPair {
  double t_lo = 0.0;
  double t_hi = 0.0;
  double phi_plus(double t) const { return smooth_step((t - t_lo) / (t_hi - t_lo)); }
  double phi_minus(double t) const { return 1.0 - phi_plus(t); }
};

// Numerical causal cone of the (t,x) light cone through an x-interval.
struct Cone {
  int it0 = 0;
  std::vector<double> lo, hi;  // unwrapped x-interval per slice (it >= it0 or <= it0)
  std::vector<bool> tracked;   // which slices carry an interval
  double period = 0.0;

  bool inside(double x, int it, double collar) const;
};

Cone forward_cone(const MetricSlab& slab, int it0, double xa, double xb);
Cone backward_cone(const MetricSlab& slab, int it0, double xa, double xb);

// Minimal circular arc [xa, xb] (unwrapped, xb >= xa) covering the x-support
// of f; empty when f vanishes.
std::optional<std::pair<double, double>> support_arc(const Grid& g, const DoubleField& f,
                                                     double tol_rel = 1e-12);
// [it_lo, it_hi] slice range of the t-support.
std::optional<std::pair<int, int>> support_slices(const Grid& g, const DoubleField& f,
                                                  double tol_rel = 1e-12);

// Method-of-lines RK4 propagator for P psi = f on a fixed geometry.
class Propagator {
 public:
  Propagator(std::shared_ptr<const Geometry> geo, SolverConfig cfg);

  const Geometry& geo() const { return *geo_; }
  const SolverConfig& config() const { return cfg_; }

  // Integrates from slice it0 (initial data) to slice it1 in either
  // direction, depositing the solution on every slice in between; outside
  // the range the result is zero.
  DoubleField evolve(const SliceData& init, int it0, int it1,
                     const DoubleField* source = nullptr) const;

  DoubleField retarded(const DoubleField& f) const;
  DoubleField advanced(const DoubleField& f) const;
  DoubleField smap(const DoubleField& f) const;  // advanced - retarded

  // (f1, f2) = i * integral of <f1, R S f2> over the slab.
  cd pairing_volume(const DoubleField& f1, const DoubleField& f2) const;
  cd pairing_volume_pre(const DoubleField& f1, const DoubleField& Sf2) const;
  // Cauchy-surface form at a fixed slice; needs S of both arguments.
  cd pairing_cauchy(const DoubleField& f1, const DoubleField& f2, int slice) const;
  cd pairing_cauchy_pre(const DoubleField& Sf1, const DoubleField& Sf2, int slice) const;

  double seminorm(const DoubleField& f) const;
  double seminorm_pre(const DoubleField& f, const DoubleField& Sf) const;

  // f_tilde = P(phi_minus * S f); supported in the transition band.  The
  // measured relative amplitude outside the band (before it is clamped to
  // zero there) is reported through band_leak.
  DoubleField timeslice_decompose(const DoubleField& f, const PartitionPair& phi,
                                  double* band_leak = nullptr) const;

  int substeps() const { return nsub_; }

 private:
  struct SliceOps;  // per-point RHS matrices on one slice

  void rhs(double tau, const std::vector<Vec4C>& u, const std::vector<RowVec4C>& v,
           const DoubleField* source, std::vector<Vec4C>& du,
           std::vector<RowVec4C>& dv) const;
  void blend(double tau, std::vector<Mat4C>& M1, std::vector<Mat4C>& M2,
             std::vector<Mat4C>& N1, std::vector<Mat4C>& N2,
             std::vector<Mat4C>& Gti) const;

  std::shared_ptr<const Geometry> geo_;
  SolverConfig cfg_;
  int nsub_ = 1;
  bool static_metric_ = false;
  // per grid point
  std::vector<Mat4C> M1_, M2_, N1_, N2_, Gtinv_;
};

}  // namespace spinorlab::solver
