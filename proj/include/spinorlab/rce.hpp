#pragma once

#include <array>
#include <map>
#include <memory>
#include <optional>

#include "spinorlab/solver.hpp"

namespace spinorlab::rce {

using fields::CospinorField;
using fields::DoubleField;
using fields::SpinorField;
using geometry::Geometry;
using geometry::MetricFamily;
using solver::PartitionPair;
using solver::Propagator;
using solver::SolverConfig;

// Compactly supported metric deformation between two Cauchy bands.
// chi_minus / chi_plus are the past-cutoffs (1 in the past, 0 in the future)
// whose transitions lie inside the bands N- and N+.
struct DeformationSetup {
  MetricFamily family;
  SolverConfig cfg;
  PartitionPair band_minus;  // transition strip inside N-
  PartitionPair band_plus;   // transition strip inside N+

  DeformationSetup(MetricFamily fam, SolverConfig cfg_, PartitionPair bm, PartitionPair bp);

  const Geometry& base() const { return *geo0_; }
  const Propagator& base_prop() const { return *prop0_; }
  // geometry and propagator of g0 + eps*h (cached per eps)
  const Propagator& prop(double eps) const;

  // d(e^a_mu)/d eps at eps = 0 of the Gram-Schmidt tetrad family, optionally
  // rotated by exp(eps * spin_lift(gen)).
  std::vector<Mat4R> delta_einv(const clifford::LieAlgebraElement* gen = nullptr) const;

 private:
  std::shared_ptr<const Geometry> geo0_;
  std::shared_ptr<Propagator> prop0_;
  mutable std::map<long long, std::shared_ptr<Propagator>> cache_;
  mutable std::map<long long, std::shared_ptr<const Geometry>> gcache_;
};

// Scalar smearing of the point-split stress tensor.
struct StressSmearing {
  std::vector<double> h;  // scalar test function on the grid
};

// Both assemblies of the smeared stress-energy commutator with B(f) as
// one-particle vectors, indexed by the symmetric frame pair (a,b).
struct StressVectors {
  std::array<DoubleField, 16> lhs;  // index 4a + b, symmetrised in (a,b)
  std::array<DoubleField, 16> rhs;
  double rel_seminorm(const Propagator& prop, int a, int b) const;
  double max_rel_seminorm(const Propagator& prop) const;
};

// LHS: four-term anticommutator expansion with frame-component contractions;
// RHS: the grouped double-field assembly on S R f.
StressVectors stress_commutator(const Propagator& prop, const DoubleField& f,
                                const StressSmearing& h);

// T_g f = P_g chi+ S_g P_0 chi- S_0 f, with the band cutoffs of the setup.
DoubleField rce_map(const DeformationSetup& setup, double eps, const DoubleField& f,
                    double* band_leak = nullptr);

enum class VarMethod { FiniteDiff, ClosedForm };

// Variation of the slash operator along the metric family, applied to a fixed
// field.  FiniteDiff central-differences the full operator at +-eps_fd; the
// closed form evaluates the six-term expression from the base geometry, the
// metric direction h and the tetrad family derivative.
CospinorField dirac_variation(const DeformationSetup& setup, const CospinorField& v,
                              VarMethod method, double eps_fd,
                              const std::vector<Mat4R>* deinv = nullptr);
SpinorField dirac_variation(const DeformationSetup& setup, const SpinorField& u,
                            VarMethod method, double eps_fd,
                            const std::vector<Mat4R>* deinv = nullptr);

// The two P_c-image terms of the closed form, for the term-level ledger.
struct VarLedger {
  CospinorField pc_image_frame;  // P_c(de-term)
  CospinorField pc_image_trace;  // P_c(trace-term)
  CospinorField onshell_frame;   // de-term multiplying P_c v
  CospinorField onshell_trace;   // trace-term multiplying P_c v
};
VarLedger var_ledger_terms(const DeformationSetup& setup, const CospinorField& v,
                           const std::vector<Mat4R>* deinv = nullptr);

// delta(beta B0(f)) compared against B0(-i R delta(slash) S0 f).
struct VarRceReport {
  DoubleField lhs;   // (T_{+eps} f - T_{-eps} f) / (2 eps)
  DoubleField rhs;   // -i R delta(slash) S0 f
  double rel_seminorm;  // best over sign; sign reported below
  int sign;             // +1 when lhs ~ +rhs
};
VarRceReport verify_var_rce(const DeformationSetup& setup, const DoubleField& f, double eps);

// Directional form of the stress-commutator theorem: the eps-derivative of
// the relative Cauchy evolution against (-i/2) e^a e^b [T_ab, B(f)]
// contracted with the direction delta g^{alpha beta} = -h^{alpha beta}.
struct ThmRceReport {
  double rel_seminorm;
  int sign;            // sign that achieved equality
  double lhs_norm, rhs_norm;
};
ThmRceReport verify_thm_rce(const DeformationSetup& setup, const DoubleField& f, double eps);

// Classical checks ---------------------------------------------------------

// T_{mu nu} of a classical solution and the coincidence limit of the
// point-split kernel; returns their max deviation.
double classical_stress_coincidence(const Geometry& geo, const SpinorField& psi);

// | dS/d(n-directional derivative) + i psi^+ nslash | on a slice.
double momentum_formula_residual(const Geometry& geo, const SpinorField& psi, int slice);

}  // namespace spinorlab::rce
