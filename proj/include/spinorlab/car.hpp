#pragma once

#include <Eigen/Sparse>
#include <memory>
#include <vector>

#include "spinorlab/solver.hpp"

namespace spinorlab::car {

using fields::DoubleField;
using geometry::Geometry;
using solver::Propagator;
using SparseOp = Eigen::SparseMatrix<cd>;

// Ordered family of compactly supported double test sections on one slab.
struct TestFamily {
  std::vector<DoubleField> members;
  std::shared_ptr<const Geometry> geo;
};

// A formal one-particle vector: a concrete double section compared through
// the pairing seminorm (equality in the field algebra is seminorm equality).
struct OnePartVector {
  DoubleField field;
  double seminorm(const Propagator& prop) const { return prop.seminorm(field); }
};

// Finite CAR system over the span of a test family.
//
// The family is closed under the Dirac adjoint, the Gram form of the pairing
// is diagonalised, null directions (the dynamics ideal) are dropped, and the
// quotient carries the antiunitary involution f -> f^+.  Its fixed vectors
// give self-adjoint Clifford generators mu_alpha represented on the fermionic
// Fock space of the reduced modes; B(f) = sum_alpha (m_alpha, f) mu_alpha.
class CarSystem {
 public:
  CarSystem(const TestFamily& family, const Propagator& prop, double null_threshold = 1e-10);

  int rank() const { return rank_; }
  std::size_t dim() const { return std::size_t{1} << rank_; }
  const MatXC& gram() const { return gram_; }
  const Propagator& propagator() const { return *prop_; }

  // Smeared field operators.  B solves S f internally for sections outside
  // the prepared family span.
  SparseOp B(const DoubleField& f) const;
  SparseOp B_member(int i) const;  // for the i-th original family member
  SparseOp psi(const fields::CospinorField& v) const;
  SparseOp psi_plus(const fields::SpinorField& u) const;

  // Span forms: f = sum_i c_i member_i evaluated through the stored Gram, so
  // operator identities close at the numerical rank level rather than at the
  // solver level.
  SparseOp B_span(const VecXC& c) const;
  cd pair_span(const VecXC& c, const VecXC& d) const;
  VecXC span_adjoint(const VecXC& c) const;  // coordinates of (sum c_i F_i)^+

  SparseOp annihilator(int k) const;
  SparseOp parity() const;

  // (f, g) through the solver (for convenience of identity checks).
  cd pair(const DoubleField& f, const DoubleField& g) const;

  double op_norm(const SparseOp& op) const;  // 2-norm by power iteration

  // Verified construction residuals.
  double car_identity_residual() const;   // {B(e_k)^*, B(e_l)} - delta
  double gamma_fix_residual() const;      // Gamma m_alpha - m_alpha
  double star_structure_residual() const; // B(F_j)^* - B(F_j^+)

 private:
  VecXC coefficients(const DoubleField& f) const;  // x_alpha = (m_alpha, f)
  SparseOp from_coefficients(const VecXC& x) const;

  std::shared_ptr<const Geometry> geo_;
  const Propagator* prop_;
  std::vector<DoubleField> extended_;   // family + adjoints
  std::vector<DoubleField> sext_;       // S of each extended member
  MatXC gram_;                          // Gram of the extended family
  int rank_ = 0;
  MatXC maj_coeff_;                     // extended -> m_alpha coefficients
  std::vector<SparseOp> a_;             // Jordan-Wigner annihilators
  std::vector<SparseOp> mu_;            // (a + a^dag)/sqrt(2)
  SparseOp parity_;
};

// residual of [B(f1)B(f2), B(f3)] = (f2^+, f3) B(f1) - (f1^+, f3) B(f2),
// normalised by the scale of the right-hand side.
double causality_check(const CarSystem& sys, const DoubleField& f1, const DoubleField& f2,
                       const DoubleField& f3);

// Even/odd split by conjugation with the Fock parity.
std::pair<SparseOp, SparseOp> parity_split(const CarSystem& sys, const SparseOp& op);

// f = f_plus + f_minus with R f^{c+} = +- f on the parts.
std::pair<DoubleField, DoubleField> majorana_split(const Geometry& geo, const DoubleField& f);

// Quasi-free state from positive/negative frequency splitting of the spatial
// Dirac Hamiltonian on a static slab.
struct QuasiFreeState {
  MatXC W;            // two-point matrix on the family
  MatXC state_psd;    // matrix omega_2(f_i^+, f_j), PSD for a state
  double hermiticity_residual;  // data Hamiltonian vs the Cauchy inner product
  int n_positive;     // dimension of the positive-frequency subspace
};

QuasiFreeState vacuum_state(const TestFamily& family, const Propagator& prop, int slice = -1);

}  // namespace spinorlab::car
