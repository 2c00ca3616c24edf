#pragma once

#include <array>
#include <optional>

#include "spinorlab/types.hpp"
#include "spinorlab/util.hpp"

namespace spinorlab::clifford {

// A concrete 4x4 complex representation of the Dirac algebra in signature
// (1,-1,-1,-1).  gamma[a] are the generators; gamma_upper raises the frame
// index with eta.
struct DiracRep {
  std::array<Mat4C, 4> gamma;

  Mat4C gamma_upper(int a) const { return kEtaDiag[a] * gamma[a]; }
  Mat4C gamma5() const { return gamma[0] * gamma[1] * gamma[2] * gamma[3]; }

  // Max entrywise residual of gamma_a gamma_b + gamma_b gamma_a - 2 eta_ab.
  double clifford_residual() const;
};

// The chiral representation with Pauli blocks.
DiracRep standard_rep();

Mat2C pauli(int i);  // i = 1,2,3

// 4x4 real Lorentz matrix with eta-orthogonality helpers.
struct LorentzMatrix {
  Mat4R lambda;

  double orthogonality_residual() const;  // || L^T eta L - eta ||_max
  bool is_proper(double tol = 1e-8) const;
  bool is_orthochronous() const { return lambda(0, 0) > 0.0; }
};

// eta-antisymmetric generator lambda^b_a of the Lorentz algebra,
// stored as the matrix lambda(b, a).
struct LieAlgebraElement {
  Mat4R lambda;

  double antisymmetry_residual() const;  // || lambda_ba + lambda_ab ||_max

  // Boost generators k = 0,1,2 (t-x, t-y, t-z) and rotations k = 3,4,5
  // (x-y, x-z, y-z).
  static LieAlgebraElement basis(int k);
};

// Adjoint/charge-conjugation matrices attached to a representation.
struct PairingMatrices {
  Mat4C A;
  Mat4C C;

  Mat4C Ainv() const { return A.inverse(); }
  Mat4C Cinv() const { return C.inverse(); }
};

// Residuals of both trace identities, maximised over all index tuples.
struct TraceReport {
  double two_gamma;   // Tr(g_a g_b) - 4 eta_ab
  double four_gamma;  // Tr([g_b,g_c] g_d g_a) - 8(eta_cd eta_ba - eta_bd eta_ca)
  double max() const { return two_gamma > four_gamma ? two_gamma : four_gamma; }
};

TraceReport trace_identities_check(const DiracRep& rep);

// Solves rep2.gamma_a = L rep1.gamma_a L^{-1} for all a via the null space of
// the stacked 64x16 system.  L is normalised to unit Frobenius norm with the
// first nonzero entry (row-major) real positive.  Throws NoIntertwiner /
// AmbiguousIntertwiner on unexpected null-space dimension.
Mat4C find_intertwiner(const DiracRep& rep1, const DiracRep& rep2);

// Lambda^a_b(S) = (1/4) Tr(gamma^a S gamma_b S^{-1}).
LorentzMatrix covering_map(const DiracRep& rep, const Mat4C& S);

// s = (1/4) lambda^b_a gamma_b gamma^a, the inverse of d Lambda at 1.
Mat4C spin_lift(const DiracRep& rep, const LieAlgebraElement& lam);

// dLambda(s)^a_b = (1/4) Tr([gamma_b, gamma^a] s).
LieAlgebraElement dlambda(const DiracRep& rep, const Mat4C& s);

// det S = 1 and S gamma_a S^{-1} stays in the real span of the gamma's,
// decided by expansion in the 16-element Clifford basis.
bool is_pin_element(const DiracRep& rep, const Mat4C& S, double tol = 1e-8);

// A = K^* A0 K, C = conj(K)^{-1} C0 K with K the intertwiner to the standard
// representation; A rescaled so its largest-magnitude eigenvalue is 1, C
// rescaled by a phase so conj(C) C = I.
PairingMatrices pairing_matrices(const DiracRep& rep);

// Pointwise adjoint and charge conjugation maps.
RowVec4C adjoint_spinor(const Vec4C& z, const PairingMatrices& pm);
Vec4C adjoint_cospinor(const RowVec4C& w, const PairingMatrices& pm);
Vec4C charge_conj_spinor(const Vec4C& z, const PairingMatrices& pm);
RowVec4C charge_conj_cospinor(const RowVec4C& w, const PairingMatrices& pm);

// Pade scaling-and-squaring matrix exponentials.
Mat4C expm(const Mat4C& m);
Mat4R expm(const Mat4R& m);

// Random eta-antisymmetric generator with entries of size ~scale.
LieAlgebraElement random_generator(Rng& rng, double scale);

// Random invertible matrix with singular values in [0.5, 2].
Mat4C random_invertible(Rng& rng);

// rep conjugated by U.
DiracRep conjugate_rep(const DiracRep& rep, const Mat4C& U);

}  // namespace spinorlab::clifford
