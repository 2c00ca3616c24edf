#include "spinorlab/clifford.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>

namespace spinorlab::clifford {

namespace {
const cd kI(0.0, 1.0);
}

Mat2C pauli(int i) {
  Mat2C s;
  switch (i) {
    case 1:
      s << 0, 1, 1, 0;
      break;
    case 2:
      s << 0, -kI, kI, 0;
      break;
    case 3:
      s << 1, 0, 0, -1;
      break;
    default:
      throw SpinorlabError("pauli index out of range");
  }
  return s;
}

DiracRep standard_rep() {
  DiracRep rep;
  const Mat2C id2 = Mat2C::Identity();
  Mat4C g0 = Mat4C::Zero();
  g0.block<2, 2>(0, 2) = id2;
  g0.block<2, 2>(2, 0) = id2;
  rep.gamma[0] = g0;
  for (int i = 1; i <= 3; ++i) {
    Mat4C g = Mat4C::Zero();
    g.block<2, 2>(0, 2) = -pauli(i);
    g.block<2, 2>(2, 0) = pauli(i);
    rep.gamma[i] = g;
  }
  return rep;
}

double DiracRep::clifford_residual() const {
  double worst = 0.0;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      const Mat4C r = gamma[a] * gamma[b] + gamma[b] * gamma[a] -
                      2.0 * eta(a, b) * Mat4C::Identity();
      worst = std::max(worst, r.cwiseAbs().maxCoeff());
    }
  return worst;
}

double LorentzMatrix::orthogonality_residual() const {
  const Mat4R e = eta_matrix();
  return (lambda.transpose() * e * lambda - e).cwiseAbs().maxCoeff();
}

bool LorentzMatrix::is_proper(double tol) const {
  return std::abs(lambda.determinant() - 1.0) < tol;
}

double LieAlgebraElement::antisymmetry_residual() const {
  // lambda_ba = eta_bc lambda^c_a must be antisymmetric.
  const Mat4R low = eta_matrix() * lambda;
  return (low + low.transpose()).cwiseAbs().maxCoeff();
}

LieAlgebraElement LieAlgebraElement::basis(int k) {
  // lambda_ab antisymmetric, raised to lambda^b_a = eta^bc lambda_ca.
  Mat4R low = Mat4R::Zero();
  struct Pair {
    int i, j;
  };
  static const Pair pairs[6] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
  if (k < 0 || k >= 6) throw SpinorlabError("generator index out of range");
  low(pairs[k].i, pairs[k].j) = 1.0;
  low(pairs[k].j, pairs[k].i) = -1.0;
  LieAlgebraElement lam;
  lam.lambda = eta_matrix() * low;  // eta^{bc} lambda_{ca}
  return lam;
}

TraceReport trace_identities_check(const DiracRep& rep) {
  TraceReport rep_out{0.0, 0.0};
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      const cd tr = (rep.gamma[a] * rep.gamma[b]).trace();
      rep_out.two_gamma = std::max(rep_out.two_gamma, std::abs(tr - 4.0 * eta(a, b)));
    }
  for (int b = 0; b < 4; ++b)
    for (int c = 0; c < 4; ++c) {
      const Mat4C comm = rep.gamma[b] * rep.gamma[c] - rep.gamma[c] * rep.gamma[b];
      for (int d = 0; d < 4; ++d)
        for (int a = 0; a < 4; ++a) {
          const cd tr = (comm * rep.gamma[d] * rep.gamma[a]).trace();
          const double expect = 8.0 * (eta(c, d) * eta(b, a) - eta(b, d) * eta(c, a));
          rep_out.four_gamma = std::max(rep_out.four_gamma, std::abs(tr - expect));
        }
    }
  return rep_out;
}

Mat4C find_intertwiner(const DiracRep& rep1, const DiracRep& rep2) {
  // Stack gamma2_a L - L gamma1_a = 0 as a 64x16 system on vec(L).
  Eigen::Matrix<cd, 64, 16> sys = Eigen::Matrix<cd, 64, 16>::Zero();
  for (int a = 0; a < 4; ++a) {
    // vec is row-major here: L(i,j) -> index 4i+j.
    // (gamma2 L)(i,j) = gamma2(i,k) L(k,j); (L gamma1)(i,j) = L(i,k) gamma1(k,j).
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        const int row = 16 * a + 4 * i + j;
        for (int k = 0; k < 4; ++k) {
          sys(row, 4 * k + j) += rep2.gamma[a](i, k);
          sys(row, 4 * i + k) -= rep1.gamma[a](k, j);
        }
      }
  }
  Eigen::JacobiSVD<Eigen::Matrix<cd, 64, 16>> svd(sys, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double smax = sv(0);
  int nullity = 0;
  for (int k = 0; k < 16; ++k)
    if (sv(k) <= 1e-10 * smax) ++nullity;
  if (nullity == 0) throw NoIntertwiner("no intertwiner: null space is trivial");
  if (nullity > 1)
    throw AmbiguousIntertwiner("intertwiner not unique: null-space dimension " +
                               std::to_string(nullity));
  const VecXC vecL = svd.matrixV().col(15);
  Mat4C L;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) L(i, j) = vecL(4 * i + j);
  if (std::abs(L.determinant()) < 1e-12)
    throw NoIntertwiner("null vector is not invertible");
  // Unit Frobenius norm, first nonzero row-major entry real positive.
  L /= L.norm();
  for (int i = 0; i < 4; ++i) {
    bool done = false;
    for (int j = 0; j < 4; ++j) {
      if (std::abs(L(i, j)) > 1e-9) {
        L *= std::conj(L(i, j)) / std::abs(L(i, j));
        done = true;
        break;
      }
    }
    if (done) break;
  }
  return L;
}

LorentzMatrix covering_map(const DiracRep& rep, const Mat4C& S) {
  if (std::abs(S.determinant()) < 1e-12)
    throw SingularElement("covering map needs an invertible element");
  const Mat4C Sinv = S.inverse();
  LorentzMatrix out;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      const cd tr = (rep.gamma_upper(a) * S * rep.gamma[b] * Sinv).trace();
      out.lambda(a, b) = 0.25 * tr.real();
    }
  return out;
}

Mat4C spin_lift(const DiracRep& rep, const LieAlgebraElement& lam) {
  Mat4C s = Mat4C::Zero();
  for (int b = 0; b < 4; ++b)
    for (int a = 0; a < 4; ++a)
      s += 0.25 * lam.lambda(b, a) * rep.gamma[b] * rep.gamma_upper(a);
  return s;
}

LieAlgebraElement dlambda(const DiracRep& rep, const Mat4C& s) {
  LieAlgebraElement out;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      const Mat4C comm = rep.gamma[b] * rep.gamma_upper(a) - rep.gamma_upper(a) * rep.gamma[b];
      out.lambda(a, b) = 0.25 * (comm * s).trace().real();
    }
  return out;
}

namespace {

// The 16-element basis I, g_a, g_a g_b (a<b), g_a g_b g_c (a<b<c), g5.
std::array<Mat4C, 16> clifford_basis(const DiracRep& rep) {
  std::array<Mat4C, 16> basis;
  int n = 0;
  basis[n++] = Mat4C::Identity();
  for (int a = 0; a < 4; ++a) basis[n++] = rep.gamma[a];
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b) basis[n++] = rep.gamma[a] * rep.gamma[b];
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b)
      for (int c = b + 1; c < 4; ++c) basis[n++] = rep.gamma[a] * rep.gamma[b] * rep.gamma[c];
  basis[n++] = rep.gamma5();
  return basis;
}

}  // namespace

bool is_pin_element(const DiracRep& rep, const Mat4C& S, double tol) {
  const double det_abs = std::abs(S.determinant());
  if (det_abs < 1e-12) throw SingularElement("pin test needs an invertible element");
  if (std::abs(S.determinant() - cd(1.0, 0.0)) > tol) return false;
  const auto basis = clifford_basis(rep);
  Eigen::Matrix<cd, 16, 16> M;
  for (int k = 0; k < 16; ++k)
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) M(4 * i + j, k) = basis[k](i, j);
  const auto lu = M.fullPivLu();
  const Mat4C Sinv = S.inverse();
  for (int a = 0; a < 4; ++a) {
    const Mat4C conj_a = S * rep.gamma[a] * Sinv;
    Eigen::Matrix<cd, 16, 1> rhs;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) rhs(4 * i + j) = conj_a(i, j);
    const Eigen::Matrix<cd, 16, 1> coef = lu.solve(rhs);
    for (int k = 0; k < 16; ++k) {
      const bool vector_slot = (k >= 1 && k <= 4);
      if (vector_slot) {
        if (std::abs(coef(k).imag()) > tol) return false;
      } else {
        if (std::abs(coef(k)) > tol) return false;
      }
    }
  }
  return true;
}

PairingMatrices pairing_matrices(const DiracRep& rep) {
  const DiracRep std_rep = standard_rep();
  const Mat4C K = find_intertwiner(rep, std_rep);
  const Mat4C A0 = std_rep.gamma[0];
  const Mat4C C0 = std_rep.gamma[2];
  Mat4C A = K.adjoint() * A0 * K;
  Mat4C C = K.conjugate().inverse() * C0 * K;
  // Scale A so its largest-magnitude eigenvalue is 1 (A is Hermitian and
  // A gamma(n) > 0 for future timelike n, so no sign fix is needed).
  Eigen::SelfAdjointEigenSolver<Mat4C> es(0.5 * (A + A.adjoint()));
  const double amax = es.eigenvalues().cwiseAbs().maxCoeff();
  A /= amax;
  // conj(C) C is a scalar multiple of I by construction; normalise the phase
  // so it is exactly the identity.
  const Mat4C CC = C.conjugate() * C;
  const cd scale = CC.trace() / 4.0;
  C /= std::sqrt(scale);
  return PairingMatrices{A, C};
}

RowVec4C adjoint_spinor(const Vec4C& z, const PairingMatrices& pm) {
  return z.adjoint() * pm.A;
}

Vec4C adjoint_cospinor(const RowVec4C& w, const PairingMatrices& pm) {
  return pm.A.inverse() * w.adjoint();
}

Vec4C charge_conj_spinor(const Vec4C& z, const PairingMatrices& pm) {
  return pm.C.inverse() * z.conjugate();
}

RowVec4C charge_conj_cospinor(const RowVec4C& w, const PairingMatrices& pm) {
  return w.conjugate() * pm.C;
}

namespace {

template <typename Mat>
Mat expm_impl(const Mat& m) {
  // 13th-order Pade with scaling and squaring.
  const double nrm = m.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  Mat a = m;
  const double theta13 = 5.37;
  if (nrm > theta13) {
    squarings = static_cast<int>(std::ceil(std::log2(nrm / theta13)));
    a /= std::pow(2.0, squarings);
  }
  static const double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                             1187353796428800.0,  129060195264000.0,   10559470521600.0,
                             670442572800.0,      33522128640.0,       1323241920.0,
                             40840800.0,          960960.0,            16380.0,
                             182.0,               1.0};
  const Mat id = Mat::Identity();
  const Mat a2 = a * a;
  const Mat a4 = a2 * a2;
  const Mat a6 = a2 * a4;
  const Mat u = a * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 +
                     b[3] * a2 + b[1] * id);
  const Mat v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 +
                b[0] * id;
  Mat r = (v - u).fullPivLu().solve(v + u);
  for (int k = 0; k < squarings; ++k) r = r * r;
  return r;
}

}  // namespace

Mat4C expm(const Mat4C& m) { return expm_impl<Mat4C>(m); }
Mat4R expm(const Mat4R& m) { return expm_impl<Mat4R>(m); }

LieAlgebraElement random_generator(Rng& rng, double scale) {
  Mat4R low = Mat4R::Zero();
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b) {
      const double x = scale * uniform(rng);
      low(a, b) = x;
      low(b, a) = -x;
    }
  LieAlgebraElement lam;
  lam.lambda = eta_matrix() * low;
  return lam;
}

Mat4C random_invertible(Rng& rng) {
  Mat4C g;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) g(i, j) = cd(uniform(rng), uniform(rng));
  Eigen::JacobiSVD<Mat4C> svd(g, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Vec4C sv;
  for (int i = 0; i < 4; ++i) sv(i) = cd(0.5 + 1.5 * (0.5 + 0.5 * uniform(rng)), 0.0);
  return svd.matrixU() * sv.asDiagonal() * svd.matrixV().adjoint();
}

DiracRep conjugate_rep(const DiracRep& rep, const Mat4C& U) {
  DiracRep out;
  const Mat4C Uinv = U.inverse();
  for (int a = 0; a < 4; ++a) out.gamma[a] = U * rep.gamma[a] * Uinv;
  return out;
}

}  // namespace spinorlab::clifford
