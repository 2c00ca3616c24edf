#include "spinorlab/car.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>

namespace spinorlab::car {

namespace {
const cd kI(0.0, 1.0);

SparseOp sparse_identity(std::size_t dim, cd scale = cd(1.0, 0.0)) {
  SparseOp id(dim, dim);
  id.setIdentity();
  return SparseOp(scale * id);
}

}  // namespace

CarSystem::CarSystem(const TestFamily& family, const Propagator& prop, double null_threshold)
    : geo_(family.geo), prop_(&prop) {
  if (family.members.empty()) throw SpinorlabError("empty test family");

  // close under the adjoint so that the involution acts on the span
  extended_ = family.members;
  for (const auto& f : family.members) extended_.push_back(fields::adjoint(*geo_, f));
  const int n = static_cast<int>(extended_.size());

  sext_.reserve(n);
  for (const auto& f : extended_) sext_.push_back(prop.smap(f));

  gram_.resize(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      gram_(i, j) = prop.pairing_volume_pre(extended_[i], sext_[j]);
  gram_ = 0.5 * (gram_ + gram_.adjoint()).eval();

  Eigen::SelfAdjointEigenSolver<MatXC> es(gram_);
  const double lmax = es.eigenvalues().cwiseAbs().maxCoeff();
  if (es.eigenvalues().minCoeff() < -1e-6 * lmax)
    throw GramNotPsd("Gram form has a significantly negative eigenvalue");
  std::vector<int> kept;
  for (int k = 0; k < n; ++k)
    if (es.eigenvalues()(k) > null_threshold * lmax) kept.push_back(k);
  rank_ = static_cast<int>(kept.size());
  if (rank_ > 14) throw RankTooLarge("reduced CAR rank exceeds 14 modes");

  // orthonormal basis e_k = sum_j onb(j,k) F_j
  MatXC onb(n, rank_);
  for (int k = 0; k < rank_; ++k)
    onb.col(k) = es.eigenvectors().col(kept[k]) / std::sqrt(es.eigenvalues()(kept[k]));

  // antiunitary involution in ONB coordinates: Gamma e_k = sum_l G(l,k) e_l
  // with G(l,k) = (e_l, e_k^+); S(e_k^+) is the adjoint swap of S e_k.
  MatXC G(rank_, rank_);
  std::vector<DoubleField> efield(rank_, fields::DoubleField::zero(geo_->slab.grid));
  std::vector<DoubleField> sefield(rank_, fields::DoubleField::zero(geo_->slab.grid));
  for (int k = 0; k < rank_; ++k) {
    DoubleField acc = fields::DoubleField::zero(geo_->slab.grid);
    DoubleField sacc = fields::DoubleField::zero(geo_->slab.grid);
    for (int j = 0; j < n; ++j) {
      if (std::abs(onb(j, k)) < 1e-15) continue;
      acc = fields::add(acc, fields::scale(extended_[j], onb(j, k)));
      sacc = fields::add(sacc, fields::scale(sext_[j], onb(j, k)));
    }
    efield[k] = std::move(acc);
    sefield[k] = std::move(sacc);
  }
  for (int k = 0; k < rank_; ++k) {
    const DoubleField ek_adj = fields::adjoint(*geo_, efield[k]);
    const DoubleField s_ek_adj = fields::adjoint(*geo_, sefield[k]);
    for (int l = 0; l < rank_; ++l) G(l, k) = prop.pairing_volume_pre(efield[l], s_ek_adj);
    (void)ek_adj;
  }

  // fixed vectors of c -> G conj(c): seeds w and i w projected by c + G conj(c)
  std::vector<VecXC> fixed;
  auto try_add = [&](const VecXC& w) {
    VecXC c = w + G * w.conjugate();
    // orthogonalise against previous (real inner product on the fixed space
    // equals the complex one there)
    for (const auto& m : fixed) c -= m * (m.adjoint() * c)(0, 0);
    const double nrm = c.norm();
    if (nrm > 1e-7) fixed.push_back(c / nrm);
  };
  for (int k = 0; k < rank_ && static_cast<int>(fixed.size()) < rank_; ++k) {
    VecXC w = VecXC::Zero(rank_);
    w(k) = 1.0;
    try_add(w);
    if (static_cast<int>(fixed.size()) < rank_) {
      w(k) = kI;
      try_add(w);
    }
  }
  if (static_cast<int>(fixed.size()) != rank_)
    throw SpinorlabError("could not build a Majorana basis of the reduced space");

  // m_alpha in extended coordinates
  maj_coeff_.resize(n, rank_);
  for (int a = 0; a < rank_; ++a) maj_coeff_.col(a) = onb * fixed[a];

  // Jordan-Wigner ladder operators
  const std::size_t dim = std::size_t{1} << rank_;
  a_.resize(rank_);
  mu_.resize(rank_);
  for (int k = 0; k < rank_; ++k) {
    std::vector<Eigen::Triplet<cd>> trip;
    trip.reserve(dim / 2);
    const std::size_t bit = std::size_t{1} << k;
    for (std::size_t s = 0; s < dim; ++s) {
      if (!(s & bit)) continue;
      int sign = 0;
      for (int j = 0; j < k; ++j) sign ^= static_cast<int>((s >> j) & 1);
      trip.emplace_back(static_cast<int>(s & ~bit), static_cast<int>(s),
                        sign ? cd(-1.0, 0.0) : cd(1.0, 0.0));
    }
    a_[k].resize(dim, dim);
    a_[k].setFromTriplets(trip.begin(), trip.end());
    mu_[k] = SparseOp((a_[k] + SparseOp(a_[k].adjoint())) / std::sqrt(2.0));
  }
  {
    std::vector<Eigen::Triplet<cd>> trip;
    trip.reserve(dim);
    for (std::size_t s = 0; s < dim; ++s) {
      const int pc = __builtin_popcountll(s);
      trip.emplace_back(static_cast<int>(s), static_cast<int>(s),
                        (pc & 1) ? cd(-1.0, 0.0) : cd(1.0, 0.0));
    }
    parity_.resize(dim, dim);
    parity_.setFromTriplets(trip.begin(), trip.end());
  }
}

VecXC CarSystem::coefficients(const DoubleField& f) const {
  const int n = static_cast<int>(extended_.size());
  const DoubleField sf = prop_->smap(f);
  VecXC pf(n);
  for (int j = 0; j < n; ++j) pf(j) = prop_->pairing_volume_pre(extended_[j], sf);
  return maj_coeff_.adjoint() * pf;  // x_alpha = sum_j conj(D(j,alpha)) (F_j, f)
}

SparseOp CarSystem::from_coefficients(const VecXC& x) const {
  SparseOp op(dim(), dim());
  for (int a = 0; a < rank_; ++a) {
    if (std::abs(x(a)) < 1e-300) continue;
    op = SparseOp(op + SparseOp(x(a) * mu_[a]));
  }
  return op;
}

SparseOp CarSystem::B(const DoubleField& f) const { return from_coefficients(coefficients(f)); }

SparseOp CarSystem::B_member(int i) const {
  const int n = static_cast<int>(extended_.size());
  VecXC pf(n);
  for (int j = 0; j < n; ++j) pf(j) = gram_(j, i);
  return from_coefficients(maj_coeff_.adjoint() * pf);
}

SparseOp CarSystem::B_span(const VecXC& c) const {
  const int n = static_cast<int>(extended_.size());
  VecXC cx = VecXC::Zero(n);
  cx.head(c.size()) = c;
  return from_coefficients(maj_coeff_.adjoint() * (gram_ * cx));
}

cd CarSystem::pair_span(const VecXC& c, const VecXC& d) const {
  const int n = static_cast<int>(extended_.size());
  VecXC cx = VecXC::Zero(n), dx = VecXC::Zero(n);
  cx.head(c.size()) = c;
  dx.head(d.size()) = d;
  return (cx.adjoint() * gram_ * dx)(0, 0);
}

VecXC CarSystem::span_adjoint(const VecXC& c) const {
  // (sum_i c_i F_i)^+ = sum_i conj(c_i) F_{i + n/2 mod n} in extended coords
  const int n = static_cast<int>(extended_.size());
  const int half = n / 2;
  VecXC out = VecXC::Zero(n);
  for (int i = 0; i < c.size() && i < n; ++i) {
    const int j = i < half ? i + half : i - half;
    out(j) = std::conj(c(i));
  }
  return out;
}

SparseOp CarSystem::psi(const fields::CospinorField& v) const {
  DoubleField f = fields::DoubleField::zero(geo_->slab.grid);
  f.v = v;
  return B(f);
}

SparseOp CarSystem::psi_plus(const fields::SpinorField& u) const {
  DoubleField f = fields::DoubleField::zero(geo_->slab.grid);
  f.u = u;
  return B(f);
}

SparseOp CarSystem::annihilator(int k) const { return a_.at(k); }
SparseOp CarSystem::parity() const { return parity_; }

cd CarSystem::pair(const DoubleField& f, const DoubleField& g) const {
  return prop_->pairing_volume(f, g);
}

double CarSystem::op_norm(const SparseOp& op) const {
  const SparseOp x = SparseOp(SparseOp(op.adjoint()) * op);
  VecXC v = VecXC::Ones(static_cast<int>(dim()));
  v /= v.norm();
  double lam = 0.0;
  for (int it = 0; it < 300; ++it) {
    VecXC w = x * v;
    const double nw = w.norm();
    if (nw < 1e-300) return 0.0;
    w /= nw;
    const double lam_new = std::real((w.adjoint() * (x * w))(0, 0));
    if (std::abs(lam_new - lam) < 1e-15 * std::max(1.0, lam_new) && it > 3) {
      lam = lam_new;
      break;
    }
    lam = lam_new;
    v = w;
  }
  return std::sqrt(std::max(0.0, lam));
}

double CarSystem::car_identity_residual() const {
  double worst = 0.0;
  for (int a = 0; a < rank_; ++a)
    for (int b = 0; b < rank_; ++b) {
      SparseOp anti = SparseOp(mu_[a] * mu_[b]) + SparseOp(mu_[b] * mu_[a]);
      if (a == b) anti = SparseOp(anti - sparse_identity(dim()));
      worst = std::max(worst, anti.coeffs().size() ? anti.norm() : 0.0);
    }
  return worst;
}

double CarSystem::gamma_fix_residual() const {
  // m_alpha^+ = m_alpha as fields, measured through the Gram form
  double worst = 0.0;
  const int n = static_cast<int>(extended_.size());
  for (int a = 0; a < rank_; ++a) {
    DoubleField m = fields::DoubleField::zero(geo_->slab.grid);
    DoubleField sm = fields::DoubleField::zero(geo_->slab.grid);
    for (int j = 0; j < n; ++j) {
      if (std::abs(maj_coeff_(j, a)) < 1e-15) continue;
      m = fields::add(m, fields::scale(extended_[j], maj_coeff_(j, a)));
      sm = fields::add(sm, fields::scale(sext_[j], maj_coeff_(j, a)));
    }
    const DoubleField diff = fields::sub(fields::adjoint(*geo_, m), m);
    const DoubleField sdiff = fields::sub(fields::adjoint(*geo_, sm), sm);
    worst = std::max(worst, prop_->seminorm_pre(diff, sdiff));
  }
  return worst;
}

double CarSystem::star_structure_residual() const {
  double worst = 0.0;
  const int n = static_cast<int>(extended_.size()) / 2;
  for (int i = 0; i < n; ++i) {
    const SparseOp lhs = SparseOp(B_member(i).adjoint());
    const SparseOp rhs = B_member(i + n);  // the stored adjoint partner
    const SparseOp diff = SparseOp(lhs - rhs);
    const double scale = std::max(1e-300, op_norm(B_member(i)));
    worst = std::max(worst, diff.norm() / scale);
  }
  return worst;
}

double causality_check(const CarSystem& sys, const DoubleField& f1, const DoubleField& f2,
                       const DoubleField& f3) {
  const auto& geo = sys.propagator().geo();
  const SparseOp B1 = sys.B(f1);
  const SparseOp B2 = sys.B(f2);
  const SparseOp B3 = sys.B(f3);
  const SparseOp lhs = SparseOp(SparseOp(B1 * B2) * B3) - SparseOp(B3 * SparseOp(B1 * B2));
  const cd c23 = sys.pair(fields::adjoint(geo, f2), f3);
  const cd c13 = sys.pair(fields::adjoint(geo, f1), f3);
  const SparseOp rhs = SparseOp(c23 * B1) - SparseOp(c13 * B2);
  const double scale = std::max({sys.op_norm(B1), sys.op_norm(B2), sys.op_norm(B3), 1e-30});
  return SparseOp(lhs - rhs).norm() / (scale * scale * scale);
}

std::pair<SparseOp, SparseOp> parity_split(const CarSystem& sys, const SparseOp& op) {
  const SparseOp pi = sys.parity();
  const SparseOp conj = SparseOp(SparseOp(pi * op) * pi);
  return {SparseOp(0.5 * (op + conj)), SparseOp(0.5 * (op - conj))};
}

std::pair<DoubleField, DoubleField> majorana_split(const Geometry& geo, const DoubleField& f) {
  // T f = R (f^c)^+ is a complex-linear involution
  const DoubleField tf = fields::rmap(fields::adjoint(geo, fields::charge_conj(geo, f)));
  const DoubleField fp = fields::scale(fields::add(f, tf), 0.5);
  const DoubleField fm = fields::scale(fields::sub(f, tf), 0.5);
  return {fp, fm};
}

QuasiFreeState vacuum_state(const TestFamily& family, const Propagator& prop, int slice) {
  const Geometry& geo = *family.geo;
  const geometry::Grid& g = geo.slab.grid;
  if (!geo.slab.is_static()) throw NotStatic("vacuum construction needs a static slab");
  if (slice < 0) slice = g.nt / 2;
  const int nx = g.nx;
  const int ndat = 8 * nx;  // 4 spinor + 4 cospinor components per site

  // Cauchy inner product Gram matrix
  MatXC G = MatXC::Zero(ndat, ndat);
  const Mat4C A = geo.pm.A;
  const Mat4C Ainv = geo.pm.Ainv();
  for (int ix = 0; ix < nx; ++ix) {
    const std::size_t p = g.idx(slice, ix);
    const Mat4C ns = geo.nslash(p);
    const double w = g.dx() * geo.slab.sqrth[p];
    G.block<4, 4>(4 * ix, 4 * ix) = w * (A * ns);
    const Mat4C cblock = (ns * Ainv).transpose();
    G.block<4, 4>(4 * (nx + ix), 4 * (nx + ix)) = w * cblock;
  }
  G = 0.5 * (G + G.adjoint()).eval();

  // data Hamiltonian from the slice evolution operator: d/dt d = -i H d
  // spinor block: du = M1 u + M2 dx u;  cospinor block: dv = v N1 + dx v N2
  MatXC rhs = MatXC::Zero(ndat, ndat);
  {
    const auto& rep = geo.rep;
    std::vector<Mat4C> M1(nx), M2(nx), N1(nx), N2(nx);
    for (int ix = 0; ix < nx; ++ix) {
      const std::size_t p = g.idx(slice, ix);
      Mat4C Gt = Mat4C::Zero(), Gx = Mat4C::Zero(), Gs = Mat4C::Zero(), Hs = Mat4C::Zero();
      for (int a = 0; a < 4; ++a) {
        const Mat4C gu = rep.gamma_upper(a);
        Gt += geo.tetrad.e[p](a, 0) * gu;
        Gx += geo.tetrad.e[p](a, 1) * gu;
        Gs += gu * geo.conn.sigma[p][a];
        Hs += geo.conn.sigma[p][a] * gu;
      }
      const Mat4C Gti = Gt / geo.slab.itt[p];
      M1[ix] = Gti * (-kI * prop.config().mass * Mat4C::Identity() - Gs);
      M2[ix] = -Gti * Gx;
      N1[ix] = (kI * prop.config().mass * Mat4C::Identity() + Hs) * Gti;
      N2[ix] = -Gx * Gti;
    }
    const double hx = 12.0 * g.dx();
    auto stencil = [&](int i, int j) -> double {
      const int d = ((j - i) % nx + nx) % nx;
      if (d == 1) return 8.0 / hx;
      if (d == 2) return -1.0 / hx;
      if (d == nx - 1) return -8.0 / hx;
      if (d == nx - 2) return 1.0 / hx;
      return 0.0;
    };
    for (int i = 0; i < nx; ++i) {
      rhs.block<4, 4>(4 * i, 4 * i) += M1[i];
      for (int j = 0; j < nx; ++j) {
        const double s = stencil(i, j);
        if (s != 0.0) rhs.block<4, 4>(4 * i, 4 * j) += s * M2[i];
      }
      // cospinor block acts by right multiplication: flat form is transposed
      rhs.block<4, 4>(4 * (nx + i), 4 * (nx + i)) += N1[i].transpose();
      for (int j = 0; j < nx; ++j) {
        const double s = stencil(i, j);
        if (s != 0.0) rhs.block<4, 4>(4 * (nx + i), 4 * (nx + j)) += s * N2[i].transpose();
      }
    }
  }
  const MatXC H = kI * rhs;

  QuasiFreeState out;
  out.hermiticity_residual =
      (G * H - H.adjoint() * G).norm() / std::max(1e-300, (G * H).norm());

  // G-orthogonal spectral projection onto positive frequencies
  Eigen::LLT<MatXC> llt(G);
  if (llt.info() != Eigen::Success) throw SpinorlabError("Cauchy Gram is not positive definite");
  const MatXC L = llt.matrixL();
  const MatXC Ladj = L.adjoint();
  const MatXC Hstd = Ladj * H * Ladj.inverse();
  Eigen::SelfAdjointEigenSolver<MatXC> es(0.5 * (Hstd + Hstd.adjoint()));
  MatXC Upos(ndat, ndat);
  int npos = 0;
  for (int k = 0; k < ndat; ++k)
    if (es.eigenvalues()(k) > 0.0) Upos.col(npos++) = es.eigenvectors().col(k);
  out.n_positive = npos;
  const MatXC Up = Upos.leftCols(npos);
  const MatXC Ppos = Ladj.inverse() * (Up * Up.adjoint()) * Ladj;  // P in data coords

  // family data from the fundamental solutions
  const int nf = static_cast<int>(family.members.size());
  MatXC D(ndat, nf), GD(ndat, nf);
  for (int i = 0; i < nf; ++i) {
    const DoubleField sf = prop.smap(family.members[i]);
    VecXC d(ndat);
    for (int ix = 0; ix < nx; ++ix) {
      const std::size_t p = g.idx(slice, ix);
      d.segment<4>(4 * ix) = sf.u.d[p];
      for (int c = 0; c < 4; ++c) d(4 * (nx + ix) + c) = sf.v.d[p](c);
    }
    D.col(i) = d;
    // Gamma_D: (phi_s, phi_c) -> (Ainv phi_c^dag, phi_s^dag A)
    VecXC gd(ndat);
    for (int ix = 0; ix < nx; ++ix) {
      const Vec4C ps = d.segment<4>(4 * ix);
      RowVec4C pc;
      for (int c = 0; c < 4; ++c) pc(c) = d(4 * (nx + ix) + c);
      const Vec4C nu = Ainv * pc.adjoint();
      const RowVec4C nv = ps.adjoint() * A;
      gd.segment<4>(4 * ix) = nu;
      for (int c = 0; c < 4; ++c) gd(4 * (nx + ix) + c) = nv(c);
    }
    GD.col(i) = gd;
  }

  out.W = GD.adjoint() * G * (Ppos * D);
  out.state_psd = D.adjoint() * G * (Ppos * D);
  out.state_psd = 0.5 * (out.state_psd + out.state_psd.adjoint()).eval();
  return out;
}

}  // namespace spinorlab::car
