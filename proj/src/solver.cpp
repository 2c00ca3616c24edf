#include "spinorlab/solver.hpp"

#include <algorithm>
#include <cmath>

namespace spinorlab::solver {

namespace {
const cd kI(0.0, 1.0);

// Lagrange weights on 4 consecutive slices around time tau.
struct TimeStencil {
  int j0;
  double w[4];
  bool exact;  // tau coincides with slice j0 + k for a single k
  int exact_k;
};

TimeStencil time_stencil(const Grid& g, double tau) {
  TimeStencil st{};
  const double dt = g.dt();
  int jc = static_cast<int>(std::floor(tau / dt));
  st.j0 = std::clamp(jc - 1, 0, g.nt - 4);
  st.exact = false;
  for (int k = 0; k < 4; ++k) {
    const double tk = g.t(st.j0 + k);
    if (std::abs(tau - tk) < 1e-12 * std::max(1.0, std::abs(tau))) {
      st.exact = true;
      st.exact_k = k;
    }
  }
  for (int k = 0; k < 4; ++k) {
    double w = 1.0;
    const double tk = g.t(st.j0 + k);
    for (int l = 0; l < 4; ++l) {
      if (l == k) continue;
      const double tl = g.t(st.j0 + l);
      w *= (tau - tl) / (tk - tl);
    }
    st.w[k] = w;
  }
  return st;
}

}  // namespace

bool Cone::inside(double x, int it, double collar) const {
  const int k = it - it0;
  const int idx = k >= 0 ? k : -k;
  if (idx >= static_cast<int>(lo.size()) || !tracked[idx]) return false;
  if (hi[idx] - lo[idx] >= period) return true;
  for (int w = -1; w <= 1; ++w) {
    const double xs = x + w * period;
    if (xs >= lo[idx] - collar && xs <= hi[idx] + collar) return true;
  }
  return false;
}

namespace {

// characteristic speeds of the (t,x) block
void char_speeds(const MetricSlab& slab, double t, double x, double& vl, double& vr) {
  const Grid& g = slab.grid;
  // bilinear interpolation
  const double ft = std::clamp(t / g.dt(), 0.0, static_cast<double>(g.nt - 1));
  const int it = std::min(static_cast<int>(ft), g.nt - 2);
  const double at = ft - it;
  const double fx = x / g.dx();
  const int ix = static_cast<int>(std::floor(fx));
  const double ax = fx - ix;
  auto val = [&](const std::vector<double>& c) {
    const int i0 = g.wrap(ix), i1 = g.wrap(ix + 1);
    const double c00 = c[g.idx(it, i0)], c01 = c[g.idx(it, i1)];
    const double c10 = c[g.idx(it + 1, i0)], c11 = c[g.idx(it + 1, i1)];
    return (1 - at) * ((1 - ax) * c00 + ax * c01) + at * ((1 - ax) * c10 + ax * c11);
  };
  const double gtt = val(slab.gtt), gtx = val(slab.gtx), gxx = val(slab.gxx);
  const double disc = std::sqrt(std::max(0.0, gtx * gtx - gtt * gxx));
  const double r1 = (-gtx + disc) / gxx;
  const double r2 = (-gtx - disc) / gxx;
  vl = std::min(r1, r2);
  vr = std::max(r1, r2);
}

Cone trace_cone(const MetricSlab& slab, int it0, double xa, double xb, int dir) {
  const Grid& g = slab.grid;
  Cone cone;
  cone.it0 = it0;
  cone.period = g.L;
  const int nsl = dir > 0 ? g.nt - it0 : it0 + 1;
  cone.lo.assign(nsl, 0.0);
  cone.hi.assign(nsl, 0.0);
  cone.tracked.assign(nsl, false);
  double lo = xa, hi = xb;
  cone.lo[0] = lo;
  cone.hi[0] = hi;
  cone.tracked[0] = true;
  const double h = dir * g.dt();
  for (int k = 1; k < nsl; ++k) {
    const double t = g.t(it0 + dir * (k - 1));
    // RK4 for dx/dt = v(t,x); expanding edge speeds depend on direction
    auto edge_speed = [&](double t_, double x_, bool left_edge) {
      double vl, vr;
      char_speeds(slab, t_, std::fmod(x_ + 10.0 * g.L, g.L), vl, vr);
      if (dir > 0) return left_edge ? vl : vr;
      return left_edge ? vr : vl;
    };
    auto rk4 = [&](double x0, bool left_edge) {
      const double k1 = edge_speed(t, x0, left_edge);
      const double k2 = edge_speed(t + 0.5 * h, x0 + 0.5 * h * k1, left_edge);
      const double k3 = edge_speed(t + 0.5 * h, x0 + 0.5 * h * k2, left_edge);
      const double k4 = edge_speed(t + h, x0 + h * k3, left_edge);
      return x0 + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    };
    lo = rk4(lo, true);
    hi = rk4(hi, false);
    if (hi - lo > g.L) {
      lo = 0.0;
      hi = g.L;
    }
    cone.lo[k] = lo;
    cone.hi[k] = hi;
    cone.tracked[k] = true;
  }
  return cone;
}

}  // namespace

Cone forward_cone(const MetricSlab& slab, int it0, double xa, double xb) {
  return trace_cone(slab, it0, xa, xb, +1);
}

Cone backward_cone(const MetricSlab& slab, int it0, double xa, double xb) {
  return trace_cone(slab, it0, xa, xb, -1);
}

std::optional<std::pair<double, double>> support_arc(const Grid& g, const DoubleField& f,
                                                     double tol_rel) {
  const double m = fields::max_abs(f);
  if (m == 0.0) return std::nullopt;
  std::vector<bool> occ(g.nx, false);
  for (int ix = 0; ix < g.nx; ++ix) {
    for (int it = 0; it < g.nt; ++it) {
      const std::size_t p = g.idx(it, ix);
      if (f.u.d[p].cwiseAbs().maxCoeff() > tol_rel * m ||
          f.v.d[p].cwiseAbs().maxCoeff() > tol_rel * m) {
        occ[ix] = true;
        break;
      }
    }
  }
  // find the largest empty circular gap; the support arc is its complement
  int best_gap = -1, best_start = 0;
  for (int s = 0; s < g.nx; ++s) {
    if (occ[s]) continue;
    int len = 0;
    int i = s;
    while (!occ[i] && len < g.nx) {
      ++len;
      i = (i + 1) % g.nx;
    }
    if (len > best_gap) {
      best_gap = len;
      best_start = s;
    }
  }
  if (best_gap <= 0) return std::make_pair(0.0, g.L);  // fully occupied
  const int arc_start = (best_start + best_gap) % g.nx;
  const int arc_len = g.nx - best_gap;
  const double xa = g.x(arc_start);
  const double xb = xa + (arc_len - 1) * g.dx();
  return std::make_pair(xa, xb);
}

std::optional<std::pair<int, int>> support_slices(const Grid& g, const DoubleField& f,
                                                  double tol_rel) {
  const double m = fields::max_abs(f);
  if (m == 0.0) return std::nullopt;
  int lo = -1, hi = -1;
  for (int it = 0; it < g.nt; ++it) {
    if (fields::max_abs_slice(f, g, it) > tol_rel * m) {
      if (lo < 0) lo = it;
      hi = it;
    }
  }
  if (lo < 0) return std::nullopt;
  return std::make_pair(lo, hi);
}

Propagator::Propagator(std::shared_ptr<const Geometry> geo, SolverConfig cfg)
    : geo_(std::move(geo)), cfg_(cfg) {
  const Grid& g = geo_->slab.grid;
  if (cfg_.cfl > 0.5 + 1e-12) throw CflViolation("CFL number exceeds 0.5");
  const double vmax = geo_->slab.max_char_speed();
  const double dt_max = cfg_.cfl * g.dx() / std::max(vmax, 1e-12);
  nsub_ = std::max(1, static_cast<int>(std::ceil(g.dt() / dt_max - 1e-12)));
  static_metric_ = geo_->slab.is_static();

  const std::size_t n = g.size();
  for (std::size_t p = 0; p < n; ++p)
    if (geo_->slab.itt[p] < 1e-12)
      throw SingularGammaT("gamma^t is singular somewhere on the slab");

  M1_.resize(n);
  M2_.resize(n);
  N1_.resize(n);
  N2_.resize(n);
  Gtinv_.resize(n);
  const auto& rep = geo_->rep;
  parallel_for(n, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t p = lo; p < hi; ++p) {
      Mat4C Gt = Mat4C::Zero(), Gx = Mat4C::Zero(), Gs = Mat4C::Zero(), Hs = Mat4C::Zero();
      for (int a = 0; a < 4; ++a) {
        const Mat4C gu = rep.gamma_upper(a);
        Gt += geo_->tetrad.e[p](a, 0) * gu;
        Gx += geo_->tetrad.e[p](a, 1) * gu;
        Gs += gu * geo_->conn.sigma[p][a];
        Hs += geo_->conn.sigma[p][a] * gu;
      }
      const Mat4C Gti = Gt / geo_->slab.itt[p];  // (gamma^t)^2 = g^tt
      Gtinv_[p] = Gti;
      M1_[p] = Gti * (-kI * cfg_.mass * Mat4C::Identity() - Gs);
      M2_[p] = -Gti * Gx;
      N1_[p] = (kI * cfg_.mass * Mat4C::Identity() + Hs) * Gti;
      N2_[p] = -Gx * Gti;
    }
  });
}

void Propagator::blend(double tau, std::vector<Mat4C>& M1, std::vector<Mat4C>& M2,
                       std::vector<Mat4C>& N1, std::vector<Mat4C>& N2,
                       std::vector<Mat4C>& Gti) const {
  const Grid& g = geo_->slab.grid;
  const int nx = g.nx;
  if (static_metric_) {
    for (int ix = 0; ix < nx; ++ix) {
      const std::size_t p = g.idx(0, ix);
      M1[ix] = M1_[p];
      M2[ix] = M2_[p];
      N1[ix] = N1_[p];
      N2[ix] = N2_[p];
      Gti[ix] = Gtinv_[p];
    }
    return;
  }
  const TimeStencil st = time_stencil(g, tau);
  if (st.exact) {
    const int it = st.j0 + st.exact_k;
    for (int ix = 0; ix < nx; ++ix) {
      const std::size_t p = g.idx(it, ix);
      M1[ix] = M1_[p];
      M2[ix] = M2_[p];
      N1[ix] = N1_[p];
      N2[ix] = N2_[p];
      Gti[ix] = Gtinv_[p];
    }
    return;
  }
  for (int ix = 0; ix < nx; ++ix) {
    Mat4C m1 = Mat4C::Zero(), m2 = Mat4C::Zero(), n1 = Mat4C::Zero(), n2 = Mat4C::Zero(),
          gt = Mat4C::Zero();
    for (int k = 0; k < 4; ++k) {
      const std::size_t p = g.idx(st.j0 + k, ix);
      m1 += st.w[k] * M1_[p];
      m2 += st.w[k] * M2_[p];
      n1 += st.w[k] * N1_[p];
      n2 += st.w[k] * N2_[p];
      gt += st.w[k] * Gtinv_[p];
    }
    M1[ix] = m1;
    M2[ix] = m2;
    N1[ix] = n1;
    N2[ix] = n2;
    Gti[ix] = gt;
  }
}

void Propagator::rhs(double tau, const std::vector<Vec4C>& u, const std::vector<RowVec4C>& v,
                     const DoubleField* source, std::vector<Vec4C>& du,
                     std::vector<RowVec4C>& dv) const {
  const Grid& g = geo_->slab.grid;
  const int nx = g.nx;
  thread_local std::vector<Mat4C> M1, M2, N1, N2, Gti;
  M1.resize(nx);
  M2.resize(nx);
  N1.resize(nx);
  N2.resize(nx);
  Gti.resize(nx);
  blend(tau, M1, M2, N1, N2, Gti);

  std::optional<TimeStencil> src_st;
  if (source) src_st = time_stencil(g, tau);

  const double hx = 12.0 * g.dx();
  for (int ix = 0; ix < nx; ++ix) {
    const int m2i = (ix + nx - 2) % nx, m1i = (ix + nx - 1) % nx, p1 = (ix + 1) % nx,
              p2 = (ix + 2) % nx;
    const Vec4C dux = (-u[p2] + 8.0 * u[p1] - 8.0 * u[m1i] + u[m2i]) / hx;
    const RowVec4C dvx = (-v[p2] + 8.0 * v[p1] - 8.0 * v[m1i] + v[m2i]) / hx;
    du[ix] = M1[ix] * u[ix] + M2[ix] * dux;
    dv[ix] = v[ix] * N1[ix] + dvx * N2[ix];
    if (source) {
      Vec4C su = Vec4C::Zero();
      RowVec4C sv = RowVec4C::Zero();
      for (int k = 0; k < 4; ++k) {
        const std::size_t p = g.idx(src_st->j0 + k, ix);
        su += src_st->w[k] * source->u.d[p];
        sv += src_st->w[k] * source->v.d[p];
      }
      du[ix] += kI * (Gti[ix] * su);
      dv[ix] += (-kI) * (sv * Gti[ix]);
    }
  }
}

DoubleField Propagator::evolve(const SliceData& init, int it0, int it1,
                               const DoubleField* source) const {
  const Grid& g = geo_->slab.grid;
  const int nx = g.nx;
  DoubleField out = DoubleField::zero(g);
  std::vector<Vec4C> u = init.u;
  std::vector<RowVec4C> v = init.v;
  for (int ix = 0; ix < nx; ++ix) {
    out.u.d[g.idx(it0, ix)] = u[ix];
    out.v.d[g.idx(it0, ix)] = v[ix];
  }
  if (it0 == it1) return out;
  const int dir = it1 > it0 ? 1 : -1;
  const double h = dir * g.dt() / nsub_;

  std::vector<Vec4C> k1(nx), k2(nx), k3(nx), k4(nx), ut(nx);
  std::vector<RowVec4C> l1(nx), l2(nx), l3(nx), l4(nx), vt(nx);

  double t = g.t(it0);
  for (int it = it0; it != it1; it += dir) {
    for (int s = 0; s < nsub_; ++s) {
      rhs(t, u, v, source, k1, l1);
      for (int ix = 0; ix < nx; ++ix) {
        ut[ix] = u[ix] + 0.5 * h * k1[ix];
        vt[ix] = v[ix] + 0.5 * h * l1[ix];
      }
      rhs(t + 0.5 * h, ut, vt, source, k2, l2);
      for (int ix = 0; ix < nx; ++ix) {
        ut[ix] = u[ix] + 0.5 * h * k2[ix];
        vt[ix] = v[ix] + 0.5 * h * l2[ix];
      }
      rhs(t + 0.5 * h, ut, vt, source, k3, l3);
      for (int ix = 0; ix < nx; ++ix) {
        ut[ix] = u[ix] + h * k3[ix];
        vt[ix] = v[ix] + h * l3[ix];
      }
      rhs(t + h, ut, vt, source, k4, l4);
      for (int ix = 0; ix < nx; ++ix) {
        u[ix] += h / 6.0 * (k1[ix] + 2.0 * k2[ix] + 2.0 * k3[ix] + k4[ix]);
        v[ix] += h / 6.0 * (l1[ix] + 2.0 * l2[ix] + 2.0 * l3[ix] + l4[ix]);
      }
      t += h;
    }
    t = g.t(it + dir);  // avoid drift
    for (int ix = 0; ix < nx; ++ix) {
      out.u.d[g.idx(it + dir, ix)] = u[ix];
      out.v.d[g.idx(it + dir, ix)] = v[ix];
    }
  }
  return out;
}

DoubleField Propagator::retarded(const DoubleField& f) const {
  const Grid& g = geo_->slab.grid;
  const auto sl = support_slices(g, f);
  if (!sl) return DoubleField::zero(g);
  if (sl->first < 3 || sl->second > g.nt - 4)
    throw SupportTouchesBoundary("source support too close to the t-boundary");
  const int it0 = std::max(0, sl->first - 1);
  return evolve(SliceData::zero(g.nx), it0, g.nt - 1, &f);
}

DoubleField Propagator::advanced(const DoubleField& f) const {
  const Grid& g = geo_->slab.grid;
  const auto sl = support_slices(g, f);
  if (!sl) return DoubleField::zero(g);
  if (sl->first < 3 || sl->second > g.nt - 4)
    throw SupportTouchesBoundary("source support too close to the t-boundary");
  const int it0 = std::min(g.nt - 1, sl->second + 1);
  return evolve(SliceData::zero(g.nx), it0, 0, &f);
}

DoubleField Propagator::smap(const DoubleField& f) const {
  return fields::sub(advanced(f), retarded(f));
}

cd Propagator::pairing_volume_pre(const DoubleField& f1, const DoubleField& Sf2) const {
  const Grid& g = geo_->slab.grid;
  const DoubleField rsf2 = fields::rmap(Sf2);
  const double w0 = g.dt() * g.dx();
  cd acc = 0.0;
  for (std::size_t p = 0; p < g.size(); ++p) {
    const cd t = fields::pair_point(*geo_, f1, rsf2, p);
    if (t != cd(0.0, 0.0)) acc += w0 * geo_->slab.sqrtg[p] * t;
  }
  return kI * acc;
}

cd Propagator::pairing_volume(const DoubleField& f1, const DoubleField& f2) const {
  return pairing_volume_pre(f1, smap(f2));
}

cd Propagator::pairing_cauchy_pre(const DoubleField& Sf1, const DoubleField& Sf2,
                                  int slice) const {
  const Grid& g = geo_->slab.grid;
  cd acc = 0.0;
  const Mat4C A = geo_->pm.A;
  const Mat4C Ainv = geo_->pm.Ainv();
  for (int ix = 0; ix < g.nx; ++ix) {
    const std::size_t p = g.idx(slice, ix);
    const Mat4C ns = geo_->nslash(p);
    const cd t1 = (Sf1.u.d[p].adjoint() * A * ns * Sf2.u.d[p])(0, 0);
    const cd t2 = (Sf2.v.d[p] * ns * Ainv * Sf1.v.d[p].adjoint())(0, 0);
    acc += g.dx() * geo_->slab.sqrth[p] * (t1 + t2);
  }
  return acc;
}

cd Propagator::pairing_cauchy(const DoubleField& f1, const DoubleField& f2, int slice) const {
  return pairing_cauchy_pre(smap(f1), smap(f2), slice);
}

double Propagator::seminorm(const DoubleField& f) const {
  return seminorm_pre(f, smap(f));
}

double Propagator::seminorm_pre(const DoubleField& f, const DoubleField& Sf) const {
  const cd q = pairing_volume_pre(f, Sf);
  return std::sqrt(std::max(0.0, q.real()));
}

DoubleField Propagator::timeslice_decompose(const DoubleField& f, const PartitionPair& phi,
                                            double* band_leak) const {
  const Grid& g = geo_->slab.grid;
  if (phi.t_hi - phi.t_lo < 8.0 * g.dt())
    throw BandTooNarrow("partition transition band narrower than 8 time steps");
  const DoubleField sf = smap(f);
  std::vector<double> w(g.size());
  for (int it = 0; it < g.nt; ++it) {
    const double pm = phi.phi_minus(g.t(it));
    for (int ix = 0; ix < g.nx; ++ix) w[g.idx(it, ix)] = pm;
  }
  DoubleField ftilde = fields::apply_P(*geo_, fields::mul_scalar_field(sf, w), cfg_.mass);
  // measure and clamp the residual junk outside the transition band
  const double peak = fields::max_abs(ftilde);
  double leak = 0.0;
  for (int it = 0; it < g.nt; ++it) {
    const double t = g.t(it);
    const bool in_band = (t > phi.t_lo - 2.0 * g.dt()) && (t < phi.t_hi + 2.0 * g.dt());
    if (in_band) continue;
    leak = std::max(leak, fields::max_abs_slice(ftilde, g, it));
    for (int ix = 0; ix < g.nx; ++ix) {
      ftilde.u.d[g.idx(it, ix)].setZero();
      ftilde.v.d[g.idx(it, ix)].setZero();
    }
  }
  if (band_leak) *band_leak = peak > 0.0 ? leak / peak : 0.0;
  return ftilde;
}

}  // namespace spinorlab::solver
