#include "spinorlab/geometry.hpp"

#include <cmath>

#include "spinorlab/util.hpp"

namespace spinorlab::geometry {

void MetricSlab::allocate() {
  const std::size_t n = grid.size();
  gtt.assign(n, 1.0);
  gtx.assign(n, 0.0);
  gxx.assign(n, -1.0);
  gyy.assign(n, -1.0);
  gzz.assign(n, -1.0);
}

void MetricSlab::finalize() {
  const std::size_t n = grid.size();
  itt.resize(n);
  itx.resize(n);
  ixx.resize(n);
  sqrtg.resize(n);
  sqrth.resize(n);
  for (std::size_t p = 0; p < n; ++p) {
    const double det2 = gtt[p] * gxx[p] - gtx[p] * gtx[p];
    if (!(gtt[p] > 0.0) || !(det2 < 0.0) || !(gyy[p] < 0.0) || !(gzz[p] < 0.0))
      throw DegenerateMetric("slab metric is not Lorentzian with temporal t");
    itt[p] = gxx[p] / det2;
    itx[p] = -gtx[p] / det2;
    ixx[p] = gtt[p] / det2;
    if (!(itt[p] > 0.0))
      throw DegenerateMetric("t = const slices are not spacelike (g^tt <= 0)");
    sqrtg[p] = std::sqrt(-det2 * gyy[p] * gzz[p]);
    sqrth[p] = std::sqrt(-gxx[p] * gyy[p] * gzz[p]);
  }
}

Mat4R MetricSlab::g4(std::size_t p) const {
  Mat4R g = Mat4R::Zero();
  g(0, 0) = gtt[p];
  g(0, 1) = g(1, 0) = gtx[p];
  g(1, 1) = gxx[p];
  g(2, 2) = gyy[p];
  g(3, 3) = gzz[p];
  return g;
}

Mat4R MetricSlab::ginv4(std::size_t p) const {
  Mat4R g = Mat4R::Zero();
  g(0, 0) = itt[p];
  g(0, 1) = g(1, 0) = itx[p];
  g(1, 1) = ixx[p];
  g(2, 2) = 1.0 / gyy[p];
  g(3, 3) = 1.0 / gzz[p];
  return g;
}

double MetricSlab::max_char_speed() const {
  double vmax = 0.0;
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const double disc = std::sqrt(gtx[p] * gtx[p] - gtt[p] * gxx[p]);
    const double v1 = std::abs((-gtx[p] + disc) / gxx[p]);
    const double v2 = std::abs((-gtx[p] - disc) / gxx[p]);
    vmax = std::max(vmax, std::max(v1, v2));
  }
  return vmax;
}

bool MetricSlab::is_static(double tol) const {
  for (int ix = 0; ix < grid.nx; ++ix) {
    const std::size_t p0 = grid.idx(0, ix);
    for (int it = 1; it < grid.nt; ++it) {
      const std::size_t p = grid.idx(it, ix);
      if (std::abs(gtt[p] - gtt[p0]) > tol || std::abs(gtx[p] - gtx[p0]) > tol ||
          std::abs(gxx[p] - gxx[p0]) > tol || std::abs(gyy[p] - gyy[p0]) > tol ||
          std::abs(gzz[p] - gzz[p0]) > tol)
        return false;
    }
  }
  return true;
}

namespace fd {

double dx4(const std::vector<double>& f, const Grid& g, int it, int ix) {
  const auto at = [&](int j) { return f[g.idx(it, g.wrap(j))]; };
  return (-at(ix + 2) + 8.0 * at(ix + 1) - 8.0 * at(ix - 1) + at(ix - 2)) / (12.0 * g.dx());
}

double dt4(const std::vector<double>& f, const Grid& g, int it, int ix) {
  const auto at = [&](int j) { return f[g.idx(j, ix)]; };
  const double h = g.dt();
  if (it >= 2 && it <= g.nt - 3)
    return (-at(it + 2) + 8.0 * at(it + 1) - 8.0 * at(it - 1) + at(it - 2)) / (12.0 * h);
  if (it == 0)
    return (-25.0 * at(0) + 48.0 * at(1) - 36.0 * at(2) + 16.0 * at(3) - 3.0 * at(4)) /
           (12.0 * h);
  if (it == 1)
    return (-3.0 * at(0) - 10.0 * at(1) + 18.0 * at(2) - 6.0 * at(3) + at(4)) / (12.0 * h);
  if (it == g.nt - 1)
    return (25.0 * at(it) - 48.0 * at(it - 1) + 36.0 * at(it - 2) - 16.0 * at(it - 3) +
            3.0 * at(it - 4)) /
           (12.0 * h);
  // it == nt - 2
  return (3.0 * at(it + 1) + 10.0 * at(it) - 18.0 * at(it - 1) + 6.0 * at(it - 2) -
          at(it - 3)) /
         (12.0 * h);
}

}  // namespace fd

TetradField tetrad_from_metric(const MetricSlab& slab) {
  const std::size_t n = slab.grid.size();
  TetradField tf;
  tf.e.resize(n);
  tf.einv.resize(n);
  for (std::size_t p = 0; p < n; ++p) {
    const double gtt = slab.gtt[p], gtx = slab.gtx[p], gxx = slab.gxx[p];
    if (gtt <= 1e-14) throw DegenerateMetric("Gram-Schmidt: g_tt too small");
    Mat4R e = Mat4R::Zero();
    // leg 0: normalise d_t
    const double n0 = std::sqrt(gtt);
    e(0, 0) = 1.0 / n0;
    // leg 1: d_x minus its projection on e_0
    const double proj = gtx / n0;  // g(d_x, e_0)
    double v_t = -proj / n0;       // = -gtx/gtt
    double v_x = 1.0;
    const double norm2 = -(gtt * v_t * v_t + 2.0 * gtx * v_t * v_x + gxx * v_x * v_x);
    if (norm2 <= 1e-14) throw DegenerateMetric("Gram-Schmidt: spatial leg degenerate");
    const double n1 = std::sqrt(norm2);
    e(1, 0) = v_t / n1;
    e(1, 1) = v_x / n1;
    // transverse legs
    if (-slab.gyy[p] <= 1e-14 || -slab.gzz[p] <= 1e-14)
      throw DegenerateMetric("Gram-Schmidt: transverse leg degenerate");
    e(2, 2) = 1.0 / std::sqrt(-slab.gyy[p]);
    e(3, 3) = 1.0 / std::sqrt(-slab.gzz[p]);
    tf.e[p] = e;
    tf.einv[p] = e.inverse().transpose();
  }
  return tf;
}

double TetradField::orthonormality_residual(const MetricSlab& slab) const {
  double worst = 0.0;
  for (std::size_t p = 0; p < slab.grid.size(); ++p) {
    const Mat4R g = slab.g4(p);
    const Mat4R r = e[p] * g * e[p].transpose() - eta_matrix();
    worst = std::max(worst, r.cwiseAbs().maxCoeff());
  }
  return worst;
}

ConnectionField connection_from_metric(const MetricSlab& slab, const TetradField& tetrad,
                                       bool keep_christoffels) {
  const Grid& g = slab.grid;
  const std::size_t n = g.size();
  const auto rep = clifford::standard_rep();

  // Metric and inverse-tetrad derivatives in t and x.
  const std::vector<double>* comps[5] = {&slab.gtt, &slab.gtx, &slab.gxx, &slab.gyy, &slab.gzz};
  std::vector<std::array<double, 5>> dgt(n), dgx(n);
  std::vector<Mat4R> deinv_t(n), deinv_x(n);
  {
    // einv component grids for differentiation
    std::array<std::vector<double>, 16> einv_comp;
    for (auto& v : einv_comp) v.resize(n);
    for (std::size_t p = 0; p < n; ++p)
      for (int a = 0; a < 4; ++a)
        for (int mu = 0; mu < 4; ++mu) einv_comp[4 * a + mu][p] = tetrad.einv[p](a, mu);
    parallel_for(n, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t p = lo; p < hi; ++p) {
        const int it = static_cast<int>(p) / g.nx;
        const int ix = static_cast<int>(p) % g.nx;
        for (int c = 0; c < 5; ++c) {
          dgt[p][c] = fd::dt4(*comps[c], g, it, ix);
          dgx[p][c] = fd::dx4(*comps[c], g, it, ix);
        }
        for (int a = 0; a < 4; ++a)
          for (int mu = 0; mu < 4; ++mu) {
            deinv_t[p](a, mu) = fd::dt4(einv_comp[4 * a + mu], g, it, ix);
            deinv_x[p](a, mu) = fd::dx4(einv_comp[4 * a + mu], g, it, ix);
          }
      }
    });
  }

  ConnectionField cf;
  cf.sigma.resize(n);
  cf.tau_div.resize(n);
  cf.has_christoffels = keep_christoffels;
  if (keep_christoffels) {
    cf.coord.resize(n);
    cf.frame.resize(n);
  }

  parallel_for(n, [&](std::size_t lo, std::size_t hi) {
    std::array<double, 64> Gc{}, Gf{};
    for (std::size_t p = lo; p < hi; ++p) {
      // coordinate Christoffels from dg; dg4[mu](r,s) = d_mu g_rs
      Mat4R dg4[4];
      for (int mu = 0; mu < 4; ++mu) dg4[mu] = Mat4R::Zero();
      const auto fill = [&](int mu, const std::array<double, 5>& d) {
        dg4[mu](0, 0) = d[0];
        dg4[mu](0, 1) = dg4[mu](1, 0) = d[1];
        dg4[mu](1, 1) = d[2];
        dg4[mu](2, 2) = d[3];
        dg4[mu](3, 3) = d[4];
      };
      fill(0, dgt[p]);
      fill(1, dgx[p]);
      const Mat4R ginv = slab.ginv4(p);
      for (int r = 0; r < 4; ++r)
        for (int mu = 0; mu < 4; ++mu)
          for (int nu = 0; nu < 4; ++nu) {
            double s = 0.0;
            for (int sg = 0; sg < 4; ++sg)
              s += ginv(r, sg) * (dg4[mu](sg, nu) + dg4[nu](sg, mu) - dg4[sg](mu, nu));
            Gc[r * 16 + mu * 4 + nu] = 0.5 * s;
          }

      // frame connection Gamma^a_{bc}
      const Mat4R& e = tetrad.e[p];
      const Mat4R& ei = tetrad.einv[p];
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
          for (int c = 0; c < 4; ++c) {
            double t1 = 0.0;
            for (int r = 0; r < 4; ++r) {
              const double de = e(b, 0) * deinv_t[p](a, r) + e(b, 1) * deinv_x[p](a, r);
              t1 -= e(c, r) * de;
            }
            double t2 = 0.0;
            for (int r = 0; r < 4; ++r)
              for (int mu = 0; mu < 4; ++mu)
                for (int nu = 0; nu < 4; ++nu)
                  t2 += ei(a, r) * e(b, mu) * e(c, nu) * Gc[r * 16 + mu * 4 + nu];
            Gf[a * 16 + b * 4 + c] = t1 + t2;
          }

      // Remove the eta-trace over (upper, third) so that the spin connection
      // intertwines the Dirac adjoint exactly on the lattice.
      double tau_plus[4];
      for (int b = 0; b < 4; ++b) {
        double t = 0.0;
        for (int a = 0; a < 4; ++a) t += Gf[a * 16 + b * 4 + a];
        tau_plus[b] = t;
      }
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
          for (int c = 0; c < 4; ++c) {
            // lowered correction: Gamma_{abc} -= 1/4 eta_{ac} tau_b, raised back.
            if (a == c) Gf[a * 16 + b * 4 + c] -= 0.25 * tau_plus[b];
          }

      // spin connection sigma_b = 1/4 Gamma^a_{bc} gamma_a gamma^c
      for (int b = 0; b < 4; ++b) {
        Mat4C s = Mat4C::Zero();
        for (int a = 0; a < 4; ++a)
          for (int c = 0; c < 4; ++c) {
            const double coef = 0.25 * Gf[a * 16 + b * 4 + c];
            if (coef != 0.0) s += coef * rep.gamma[a] * rep.gamma_upper(c);
          }
        cf.sigma[p][b] = s;
      }
      for (int a = 0; a < 4; ++a) {
        double t = 0.0;
        for (int b = 0; b < 4; ++b) t += Gf[b * 16 + b * 4 + a];
        cf.tau_div[p][a] = t;
      }
      if (keep_christoffels) {
        cf.coord[p] = Gc;
        cf.frame[p] = Gf;
      }
    }
  });
  return cf;
}

double curved_gamma_check(const MetricSlab& slab, const TetradField& tetrad) {
  const auto rep = clifford::standard_rep();
  double worst = 0.0;
  for (std::size_t p = 0; p < slab.grid.size(); ++p) {
    Mat4C gl[4];
    for (int mu = 0; mu < 4; ++mu) {
      gl[mu] = Mat4C::Zero();
      for (int a = 0; a < 4; ++a) gl[mu] += tetrad.einv[p](a, mu) * rep.gamma[a];
    }
    const Mat4R g = slab.g4(p);
    for (int mu = 0; mu < 4; ++mu)
      for (int nu = 0; nu < 4; ++nu) {
        const Mat4C r =
            gl[mu] * gl[nu] + gl[nu] * gl[mu] - 2.0 * g(mu, nu) * Mat4C::Identity();
        worst = std::max(worst, r.cwiseAbs().maxCoeff());
      }
  }
  return worst;
}

double nabla_gamma_residual(const MetricSlab& slab, const TetradField& tetrad,
                            const ConnectionField& conn) {
  if (!conn.has_christoffels)
    throw SpinorlabError("nabla_gamma_residual needs keep_christoffels");
  const auto rep = clifford::standard_rep();
  double worst = 0.0;
  for (std::size_t p = 0; p < slab.grid.size(); ++p) {
    for (int b = 0; b < 4; ++b)
      for (int a = 0; a < 4; ++a) {
        Mat4C r = conn.sigma[p][b] * rep.gamma[a] - rep.gamma[a] * conn.sigma[p][b];
        for (int c = 0; c < 4; ++c) r -= conn.frame[p][c * 16 + b * 4 + a] * rep.gamma[c];
        worst = std::max(worst, r.cwiseAbs().maxCoeff());
      }
  }
  (void)tetrad;
  return worst;
}

Mat4C Geometry::gamma_up(std::size_t p, int mu) const {
  Mat4C g = Mat4C::Zero();
  for (int a = 0; a < 4; ++a) {
    const double c = tetrad.e[p](a, mu);
    if (c != 0.0) g += c * rep.gamma_upper(a);
  }
  return g;
}

Mat4C Geometry::gamma_low(std::size_t p, int mu) const {
  Mat4C g = Mat4C::Zero();
  for (int a = 0; a < 4; ++a) {
    const double c = tetrad.einv[p](a, mu);
    if (c != 0.0) g += c * rep.gamma[a];
  }
  return g;
}

Eigen::Vector4d Geometry::normal_frame(std::size_t p) const {
  const double N = 1.0 / std::sqrt(slab.itt[p]);
  Eigen::Vector4d ncoord;
  ncoord << N * slab.itt[p], N * slab.itx[p], 0.0, 0.0;
  Eigen::Vector4d nf = Eigen::Vector4d::Zero();
  for (int a = 0; a < 4; ++a)
    for (int mu = 0; mu < 4; ++mu) nf(a) += tetrad.einv[p](a, mu) * ncoord(mu);
  return nf;
}

Mat4C Geometry::nslash(std::size_t p) const {
  const Eigen::Vector4d nf = normal_frame(p);
  Mat4C m = Mat4C::Zero();
  for (int a = 0; a < 4; ++a)
    if (nf(a) != 0.0) m += nf(a) * rep.gamma[a];
  return m;
}

std::shared_ptr<const Geometry> make_geometry(MetricSlab slab, bool keep_christoffels) {
  auto geo = std::make_shared<Geometry>();
  if (slab.itt.empty()) slab.finalize();
  geo->slab = std::move(slab);
  geo->tetrad = tetrad_from_metric(geo->slab);
  geo->conn = connection_from_metric(geo->slab, geo->tetrad, keep_christoffels);
  geo->rep = clifford::standard_rep();
  geo->pm = clifford::pairing_matrices(geo->rep);
  return geo;
}

std::shared_ptr<const Geometry> rotate_frame(const Geometry& geo, const Mat4C& S) {
  const auto lam = clifford::covering_map(geo.rep, S);
  auto out = std::make_shared<Geometry>();
  out->slab = geo.slab;
  out->rep = geo.rep;
  out->pm = geo.pm;
  const std::size_t n = geo.slab.grid.size();
  out->tetrad.e.resize(n);
  out->tetrad.einv.resize(n);
  for (std::size_t p = 0; p < n; ++p) {
    Mat4R e = Mat4R::Zero();
    // e'_a = e_b Lambda^b_a
    for (int a = 0; a < 4; ++a)
      for (int mu = 0; mu < 4; ++mu) {
        double s = 0.0;
        for (int b = 0; b < 4; ++b) s += geo.tetrad.e[p](b, mu) * lam.lambda(b, a);
        e(a, mu) = s;
      }
    out->tetrad.e[p] = e;
    out->tetrad.einv[p] = e.inverse().transpose();
  }
  out->conn = connection_from_metric(out->slab, out->tetrad, geo.conn.has_christoffels);
  return out;
}

// ---- presets -----------------------------------------------------------

MetricSlab minkowski_slab(int nt, int nx, double T, double L) {
  MetricSlab s;
  s.grid = Grid{nt, nx, T, L};
  s.allocate();
  s.finalize();
  return s;
}

double frw_scale(double t, double amp, double freq, double phase) {
  return 1.0 + amp * std::sin(freq * t + phase);
}

MetricSlab frw_slab(int nt, int nx, double T, double L, double amp, double freq, double phase) {
  MetricSlab s;
  s.grid = Grid{nt, nx, T, L};
  s.allocate();
  for (int it = 0; it < nt; ++it) {
    const double a = frw_scale(s.grid.t(it), amp, freq, phase);
    for (int ix = 0; ix < nx; ++ix) {
      const std::size_t p = s.grid.idx(it, ix);
      s.gxx[p] = -a * a;
      s.gyy[p] = -a * a;
      s.gzz[p] = -a * a;
    }
  }
  s.finalize();
  return s;
}

MetricSlab conformal_bump_slab(int nt, int nx, double T, double L, double amp, double t0,
                               double x0, double wt, double wx) {
  MetricSlab s;
  s.grid = Grid{nt, nx, T, L};
  s.allocate();
  for (int it = 0; it < nt; ++it)
    for (int ix = 0; ix < nx; ++ix) {
      const std::size_t p = s.grid.idx(it, ix);
      const double w2 = 1.0 + amp * bump2d(s.grid.t(it), s.grid.x(ix), t0, x0, wt, wx, L);
      s.gtt[p] = w2;
      s.gxx[p] = -w2;
    }
  s.finalize();
  return s;
}

MetricSlab tx_bump_slab(int nt, int nx, double T, double L, double amp, double t0, double x0,
                        double wt, double wx) {
  MetricSlab s;
  s.grid = Grid{nt, nx, T, L};
  s.allocate();
  for (int it = 0; it < nt; ++it)
    for (int ix = 0; ix < nx; ++ix) {
      const std::size_t p = s.grid.idx(it, ix);
      s.gtx[p] = amp * bump2d(s.grid.t(it), s.grid.x(ix), t0, x0, wt, wx, L);
    }
  s.finalize();
  return s;
}

MetricSlab random_smooth_slab(int nt, int nx, double T, double L, double amp, Rng& rng) {
  MetricSlab s;
  s.grid = Grid{nt, nx, T, L};
  s.allocate();
  // low-frequency Fourier perturbations, smooth in t via polynomials of sin
  auto mode = [&](double& c1, double& c2, double& ph) {
    c1 = amp * uniform(rng);
    c2 = amp * uniform(rng);
    ph = 3.14159 * uniform(rng);
  };
  double a1, a2, p1, b1, b2, p2, c1, c2, p3;
  mode(a1, a2, p1);
  mode(b1, b2, p2);
  mode(c1, c2, p3);
  const double kx = 2.0 * M_PI / L;
  for (int it = 0; it < nt; ++it)
    for (int ix = 0; ix < nx; ++ix) {
      const std::size_t p = s.grid.idx(it, ix);
      const double t = s.grid.t(it), x = s.grid.x(ix);
      const double f1 = std::sin(kx * x + p1) * std::sin(1.1 * t + 0.3);
      const double f2 = std::sin(2.0 * kx * x + p2) * std::cos(0.7 * t);
      const double f3 = std::sin(kx * x + p3) * std::sin(0.9 * t + 1.1);
      s.gtt[p] = 1.0 + a1 * f1 + a2 * f2;
      s.gtx[p] = b1 * f2 + b2 * f3;
      s.gxx[p] = -1.0 - c1 * f1 - c2 * f3;
      s.gyy[p] = -1.0 - a2 * f3;
      s.gzz[p] = -1.0 - b2 * f1;
    }
  s.finalize();
  return s;
}

MetricSlab MetricFamily::evaluate(double eps) const {
  MetricSlab s = base;
  const std::size_t n = s.grid.size();
  for (std::size_t p = 0; p < n; ++p) {
    s.gtt[p] += eps * htt[p];
    s.gtx[p] += eps * htx[p];
    s.gxx[p] += eps * hxx[p];
    s.gyy[p] += eps * hyy[p];
    s.gzz[p] += eps * hzz[p];
  }
  s.finalize();
  return s;
}

void MetricFamily::validate() const {
  evaluate(eps_max);
  evaluate(-eps_max);
}

MetricFamily make_family(const MetricSlab& base, const std::string& direction, double amp,
                         double t0, double x0, double wt, double wx, double eps_max) {
  MetricFamily fam;
  fam.base = base;
  fam.eps_max = eps_max;
  fam.K_t_lo = t0 - wt;
  fam.K_t_hi = t0 + wt;
  const std::size_t n = base.grid.size();
  fam.htt.assign(n, 0.0);
  fam.htx.assign(n, 0.0);
  fam.hxx.assign(n, 0.0);
  fam.hyy.assign(n, 0.0);
  fam.hzz.assign(n, 0.0);
  fam.chi.assign(n, 0.0);
  for (int it = 0; it < base.grid.nt; ++it)
    for (int ix = 0; ix < base.grid.nx; ++ix) {
      const std::size_t p = base.grid.idx(it, ix);
      const double chi =
          amp * bump2d(base.grid.t(it), base.grid.x(ix), t0, x0, wt, wx, base.grid.L);
      fam.chi[p] = chi;
      if (direction == "conformal") {
        fam.htt[p] = chi * base.gtt[p];
        fam.htx[p] = chi * base.gtx[p];
        fam.hxx[p] = chi * base.gxx[p];
        fam.hyy[p] = chi * base.gyy[p];
        fam.hzz[p] = chi * base.gzz[p];
      } else if (direction == "tx") {
        fam.htx[p] = chi;
      } else {
        throw ConfigError("unknown deformation direction: " + direction);
      }
    }
  fam.validate();
  return fam;
}

}  // namespace spinorlab::geometry
