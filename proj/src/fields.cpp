#include "spinorlab/fields.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "spinorlab/util.hpp"

namespace spinorlab::fields {

DoubleField add(const DoubleField& a, const DoubleField& b) {
  DoubleField r = a;
  for (std::size_t p = 0; p < r.u.d.size(); ++p) {
    r.u.d[p] += b.u.d[p];
    r.v.d[p] += b.v.d[p];
  }
  return r;
}

DoubleField sub(const DoubleField& a, const DoubleField& b) {
  DoubleField r = a;
  for (std::size_t p = 0; p < r.u.d.size(); ++p) {
    r.u.d[p] -= b.u.d[p];
    r.v.d[p] -= b.v.d[p];
  }
  return r;
}

DoubleField scale(const DoubleField& a, cd c) {
  DoubleField r = a;
  for (std::size_t p = 0; p < r.u.d.size(); ++p) {
    r.u.d[p] *= c;
    r.v.d[p] *= c;
  }
  return r;
}

double max_abs(const DoubleField& a) {
  double m = 0.0;
  for (std::size_t p = 0; p < a.u.d.size(); ++p) {
    m = std::max(m, a.u.d[p].cwiseAbs().maxCoeff());
    m = std::max(m, a.v.d[p].cwiseAbs().maxCoeff());
  }
  return m;
}

double max_abs_slice(const DoubleField& a, const Grid& g, int it) {
  double m = 0.0;
  for (int ix = 0; ix < g.nx; ++ix) {
    const std::size_t p = g.idx(it, ix);
    m = std::max(m, a.u.d[p].cwiseAbs().maxCoeff());
    m = std::max(m, a.v.d[p].cwiseAbs().maxCoeff());
  }
  return m;
}

DoubleField adjoint(const Geometry& geo, const DoubleField& f) {
  DoubleField r = f;
  const Mat4C A = geo.pm.A;
  const Mat4C Ainv = geo.pm.Ainv();
  for (std::size_t p = 0; p < f.u.d.size(); ++p) {
    r.u.d[p] = Ainv * f.v.d[p].adjoint();
    r.v.d[p] = f.u.d[p].adjoint() * A;
  }
  return r;
}

DoubleField charge_conj(const Geometry& geo, const DoubleField& f) {
  DoubleField r = f;
  const Mat4C Cinv = geo.pm.Cinv();
  const Mat4C C = geo.pm.C;
  for (std::size_t p = 0; p < f.u.d.size(); ++p) {
    r.u.d[p] = Cinv * f.u.d[p].conjugate();
    r.v.d[p] = f.v.d[p].conjugate() * C;
  }
  return r;
}

DoubleField rmap(const DoubleField& f) {
  DoubleField r = f;
  for (std::size_t p = 0; p < f.v.d.size(); ++p) r.v.d[p] = -f.v.d[p];
  return r;
}

DoubleField mul_gamma_low(const Geometry& geo, const DoubleField& f, int mu) {
  DoubleField r = f;
  for (std::size_t p = 0; p < f.u.d.size(); ++p) {
    const Mat4C g = geo.gamma_low(p, mu);
    r.u.d[p] = g * f.u.d[p];
    r.v.d[p] = f.v.d[p] * g;
  }
  return r;
}

DoubleField mul_gamma_frame(const Geometry& geo, const DoubleField& f, int a) {
  DoubleField r = f;
  const Mat4C g = geo.rep.gamma[a];
  for (std::size_t p = 0; p < f.u.d.size(); ++p) {
    r.u.d[p] = g * f.u.d[p];
    r.v.d[p] = f.v.d[p] * g;
  }
  return r;
}

DoubleField covariant_deriv(const Geometry& geo, const DoubleField& f, int a) {
  return DoubleField{covariant_deriv(geo, f.u, a), covariant_deriv(geo, f.v, a)};
}

DoubleField mul_scalar_field(const DoubleField& f, const std::vector<double>& s) {
  DoubleField r = f;
  for (std::size_t p = 0; p < f.u.d.size(); ++p) {
    r.u.d[p] *= s[p];
    r.v.d[p] *= s[p];
  }
  return r;
}

cd pair_point(const Geometry& geo, const DoubleField& f1, const DoubleField& f2, std::size_t p) {
  const cd a = (f1.u.d[p].adjoint() * geo.pm.A * f2.u.d[p])(0, 0);
  const cd b = (f2.v.d[p] * geo.pm.Ainv() * f1.v.d[p].adjoint())(0, 0);
  return a + b;
}

namespace {

template <typename Field>
Field dx_impl(const Grid& g, const Field& f) {
  Field r = f;
  const double h = 12.0 * g.dx();
  parallel_for(g.nt, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t it = lo; it < hi; ++it)
      for (int ix = 0; ix < g.nx; ++ix) {
        const auto at = [&](int j) { return f.d[g.idx(it, g.wrap(j))]; };
        r.d[g.idx(it, ix)] = (-at(ix + 2) + 8.0 * at(ix + 1) - 8.0 * at(ix - 1) + at(ix - 2)) / h;
      }
  });
  return r;
}

template <typename Field>
Field dt_impl(const Grid& g, const Field& f) {
  Field r = f;
  const double h = 12.0 * g.dt();
  parallel_for(g.nt, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t itu = lo; itu < hi; ++itu) {
      const int it = static_cast<int>(itu);
      for (int ix = 0; ix < g.nx; ++ix) {
        const auto at = [&](int j) { return f.d[g.idx(j, ix)]; };
        auto& out = r.d[g.idx(it, ix)];
        if (it >= 2 && it <= g.nt - 3)
          out = (-at(it + 2) + 8.0 * at(it + 1) - 8.0 * at(it - 1) + at(it - 2)) / h;
        else if (it == 0)
          out = (-25.0 * at(0) + 48.0 * at(1) - 36.0 * at(2) + 16.0 * at(3) - 3.0 * at(4)) / h;
        else if (it == 1)
          out = (-3.0 * at(0) - 10.0 * at(1) + 18.0 * at(2) - 6.0 * at(3) + at(4)) / h;
        else if (it == g.nt - 1)
          out = (25.0 * at(it) - 48.0 * at(it - 1) + 36.0 * at(it - 2) - 16.0 * at(it - 3) +
                 3.0 * at(it - 4)) /
                h;
        else
          out = (3.0 * at(it + 1) + 10.0 * at(it) - 18.0 * at(it - 1) + 6.0 * at(it - 2) -
                 at(it - 3)) /
                h;
      }
    }
  });
  return r;
}

}  // namespace

SpinorField dt_field(const Grid& g, const SpinorField& f) { return dt_impl(g, f); }
SpinorField dx_field(const Grid& g, const SpinorField& f) { return dx_impl(g, f); }
CospinorField dt_field(const Grid& g, const CospinorField& f) { return dt_impl(g, f); }
CospinorField dx_field(const Grid& g, const CospinorField& f) { return dx_impl(g, f); }

SpinorField covariant_deriv(const Geometry& geo, const SpinorField& f, int a) {
  const Grid& g = geo.slab.grid;
  const SpinorField ft = dt_field(g, f);
  const SpinorField fx = dx_field(g, f);
  SpinorField r = f;
  for (std::size_t p = 0; p < f.d.size(); ++p) {
    r.d[p] = geo.tetrad.e[p](a, 0) * ft.d[p] + geo.tetrad.e[p](a, 1) * fx.d[p] +
             geo.conn.sigma[p][a] * f.d[p];
  }
  return r;
}

CospinorField covariant_deriv(const Geometry& geo, const CospinorField& f, int a) {
  const Grid& g = geo.slab.grid;
  const CospinorField ft = dt_field(g, f);
  const CospinorField fx = dx_field(g, f);
  CospinorField r = f;
  for (std::size_t p = 0; p < f.d.size(); ++p) {
    r.d[p] = geo.tetrad.e[p](a, 0) * ft.d[p] + geo.tetrad.e[p](a, 1) * fx.d[p] -
             f.d[p] * geo.conn.sigma[p][a];
  }
  return r;
}

SpinorField slash(const Geometry& geo, const SpinorField& f) {
  const Grid& g = geo.slab.grid;
  const SpinorField ft = dt_field(g, f);
  const SpinorField fx = dx_field(g, f);
  SpinorField r = SpinorField::zero(g);
  parallel_for(f.d.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t p = lo; p < hi; ++p) {
      Vec4C acc = Vec4C::Zero();
      for (int a = 0; a < 4; ++a) {
        const Vec4C da = geo.tetrad.e[p](a, 0) * ft.d[p] + geo.tetrad.e[p](a, 1) * fx.d[p] +
                         geo.conn.sigma[p][a] * f.d[p];
        acc += geo.rep.gamma_upper(a) * da;
      }
      r.d[p] = acc;
    }
  });
  return r;
}

CospinorField slash(const Geometry& geo, const CospinorField& f) {
  const Grid& g = geo.slab.grid;
  const CospinorField ft = dt_field(g, f);
  const CospinorField fx = dx_field(g, f);
  CospinorField r = CospinorField::zero(g);
  parallel_for(f.d.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t p = lo; p < hi; ++p) {
      RowVec4C acc = RowVec4C::Zero();
      for (int a = 0; a < 4; ++a) {
        const RowVec4C da = geo.tetrad.e[p](a, 0) * ft.d[p] + geo.tetrad.e[p](a, 1) * fx.d[p] -
                            f.d[p] * geo.conn.sigma[p][a];
        acc += da * geo.rep.gamma_upper(a);
      }
      r.d[p] = acc;
    }
  });
  return r;
}

SpinorField apply_P(const Geometry& geo, const SpinorField& f, double mass) {
  SpinorField r = slash(geo, f);
  const cd mi(0.0, -1.0);
  for (std::size_t p = 0; p < f.d.size(); ++p) r.d[p] = mi * r.d[p] + mass * f.d[p];
  return r;
}

CospinorField apply_Pc(const Geometry& geo, const CospinorField& f, double mass) {
  CospinorField r = slash(geo, f);
  const cd pi(0.0, 1.0);
  for (std::size_t p = 0; p < f.d.size(); ++p) r.d[p] = pi * r.d[p] + mass * f.d[p];
  return r;
}

DoubleField apply_P(const Geometry& geo, const DoubleField& f, double mass) {
  return DoubleField{apply_P(geo, f.u, mass), apply_Pc(geo, f.v, mass)};
}

DoubleField slash(const Geometry& geo, const DoubleField& f) {
  return DoubleField{slash(geo, f.u), slash(geo, f.v)};
}

SpinorField frame_divergence(const Geometry& geo, const std::array<SpinorField, 4>& Z) {
  const Grid& g = geo.slab.grid;
  SpinorField r = SpinorField::zero(g);
  for (int a = 0; a < 4; ++a) {
    const SpinorField da = covariant_deriv(geo, Z[a], a);
    for (std::size_t p = 0; p < r.d.size(); ++p) {
      r.d[p] += da.d[p];
      r.d[p] += geo.conn.tau_div[p][a] * Z[a].d[p];
    }
  }
  return r;
}

CospinorField frame_divergence(const Geometry& geo, const std::array<CospinorField, 4>& Z) {
  const Grid& g = geo.slab.grid;
  CospinorField r = CospinorField::zero(g);
  for (int a = 0; a < 4; ++a) {
    const CospinorField da = covariant_deriv(geo, Z[a], a);
    for (std::size_t p = 0; p < r.d.size(); ++p) {
      r.d[p] += da.d[p];
      r.d[p] += geo.conn.tau_div[p][a] * Z[a].d[p];
    }
  }
  return r;
}

SpinorField plane_wave(const Grid& g, double k, double mass, int branch) {
  const auto rep = clifford::standard_rep();
  const double omega = std::sqrt(k * k + mass * mass);
  // (omega gamma^0 - k gamma^1 - m) w = 0; with lower-index gammas the
  // matrix is M = omega g0 + k g1, and w = (M + m) z for any z.
  const Mat4C M = omega * rep.gamma[0] + k * rep.gamma[1];
  Vec4C z = Vec4C::Zero();
  z(branch % 4) = 1.0;
  Vec4C w = (M + mass * Mat4C::Identity()) * z;
  if (w.norm() < 1e-12) {
    z.setZero();
    z((branch + 1) % 4) = 1.0;
    w = (M + mass * Mat4C::Identity()) * z;
  }
  w /= w.norm();
  SpinorField f = SpinorField::zero(g);
  for (int it = 0; it < g.nt; ++it)
    for (int ix = 0; ix < g.nx; ++ix) {
      const cd phase = std::exp(cd(0.0, -(omega * g.t(it) - k * g.x(ix))));
      f.d[g.idx(it, ix)] = phase * w;
    }
  return f;
}

double l2_norm(const Geometry& geo, const DoubleField& f) {
  const Grid& g = geo.slab.grid;
  const double w0 = g.dt() * g.dx();
  double s = 0.0;
  for (std::size_t p = 0; p < f.u.d.size(); ++p)
    s += w0 * geo.slab.sqrtg[p] * (f.u.d[p].squaredNorm() + f.v.d[p].squaredNorm());
  return std::sqrt(s);
}

}  // namespace spinorlab::fields
