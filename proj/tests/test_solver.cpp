#include <cmath>

#include "doctest.h"
#include "spinorlab/solver.hpp"

using namespace spinorlab;
using namespace spinorlab::geometry;
using namespace spinorlab::fields;
using namespace spinorlab::solver;

namespace {

DoubleField bump_source(const Grid& g, double t0, double x0, double wt, double wx,
                        unsigned seed, bool spinor_part = true, bool cospinor_part = true) {
  Rng rng(seed);
  Vec4C wu;
  RowVec4C wv;
  for (int i = 0; i < 4; ++i) {
    wu(i) = cd(uniform(rng), uniform(rng));
    wv(i) = cd(uniform(rng), uniform(rng));
  }
  DoubleField f = DoubleField::zero(g);
  for (int it = 0; it < g.nt; ++it)
    for (int ix = 0; ix < g.nx; ++ix) {
      const double b = bump2d(g.t(it), g.x(ix), t0, x0, wt, wx, g.L);
      if (b == 0.0) continue;
      const std::size_t p = g.idx(it, ix);
      if (spinor_part) f.u.d[p] = b * wu;
      if (cospinor_part) f.v.d[p] = b * wv;
    }
  return f;
}

double rel_err(const DoubleField& a, const DoubleField& b) {
  return max_abs(sub(a, b)) / std::max(1e-300, max_abs(b));
}

}  // namespace

TEST_CASE("zero data and source evolve to zero") {
  auto geo = make_geometry(minkowski_slab(33, 32, 1.0, 2.0 * M_PI));
  Propagator prop(geo, SolverConfig{1.0, 0.45});
  const DoubleField out = prop.evolve(SliceData::zero(32), 0, 32);
  CHECK(max_abs(out) == 0.0);
}

TEST_CASE("plane-wave Cauchy evolution converges at fourth order") {
  const double mass = 1.0, k = 2.0;
  std::vector<double> errs;
  for (int nx : {32, 64, 128}) {
    const int nt = nx + 1;
    auto geo = make_geometry(minkowski_slab(nt, nx, 2.0, 2.0 * M_PI));
    const Grid& g = geo->slab.grid;
    const SpinorField exact = plane_wave(g, k, mass);
    SliceData init = SliceData::zero(nx);
    for (int ix = 0; ix < nx; ++ix) init.u[ix] = exact.d[g.idx(0, ix)];
    Propagator prop(geo, SolverConfig{mass, 0.4});
    const DoubleField out = prop.evolve(init, 0, nt - 1);
    double err = 0.0;
    for (int ix = 0; ix < nx; ++ix)
      err = std::max(err,
                     (out.u.d[g.idx(nt - 1, ix)] - exact.d[g.idx(nt - 1, ix)]).cwiseAbs().maxCoeff());
    errs.push_back(err);
  }
  const double slope = std::log2(errs[1] / errs[2]);
  CHECK(slope > 3.5);
  CHECK(errs[2] < 1e-5);
}

TEST_CASE("retarded and advanced solutions invert P") {
  for (const char* kind : {"flat", "curved"}) {
    const int nx = 128, nt = 129;
    MetricSlab slab = std::string(kind) == "flat"
                          ? minkowski_slab(nt, nx, 2.0, 2.0 * M_PI)
                          : conformal_bump_slab(nt, nx, 2.0, 2.0 * M_PI, 0.2, 1.0, M_PI, 0.5, 1.2);
    auto geo = make_geometry(slab);
    const Grid& g = geo->slab.grid;
    const SolverConfig cfg{1.0, 0.45};
    Propagator prop(geo, cfg);
    const DoubleField f = bump_source(g, 0.9, M_PI, 0.35, 0.9, 101);
    for (bool retarded_side : {true, false}) {
      const DoubleField sol = retarded_side ? prop.retarded(f) : prop.advanced(f);
      const DoubleField pf = apply_P(*geo, sol, cfg.mass);
      // compare on the interior away from the t-boundary stencil rows
      double num = 0.0;
      for (int it = 3; it < nt - 3; ++it)
        for (int ix = 0; ix < nx; ++ix) {
          const std::size_t p = g.idx(it, ix);
          num = std::max(num, (pf.u.d[p] - f.u.d[p]).cwiseAbs().maxCoeff());
          num = std::max(num, (pf.v.d[p] - f.v.d[p]).cwiseAbs().maxCoeff());
        }
      CHECK(num / max_abs(f) < 5e-4);
    }
  }
}

TEST_CASE("retarded solution stays inside the numerical light cone") {
  const int nx = 128, nt = 129;
  auto geo = make_geometry(minkowski_slab(nt, nx, 2.0, 2.0 * M_PI));
  const Grid& g = geo->slab.grid;
  Propagator prop(geo, SolverConfig{0.0, 0.45});
  const DoubleField f = bump_source(g, 0.5, M_PI, 0.3, 0.8, 102);
  const DoubleField sol = prop.retarded(f);
  const auto arc = support_arc(g, f);
  const auto slices = support_slices(g, f);
  REQUIRE(arc);
  REQUIRE(slices);
  const Cone cone = forward_cone(geo->slab, slices->first, arc->first, arc->second);
  const double peak = max_abs(sol);
  const double collar = 4.0 * g.dx();
  double leak = 0.0;
  for (int it = slices->first; it < nt; ++it)
    for (int ix = 0; ix < nx; ++ix) {
      if (cone.inside(g.x(ix), it, collar)) continue;
      const std::size_t p = g.idx(it, ix);
      leak = std::max(leak, sol.u.d[p].cwiseAbs().maxCoeff());
      leak = std::max(leak, sol.v.d[p].cwiseAbs().maxCoeff());
    }
  CHECK(leak / peak < 1e-6);
}

TEST_CASE("duality between S+- and the cospinor S-+") {
  const int nx = 96, nt = 97;
  auto geo = make_geometry(conformal_bump_slab(nt, nx, 2.0, 2.0 * M_PI, 0.15, 1.0, 2.0, 0.5, 1.0));
  const Grid& g = geo->slab.grid;
  Propagator prop(geo, SolverConfig{0.8, 0.45});
  // overlapping supports so both causal sides pair nontrivially
  const DoubleField fu = bump_source(g, 0.8, 2.0, 0.3, 0.8, 103, true, false);
  const DoubleField fv = bump_source(g, 0.9, 2.4, 0.3, 0.8, 104, false, true);

  const double w0 = g.dt() * g.dx();
  auto volume_plain = [&](const CospinorField& v, const SpinorField& u) {
    cd acc = 0.0;
    for (std::size_t p = 0; p < g.size(); ++p)
      acc += w0 * geo->slab.sqrtg[p] * (v.d[p] * u.d[p])(0, 0);
    return acc;
  };

  // int <v, S+ u> = int <S_c^- v, u> and the +- swap
  const DoubleField sp = prop.retarded(fu);
  const DoubleField sm = prop.advanced(fu);
  const DoubleField scp = prop.retarded(fv);
  const DoubleField scm = prop.advanced(fv);
  const cd lhs_p = volume_plain(fv.v, sp.u);
  const cd rhs_p = volume_plain(scm.v, fu.u);
  const cd lhs_m = volume_plain(fv.v, sm.u);
  const cd rhs_m = volume_plain(scp.v, fu.u);
  const double scale = std::max(std::abs(lhs_p), std::abs(lhs_m));
  CHECK(std::abs(lhs_p - rhs_p) / scale < 2e-4);
  CHECK(std::abs(lhs_m - rhs_m) / scale < 2e-4);
}

TEST_CASE("pairing is Hermitean, adjoint-symmetric and positive") {
  const int nx = 96, nt = 97;
  auto geo = make_geometry(minkowski_slab(nt, nx, 2.0, 2.0 * M_PI));
  const Grid& g = geo->slab.grid;
  Propagator prop(geo, SolverConfig{1.0, 0.45});

  const DoubleField f1 = bump_source(g, 0.8, 2.0, 0.35, 0.9, 105);
  const DoubleField f2 = bump_source(g, 1.1, 4.0, 0.35, 0.9, 106);

  const cd p12 = prop.pairing_volume(f1, f2);
  const cd p21 = prop.pairing_volume(f2, f1);
  CHECK(std::abs(p12 - std::conj(p21)) / std::abs(p12) < 2e-4);

  const cd pa = prop.pairing_volume(adjoint(*geo, f1), adjoint(*geo, f2));
  CHECK(std::abs(pa - p21) / std::abs(p21) < 2e-4);

  // charge conjugation: (f1^c, f2^c) = conj (f1, f2)
  const cd pc = prop.pairing_volume(charge_conj(*geo, f1), charge_conj(*geo, f2));
  CHECK(std::abs(pc - std::conj(p12)) / std::abs(p12) < 2e-4);

  Rng rng(9);
  for (int trial = 0; trial < 8; ++trial) {
    const DoubleField f = bump_source(g, 0.7 + 0.05 * trial, 1.0 + 0.6 * trial, 0.3, 0.8,
                                      200 + trial);
    const cd q = prop.pairing_volume(f, f);
    CHECK(q.real() > -1e-9 * std::abs(q));
    CHECK(std::abs(q.imag()) < 2e-4 * std::abs(q));
  }
  (void)rng;
}

TEST_CASE("volume and Cauchy pairings agree and are surface independent") {
  const int nx = 128, nt = 129;
  auto geo = make_geometry(conformal_bump_slab(nt, nx, 2.0, 2.0 * M_PI, 0.1, 1.0, 1.0, 0.4, 0.9));
  const Grid& g = geo->slab.grid;
  Propagator prop(geo, SolverConfig{1.0, 0.45});
  const DoubleField f1 = bump_source(g, 0.9, 2.0, 0.3, 0.8, 107);
  const DoubleField f2 = bump_source(g, 1.0, 2.7, 0.3, 0.8, 108);
  const DoubleField sf1 = prop.smap(f1);
  const DoubleField sf2 = prop.smap(f2);
  const cd vol = prop.pairing_volume_pre(f1, sf2);
  std::vector<cd> vals;
  for (int slice : {8, 32, 64, 96, 120}) vals.push_back(prop.pairing_cauchy_pre(sf1, sf2, slice));
  double spread = 0.0;
  for (const cd& v : vals)
    for (const cd& w : vals) spread = std::max(spread, std::abs(v - w));
  CHECK(spread / std::abs(vol) < 2e-4);
  for (const cd& v : vals) CHECK(std::abs(v - vol) / std::abs(vol) < 2e-4);
}

TEST_CASE("S commutes with charge conjugation and the adjoint swap") {
  const int nx = 96, nt = 97;
  auto geo = make_geometry(conformal_bump_slab(nt, nx, 2.0, 2.0 * M_PI, 0.12, 1.0, 3.0, 0.5, 1.0));
  const Grid& g = geo->slab.grid;
  Propagator prop(geo, SolverConfig{0.9, 0.45});
  const DoubleField f = bump_source(g, 0.9, 3.0, 0.3, 0.8, 109);

  const DoubleField s_fc = prop.smap(charge_conj(*geo, f));
  const DoubleField sc_f = charge_conj(*geo, prop.smap(f));
  CHECK(rel_err(s_fc, sc_f) < 1e-9);

  const DoubleField s_fp = prop.smap(adjoint(*geo, f));
  const DoubleField sp_f = adjoint(*geo, prop.smap(f));
  CHECK(rel_err(s_fp, sp_f) < 1e-9);
}

TEST_CASE("time-slice decomposition") {
  const int nx = 128, nt = 161;
  auto geo = make_geometry(minkowski_slab(nt, nx, 2.5, 2.0 * M_PI));
  const Grid& g = geo->slab.grid;
  Propagator prop(geo, SolverConfig{1.0, 0.45});
  const PartitionPair phi{0.5, 0.9};
  // f supported well to the future of the band
  const DoubleField f = bump_source(g, 1.7, 2.5, 0.3, 0.8, 110);
  double leak = 0.0;
  const DoubleField ftilde = prop.timeslice_decompose(f, phi, &leak);
  CHECK(leak < 1e-3);
  // support containment is definitional after the clamp; check the band really
  // carries the field
  const auto sl = support_slices(g, ftilde);
  REQUIRE(sl);
  CHECK(g.t(sl->first) >= phi.t_lo - 3.0 * g.dt());
  CHECK(g.t(sl->second) <= phi.t_hi + 3.0 * g.dt());

  // S ftilde = S f at late times
  const DoubleField sf = prop.smap(f);
  const DoubleField sft = prop.smap(ftilde);
  double num = 0.0, den = 0.0;
  for (int it = nt - 20; it < nt - 3; ++it)
    for (int ix = 0; ix < nx; ++ix) {
      const std::size_t p = g.idx(it, ix);
      num = std::max(num, (sf.u.d[p] - sft.u.d[p]).cwiseAbs().maxCoeff());
      num = std::max(num, (sf.v.d[p] - sft.v.d[p]).cwiseAbs().maxCoeff());
      den = std::max(den, sf.u.d[p].cwiseAbs().maxCoeff());
      den = std::max(den, sf.v.d[p].cwiseAbs().maxCoeff());
    }
  CHECK(num / den < 1e-3);

  // equality in the algebra: seminorm(ftilde - f) small relative to seminorm(f)
  const double sn_diff = prop.seminorm(sub(ftilde, f));
  const double sn_f = prop.seminorm(f);
  CHECK(sn_diff / sn_f < 2e-2);

  CHECK_THROWS_AS(prop.timeslice_decompose(f, PartitionPair{0.5, 0.5 + 3.0 * g.dt()}, nullptr),
                  BandTooNarrow);
}

TEST_CASE("solver error paths") {
  auto geo = make_geometry(minkowski_slab(33, 32, 1.0, 2.0 * M_PI));
  CHECK_THROWS_AS(Propagator(geo, SolverConfig{1.0, 0.9}), CflViolation);
  Propagator prop(geo, SolverConfig{1.0, 0.45});
  // source too close to the boundary
  const Grid& g = geo->slab.grid;
  DoubleField f = DoubleField::zero(g);
  f.u.d[g.idx(1, 5)](0) = 1.0;
  CHECK_THROWS_AS(prop.retarded(f), SupportTouchesBoundary);
}

TEST_CASE("energy integral of a homogeneous solution is surface independent") {
  const int nx = 96, nt = 129;
  auto geo = make_geometry(frw_slab(nt, nx, 2.0, 2.0 * M_PI, 0.04, 1.1, 0.2));
  const Grid& g = geo->slab.grid;
  Propagator prop(geo, SolverConfig{1.0, 0.45});
  const DoubleField f = bump_source(g, 0.5, 3.0, 0.3, 0.8, 111);
  const DoubleField sf = prop.smap(f);
  // Cauchy-pairing of the solution with itself across several surfaces
  std::vector<double> vals;
  for (int slice : {16, 48, 80, 112}) {
    const cd v = prop.pairing_cauchy_pre(sf, sf, slice);
    vals.push_back(v.real());
  }
  for (double v : vals) CHECK(std::abs(v - vals[0]) / std::abs(vals[0]) < 2e-4);
}
