#include <cmath>

#include "doctest.h"
#include "spinorlab/rce.hpp"

using namespace spinorlab;
using namespace spinorlab::geometry;
using namespace spinorlab::fields;
using namespace spinorlab::solver;
using namespace spinorlab::rce;

namespace {

DoubleField bump_field(const Grid& g, double t0, double x0, double wt, double wx,
                       unsigned seed) {
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
      f.u.d[p] = b * wu;
      f.v.d[p] = b * wv;
    }
  return f;
}

DeformationSetup make_setup(const std::string& direction, double amp, int nx = 96, int nt = 129,
                            double pert_x0 = M_PI) {
  const double T = 3.2, L = 2.0 * M_PI;
  const MetricSlab base = minkowski_slab(nt, nx, T, L);
  const MetricFamily fam =
      make_family(base, direction, amp, 1.6, pert_x0, 0.3, 0.9, 2e-3);
  return DeformationSetup(fam, SolverConfig{1.0, 0.45}, PartitionPair{0.4, 1.0},
                          PartitionPair{2.2, 2.8});
}

std::vector<double> bump_h(const Grid& g, double t0, double x0, double wt, double wx) {
  std::vector<double> h(g.size(), 0.0);
  for (int it = 0; it < g.nt; ++it)
    for (int ix = 0; ix < g.nx; ++ix)
      h[g.idx(it, ix)] = bump2d(g.t(it), g.x(ix), t0, x0, wt, wx, g.L);
  return h;
}

}  // namespace

TEST_CASE("stress commutator: zero smearing gives zero, symmetric in (a,b)") {
  auto geo = make_geometry(minkowski_slab(97, 96, 2.0, 2.0 * M_PI));
  Propagator prop(geo, SolverConfig{1.0, 0.45});
  const Grid& g = geo->slab.grid;
  const DoubleField f = bump_field(g, 0.8, 2.0, 0.3, 0.8, 11);
  StressSmearing sm;
  sm.h.assign(g.size(), 0.0);
  const StressVectors sv = stress_commutator(prop, f, sm);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      CHECK(max_abs(sv.lhs[4 * a + b]) == 0.0);
      CHECK(max_abs(sv.rhs[4 * a + b]) == 0.0);
    }
}

TEST_CASE("stress commutator: expansion matches the grouped formula") {
  auto geo = make_geometry(minkowski_slab(129, 128, 2.0, 2.0 * M_PI));
  Propagator prop(geo, SolverConfig{1.0, 0.45});
  const Grid& g = geo->slab.grid;
  const DoubleField f = bump_field(g, 0.7, 2.0, 0.3, 0.9, 12);
  StressSmearing sm;
  sm.h = bump_h(g, 1.2, 2.8, 0.3, 0.8);
  const StressVectors sv = stress_commutator(prop, f, sm);
  CHECK(sv.max_rel_seminorm(prop) < 1e-4);
  // explicit symmetrisation: (a,b) and (b,a) coincide
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      CHECK(max_abs(sub(sv.lhs[4 * a + b], sv.lhs[4 * b + a])) == 0.0);
      CHECK(max_abs(sub(sv.rhs[4 * a + b], sv.rhs[4 * b + a])) == 0.0);
    }
}

TEST_CASE("stress commutator on a curved slab") {
  auto geo =
      make_geometry(conformal_bump_slab(129, 128, 2.0, 2.0 * M_PI, 0.15, 1.0, 3.0, 0.6, 1.2));
  Propagator prop(geo, SolverConfig{1.0, 0.45});
  const Grid& g = geo->slab.grid;
  const DoubleField f = bump_field(g, 0.7, 2.8, 0.3, 0.9, 13);
  StressSmearing sm;
  sm.h = bump_h(g, 1.2, 3.2, 0.3, 0.8);
  const StressVectors sv = stress_commutator(prop, f, sm);
  CHECK(sv.max_rel_seminorm(prop) < 5e-3);
}

TEST_CASE("relative Cauchy evolution at eps = 0 is the identity on the algebra") {
  DeformationSetup setup = make_setup("conformal", 0.4);
  const Grid& g = setup.base().slab.grid;
  const DoubleField f = bump_field(g, 2.5, 2.0, 0.25, 0.8, 14);
  double leak = 0.0;
  const DoubleField tf = rce_map(setup, 0.0, f, &leak);
  CHECK(leak < 1e-3);
  // support in the N+ band (clamped there; verify it is nonzero)
  CHECK(max_abs(tf) > 0.0);
  const auto sl = solver::support_slices(g, tf);
  REQUIRE(sl);
  CHECK(g.t(sl->first) >= 2.2 - 3.0 * g.dt());
  CHECK(g.t(sl->second) <= 2.8 + 3.0 * g.dt());
  const double sn = setup.base_prop().seminorm(sub(tf, f));
  CHECK(sn / setup.base_prop().seminorm(f) < 5e-3);
}

TEST_CASE("deformation spacelike to the solution cone does not act") {
  // f's causal cone stays near x ~ 2, K sits at x ~ 5 with a narrow bump
  DeformationSetup setup = make_setup("conformal", 0.4, 96, 129, 5.2);
  const Grid& g = setup.base().slab.grid;
  DoubleField f = DoubleField::zero(g);
  {
    Rng rng(15);
    Vec4C wu;
    for (int i = 0; i < 4; ++i) wu(i) = cd(uniform(rng), uniform(rng));
    for (int it = 0; it < g.nt; ++it)
      for (int ix = 0; ix < g.nx; ++ix) {
        const double b = bump2d(g.t(it), g.x(ix), 2.5, 2.0, 0.2, 0.35, g.L);
        if (b != 0.0) f.u.d[g.idx(it, ix)] = b * wu;
      }
  }
  const DoubleField t0 = rce_map(setup, 0.0, f);
  const DoubleField tp = rce_map(setup, 1e-3, f);
  const DoubleField tm = rce_map(setup, -1e-3, f);
  const double scale = max_abs(t0);
  CHECK(max_abs(sub(tp, t0)) / scale < 1e-9);
  CHECK(max_abs(sub(tm, t0)) / scale < 1e-9);
}

TEST_CASE("variation of the Dirac operator: closed form against differencing") {
  for (const char* dir : {"conformal", "tx"}) {
    DeformationSetup setup = make_setup(dir, 0.5);
    const Grid& g = setup.base().slab.grid;
    Rng rng(16);
    // smooth random cospinor and spinor probes
    CospinorField v = CospinorField::zero(g);
    SpinorField u = SpinorField::zero(g);
    for (int it = 0; it < g.nt; ++it)
      for (int ix = 0; ix < g.nx; ++ix) {
        const double t = g.t(it), x = g.x(ix);
        const double w1 = std::sin(x + 0.3) * std::cos(0.8 * t);
        const double w2 = std::cos(2.0 * x) * std::sin(0.6 * t + 0.4);
        for (int c = 0; c < 4; ++c) {
          v.d[g.idx(it, ix)](c) = cd(w1 + 0.3 * c, 0.2 * w2);
          u.d[g.idx(it, ix)](c) = cd(0.5 * w2 - 0.1 * c, w1);
        }
      }
    (void)rng;
    const CospinorField closed_v = dirac_variation(setup, v, VarMethod::ClosedForm, 0.0);
    const SpinorField closed_u = dirac_variation(setup, u, VarMethod::ClosedForm, 0.0);
    double scale_v = 0.0, scale_u = 0.0;
    for (std::size_t p = 0; p < g.size(); ++p) {
      scale_v = std::max(scale_v, closed_v.d[p].cwiseAbs().maxCoeff());
      scale_u = std::max(scale_u, closed_u.d[p].cwiseAbs().maxCoeff());
    }
    std::vector<double> errs;
    for (double eps : {2e-3, 1e-3, 5e-4}) {
      const CospinorField fd = dirac_variation(setup, v, VarMethod::FiniteDiff, eps);
      double e = 0.0;
      for (std::size_t p = 0; p < g.size(); ++p)
        e = std::max(e, (fd.d[p] - closed_v.d[p]).cwiseAbs().maxCoeff());
      errs.push_back(e / scale_v);
    }
    CHECK(errs[1] < 1e-3);
    const double slope = std::log2(errs[0] / errs[1]);
    CHECK(slope > 1.6);
    CHECK(slope < 2.4);
    // spinor side at one epsilon
    const SpinorField fdu = dirac_variation(setup, u, VarMethod::FiniteDiff, 1e-3);
    double eu = 0.0;
    for (std::size_t p = 0; p < g.size(); ++p)
      eu = std::max(eu, (fdu.d[p] - closed_u.d[p]).cwiseAbs().maxCoeff());
    CHECK(eu / scale_u < 1e-3);

    // adjoint consistency: delta(slash) v = (delta(slash) v^+)^+
    const Geometry& geo = setup.base();
    SpinorField vplus = SpinorField::zero(g);
    for (std::size_t p = 0; p < g.size(); ++p)
      vplus.d[p] = geo.pm.Ainv() * v.d[p].adjoint();
    const SpinorField dv_plus = dirac_variation(setup, vplus, VarMethod::ClosedForm, 0.0);
    double adj_res = 0.0;
    for (std::size_t p = 0; p < g.size(); ++p) {
      const RowVec4C expect = dv_plus.d[p].adjoint() * geo.pm.A;  // (delta slash v^+)^+
      adj_res = std::max(adj_res, (expect - closed_v.d[p]).cwiseAbs().maxCoeff());
    }
    CHECK(adj_res / scale_v < 1e-9);
  }
}

TEST_CASE("zero deformation gives zero variation both ways") {
  DeformationSetup setup = make_setup("conformal", 0.0);
  const Grid& g = setup.base().slab.grid;
  CospinorField v = CospinorField::zero(g);
  for (std::size_t p = 0; p < g.size(); ++p) v.d[p] = RowVec4C::Ones();
  const CospinorField c = dirac_variation(setup, v, VarMethod::ClosedForm, 0.0);
  const CospinorField fd = dirac_variation(setup, v, VarMethod::FiniteDiff, 1e-3);
  double mc = 0.0, mf = 0.0;
  for (std::size_t p = 0; p < g.size(); ++p) {
    mc = std::max(mc, c.d[p].cwiseAbs().maxCoeff());
    mf = std::max(mf, fd.d[p].cwiseAbs().maxCoeff());
  }
  CHECK(mc < 1e-12);
  CHECK(mf < 1e-9);
}

TEST_CASE("variation of the relative Cauchy evolution") {
  DeformationSetup setup = make_setup("conformal", 0.5);
  const Grid& g = setup.base().slab.grid;
  const DoubleField f = bump_field(g, 2.5, 2.6, 0.25, 0.8, 17);
  const VarRceReport rep = verify_var_rce(setup, f, 1e-3);
  CHECK(rep.rel_seminorm < 5e-3);
  CHECK(rep.sign == 1);
}

TEST_CASE("tetrad gauge independence of the variation vector") {
  DeformationSetup setup = make_setup("tx", 0.5);
  const Grid& g = setup.base().slab.grid;
  const Propagator& prop = setup.base_prop();
  const DoubleField f = bump_field(g, 2.5, 2.9, 0.25, 0.8, 18);
  const DoubleField sf = prop.smap(f);

  const auto de_plain = setup.delta_einv();
  const clifford::LieAlgebraElement gen = clifford::LieAlgebraElement::basis(0);
  const auto de_rot = setup.delta_einv(&gen);

  auto rhs_vec = [&](const std::vector<Mat4R>& de) {
    const SpinorField du = dirac_variation(setup, sf.u, VarMethod::ClosedForm, 0.0, &de);
    const CospinorField dv = dirac_variation(setup, sf.v, VarMethod::ClosedForm, 0.0, &de);
    return scale(rmap(DoubleField{du, dv}), cd(0.0, -1.0));
  };
  const DoubleField r1 = rhs_vec(de_plain);
  const DoubleField r2 = rhs_vec(de_rot);
  // the vectors differ pointwise but agree in the algebra
  CHECK(max_abs(sub(r1, r2)) / max_abs(r1) > 1e-6);
  const double sn = prop.seminorm(sub(r1, r2));
  CHECK(sn / prop.seminorm(r1) < 2e-3);
}

TEST_CASE("term ledger: operator-kernel terms vanish in the algebra") {
  DeformationSetup setup = make_setup("conformal", 0.5);
  const Grid& g = setup.base().slab.grid;
  const Propagator& prop = setup.base_prop();
  const DoubleField f = bump_field(g, 2.5, 2.6, 0.25, 0.8, 19);
  const DoubleField sf = prop.smap(f);
  const VarLedger led = var_ledger_terms(setup, sf.v);
  auto sn = [&](const CospinorField& w) {
    DoubleField d = DoubleField::zero(g);
    d.v = w;
    return prop.seminorm(d);
  };
  const double scale =
      sn(dirac_variation(setup, sf.v, VarMethod::ClosedForm, 0.0));
  CHECK(sn(led.pc_image_frame) / scale < 5e-3);
  CHECK(sn(led.pc_image_trace) / scale < 5e-3);
  CHECK(sn(led.onshell_frame) / scale < 5e-3);
  CHECK(sn(led.onshell_trace) / scale < 5e-3);
}

TEST_CASE("stress-commutator form of the evolution derivative") {
  for (const char* dir : {"conformal", "tx"}) {
    DeformationSetup setup = make_setup(dir, 0.5);
    const Grid& g = setup.base().slab.grid;
    const DoubleField f = bump_field(g, 2.5, 2.9, 0.25, 0.8, 20);
    const ThmRceReport rep = verify_thm_rce(setup, f, 1e-3);
    CHECK(rep.rel_seminorm < 2e-2);
  }
}

TEST_CASE("classical stress tensor coincidence and the momentum formula") {
  auto geo =
      make_geometry(conformal_bump_slab(65, 64, 1.5, 2.0 * M_PI, 0.2, 0.75, 3.0, 0.5, 1.0));
  const Grid& g = geo->slab.grid;
  const SpinorField psi = plane_wave(g, 2.0, 1.0);
  CHECK(classical_stress_coincidence(*geo, psi) < 1e-8);
  CHECK(momentum_formula_residual(*geo, psi, g.nt / 2) < 1e-8);
}
