#include <cmath>

#include "doctest.h"
#include "spinorlab/car.hpp"

using namespace spinorlab;
using namespace spinorlab::geometry;
using namespace spinorlab::fields;
using namespace spinorlab::solver;
using namespace spinorlab::car;

namespace {

DoubleField bump_field(const Grid& g, double t0, double x0, double wt, double wx, unsigned seed,
                       bool spinor_part = true, bool cospinor_part = true) {
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

struct Fixture {
  std::shared_ptr<const Geometry> geo;
  std::unique_ptr<Propagator> prop;
  TestFamily fam;

  explicit Fixture(int nx = 64, int nt = 81, double T = 1.6) {
    geo = make_geometry(minkowski_slab(nt, nx, T, 2.0 * M_PI));
    prop = std::make_unique<Propagator>(geo, SolverConfig{1.0, 0.45});
    fam.geo = geo;
    const Grid& g = geo->slab.grid;
    fam.members.push_back(bump_field(g, 0.7, 2.0, 0.3, 0.8, 301));
    fam.members.push_back(bump_field(g, 0.8, 4.2, 0.3, 0.8, 302));
    fam.members.push_back(bump_field(g, 0.9, 1.0, 0.3, 0.8, 303));
  }
};

}  // namespace

TEST_CASE("construction residuals of the finite CAR system") {
  Fixture fx;
  CarSystem sys(fx.fam, *fx.prop);
  CHECK(sys.rank() >= 1);
  CHECK(sys.car_identity_residual() < 1e-12);
  CHECK(sys.gamma_fix_residual() < 1e-6);
  CHECK(sys.star_structure_residual() < 1e-6);
}

TEST_CASE("span CAR identity closes at the Gram level") {
  Fixture fx;
  CarSystem sys(fx.fam, *fx.prop);
  Rng rng(17);
  const int n = static_cast<int>(fx.fam.members.size());
  for (int trial = 0; trial < 10; ++trial) {
    VecXC c(2 * n), d(2 * n);
    for (int i = 0; i < 2 * n; ++i) {
      c(i) = cd(uniform(rng), uniform(rng));
      d(i) = cd(uniform(rng), uniform(rng));
    }
    const SparseOp Bc = sys.B_span(c);
    const SparseOp Bd = sys.B_span(d);
    const SparseOp anti =
        SparseOp(SparseOp(SparseOp(Bc.adjoint()) * Bd) + SparseOp(Bd * SparseOp(Bc.adjoint())));
    const cd expect = sys.pair_span(c, d);
    SparseOp res = anti;
    for (int k = 0; k < static_cast<int>(sys.dim()); ++k) res.coeffRef(k, k) -= expect;
    CHECK(res.norm() <= 1e-9 * (1.0 + std::abs(expect)) * std::sqrt(double(sys.dim())));
  }
}

TEST_CASE("norm of a cospinor smear matches the pairing") {
  Fixture fx;
  const Grid& g = fx.geo->slab.grid;
  DoubleField f = DoubleField::zero(g);
  f.v = bump_field(g, 0.8, 3.0, 0.3, 0.8, 304, false, true).v;
  TestFamily fam;
  fam.geo = fx.geo;
  fam.members.push_back(f);
  CarSystem sys(fam, *fx.prop);
  const double c = std::real(fx.prop->pairing_volume(f, f));
  const double nrm = sys.op_norm(sys.B_member(0));
  CHECK(std::abs(nrm * nrm - c) <= 1e-10 * c);

  // the pairing value is -i int <S_c v, v^+>, i.e. +i int <v, S v^+>; check
  // the sign adjudication against the directly assembled integrals
  const DoubleField sf = fx.prop->smap(f);
  cd direct = 0.0;
  const double w0 = g.dt() * g.dx();
  for (std::size_t p = 0; p < g.size(); ++p) {
    // -i <S_c v, v^+> with v^+ = Ainv v^dag
    direct += w0 * fx.geo->slab.sqrtg[p] *
              (sf.v.d[p] * fx.geo->pm.Ainv() * f.v.d[p].adjoint())(0, 0);
  }
  direct *= cd(0.0, -1.0);
  CHECK(std::abs(direct - cd(c, 0.0)) < 1e-8 * c);
}

TEST_CASE("B annihilates the image of P up to solver accuracy") {
  Fixture fx;
  const Grid& g = fx.geo->slab.grid;
  CarSystem sys(fx.fam, *fx.prop);
  DoubleField h = bump_field(g, 0.8, 3.1, 0.35, 0.9, 305);
  const DoubleField ph = apply_P(*fx.geo, h, fx.prop->config().mass);
  const SparseOp bph = sys.B(ph);
  const SparseOp bh = sys.B(h);
  const double rel = sys.op_norm(bph) / std::max(1e-300, sys.op_norm(bh));
  CHECK(rel < 5e-3);  // discretisation-limited; the acceptance run measures it at N_x = 256
}

TEST_CASE("field anticommutators") {
  Fixture fx;
  const Grid& g = fx.geo->slab.grid;
  // family made of a pure spinor and a pure cospinor smear, so that the
  // operators represent the smears themselves rather than span projections
  const DoubleField fu = bump_field(g, 0.75, 2.4, 0.3, 0.8, 306, true, false);
  const DoubleField fv = bump_field(g, 0.85, 2.8, 0.3, 0.8, 307, false, true);
  TestFamily fam;
  fam.geo = fx.geo;
  fam.members.push_back(fu);
  fam.members.push_back(fv);
  CarSystem sys(fam, *fx.prop);
  const SparseOp pp = sys.B_member(0);  // psi^+(u)
  const SparseOp ps = sys.B_member(1);  // psi(v)
  // {psi^+(u), psi(v)} = ((u+0)^+, 0+v) I, evaluated through the same Gram
  VecXC cu = VecXC::Zero(2), cv = VecXC::Zero(2);
  cu(0) = 1.0;
  cv(1) = 1.0;
  const cd expect = sys.pair_span(sys.span_adjoint(cu), cv);
  SparseOp anti = SparseOp(SparseOp(pp * ps) + SparseOp(ps * pp));
  for (int k = 0; k < static_cast<int>(sys.dim()); ++k) anti.coeffRef(k, k) -= expect;
  CHECK(anti.norm() < 1e-9 * std::abs(expect) * std::sqrt(double(sys.dim())));
  // consistency of the Gram value with the directly solved pairing
  const cd solver_value = fx.prop->pairing_volume(adjoint(*fx.geo, fu), fv);
  CHECK(std::abs(expect - solver_value) < 1e-4 * std::abs(expect));
  // {psi, psi} and {psi^+, psi^+} vanish
  const SparseOp a1 = SparseOp(2.0 * SparseOp(ps * ps));
  const SparseOp a2 = SparseOp(2.0 * SparseOp(pp * pp));
  CHECK(a1.norm() < 1e-7 * std::abs(expect));
  CHECK(a2.norm() < 1e-7 * std::abs(expect));
}

TEST_CASE("causality: identity, spacelike commutation, timelike sanity") {
  Fixture fx(96, 97, 1.5);
  const Grid& g = fx.geo->slab.grid;
  TestFamily fam;
  fam.geo = fx.geo;
  fam.members.push_back(bump_field(g, 0.75, 1.0, 0.25, 0.5, 308));
  fam.members.push_back(bump_field(g, 0.75, 1.7, 0.25, 0.5, 309));
  fam.members.push_back(bump_field(g, 0.75, 4.0, 0.25, 0.5, 310));  // spacelike to both
  fam.members.push_back(bump_field(g, 1.05, 1.1, 0.25, 0.5, 311));  // timelike to the first
  CarSystem sys(fam, *fx.prop);

  const double id_res = causality_check(sys, fam.members[0], fam.members[1], fam.members[3]);
  CHECK(id_res < 1e-9);

  const SparseOp B0 = sys.B(fam.members[0]);
  const SparseOp B1 = sys.B(fam.members[1]);
  const SparseOp B2 = sys.B(fam.members[2]);
  const SparseOp even = SparseOp(B0 * B1);
  const SparseOp comm = SparseOp(SparseOp(even * B2) - SparseOp(B2 * even));
  const double scale = sys.op_norm(B0) * sys.op_norm(B1) * sys.op_norm(B2);
  CHECK(comm.norm() / scale < 1e-6);

  const SparseOp B3 = sys.B(fam.members[3]);
  const SparseOp comm2 =
      SparseOp(SparseOp(SparseOp(B0 * B1) * B3) - SparseOp(B3 * SparseOp(B0 * B1)));
  CHECK(comm2.norm() / scale > 1e-3);  // genuinely nonzero detector
}

TEST_CASE("parity split") {
  Fixture fx;
  CarSystem sys(fx.fam, *fx.prop);
  const SparseOp pi = sys.parity();
  const SparseOp pi2 = SparseOp(pi * pi);
  SparseOp id(sys.dim(), sys.dim());
  id.setIdentity();
  CHECK(SparseOp(pi2 - id).norm() == 0.0);

  const SparseOp b = sys.B_member(0);
  const auto [beven, bodd] = parity_split(sys, b);
  CHECK(beven.norm() < 1e-12 * b.norm());
  const SparseOp prod = SparseOp(sys.B_member(0) * sys.B_member(1));
  const auto [peven, podd] = parity_split(sys, prod);
  CHECK(podd.norm() < 1e-12 * prod.norm());
  // even part commutes with parity
  CHECK(SparseOp(SparseOp(peven * pi) - SparseOp(pi * peven)).norm() < 1e-12 * prod.norm());
}

TEST_CASE("Majorana split") {
  Fixture fx;
  const Grid& g = fx.geo->slab.grid;
  Rng rng(19);
  for (int trial = 0; trial < 10; ++trial) {
    const DoubleField f = bump_field(g, 0.7 + 0.02 * trial, 1.0 + 0.5 * trial, 0.3, 0.7,
                                     400 + trial);
    const auto [fp, fm] = majorana_split(*fx.geo, f);
    // reconstruction is exact
    CHECK(max_abs(sub(add(fp, fm), f)) < 1e-14 * max_abs(f));
    // R (f_pm)^{c+} = +- f_pm pointwise
    const DoubleField tp = rmap(adjoint(*fx.geo, charge_conj(*fx.geo, fp)));
    const DoubleField tm = rmap(adjoint(*fx.geo, charge_conj(*fx.geo, fm)));
    CHECK(max_abs(sub(tp, fp)) < 1e-10 * std::max(1e-300, max_abs(fp)));
    CHECK(max_abs(add(tm, fm)) < 1e-10 * std::max(1e-300, max_abs(fm)));
  }
  // eigenvector case: f with T f = f has vanishing minus part
  const DoubleField f0 = bump_field(g, 0.8, 2.0, 0.3, 0.7, 450);
  const auto [fp0, fm0] = majorana_split(*fx.geo, f0);
  const auto [fpp, fpm] = majorana_split(*fx.geo, fp0);
  CHECK(max_abs(fpm) < 1e-13 * max_abs(fp0));
  // orthogonality through the pairing
  const cd q = fx.prop->pairing_volume(fp0, fm0);
  const cd scale = fx.prop->pairing_volume(f0, f0);
  CHECK(std::abs(q) < 1e-8 * std::abs(scale));
}

TEST_CASE("Majorana orthogonality over many random sections") {
  Fixture fx(48, 65, 1.2);
  const Grid& g = fx.geo->slab.grid;
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const DoubleField f = bump_field(g, 0.6 + 0.01 * trial, 0.3 * trial, 0.25, 0.6, 500 + trial);
    const auto [fp, fm] = majorana_split(*fx.geo, f);
    const cd q = fx.prop->pairing_volume(fp, fm);
    const cd s = fx.prop->pairing_volume(f, f);
    worst = std::max(worst, std::abs(q) / std::abs(s));
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("quasi-free vacuum on a static slab") {
  const int nx = 64, nt = 81;
  auto geo = make_geometry(minkowski_slab(nt, nx, 1.6, 2.0 * M_PI));
  Propagator prop(geo, SolverConfig{1.0, 0.45});
  const Grid& g = geo->slab.grid;
  TestFamily fam;
  fam.geo = geo;
  fam.members.push_back(bump_field(g, 0.7, 2.0, 0.3, 0.8, 601));
  fam.members.push_back(bump_field(g, 0.8, 4.0, 0.3, 0.8, 602));
  // include the image of P for the equation-of-motion entries
  const DoubleField h = bump_field(g, 0.8, 3.0, 0.35, 0.9, 603);
  fam.members.push_back(apply_P(*geo, h, 1.0));

  const QuasiFreeState st = vacuum_state(fam, prop);
  CHECK(st.hermiticity_residual < 1e-12);

  // sum rule: W_ij + W_ji = (f_i^+, f_j)
  double worst = 0.0, scale = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const cd sum = st.W(i, j) + st.W(j, i);
      const cd target = prop.pairing_volume(adjoint(*geo, fam.members[i]), fam.members[j]);
      worst = std::max(worst, std::abs(sum - target));
      scale = std::max(scale, std::abs(target));
    }
  CHECK(worst / scale < 2e-4);  // volume-vs-surface agreement at this resolution

  // positivity of the state matrix
  Eigen::SelfAdjointEigenSolver<MatXC> es(st.state_psd);
  CHECK(es.eigenvalues().minCoeff() > -1e-8 * es.eigenvalues().cwiseAbs().maxCoeff());

  // equation of motion: rows and columns against P-image members vanish
  double eom = 0.0;
  for (int i = 0; i < 3; ++i) {
    eom = std::max(eom, std::abs(st.W(2, i)));
    eom = std::max(eom, std::abs(st.W(i, 2)));
  }
  CHECK(eom / scale < 5e-4);

  // a time-dependent slab is rejected
  Rng rng(5);
  auto curved = make_geometry(random_smooth_slab(33, 32, 1.0, 2.0 * M_PI, 0.05, rng));
  Propagator prop2(curved, SolverConfig{1.0, 0.45});
  TestFamily fam2;
  fam2.geo = curved;
  fam2.members.push_back(bump_field(curved->slab.grid, 0.5, 2.0, 0.2, 0.6, 604));
  CHECK_THROWS_AS(vacuum_state(fam2, prop2), NotStatic);
}

TEST_CASE("seminorm kernel matches the dynamics ideal") {
  Fixture fx;
  const Grid& g = fx.geo->slab.grid;
  // f = P h has vanishing seminorm
  const DoubleField h = bump_field(g, 0.8, 2.5, 0.35, 0.9, 701);
  const DoubleField ph = apply_P(*fx.geo, h, fx.prop->config().mass);
  const double sn = fx.prop->seminorm(ph);
  const double sn_h = fx.prop->seminorm(h);
  CHECK(sn / sn_h < 5e-3);
  // a null Gram eigenvector has a small solution
  TestFamily fam;
  fam.geo = fx.geo;
  fam.members.push_back(h);
  fam.members.push_back(ph);
  CarSystem sys(fam, *fx.prop);
  // the Gram diagonal of the P-image member is tiny relative to h's
  const double gh = std::abs(sys.gram()(0, 0));
  const double gph = std::abs(sys.gram()(1, 1));
  CHECK(gph / gh < 1e-3);
}

TEST_CASE("rank cap is enforced") {
  Fixture fx;
  const Grid& g = fx.geo->slab.grid;
  TestFamily fam;
  fam.geo = fx.geo;
  for (int i = 0; i < 8; ++i)
    fam.members.push_back(bump_field(g, 0.65 + 0.03 * (i % 4), 0.7 * i, 0.25, 0.5, 800 + i));
  CHECK_THROWS_AS(CarSystem(fam, *fx.prop), RankTooLarge);
}
