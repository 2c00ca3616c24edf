#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "spinorlab/clifford.hpp"
#include "spinorlab/types.hpp"

namespace spinorlab::geometry {

// Uniform slab grid: t in [0,T] with nt slices, x periodic on [0,L) with nx
// sites.
struct Grid {
  int nt = 0;
  int nx = 0;
  double T = 0.0;
  double L = 0.0;

  double dt() const { return T / (nt - 1); }
  double dx() const { return L / nx; }
  double t(int it) const { return it * dt(); }
  double x(int ix) const { return ix * dx(); }
  std::size_t idx(int it, int ix) const {
    return static_cast<std::size_t>(it) * nx + ix;
  }
  std::size_t size() const { return static_cast<std::size_t>(nt) * nx; }
  int wrap(int ix) const { return ((ix % nx) + nx) % nx; }
};

// Block metric: symmetric (t,x) block plus diagonal transverse entries,
// all fields functions of (t,x) only.
struct MetricSlab {
  Grid grid;
  std::vector<double> gtt, gtx, gxx, gyy, gzz;
  // derived by finalize()
  std::vector<double> itt, itx, ixx;  // inverse of the (t,x) block
  std::vector<double> sqrtg;          // sqrt(-det g)
  std::vector<double> sqrth;          // induced area element on t = const

  void allocate();
  // Validates the Lorentzian invariants and fills the derived arrays.
  void finalize();

  Mat4R g4(std::size_t p) const;
  Mat4R ginv4(std::size_t p) const;
  double max_char_speed() const;
  bool is_static(double tol = 1e-12) const;
};

struct TetradField {
  std::vector<Mat4R> e;     // e[p](a, mu) = e_a^mu
  std::vector<Mat4R> einv;  // einv[p](a, mu) = e^a_mu

  double orthonormality_residual(const MetricSlab& slab) const;
};

struct ConnectionField {
  // sigma[p][b] is the spin connection one-form in frame direction b.
  std::vector<std::array<Mat4C, 4>> sigma;
  // tau_div[p][a] = Gamma^b_{ba}, the frame divergence of the tetrad legs.
  std::vector<std::array<double, 4>> tau_div;
  // Optional (kept when keep_christoffels): Gamma^rho_{mu nu} and Gamma^a_{bc}
  // flattened as [i*16 + j*4 + k].
  std::vector<std::array<double, 64>> coord;
  std::vector<std::array<double, 64>> frame;
  bool has_christoffels = false;
};

TetradField tetrad_from_metric(const MetricSlab& slab);
ConnectionField connection_from_metric(const MetricSlab& slab, const TetradField& tetrad,
                                       bool keep_christoffels = false);

// max over the grid of || gamma_mu gamma_nu + gamma_nu gamma_mu - 2 g_munu ||.
double curved_gamma_check(const MetricSlab& slab, const TetradField& tetrad);

// max over the grid and (a,b) of || sigma_b gamma_a - gamma_a sigma_b -
// Gamma^c_{ba} gamma_c ||; requires keep_christoffels.
double nabla_gamma_residual(const MetricSlab& slab, const TetradField& tetrad,
                            const ConnectionField& conn);

// Everything needed to act with the Dirac operator on fields over a slab.
struct Geometry {
  MetricSlab slab;
  TetradField tetrad;
  ConnectionField conn;
  clifford::DiracRep rep;
  clifford::PairingMatrices pm;

  Mat4C gamma_up(std::size_t p, int mu) const;   // e_a^mu gamma^a
  Mat4C gamma_low(std::size_t p, int mu) const;  // e^a_mu gamma_a
  // Frame components of the future unit normal of t = const.
  Eigen::Vector4d normal_frame(std::size_t p) const;
  Mat4C nslash(std::size_t p) const;
};

std::shared_ptr<const Geometry> make_geometry(MetricSlab slab, bool keep_christoffels = false);

// Replaces the tetrad by the rotated frame e'_a = e_b Lambda^b_a(S) and
// rebuilds the connection.  S must be a constant Spin element.
std::shared_ptr<const Geometry> rotate_frame(const Geometry& geo, const Mat4C& S);

// ---- presets -----------------------------------------------------------

MetricSlab minkowski_slab(int nt, int nx, double T, double L);
// g = dt^2 - a(t)^2 (dx^2 + dy^2 + dz^2), a(t) = 1 + amp*sin(freq*t + phase)
MetricSlab frw_slab(int nt, int nx, double T, double L, double amp, double freq, double phase);
double frw_scale(double t, double amp, double freq, double phase);
// g = Omega^2 (dt^2 - dx^2) - dy^2 - dz^2 with Omega^2 = 1 + amp*bump
MetricSlab conformal_bump_slab(int nt, int nx, double T, double L, double amp, double t0,
                               double x0, double wt, double wx);
// flat metric with g_tx = amp*bump
MetricSlab tx_bump_slab(int nt, int nx, double T, double L, double amp, double t0, double x0,
                        double wt, double wx);
// flat metric plus a smooth low-frequency random perturbation of all block
// components (Lorentzian-guarded).
MetricSlab random_smooth_slab(int nt, int nx, double T, double L, double amp, Rng& rng);

// ---- metric families ---------------------------------------------------

// g(eps) = base + eps*h with h compactly supported in a declared region K.
struct MetricFamily {
  MetricSlab base;
  std::vector<double> htt, htx, hxx, hyy, hzz;
  std::vector<double> chi;  // the scalar bump profile carving out K
  double eps_max = 0.0;
  double K_t_lo = 0.0, K_t_hi = 0.0;  // t-extent of K

  MetricSlab evaluate(double eps) const;
  // Lorentzian check for |eps| <= eps_max (throws DegenerateMetric).
  void validate() const;
};

// direction: "conformal" (h = chi * g0) or "tx" (h_tx = chi).
MetricFamily make_family(const MetricSlab& base, const std::string& direction, double amp,
                         double t0, double x0, double wt, double wx, double eps_max);

// 4th-order finite-difference stencils.
namespace fd {
double dx4(const std::vector<double>& f, const Grid& g, int it, int ix);
double dt4(const std::vector<double>& f, const Grid& g, int it, int ix);
}  // namespace fd

}  // namespace spinorlab::geometry
