#pragma once

#include <utility>
#include <vector>

#include "ctrllab/flow.hpp"
#include "ctrllab/grid.hpp"
#include "ctrllab/pde.hpp"

namespace ctrllab {

struct QuadratureNonConvergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Frequency-side bump profile (1-|z|^2)^4 scaled to unit L^2 norm.
double theta_profile(const Point& zeta, int dim);
double theta_l2_normalizer(int dim);

struct BZKBeamParams {
  int dim = 1;
  double eps = 0.01;
  Point xi_bar{1.0, 0.0};  // unit frequency direction
  Point x0{0.5, 0.5};      // concentration point
  int k = 1;               // decay order, k > dim/4
  double delta = 0.15;     // separation radius
  int quad_order = 0;      // 0 = choose automatically
};

// Evaluates the free-space pair (psi, phi) of the concentrating solution at
// one space-time point by Gauss-Legendre quadrature over the compact
// frequency support.
std::pair<cplx, cplx> bzk_beam_evaluate(const BZKBeamParams& p, const Point& x,
                                        double t, double T);

// Quadrature order such that doubling changes probe values by < 1e-8.
int bzk_auto_quad_order(const BZKBeamParams& p, const SpatialGrid& g, double T);

// Adjoint correction restoring the homogeneous boundary condition: solves
// the backward system with Dirichlet data -phi|_boundary and zero terminal
// state.
BzkBoundaryResult bzk_boundary_correction(const BZKBeamParams& p,
                                          const SpatialGrid& g,
                                          const TimeGrid& tg);

struct BeamReport {
  std::vector<double> param;
  std::vector<double> norm_initial;
  std::vector<double> norm_localized;
  std::vector<double> norm_correction;
  std::vector<double> ratio;
  double slope_initial = 0.0;
  double slope_localized = 0.0;
  double slope_ratio = 0.0;
};

BeamReport bzk_beam_sweep(const std::vector<double>& eps_list,
                          const RegionSpec& omega0, const SpatialGrid& g,
                          const TimeGrid& tg, BZKBeamParams base);

// ---- BBM high-frequency ansatz ----

struct WKBBeamParams {
  int dim = 1;
  double h = 0.01;
  Point xi0{1.0, 0.0};  // nonzero frequency vector
  Point x0{0.6, 0.5};
  double delta = 0.3;   // support radius of the cutoff
};

struct WKBFields {
  SpaceTimeField<cplx> psi_h;
  SpaceTimeField<cplx> f1, f2;
  // per-interval residuals of the discrete operator applied to psi_h
  std::vector<std::vector<cplx>> r_half;
  double r_norm_sq = 0.0;
};

double wkb_cutoff(const WKBBeamParams& p, const Point& x);

WKBFields bbm_wkb_fields(const WKBBeamParams& p, const SampledAdvection& adv,
                         const SpatialGrid& g, const TimeGrid& tg);

// Formal expansion coefficients of the operator applied to the ansatz:
// applying the continuous operator gives e^{i alpha/h} (c[0]/h + c[1] +
// c[2] h + c[3] h^2) with these sampled coefficient fields.
std::array<SpaceTimeField<cplx>, 4> wkb_expansion_coefficients(
    const WKBBeamParams& p, const SampledAdvection& adv, const SpatialGrid& g,
    const TimeGrid& tg);

BeamReport bbm_beam_sweep(const std::vector<double>& h_list,
                          const RegionSpec& omega, const SampledAdvection& adv,
                          const SpatialGrid& g, const TimeGrid& tg,
                          WKBBeamParams base);

}  // namespace ctrllab
