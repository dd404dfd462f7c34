#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ctrllab/flow.hpp"
#include "ctrllab/grid.hpp"

namespace ctrllab {

// Time profile: 1/t on (0, tau/2], strictly decreasing C^2 bridge on
// (tau/2, tau), 1 on [tau, T/2], mirrored about T/2.
double r_profile(double t, double tau_margin, double T);

// Weight base function sampled on the interior grid plus ghost layers, so
// discrete derivatives (up to fourth order) are available everywhere
// including at the walls.
struct EtaField {
  SpatialGrid grid;
  TimeGrid time;
  int ghosts = 3;

  std::vector<double> v;  // slice-major over extended lattice

  int ext(int axis) const { return grid.n[axis] + 2 * ghosts; }
  std::size_t slice_stride() const {
    return static_cast<std::size_t>(ext(0)) * (grid.dim == 2 ? ext(1) : 1);
  }
  // i, j range over [-ghosts, n + ghosts); i = -1 and i = n are the walls
  double at(int m, int i, int j = 0) const {
    std::size_t off = static_cast<std::size_t>(m) * slice_stride();
    std::size_t col = static_cast<std::size_t>(i + ghosts);
    if (grid.dim == 2)
      col += static_cast<std::size_t>(j + ghosts) * ext(0);
    return v[off + col];
  }
  double& at(int m, int i, int j = 0) {
    std::size_t off = static_cast<std::size_t>(m) * slice_stride();
    std::size_t col = static_cast<std::size_t>(i + ghosts);
    if (grid.dim == 2)
      col += static_cast<std::size_t>(j + ghosts) * ext(0);
    return v[off + col];
  }

  static EtaField sample(const SpatialGrid& g, const TimeGrid& tg, int ghosts,
                         const std::function<double(const Point&, double)>& f);

  // max |eta| over the closed domain (walls included)
  double sup_closed() const;
};

struct EtaSweepParams {
  double offset = 0.65;     // B
  double amplitude = 0.2;   // b
  double width = 0.5;       // L; wide enough that the gradient stays O(1)
                            // against the higher derivatives on all of the
                            // domain the profile ever faces
};

// 1D sweeping construction: eta(x,t) = B + b * psi0((x - c(t)) / L) with
// psi0(u) = 1/(1+u^2) and c(t) the flow image of the reference-set center.
EtaField build_eta_sweep_1d(const FlowMap& flow, double center0,
                            const SpatialGrid& g, const TimeGrid& tg,
                            const EtaSweepParams& params = {});

struct WeightPropertyReport {
  bool p1 = false, p2 = false, p3 = false, p4 = false, p5 = false, p6 = false;
  // signed worst-case margins; property passes iff margin > 0
  double m1 = 0, m2 = 0, m3 = 0, m4 = 0, m5 = 0, m6 = 0;
  std::array<int, 2> resolution{0, 0};
  int time_steps = 0;
  bool all() const { return p1 && p2 && p3 && p4 && p5 && p6; }
  std::string summary() const;
};

// Grid certification of the six weight-function properties. omega1 is the
// rasterized moving section whose one-cell dilation is excluded from the
// nonvanishing checks; tau_margin bounds the sign-check windows.
WeightPropertyReport check_weight_properties(const EtaField& eta,
                                             const MovingRegion& omega1,
                                             double tau_margin);

struct WeightSet {
  SpatialGrid grid;
  TimeGrid time;
  double lambda = 1.0;
  double s = 1.0;
  double tau_margin = 0.1;
  double eta_sup = 0.0;       // grid max over the closed domain
  double eta_sup_infl = 0.0;  // 5% safety inflation used inside exponents

  SpaceTimeField<double> eta;    // interior samples
  std::vector<double> r;         // per time node; +inf at t = 0, T
  SpaceTimeField<double> gamma;  // e^{lambda eta}
  SpaceTimeField<double> alpha;  // r (e^{2 lambda |eta|_inf} - gamma)
  SpaceTimeField<double> xi;     // r gamma
  std::vector<double> alpha_star;  // per-slice max of alpha
  std::vector<double> xi_star;     // per-slice min of xi
};

WeightSet assemble_weights(const EtaField& eta, double tau_margin,
                           double lambda, double s);

}  // namespace ctrllab
