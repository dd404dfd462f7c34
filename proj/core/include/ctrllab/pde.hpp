#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "ctrllab/grid.hpp"

namespace ctrllab {

enum class EquationKind { bzk, bbm };

struct BBMCoefficients {
  std::function<Point(const Point&, double)> A;
  static BBMCoefficients constant(const Point& a);
  static BBMCoefficients zero();
};

// Advection samples on the space-time lattice plus coarse smoothness bounds.
struct SampledAdvection {
  SpatialGrid grid;
  TimeGrid time;
  std::vector<double> ax, ay;  // slice-major per component
  double max_abs = 0.0, max_div = 0.0, max_dt = 0.0, max_div_dt = 0.0;

  std::span<const double> x_slice(int m) const {
    return {ax.data() + static_cast<std::size_t>(m) * grid.total(),
            static_cast<std::size_t>(grid.total())};
  }
  std::span<const double> y_slice(int m) const {
    return {ay.data() + static_cast<std::size_t>(m) * grid.total(),
            static_cast<std::size_t>(grid.total())};
  }
};

SampledAdvection sample_advection(const BBMCoefficients& coeff,
                                  const SpatialGrid& g, const TimeGrid& tg);

struct StepDiagnostics {
  std::vector<double> residual;    // per-step relative residual
  std::vector<int> inner_iters;    // per-step inner iterations
  double max_residual() const;
};

struct EvolutionResult {
  SpaceTimeField<double> y;
  SpaceTimeField<double> z;
  StepDiagnostics diag;
};

struct AdjointResult {
  SpaceTimeField<double> phi;
  SpaceTimeField<double> psi;
  // duality trace: pairing psi_pairing against v*chi with trapezoid weights
  // reproduces the forward terminal pairing exactly
  SpaceTimeField<double> psi_pairing;
};

EvolutionResult solve_bzk_forward(const ScalarField<double>& z0,
                                  const SpaceTimeField<double>& v,
                                  const SpaceTimeField<double>& chi);

AdjointResult solve_bzk_adjoint(const ScalarField<double>& psi_T,
                                const TimeGrid& tg);

EvolutionResult solve_bbm_forward(const ScalarField<double>& z0,
                                  const SpaceTimeField<double>& v,
                                  const SpaceTimeField<double>& chi,
                                  const SampledAdvection& adv);

AdjointResult solve_bbm_adjoint(const ScalarField<double>& psi_T,
                                const TimeGrid& tg,
                                const SampledAdvection& adv);

// |<psi(0), z0> + \iint v chi psi - <psi_T, z(T)>| relative to the largest
// term, with the pairing evaluated through the scheme-consistent trace
double duality_residual(const ScalarField<double>& z0,
                        const SpaceTimeField<double>& v,
                        const SpaceTimeField<double>& chi,
                        const ScalarField<double>& psi_T, EquationKind kind,
                        const SampledAdvection* adv = nullptr);

// space-time pairing sum_m w_m <a^m, b^m> with trapezoid weights w
double spacetime_pairing(const SpaceTimeField<double>& a,
                         const SpaceTimeField<double>& b);

// ---- complex variants used by the beam constructions ----

struct BzkBoundaryResult {
  SpaceTimeField<cplx> psi;
  SpaceTimeField<cplx> phi;
};

// Backward adjoint solve with inhomogeneous Dirichlet data on phi and zero
// terminal state, via lifting of the boundary data.
BzkBoundaryResult solve_bzk_adjoint_boundary(
    const SpatialGrid& g, const TimeGrid& tg,
    const std::function<cplx(const Point&, double)>& phi_boundary);

// Forward solve of the correction system driven by per-interval residuals
// r_half[m] (m = 0..M-1), zero initial state. Adding the result to the
// field that produced r_half yields an exact discrete solution.
SpaceTimeField<cplx> solve_bbm_correction(
    const SpatialGrid& g, const TimeGrid& tg, const SampledAdvection& adv,
    const std::vector<std::vector<cplx>>& r_half);

}  // namespace ctrllab
