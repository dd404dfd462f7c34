#pragma once

#include <vector>

#include "ctrllab/flow.hpp"
#include "ctrllab/grid.hpp"
#include "ctrllab/pde.hpp"

namespace ctrllab {

struct HUMProblem {
  EquationKind equation = EquationKind::bzk;
  ScalarField<double> z0;
  const MovingRegion* region = nullptr;  // must carry its smooth indicator
  double beta = 1e-6;
  double cg_tol = 1e-8;
  int cg_max_iter = 500;
  const SampledAdvection* advection = nullptr;  // bbm only
};

struct ControlSolution {
  ScalarField<double> psi_T_opt;
  SpaceTimeField<double> v;  // chi times the optimal adjoint trace
  double final_norm = 0.0;   // ||z(T)||_{L^2}
  double cost = 0.0;         // ||v||^2 over the space-time cylinder
  int cg_iterations = 0;
  std::vector<double> cg_residuals;
  std::vector<double> cg_objective;  // J along the iteration, from J(0)=0
  bool converged = false;
  double j_opt = 0.0;
};

// J_beta(psi_T) = 1/2 iint chi^2 psi^2 + beta/2 ||psi_T||^2 + <psi(0), z0>,
// with the observation trace taken through the scheme-consistent pairing so
// the returned gradient is the exact discrete one.
std::pair<double, ScalarField<double>> hum_value_and_gradient(
    const HUMProblem& problem, const ScalarField<double>& psi_T);

struct CGStalled : std::runtime_error {
  using std::runtime_error::runtime_error;
};

ControlSolution solve_null_control(const HUMProblem& problem);

struct DiagnosticCurve {
  struct Cell {
    double beta = 0.0;
    double cost = 0.0;
    double final_norm = 0.0;
    int cg_iters = 0;
    bool converged = false;
  };
  std::vector<Cell> fixed_cells;
  std::vector<Cell> moving_cells;
  // geometric cost growth per beta-decade fitted over the last three points
  double growth_fixed = 0.0;
  double growth_moving = 0.0;
};

DiagnosticCurve dichotomy_diagnostic(const ScalarField<double>& z0,
                                     const MovingRegion& fixed_region,
                                     const MovingRegion& moving_region,
                                     const std::vector<double>& betas,
                                     EquationKind equation,
                                     const SampledAdvection* advection,
                                     double cg_tol = 1e-8, int cg_max = 500);

}  // namespace ctrllab
