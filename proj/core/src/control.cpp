#include "ctrllab/control.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ctrllab {

namespace {

void require_valid(const HUMProblem& pb) {
  if (!pb.region || !pb.region->has_chi)
    throw std::invalid_argument("HUM problem needs a region with indicator");
  if (!(pb.beta > 0.0)) throw std::invalid_argument("HUM penalty must be > 0");
  if (pb.equation == EquationKind::bbm && !pb.advection)
    throw std::invalid_argument("bbm HUM problem needs advection samples");
}

AdjointResult adjoint_solve(const HUMProblem& pb, const ScalarField<double>& psi_T) {
  if (pb.equation == EquationKind::bzk)
    return solve_bzk_adjoint(psi_T, pb.region->time);
  return solve_bbm_adjoint(psi_T, pb.region->time, *pb.advection);
}

EvolutionResult forward_solve(const HUMProblem& pb, const ScalarField<double>& z0,
                              const SpaceTimeField<double>& v) {
  if (pb.equation == EquationKind::bzk)
    return solve_bzk_forward(z0, v, pb.region->chi);
  return solve_bbm_forward(z0, v, pb.region->chi, *pb.advection);
}

SpaceTimeField<double> control_from_trace(const HUMProblem& pb,
                                          const SpaceTimeField<double>& trace) {
  SpaceTimeField<double> v(trace.grid, trace.time);
  const auto& chi = pb.region->chi;
  for (int m = 0; m <= trace.time.steps; ++m) {
    auto vs = v.slice(m);
    auto ts = trace.slice(m);
    auto cs = chi.slice(m);
    for (int i = 0; i < trace.grid.total(); ++i) vs[i] = cs[i] * ts[i];
  }
  return v;
}

// H d = forward-terminal of the control generated by d, plus beta d
ScalarField<double> apply_hessian(const HUMProblem& pb,
                                  const ScalarField<double>& d,
                                  const ScalarField<double>& zero_state) {
  AdjointResult adj = adjoint_solve(pb, d);
  SpaceTimeField<double> v = control_from_trace(pb, adj.psi_pairing);
  EvolutionResult fwd = forward_solve(pb, zero_state, v);
  ScalarField<double> out(d.grid);
  auto zt = fwd.z.slice(pb.region->time.steps);
  for (int i = 0; i < d.grid.total(); ++i)
    out.v[i] = zt[i] + pb.beta * d.v[i];
  return out;
}

}  // namespace

std::pair<double, ScalarField<double>> hum_value_and_gradient(
    const HUMProblem& pb, const ScalarField<double>& psi_T) {
  require_valid(pb);
  const SpatialGrid& g = pb.z0.grid;
  AdjointResult adj = adjoint_solve(pb, psi_T);
  SpaceTimeField<double> v = control_from_trace(pb, adj.psi_pairing);
  double obs = integrate<double>(v);  // iint chi^2 |trace|^2
  double value = 0.5 * obs + 0.5 * pb.beta * inner(g, psi_T.v, psi_T.v) +
                 inner(g, adj.psi.slice(0), pb.z0.v);
  EvolutionResult fwd = forward_solve(pb, pb.z0, v);
  ScalarField<double> grad(g);
  auto zt = fwd.z.slice(pb.region->time.steps);
  for (int i = 0; i < g.total(); ++i)
    grad.v[i] = zt[i] + pb.beta * psi_T.v[i];
  return {value, grad};
}

ControlSolution solve_null_control(const HUMProblem& pb) {
  require_valid(pb);
  const SpatialGrid& g = pb.z0.grid;
  const TimeGrid& tg = pb.region->time;
  const int n = g.total();

  ControlSolution sol;
  sol.psi_T_opt = ScalarField<double>(g);

  ScalarField<double> zero_state(g);
  SpaceTimeField<double> zero_control(g, tg);

  // c = free terminal state; solve (Lambda + beta I) x = -c
  EvolutionResult free = forward_solve(pb, pb.z0, zero_control);
  std::vector<double> r(n), p(n), hp(n);
  {
    auto zt = free.z.slice(tg.steps);
    for (int i = 0; i < n; ++i) r[i] = -zt[i];
  }
  std::copy(r.begin(), r.end(), p.begin());
  double rr = inner(g, r, r);
  const double r0 = std::sqrt(rr);
  sol.cg_residuals.push_back(r0);
  sol.cg_objective.push_back(0.0);
  double j_cur = 0.0;

  if (r0 == 0.0) {
    sol.converged = true;
  } else {
    ScalarField<double> pf(g);
    for (int it = 0; it < pb.cg_max_iter; ++it) {
      std::copy(p.begin(), p.end(), pf.v.begin());
      ScalarField<double> hpf = apply_hessian(pb, pf, zero_state);
      std::copy(hpf.v.begin(), hpf.v.end(), hp.begin());
      double php = inner(g, p, hp);
      double alpha = rr / php;
      for (int i = 0; i < n; ++i) {
        sol.psi_T_opt.v[i] += alpha * p[i];
        r[i] -= alpha * hp[i];
      }
      j_cur -= 0.5 * alpha * rr;
      sol.cg_objective.push_back(j_cur);
      double rr_new = inner(g, r, r);
      sol.cg_residuals.push_back(std::sqrt(rr_new));
      ++sol.cg_iterations;
      if (std::sqrt(rr_new) <= pb.cg_tol * r0) {
        sol.converged = true;
        break;
      }
      double betak = rr_new / rr;
      rr = rr_new;
      for (int i = 0; i < n; ++i) p[i] = r[i] + betak * p[i];
    }
  }

  AdjointResult adj = adjoint_solve(pb, sol.psi_T_opt);
  sol.v = control_from_trace(pb, adj.psi_pairing);
  EvolutionResult fwd = forward_solve(pb, pb.z0, sol.v);
  sol.final_norm = norm_l2(g, fwd.z.slice(tg.steps));
  sol.cost = integrate<double>(sol.v);
  sol.j_opt = 0.5 * sol.cost +
              0.5 * pb.beta * inner(g, sol.psi_T_opt.v, sol.psi_T_opt.v) +
              inner(g, adj.psi.slice(0), pb.z0.v);
  return sol;
}

DiagnosticCurve dichotomy_diagnostic(const ScalarField<double>& z0,
                                     const MovingRegion& fixed_region,
                                     const MovingRegion& moving_region,
                                     const std::vector<double>& betas,
                                     EquationKind equation,
                                     const SampledAdvection* advection,
                                     double cg_tol, int cg_max) {
  for (std::size_t i = 1; i < betas.size(); ++i)
    if (!(betas[i] < betas[i - 1]))
      throw std::invalid_argument("dichotomy: beta list must strictly decrease");

  DiagnosticCurve curve;
  auto run = [&](const MovingRegion& region, std::vector<DiagnosticCurve::Cell>& cells) {
    for (double beta : betas) {
      HUMProblem pb;
      pb.equation = equation;
      pb.z0 = z0;
      pb.region = &region;
      pb.beta = beta;
      pb.cg_tol = cg_tol;
      pb.cg_max_iter = cg_max;
      pb.advection = advection;
      ControlSolution sol = solve_null_control(pb);
      cells.push_back({beta, sol.cost, sol.final_norm, sol.cg_iterations,
                       sol.converged});
    }
  };
  run(fixed_region, curve.fixed_cells);
  run(moving_region, curve.moving_cells);

  auto growth = [&](const std::vector<DiagnosticCurve::Cell>& cells) {
    const std::size_t k = cells.size();
    if (k < 3) return 0.0;
    std::vector<double> b{cells[k - 3].beta, cells[k - 2].beta, cells[k - 1].beta};
    std::vector<double> c{cells[k - 3].cost, cells[k - 2].cost, cells[k - 1].cost};
    double slope = loglog_slope(b, c);  // d log cost / d log beta
    return std::pow(10.0, -slope);      // factor per decade of shrinking beta
  };
  curve.growth_fixed = growth(curve.fixed_cells);
  curve.growth_moving = growth(curve.moving_cells);
  return curve;
}

}  // namespace ctrllab
