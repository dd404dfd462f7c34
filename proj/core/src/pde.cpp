#include "ctrllab/pde.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ctrllab {

BBMCoefficients BBMCoefficients::constant(const Point& a) {
  return {[a](const Point&, double) { return a; }};
}

BBMCoefficients BBMCoefficients::zero() {
  return {[](const Point&, double) { return Point{0.0, 0.0}; }};
}

SampledAdvection sample_advection(const BBMCoefficients& coeff,
                                  const SpatialGrid& g, const TimeGrid& tg) {
  SampledAdvection s;
  s.grid = g;
  s.time = tg;
  const int n = g.total();
  const int M = tg.steps;
  s.ax.resize(static_cast<std::size_t>(n) * (M + 1));
  s.ay.assign(static_cast<std::size_t>(n) * (M + 1), 0.0);
  for (int m = 0; m <= M; ++m) {
    const double t = tg.node(m);
    for (int idx = 0; idx < n; ++idx) {
      Point a = coeff.A(g.node_flat(idx), t);
      s.ax[static_cast<std::size_t>(m) * n + idx] = a[0];
      if (g.dim == 2) s.ay[static_cast<std::size_t>(m) * n + idx] = a[1];
      s.max_abs = std::max(s.max_abs, std::hypot(a[0], a[1]));
    }
  }
  // coarse sampled bounds on div A and the time derivatives
  std::vector<double> dx(n);
  for (int m = 0; m <= M; ++m) {
    derivative_into<double>(g, s.x_slice(m), 0, dx);
    for (int idx = 0; idx < n; ++idx)
      s.max_div = std::max(s.max_div, std::abs(dx[idx]));
    if (g.dim == 2) {
      derivative_into<double>(g, s.y_slice(m), 1, dx);
      for (int idx = 0; idx < n; ++idx)
        s.max_div = std::max(s.max_div, std::abs(dx[idx]));
    }
    if (m > 0) {
      const double idt = 1.0 / tg.dt();
      for (int idx = 0; idx < n; ++idx) {
        double d = (s.ax[static_cast<std::size_t>(m) * n + idx] -
                    s.ax[static_cast<std::size_t>(m - 1) * n + idx]) * idt;
        s.max_dt = std::max(s.max_dt, std::abs(d));
      }
    }
  }
  s.max_div_dt = s.max_div + s.max_dt;  // coarse envelope, reporting only
  return s;
}

double StepDiagnostics::max_residual() const {
  double r = 0.0;
  for (double x : residual) r = std::max(r, x);
  return r;
}

namespace {

template <class T>
double max_abs(std::span<const T> v) {
  double m = 0.0;
  for (const auto& x : v) m = std::max(m, std::abs(x));
  return m;
}

// B z = -div(A (K z)) on one slice
template <class T>
void apply_bbm_generator(const SpatialGrid& g, const ShiftedHelmholtz& K,
                         const SampledAdvection& adv, int m,
                         std::span<const T> z, std::span<T> out) {
  const int n = g.total();
  std::vector<T> kz(n), w(n), d(n);
  K.solve<T>(z, kz);
  auto axs = adv.x_slice(m);
  for (int i = 0; i < n; ++i) w[i] = kz[i] * axs[i];
  derivative_into<T>(g, w, 0, d);
  for (int i = 0; i < n; ++i) out[i] = -d[i];
  if (g.dim == 2) {
    auto ays = adv.y_slice(m);
    for (int i = 0; i < n; ++i) w[i] = kz[i] * ays[i];
    derivative_into<T>(g, w, 1, d);
    for (int i = 0; i < n; ++i) out[i] -= d[i];
  }
}

// B^T psi = K (A . grad psi) on one slice
template <class T>
void apply_bbm_generator_t(const SpatialGrid& g, const ShiftedHelmholtz& K,
                           const SampledAdvection& adv, int m,
                           std::span<const T> psi, std::span<T> out) {
  const int n = g.total();
  std::vector<T> d(n), acc(n);
  derivative_into<T>(g, psi, 0, d);
  auto axs = adv.x_slice(m);
  for (int i = 0; i < n; ++i) acc[i] = axs[i] * d[i];
  if (g.dim == 2) {
    derivative_into<T>(g, psi, 1, d);
    auto ays = adv.y_slice(m);
    for (int i = 0; i < n; ++i) acc[i] += ays[i] * d[i];
  }
  K.solve<T>(acc, out);
}

// fixed-point solve of (I - a*Op) x = b, Op given as a callback
template <class T, class Op>
int richardson_solve(const Op& op, double a, std::span<const T> b,
                     std::span<T> x, double tol, int cap) {
  const int n = static_cast<int>(b.size());
  std::vector<T> opx(n);
  std::copy(b.begin(), b.end(), x.begin());
  double bscale = max_abs<T>(b) + 1e-300;
  double prev = 1e300;
  for (int it = 1; it <= cap; ++it) {
    op(std::span<const T>(x), std::span<T>(opx));
    double diff = 0.0;
    for (int i = 0; i < n; ++i) {
      T xn = b[i] + a * opx[i];
      diff = std::max(diff, std::abs(xn - x[i]));
      x[i] = xn;
    }
    if (diff <= 1e-14 * bscale || diff <= tol * bscale) return it;
    if (it > 4 && diff > 4.0 * prev)
      throw SolverDiverged("inner fixed-point iteration diverged");
    prev = diff;
  }
  throw SolverDiverged("inner fixed-point iteration hit the cap");
}

}  // namespace

EvolutionResult solve_bzk_forward(const ScalarField<double>& z0,
                                  const SpaceTimeField<double>& v,
                                  const SpaceTimeField<double>& chi) {
  const SpatialGrid& g = z0.grid;
  const TimeGrid& tg = v.time;
  if (!v.grid.same_shape(g) || !chi.grid.same_shape(g) ||
      chi.time.steps != tg.steps)
    throw std::invalid_argument("solve_bzk_forward: shape mismatch");
  const int n = g.total();
  const int M = tg.steps;
  const double a = 0.5 * tg.dt();

  ShiftedHelmholtz K(g, 1.0, 0.0);
  ShiftedHelmholtz H(g, 1.0, 0.0);           // (I - lap) apply
  ShiftedHelmholtz Q(g, 1.0 + a, a);         // transformed CN step operator

  EvolutionResult res;
  res.y = SpaceTimeField<double>(g, tg);
  res.z = SpaceTimeField<double>(g, tg);
  std::copy(z0.v.begin(), z0.v.end(), res.z.slice(0).begin());

  std::vector<double> kz(n), b(n), hb(n), gsrc(n), gnext(n);
  auto source = [&](int m, std::span<double> out) {
    auto vs = v.slice(m);
    auto cs = chi.slice(m);
    for (int i = 0; i < n; ++i) out[i] = vs[i] * cs[i];
  };
  source(0, gsrc);
  for (int m = 0; m < M; ++m) {
    auto zm = res.z.slice(m);
    K.solve<double>(zm, kz);
    std::copy(kz.begin(), kz.end(), res.y.slice(m).begin());
    source(m + 1, gnext);
    for (int i = 0; i < n; ++i)
      b[i] = (1.0 - a) * zm[i] + a * kz[i] + a * (gsrc[i] + gnext[i]);
    H.apply<double>(b, hb);
    auto znext = res.z.slice(m + 1);
    Q.solve<double>(hb, znext);
    // residual of the transformed system, cheap stencil apply
    Q.apply<double>(znext, kz);
    double r = 0.0, scale = max_abs<double>(std::span<const double>(hb)) + 1e-300;
    for (int i = 0; i < n; ++i) r = std::max(r, std::abs(kz[i] - hb[i]));
    res.diag.residual.push_back(r / scale);
    res.diag.inner_iters.push_back(0);
    gsrc.swap(gnext);
  }
  auto zM = res.z.slice(M);
  K.solve<double>(zM, kz);
  std::copy(kz.begin(), kz.end(), res.y.slice(M).begin());
  return res;
}

AdjointResult solve_bzk_adjoint(const ScalarField<double>& psi_T,
                                const TimeGrid& tg) {
  const SpatialGrid& g = psi_T.grid;
  const int n = g.total();
  const int M = tg.steps;
  const double a = 0.5 * tg.dt();

  ShiftedHelmholtz K(g, 1.0, 0.0);
  ShiftedHelmholtz H(g, 1.0, 0.0);
  ShiftedHelmholtz Q(g, 1.0 + a, a);

  AdjointResult res;
  res.psi = SpaceTimeField<double>(g, tg);
  res.phi = SpaceTimeField<double>(g, tg);
  res.psi_pairing = SpaceTimeField<double>(g, tg);
  std::copy(psi_T.v.begin(), psi_T.v.end(), res.psi.slice(M).begin());

  std::vector<double> kz(n), b(n), hb(n);
  std::vector<std::vector<double>> bar(M + 1, std::vector<double>(n));
  for (int m = M; m >= 1; --m) {
    auto pm = res.psi.slice(m);
    K.solve<double>(pm, kz);
    for (int i = 0; i < n; ++i) b[i] = (1.0 - a) * pm[i] + a * kz[i];
    H.apply<double>(b, hb);
    auto prev = res.psi.slice(m - 1);
    Q.solve<double>(hb, prev);
    for (int i = 0; i < n; ++i) bar[m][i] = 0.5 * (prev[i] + pm[i]);
  }
  for (int m = 0; m <= M; ++m) {
    auto pm = res.psi.slice(m);
    K.solve<double>(pm, kz);
    std::copy(kz.begin(), kz.end(), res.phi.slice(m).begin());
    auto pp = res.psi_pairing.slice(m);
    if (m == 0)
      std::copy(bar[1].begin(), bar[1].end(), pp.begin());
    else if (m == M)
      std::copy(bar[M].begin(), bar[M].end(), pp.begin());
    else
      for (int i = 0; i < n; ++i) pp[i] = 0.5 * (bar[m][i] + bar[m + 1][i]);
  }
  return res;
}

EvolutionResult solve_bbm_forward(const ScalarField<double>& z0,
                                  const SpaceTimeField<double>& v,
                                  const SpaceTimeField<double>& chi,
                                  const SampledAdvection& adv) {
  const SpatialGrid& g = z0.grid;
  const TimeGrid& tg = v.time;
  const int n = g.total();
  const int M = tg.steps;
  const double a = 0.5 * tg.dt();

  ShiftedHelmholtz K(g, 1.0, 0.0);

  EvolutionResult res;
  res.y = SpaceTimeField<double>(g, tg);
  res.z = SpaceTimeField<double>(g, tg);
  std::copy(z0.v.begin(), z0.v.end(), res.z.slice(0).begin());

  std::vector<double> bz(n), b(n), gsrc(n), gnext(n), kz(n);
  auto source = [&](int m, std::span<double> out) {
    auto vs = v.slice(m);
    auto cs = chi.slice(m);
    for (int i = 0; i < n; ++i) out[i] = vs[i] * cs[i];
  };
  source(0, gsrc);
  for (int m = 0; m < M; ++m) {
    auto zm = res.z.slice(m);
    K.solve<double>(zm, kz);
    std::copy(kz.begin(), kz.end(), res.y.slice(m).begin());
    apply_bbm_generator<double>(g, K, adv, m, zm, bz);
    source(m + 1, gnext);
    for (int i = 0; i < n; ++i)
      b[i] = zm[i] + a * bz[i] + a * (gsrc[i] + gnext[i]);
    auto znext = res.z.slice(m + 1);
    auto op = [&](std::span<const double> in, std::span<double> out) {
      apply_bbm_generator<double>(g, K, adv, m + 1, in, out);
    };
    int it = richardson_solve<double>(op, a, b, znext, 1e-14, 200);
    res.diag.inner_iters.push_back(it);
    res.diag.residual.push_back(0.0);
    gsrc.swap(gnext);
  }
  auto zM = res.z.slice(M);
  K.solve<double>(zM, kz);
  std::copy(kz.begin(), kz.end(), res.y.slice(M).begin());
  return res;
}

AdjointResult solve_bbm_adjoint(const ScalarField<double>& psi_T,
                                const TimeGrid& tg,
                                const SampledAdvection& adv) {
  const SpatialGrid& g = psi_T.grid;
  const int n = g.total();
  const int M = tg.steps;
  const double a = 0.5 * tg.dt();

  ShiftedHelmholtz K(g, 1.0, 0.0);

  AdjointResult res;
  res.psi = SpaceTimeField<double>(g, tg);
  res.phi = SpaceTimeField<double>(g, tg);
  res.psi_pairing = SpaceTimeField<double>(g, tg);
  std::copy(psi_T.v.begin(), psi_T.v.end(), res.psi.slice(M).begin());

  std::vector<std::vector<double>> bar(M + 1, std::vector<double>(n));
  std::vector<double> tmp(n);
  for (int m = M; m >= 1; --m) {
    auto pm = res.psi.slice(m);
    auto op = [&](std::span<const double> in, std::span<double> out) {
      apply_bbm_generator_t<double>(g, K, adv, m, in, out);
    };
    richardson_solve<double>(op, a, pm, std::span<double>(bar[m]), 1e-14, 200);
    apply_bbm_generator_t<double>(g, K, adv, m - 1, bar[m], tmp);
    auto prev = res.psi.slice(m - 1);
    for (int i = 0; i < n; ++i) prev[i] = bar[m][i] + a * tmp[i];
  }
  for (int m = 0; m <= M; ++m) {
    auto pm = res.psi.slice(m);
    apply_bbm_generator_t<double>(g, K, adv, m, pm, tmp);
    std::copy(tmp.begin(), tmp.end(), res.phi.slice(m).begin());
    auto pp = res.psi_pairing.slice(m);
    if (m == 0)
      std::copy(bar[1].begin(), bar[1].end(), pp.begin());
    else if (m == M)
      std::copy(bar[M].begin(), bar[M].end(), pp.begin());
    else
      for (int i = 0; i < n; ++i) pp[i] = 0.5 * (bar[m][i] + bar[m + 1][i]);
  }
  return res;
}

double spacetime_pairing(const SpaceTimeField<double>& a,
                         const SpaceTimeField<double>& b) {
  const int M = a.time.steps;
  const double dt = a.time.dt();
  double s = 0.0;
  for (int m = 0; m <= M; ++m) {
    double w = (m == 0 || m == M) ? 0.5 * dt : dt;
    s += w * inner(a.grid, a.slice(m), b.slice(m));
  }
  return s;
}

double duality_residual(const ScalarField<double>& z0,
                        const SpaceTimeField<double>& v,
                        const SpaceTimeField<double>& chi,
                        const ScalarField<double>& psi_T, EquationKind kind,
                        const SampledAdvection* adv) {
  const SpatialGrid& g = z0.grid;
  const TimeGrid& tg = v.time;
  EvolutionResult fwd;
  AdjointResult adj;
  if (kind == EquationKind::bzk) {
    fwd = solve_bzk_forward(z0, v, chi);
    adj = solve_bzk_adjoint(psi_T, tg);
  } else {
    if (!adv) throw std::invalid_argument("duality_residual: bbm needs advection");
    fwd = solve_bbm_forward(z0, v, chi, *adv);
    adj = solve_bbm_adjoint(psi_T, tg, *adv);
  }
  SpaceTimeField<double> gfield(g, tg);
  for (int m = 0; m <= tg.steps; ++m) {
    auto gs = gfield.slice(m);
    auto vs = v.slice(m);
    auto cs = chi.slice(m);
    for (int i = 0; i < g.total(); ++i) gs[i] = vs[i] * cs[i];
  }
  double t_init = inner(g, adj.psi.slice(0), z0.v);
  double t_ctrl = spacetime_pairing(gfield, adj.psi_pairing);
  double t_term = inner(g, psi_T.v, fwd.z.slice(tg.steps));
  double scale = std::max({std::abs(t_init), std::abs(t_ctrl), std::abs(t_term), 1e-300});
  return std::abs(t_init + t_ctrl - t_term) / scale;
}

BzkBoundaryResult solve_bzk_adjoint_boundary(
    const SpatialGrid& g, const TimeGrid& tg,
    const std::function<cplx(const Point&, double)>& phi_boundary) {
  const int n = g.total();
  const int M = tg.steps;
  const double a = 0.5 * tg.dt();

  ShiftedHelmholtz K(g, 1.0, 0.0);
  ShiftedHelmholtz H(g, 1.0, 0.0);
  ShiftedHelmholtz Q(g, 1.0 + a, a);

  // lift slices: (I - lap) E = 0 with the given Dirichlet data
  std::vector<std::vector<cplx>> lift(M + 1, std::vector<cplx>(n, cplx{}));
  for (int m = 0; m <= M; ++m) {
    const double t = tg.node(m);
    std::vector<cplx> rhs(n, cplx{});
    auto bdry = [&](const Point& p) { return phi_boundary(p, t); };
    add_boundary_to_rhs<cplx>(g, bdry, rhs);
    K.solve<cplx>(rhs, lift[m]);
  }

  BzkBoundaryResult res;
  res.psi = SpaceTimeField<cplx>(g, tg);
  res.phi = SpaceTimeField<cplx>(g, tg);

  std::vector<cplx> kz(n), b(n), hb(n);
  for (int m = M; m >= 1; --m) {
    auto pm = res.psi.slice(m);
    K.solve<cplx>(pm, kz);
    for (int i = 0; i < n; ++i)
      b[i] = (1.0 - a) * pm[i] + a * kz[i] + a * (lift[m][i] + lift[m - 1][i]);
    H.apply<cplx>(b, hb);
    Q.solve<cplx>(hb, res.psi.slice(m - 1));
  }
  for (int m = 0; m <= M; ++m) {
    auto pm = res.psi.slice(m);
    K.solve<cplx>(pm, kz);
    auto ph = res.phi.slice(m);
    for (int i = 0; i < n; ++i) ph[i] = kz[i] + lift[m][i];
  }
  return res;
}

SpaceTimeField<cplx> solve_bbm_correction(
    const SpatialGrid& g, const TimeGrid& tg, const SampledAdvection& adv,
    const std::vector<std::vector<cplx>>& r_half) {
  const int n = g.total();
  const int M = tg.steps;
  const double a = 0.5 * tg.dt();
  const double dt = tg.dt();
  if (static_cast<int>(r_half.size()) != M)
    throw std::invalid_argument("solve_bbm_correction: need M interval residuals");

  ShiftedHelmholtz K(g, 1.0, 0.0);
  SpaceTimeField<cplx> phi(g, tg);

  std::vector<cplx> base(n), tmp(n), kr(n);
  for (int m = 0; m < M; ++m) {
    auto pm = phi.slice(m);
    apply_bbm_generator_t<cplx>(g, K, adv, m, pm, tmp);
    // note generator_t is K(A.grad .), which is exactly the advection term
    // of the correction equation
    K.solve<cplx>(r_half[m], kr);
    for (int i = 0; i < n; ++i) base[i] = pm[i] - a * tmp[i] + dt * kr[i];
    auto pnext = phi.slice(m + 1);
    auto op = [&](std::span<const cplx> in, std::span<cplx> out) {
      apply_bbm_generator_t<cplx>(g, K, adv, m + 1, in, out);
    };
    richardson_solve<cplx>(op, -a, base, pnext, 1e-14, 200);
  }
  return phi;
}

}  // namespace ctrllab
