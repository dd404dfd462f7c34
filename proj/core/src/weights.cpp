#include "ctrllab/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace ctrllab {

double r_profile(double t, double tau_margin, double T) {
  if (!(t > 0.0 && t < T)) throw std::domain_error("r_profile: t outside (0,T)");
  if (!(tau_margin > 0.0 && tau_margin < std::min(1.0, T / 2.0)))
    throw std::domain_error("r_profile: tau_margin outside (0, min{1, T/2})");
  if (t > T / 2.0) t = T - t;
  const double tau = tau_margin;
  if (t <= tau / 2.0) return 1.0 / t;
  if (t >= tau) return 1.0;
  const double a = tau / 2.0;
  return quintic_hermite(t, a, tau, 1.0 / a, -1.0 / (a * a), 2.0 / (a * a * a),
                         1.0, 0.0, 0.0);
}

EtaField EtaField::sample(const SpatialGrid& g, const TimeGrid& tg, int ghosts,
                          const std::function<double(const Point&, double)>& f) {
  EtaField e;
  e.grid = g;
  e.time = tg;
  e.ghosts = ghosts;
  const int e0 = e.ext(0);
  const int e1 = g.dim == 2 ? e.ext(1) : 1;
  e.v.resize(static_cast<std::size_t>(tg.steps + 1) * e0 * e1);
  for (int m = 0; m <= tg.steps; ++m) {
    const double t = tg.node(m);
    for (int jj = 0; jj < e1; ++jj) {
      for (int ii = 0; ii < e0; ++ii) {
        int i = ii - ghosts, j = jj - ghosts;
        Point p{g.lo[0] + (i + 1) * g.dx[0], 0.0};
        if (g.dim == 2) p[1] = g.lo[1] + (j + 1) * g.dx[1];
        e.at(m, i, j) = f(p, t);
      }
    }
  }
  return e;
}

double EtaField::sup_closed() const {
  double s = 0.0;
  const int n1 = grid.dim == 2 ? grid.n[1] : 0;
  for (int m = 0; m <= time.steps; ++m)
    for (int j = (grid.dim == 2 ? -1 : 0); j <= n1; ++j)
      for (int i = -1; i <= grid.n[0]; ++i)
        s = std::max(s, std::abs(at(m, i, grid.dim == 2 ? j : 0)));
  return s;
}

EtaField build_eta_sweep_1d(const FlowMap& flow, double center0,
                            const SpatialGrid& g, const TimeGrid& tg,
                            const EtaSweepParams& params) {
  if (g.dim != 1)
    throw std::invalid_argument("build_eta_sweep_1d: 1D grids only");
  std::vector<double> c(tg.steps + 1);
  for (int m = 0; m <= tg.steps; ++m)
    c[m] = integrate_flow(flow, Point{center0, 0.0}, 0.0, tg.node(m))[0];
  const double B = params.offset, b = params.amplitude, L = params.width;
  const double dt = tg.dt();
  auto eval = [&c, B, b, L, dt, &tg](const Point& p, double t) {
    // t is always a grid node here
    int m = static_cast<int>(std::lround(t / dt));
    m = std::clamp(m, 0, tg.steps);
    double u = (p[0] - c[m]) / L;
    return B + b / (1.0 + u * u);
  };
  return EtaField::sample(g, tg, 3, eval);
}

WeightPropertyReport check_weight_properties(const EtaField& eta,
                                             const MovingRegion& omega1,
                                             double tau_margin) {
  const SpatialGrid& g = eta.grid;
  const TimeGrid& tg = eta.time;
  const int M = tg.steps;
  const double dt = tg.dt();
  const int nx = g.n[0];
  const int ny = g.dim == 2 ? g.n[1] : 1;

  WeightPropertyReport rep;
  rep.resolution = {nx, g.dim == 2 ? ny : 1};
  rep.time_steps = M;

  // one-cell dilation of the mask counts as its closure on the grid
  auto excluded = [&](int m, int i, int j) {
    for (int dj = (g.dim == 2 ? -1 : 0); dj <= (g.dim == 2 ? 1 : 0); ++dj) {
      for (int di = -1; di <= 1; ++di) {
        int ii = i + di, jj = j + dj;
        if (ii < 0 || ii >= nx || jj < 0 || jj >= ny) continue;
        if (omega1.mask[m][jj * nx + ii]) return true;
      }
    }
    return false;
  };

  auto grad_norm = [&](int m, int i, int j) {
    double gx = (eta.at(m, i + 1, j) - eta.at(m, i - 1, j)) / (2.0 * g.dx[0]);
    double g2 = gx * gx;
    if (g.dim == 2) {
      double gy = (eta.at(m, i, j + 1) - eta.at(m, i, j - 1)) / (2.0 * g.dx[1]);
      g2 += gy * gy;
    }
    return std::sqrt(g2);
  };
  auto dt_eta = [&](int m, int i, int j) {
    if (m == 0) return (eta.at(1, i, j) - eta.at(0, i, j)) / dt;
    if (m == M) return (eta.at(M, i, j) - eta.at(M - 1, i, j)) / dt;
    return (eta.at(m + 1, i, j) - eta.at(m - 1, i, j)) / (2.0 * dt);
  };

  double inf = std::numeric_limits<double>::infinity();
  double m1 = inf, m2 = inf, m3 = inf, m4 = inf, m5 = inf, m6 = inf;

  for (int m = 0; m <= M; ++m) {
    const double t = tg.node(m);
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        if (excluded(m, i, j)) continue;
        m1 = std::min(m1, grad_norm(m, i, j));
        double et = dt_eta(m, i, j);
        m2 = std::min(m2, std::abs(et));
        if (t <= tau_margin) m3 = std::min(m3, et);
        if (t >= tg.horizon - tau_margin) m4 = std::min(m4, -et);
      }
    }
  }

  // boundary normal derivative, centered across the wall
  for (int m = 0; m <= M; ++m) {
    if (g.dim == 1) {
      double dlo = (eta.at(m, 0) - eta.at(m, -2)) / (2.0 * g.dx[0]);
      double dhi = (eta.at(m, nx) - eta.at(m, nx - 2)) / (2.0 * g.dx[0]);
      m5 = std::min({m5, dlo, -dhi});
    } else {
      for (int j = 0; j < ny; ++j) {
        double dlo = (eta.at(m, 0, j) - eta.at(m, -2, j)) / (2.0 * g.dx[0]);
        double dhi = (eta.at(m, nx, j) - eta.at(m, nx - 2, j)) / (2.0 * g.dx[0]);
        m5 = std::min({m5, dlo, -dhi});
      }
      for (int i = 0; i < nx; ++i) {
        double dlo = (eta.at(m, i, 0) - eta.at(m, i, -2)) / (2.0 * g.dx[1]);
        double dhi = (eta.at(m, i, ny) - eta.at(m, i, ny - 2)) / (2.0 * g.dx[1]);
        m5 = std::min({m5, dlo, -dhi});
      }
    }
  }

  const double sup = eta.sup_closed();
  for (int m = 0; m <= M; ++m) {
    for (int j = (g.dim == 2 ? -1 : 0); j <= (g.dim == 2 ? ny : 0); ++j)
      for (int i = -1; i <= nx; ++i)
        m6 = std::min(m6, eta.at(m, i, j) - 0.75 * sup);
  }

  rep.m1 = m1;
  rep.m2 = m2;
  rep.m3 = m3;
  rep.m4 = m4;
  rep.m5 = m5;
  rep.m6 = m6;
  rep.p1 = m1 > 0;
  rep.p2 = m2 > 0;
  rep.p3 = m3 > 0;
  rep.p4 = m4 > 0;
  rep.p5 = m5 > 0;
  rep.p6 = m6 > 0;
  return rep;
}

std::string WeightPropertyReport::summary() const {
  std::ostringstream os;
  os << "P1=" << p1 << "(" << m1 << ") P2=" << p2 << "(" << m2 << ") P3=" << p3
     << "(" << m3 << ") P4=" << p4 << "(" << m4 << ") P5=" << p5 << "(" << m5
     << ") P6=" << p6 << "(" << m6 << ")";
  return os.str();
}

WeightSet assemble_weights(const EtaField& eta, double tau_margin,
                           double lambda, double s) {
  if (!(lambda >= 0.0) || !(s > 0.0))
    throw std::invalid_argument("assemble_weights: need lambda >= 0, s > 0");
  WeightSet w;
  w.grid = eta.grid;
  w.time = eta.time;
  w.lambda = lambda;
  w.s = s;
  w.tau_margin = tau_margin;
  w.eta_sup = eta.sup_closed();
  w.eta_sup_infl = 1.05 * w.eta_sup;

  const int M = eta.time.steps;
  const int n = eta.grid.total();
  const int nx = eta.grid.n[0];
  const double T = eta.time.horizon;
  const double inf = std::numeric_limits<double>::infinity();

  w.eta = SpaceTimeField<double>(eta.grid, eta.time);
  w.gamma = SpaceTimeField<double>(eta.grid, eta.time);
  w.alpha = SpaceTimeField<double>(eta.grid, eta.time);
  w.xi = SpaceTimeField<double>(eta.grid, eta.time);
  w.r.assign(M + 1, inf);
  w.alpha_star.assign(M + 1, inf);
  w.xi_star.assign(M + 1, inf);

  const double top = std::exp(2.0 * lambda * w.eta_sup_infl);
  for (int m = 0; m <= M; ++m) {
    double rm = (m == 0 || m == M) ? inf : r_profile(eta.time.node(m), tau_margin, T);
    w.r[m] = rm;
    auto se = w.eta.slice(m);
    auto sg = w.gamma.slice(m);
    auto sa = w.alpha.slice(m);
    auto sx = w.xi.slice(m);
    double amax = 0.0, xmin = inf;
    for (int idx = 0; idx < n; ++idx) {
      double ev = eta.at(m, idx % nx, idx / nx);
      se[idx] = ev;
      double gv = std::exp(lambda * ev);
      sg[idx] = gv;
      sa[idx] = rm * (top - gv);
      sx[idx] = rm * gv;
      amax = std::max(amax, sa[idx]);
      xmin = std::min(xmin, sx[idx]);
    }
    w.alpha_star[m] = amax;
    w.xi_star[m] = xmin;
  }
  return w;
}

}  // namespace ctrllab
