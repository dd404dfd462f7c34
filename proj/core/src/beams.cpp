#include "ctrllab/beams.hpp"

#include "ctrllab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

namespace ctrllab {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

double theta_l2_normalizer(int dim) {
  if (dim == 1) {
    // \int_{-1}^{1} (1-u^2)^8 du, binomial expansion
    double s = 0.0;
    double binom = 1.0;
    for (int k = 0; k <= 8; ++k) {
      s += (k % 2 == 0 ? 1.0 : -1.0) * binom / (2.0 * k + 1.0);
      binom = binom * (8 - k) / (k + 1);
    }
    return 1.0 / std::sqrt(2.0 * s);
  }
  return 3.0 / std::sqrt(std::numbers::pi);  // \int (1-|z|^2)^8 over the disc = pi/9
}

double theta_profile(const Point& zeta, int dim) {
  double r2 = zeta[0] * zeta[0] + (dim == 2 ? zeta[1] * zeta[1] : 0.0);
  if (r2 >= 1.0) return 0.0;
  double b = 1.0 - r2;
  return theta_l2_normalizer(dim) * b * b * b * b;
}

namespace {

// shared quadrature state for many-point evaluation of one beam
struct BeamEvaluator {
  BZKBeamParams p;
  double T;
  GaussLegendre rule;
  double norm_c;
  double amp;  // terminal datum amplitude making Parseval land on (2pi)^{-2N}

  BeamEvaluator(const BZKBeamParams& params, double horizon, int order)
      : p(params), T(horizon), rule(order),
        norm_c(theta_l2_normalizer(params.dim)),
        amp(std::pow(kTwoPi, -0.5 * params.dim)) {}

  std::pair<cplx, cplx> eval(const Point& x, double t) const {
    const double se = std::sqrt(p.eps);
    const double pref = amp * std::pow(kTwoPi, -p.dim) * std::pow(p.eps, -0.25 * p.dim);
    const double dx0 = x[0] - p.x0[0];
    const double dx1 = x[1] - p.x0[1];
    cplx acc_psi{}, acc_phi{};
    if (p.dim == 1) {
      for (std::size_t q = 0; q < rule.node.size(); ++q) {
        const double z = rule.node[q];
        double b = 1.0 - z * z;
        if (b <= 0.0) continue;
        double b2 = b * b;
        double th = norm_c * b2 * b2;
        double xi = z / se + p.xi_bar[0] / p.eps;
        double S = xi * xi;
        double mult = std::exp(-(T - t) * S / (1.0 + S));
        cplx osc = std::polar(1.0, dx0 * xi);
        cplx val = rule.weight[q] * th * mult * osc;
        acc_psi += val;
        acc_phi += val / (1.0 + S);
      }
    } else {
      for (std::size_t qa = 0; qa < rule.node.size(); ++qa) {
        for (std::size_t qb = 0; qb < rule.node.size(); ++qb) {
          const double za = rule.node[qa], zb = rule.node[qb];
          double r2 = za * za + zb * zb;
          if (r2 >= 1.0) continue;
          double b = 1.0 - r2;
          double b2 = b * b;
          double th = norm_c * b2 * b2;
          double xia = za / se + p.xi_bar[0] / p.eps;
          double xib = zb / se + p.xi_bar[1] / p.eps;
          double S = xia * xia + xib * xib;
          double mult = std::exp(-(T - t) * S / (1.0 + S));
          cplx osc = std::polar(1.0, dx0 * xia + dx1 * xib);
          cplx val = rule.weight[qa] * rule.weight[qb] * th * mult * osc;
          acc_psi += val;
          acc_phi += val / (1.0 + S);
        }
      }
    }
    return {pref * acc_psi, pref * acc_phi};
  }
};

}  // namespace

std::pair<cplx, cplx> bzk_beam_evaluate(const BZKBeamParams& p, const Point& x,
                                        double t, double T) {
  int order = p.quad_order > 0 ? p.quad_order : 64;
  BeamEvaluator ev(p, T, order);
  return ev.eval(x, t);
}

int bzk_auto_quad_order(const BZKBeamParams& p, const SpatialGrid& g, double T) {
  std::vector<Point> probes;
  for (int s = 0; s < 5; ++s) {
    double lam = (s + 0.5) / 5.0;
    Point q{g.lo[0] + lam * (g.hi[0] - g.lo[0]), 0.0};
    if (g.dim == 2) q[1] = g.lo[1] + lam * (g.hi[1] - g.lo[1]);
    probes.push_back(q);
  }
  int order = 24;
  BeamEvaluator coarse(p, T, order);
  while (order <= 256) {
    BeamEvaluator fine(p, T, 2 * order);
    double change = 0.0;
    for (const Point& q : probes) {
      for (double t : {0.0, 0.5 * T}) {
        auto a = coarse.eval(q, t);
        auto b = fine.eval(q, t);
        change = std::max(change, std::abs(a.first - b.first));
        change = std::max(change, std::abs(a.second - b.second));
      }
    }
    if (change < 1e-8) return order;
    order *= 2;
    coarse = BeamEvaluator(p, T, order);
  }
  throw QuadratureNonConvergence("beam quadrature did not settle below 1e-8");
}

BzkBoundaryResult bzk_boundary_correction(const BZKBeamParams& p,
                                          const SpatialGrid& g,
                                          const TimeGrid& tg) {
  BZKBeamParams pp = p;
  if (pp.quad_order == 0) pp.quad_order = bzk_auto_quad_order(pp, g, tg.horizon);
  auto ev = std::make_shared<BeamEvaluator>(pp, tg.horizon, pp.quad_order);
  auto minus_trace = [ev](const Point& x, double t) {
    return -ev->eval(x, t).second;
  };
  return solve_bzk_adjoint_boundary(g, tg, minus_trace);
}

BeamReport bzk_beam_sweep(const std::vector<double>& eps_list,
                          const RegionSpec& omega0, const SpatialGrid& g,
                          const TimeGrid& tg, BZKBeamParams base) {
  BeamReport rep;
  const int n = g.total();
  const int M = tg.steps;
  const double dt = tg.dt();

  std::vector<int> loc_nodes;
  for (int idx = 0; idx < n; ++idx)
    if (omega0.contains(g.node_flat(idx), g.dim)) loc_nodes.push_back(idx);

  for (double eps : eps_list) {
    BZKBeamParams p = base;
    p.eps = eps;
    if (p.quad_order == 0) p.quad_order = bzk_auto_quad_order(p, g, tg.horizon);
    BeamEvaluator ev(p, tg.horizon, p.quad_order);

    BzkBoundaryResult corr = bzk_boundary_correction(p, g, tg);

    std::vector<double> init_terms(n);
    auto corr0 = corr.psi.slice(0);
    parallel_for(n, [&](int idx) {
      cplx val = ev.eval(g.node_flat(idx), 0.0).first + corr0[idx];
      init_terms[idx] = std::norm(val);
    });
    double init = 0.0;
    for (double v : init_terms) init += v;
    init *= g.cell();

    std::vector<double> loc_terms(M + 1);
    parallel_for(M + 1, [&](int m) {
      const double t = tg.node(m);
      auto cm = corr.psi.slice(m);
      double sm = 0.0;
      for (int idx : loc_nodes) {
        cplx val = ev.eval(g.node_flat(idx), t).first + cm[idx];
        sm += std::norm(val);
      }
      loc_terms[m] = sm;
    });
    double loc = 0.0;
    for (int m = 0; m <= M; ++m)
      loc += ((m == 0 || m == M) ? 0.5 * dt : dt) * loc_terms[m];
    loc *= g.cell();

    double corr_norm = integrate<cplx>(corr.psi);

    rep.param.push_back(eps);
    rep.norm_initial.push_back(init);
    rep.norm_localized.push_back(loc);
    rep.norm_correction.push_back(corr_norm);
    rep.ratio.push_back(loc / init);
  }
  if (rep.param.size() >= 2) {
    rep.slope_initial = loglog_slope(rep.param, rep.norm_initial);
    rep.slope_localized = loglog_slope(rep.param, rep.norm_localized);
    rep.slope_ratio = loglog_slope(rep.param, rep.ratio);
  }
  return rep;
}

// ---- BBM ansatz ----

double wkb_cutoff(const WKBBeamParams& p, const Point& x) {
  double r2 = 0.0;
  for (int a = 0; a < p.dim; ++a) r2 += (x[a] - p.x0[a]) * (x[a] - p.x0[a]);
  double r = std::sqrt(r2);
  if (r <= 0.5 * p.delta) return 1.0;
  if (r >= p.delta) return 0.0;
  return 1.0 - smoothstep((r - 0.5 * p.delta) / (0.5 * p.delta));
}

namespace {

// radial derivative factor of the cutoff: grad f0 = slope(r) * (x-x0)/r
double wkb_cutoff_slope(const WKBBeamParams& p, double r) {
  if (r <= 0.5 * p.delta || r >= p.delta) return 0.0;
  double u = (r - 0.5 * p.delta) / (0.5 * p.delta);
  double sp = 30.0 * u * u * (1.0 - u) * (1.0 - u);
  return -sp / (0.5 * p.delta);
}

struct WkbGeometry {
  std::vector<double> f0;             // cutoff
  std::vector<std::array<double, 2>> gf0;  // analytic gradient of cutoff
  std::vector<cplx> ga0, ga1;         // components of grad alpha
  std::vector<double> s_herm;         // |xi0|^2 + |x-x0|^2
  std::vector<cplx> s_bil;            // grad alpha . grad alpha
  cplx delta_alpha;
  std::vector<cplx> carrier;          // e^{i alpha / h}
};

WkbGeometry make_geometry(const WKBBeamParams& p, const SpatialGrid& g) {
  const int n = g.total();
  WkbGeometry geo;
  geo.f0.resize(n);
  geo.gf0.resize(n);
  geo.ga0.resize(n);
  geo.ga1.resize(n);
  geo.s_herm.resize(n);
  geo.s_bil.resize(n);
  geo.carrier.resize(n);
  geo.delta_alpha = cplx(0.0, p.dim);
  const double xi_sq = p.xi0[0] * p.xi0[0] + (p.dim == 2 ? p.xi0[1] * p.xi0[1] : 0.0);
  for (int idx = 0; idx < n; ++idx) {
    Point x = g.node_flat(idx);
    double u0 = x[0] - p.x0[0];
    double u1 = p.dim == 2 ? x[1] - p.x0[1] : 0.0;
    double r2 = u0 * u0 + u1 * u1;
    double r = std::sqrt(r2);
    geo.f0[idx] = wkb_cutoff(p, x);
    double slope = wkb_cutoff_slope(p, r);
    geo.gf0[idx] = {r > 0 ? slope * u0 / r : 0.0, r > 0 ? slope * u1 / r : 0.0};
    geo.ga0[idx] = cplx(p.xi0[0], u0);
    geo.ga1[idx] = cplx(p.dim == 2 ? p.xi0[1] : 0.0, u1);
    geo.s_herm[idx] = xi_sq + r2;
    geo.s_bil[idx] = geo.ga0[idx] * geo.ga0[idx] + geo.ga1[idx] * geo.ga1[idx];
    double phase = (x[0] * p.xi0[0] + (p.dim == 2 ? x[1] * p.xi0[1] : 0.0)) / p.h;
    geo.carrier[idx] = std::polar(std::exp(-0.5 * r2 / p.h), phase);
  }
  return geo;
}

// reverse cumulative trapezoid of per-slice samples: out[m] = \int_{t_m}^{T}
template <class T>
std::vector<std::vector<T>> reverse_cumtrapz(const std::vector<std::vector<T>>& f,
                                             double dt) {
  const int M = static_cast<int>(f.size()) - 1;
  std::vector<std::vector<T>> out(M + 1, std::vector<T>(f[0].size(), T{}));
  for (int m = M - 1; m >= 0; --m)
    for (std::size_t i = 0; i < f[0].size(); ++i)
      out[m][i] = out[m + 1][i] + 0.5 * dt * (f[m][i] + f[m + 1][i]);
  return out;
}

}  // namespace

WKBFields bbm_wkb_fields(const WKBBeamParams& p, const SampledAdvection& adv,
                         const SpatialGrid& g, const TimeGrid& tg) {
  const int n = g.total();
  const int M = tg.steps;
  const double dt = tg.dt();
  WkbGeometry geo = make_geometry(p, g);

  // I(x, t_m) = \int_{t_m}^T A dtau per component
  std::vector<std::vector<double>> a0(M + 1, std::vector<double>(n)),
      a1(M + 1, std::vector<double>(n, 0.0));
  for (int m = 0; m <= M; ++m) {
    auto xs = adv.x_slice(m);
    std::copy(xs.begin(), xs.end(), a0[m].begin());
    if (g.dim == 2) {
      auto ys = adv.y_slice(m);
      std::copy(ys.begin(), ys.end(), a1[m].begin());
    }
  }
  auto i0 = reverse_cumtrapz(a0, dt);
  auto i1 = reverse_cumtrapz(a1, dt);

  WKBFields out;
  out.f1 = SpaceTimeField<cplx>(g, tg);
  out.f2 = SpaceTimeField<cplx>(g, tg);
  out.psi_h = SpaceTimeField<cplx>(g, tg);

  for (int m = 0; m <= M; ++m) {
    auto f1s = out.f1.slice(m);
    for (int idx = 0; idx < n; ++idx) {
      cplx i_dot_ga = i0[m][idx] * geo.ga0[idx] + i1[m][idx] * geo.ga1[idx];
      f1s[idx] = cplx(0.0, -1.0) * geo.f0[idx] * i_dot_ga / geo.s_herm[idx];
    }
  }

  // J(x,t) = \int_t^T f1 A dtau per component
  std::vector<std::vector<cplx>> f1a0(M + 1, std::vector<cplx>(n)),
      f1a1(M + 1, std::vector<cplx>(n, cplx{}));
  for (int m = 0; m <= M; ++m) {
    auto f1s = out.f1.slice(m);
    for (int idx = 0; idx < n; ++idx) {
      f1a0[m][idx] = f1s[idx] * a0[m][idx];
      if (g.dim == 2) f1a1[m][idx] = f1s[idx] * a1[m][idx];
    }
  }
  auto j0 = reverse_cumtrapz(f1a0, dt);
  auto j1 = reverse_cumtrapz(f1a1, dt);

  std::vector<cplx> df1x(n), df1y(n);
  for (int m = 0; m <= M; ++m) {
    auto f1s = out.f1.slice(m);
    derivative_into<cplx>(g, f1s, 0, df1x);
    if (g.dim == 2) derivative_into<cplx>(g, f1s, 1, df1y);
    auto f2s = out.f2.slice(m);
    for (int idx = 0; idx < n; ++idx) {
      // the centered stencil for grad f1 reaches one cell past the cutoff
      // support; the corrector itself lives inside it
      if (geo.f0[idx] == 0.0) {
        f2s[idx] = cplx{};
        continue;
      }
      cplx i_dot_gf0 = i0[m][idx] * geo.gf0[idx][0] + i1[m][idx] * geo.gf0[idx][1];
      cplx j_dot_ga = j0[m][idx] * geo.ga0[idx] + j1[m][idx] * geo.ga1[idx];
      cplx gf1_dot_ga = df1x[idx] * geo.ga0[idx] +
                        (g.dim == 2 ? df1y[idx] * geo.ga1[idx] : cplx{});
      f2s[idx] = (-i_dot_gf0 - cplx(0.0, 1.0) * j_dot_ga -
                  cplx(0.0, 2.0) * gf1_dot_ga -
                  cplx(0.0, 1.0) * f1s[idx] * geo.delta_alpha) /
                 geo.s_herm[idx];
    }
  }

  for (int m = 0; m <= M; ++m) {
    auto f1s = out.f1.slice(m);
    auto f2s = out.f2.slice(m);
    auto ps = out.psi_h.slice(m);
    for (int idx = 0; idx < n; ++idx)
      ps[idx] = geo.carrier[idx] *
                (geo.f0[idx] + p.h * f1s[idx] + p.h * p.h * f2s[idx]);
  }

  // per-interval residual of the two-level scheme applied to psi_h
  ShiftedHelmholtz H(g, 1.0, 0.0);
  std::vector<std::vector<cplx>> adv_term(M + 1, std::vector<cplx>(n));
  std::vector<cplx> d(n);
  for (int m = 0; m <= M; ++m) {
    auto ps = out.psi_h.slice(m);
    derivative_into<cplx>(g, ps, 0, d);
    auto xs = adv.x_slice(m);
    for (int idx = 0; idx < n; ++idx) adv_term[m][idx] = xs[idx] * d[idx];
    if (g.dim == 2) {
      derivative_into<cplx>(g, ps, 1, d);
      auto ys = adv.y_slice(m);
      for (int idx = 0; idx < n; ++idx) adv_term[m][idx] += ys[idx] * d[idx];
    }
  }
  out.r_half.assign(M, std::vector<cplx>(n));
  std::vector<cplx> diff(n), hd(n);
  for (int m = 0; m < M; ++m) {
    auto pa = out.psi_h.slice(m);
    auto pb = out.psi_h.slice(m + 1);
    for (int idx = 0; idx < n; ++idx) diff[idx] = (pb[idx] - pa[idx]) / dt;
    H.apply<cplx>(diff, hd);
    auto& r = out.r_half[m];
    for (int idx = 0; idx < n; ++idx)
      r[idx] = -hd[idx] - 0.5 * (adv_term[m][idx] + adv_term[m + 1][idx]);
  }
  out.r_norm_sq = 0.0;
  for (int m = 0; m < M; ++m) {
    double sm = 0.0;
    for (int idx = 0; idx < n; ++idx) sm += std::norm(out.r_half[m][idx]);
    out.r_norm_sq += dt * sm;
  }
  out.r_norm_sq *= g.cell();
  return out;
}

std::array<SpaceTimeField<cplx>, 4> wkb_expansion_coefficients(
    const WKBBeamParams& p, const SampledAdvection& adv, const SpatialGrid& g,
    const TimeGrid& tg) {
  const int n = g.total();
  const int M = tg.steps;
  WkbGeometry geo = make_geometry(p, g);
  WKBFields base = bbm_wkb_fields(p, adv, g, tg);
  const cplx iu(0.0, 1.0);

  SpaceTimeField<cplx> f1t(g, tg), f2t(g, tg);
  std::vector<cplx> df1tx(n), df1ty(n);
  for (int m = 0; m <= M; ++m) {
    auto xs = adv.x_slice(m);
    auto ys = adv.y_slice(m);
    auto f1s = base.f1.slice(m);
    auto f1ts = f1t.slice(m);
    for (int idx = 0; idx < n; ++idx) {
      cplx a_dot_ga = xs[idx] * geo.ga0[idx] +
                      (g.dim == 2 ? ys[idx] * geo.ga1[idx] : cplx{});
      f1ts[idx] = iu * geo.f0[idx] * a_dot_ga / geo.s_herm[idx];
    }
    derivative_into<cplx>(g, f1ts, 0, df1tx);
    if (g.dim == 2) derivative_into<cplx>(g, f1ts, 1, df1ty);
    auto f2ts = f2t.slice(m);
    for (int idx = 0; idx < n; ++idx) {
      cplx a_dot_ga = xs[idx] * geo.ga0[idx] +
                      (g.dim == 2 ? ys[idx] * geo.ga1[idx] : cplx{});
      cplx a_dot_gf0 = xs[idx] * geo.gf0[idx][0] +
                       (g.dim == 2 ? ys[idx] * geo.gf0[idx][1] : 0.0);
      cplx gf1t_dot_ga = df1tx[idx] * geo.ga0[idx] +
                         (g.dim == 2 ? df1ty[idx] * geo.ga1[idx] : cplx{});
      f2ts[idx] = (a_dot_gf0 + iu * f1s[idx] * a_dot_ga -
                   2.0 * iu * gf1t_dot_ga - iu * f1ts[idx] * geo.delta_alpha) /
                  geo.s_herm[idx];
    }
  }

  std::array<SpaceTimeField<cplx>, 4> c;
  for (auto& f : c) f = SpaceTimeField<cplx>(g, tg);
  std::vector<cplx> lap(n), dx(n), dy(n), dtx(n), dty(n);
  for (int m = 0; m <= M; ++m) {
    auto xs = adv.x_slice(m);
    auto ys = adv.y_slice(m);
    auto f1s = base.f1.slice(m);
    auto f2s = base.f2.slice(m);
    auto f1ts = f1t.slice(m);
    auto f2ts = f2t.slice(m);

    auto cm1 = c[0].slice(m);
    auto c0 = c[1].slice(m);
    auto c1 = c[2].slice(m);
    auto c2 = c[3].slice(m);

    for (int idx = 0; idx < n; ++idx) {
      cplx a_dot_ga = xs[idx] * geo.ga0[idx] +
                      (g.dim == 2 ? ys[idx] * geo.ga1[idx] : cplx{});
      cm1[idx] = -geo.s_bil[idx] * f1ts[idx] - iu * a_dot_ga * geo.f0[idx];
    }

    derivative_into<cplx>(g, f1ts, 0, dtx);
    if (g.dim == 2) derivative_into<cplx>(g, f1ts, 1, dty);
    for (int idx = 0; idx < n; ++idx) {
      cplx a_dot_ga = xs[idx] * geo.ga0[idx] +
                      (g.dim == 2 ? ys[idx] * geo.ga1[idx] : cplx{});
      cplx a_dot_gf0 = xs[idx] * geo.gf0[idx][0] +
                       (g.dim == 2 ? ys[idx] * geo.gf0[idx][1] : 0.0);
      cplx gf1t_dot_ga = dtx[idx] * geo.ga0[idx] +
                         (g.dim == 2 ? dty[idx] * geo.ga1[idx] : cplx{});
      c0[idx] = 2.0 * iu * gf1t_dot_ga + iu * geo.delta_alpha * f1ts[idx] -
                geo.s_bil[idx] * f2ts[idx] - a_dot_gf0 -
                iu * a_dot_ga * f1s[idx];
    }

    laplacian_into<cplx>(g, f1ts, lap);
    derivative_into<cplx>(g, f1s, 0, dx);
    if (g.dim == 2) derivative_into<cplx>(g, f1s, 1, dy);
    derivative_into<cplx>(g, f2ts, 0, dtx);
    if (g.dim == 2) derivative_into<cplx>(g, f2ts, 1, dty);
    for (int idx = 0; idx < n; ++idx) {
      cplx a_dot_ga = xs[idx] * geo.ga0[idx] +
                      (g.dim == 2 ? ys[idx] * geo.ga1[idx] : cplx{});
      cplx a_dot_gf1 = xs[idx] * dx[idx] + (g.dim == 2 ? ys[idx] * dy[idx] : cplx{});
      cplx gf2t_dot_ga = dtx[idx] * geo.ga0[idx] +
                         (g.dim == 2 ? dty[idx] * geo.ga1[idx] : cplx{});
      c1[idx] = -f1ts[idx] + lap[idx] - a_dot_gf1 + 2.0 * iu * gf2t_dot_ga +
                iu * geo.delta_alpha * f2ts[idx] - iu * a_dot_ga * f2s[idx];
    }

    laplacian_into<cplx>(g, f2ts, lap);
    derivative_into<cplx>(g, f2s, 0, dx);
    if (g.dim == 2) derivative_into<cplx>(g, f2s, 1, dy);
    for (int idx = 0; idx < n; ++idx) {
      cplx a_dot_gf2 = xs[idx] * dx[idx] + (g.dim == 2 ? ys[idx] * dy[idx] : cplx{});
      c2[idx] = -f2ts[idx] + lap[idx] - a_dot_gf2;
    }
  }
  return c;
}

BeamReport bbm_beam_sweep(const std::vector<double>& h_list,
                          const RegionSpec& omega, const SampledAdvection& adv,
                          const SpatialGrid& g, const TimeGrid& tg,
                          WKBBeamParams base) {
  BeamReport rep;
  const int n = g.total();
  const int M = tg.steps;
  const double dt = tg.dt();

  std::vector<int> loc_nodes;
  for (int idx = 0; idx < n; ++idx)
    if (omega.contains(g.node_flat(idx), g.dim)) loc_nodes.push_back(idx);

  for (double h : h_list) {
    WKBBeamParams p = base;
    p.h = h;
    WKBFields fields = bbm_wkb_fields(p, adv, g, tg);
    SpaceTimeField<cplx> corr = solve_bbm_correction(g, tg, adv, fields.r_half);

    double init = 0.0;
    auto p0 = fields.psi_h.slice(0);
    auto c0 = corr.slice(0);
    for (int idx = 0; idx < n; ++idx) init += std::norm(p0[idx] + c0[idx]);
    init *= g.cell();

    double loc = 0.0;
    for (int m = 0; m <= M; ++m) {
      auto pm = fields.psi_h.slice(m);
      auto cm = corr.slice(m);
      double sm = 0.0;
      for (int idx : loc_nodes) sm += std::norm(pm[idx] + cm[idx]);
      loc += ((m == 0 || m == M) ? 0.5 * dt : dt) * sm;
    }
    loc *= g.cell();

    rep.param.push_back(h);
    rep.norm_initial.push_back(init);
    rep.norm_localized.push_back(loc);
    rep.norm_correction.push_back(integrate<cplx>(corr));
    rep.ratio.push_back(loc / init);
  }
  if (rep.param.size() >= 2) {
    rep.slope_initial = loglog_slope(rep.param, rep.norm_initial);
    rep.slope_localized = loglog_slope(rep.param, rep.norm_localized);
    rep.slope_ratio = loglog_slope(rep.param, rep.ratio);
  }
  return rep;
}

}  // namespace ctrllab
