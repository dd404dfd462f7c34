#include "ctrllab/carleman.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace ctrllab {

double CarlemanSides::rhs_total() const {
  double s = 0.0;
  for (const auto& [name, val] : rhs_terms) s += val;
  return s;
}

double CarlemanSides::ratio() const {
  double r = rhs_total();
  return r > 0.0 ? lhs / r : 0.0;
}

namespace {

// time quadrature skipping the blow-up endpoints, where the weights vanish
// to all orders anyway
template <class F>
double time_sum_interior(const TimeGrid& tg, F&& slice_value) {
  double s = 0.0;
  for (int m = 1; m < tg.steps; ++m) s += slice_value(m);
  return s * tg.dt();
}

}  // namespace

CarlemanSides eval_ode_carleman(const SpaceTimeField<double>& q,
                                const WeightSet& w,
                                const MovingRegion& omega2) {
  const SpatialGrid& g = q.grid;
  const TimeGrid& tg = q.time;
  const int n = g.total();
  const double s = w.s, lam = w.lambda;
  const double dt = tg.dt();

  CarlemanSides out;
  out.s = s;
  out.lambda = lam;
  out.tau = 0.0;

  double lhs = 0.0, rhs_t = 0.0, rhs_loc = 0.0;
  for (int m = 1; m < tg.steps; ++m) {
    auto qs = q.slice(m);
    auto qp = q.slice(m + 1);
    auto qm = q.slice(m - 1);
    auto al = w.alpha.slice(m);
    auto xi = w.xi.slice(m);
    double l = 0.0, rt = 0.0, rl = 0.0;
    for (int i = 0; i < n; ++i) {
      double ew = std::exp(-2.0 * s * al[i]);
      double qt = (qp[i] - qm[i]) / (2.0 * dt);
      l += xi[i] * qs[i] * qs[i] * ew;
      rt += qt * qt * ew;
      if (omega2.inside(m, i)) rl += xi[i] * xi[i] * qs[i] * qs[i] * ew;
    }
    lhs += l * dt;
    rhs_t += rt * dt;
    rhs_loc += rl * dt;
  }
  const double cell = g.cell();
  out.lhs = s * lam * lam * lhs * cell;
  out.rhs_terms.emplace_back("time_derivative", rhs_t * cell);
  out.rhs_terms.emplace_back("local", s * s * lam * lam * rhs_loc * cell);
  return out;
}

namespace {

struct SliceWeights {
  std::vector<double> gamma;   // e^{lambda eta} at the slice
  std::vector<double> expw;    // e^{2 tau gamma}
};

SliceWeights slice_weights(const WeightSet& w, int m, double lambda, double tau) {
  const int n = w.grid.total();
  SliceWeights sw;
  sw.gamma.resize(n);
  sw.expw.resize(n);
  auto eta = w.eta.slice(m);
  for (int i = 0; i < n; ++i) {
    sw.gamma[i] = std::exp(lambda * eta[i]);
    sw.expw[i] = std::exp(2.0 * tau * sw.gamma[i]);
  }
  return sw;
}

}  // namespace

CarlemanSides eval_elliptic_carleman(const ScalarField<double>& z, int m,
                                     const WeightSet& w, double lambda,
                                     double tau, const MovingRegion& omega2) {
  const SpatialGrid& g = z.grid;
  const int n = g.total();
  SliceWeights sw = slice_weights(w, m, lambda, tau);

  std::vector<double> lap(n), dx(n), dy(n, 0.0);
  laplacian_into<double>(g, z.v, lap);
  derivative_into<double>(g, z.v, 0, dx);
  if (g.dim == 2) derivative_into<double>(g, z.v, 1, dy);

  CarlemanSides out;
  out.s = 0.0;
  out.lambda = lambda;
  out.tau = tau;
  double lhs0 = 0.0, lhs1 = 0.0, rhs_lap = 0.0, rhs_loc = 0.0;
  const double l2 = lambda * lambda, l4 = l2 * l2;
  for (int i = 0; i < n; ++i) {
    double tg3 = std::pow(tau * sw.gamma[i], 3);
    double grad2 = dx[i] * dx[i] + dy[i] * dy[i];
    lhs0 += l4 * tg3 * z.v[i] * z.v[i] * sw.expw[i];
    lhs1 += l2 * (tau * sw.gamma[i]) * grad2 * sw.expw[i];
    rhs_lap += lap[i] * lap[i] * sw.expw[i];
    if (omega2.inside(m, i))
      rhs_loc += l4 * tg3 * z.v[i] * z.v[i] * sw.expw[i];
  }
  const double cell = g.cell();
  out.lhs = (lhs0 + lhs1) * cell;
  out.rhs_terms.emplace_back("laplacian", rhs_lap * cell);
  out.rhs_terms.emplace_back("local", rhs_loc * cell);
  return out;
}

CarlemanSides eval_h1_carleman(const ScalarField<double>& g_src,
                               const std::vector<ScalarField<double>>& G,
                               int m, const WeightSet& w, double lambda,
                               double tau, const MovingRegion& omega2) {
  const SpatialGrid& g = g_src.grid;
  const int n = g.total();

  // -lap z = g + div G with zero trace
  std::vector<double> rhs(n), tmp(n);
  std::copy(g_src.v.begin(), g_src.v.end(), rhs.begin());
  for (int axis = 0; axis < g.dim; ++axis) {
    derivative_into<double>(g, G[axis].v, axis, tmp);
    for (int i = 0; i < n; ++i) rhs[i] += tmp[i];
  }
  ShiftedHelmholtz minus_lap(g, 1.0, 1.0);  // (I - lap) - I
  ScalarField<double> z(g);
  minus_lap.solve<double>(rhs, z.v);

  SliceWeights sw = slice_weights(w, m, lambda, tau);
  std::vector<double> dx(n), dy(n, 0.0);
  derivative_into<double>(g, z.v, 0, dx);
  if (g.dim == 2) derivative_into<double>(g, z.v, 1, dy);

  CarlemanSides out;
  out.lambda = lambda;
  out.tau = tau;
  double lhs = 0.0, rhs_g = 0.0, rhs_G = 0.0, rhs_loc = 0.0;
  const double l2 = lambda * lambda;
  for (int i = 0; i < n; ++i) {
    double tg = tau * sw.gamma[i];
    double grad2 = dx[i] * dx[i] + dy[i] * dy[i];
    double zz = z.v[i] * z.v[i];
    lhs += (l2 * tg * tg * zz + grad2) * sw.expw[i];
    rhs_g += (1.0 / (l2 * tg)) * g_src.v[i] * g_src.v[i] * sw.expw[i];
    double G2 = G[0].v[i] * G[0].v[i] +
                (g.dim == 2 ? G[1].v[i] * G[1].v[i] : 0.0);
    rhs_G += tg * G2 * sw.expw[i];
    if (omega2.inside(m, i)) rhs_loc += l2 * tg * tg * zz * sw.expw[i];
  }
  const double cell = g.cell();
  out.lhs = lhs * cell;
  out.rhs_terms.emplace_back("source", rhs_g * cell);
  out.rhs_terms.emplace_back("flux", rhs_G * cell);
  out.rhs_terms.emplace_back("local", rhs_loc * cell);
  return out;
}

CarlemanSides eval_global_carleman(const ScalarField<double>& psi_T,
                                   const WeightSet& w,
                                   const MovingRegion& omega,
                                   EquationKind kind,
                                   const SampledAdvection* adv) {
  const SpatialGrid& g = psi_T.grid;
  const TimeGrid& tg = w.time;
  const int n = g.total();
  const double s = w.s, lam = w.lambda;
  const double dt = tg.dt();

  AdjointResult adj = kind == EquationKind::bzk
                          ? solve_bzk_adjoint(psi_T, tg)
                          : solve_bbm_adjoint(psi_T, tg, *adv);

  CarlemanSides out;
  out.s = s;
  out.lambda = lam;

  double lhs_phi = 0.0, lhs_psi = 0.0, lhs_phit = 0.0, rhs_loc = 0.0;
  std::vector<double> dphix(n), dphiy(n, 0.0), phit(n), dphitx(n), dphity(n, 0.0);
  const double l2 = lam * lam;
  for (int m = 1; m < tg.steps; ++m) {
    auto ph = adj.phi.slice(m);
    auto php = adj.phi.slice(m + 1);
    auto phm = adj.phi.slice(m - 1);
    auto ps = adj.psi.slice(m);
    auto al = w.alpha.slice(m);
    auto xi = w.xi.slice(m);
    const double as = w.alpha_star[m];
    const double xs = w.xi_star[m];

    derivative_into<double>(g, ph, 0, dphix);
    if (g.dim == 2) derivative_into<double>(g, ph, 1, dphiy);
    for (int i = 0; i < n; ++i) phit[i] = (php[i] - phm[i]) / (2.0 * dt);
    derivative_into<double>(g, std::span<const double>(phit), 0, dphitx);
    if (g.dim == 2)
      derivative_into<double>(g, std::span<const double>(phit), 1, dphity);

    double a_phi = 0.0, a_psi = 0.0, a_phit = 0.0, a_loc = 0.0;
    const double ews = std::exp(-2.0 * s * as);
    for (int i = 0; i < n; ++i) {
      double ew = std::exp(-2.0 * s * al[i]);
      double grad_phi2 = dphix[i] * dphix[i] + dphiy[i] * dphiy[i];
      double grad_phit2 = dphitx[i] * dphitx[i] + dphity[i] * dphity[i];
      if (kind == EquationKind::bzk) {
        a_phi += (s * l2 * xi[i] * grad_phi2 +
                  std::pow(s * xi[i], 3) * lam * lam * l2 * ph[i] * ph[i]) * ew;
      } else {
        a_phi += (grad_phi2 + s * s * l2 * xi[i] * xi[i] * ph[i] * ph[i]) * ew;
      }
      a_psi += s * l2 * xi[i] * ps[i] * ps[i] * ew;
      a_phit += s * l2 * xs * (grad_phit2 + phit[i] * phit[i]) * ews;
      if (omega.inside(m, i)) {
        double elocal = std::exp(-4.0 * s * al[i] + 2.0 * s * as);
        if (kind == EquationKind::bzk)
          a_loc += std::pow(s, 5) * std::pow(lam, 6) * std::pow(xi[i], 5) *
                   ps[i] * ps[i] * elocal;
        else
          a_loc += std::pow(s, 6) * l2 * std::pow(xi[i], 6) * ps[i] * ps[i] *
                   elocal;
      }
    }
    lhs_phi += a_phi * dt;
    lhs_psi += a_psi * dt;
    lhs_phit += a_phit * dt;
    rhs_loc += a_loc * dt;
  }
  const double cell = g.cell();
  out.lhs = (lhs_phi + lhs_psi + lhs_phit) * cell;
  out.rhs_terms.emplace_back("local", rhs_loc * cell);
  return out;
}

namespace {

// gamma on the extended lattice for ghost-aware stencils
struct ExtGamma {
  const EtaField* eta;
  double lambda;
  int m;
  double at(int i, int j = 0) const {
    return std::exp(lambda * eta->at(m, i, j));
  }
};

}  // namespace

DecompositionReport splitting_identity_check(const ScalarField<double>& z,
                                            double tau, double lambda,
                                            const EtaField& eta, int m) {
  const SpatialGrid& g = z.grid;
  const int n = g.total();
  const int nx = g.n[0];
  ExtGamma ga{&eta, lambda, m};

  std::vector<double> w(n), f(n), m1(n), m2(n);
  for (int i = 0; i < n; ++i) {
    int ix = i % nx, iy = i / nx;
    w[i] = std::exp(tau * ga.at(ix, iy)) * z.v[i];
  }
  std::vector<double> lapw(n), lapz(n), dwx(n), dwy(n, 0.0);
  laplacian_into<double>(g, std::span<const double>(w), lapw);
  laplacian_into<double>(g, z.v, lapz);
  derivative_into<double>(g, std::span<const double>(w), 0, dwx);
  if (g.dim == 2) derivative_into<double>(g, std::span<const double>(w), 1, dwy);

  for (int i = 0; i < n; ++i) {
    int ix = i % nx, iy = i / nx;
    double gx = (ga.at(ix + 1, iy) - ga.at(ix - 1, iy)) / (2.0 * g.dx[0]);
    double gy = g.dim == 2
                    ? (ga.at(ix, iy + 1) - ga.at(ix, iy - 1)) / (2.0 * g.dx[1])
                    : 0.0;
    double lap_g = (ga.at(ix + 1, iy) - 2.0 * ga.at(ix, iy) + ga.at(ix - 1, iy)) /
                   (g.dx[0] * g.dx[0]);
    if (g.dim == 2)
      lap_g += (ga.at(ix, iy + 1) - 2.0 * ga.at(ix, iy) + ga.at(ix, iy - 1)) /
               (g.dx[1] * g.dx[1]);
    double grad_g2 = gx * gx + gy * gy;
    f[i] = std::exp(tau * ga.at(ix, iy)) * lapz[i];
    m1[i] = lapw[i] + tau * tau * grad_g2 * w[i];
    m2[i] = 2.0 * tau * (gx * dwx[i] + gy * dwy[i]) + tau * lap_g * w[i];
  }

  DecompositionReport rep;
  rep.lhs_sq = inner(g, f, f);
  rep.m1_sq = inner(g, m1, m1);
  rep.m2_sq = inner(g, m2, m2);
  rep.cross = inner(g, m1, m2);
  double rhs = rep.m1_sq + rep.m2_sq - 2.0 * rep.cross;
  rep.residual = std::abs(rep.lhs_sq - rhs);
  double scale = std::max({rep.lhs_sq, rep.m1_sq, rep.m2_sq, 1e-300});
  rep.residual_rel = rep.residual / scale;
  return rep;
}

EnergyIdentityReport h1_energy_identity_check(
    const ScalarField<double>& g_src, const std::vector<ScalarField<double>>& G,
    double tau, double lambda, const EtaField& eta, int m) {
  const SpatialGrid& g = g_src.grid;
  const int n = g.total();
  const int nx = g.n[0];
  ExtGamma ga{&eta, lambda, m};

  std::vector<double> rhs(n), tmp(n);
  std::copy(g_src.v.begin(), g_src.v.end(), rhs.begin());
  for (int axis = 0; axis < g.dim; ++axis) {
    derivative_into<double>(g, G[axis].v, axis, tmp);
    for (int i = 0; i < n; ++i) rhs[i] += tmp[i];
  }
  ShiftedHelmholtz minus_lap(g, 1.0, 1.0);
  std::vector<double> z(n);
  minus_lap.solve<double>(rhs, z);

  std::vector<double> w(n), dwx(n), dwy(n, 0.0), lapw(n);
  for (int i = 0; i < n; ++i) {
    int ix = i % nx, iy = i / nx;
    w[i] = std::exp(tau * ga.at(ix, iy)) * z[i];
  }
  derivative_into<double>(g, std::span<const double>(w), 0, dwx);
  if (g.dim == 2) derivative_into<double>(g, std::span<const double>(w), 1, dwy);
  laplacian_into<double>(g, std::span<const double>(w), lapw);

  double lhs = 0.0, rhs_val = 0.0;
  for (int i = 0; i < n; ++i) {
    int ix = i % nx, iy = i / nx;
    double gx = (ga.at(ix + 1, iy) - ga.at(ix - 1, iy)) / (2.0 * g.dx[0]);
    double gy = g.dim == 2
                    ? (ga.at(ix, iy + 1) - ga.at(ix, iy - 1)) / (2.0 * g.dx[1])
                    : 0.0;
    double grad_g2 = gx * gx + gy * gy;
    double ew = std::exp(tau * ga.at(ix, iy));
    // gradient energy through the Dirichlet form, so the quadrature sees an
    // integrand vanishing at the walls
    lhs += -lapw[i] * w[i] - tau * tau * grad_g2 * w[i] * w[i];
    double gtilde = g_src.v[i] - tau * (gx * G[0].v[i] +
                                        (g.dim == 2 ? gy * G[1].v[i] : 0.0));
    double gdotw = G[0].v[i] * dwx[i] + (g.dim == 2 ? G[1].v[i] * dwy[i] : 0.0);
    rhs_val += ew * gtilde * w[i] - ew * gdotw;
  }
  EnergyIdentityReport rep;
  rep.lhs = lhs * g.cell();
  rep.rhs = rhs_val * g.cell();
  rep.residual_rel = std::abs(rep.lhs - rep.rhs) /
                     std::max({std::abs(rep.lhs), std::abs(rep.rhs), 1e-300});
  return rep;
}

PointwiseBoundReport pointwise_bound_check(const EtaField& eta, double lambda,
                                       double tau, const MovingRegion& omega1) {
  const SpatialGrid& g = eta.grid;
  const TimeGrid& tg = eta.time;
  const int nx = g.n[0];
  const int ny = g.dim == 2 ? g.n[1] : 1;

  PointwiseBoundReport rep;
  rep.margin = SpaceTimeField<double>(g, tg);
  double worst_off = 1e300;
  double worst_on_abs = 0.0;

  const double t3 = tau * tau * tau;
  const double l4 = std::pow(lambda, 4);

  for (int m = 0; m <= tg.steps; ++m) {
    ExtGamma ga{&eta, lambda, m};
    // |grad gamma|^2 on a one-ghost extended stencil, then its gradient
    auto grad2_at = [&](int i, int j) {
      double gx = (ga.at(i + 1, j) - ga.at(i - 1, j)) / (2.0 * g.dx[0]);
      double gy = g.dim == 2
                      ? (ga.at(i, j + 1) - ga.at(i, j - 1)) / (2.0 * g.dx[1])
                      : 0.0;
      return gx * gx + gy * gy;
    };
    auto lap_at = [&](int i, int j) {
      double v = (ga.at(i + 1, j) - 2.0 * ga.at(i, j) + ga.at(i - 1, j)) /
                 (g.dx[0] * g.dx[0]);
      if (g.dim == 2)
        v += (ga.at(i, j + 1) - 2.0 * ga.at(i, j) + ga.at(i, j - 1)) /
             (g.dx[1] * g.dx[1]);
      return v;
    };
    auto margin_slice = rep.margin.slice(m);
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        double gx = (ga.at(i + 1, j) - ga.at(i - 1, j)) / (2.0 * g.dx[0]);
        double gy = g.dim == 2
                        ? (ga.at(i, j + 1) - ga.at(i, j - 1)) / (2.0 * g.dx[1])
                        : 0.0;
        double d2x = (grad2_at(i + 1, j) - grad2_at(i - 1, j)) / (2.0 * g.dx[0]);
        double d2y = g.dim == 2 ? (grad2_at(i, j + 1) - grad2_at(i, j - 1)) /
                                      (2.0 * g.dx[1])
                                : 0.0;
        double bilap = (lap_at(i + 1, j) - 2.0 * lap_at(i, j) + lap_at(i - 1, j)) /
                       (g.dx[0] * g.dx[0]);
        if (g.dim == 2)
          bilap += (lap_at(i, j + 1) - 2.0 * lap_at(i, j) + lap_at(i, j - 1)) /
                   (g.dx[1] * g.dx[1]);
        double lhs_pt = 2.0 * t3 * (gx * d2x + gy * d2y) - tau * bilap;
        double denom = t3 * l4 * std::pow(ga.at(i, j), 3);
        double ratio = denom > 0.0 ? lhs_pt / denom : 0.0;
        margin_slice[j * nx + i] = ratio;
        if (omega1.inside(m, j * nx + i)) {
          worst_on_abs = std::max(worst_on_abs, std::abs(ratio));
        } else {
          worst_off = std::min(worst_off, ratio);
        }
      }
    }
  }
  rep.worst_margin_off = worst_off;
  rep.implied_A = worst_off;
  rep.worst_margin_on =
      worst_off > 0.0 ? 3.0 / worst_off - worst_on_abs : -worst_on_abs;
  return rep;
}

ScalarField<double> random_smooth_field(const SpatialGrid& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  const int modes = 4;
  std::vector<double> ax(modes), ay(modes);
  for (int k = 0; k < modes; ++k) {
    ax[k] = dist(rng) / ((k + 1) * (k + 1));
    ay[k] = dist(rng) / ((k + 1) * (k + 1));
  }
  ScalarField<double> f(g);
  for (int idx = 0; idx < g.total(); ++idx) {
    Point p = g.node_flat(idx);
    double ux = (p[0] - g.lo[0]) / (g.hi[0] - g.lo[0]);
    double val = 0.0;
    for (int k = 0; k < modes; ++k)
      val += ax[k] * std::sin((k + 1) * std::numbers::pi * ux);
    if (g.dim == 2) {
      double uy = (p[1] - g.lo[1]) / (g.hi[1] - g.lo[1]);
      double valy = 0.0;
      for (int k = 0; k < modes; ++k)
        valy += ay[k] * std::sin((k + 1) * std::numbers::pi * uy);
      val *= valy;
    }
    f.v[idx] = val;
  }
  return f;
}

SpaceTimeField<double> random_smooth_st_field(const SpatialGrid& g,
                                              const TimeGrid& tg,
                                              std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  std::normal_distribution<double> dist(0.0, 1.0);
  ScalarField<double> base = random_smooth_field(g, seed);
  ScalarField<double> base2 = random_smooth_field(g, seed + 101);
  double b0 = dist(rng), b1 = dist(rng), b2 = dist(rng);
  SpaceTimeField<double> f(g, tg);
  for (int m = 0; m <= tg.steps; ++m) {
    double ut = tg.node(m) / tg.horizon;
    double w1 = b0 + b1 * std::cos(std::numbers::pi * ut);
    double w2 = b2 * std::sin(2.0 * std::numbers::pi * ut);
    auto s = f.slice(m);
    for (int i = 0; i < g.total(); ++i)
      s[i] = w1 * base.v[i] + w2 * base2.v[i];
  }
  return f;
}

SuiteSummary carleman_suite(CarlemanFamily family, const EtaField& eta,
                            double tau_margin, double lambda, double s_or_tau,
                            const MovingRegion& omega2, int count,
                            std::uint64_t seed, const SampledAdvection* adv,
                            bool keep_sides) {
  SuiteSummary sum;
  const SpatialGrid& g = eta.grid;
  const TimeGrid& tg = eta.time;
  const int mid = tg.steps / 2;

  for (int pass = 0; pass < 2; ++pass) {
    double par = pass == 0 ? s_or_tau : 2.0 * s_or_tau;
    auto& ratios = pass == 0 ? sum.ratios_base : sum.ratios_doubled;
    auto& kept = pass == 0 ? sum.sides_base : sum.sides_doubled;
    WeightSet w = assemble_weights(eta, tau_margin, lambda,
                                   family == CarlemanFamily::ode ||
                                           family == CarlemanFamily::global_bzk ||
                                           family == CarlemanFamily::global_bbm
                                       ? par
                                       : 1.0);
    for (int i = 0; i < count; ++i) {
      std::uint64_t s = seed + 977 * i;
      CarlemanSides sides;
      switch (family) {
        case CarlemanFamily::ode:
          sides = eval_ode_carleman(random_smooth_st_field(g, tg, s), w, omega2);
          break;
        case CarlemanFamily::elliptic:
          sides = eval_elliptic_carleman(random_smooth_field(g, s), mid, w,
                                         lambda, par, omega2);
          break;
        case CarlemanFamily::h1: {
          ScalarField<double> gs = random_smooth_field(g, s);
          std::vector<ScalarField<double>> G;
          G.push_back(random_smooth_field(g, s + 7));
          if (g.dim == 2) G.push_back(random_smooth_field(g, s + 13));
          sides = eval_h1_carleman(gs, G, mid, w, lambda, par, omega2);
          break;
        }
        case CarlemanFamily::global_bzk:
          sides = eval_global_carleman(random_smooth_field(g, s), w, omega2,
                                       EquationKind::bzk);
          break;
        case CarlemanFamily::global_bbm:
          sides = eval_global_carleman(random_smooth_field(g, s), w, omega2,
                                       EquationKind::bbm, adv);
          break;
      }
      ratios.push_back(sides.ratio());
      if (keep_sides) kept.push_back(std::move(sides));
    }
  }
  sum.max_base = *std::max_element(sum.ratios_base.begin(), sum.ratios_base.end());
  sum.max_doubled =
      *std::max_element(sum.ratios_doubled.begin(), sum.ratios_doubled.end());
  return sum;
}

}  // namespace ctrllab
