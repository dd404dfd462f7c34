#include <cmath>
#include <numbers>

#include "ctrllab/beams.hpp"
#include "doctest.h"

using namespace ctrllab;

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * kPi;

// direct dense-frequency-grid transform, independent of the quadrature path
cplx beam_psi_oracle(const BZKBeamParams& p, double x, double t, double T) {
  const double se = std::sqrt(p.eps);
  const int nfreq = 20000;
  const double lo = p.xi_bar[0] / p.eps - 1.0 / se;
  const double hi = p.xi_bar[0] / p.eps + 1.0 / se;
  const double dxi = (hi - lo) / nfreq;
  cplx acc{};
  for (int i = 0; i <= nfreq; ++i) {
    double xi = lo + i * dxi;
    double z = se * (xi - p.xi_bar[0] / p.eps);
    double b = 1.0 - z * z;
    if (b <= 0.0) continue;
    double th = theta_l2_normalizer(1) * std::pow(b, 4);
    double S = xi * xi;
    double w = (i == 0 || i == nfreq) ? 0.5 : 1.0;
    acc += w * th * std::exp(-(T - t) * S / (1.0 + S)) *
           std::polar(1.0, (x - p.x0[0]) * xi);
  }
  // psi_hat carries eps^{1/4} from the scaling and the amplitude factor
  return acc * dxi * std::pow(p.eps, 0.25) * std::pow(kTwoPi, -1.5);
}
}  // namespace

TEST_SUITE_BEGIN("beams");

TEST_CASE("frequency profile has unit norm") {
  GaussLegendre gl(24);
  double s = 0.0;
  for (std::size_t i = 0; i < gl.node.size(); ++i) {
    double th = theta_profile({gl.node[i], 0.0}, 1);
    s += gl.weight[i] * th * th;
  }
  CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  // 2D: tensor rule over the square, profile vanishes outside the disc
  GaussLegendre g2(48);
  double s2 = 0.0;
  for (std::size_t i = 0; i < g2.node.size(); ++i)
    for (std::size_t j = 0; j < g2.node.size(); ++j) {
      double th = theta_profile({g2.node[i], g2.node[j]}, 2);
      s2 += g2.weight[i] * g2.weight[j] * th * th;
    }
  CHECK(s2 == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("terminal value at the concentration point") {
  BZKBeamParams p;
  p.eps = 0.01;
  p.x0 = {0.5, 0.0};
  p.quad_order = 64;
  // at t = T the decay factor is one for every frequency, so the value is
  // the plain profile integral scaled by the amplitude conventions
  GaussLegendre gl(32);
  double theta_int = 0.0;
  for (std::size_t i = 0; i < gl.node.size(); ++i)
    theta_int += gl.weight[i] * theta_profile({gl.node[i], 0.0}, 1);
  cplx expect = std::pow(kTwoPi, -1.5) * std::pow(p.eps, -0.25) * theta_int;
  auto [psi, phi] = bzk_beam_evaluate(p, {0.5, 0.0}, 1.0, 1.0);
  CHECK(psi.real() == doctest::Approx(expect.real()).epsilon(1e-10));
  CHECK(std::abs(psi.imag()) < 1e-12);
  // phi carries the extra elliptic factor, tiny at the carrier frequency
  CHECK(std::abs(phi) < 2.0 * p.eps * p.eps * std::abs(psi));
}

TEST_CASE("quadrature agrees with the dense-frequency oracle") {
  BZKBeamParams p;
  p.eps = 0.02;
  p.x0 = {0.6, 0.0};
  p.quad_order = 96;
  for (double x : {0.55, 0.6, 0.72}) {
    for (double t : {0.0, 0.4, 1.0}) {
      cplx got = bzk_beam_evaluate(p, {x, 0.0}, t, 1.0).first;
      cplx want = beam_psi_oracle(p, x, t, 1.0);
      CHECK(std::abs(got - want) < 1e-6 * std::max(1.0, std::abs(want)));
    }
  }
}

TEST_CASE("initial norm sits in the decay sandwich") {
  // free-space statement: the box must capture the whole packet, whose
  // envelope spreads a few units of sqrt(eps)
  SpatialGrid g = SpatialGrid::line(-1.5, 2.5, 2400);
  const double T = 1.0;
  const double lo_bound = std::exp(-2.0 * T) / (kTwoPi * kTwoPi);
  const double hi_bound = 1.0 / (kTwoPi * kTwoPi);
  for (double eps : {0.02, 0.01, 0.005, 0.0025}) {
    BZKBeamParams p;
    p.eps = eps;
    p.x0 = {0.5, 0.0};
    p.quad_order = 96;
    double norm = 0.0;
    for (int i = 0; i < g.total(); ++i)
      norm += std::norm(bzk_beam_evaluate(p, g.node_flat(i), 0.0, T).first);
    norm *= g.cell();
    CHECK(norm >= lo_bound * 0.9);
    CHECK(norm <= hi_bound * 1.1);
  }
}

TEST_CASE("packet mass concentrates near the center") {
  SpatialGrid g = SpatialGrid::line(-1.5, 2.5, 2000);
  const double C = 3.0;  // fixed over the sweep
  for (double eps : {0.02, 0.01, 0.005}) {
    BZKBeamParams p;
    p.eps = eps;
    p.x0 = {0.5, 0.0};
    p.quad_order = 96;
    double total = 0.0, near = 0.0;
    const double radius = C * std::sqrt(eps * std::log(1.0 / eps));
    for (int i = 0; i < g.total(); ++i) {
      double x = g.node_flat(i)[0];
      double m = std::norm(bzk_beam_evaluate(p, {x, 0.0}, 0.0, 1.0).first);
      total += m;
      if (std::abs(x - 0.5) <= radius) near += m;
    }
    CHECK(near >= 0.99 * total);
  }
}

TEST_CASE("boundary correction shrinks with eps and with distance") {
  SpatialGrid g = SpatialGrid::line(0.0, 1.0, 240);
  TimeGrid tg{1.0, 40};
  BZKBeamParams p;
  p.x0 = {0.7, 0.0};
  p.delta = 0.15;
  p.quad_order = 64;

  p.eps = 0.02;
  auto c1 = bzk_boundary_correction(p, g, tg);
  double n1 = std::sqrt(integrate<cplx>(c1.psi));
  p.eps = 0.01;
  auto c2 = bzk_boundary_correction(p, g, tg);
  double n2 = std::sqrt(integrate<cplx>(c2.psi));
  CHECK(n1 / n2 >= std::pow(2.0, 0.55));  // at least the guaranteed rate

  // beam far from the walls: correction negligible against the packet
  SpatialGrid gw = SpatialGrid::line(0.0, 4.0, 700);
  BZKBeamParams pw;
  pw.eps = 0.01;
  pw.x0 = {2.0, 0.0};
  pw.quad_order = 64;
  auto cw = bzk_boundary_correction(pw, gw, tg);
  double corr0 = 0.0, packet0 = 0.0;
  auto c0 = cw.psi.slice(0);
  for (int i = 0; i < gw.total(); ++i) {
    corr0 += std::norm(c0[i]);
    packet0 += std::norm(bzk_beam_evaluate(pw, gw.node_flat(i), 0.0, 1.0).first);
  }
  CHECK(std::sqrt(corr0) <= 1e-3 * std::sqrt(packet0));
}

TEST_CASE("sweep report shape, monotone ratio, quadrature stability") {
  SpatialGrid g = SpatialGrid::line(0.0, 1.0, 240);
  TimeGrid tg{1.0, 40};
  BZKBeamParams base;
  base.x0 = {0.7, 0.0};
  base.delta = 0.15;
  base.quad_order = 64;
  RegionSpec omega0 = RegionSpec::box1d(0.3, 0.5);
  std::vector<double> eps{0.02, 0.01, 0.005};
  BeamReport rep = bzk_beam_sweep(eps, omega0, g, tg, base);
  REQUIRE(rep.param.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(rep.norm_initial[i] > 0.0);
    CHECK(rep.norm_localized[i] > 0.0);
    CHECK(rep.ratio[i] == doctest::Approx(rep.norm_localized[i] /
                                          rep.norm_initial[i]));
  }
  CHECK(rep.ratio[1] < rep.ratio[0]);
  CHECK(rep.ratio[2] < rep.ratio[1]);
  CHECK(rep.slope_localized > 0.0);

  BZKBeamParams doubled = base;
  doubled.quad_order = 128;
  BeamReport rep2 = bzk_beam_sweep(eps, omega0, g, tg, doubled);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(std::abs(rep2.norm_initial[i] - rep.norm_initial[i]) <=
          1e-6 * rep.norm_initial[i]);
    CHECK(std::abs(rep2.norm_localized[i] - rep.norm_localized[i]) <=
          1e-6 * rep.norm_localized[i] + 1e-30);
  }
}

TEST_CASE("cutoff plateau, support, and terminal corrector") {
  SpatialGrid g = SpatialGrid::line(0.0, 1.0, 300);
  TimeGrid tg{1.0, 30};
  WKBBeamParams p;
  p.h = 0.05;
  p.x0 = {0.6, 0.0};
  p.delta = 0.3;
  SampledAdvection adv = sample_advection(
      BBMCoefficients::constant({1.0, 0.0}), g, tg);
  WKBFields f = bbm_wkb_fields(p, adv, g, tg);

  for (int i = 0; i < g.total(); ++i) {
    double x = g.node_flat(i)[0];
    double r = std::abs(x - 0.6);
    if (r <= 0.15) CHECK(wkb_cutoff(p, {x, 0.0}) == 1.0);
    if (r >= 0.3) {
      CHECK(wkb_cutoff(p, {x, 0.0}) == 0.0);
      for (int m = 0; m <= tg.steps; m += 10) {
        CHECK(std::abs(f.psi_h.slice(m)[i]) == 0.0);
        CHECK(std::abs(f.f1.slice(m)[i]) == 0.0);
        CHECK(std::abs(f.f2.slice(m)[i]) == 0.0);
      }
    }
  }
  // f1 vanishes at the terminal time: the time integral is empty
  auto f1T = f.f1.slice(tg.steps);
  for (int i = 0; i < g.total(); ++i) CHECK(std::abs(f1T[i]) == 0.0);
}

TEST_CASE("zero advection kills the correctors and the residual") {
  SpatialGrid g = SpatialGrid::line(0.0, 1.0, 200);
  TimeGrid tg{1.0, 20};
  WKBBeamParams p;
  p.h = 0.05;
  p.x0 = {0.5, 0.0};
  p.delta = 0.3;
  SampledAdvection adv = sample_advection(BBMCoefficients::zero(), g, tg);
  WKBFields f = bbm_wkb_fields(p, adv, g, tg);
  for (const auto& v : f.f1.v) CHECK(std::abs(v) == 0.0);
  for (const auto& v : f.f2.v) CHECK(std::abs(v) == 0.0);
  // the sampled field is time independent, so the interval residuals vanish
  CHECK(f.r_norm_sq <= 1e-28);
}

TEST_CASE("assembled field solves the discrete equation exactly") {
  SpatialGrid g = SpatialGrid::line(0.0, 1.0, 300);
  TimeGrid tg{1.0, 40};
  WKBBeamParams p;
  p.h = 0.05;
  p.x0 = {0.6, 0.0};
  p.delta = 0.3;
  SampledAdvection adv = sample_advection(
      BBMCoefficients::constant({1.0, 0.0}), g, tg);
  WKBFields f = bbm_wkb_fields(p, adv, g, tg);
  SpaceTimeField<cplx> corr = solve_bbm_correction(g, tg, adv, f.r_half);

  // correction starts from rest
  for (const auto& v : corr.slice(0)) CHECK(std::abs(v) == 0.0);

  SpaceTimeField<cplx> psi(g, tg);
  for (std::size_t i = 0; i < psi.v.size(); ++i)
    psi.v[i] = f.psi_h.v[i] + corr.v[i];

  // homogeneous two-level residual of the assembled field
  ShiftedHelmholtz H(g, 1.0, 0.0);
  const int n = g.total();
  const double dt = tg.dt();
  std::vector<cplx> diff(n), hd(n), d(n);
  double worst = 0.0, scale = 0.0;
  for (const auto& v : f.psi_h.v) scale = std::max(scale, std::abs(v));
  for (int m = 0; m < tg.steps; ++m) {
    auto pa = psi.slice(m);
    auto pb = psi.slice(m + 1);
    for (int i = 0; i < n; ++i) diff[i] = (pb[i] - pa[i]) / dt;
    H.apply<cplx>(diff, hd);
    for (int half = 0; half < 2; ++half) {
      auto ps = psi.slice(m + half);
      derivative_into<cplx>(g, ps, 0, d);
      auto ax = adv.x_slice(m + half);
      for (int i = 0; i < n; ++i)
        hd[i] += 0.5 * ax[i] * d[i];
    }
    for (int i = 0; i < n; ++i) worst = std::max(worst, std::abs(hd[i]));
  }
  CHECK(worst <= 1e-9 * std::max(1.0, scale) / dt);
}

TEST_CASE("discrete residual converges to the formal expansion") {
  WKBBeamParams p;
  p.h = 0.05;
  p.x0 = {0.6, 0.0};
  p.delta = 0.3;
  auto defect = [&](int n, int M) {
    SpatialGrid g = SpatialGrid::line(0.0, 1.0, n);
    TimeGrid tg{1.0, M};
    SampledAdvection adv = sample_advection(
        BBMCoefficients::constant({1.0, 0.0}), g, tg);
    WKBFields f = bbm_wkb_fields(p, adv, g, tg);
    auto coef = wkb_expansion_coefficients(p, adv, g, tg);
    double acc = 0.0;
    const int nn = g.total();
    for (int m = 0; m < tg.steps; ++m) {
      double sm = 0.0;
      for (int i = 0; i < nn; ++i) {
        Point x = g.node_flat(i);
        double r2 = (x[0] - p.x0[0]) * (x[0] - p.x0[0]);
        // compare on the cutoff plateau, away from its edge rings
        if (r2 > 0.1 * 0.1) continue;
        cplx carrier = std::polar(std::exp(-0.5 * r2 / p.h),
                                  x[0] * p.xi0[0] / p.h);
        auto sym = [&](int mm) {
          return carrier * (coef[0].slice(mm)[i] / p.h + coef[1].slice(mm)[i] +
                            coef[2].slice(mm)[i] * p.h +
                            coef[3].slice(mm)[i] * p.h * p.h);
        };
        cplx rsym = 0.5 * (sym(m) + sym(m + 1));
        sm += std::norm(f.r_half[m][i] - rsym);
      }
      acc += sm * tg.dt();
    }
    return std::sqrt(acc * g.cell());
  };
  double e1 = defect(400, 40);
  double e2 = defect(800, 80);
  CHECK(e2 < e1 / 3.0);
}

TEST_CASE("bbm sweep smoke run") {
  SpatialGrid g = SpatialGrid::line(0.0, 1.0, 400);
  TimeGrid tg{1.0, 40};
  SampledAdvection adv = sample_advection(
      BBMCoefficients::constant({1.0, 0.0}), g, tg);
  WKBBeamParams base;
  base.x0 = {0.6, 0.0};
  base.delta = 0.3;
  RegionSpec omega = RegionSpec::box1d(0.05, 0.25);
  BeamReport rep = bbm_beam_sweep({0.08, 0.04}, omega, adv, g, tg, base);
  REQUIRE(rep.param.size() == 2);
  for (double v : rep.norm_initial) CHECK(v > 0.0);
  // the packet vanishes identically on the observation set before correction
  WKBBeamParams p = base;
  p.h = 0.08;
  WKBFields f = bbm_wkb_fields(p, adv, g, tg);
  for (int m = 0; m <= tg.steps; m += 8)
    for (int i = 0; i < g.total(); ++i)
      if (omega.contains(g.node_flat(i), 1))
        CHECK(std::abs(f.psi_h.slice(m)[i]) == 0.0);
}

TEST_SUITE_END();
