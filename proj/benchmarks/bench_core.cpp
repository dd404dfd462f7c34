#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "ctrllab/beams.hpp"
#include "ctrllab/control.hpp"
#include "ctrllab/pde.hpp"

using namespace ctrllab;

namespace {

ScalarField<double> sine_state(const SpatialGrid& g) {
  return ScalarField<double>::sample(g, [](const Point& p) {
    return std::sin(std::numbers::pi * p[0]);
  });
}

void HelmholtzSolve1D(benchmark::State& state) {
  SpatialGrid g = SpatialGrid::line(0.0, 1.0, static_cast<int>(state.range(0)));
  ShiftedHelmholtz op(g, 1.0, 0.0);
  std::vector<double> rhs(g.total(), 1.0), out(g.total());
  for (auto _ : state) {
    op.solve<double>(rhs, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(HelmholtzSolve1D)->RangeMultiplier(2)->Range(128, 2048)->Complexity();

void HelmholtzSolve2D(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  SpatialGrid g = SpatialGrid::box(0.0, 1.0, n, 0.0, 1.0, n);
  ShiftedHelmholtz op(g, 1.0, 0.0);
  std::vector<double> rhs(g.total(), 1.0), out(g.total());
  for (auto _ : state) {
    op.solve<double>(rhs, out);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(HelmholtzSolve2D)->Arg(16)->Arg(32);

void BzkForward(benchmark::State& state) {
  SpatialGrid g = SpatialGrid::line(0.0, 1.0, 200);
  TimeGrid tg{1.0, static_cast<int>(state.range(0))};
  auto z0 = sine_state(g);
  SpaceTimeField<double> v(g, tg), chi(g, tg);
  std::fill(chi.v.begin(), chi.v.end(), 1.0);
  for (auto _ : state) {
    auto res = solve_bzk_forward(z0, v, chi);
    benchmark::DoNotOptimize(res.z.v.data());
  }
}
BENCHMARK(BzkForward)->Arg(100)->Arg(400);

void BbmForward(benchmark::State& state) {
  SpatialGrid g = SpatialGrid::line(0.0, 1.0, 200);
  TimeGrid tg{1.0, static_cast<int>(state.range(0))};
  SampledAdvection adv =
      sample_advection(BBMCoefficients::constant({1.0, 0.0}), g, tg);
  auto z0 = sine_state(g);
  SpaceTimeField<double> v(g, tg), chi(g, tg);
  std::fill(chi.v.begin(), chi.v.end(), 1.0);
  for (auto _ : state) {
    auto res = solve_bbm_forward(z0, v, chi, adv);
    benchmark::DoNotOptimize(res.z.v.data());
  }
}
BENCHMARK(BbmForward)->Arg(100)->Arg(400);

void BeamEvaluate(benchmark::State& state) {
  BZKBeamParams p;
  p.eps = 0.005;
  p.x0 = {0.5, 0.0};
  p.quad_order = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto val = bzk_beam_evaluate(p, {0.62, 0.0}, 0.3, 1.0);
    benchmark::DoNotOptimize(val);
  }
}
BENCHMARK(BeamEvaluate)->Arg(48)->Arg(96)->Arg(192);

void HumGradient(benchmark::State& state) {
  SpatialGrid g = SpatialGrid::line(0.0, 1.0, 200);
  TimeGrid tg{1.0, static_cast<int>(state.range(0))};
  FlowMap flow{VelocityField::constant({0.98, 0.0}), 2e-3};
  MovingRegion region = with_indicator(
      rasterize_region(flow, RegionSpec::box1d(-0.24, 0.26), g, tg), 0.05);
  HUMProblem pb;
  pb.equation = EquationKind::bzk;
  pb.z0 = sine_state(g);
  pb.region = &region;
  pb.beta = 1e-6;
  auto psi = sine_state(g);
  for (auto _ : state) {
    auto [j, grad] = hum_value_and_gradient(pb, psi);
    benchmark::DoNotOptimize(grad.v.data());
    benchmark::DoNotOptimize(j);
  }
}
BENCHMARK(HumGradient)->Arg(100)->Arg(400);

void RasterizeSweep(benchmark::State& state) {
  SpatialGrid g = SpatialGrid::line(0.0, 1.0, 200);
  TimeGrid tg{1.0, static_cast<int>(state.range(0))};
  FlowMap flow{VelocityField::constant({0.98, 0.0}), 2e-3};
  RegionSpec omega = RegionSpec::box1d(-0.24, 0.26);
  for (auto _ : state) {
    auto region = rasterize_region(flow, omega, g, tg);
    benchmark::DoNotOptimize(region.mask.data());
  }
}
BENCHMARK(RasterizeSweep)->Arg(50)->Arg(200);

}  // namespace

BENCHMARK_MAIN();
