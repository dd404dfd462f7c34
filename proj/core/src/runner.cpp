#include "ctrllab/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <numbers>

#include "ctrllab/beams.hpp"
#include "ctrllab/carleman.hpp"
#include "ctrllab/control.hpp"
#include "ctrllab/csv.hpp"
#include "ctrllab/parallel.hpp"

namespace ctrllab {

int worker_count() {
  if (const char* env = std::getenv("LAB_THREADS")) {
    int v = std::atoi(env);
    if (v >= 1) return v;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc ? static_cast<int>(hc) : 1;
}

const std::vector<std::string>& experiment_families() {
  static const std::vector<std::string> fams{
      "flow-check", "weights-check", "beam-bzk", "beam-bbm",
      "hum",        "dichotomy",     "carleman"};
  return fams;
}

namespace {

namespace fs = std::filesystem;

Point region_center(const RegionSpecConfig& r) {
  if (r.kind == "box")
    return {0.5 * (r.lo[0] + r.hi[0]), 0.5 * (r.lo[1] + r.hi[1])};
  return r.center;
}

double region_center0(const RegionSpecConfig& r) { return region_center(r)[0]; }

std::vector<Point> clamped_center_curve(const FlowMap& flow, const Point& c0,
                                        const SpatialGrid& g,
                                        const TimeGrid& tg) {
  std::vector<Point> curve(tg.steps + 1);
  for (int m = 0; m <= tg.steps; ++m) {
    Point p = integrate_flow(flow, c0, 0.0, tg.node(m));
    for (int a = 0; a < g.dim; ++a)
      p[a] = std::clamp(p[a], g.lo[a] + 2.0 * g.dx[a], g.hi[a] - 2.0 * g.dx[a]);
    curve[m] = p;
  }
  return curve;
}

MovingRegion static_region(const RegionSpec& spec, const SpatialGrid& g,
                           const TimeGrid& tg) {
  MovingRegion r;
  r.grid = g;
  r.time = tg;
  r.reference = spec;
  std::vector<std::uint8_t> slice(g.total(), 0);
  for (int idx = 0; idx < g.total(); ++idx)
    slice[idx] = spec.contains(g.node_flat(idx), g.dim) ? 1 : 0;
  r.mask.assign(tg.steps + 1, slice);
  return r;
}

ScalarField<double> standard_initial_state(const SpatialGrid& g) {
  return ScalarField<double>::sample(g, [&g](const Point& p) {
    double v = std::sin(std::numbers::pi * (p[0] - g.lo[0]) / (g.hi[0] - g.lo[0]));
    if (g.dim == 2)
      v *= std::sin(std::numbers::pi * (p[1] - g.lo[1]) / (g.hi[1] - g.lo[1]));
    return v;
  });
}

struct FamilyContext {
  const ExperimentConfig& cfg;
  fs::path out;
  std::vector<std::string> files;

  void emit(const std::string& name, const std::string& content) {
    write_file_atomic(out / name, content);
    files.push_back(name);
  }
};

void run_flow_check(FamilyContext& ctx) {
  const auto& cfg = ctx.cfg;
  SpatialGrid g = cfg.grid.make();
  TimeGrid tg = cfg.time.make();
  FlowMap flow = cfg.flow.make();
  RegionSpec omega0 = cfg.region.omega0.make();
  auto gamma = clamped_center_curve(flow, region_center(cfg.region.omega0), g, tg);
  RegionAssumptionReport rep = check_assumption(flow, omega0, g, tg, gamma);

  CsvWriter csv({"condition", "pass", "detail"});
  csv.row({"curve_inside", rep.curve_inside ? "1" : "0", "curve stays in the moving section"});
  csv.row({"covers", rep.covers ? "1" : "0",
           "uncovered_nodes=" + std::to_string(rep.uncovered_nodes)});
  csv.row({"edge_connected", rep.edge_connected ? "1" : "0",
           rep.t1 >= 0 ? "t1=" + CsvWriter::format(rep.t1) : "no switch"});
  csv.row({"middle_split", rep.middle_split ? "1" : "0",
           rep.t2 >= 0 ? "t2=" + CsvWriter::format(rep.t2) : "no switch"});
  csv.row({"no_avoiding_path", rep.no_avoiding_path ? "1" : "0",
           std::string("stable_under_refinement=") + (rep.avoidance_stable ? "1" : "0")});
  ctx.emit("flow_check.csv", csv.text());
}

void run_weights_check(FamilyContext& ctx) {
  const auto& cfg = ctx.cfg;
  if (cfg.grid.dim != 1)
    throw std::runtime_error("weights-check: sweep construction is 1D");
  SpatialGrid g = cfg.grid.make();
  TimeGrid tg = cfg.time.make();
  FlowMap flow = cfg.flow.make();
  RegionSpec omega0 = cfg.region.omega0.make();
  EtaField eta = build_eta_sweep_1d(flow, region_center0(cfg.region.omega0), g,
                                    tg, cfg.weights.eta);
  MovingRegion omega1 =
      rasterize_region(flow, omega0.dilate(cfg.region.margins[0]), g, tg);
  WeightPropertyReport rep =
      check_weight_properties(eta, omega1, cfg.weights.tau_margin);

  CsvWriter csv({"property", "pass", "margin"});
  auto row = [&](const char* name, bool p, double m) {
    csv.row({name, p ? "1" : "0", CsvWriter::format(m)});
  };
  row("p1", rep.p1, rep.m1);
  row("p2", rep.p2, rep.m2);
  row("p3", rep.p3, rep.m3);
  row("p4", rep.p4, rep.m4);
  row("p5", rep.p5, rep.m5);
  row("p6", rep.p6, rep.m6);
  ctx.emit("weights_check.csv", csv.text());
}

std::string beam_report_csv(const BeamReport& rep) {
  CsvWriter csv({"param", "norm_initial", "norm_localized", "norm_correction",
                 "ratio"});
  for (std::size_t i = 0; i < rep.param.size(); ++i)
    csv.row_values({rep.param[i], rep.norm_initial[i], rep.norm_localized[i],
                    rep.norm_correction[i], rep.ratio[i]});
  csv.row({"slope", CsvWriter::format(rep.slope_initial),
           CsvWriter::format(rep.slope_localized), "",
           CsvWriter::format(rep.slope_ratio)});
  return csv.text();
}

void run_beam_bzk(FamilyContext& ctx) {
  const auto& cfg = ctx.cfg;
  SpatialGrid g = cfg.grid.dim == 1
                      ? SpatialGrid::line(cfg.grid.bounds[0][0],
                                          cfg.grid.bounds[0][1],
                                          cfg.beam_bzk.grid_n[0])
                      : SpatialGrid::box(cfg.grid.bounds[0][0],
                                         cfg.grid.bounds[0][1],
                                         cfg.beam_bzk.grid_n[0],
                                         cfg.grid.bounds[1][0],
                                         cfg.grid.bounds[1][1],
                                         cfg.beam_bzk.grid_n[1]);
  TimeGrid tg{cfg.time.horizon, cfg.beam_bzk.time_steps};
  BZKBeamParams p;
  p.dim = cfg.grid.dim;
  p.x0 = cfg.beam_bzk.x0;
  p.xi_bar = cfg.beam_bzk.xi_bar;
  p.k = cfg.beam_bzk.k;
  p.delta = cfg.beam_bzk.delta;
  p.quad_order = cfg.beam_bzk.quad_order;
  BeamReport rep =
      bzk_beam_sweep(cfg.sweeps.eps, cfg.fixed_region.make(), g, tg, p);
  ctx.emit("beam_bzk.csv", beam_report_csv(rep));
}

void run_beam_bbm(FamilyContext& ctx) {
  const auto& cfg = ctx.cfg;
  SpatialGrid g = cfg.grid.dim == 1
                      ? SpatialGrid::line(cfg.grid.bounds[0][0],
                                          cfg.grid.bounds[0][1],
                                          cfg.beam_bbm.grid_n[0])
                      : SpatialGrid::box(cfg.grid.bounds[0][0],
                                         cfg.grid.bounds[0][1],
                                         cfg.beam_bbm.grid_n[0],
                                         cfg.grid.bounds[1][0],
                                         cfg.grid.bounds[1][1],
                                         cfg.beam_bbm.grid_n[1]);
  TimeGrid tg{cfg.time.horizon, cfg.beam_bbm.time_steps};
  SampledAdvection adv = sample_advection(cfg.bbm.make(), g, tg);
  WKBBeamParams p;
  p.dim = cfg.grid.dim;
  p.x0 = cfg.beam_bbm.x0;
  p.xi0 = cfg.beam_bbm.xi0;
  p.delta = cfg.beam_bbm.delta;
  BeamReport rep =
      bbm_beam_sweep(cfg.sweeps.h, cfg.beam_bbm.omega.make(), adv, g, tg, p);
  ctx.emit("beam_bbm.csv", beam_report_csv(rep));
}

MovingRegion moving_control_region(const ExperimentConfig& cfg,
                                   const SpatialGrid& g, const TimeGrid& tg) {
  FlowMap flow = cfg.flow.make();
  RegionSpec omega =
      cfg.region.omega0.make().dilate(cfg.region.margins[3]);
  return with_indicator(rasterize_region(flow, omega, g, tg), cfg.region.rho);
}

void run_hum(FamilyContext& ctx) {
  const auto& cfg = ctx.cfg;
  SpatialGrid g = cfg.grid.make();
  TimeGrid tg = cfg.time.make();
  MovingRegion region = moving_control_region(cfg, g, tg);
  ScalarField<double> z0 = standard_initial_state(g);

  SampledAdvection adv;
  HUMProblem pb;
  pb.equation = cfg.equation_kind();
  pb.z0 = z0;
  pb.region = &region;
  pb.beta = cfg.hum.beta;
  pb.cg_tol = cfg.hum.cg_tol;
  pb.cg_max_iter = cfg.hum.cg_max_iter;
  if (pb.equation == EquationKind::bbm) {
    adv = sample_advection(cfg.bbm.make(), g, tg);
    pb.advection = &adv;
  }
  ControlSolution sol = solve_null_control(pb);

  double z0n = norm_l2(g, z0.v);
  CsvWriter csv({"beta", "cost", "final_norm", "final_rel", "cg_iters",
                 "converged"});
  csv.row({CsvWriter::format(pb.beta), CsvWriter::format(sol.cost),
           CsvWriter::format(sol.final_norm),
           CsvWriter::format(sol.final_norm / z0n),
           std::to_string(sol.cg_iterations), sol.converged ? "1" : "0"});
  ctx.emit("hum.csv", csv.text());

  CsvWriter trace({"iter", "residual", "objective"});
  for (std::size_t i = 0; i < sol.cg_residuals.size(); ++i)
    trace.row_values({static_cast<double>(i), sol.cg_residuals[i],
                      sol.cg_objective[i]});
  ctx.emit("hum_cg_trace.csv", trace.text());
}

void run_dichotomy(FamilyContext& ctx) {
  const auto& cfg = ctx.cfg;
  SpatialGrid g = cfg.grid.make();
  TimeGrid tg = cfg.time.make();
  MovingRegion moving = moving_control_region(cfg, g, tg);
  MovingRegion fixed =
      with_indicator(static_region(cfg.fixed_region.make(), g, tg),
                     cfg.region.rho);
  ScalarField<double> z0 = standard_initial_state(g);

  SampledAdvection adv;
  const SampledAdvection* advp = nullptr;
  if (cfg.equation_kind() == EquationKind::bbm) {
    adv = sample_advection(cfg.bbm.make(), g, tg);
    advp = &adv;
  }
  DiagnosticCurve curve = dichotomy_diagnostic(
      z0, fixed, moving, cfg.sweeps.beta, cfg.equation_kind(), advp,
      cfg.hum.cg_tol, cfg.hum.cg_max_iter);

  CsvWriter csv({"beta", "region_kind", "cost", "final_norm", "cg_iters"});
  auto rows = [&](const char* kind, const std::vector<DiagnosticCurve::Cell>& cells) {
    for (const auto& c : cells)
      csv.row({CsvWriter::format(c.beta), kind, CsvWriter::format(c.cost),
               CsvWriter::format(c.final_norm), std::to_string(c.cg_iters)});
  };
  rows("fixed", curve.fixed_cells);
  rows("moving", curve.moving_cells);
  ctx.emit("dichotomy.csv", csv.text());

  CsvWriter sum({"region_kind", "cost_growth_per_decade"});
  sum.row({"fixed", CsvWriter::format(curve.growth_fixed)});
  sum.row({"moving", CsvWriter::format(curve.growth_moving)});
  ctx.emit("dichotomy_summary.csv", sum.text());
}

void run_carleman(FamilyContext& ctx) {
  const auto& cfg = ctx.cfg;
  if (cfg.grid.dim != 1)
    throw std::runtime_error("carleman: suite configuration is 1D");
  SpatialGrid g = SpatialGrid::line(cfg.grid.bounds[0][0], cfg.grid.bounds[0][1],
                                    cfg.carleman.grid_n[0]);
  TimeGrid tg{cfg.time.horizon, cfg.carleman.time_steps};
  FlowMap flow = cfg.flow.make();
  RegionSpec omega0 = cfg.region.omega0.make();
  EtaField eta = build_eta_sweep_1d(flow, region_center0(cfg.region.omega0), g,
                                    tg, cfg.weights.eta);
  auto nested = rasterize_nested(
      flow,
      {omega0.dilate(cfg.region.margins[0]), omega0.dilate(cfg.region.margins[1]),
       omega0.dilate(cfg.region.margins[3])},
      g, tg);
  const MovingRegion& omega1 = nested[0];
  const MovingRegion& omega2 = nested[1];
  const MovingRegion& omega_full = nested[2];
  SampledAdvection adv = sample_advection(cfg.bbm.make(), g, tg);

  const double lam = cfg.carleman.lambda0;
  const int count = cfg.carleman.suite_size;
  const std::uint64_t seed = cfg.seed;

  struct FamilyDef {
    CarlemanFamily fam;
    const char* name;
    double par;
    const MovingRegion* region;
  };
  const std::vector<FamilyDef> fams{
      {CarlemanFamily::ode, "ode", cfg.carleman.s0, &omega2},
      {CarlemanFamily::elliptic, "elliptic", cfg.carleman.tau0, &omega2},
      {CarlemanFamily::h1, "h1", cfg.carleman.tau0, &omega2},
      {CarlemanFamily::global_bzk, "global_bzk", cfg.carleman.s0, &omega_full},
      {CarlemanFamily::global_bbm, "global_bbm", cfg.carleman.s0, &omega_full},
  };

  CsvWriter summary({"family", "param", "max_ratio_base", "max_ratio_doubled",
                     "stable"});
  for (const auto& fd : fams) {
    SuiteSummary s = carleman_suite(fd.fam, eta, cfg.weights.tau_margin, lam,
                                    fd.par, *fd.region, count, seed, &adv,
                                    true);
    // term-per-column rows for both parameter passes
    std::vector<std::string> header{"sample", "s", "lambda", "tau", "lhs"};
    for (const auto& [name, val] : s.sides_base.front().rhs_terms)
      header.push_back("rhs_" + name);
    header.push_back("ratio");
    CsvWriter csv(header);
    auto rows = [&](const std::vector<CarlemanSides>& sides) {
      for (std::size_t i = 0; i < sides.size(); ++i) {
        std::vector<double> vals{static_cast<double>(i), sides[i].s,
                                 sides[i].lambda, sides[i].tau, sides[i].lhs};
        for (const auto& [name, val] : sides[i].rhs_terms) vals.push_back(val);
        vals.push_back(sides[i].ratio());
        csv.row_values(vals);
      }
    };
    rows(s.sides_base);
    rows(s.sides_doubled);
    ctx.emit(std::string("carleman_") + fd.name + ".csv", csv.text());
    summary.row({fd.name, CsvWriter::format(fd.par),
                 CsvWriter::format(s.max_base), CsvWriter::format(s.max_doubled),
                 s.stable() ? "1" : "0"});
  }
  ctx.emit("carleman_summary.csv", summary.text());

  // operator-splitting identity refinement study, term per column
  {
    CsvWriter csv({"n", "lhs_sq", "m1_sq", "m2_sq", "cross", "residual",
                   "residual_rel"});
    std::vector<double> ns, res;
    for (int n : {cfg.carleman.grid_n[0] / 4, cfg.carleman.grid_n[0] / 2,
                  cfg.carleman.grid_n[0]}) {
      SpatialGrid gr = SpatialGrid::line(cfg.grid.bounds[0][0],
                                         cfg.grid.bounds[0][1], n);
      EtaField er = build_eta_sweep_1d(flow, region_center0(cfg.region.omega0),
                                       gr, tg, cfg.weights.eta);
      ScalarField<double> z = random_smooth_field(gr, cfg.seed + 5);
      DecompositionReport rep = splitting_identity_check(
          z, cfg.carleman.tau0, lam, er, tg.steps / 2);
      csv.row_values({static_cast<double>(n), rep.lhs_sq, rep.m1_sq, rep.m2_sq,
                      rep.cross, rep.residual, rep.residual_rel});
      ns.push_back(n);
      res.push_back(rep.residual_rel);
    }
    double order = -loglog_slope(ns, res);
    csv.row({"order", "", "", "", "", "", CsvWriter::format(order)});
    ctx.emit("carleman_splitting.csv", csv.text());
  }

  // pointwise bound scan over lambda at fixed tau
  {
    CsvWriter csv({"lambda", "tau", "worst_margin_off", "worst_margin_on",
                   "implied_A"});
    for (double l : {2.0, 4.0, 8.0, 16.0, 32.0}) {
      PointwiseBoundReport rep =
          pointwise_bound_check(eta, l, cfg.carleman.tau0, omega1);
      csv.row_values({l, cfg.carleman.tau0, rep.worst_margin_off,
                      rep.worst_margin_on, rep.implied_A});
    }
    ctx.emit("carleman_pointwise_bound.csv", csv.text());
  }
}

}  // namespace

RunManifest run_experiments(const ExperimentConfig& cfg,
                            const std::vector<std::string>& only,
                            const fs::path& out_dir) {
  auto issues = cfg.validate();
  if (!issues.empty()) throw ConfigError(issues);

  std::vector<std::string> fams = only.empty() ? experiment_families() : only;
  for (const auto& f : fams) {
    const auto& known = experiment_families();
    if (std::find(known.begin(), known.end(), f) == known.end())
      throw ConfigError({"--only: unknown family '" + f + "'"});
  }

  RunManifest manifest;
  manifest.version = kVersion;
  manifest.config_snapshot = serialize_config(cfg);
  manifest.families = fams;

  fs::create_directories(out_dir);
  for (const auto& fam : fams) {
    FamilyContext ctx{cfg, out_dir, {}};
    auto start = std::chrono::steady_clock::now();
    try {
      if (fam == "flow-check") run_flow_check(ctx);
      else if (fam == "weights-check") run_weights_check(ctx);
      else if (fam == "beam-bzk") run_beam_bzk(ctx);
      else if (fam == "beam-bbm") run_beam_bbm(ctx);
      else if (fam == "hum") run_hum(ctx);
      else if (fam == "dichotomy") run_dichotomy(ctx);
      else if (fam == "carleman") run_carleman(ctx);
    } catch (const std::exception& e) {
      manifest.failures[fam] = e.what();
    }
    auto stop = std::chrono::steady_clock::now();
    manifest.seconds[fam] =
        std::chrono::duration<double>(stop - start).count();
    manifest.outputs[fam] = ctx.files;
  }
  write_file_atomic(out_dir / "manifest.json", manifest.to_json_text());
  return manifest;
}

}  // namespace ctrllab
