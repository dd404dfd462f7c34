#include "ctrllab/config.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace ctrllab {

using nlohmann::json;

ConfigError::ConfigError(std::vector<std::string> list)
    : std::runtime_error(list.empty() ? "invalid config"
                                      : "invalid config: " + list.front() +
                                            (list.size() > 1 ? " (+more)" : "")),
      issues(std::move(list)) {}

SpatialGrid GridConfig::make() const {
  if (dim == 1) return SpatialGrid::line(bounds[0][0], bounds[0][1], n[0]);
  return SpatialGrid::box(bounds[0][0], bounds[0][1], n[0], bounds[1][0],
                          bounds[1][1], n[1]);
}

FlowMap FlowConfig::make() const {
  FlowMap fm;
  fm.dt_flow = dt_flow;
  if (kind == "zero")
    fm.vel = VelocityField::zero();
  else if (kind == "translation")
    fm.vel = VelocityField::constant(velocity);
  else if (kind == "rotation")
    fm.vel = VelocityField::rotation(omega, center);
  else
    throw ConfigError({"flow.kind: unknown value '" + kind + "'"});
  return fm;
}

RegionSpec RegionSpecConfig::make() const {
  if (kind == "box") {
    RegionSpec r;
    r.kind = RegionSpec::Kind::box;
    r.lo = lo;
    r.hi = hi;
    return r;
  }
  return RegionSpec::ball(center, radius, 2);
}

BBMCoefficients BBMFieldConfig::make() const {
  if (kind == "zero") return BBMCoefficients::zero();
  if (kind == "constant") return BBMCoefficients::constant(value);
  if (kind == "rotation") {
    double w = omega;
    Point c = center;
    return BBMCoefficients{[w, c](const Point& p, double) {
      return Point{-w * (p[1] - c[1]), w * (p[0] - c[0])};
    }};
  }
  throw ConfigError({"bbm.kind: unknown value '" + kind + "'"});
}

EquationKind ExperimentConfig::equation_kind() const {
  return equation == "bbm" ? EquationKind::bbm : EquationKind::bzk;
}

std::vector<std::string> ExperimentConfig::validate() const {
  std::vector<std::string> bad;
  auto check = [&](bool ok, const std::string& msg) {
    if (!ok) bad.push_back(msg);
  };
  check(equation == "bzk" || equation == "bbm",
        "equation: must be 'bzk' or 'bbm'");
  check(grid.dim == 1 || grid.dim == 2, "grid.dim: must be 1 or 2");
  for (int a = 0; a < grid.dim; ++a) {
    check(grid.n[a] >= 3, "grid.n[" + std::to_string(a) + "]: must be >= 3");
    check(grid.bounds[a][1] > grid.bounds[a][0],
          "grid.bounds[" + std::to_string(a) + "]: upper must exceed lower");
  }
  check(time.horizon > 0.0, "time.horizon: must be > 0");
  check(time.steps >= 2, "time.steps: must be >= 2");
  check(flow.dt_flow > 0.0, "flow.dt: must be > 0");
  check(flow.kind == "zero" || flow.kind == "translation" ||
            flow.kind == "rotation",
        "flow.kind: must be zero|translation|rotation");
  check(region.rho > 0.0, "region.rho: must be > 0");
  for (int i = 0; i < 4; ++i)
    check(region.margins[i] > 0.0,
          "region.margins[" + std::to_string(i) + "]: must be > 0");
  check(std::is_sorted(region.margins.begin(), region.margins.end()),
        "region.margins: must be nondecreasing (omega1..omega)");
  check(weights.lambda >= 1.0, "weights.lambda: must be >= 1");
  check(weights.s > 0.0, "weights.s: must be > 0");
  check(weights.tau_margin > 0.0 &&
            weights.tau_margin < std::min(1.0, time.horizon / 2.0),
        "weights.tau_margin: must lie in (0, min{1, T/2})");
  auto check_sweep = [&](const std::vector<double>& v, const std::string& name,
                         bool decreasing) {
    check(!v.empty(), name + ": must be nonempty");
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
      bool ok = decreasing ? v[i + 1] < v[i] : v[i + 1] != v[i];
      check(ok, name + ": must be sorted strictly decreasing");
    }
    for (double x : v) check(x > 0.0, name + ": entries must be > 0");
  };
  check_sweep(sweeps.eps, "sweeps.eps", true);
  check_sweep(sweeps.h, "sweeps.h", true);
  check_sweep(sweeps.beta, "sweeps.beta", true);
  check(hum.beta > 0.0, "hum.beta: must be > 0");
  check(hum.cg_tol > 0.0, "hum.cg_tol: must be > 0");
  check(hum.cg_max_iter >= 1, "hum.cg_max_iter: must be >= 1");
  check(beam_bzk.k > grid.dim / 4, "beam_bzk.k: must exceed dim/4");
  check(beam_bzk.delta > 0.0, "beam_bzk.delta: must be > 0");
  check(beam_bbm.delta > 0.0, "beam_bbm.delta: must be > 0");
  check(carleman.suite_size >= 1, "carleman.suite_size: must be >= 1");
  check(carleman.s0 > 0.0, "carleman.s0: must be > 0");
  check(carleman.tau0 > 0.0, "carleman.tau0: must be > 0");
  check(carleman.lambda0 >= 1.0, "carleman.lambda0: must be >= 1");
  check(seed != 0, "seed: must be nonzero");
  return bad;
}

// ---- json mapping ----

namespace {

void get_point(const json& j, const char* key, Point& p) {
  if (!j.contains(key)) return;
  auto arr = j.at(key);
  for (std::size_t a = 0; a < arr.size() && a < 2; ++a) p[a] = arr[a];
}

json point_json(const Point& p, int dim) {
  json a = json::array();
  for (int i = 0; i < dim; ++i) a.push_back(p[i]);
  return a;
}

void from_json_region(const json& j, RegionSpecConfig& r) {
  if (j.contains("kind")) r.kind = j.at("kind");
  get_point(j, "lo", r.lo);
  get_point(j, "hi", r.hi);
  get_point(j, "center", r.center);
  if (j.contains("radius")) r.radius = j.at("radius");
}

json to_json_region(const RegionSpecConfig& r, int dim) {
  json j;
  j["kind"] = r.kind;
  if (r.kind == "box") {
    j["lo"] = point_json(r.lo, dim);
    j["hi"] = point_json(r.hi, dim);
  } else {
    j["center"] = point_json(r.center, dim);
    j["radius"] = r.radius;
  }
  return j;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError({std::string("json: ") + e.what()});
  }
  ExperimentConfig c = default_config();
  try {
    if (j.contains("equation")) c.equation = j.at("equation");
    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      if (g.contains("dim")) c.grid.dim = g.at("dim");
      if (g.contains("bounds")) {
        auto b = g.at("bounds");
        for (std::size_t a = 0; a < b.size() && a < 2; ++a) {
          c.grid.bounds[a][0] = b[a][0];
          c.grid.bounds[a][1] = b[a][1];
        }
      }
      if (g.contains("n")) {
        auto n = g.at("n");
        for (std::size_t a = 0; a < n.size() && a < 2; ++a) c.grid.n[a] = n[a];
      }
    }
    if (j.contains("time")) {
      const auto& t = j.at("time");
      if (t.contains("horizon")) c.time.horizon = t.at("horizon");
      if (t.contains("steps")) c.time.steps = t.at("steps");
    }
    if (j.contains("flow")) {
      const auto& f = j.at("flow");
      if (f.contains("kind")) c.flow.kind = f.at("kind");
      get_point(f, "velocity", c.flow.velocity);
      if (f.contains("omega")) c.flow.omega = f.at("omega");
      get_point(f, "center", c.flow.center);
      if (f.contains("dt")) c.flow.dt_flow = f.at("dt");
    }
    if (j.contains("region")) {
      const auto& r = j.at("region");
      if (r.contains("omega0")) from_json_region(r.at("omega0"), c.region.omega0);
      if (r.contains("margins")) {
        auto m = r.at("margins");
        for (std::size_t i = 0; i < m.size() && i < 4; ++i)
          c.region.margins[i] = m[i];
      }
      if (r.contains("rho")) c.region.rho = r.at("rho");
    }
    if (j.contains("fixed_region"))
      from_json_region(j.at("fixed_region"), c.fixed_region);
    if (j.contains("weights")) {
      const auto& w = j.at("weights");
      if (w.contains("lambda")) c.weights.lambda = w.at("lambda");
      if (w.contains("s")) c.weights.s = w.at("s");
      if (w.contains("tau_margin")) c.weights.tau_margin = w.at("tau_margin");
      if (w.contains("eta")) {
        const auto& e = w.at("eta");
        if (e.contains("offset")) c.weights.eta.offset = e.at("offset");
        if (e.contains("amplitude")) c.weights.eta.amplitude = e.at("amplitude");
        if (e.contains("width")) c.weights.eta.width = e.at("width");
      }
    }
    if (j.contains("bbm")) {
      const auto& b = j.at("bbm");
      if (b.contains("kind")) c.bbm.kind = b.at("kind");
      get_point(b, "value", c.bbm.value);
      if (b.contains("omega")) c.bbm.omega = b.at("omega");
      get_point(b, "center", c.bbm.center);
    }
    if (j.contains("beam_bzk")) {
      const auto& b = j.at("beam_bzk");
      get_point(b, "x0", c.beam_bzk.x0);
      get_point(b, "xi_bar", c.beam_bzk.xi_bar);
      if (b.contains("k")) c.beam_bzk.k = b.at("k");
      if (b.contains("delta")) c.beam_bzk.delta = b.at("delta");
      if (b.contains("quad_order")) c.beam_bzk.quad_order = b.at("quad_order");
      if (b.contains("grid_n")) {
        auto n = b.at("grid_n");
        for (std::size_t a = 0; a < n.size() && a < 2; ++a)
          c.beam_bzk.grid_n[a] = n[a];
      }
      if (b.contains("time_steps")) c.beam_bzk.time_steps = b.at("time_steps");
    }
    if (j.contains("beam_bbm")) {
      const auto& b = j.at("beam_bbm");
      get_point(b, "x0", c.beam_bbm.x0);
      get_point(b, "xi0", c.beam_bbm.xi0);
      if (b.contains("delta")) c.beam_bbm.delta = b.at("delta");
      if (b.contains("grid_n")) {
        auto n = b.at("grid_n");
        for (std::size_t a = 0; a < n.size() && a < 2; ++a)
          c.beam_bbm.grid_n[a] = n[a];
      }
      if (b.contains("time_steps")) c.beam_bbm.time_steps = b.at("time_steps");
      if (b.contains("omega")) from_json_region(b.at("omega"), c.beam_bbm.omega);
    }
    if (j.contains("sweeps")) {
      const auto& s = j.at("sweeps");
      if (s.contains("eps")) c.sweeps.eps = s.at("eps").get<std::vector<double>>();
      if (s.contains("h")) c.sweeps.h = s.at("h").get<std::vector<double>>();
      if (s.contains("beta"))
        c.sweeps.beta = s.at("beta").get<std::vector<double>>();
    }
    if (j.contains("hum")) {
      const auto& h = j.at("hum");
      if (h.contains("beta")) c.hum.beta = h.at("beta");
      if (h.contains("cg_tol")) c.hum.cg_tol = h.at("cg_tol");
      if (h.contains("cg_max_iter")) c.hum.cg_max_iter = h.at("cg_max_iter");
    }
    if (j.contains("carleman")) {
      const auto& k = j.at("carleman");
      if (k.contains("suite_size")) c.carleman.suite_size = k.at("suite_size");
      if (k.contains("s0")) c.carleman.s0 = k.at("s0");
      if (k.contains("tau0")) c.carleman.tau0 = k.at("tau0");
      if (k.contains("lambda0")) c.carleman.lambda0 = k.at("lambda0");
      if (k.contains("grid_n")) {
        auto n = k.at("grid_n");
        for (std::size_t a = 0; a < n.size() && a < 2; ++a)
          c.carleman.grid_n[a] = n[a];
      }
      if (k.contains("time_steps")) c.carleman.time_steps = k.at("time_steps");
    }
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir");
    if (j.contains("seed")) c.seed = j.at("seed");
  } catch (const json::exception& e) {
    throw ConfigError({std::string("json: ") + e.what()});
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& file) {
  std::ifstream is(file);
  if (!is) throw ConfigError({"cannot read config file " + file.string()});
  std::ostringstream buf;
  buf << is.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const ExperimentConfig& c) {
  const int dim = c.grid.dim;
  json j;
  j["equation"] = c.equation;
  {
    json g;
    g["dim"] = dim;
    json b = json::array();
    for (int a = 0; a < dim; ++a)
      b.push_back({c.grid.bounds[a][0], c.grid.bounds[a][1]});
    g["bounds"] = b;
    json n = json::array();
    for (int a = 0; a < dim; ++a) n.push_back(c.grid.n[a]);
    g["n"] = n;
    j["grid"] = g;
  }
  j["time"] = {{"horizon", c.time.horizon}, {"steps", c.time.steps}};
  {
    json f;
    f["kind"] = c.flow.kind;
    if (c.flow.kind == "translation")
      f["velocity"] = point_json(c.flow.velocity, dim);
    if (c.flow.kind == "rotation") {
      f["omega"] = c.flow.omega;
      f["center"] = point_json(c.flow.center, dim);
    }
    f["dt"] = c.flow.dt_flow;
    j["flow"] = f;
  }
  {
    json r;
    r["omega0"] = to_json_region(c.region.omega0, dim);
    r["margins"] = c.region.margins;
    r["rho"] = c.region.rho;
    j["region"] = r;
  }
  j["fixed_region"] = to_json_region(c.fixed_region, dim);
  j["weights"] = {{"lambda", c.weights.lambda},
                  {"s", c.weights.s},
                  {"tau_margin", c.weights.tau_margin},
                  {"eta",
                   {{"offset", c.weights.eta.offset},
                    {"amplitude", c.weights.eta.amplitude},
                    {"width", c.weights.eta.width}}}};
  {
    json b;
    b["kind"] = c.bbm.kind;
    if (c.bbm.kind == "constant") b["value"] = point_json(c.bbm.value, dim);
    if (c.bbm.kind == "rotation") {
      b["omega"] = c.bbm.omega;
      b["center"] = point_json(c.bbm.center, dim);
    }
    j["bbm"] = b;
  }
  j["beam_bzk"] = {{"x0", point_json(c.beam_bzk.x0, dim)},
                   {"xi_bar", point_json(c.beam_bzk.xi_bar, dim)},
                   {"k", c.beam_bzk.k},
                   {"delta", c.beam_bzk.delta},
                   {"quad_order", c.beam_bzk.quad_order},
                   {"grid_n", std::vector<int>(c.beam_bzk.grid_n.begin(),
                                               c.beam_bzk.grid_n.begin() + dim)},
                   {"time_steps", c.beam_bzk.time_steps}};
  j["beam_bbm"] = {{"x0", point_json(c.beam_bbm.x0, dim)},
                   {"xi0", point_json(c.beam_bbm.xi0, dim)},
                   {"delta", c.beam_bbm.delta},
                   {"grid_n", std::vector<int>(c.beam_bbm.grid_n.begin(),
                                               c.beam_bbm.grid_n.begin() + dim)},
                   {"time_steps", c.beam_bbm.time_steps},
                   {"omega", to_json_region(c.beam_bbm.omega, dim)}};
  j["sweeps"] = {{"eps", c.sweeps.eps}, {"h", c.sweeps.h}, {"beta", c.sweeps.beta}};
  j["hum"] = {{"beta", c.hum.beta},
              {"cg_tol", c.hum.cg_tol},
              {"cg_max_iter", c.hum.cg_max_iter}};
  j["carleman"] = {{"suite_size", c.carleman.suite_size},
                   {"s0", c.carleman.s0},
                   {"tau0", c.carleman.tau0},
                   {"lambda0", c.carleman.lambda0},
                   {"grid_n", std::vector<int>(c.carleman.grid_n.begin(),
                                               c.carleman.grid_n.begin() + dim)},
                   {"time_steps", c.carleman.time_steps}};
  j["output_dir"] = c.output_dir;
  j["seed"] = c.seed;
  return j.dump(2) + "\n";
}

ExperimentConfig default_config() { return ExperimentConfig{}; }

std::string RunManifest::to_json_text() const {
  json j;
  j["version"] = version;
  j["config"] = json::parse(config_snapshot);
  j["families"] = families;
  j["outputs"] = outputs;
  j["seconds"] = seconds;
  j["failures"] = failures;
  return j.dump(2) + "\n";
}

}  // namespace ctrllab
