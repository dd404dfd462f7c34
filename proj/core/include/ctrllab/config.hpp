#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ctrllab/flow.hpp"
#include "ctrllab/grid.hpp"
#include "ctrllab/pde.hpp"
#include "ctrllab/weights.hpp"

namespace ctrllab {

struct ConfigError : std::runtime_error {
  std::vector<std::string> issues;
  explicit ConfigError(std::vector<std::string> list);
};

struct GridConfig {
  int dim = 1;
  std::array<std::array<double, 2>, 2> bounds{{{0.0, 1.0}, {0.0, 1.0}}};
  std::array<int, 2> n{200, 3};
  SpatialGrid make() const;
};

struct TimeConfig {
  double horizon = 1.0;
  int steps = 400;
  TimeGrid make() const { return TimeGrid{horizon, steps}; }
};

struct FlowConfig {
  std::string kind = "translation";  // zero | translation | rotation
  Point velocity{0.98, 0.0};
  double omega = 0.0;
  Point center{0.5, 0.5};
  double dt_flow = 1e-3;
  FlowMap make() const;
};

struct RegionSpecConfig {
  std::string kind = "box";  // box | ball
  Point lo{-0.14, 0.0}, hi{0.16, 0.0};
  Point center{0.0, 0.0};
  double radius = 0.0;
  RegionSpec make() const;
};

struct RegionConfig {
  RegionSpecConfig omega0;
  std::array<double, 4> margins{0.025, 0.05, 0.075, 0.1};  // omega1..3, omega
  double rho = 0.05;
};

struct WeightsConfig {
  double lambda = 1.2;
  double s = 2.0;
  double tau_margin = 0.12;
  EtaSweepParams eta;
};

struct BBMFieldConfig {
  std::string kind = "constant";  // zero | constant | rotation
  Point value{1.0, 0.0};
  double omega = 0.0;
  Point center{0.5, 0.5};
  BBMCoefficients make() const;
};

struct BeamBzkConfig {
  Point x0{0.7, 0.5};
  Point xi_bar{1.0, 0.0};
  int k = 1;
  double delta = 0.15;
  int quad_order = 0;
  std::array<int, 2> grid_n{400, 3};
  int time_steps = 200;
};

struct BeamBbmConfig {
  Point x0{0.6, 0.5};
  Point xi0{1.0, 0.0};
  double delta = 0.3;
  std::array<int, 2> grid_n{2000, 3};
  int time_steps = 200;
  RegionSpecConfig omega{.kind = "box", .lo = {0.05, 0.0}, .hi = {0.25, 0.0}};
};

struct SweepsConfig {
  std::vector<double> eps{0.02, 0.01, 0.005, 0.0025};
  std::vector<double> h{0.04, 0.02, 0.01, 0.005};
  std::vector<double> beta{1e-4, 1e-5, 1e-6, 1e-7, 1e-8};
};

struct HumConfig {
  double beta = 1e-8;
  double cg_tol = 1e-8;
  int cg_max_iter = 500;
};

struct CarlemanConfig {
  int suite_size = 20;
  // smallest parameters at which the suite statistic settles, found by the
  // threshold scan on the standard sweep profile
  double s0 = 2.0;
  double tau0 = 2.0;
  double lambda0 = 2.0;
  std::array<int, 2> grid_n{120, 3};
  int time_steps = 160;
};

struct ExperimentConfig {
  std::string equation = "bzk";  // bzk | bbm
  GridConfig grid;
  TimeConfig time;
  FlowConfig flow;
  RegionConfig region;
  RegionSpecConfig fixed_region{.kind = "box", .lo = {0.3, 0.0}, .hi = {0.5, 0.0}};
  WeightsConfig weights;
  BBMFieldConfig bbm;
  BeamBzkConfig beam_bzk;
  BeamBbmConfig beam_bbm;
  SweepsConfig sweeps;
  HumConfig hum;
  CarlemanConfig carleman;
  std::string output_dir = "out";
  std::uint64_t seed = 20240801;

  // all validation issues, empty when the config is usable
  std::vector<std::string> validate() const;
  EquationKind equation_kind() const;
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& file);
std::string serialize_config(const ExperimentConfig& cfg);
ExperimentConfig default_config();

struct RunManifest {
  std::string version;
  std::string config_snapshot;  // canonical JSON
  std::vector<std::string> families;
  std::map<std::string, std::vector<std::string>> outputs;
  std::map<std::string, double> seconds;
  std::map<std::string, std::string> failures;
  std::string to_json_text() const;
};

}  // namespace ctrllab
