#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ctrllab/grid.hpp"

namespace ctrllab {

struct TrajectoryEscaped : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct VelocityField {
  std::function<Point(const Point&, double)> f;
  double lipschitz_bound = 0.0;
  Point bbox_lo{-1e6, -1e6};
  Point bbox_hi{1e6, 1e6};

  static VelocityField zero();
  static VelocityField constant(const Point& c);
  // rigid rotation with angular rate omega about a center
  static VelocityField rotation(double omega, const Point& center);
};

struct FlowMap {
  VelocityField vel;
  double dt_flow = 1e-3;
};

// Classical RK4 integration of dX/dt = F(X,t) from (x, t0) to t1; backward
// integration allowed.
Point integrate_flow(const FlowMap& flow, Point x, double t0, double t1);

// Reference set: a box or a ball in R^N.
struct RegionSpec {
  enum class Kind { box, ball };
  Kind kind = Kind::box;
  Point lo{0.0, 0.0}, hi{0.0, 0.0};  // box
  Point center{0.0, 0.0};            // ball
  double radius = 0.0;

  static RegionSpec box1d(double a, double b);
  static RegionSpec box2d(double ax, double bx, double ay, double by);
  static RegionSpec ball(const Point& c, double r, int dim);
  bool contains(const Point& p, int dim) const;
  RegionSpec dilate(double margin) const;
};

// Time-indexed rasterized masks of X(omega, t, 0) ∩ Ω plus the smooth
// indicator once built.
struct MovingRegion {
  SpatialGrid grid;
  TimeGrid time;
  RegionSpec reference;
  std::vector<std::vector<std::uint8_t>> mask;  // [time][node]
  double rho = 0.0;
  SpaceTimeField<double> chi;
  bool has_chi = false;

  bool inside(int m, int idx) const { return mask[m][idx] != 0; }
};

// Node x is marked inside at t_m iff X(x, 0, t_m) lands in omega (backward
// membership test).
MovingRegion rasterize_region(const FlowMap& flow, const RegionSpec& omega,
                              const SpatialGrid& g, const TimeGrid& tg);

// Same backward trajectories shared across nested reference sets.
std::vector<MovingRegion> rasterize_nested(const FlowMap& flow,
                                           const std::vector<RegionSpec>& sets,
                                           const SpatialGrid& g,
                                           const TimeGrid& tg);

// Per-slice mollified indicator: 1 at depth >= rho inside the mask, 0
// outside, C^2 polynomial ramp in between. Requires rho >= 2 max spacing.
SpaceTimeField<double> smooth_indicator(const MovingRegion& region, double rho);

MovingRegion with_indicator(MovingRegion region, double rho);

struct RegionAssumptionReport {
  bool curve_inside = false;      // the curve never leaves the section
  bool covers = false;            // union of sections reaches every node
  bool edge_connected = false;    // one complement component before t1/after t2
  bool middle_split = false;      // exactly two components on (t1, t2)
  bool no_avoiding_path = false;  // no phantom path survives to the horizon
  bool avoidance_stable = false;  // verdict agrees under time refinement
  double t1 = -1.0, t2 = -1.0;
  int uncovered_nodes = 0;
  std::vector<int> component_counts;
  std::array<int, 2> resolution{0, 0};
  int time_steps = 0;
  bool all() const {
    return curve_inside && covers && edge_connected && middle_split &&
           no_avoiding_path;
  }
  std::string summary() const;
};

RegionAssumptionReport check_assumption(const FlowMap& flow,
                                        const RegionSpec& omega0,
                                        const SpatialGrid& g,
                                        const TimeGrid& tg,
                                        const std::vector<Point>& gamma_curve);

// connected components (4-neighbour) of the complement of a mask; labels
// -1 on the mask, 0..k-1 elsewhere
int complement_components(const SpatialGrid& g,
                          const std::vector<std::uint8_t>& mask,
                          std::vector<int>& label);

}  // namespace ctrllab
