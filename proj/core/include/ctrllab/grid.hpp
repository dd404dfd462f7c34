#pragma once

#include <array>
#include <cassert>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "ctrllab/numerics.hpp"

namespace ctrllab {

using Point = std::array<double, 2>;

// Uniform tensor grid of interior nodes on a box with homogeneous Dirichlet
// boundary. Node i on axis a sits at lo[a] + (i+1)*dx[a]; the boundary
// itself carries no unknowns.
struct SpatialGrid {
  int dim = 1;
  std::array<double, 2> lo{0.0, 0.0};
  std::array<double, 2> hi{1.0, 1.0};
  std::array<int, 2> n{0, 1};
  std::array<double, 2> dx{0.0, 0.0};

  static SpatialGrid line(double a, double b, int n0);
  static SpatialGrid box(double ax, double bx, int nx, double ay, double by,
                         int ny);

  int total() const { return n[0] * n[1]; }
  int index(int i, int j = 0) const { return j * n[0] + i; }
  Point node(int i, int j = 0) const {
    Point p{lo[0] + (i + 1) * dx[0], 0.0};
    if (dim == 2) p[1] = lo[1] + (j + 1) * dx[1];
    return p;
  }
  Point node_flat(int idx) const { return node(idx % n[0], idx / n[0]); }
  double cell() const { return dim == 2 ? dx[0] * dx[1] : dx[0]; }
  bool same_shape(const SpatialGrid& o) const {
    return dim == o.dim && n == o.n;
  }
};

struct TimeGrid {
  double horizon = 1.0;
  int steps = 2;  // number of intervals; steps+1 nodes
  double dt() const { return horizon / steps; }
  double node(int m) const { return m * dt(); }
};

template <class T>
struct ScalarField {
  SpatialGrid grid;
  std::vector<T> v;

  ScalarField() = default;
  explicit ScalarField(const SpatialGrid& g) : grid(g), v(g.total(), T{}) {}

  static ScalarField sample(const SpatialGrid& g,
                            const std::function<T(const Point&)>& f) {
    ScalarField out(g);
    for (int idx = 0; idx < g.total(); ++idx) out.v[idx] = f(g.node_flat(idx));
    return out;
  }
  T& operator[](int i) { return v[i]; }
  const T& operator[](int i) const { return v[i]; }
  int size() const { return static_cast<int>(v.size()); }
};

template <class T>
struct SpaceTimeField {
  SpatialGrid grid;
  TimeGrid time;
  std::vector<T> v;  // slice-major: v[m * grid.total() + idx]

  SpaceTimeField() = default;
  SpaceTimeField(const SpatialGrid& g, const TimeGrid& tg)
      : grid(g), time(tg), v(static_cast<std::size_t>(g.total()) * (tg.steps + 1), T{}) {}

  std::span<T> slice(int m) {
    return {v.data() + static_cast<std::size_t>(m) * grid.total(),
            static_cast<std::size_t>(grid.total())};
  }
  std::span<const T> slice(int m) const {
    return {v.data() + static_cast<std::size_t>(m) * grid.total(),
            static_cast<std::size_t>(grid.total())};
  }
  ScalarField<T> slice_field(int m) const {
    ScalarField<T> f(grid);
    auto s = slice(m);
    std::copy(s.begin(), s.end(), f.v.begin());
    return f;
  }
  static SpaceTimeField sample(
      const SpatialGrid& g, const TimeGrid& tg,
      const std::function<T(const Point&, double)>& f) {
    SpaceTimeField out(g, tg);
    for (int m = 0; m <= tg.steps; ++m) {
      auto s = out.slice(m);
      double t = tg.node(m);
      for (int idx = 0; idx < g.total(); ++idx) s[idx] = f(g.node_flat(idx), t);
    }
    return out;
  }
};

// ---- discrete operators (homogeneous Dirichlet outside the interior) ----

template <class T>
void laplacian_into(const SpatialGrid& g, std::span<const T> f, std::span<T> out);

template <class T>
ScalarField<T> apply_laplacian(const ScalarField<T>& f);

// centered first derivative along one axis, zero padding outside
template <class T>
void derivative_into(const SpatialGrid& g, std::span<const T> f, int axis,
                     std::span<T> out);

using BoundaryFn = std::function<double(const Point&)>;
using BoundaryFnC = std::function<cplx(const Point&)>;

// Cached solver for (c0*(I - Δ_h) - c1*I) u = rhs with Dirichlet data.
// c0=1, c1=0 is the plain Helmholtz operator. 1D uses a direct tridiagonal
// factorization, 2D a Jacobi-preconditioned CG.
class ShiftedHelmholtz {
public:
  ShiftedHelmholtz() = default;
  ShiftedHelmholtz(const SpatialGrid& g, double c0, double c1);

  // zero boundary data
  template <class T>
  void solve(std::span<const T> rhs, std::span<T> out) const;

  // (c0(I-Δ)-c1) applied to an interior field (zero outside)
  template <class T>
  void apply(std::span<const T> f, std::span<T> out) const;

  const SpatialGrid& grid() const { return grid_; }

private:
  SpatialGrid grid_;
  double c0_ = 1.0, c1_ = 0.0;
  TridiagSPD tri_;                    // 1D
  std::vector<double> inv_diag_;      // 2D Jacobi
  template <class T>
  void solve_cg(std::span<const T> rhs, std::span<T> out) const;
};

template <class T>
ScalarField<T> helmholtz_solve(
    const SpatialGrid& g, const ScalarField<T>& rhs,
    const std::function<T(const Point&)>& boundary = nullptr);

// Adds the Dirichlet-boundary stencil contribution of (I - Δ_h) to rhs, so
// inhomogeneous data reduces to a zero-boundary solve.
template <class T>
void add_boundary_to_rhs(const SpatialGrid& g,
                         const std::function<T(const Point&)>& boundary,
                         std::span<T> rhs);

// ---- quadrature ----
// integrate(...) returns the quadrature of |f|^2 * weight over the masked
// set: midpoint in space (weight dx per node), trapezoid in time.

template <class T>
double integrate(const ScalarField<T>& f, const ScalarField<double>* weight = nullptr,
                 const std::vector<std::uint8_t>* mask = nullptr);

template <class T>
double integrate(const SpaceTimeField<T>& f,
                 const SpaceTimeField<double>* weight = nullptr,
                 const std::vector<std::vector<std::uint8_t>>* mask = nullptr);

// L^2(Ω) inner product (cell-weighted); real symmetric version
double inner(const SpatialGrid& g, std::span<const double> a,
             std::span<const double> b);

double norm_l2(const SpatialGrid& g, std::span<const double> a);

}  // namespace ctrllab
