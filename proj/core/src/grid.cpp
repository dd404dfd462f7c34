#include "ctrllab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ctrllab {

SpatialGrid SpatialGrid::line(double a, double b, int n0) {
  if (n0 < 3) throw std::invalid_argument("grid needs n >= 3");
  if (!(b > a)) throw std::invalid_argument("grid needs upper > lower");
  SpatialGrid g;
  g.dim = 1;
  g.lo = {a, 0.0};
  g.hi = {b, 1.0};
  g.n = {n0, 1};
  g.dx = {(b - a) / (n0 + 1), 0.0};
  return g;
}

SpatialGrid SpatialGrid::box(double ax, double bx, int nx, double ay,
                             double by, int ny) {
  if (nx < 3 || ny < 3) throw std::invalid_argument("grid needs n >= 3");
  if (!(bx > ax) || !(by > ay))
    throw std::invalid_argument("grid needs upper > lower");
  SpatialGrid g;
  g.dim = 2;
  g.lo = {ax, ay};
  g.hi = {bx, by};
  g.n = {nx, ny};
  g.dx = {(bx - ax) / (nx + 1), (by - ay) / (ny + 1)};
  return g;
}

template <class T>
void laplacian_into(const SpatialGrid& g, std::span<const T> f,
                    std::span<T> out) {
  const int nx = g.n[0];
  if (g.dim == 1) {
    const double ix2 = 1.0 / (g.dx[0] * g.dx[0]);
    for (int i = 0; i < nx; ++i) {
      T left = i > 0 ? f[i - 1] : T{};
      T right = i + 1 < nx ? f[i + 1] : T{};
      out[i] = (left - 2.0 * f[i] + right) * ix2;
    }
    return;
  }
  const int ny = g.n[1];
  const double ix2 = 1.0 / (g.dx[0] * g.dx[0]);
  const double iy2 = 1.0 / (g.dx[1] * g.dx[1]);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int idx = j * nx + i;
      T left = i > 0 ? f[idx - 1] : T{};
      T right = i + 1 < nx ? f[idx + 1] : T{};
      T down = j > 0 ? f[idx - nx] : T{};
      T up = j + 1 < ny ? f[idx + nx] : T{};
      out[idx] = (left - 2.0 * f[idx] + right) * ix2 +
                 (down - 2.0 * f[idx] + up) * iy2;
    }
  }
}

template <class T>
ScalarField<T> apply_laplacian(const ScalarField<T>& f) {
  ScalarField<T> out(f.grid);
  laplacian_into<T>(f.grid, f.v, out.v);
  return out;
}

template <class T>
void derivative_into(const SpatialGrid& g, std::span<const T> f, int axis,
                     std::span<T> out) {
  const int nx = g.n[0];
  if (axis == 0) {
    const double c = 1.0 / (2.0 * g.dx[0]);
    for (int j = 0; j < g.n[1]; ++j) {
      for (int i = 0; i < nx; ++i) {
        const int idx = j * nx + i;
        T left = i > 0 ? f[idx - 1] : T{};
        T right = i + 1 < nx ? f[idx + 1] : T{};
        out[idx] = (right - left) * c;
      }
    }
    return;
  }
  const int ny = g.n[1];
  const double c = 1.0 / (2.0 * g.dx[1]);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int idx = j * nx + i;
      T down = j > 0 ? f[idx - nx] : T{};
      T up = j + 1 < ny ? f[idx + nx] : T{};
      out[idx] = (up - down) * c;
    }
  }
}

ShiftedHelmholtz::ShiftedHelmholtz(const SpatialGrid& g, double c0, double c1)
    : grid_(g), c0_(c0), c1_(c1) {
  if (g.dim == 1) {
    const double ix2 = 1.0 / (g.dx[0] * g.dx[0]);
    std::vector<double> diag(g.n[0], c0 * (1.0 + 2.0 * ix2) - c1);
    tri_ = TridiagSPD(diag, -c0 * ix2);
  } else {
    const double ix2 = 1.0 / (g.dx[0] * g.dx[0]);
    const double iy2 = 1.0 / (g.dx[1] * g.dx[1]);
    inv_diag_.assign(g.total(), 1.0 / (c0 * (1.0 + 2.0 * ix2 + 2.0 * iy2) - c1));
  }
}

template <class T>
void ShiftedHelmholtz::apply(std::span<const T> f, std::span<T> out) const {
  laplacian_into<T>(grid_, f, out);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = c0_ * (f[i] - out[i]) - c1_ * f[i];
}

template <class T>
void ShiftedHelmholtz::solve_cg(std::span<const T> rhs, std::span<T> out) const {
  auto apply_op = [this](std::span<const T> in, std::span<T> o) {
    this->apply<T>(in, o);
  };
  conjugate_gradient<T>(apply_op, inv_diag_, rhs, out, 1e-13,
                        10 * static_cast<int>(rhs.size()) + 200);
}

template <class T>
void ShiftedHelmholtz::solve(std::span<const T> rhs, std::span<T> out) const {
  if (grid_.dim == 1) {
    tri_.solve<T>(rhs, out);
  } else {
    solve_cg<T>(rhs, out);
  }
}

template <class T>
void add_boundary_to_rhs(const SpatialGrid& g,
                         const std::function<T(const Point&)>& boundary,
                         std::span<T> rhs) {
  if (!boundary) return;
  const int nx = g.n[0];
  const double ix2 = 1.0 / (g.dx[0] * g.dx[0]);
  if (g.dim == 1) {
    rhs[0] += boundary(Point{g.lo[0], 0.0}) * ix2;
    rhs[nx - 1] += boundary(Point{g.hi[0], 0.0}) * ix2;
    return;
  }
  const int ny = g.n[1];
  const double iy2 = 1.0 / (g.dx[1] * g.dx[1]);
  for (int j = 0; j < ny; ++j) {
    double y = g.lo[1] + (j + 1) * g.dx[1];
    rhs[j * nx] += boundary(Point{g.lo[0], y}) * ix2;
    rhs[j * nx + nx - 1] += boundary(Point{g.hi[0], y}) * ix2;
  }
  for (int i = 0; i < nx; ++i) {
    double x = g.lo[0] + (i + 1) * g.dx[0];
    rhs[i] += boundary(Point{x, g.lo[1]}) * iy2;
    rhs[(ny - 1) * nx + i] += boundary(Point{x, g.hi[1]}) * iy2;
  }
}

template <class T>
ScalarField<T> helmholtz_solve(const SpatialGrid& g, const ScalarField<T>& rhs,
                               const std::function<T(const Point&)>& boundary) {
  ScalarField<T> out(g);
  ShiftedHelmholtz op(g, 1.0, 0.0);
  if (!boundary) {
    op.solve<T>(rhs.v, out.v);
    return out;
  }
  std::vector<T> b(rhs.v.begin(), rhs.v.end());
  add_boundary_to_rhs<T>(g, boundary, b);
  op.solve<T>(b, out.v);
  return out;
}

namespace {
template <class T>
double sq_abs(const T& x) {
  if constexpr (std::is_same_v<T, cplx>)
    return std::norm(x);
  else
    return x * x;
}
}  // namespace

template <class T>
double integrate(const ScalarField<T>& f, const ScalarField<double>* weight,
                 const std::vector<std::uint8_t>* mask) {
  if (weight && !weight->grid.same_shape(f.grid))
    throw std::invalid_argument("integrate: weight shape mismatch");
  if (mask && static_cast<int>(mask->size()) != f.grid.total())
    throw std::invalid_argument("integrate: mask shape mismatch");
  double s = 0.0;
  for (int i = 0; i < f.size(); ++i) {
    if (mask && !(*mask)[i]) continue;
    double w = weight ? weight->v[i] : 1.0;
    s += sq_abs(f.v[i]) * w;
  }
  return s * f.grid.cell();
}

template <class T>
double integrate(const SpaceTimeField<T>& f, const SpaceTimeField<double>* weight,
                 const std::vector<std::vector<std::uint8_t>>* mask) {
  if (weight && !weight->grid.same_shape(f.grid))
    throw std::invalid_argument("integrate: weight shape mismatch");
  const int M = f.time.steps;
  const double dt = f.time.dt();
  double s = 0.0;
  for (int m = 0; m <= M; ++m) {
    auto fs = f.slice(m);
    double sm = 0.0;
    for (int i = 0; i < f.grid.total(); ++i) {
      if (mask && !(*mask)[m][i]) continue;
      double w = weight ? weight->slice(m)[i] : 1.0;
      sm += sq_abs(fs[i]) * w;
    }
    double wt = (m == 0 || m == M) ? 0.5 * dt : dt;
    s += wt * sm;
  }
  return s * f.grid.cell();
}

double inner(const SpatialGrid& g, std::span<const double> a,
             std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s * g.cell();
}

double norm_l2(const SpatialGrid& g, std::span<const double> a) {
  return std::sqrt(inner(g, a, a));
}

// explicit instantiations
template void laplacian_into<double>(const SpatialGrid&, std::span<const double>, std::span<double>);
template void laplacian_into<cplx>(const SpatialGrid&, std::span<const cplx>, std::span<cplx>);
template ScalarField<double> apply_laplacian<double>(const ScalarField<double>&);
template ScalarField<cplx> apply_laplacian<cplx>(const ScalarField<cplx>&);
template void derivative_into<double>(const SpatialGrid&, std::span<const double>, int, std::span<double>);
template void derivative_into<cplx>(const SpatialGrid&, std::span<const cplx>, int, std::span<cplx>);
template void ShiftedHelmholtz::apply<double>(std::span<const double>, std::span<double>) const;
template void ShiftedHelmholtz::apply<cplx>(std::span<const cplx>, std::span<cplx>) const;
template void ShiftedHelmholtz::solve<double>(std::span<const double>, std::span<double>) const;
template void ShiftedHelmholtz::solve<cplx>(std::span<const cplx>, std::span<cplx>) const;
template void add_boundary_to_rhs<double>(const SpatialGrid&, const std::function<double(const Point&)>&, std::span<double>);
template void add_boundary_to_rhs<cplx>(const SpatialGrid&, const std::function<cplx(const Point&)>&, std::span<cplx>);
template ScalarField<double> helmholtz_solve<double>(const SpatialGrid&, const ScalarField<double>&, const std::function<double(const Point&)>&);
template ScalarField<cplx> helmholtz_solve<cplx>(const SpatialGrid&, const ScalarField<cplx>&, const std::function<cplx(const Point&)>&);
template double integrate<double>(const ScalarField<double>&, const ScalarField<double>*, const std::vector<std::uint8_t>*);
template double integrate<cplx>(const ScalarField<cplx>&, const ScalarField<double>*, const std::vector<std::uint8_t>*);
template double integrate<double>(const SpaceTimeField<double>&, const SpaceTimeField<double>*, const std::vector<std::vector<std::uint8_t>>*);
template double integrate<cplx>(const SpaceTimeField<cplx>&, const SpaceTimeField<double>*, const std::vector<std::vector<std::uint8_t>>*);

}  // namespace ctrllab
