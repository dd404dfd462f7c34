#include <cmath>
#include <numbers>
#include <random>

#include "ctrllab/grid.hpp"
#include "doctest.h"

using namespace ctrllab;
namespace {
constexpr double kPi = std::numbers::pi;

std::vector<double> random_field(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

// dense (I - lap) matrix assembled from the stencil, for the solve oracle
std::vector<std::vector<double>> dense_helmholtz(const SpatialGrid& g) {
  const int n = g.total();
  std::vector<std::vector<double>> A(n, std::vector<double>(n, 0.0));
  const double ix2 = 1.0 / (g.dx[0] * g.dx[0]);
  const double iy2 = g.dim == 2 ? 1.0 / (g.dx[1] * g.dx[1]) : 0.0;
  for (int idx = 0; idx < n; ++idx) {
    int i = idx % g.n[0], j = idx / g.n[0];
    A[idx][idx] = 1.0 + 2.0 * ix2 + (g.dim == 2 ? 2.0 * iy2 : 0.0);
    if (i > 0) A[idx][idx - 1] = -ix2;
    if (i + 1 < g.n[0]) A[idx][idx + 1] = -ix2;
    if (g.dim == 2 && j > 0) A[idx][idx - g.n[0]] = -iy2;
    if (g.dim == 2 && j + 1 < g.n[1]) A[idx][idx + g.n[0]] = -iy2;
  }
  return A;
}

std::vector<double> dense_solve(std::vector<std::vector<double>> A,
                                std::vector<double> b) {
  const int n = static_cast<int>(b.size());
  for (int k = 0; k < n; ++k) {
    int piv = k;
    for (int r = k + 1; r < n; ++r)
      if (std::abs(A[r][k]) > std::abs(A[piv][k])) piv = r;
    std::swap(A[k], A[piv]);
    std::swap(b[k], b[piv]);
    for (int r = k + 1; r < n; ++r) {
      double f = A[r][k] / A[k][k];
      for (int c = k; c < n; ++c) A[r][c] -= f * A[k][c];
      b[r] -= f * b[k];
    }
  }
  std::vector<double> x(n);
  for (int k = n - 1; k >= 0; --k) {
    double s = b[k];
    for (int c = k + 1; c < n; ++c) s -= A[k][c] * x[c];
    x[k] = s / A[k][k];
  }
  return x;
}
}  // namespace

TEST_SUITE_BEGIN("grid");

TEST_CASE("grid geometry invariants") {
  SpatialGrid g = SpatialGrid::line(0.0, 1.0, 9);
  CHECK(g.dx[0] == doctest::Approx(0.1));
  CHECK(g.node(0)[0] == doctest::Approx(0.1));
  CHECK(g.node(8)[0] == doctest::Approx(0.9));
  CHECK_THROWS(SpatialGrid::line(0.0, 1.0, 2));
  CHECK_THROWS(SpatialGrid::line(1.0, 0.0, 9));

  SpatialGrid b = SpatialGrid::box(0.0, 1.0, 4, -1.0, 1.0, 5);
  CHECK(b.total() == 20);
  CHECK(b.node(0, 0)[1] == doctest::Approx(-1.0 + 2.0 / 6.0));
}

TEST_CASE("laplacian of zero is zero") {
  SpatialGrid g = SpatialGrid::line(0.0, 1.0, 16);
  ScalarField<double> f(g);
  auto out = apply_laplacian(f);
  for (double v : out.v) CHECK(v == 0.0);
}

TEST_CASE("laplacian of the first eigenmode") {
  SpatialGrid g = SpatialGrid::line(0.0, kPi, 200);
  auto f = ScalarField<double>::sample(
      g, [](const Point& p) { return std::sin(p[0]); });
  auto out = apply_laplacian(f);
  for (int i = 0; i < g.total(); ++i)
    CHECK(out.v[i] == doctest::Approx(-f.v[i]).epsilon(2e-4));
}

TEST_CASE("laplacian matches dense stencil matrix on random data") {
  for (int dim = 1; dim <= 2; ++dim) {
    SpatialGrid g = dim == 1 ? SpatialGrid::line(0.0, 1.0, 8)
                             : SpatialGrid::box(0.0, 1.0, 4, 0.0, 2.0, 4);
    auto A = dense_helmholtz(g);
    ScalarField<double> f(g);
    f.v = random_field(g.total(), 42 + dim);
    auto lap = apply_laplacian(f);
    for (int r = 0; r < g.total(); ++r) {
      double expect = 0.0;  // (I - lap) f - f = -lap f
      for (int c = 0; c < g.total(); ++c) expect += A[r][c] * f.v[c];
      expect -= f.v[r];
      CHECK(lap.v[r] == doctest::Approx(-expect).epsilon(1e-12));
    }
  }
}

TEST_CASE("laplacian is symmetric negative definite") {
  SpatialGrid g = SpatialGrid::box(0.0, 1.0, 5, 0.0, 1.0, 6);
  ScalarField<double> f(g), h(g);
  f.v = random_field(g.total(), 1);
  h.v = random_field(g.total(), 2);
  auto lf = apply_laplacian(f);
  auto lh = apply_laplacian(h);
  CHECK(inner(g, lf.v, h.v) == doctest::Approx(inner(g, f.v, lh.v)).epsilon(1e-12));
  CHECK(inner(g, lf.v, f.v) < 0.0);
}

TEST_CASE("helmholtz solve: zero data gives zero") {
  SpatialGrid g = SpatialGrid::line(0.0, 1.0, 12);
  ScalarField<double> rhs(g);
  auto u = helmholtz_solve<double>(g, rhs);
  for (double v : u.v) CHECK(v == 0.0);
}

TEST_CASE("helmholtz solve: eigenmode right-hand side") {
  SpatialGrid g = SpatialGrid::line(0.0, kPi, 300);
  auto rhs = ScalarField<double>::sample(
      g, [](const Point& p) { return 2.0 * std::sin(p[0]); });
  auto u = helmholtz_solve<double>(g, rhs);
  for (int i = 0; i < g.total(); ++i)
    CHECK(u.v[i] == doctest::Approx(std::sin(g.node_flat(i)[0])).epsilon(2e-4));
}

TEST_CASE("helmholtz solve matches the dense oracle") {
  for (int dim = 1; dim <= 2; ++dim) {
    SpatialGrid g = dim == 1 ? SpatialGrid::line(0.0, 1.0, 16)
                             : SpatialGrid::box(0.0, 1.0, 5, 0.0, 1.0, 5);
    ScalarField<double> rhs(g);
    rhs.v = random_field(g.total(), 99 + dim);
    auto u = helmholtz_solve<double>(g, rhs);
    auto exact = dense_solve(dense_helmholtz(g), rhs.v);
    for (int i = 0; i < g.total(); ++i)
      CHECK(u.v[i] == doctest::Approx(exact[i]).epsilon(1e-9));
  }
}

TEST_CASE("helmholtz round trip is the identity") {
  SpatialGrid g = SpatialGrid::box(0.0, 1.0, 6, 0.0, 1.0, 7);
  ShiftedHelmholtz op(g, 1.0, 0.0);
  std::vector<double> f = random_field(g.total(), 5);
  std::vector<double> af(f.size()), rf(f.size());
  op.apply<double>(f, af);
  op.solve<double>(af, rf);
  for (std::size_t i = 0; i < f.size(); ++i)
    CHECK(rf[i] == doctest::Approx(f[i]).epsilon(1e-9));
}

TEST_CASE("helmholtz with boundary data") {
  // (I - u'') u = 0 with u(0)=1, u(1)=0 has solution sinh(1-x)/sinh(1)
  SpatialGrid g = SpatialGrid::line(0.0, 1.0, 400);
  ScalarField<double> rhs(g);
  auto u = helmholtz_solve<double>(g, rhs, [](const Point& p) {
    return p[0] < 0.5 ? 1.0 : 0.0;
  });
  for (int i = 0; i < g.total(); i += 37) {
    double x = g.node_flat(i)[0];
    CHECK(u.v[i] ==
          doctest::Approx(std::sinh(1.0 - x) / std::sinh(1.0)).epsilon(1e-4));
  }
}

TEST_CASE("quadrature basics") {
  SpatialGrid g = SpatialGrid::line(0.0, 1.0, 64);
  auto one = ScalarField<double>::sample(g, [](const Point&) { return 1.0; });
  CHECK(integrate<double>(one) == doctest::Approx(1.0).epsilon(2.0 / 65));
  ScalarField<double> zero(g);
  CHECK(integrate<double>(zero) == 0.0);

  SpatialGrid gp = SpatialGrid::line(0.0, kPi, 128);
  auto s = ScalarField<double>::sample(
      gp, [](const Point& p) { return std::sin(p[0]); });
  CHECK(integrate<double>(s) == doctest::Approx(kPi / 2.0).epsilon(1e-3));
}

TEST_CASE("quadrature converges at order two") {
  // smooth non-eigenmode integrand with a known closed form
  auto value = [](int n) {
    SpatialGrid g = SpatialGrid::line(0.0, 1.0, n);
    auto f = ScalarField<double>::sample(
        g, [](const Point& p) { return std::exp(p[0]) * (1.0 - p[0]) * p[0]; });
    return integrate<double>(f);
  };
  // closed form of \int_0^1 e^{2x} x^2 (1-x)^2 dx
  const double exact = (std::exp(2.0) - 7.0) / 4.0;
  std::vector<double> hs, errs;
  for (int n : {32, 64, 128, 256}) {
    hs.push_back(1.0 / (n + 1));
    errs.push_back(std::abs(value(n) - exact));
  }
  CHECK(loglog_slope(hs, errs) >= 1.8);
}

TEST_CASE("space-time quadrature with weight and mask") {
  SpatialGrid g = SpatialGrid::line(0.0, 1.0, 20);
  TimeGrid tg{1.0, 10};
  auto f = SpaceTimeField<double>::sample(
      g, tg, [](const Point&, double) { return 1.0; });
  double full = integrate<double>(f);
  CHECK(full == doctest::Approx(20.0 / 21.0).epsilon(1e-12));

  std::vector<std::vector<std::uint8_t>> mask(
      tg.steps + 1, std::vector<std::uint8_t>(g.total(), 0));
  for (int m = 0; m <= tg.steps; ++m)
    for (int i = 0; i < g.total() / 2; ++i) mask[m][i] = 1;
  double half = integrate<double>(f, nullptr, &mask);
  CHECK(half == doctest::Approx(10.0 / 21.0).epsilon(1e-12));

  SpatialGrid g2 = SpatialGrid::line(0.0, 1.0, 7);
  SpaceTimeField<double> w(g2, tg);
  CHECK_THROWS_AS(integrate<double>(f, &w, nullptr), std::invalid_argument);
}

TEST_SUITE_END();
