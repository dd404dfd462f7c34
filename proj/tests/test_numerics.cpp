#include <cmath>
#include <random>

#include "ctrllab/numerics.hpp"
#include "doctest.h"

using namespace ctrllab;

TEST_SUITE_BEGIN("numerics");

TEST_CASE("tridiagonal solve matches dense elimination") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  const int n = 12;
  std::vector<double> diag(n);
  for (auto& d : diag) d = 3.0 + u(rng);
  const double off = -1.0;
  TridiagSPD tri(diag, off);

  std::vector<double> b(n), x(n);
  for (auto& v : b) v = u(rng) - 1.2;
  tri.solve<double>(b, x);

  // residual check against the defining stencil
  for (int i = 0; i < n; ++i) {
    double r = diag[i] * x[i] - b[i];
    if (i > 0) r += off * x[i - 1];
    if (i + 1 < n) r += off * x[i + 1];
    CHECK(std::abs(r) < 1e-12);
  }
}

TEST_CASE("gauss-legendre integrates polynomials exactly") {
  GaussLegendre gl(8);
  double s3 = 0.0, s14 = 0.0, total = 0.0;
  for (std::size_t i = 0; i < gl.node.size(); ++i) {
    total += gl.weight[i];
    s3 += gl.weight[i] * std::pow(gl.node[i], 3);
    s14 += gl.weight[i] * std::pow(gl.node[i], 14);
  }
  CHECK(total == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(std::abs(s3) < 1e-15);
  CHECK(s14 == doctest::Approx(2.0 / 15.0).epsilon(1e-13));
}

TEST_CASE("gauss-legendre handles oscillatory integrands") {
  // \int_{-1}^{1} cos(20 x) dx = 2 sin(20)/20
  GaussLegendre gl(48);
  double s = 0.0;
  for (std::size_t i = 0; i < gl.node.size(); ++i)
    s += gl.weight[i] * std::cos(20.0 * gl.node[i]);
  CHECK(s == doctest::Approx(2.0 * std::sin(20.0) / 20.0).epsilon(1e-12));
}

TEST_CASE("conjugate gradient reports stagnation") {
  const int n = 6;
  std::vector<double> inv_diag(n, 1.0);
  std::vector<double> rhs(n, 1.0), x(n);
  auto apply = [](std::span<const double> in, std::span<double> out) {
    for (std::size_t i = 0; i < in.size(); ++i)
      out[i] = (static_cast<double>(i) + 1.0) * in[i];
  };
  CHECK_THROWS_AS(conjugate_gradient<double>(apply, inv_diag, rhs, x, 1e-14, 1),
                  SolverDiverged);
  conjugate_gradient<double>(apply, inv_diag, rhs, x, 1e-14, 50);
  for (int i = 0; i < n; ++i)
    CHECK(x[i] == doctest::Approx(1.0 / (i + 1.0)).epsilon(1e-12));
}

TEST_CASE("loglog slope recovers power laws") {
  std::vector<double> x{0.04, 0.02, 0.01, 0.005};
  std::vector<double> y;
  for (double v : x) y.push_back(3.7 * std::pow(v, 1.75));
  CHECK(loglog_slope(x, y) == doctest::Approx(1.75).epsilon(1e-12));
}

TEST_CASE("quintic hermite matches prescribed end data") {
  const double a = 0.2, b = 0.4;
  auto f = [&](double t) {
    return quintic_hermite(t, a, b, 5.0, -25.0, 250.0, 1.0, 0.0, 0.0);
  };
  CHECK(f(a) == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(f(b) == doctest::Approx(1.0).epsilon(1e-12));
  const double e = 1e-6;
  CHECK((f(a + e) - f(a)) / e == doctest::Approx(-25.0).epsilon(1e-4));
  CHECK(std::abs((f(b) - f(b - e)) / e) < 1e-4);
  // second derivative via centered differences
  CHECK((f(a + 2 * e) - 2 * f(a + e) + f(a)) / (e * e) ==
        doctest::Approx(250.0).epsilon(1e-3));
}

TEST_SUITE_END();
