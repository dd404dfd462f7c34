#include "ctrllab/numerics.hpp"

#include <algorithm>
#include <numbers>

namespace ctrllab {

TridiagSPD::TridiagSPD(std::span<const double> diag, double off) : off_(off) {
  const std::size_t n = diag.size();
  piv_.resize(n);
  ratio_.assign(n, 0.0);
  piv_[0] = diag[0];
  for (std::size_t i = 1; i < n; ++i)
    piv_[i] = diag[i] - off_ * (off_ / piv_[i - 1]);
  for (std::size_t i = 0; i + 1 < n; ++i) ratio_[i] = off_ / piv_[i];
}

GaussLegendre::GaussLegendre(int order) {
  node.resize(order);
  weight.resize(order);
  const int m = (order + 1) / 2;
  for (int i = 0; i < m; ++i) {
    // Chebyshev initial guess, Newton refinement on P_n
    double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double p0 = 0.0, p1 = 0.0;
    for (int it = 0; it < 100; ++it) {
      p0 = 1.0;
      p1 = 0.0;
      for (int j = 0; j < order; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      double dp = order * (x * p0 - p1) / (x * x - 1.0);
      double dx = p0 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    p0 = 1.0;
    p1 = 0.0;
    for (int j = 0; j < order; ++j) {
      double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
    }
    double dp = order * (x * p0 - p1) / (x * x - 1.0);
    node[i] = -x;
    node[order - 1 - i] = x;
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    weight[i] = w;
    weight[order - 1 - i] = w;
  }
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double lx = std::log(x[i]);
    double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double quintic_hermite(double t, double a, double b, double fa, double dfa,
                       double d2fa, double fb, double dfb, double d2fb) {
  const double h = b - a;
  const double u = (t - a) / h;
  // scale derivatives to the unit interval
  const double d1a = dfa * h, d2a = d2fa * h * h;
  const double d1b = dfb * h, d2b = d2fb * h * h;
  const double u2 = u * u, u3 = u2 * u, u4 = u3 * u, u5 = u4 * u;
  const double H0 = 1 - 10 * u3 + 15 * u4 - 6 * u5;
  const double H1 = u - 6 * u3 + 8 * u4 - 3 * u5;
  const double H2 = 0.5 * u2 - 1.5 * u3 + 1.5 * u4 - 0.5 * u5;
  const double H3 = 0.5 * u3 - u4 + 0.5 * u5;
  const double H4 = -4 * u3 + 7 * u4 - 3 * u5;
  const double H5 = 10 * u3 - 15 * u4 + 6 * u5;
  return fa * H0 + d1a * H1 + d2a * H2 + d2b * H3 + d1b * H4 + fb * H5;
}

}  // namespace ctrllab
