#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ctrllab {

using cplx = std::complex<double>;

struct SolverDiverged : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Symmetric tridiagonal system d[i]*x[i] + e[i]*(x[i-1]+x[i+1]) = b[i],
// constant off-diagonal e. Factorization is real; substitution works for
// real or complex right-hand sides.
class TridiagSPD {
public:
  TridiagSPD() = default;
  TridiagSPD(std::span<const double> diag, double off);

  template <class T>
  void solve(std::span<const T> rhs, std::span<T> x) const {
    const std::size_t n = piv_.size();
    x[0] = rhs[0] / piv_[0];
    for (std::size_t i = 1; i < n; ++i)
      x[i] = (rhs[i] - off_ * x[i - 1]) / piv_[i];
    for (std::size_t i = n - 1; i-- > 0;)
      x[i] -= ratio_[i] * x[i + 1];
  }

private:
  std::vector<double> piv_;    // pivots after elimination
  std::vector<double> ratio_;  // off / pivot, for back substitution
  double off_ = 0.0;
};

// Conjugate gradient for an SPD operator given as a callback, with Jacobi
// preconditioning. Works for real fields and complex fields over a real
// operator (Hermitian inner product).
template <class T, class Apply>
int conjugate_gradient(const Apply& apply_op, std::span<const double> inv_diag,
                       std::span<const T> rhs, std::span<T> x, double rel_tol,
                       int max_iter) {
  const std::size_t n = rhs.size();
  std::vector<T> r(rhs.begin(), rhs.end());
  std::vector<T> z(n), p(n), ap(n);
  std::fill(x.begin(), x.end(), T{});

  auto dot = [n](std::span<const T> a, std::span<const T> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if constexpr (std::is_same_v<T, cplx>)
        s += std::real(std::conj(a[i]) * b[i]);
      else
        s += a[i] * b[i];
    }
    return s;
  };

  double rhs_norm = std::sqrt(dot(rhs, rhs));
  if (rhs_norm == 0.0) return 0;

  for (std::size_t i = 0; i < n; ++i) z[i] = r[i] * inv_diag[i];
  std::copy(z.begin(), z.end(), p.begin());
  double rz = dot(r, z);

  for (int it = 0; it < max_iter; ++it) {
    apply_op(std::span<const T>(p), std::span<T>(ap));
    double pap = dot(p, ap);
    double alpha = rz / pap;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    double rnorm = std::sqrt(dot(r, r));
    if (rnorm <= rel_tol * rhs_norm) return it + 1;
    for (std::size_t i = 0; i < n; ++i) z[i] = r[i] * inv_diag[i];
    double rz_new = dot(r, z);
    double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  throw SolverDiverged("conjugate gradient stalled above tolerance");
}

// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre {
  std::vector<double> node, weight;
  explicit GaussLegendre(int order);
};

// Least-squares slope of log(y) against log(x). Requires y > 0.
double loglog_slope(std::span<const double> x, std::span<const double> y);

// Quintic smoothstep: 0 for u <= 0, 1 for u >= 1, C^2 joins.
inline double smoothstep(double u) {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  return u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}

// Quintic Hermite bridge: value/first/second derivative prescribed at both
// ends of [a, b], evaluated at t.
double quintic_hermite(double t, double a, double b, double fa, double dfa,
                       double d2fa, double fb, double dfb, double d2fb);

}  // namespace ctrllab
