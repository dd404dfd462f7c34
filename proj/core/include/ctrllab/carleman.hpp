#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ctrllab/flow.hpp"
#include "ctrllab/grid.hpp"
#include "ctrllab/pde.hpp"
#include "ctrllab/weights.hpp"

namespace ctrllab {

// Both sides of one weighted inequality; existential constants become the
// measured ratio lhs / sum(rhs).
struct CarlemanSides {
  double lhs = 0.0;
  std::vector<std::pair<std::string, double>> rhs_terms;
  double s = 0.0, lambda = 0.0, tau = 0.0;
  double rhs_total() const;
  double ratio() const;
};

// s lambda^2 iint xi |q|^2 e^{-2 s alpha}  vs  iint |q_t|^2 e^{-2 s alpha}
// + s^2 lambda^2 local xi^2 term
CarlemanSides eval_ode_carleman(const SpaceTimeField<double>& q,
                                const WeightSet& w,
                                const MovingRegion& omega2);

// single-slice elliptic estimate with weight e^{2 tau gamma}
CarlemanSides eval_elliptic_carleman(const ScalarField<double>& z, int m,
                                     const WeightSet& w, double lambda,
                                     double tau, const MovingRegion& omega2);

// divergence-form data: solves -lap z = g + div G first
CarlemanSides eval_h1_carleman(const ScalarField<double>& g_src,
                               const std::vector<ScalarField<double>>& G,
                               int m, const WeightSet& w, double lambda,
                               double tau, const MovingRegion& omega2);

CarlemanSides eval_global_carleman(const ScalarField<double>& psi_T,
                                   const WeightSet& w,
                                   const MovingRegion& omega,
                                   EquationKind kind,
                                   const SampledAdvection* adv = nullptr);

struct DecompositionReport {
  double lhs_sq = 0.0;    // ||e^{tau gamma} lap z||^2
  double m1_sq = 0.0;
  double m2_sq = 0.0;
  double cross = 0.0;     // (M1 w, M2 w)
  double residual = 0.0;  // |lhs - (m1 + m2 - 2 cross)|
  double residual_rel = 0.0;
};

// operator-splitting identity at one time slice, discrete derivatives of
// the sampled weight
DecompositionReport splitting_identity_check(const ScalarField<double>& z,
                                            double tau, double lambda,
                                            const EtaField& eta, int m);

// energy identity for the divergence-form data at one slice:
// int |grad w|^2 - tau^2 int |grad gamma|^2 w^2
//   = int e^{tau gamma} gtilde w - int e^{tau gamma} G . grad w
struct EnergyIdentityReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual_rel = 0.0;
};
EnergyIdentityReport h1_energy_identity_check(
    const ScalarField<double>& g_src, const std::vector<ScalarField<double>>& G,
    double tau, double lambda, const EtaField& eta, int m);

struct PointwiseBoundReport {
  double worst_margin_off = 0.0;  // min over off-region nodes of lhs/(tau^3 lambda^4 gamma^3)
  double worst_margin_on = 0.0;   // 3/A - max over on-region of |lhs|/(tau^3 lambda^4 gamma^3)
  double implied_A = 0.0;
  SpaceTimeField<double> margin;  // pointwise lhs/(tau^3 lambda^4 gamma^3)
};

PointwiseBoundReport pointwise_bound_check(const EtaField& eta, double lambda,
                                       double tau, const MovingRegion& omega1);

// ---- randomized suites ----

ScalarField<double> random_smooth_field(const SpatialGrid& g, std::uint64_t seed);
SpaceTimeField<double> random_smooth_st_field(const SpatialGrid& g,
                                              const TimeGrid& tg,
                                              std::uint64_t seed);

struct SuiteSummary {
  std::vector<double> ratios_base;
  std::vector<double> ratios_doubled;
  std::vector<CarlemanSides> sides_base;     // populated when keep_sides
  std::vector<CarlemanSides> sides_doubled;
  double max_base = 0.0;
  double max_doubled = 0.0;
  bool stable(double slack = 1.1) const { return max_doubled <= slack * max_base; }
};

enum class CarlemanFamily { ode, elliptic, h1, global_bzk, global_bbm };

// Runs `count` random samples of one inequality at the configured parameter
// and at its double, recording the ratio stability statistic.
SuiteSummary carleman_suite(CarlemanFamily family, const EtaField& eta,
                            double tau_margin, double lambda, double s_or_tau,
                            const MovingRegion& omega2, int count,
                            std::uint64_t seed,
                            const SampledAdvection* adv = nullptr,
                            bool keep_sides = false);

}  // namespace ctrllab
