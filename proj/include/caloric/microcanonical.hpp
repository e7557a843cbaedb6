#pragma once

#include <cstddef>
#include <vector>

#include "caloric/density.hpp"

namespace caloric {

// One usable grid node of the caloric curve beta_mic(E).
struct CurveSample {
  double E = 0.0;
  double beta = 0.0;
};

// Maximal run of samples on which beta_mic(E) is monotonic. Samples with
// indices in [first, last] belong to the branch; decreasing beta means
// positive microcanonical heat capacity.
struct CaloricBranch {
  std::size_t first = 0;
  std::size_t last = 0;
  bool decreasing = true;
  double beta_lo = 0.0;
  double beta_hi = 0.0;
  double E_lo = 0.0;
  double E_hi = 0.0;
};

struct CaloricCurve {
  std::vector<CurveSample> samples;
  std::vector<CaloricBranch> branches;
  std::vector<double> turning_points;  // energies of local extrema of the curve
  bool microcanonical_defined = false;
  double grid_step = 0.0;
};

struct CaloricRoot {
  double E = 0.0;
  std::size_t branch = 0;
  bool decreasing = true;
};

struct MicroCapacity {
  double E = 0.0;
  double C = 0.0;  // signed infinity when divergent, NaN when near_singular
  std::size_t branch = 0;
  bool decreasing = true;
  bool divergent = false;      // |d2 ln rho| below 1e-8 at the root
  bool near_singular = false;  // root fell inside a singular exclusion window
};

struct DistributionExtremum {
  double E = 0.0;
  bool maximum = true;
};

// Thermal energy distribution w ~ rho exp(-beta E), stored max-normalized
// (peak value 1). The true probability density is values * normalization.
struct ThermalDistribution {
  double beta = 0.0;
  std::vector<double> energies;
  std::vector<double> values;
  double normalization = 0.0;
  std::vector<DistributionExtremum> extrema;
  double mode = 0.0;  // energy of the global maximum
};

// d ln rho / dE. Throws NearSingularError inside exclusion windows and
// domain_error when the microcanonical regime is undefined (rho
// non-increasing everywhere past E with a negative slope at E).
double beta_mic(const LevelDensity& density, double E);

// Requires a continuous density (f >= 2).
CaloricCurve build_caloric_curve(const LevelDensity& density);

// All roots of beta_mic(E) = beta, one per branch at most, bisected on the
// piecewise-linear interpolant to step/64.
std::vector<CaloricRoot> solve_caloric(const CaloricCurve& curve, double beta);

// -beta^2 / (d2 ln rho) at every caloric root.
std::vector<MicroCapacity> heat_capacity_micro(const LevelDensity& density,
                                               double beta);

ThermalDistribution thermal_distribution(const LevelDensity& density,
                                         double beta);

// n-th finite-difference derivative of the single-branch C_mic(beta),
// relative step 1e-2. Refuses (domain_error) when any stencil point falls
// in a multivalued window or hits a divergent/near-singular root.
double micro_capacity_derivative(const LevelDensity& density, int n,
                                 double beta);

}  // namespace caloric
