#pragma once

#include "caloric/potential.hpp"

namespace caloric {

// Thermal moments of the potential part of the energy at inverse
// temperature beta, composed from per-component configuration averages.
struct ThermalMoments {
  double beta = 0.0;
  double mean = 0.0;        // <V>
  double dispersion = 0.0;  // <(V - <V>)^2>, never negative
  double third = 0.0;       // <(V - <V>)^3>
};

// Quadrature accuracy profile for the configuration integrals.
// strict: 1e-13 relative (default), fast: 1e-8 relative.
enum class ToleranceProfile { Strict, Fast };
void set_tolerance_profile(ToleranceProfile profile);
ToleranceProfile tolerance_profile();

// Raw configuration moment <V^n>, n in 1..3, of the full potential.
// Per-component moments combine through the independence of the factors;
// each 1-D integral is truncated where beta * V > 746.
double config_moment(const SeparableSystem& system, int n, double beta);

ThermalMoments potential_thermal_moments(const SeparableSystem& system,
                                         double beta);

// Full partition function (2 pi)^(-f) (2 pi / beta)^(f/2) prod_i Q_i with
// Q_i = int exp(-beta V_i) dq over the shifted potentials (min V_i = 0).
double partition_function(const SeparableSystem& system, double beta);

// Configuration factor int exp(-beta (x^4 - 2 x^2)) dx of the raw
// (unshifted) degenerate double well, evaluated through modified Bessel
// functions. A component built as quartic(0, -2, 1) stores the shifted
// potential V = x^4 - 2 x^2 + 1, so its Q equals exp(-beta) times this
// value, and the full f=1 partition function adds the kinetic factor
// (2 pi beta)^(-1/2).
double closed_form_Z_degenerate_double_well(double beta);

// f/2 + beta^2 * sum_i var(V_i).
double heat_capacity_canonical(const SeparableSystem& system, double beta);

// beta^2 d^2 lnZ / d beta^2 by Richardson-extrapolated central differences,
// relative step 1e-3. Independent cross-check of heat_capacity_canonical.
double heat_capacity_from_lnZ(const SeparableSystem& system, double beta);

// Analytic derivative of the canonical heat capacity,
// dC/dbeta = 2 beta <dE^2> - beta^2 <dE^3> with E the full energy; the
// kinetic contributions cancel, leaving 2 beta var(V) - beta^2 third(V).
double dC_dbeta(const SeparableSystem& system, double beta);

}  // namespace caloric
