#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "caloric/potential.hpp"

// Semiclassical level densities: analytic forms for power-law and plateau
// systems, per-component quadrature plus convolution for general separable
// systems, and logarithmic derivatives on the resulting energy grid.
//
// Normalization carries the full (2 pi)^(-f) phase-space prefactor with
// hbar = 1, so integral rho(E) exp(-beta E) dE reproduces the partition
// function as an absolute check.
namespace caloric {

enum class SingularKind {
  SupportEdge,    // density support starts here (power behaviour below)
  Jump,           // finite discontinuity of rho
  LogDivergence,  // rho ~ -A ln|E - E_c|
  InverseSqrt,    // rho ~ A (E - E_c)^(-1/2), right-sided
  PowerEdge,      // rho ~ A (E - E_c)^exponent, right-sided onset
  Compound,       // sum of singular energies of convolved parts
};

struct SingularPoint {
  double energy = 0.0;
  SingularKind kind = SingularKind::Compound;
  // Local exponent for PowerEdge/SupportEdge entries; unused otherwise.
  double exponent = 0.0;
};

// Level density on a uniform grid over [0, step * cells]. values[j] holds
// rho(j * step); cell_mass[j] holds the exact integral of rho over cell j,
// which is what convolution and Laplace transforms consume near integrable
// divergences. Nodes that coincide with a singular energy store the value
// half a cell to the right (documented offset; the mass stays exact).
struct LevelDensity {
  double step = 0.0;
  std::vector<double> values;     // size cells + 1
  std::vector<double> cell_mass;  // size cells
  std::vector<SingularPoint> singular_points;
  int f = 0;
  bool continuous = false;  // rho continuous on (0, grid_max)

  std::size_t cells() const { return cell_mass.size(); }
  double grid_max() const { return step * static_cast<double>(cells()); }
  double energy_at(std::size_t j) const {
    return step * static_cast<double>(j);
  }
  double value_at(double E) const;  // linear interpolation, 0 outside
};

// Power-law Hamiltonian spec: per-DoF pairs a_i |p|^J_i + b_i |q|^I_i, or the
// rotationally symmetric form a |p|^J + b |q|^I in f dimensions.
struct PowerLawPair {
  double J = 2.0, I = 2.0;  // exponents > 0
  double a = 0.5, b = 1.0;  // coefficients > 0
};

struct PowerLawSpec {
  std::vector<PowerLawPair> pairs;  // separable form when non-empty
  bool rotational = false;
  int f_rot = 0;
  PowerLawPair rot;

  int f() const { return rotational ? f_rot : static_cast<int>(pairs.size()); }
  double M() const;
};

// Exact density prefactor K with rho = K E^(M-1): the per-DoF Beta-integral
// constant for the separable form; 1 for the rotational form (microcanonical
// quantities do not depend on it).
double power_law_normalization(const PowerLawSpec& spec);

double density_power_law(const PowerLawSpec& spec, double E);

// Exact multi-plateau density for one well plus (f-1) oscillators:
//   rho(E) = sum_k L_k (E - E_k)_+^(f - 3/2) / (sqrt(2 pi) Gamma(f - 1/2)
//            prod omega_i).
// The single formula covers f = 1 (empty frequency list) as well.
double density_plateau(int f, const std::vector<Plateau>& plateaus,
                       const std::vector<double>& omegas, double E);

// One-DoF density (1/pi) integral over {V < E} of (2 (E - V))^(-1/2) dq.
// Inverse-square-root turning points are absorbed by a Chebyshev-Gauss rule
// per classically allowed interval; relative error <= 1e-9 away from the
// stationary energies. Returns 0 below the (shifted) minimum.
double density_1d_numeric(const PotentialComponent1D& comp, double E);

// Grid builders. cells is the number of grid cells G; the grid spans
// [0, E_max] with step E_max / G.
LevelDensity grid_density_1d(const PotentialComponent1D& comp, double E_max,
                             int cells);
LevelDensity grid_density_power_law(const PowerLawSpec& spec, double E_max,
                                    int cells);
LevelDensity grid_density_plateau(int f, const std::vector<Plateau>& plateaus,
                                  const std::vector<double>& omegas,
                                  double E_max, int cells);
// Exact k-oscillator stack E^(k-1) / ((k-1)! prod omega_i).
LevelDensity grid_density_oscillators(const std::vector<double>& omegas,
                                      double E_max, int cells);

// Convolution of parts sharing one grid step. Exact cell masses of the
// more singular factor are integrated against midpoint values of the other,
// which handles integrable divergences without smearing their mass.
LevelDensity convolve_pair(const LevelDensity& lhs, const LevelDensity& rhs);
LevelDensity convolve_densities(const std::vector<LevelDensity>& parts);

// Full separable-system density: harmonic components merge into one exact
// oscillator stack; every other component contributes a quadrature grid.
LevelDensity system_density(const SeparableSystem& system, double E_max,
                            int cells);

// Thrown when a derivative query falls inside the exclusion window (two grid
// cells each side) of a singular point: finite differences across a
// non-analyticity would return garbage, so the proximity is signalled.
class NearSingularError : public std::runtime_error {
 public:
  NearSingularError(double E, double singular_E);
  double singular_energy() const { return singular_energy_; }

 private:
  double singular_energy_;
};

struct DerivativeEstimate {
  double value = 0.0;
  double truncation = 0.0;  // |stencil(h) - stencil(2h)| style bound
};

// Central finite difference of order n (1..4) of ln rho at E. Throws
// NearSingularError within the exclusion window and std::invalid_argument
// off-grid or where rho <= 0.
DerivativeEstimate log_density_derivative(const LevelDensity& density,
                                          int order, double E);

// integral rho(E) e^(-beta E) dE over the grid: per-cell linear interpolant
// against the exact exponential; cells at power-type onsets use the stored
// exact mass with the local exponent so the result stays smooth in beta.
double laplace_transform(const LevelDensity& density, double beta);

// CSV: columns E,rho plus a singular-point sidecar (E_c, type, exponent).
void write_density_csv(const LevelDensity& density, std::ostream& table,
                       std::ostream& sidecar);
std::string singular_kind_name(SingularKind kind);

}  // namespace caloric
