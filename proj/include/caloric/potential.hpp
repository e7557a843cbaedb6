#pragma once

#include <vector>

// One-dimensional potential components and their assembly into separable
// systems. Kinetic energy is always sum p_i^2/2; natural units hbar = k_B = 1.
namespace caloric {

enum class PotentialKind { Harmonic, QuarticFamily, PlateauWell, PurePower };

enum class WellClass { DoubleWell, SingleWell, Quadratic };

// Flat segment of an infinite-well bottom: energy E_k over total length L_k.
// Only the multiset {(E_k, L_k)} matters thermodynamically; segment geometry
// never enters any downstream quantity.
struct Plateau {
  double energy = 0.0;
  double length = 0.0;
};

struct PotentialComponent1D {
  PotentialKind kind = PotentialKind::Harmonic;
  // QuarticFamily / Harmonic: V(q) = v + a q + b q^2 + c q^4, c >= 0.
  // Harmonic is the c = 0, a = 0, b > 0 member.
  double a = 0.0, b = 0.0, c = 0.0;
  // PlateauWell: canonically sorted by (energy, length).
  std::vector<Plateau> plateaus;
  // PurePower: V(q) = power_coeff * |q|^power_exp.
  double power_coeff = 0.0, power_exp = 0.0;
  // Shift such that min_q V = 0 for polynomial kinds; plateau energies are
  // taken as given, so v = 0 there.
  double v = 0.0;

  // Shifted potential value; PlateauWell has no pointwise q-representation
  // here (its thermodynamics is segment-based) and must not be evaluated.
  double value(double q) const;
  double raw(double q) const;  // without the shift v
};

struct SeparableSystem {
  std::vector<PotentialComponent1D> components;
  int f() const { return static_cast<int>(components.size()); }
};

// Builders compute the shift v and validate parameters.
PotentialComponent1D build_harmonic(double b);
PotentialComponent1D build_quartic(double a, double b, double c);
PotentialComponent1D build_plateau(std::vector<Plateau> plateaus);
PotentialComponent1D build_pure_power(double coeff, double exponent);

// Tilt threshold a_W = sqrt(8 |b|^3 / (27 c)): a quartic-family component
// with b < 0, c > 0 is a double well iff |a| < a_W.
double critical_tilt(double b, double c);

WellClass classify_well(const PotentialComponent1D& comp);

struct StationaryPoint1D {
  double q = 0.0;
  double energy = 0.0;   // shifted, so the global minimum sits at 0
  bool minimum = true;   // curvature sign; meaningless when degenerate
  bool degenerate = false;  // V'' = 0 at the root
};

// All real stationary points of a polynomial component, sorted by energy.
// Rejects PlateauWell (flat directions, handled analytically downstream)
// and PurePower (only the trivial minimum at q = 0).
std::vector<StationaryPoint1D> stationary_points_1d(
    const PotentialComponent1D& comp);

}  // namespace caloric
