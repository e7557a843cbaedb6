#include "caloric/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "caloric/numerics.hpp"

namespace caloric {

double PotentialComponent1D::raw(double q) const {
  switch (kind) {
    case PotentialKind::Harmonic:
    case PotentialKind::QuarticFamily:
      return a * q + b * q * q + c * q * q * q * q;
    case PotentialKind::PurePower:
      return power_coeff * std::pow(std::abs(q), power_exp);
    case PotentialKind::PlateauWell:
      throw std::logic_error("PlateauWell has no pointwise q-representation");
  }
  return 0.0;
}

double PotentialComponent1D::value(double q) const { return v + raw(q); }

namespace {

// Stationary q of the polynomial family: roots of V' = a + 2 b q + 4 c q^3.
std::vector<double> stationary_q(double a, double b, double c) {
  return num::real_cubic_roots(4.0 * c, 0.0, 2.0 * b, a);
}

double polynomial_min(double a, double b, double c) {
  double best = std::numeric_limits<double>::infinity();
  for (double q : stationary_q(a, b, c)) {
    const double val = a * q + b * q * q + c * q * q * q * q;
    best = std::min(best, val);
  }
  return best;
}

}  // namespace

PotentialComponent1D build_harmonic(double b) {
  if (b <= 0.0) throw std::invalid_argument("harmonic component needs b > 0");
  PotentialComponent1D comp;
  comp.kind = PotentialKind::Harmonic;
  comp.b = b;
  comp.v = 0.0;  // minimum at q = 0 already
  return comp;
}

PotentialComponent1D build_quartic(double a, double b, double c) {
  if (c < 0.0) throw std::invalid_argument("quartic component needs c >= 0");
  if (c == 0.0) {
    if (a == 0.0 && b > 0.0) return build_harmonic(b);
    throw std::invalid_argument(
        "c = 0 requires a = 0 and b > 0 (otherwise unbounded below)");
  }
  PotentialComponent1D comp;
  comp.kind = PotentialKind::QuarticFamily;
  comp.a = a;
  comp.b = b;
  comp.c = c;
  comp.v = -polynomial_min(a, b, c);
  return comp;
}

PotentialComponent1D build_plateau(std::vector<Plateau> plateaus) {
  if (plateaus.empty())
    throw std::invalid_argument("plateau list must be non-empty");
  for (const auto& p : plateaus)
    if (!(p.length > 0.0))
      throw std::invalid_argument("plateau lengths must be > 0");
  std::sort(plateaus.begin(), plateaus.end(), [](const Plateau& x,
                                                 const Plateau& y) {
    return x.energy != y.energy ? x.energy < y.energy : x.length < y.length;
  });
  PotentialComponent1D comp;
  comp.kind = PotentialKind::PlateauWell;
  comp.plateaus = std::move(plateaus);
  comp.v = 0.0;  // plateau energies are user data, not shifted
  return comp;
}

PotentialComponent1D build_pure_power(double coeff, double exponent) {
  if (!(coeff > 0.0) || !(exponent > 0.0))
    throw std::invalid_argument("pure power needs coeff > 0 and exponent > 0");
  PotentialComponent1D comp;
  comp.kind = PotentialKind::PurePower;
  comp.power_coeff = coeff;
  comp.power_exp = exponent;
  comp.v = 0.0;
  return comp;
}

double critical_tilt(double b, double c) {
  if (!(c > 0.0)) throw std::invalid_argument("critical_tilt needs c > 0");
  return std::sqrt(8.0 * std::abs(b * b * b) / (27.0 * c));
}

WellClass classify_well(const PotentialComponent1D& comp) {
  if (comp.kind != PotentialKind::QuarticFamily &&
      comp.kind != PotentialKind::Harmonic)
    throw std::invalid_argument("classify_well applies to the quartic family");
  if (comp.c == 0.0) {
    if (comp.b > 0.0) return WellClass::Quadratic;
    throw std::invalid_argument("c = 0 with b <= 0 is not a confining well");
  }
  if (comp.b < 0.0 && std::abs(comp.a) < critical_tilt(comp.b, comp.c))
    return WellClass::DoubleWell;
  return WellClass::SingleWell;
}

std::vector<StationaryPoint1D> stationary_points_1d(
    const PotentialComponent1D& comp) {
  if (comp.kind != PotentialKind::QuarticFamily &&
      comp.kind != PotentialKind::Harmonic)
    throw std::invalid_argument(
        "stationary_points_1d applies to polynomial components");
  std::vector<StationaryPoint1D> pts;
  for (double q : stationary_q(comp.a, comp.b, comp.c)) {
    StationaryPoint1D sp;
    sp.q = q;
    sp.energy = comp.value(q);
    const double curv = 2.0 * comp.b + 12.0 * comp.c * q * q;
    // Curvature scale: |V''| relative to the component's own coefficients.
    const double scale =
        2.0 * std::abs(comp.b) + 12.0 * std::abs(comp.c) * q * q + 1e-300;
    sp.degenerate = std::abs(curv) < 1e-10 * scale;
    sp.minimum = curv > 0.0;
    pts.push_back(sp);
  }
  std::sort(pts.begin(), pts.end(),
            [](const StationaryPoint1D& x, const StationaryPoint1D& y) {
              return x.energy < y.energy;
            });
  return pts;
}

}  // namespace caloric
