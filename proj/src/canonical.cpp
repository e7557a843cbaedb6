#include "caloric/canonical.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>

#include "caloric/numerics.hpp"

namespace caloric {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kExpCut = 746.0;  // exp(-x) underflows just past here

std::atomic<int> g_profile{0};  // 0 strict, 1 fast

double quad_tol() { return g_profile.load() == 0 ? 1e-13 : 1e-8; }

struct RawMoments {
  double m1 = 0.0, m2 = 0.0, m3 = 0.0;  // <V>, <V^2>, <V^3>
};

void require_beta(double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be > 0");
}

void require_confining(const PotentialComponent1D& comp) {
  switch (comp.kind) {
    case PotentialKind::Harmonic:
      if (!(comp.b > 0.0))
        throw std::invalid_argument("harmonic component needs b > 0");
      return;
    case PotentialKind::QuarticFamily:
      if (!(comp.c > 0.0))
        throw std::invalid_argument("quartic component needs c > 0");
      return;
    case PotentialKind::PurePower:
      if (!(comp.power_coeff > 0.0 && comp.power_exp > 0.0))
        throw std::invalid_argument("power component needs positive b, I");
      return;
    case PotentialKind::PlateauWell:
      return;
  }
}

// Integration bounds for the quartic family: outward from the stationary
// points until beta * V exceeds the underflow cut.
std::pair<double, double> quartic_bounds(const PotentialComponent1D& comp,
                                         double beta) {
  const double v_max = (kExpCut + 40.0) / beta;
  std::vector<double> stat =
      num::real_cubic_roots(4.0 * comp.c, 0.0, 2.0 * comp.b, comp.a);
  double lo = stat.empty() ? -1.0 : stat.front() - 1.0;
  while (comp.value(lo) < v_max) lo = lo * 2.0 - 1.0;
  double hi = stat.empty() ? 1.0 : stat.back() + 1.0;
  while (comp.value(hi) < v_max) hi = hi * 2.0 + 1.0;
  return {lo, hi};
}

// int V^n exp(-beta V) dq for the quartic family, split at the stationary
// points so each panel holds a single peak.
double quartic_integral(const PotentialComponent1D& comp, int n, double beta) {
  auto [lo, hi] = quartic_bounds(comp, beta);
  std::vector<double> cuts{lo};
  for (double q :
       num::real_cubic_roots(4.0 * comp.c, 0.0, 2.0 * comp.b, comp.a))
    if (q > lo && q < hi) cuts.push_back(q);
  cuts.push_back(hi);
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    auto f = [&](double q) {
      const double V = comp.value(q);
      const double bv = beta * V;
      if (bv > kExpCut) return 0.0;
      double w = std::exp(-bv);
      for (int i = 0; i < n; ++i) w *= V;
      return w;
    };
    total += num::integrate(f, cuts[k], cuts[k + 1], quad_tol(), 1e-300).value;
  }
  return total;
}

RawMoments component_raw_moments(const PotentialComponent1D& comp,
                                 double beta) {
  require_confining(comp);
  const double T = 1.0 / beta;
  RawMoments m;
  switch (comp.kind) {
    case PotentialKind::Harmonic: {
      // V ~ Gamma(1/2, T): <V^n> = T^n Gamma(n + 1/2) / Gamma(1/2).
      m.m1 = 0.5 * T;
      m.m2 = 0.75 * T * T;
      m.m3 = 1.875 * T * T * T;
      return m;
    }
    case PotentialKind::PurePower: {
      // V ~ Gamma(1/I, T).
      const double k = 1.0 / comp.power_exp;
      m.m1 = T * k;
      m.m2 = T * T * k * (k + 1.0);
      m.m3 = T * T * T * k * (k + 1.0) * (k + 2.0);
      return m;
    }
    case PotentialKind::PlateauWell: {
      // Discrete mixture with weights L_k exp(-beta E_k).
      double w_sum = 0.0;
      const double e0 = comp.plateaus.front().energy;
      for (const auto& p : comp.plateaus) {
        const double w = p.length * std::exp(-beta * (p.energy - e0));
        w_sum += w;
        m.m1 += w * p.energy;
        m.m2 += w * p.energy * p.energy;
        m.m3 += w * p.energy * p.energy * p.energy;
      }
      m.m1 /= w_sum;
      m.m2 /= w_sum;
      m.m3 /= w_sum;
      return m;
    }
    case PotentialKind::QuarticFamily: {
      const double q0 = quartic_integral(comp, 0, beta);
      m.m1 = quartic_integral(comp, 1, beta) / q0;
      m.m2 = quartic_integral(comp, 2, beta) / q0;
      m.m3 = quartic_integral(comp, 3, beta) / q0;
      return m;
    }
  }
  throw std::logic_error("unreachable component kind");
}

struct CentralMoments {
  double mean = 0.0, var = 0.0, third = 0.0;
};

CentralMoments central_from_raw(const RawMoments& m) {
  CentralMoments c;
  c.mean = m.m1;
  c.var = m.m2 - m.m1 * m.m1;
  c.third = m.m3 - 3.0 * m.m1 * m.m2 + 2.0 * m.m1 * m.m1 * m.m1;
  return c;
}

CentralMoments total_potential_centrals(const SeparableSystem& system,
                                        double beta) {
  if (system.f() < 1)
    throw std::invalid_argument("system needs at least one component");
  CentralMoments total;
  for (const auto& comp : system.components) {
    const CentralMoments c = central_from_raw(component_raw_moments(comp, beta));
    total.mean += c.mean;
    total.var += c.var;
    total.third += c.third;
  }
  if (total.var < 0.0) total.var = 0.0;
  return total;
}

double configuration_factor(const PotentialComponent1D& comp, double beta) {
  require_confining(comp);
  switch (comp.kind) {
    case PotentialKind::Harmonic:
      return std::sqrt(kPi / (beta * comp.b));
    case PotentialKind::PurePower:
      return 2.0 * std::tgamma(1.0 + 1.0 / comp.power_exp) *
             std::pow(beta * comp.power_coeff, -1.0 / comp.power_exp);
    case PotentialKind::PlateauWell: {
      double sum = 0.0;
      for (const auto& p : comp.plateaus)
        sum += p.length * std::exp(-beta * p.energy);
      return sum;
    }
    case PotentialKind::QuarticFamily:
      return quartic_integral(comp, 0, beta);
  }
  throw std::logic_error("unreachable component kind");
}

}  // namespace

void set_tolerance_profile(ToleranceProfile profile) {
  g_profile.store(profile == ToleranceProfile::Strict ? 0 : 1);
}

ToleranceProfile tolerance_profile() {
  return g_profile.load() == 0 ? ToleranceProfile::Strict
                               : ToleranceProfile::Fast;
}

double config_moment(const SeparableSystem& system, int n, double beta) {
  require_beta(beta);
  if (n < 1 || n > 3)
    throw std::invalid_argument("config_moment supports n in 1..3");
  const CentralMoments c = total_potential_centrals(system, beta);
  switch (n) {
    case 1:
      return c.mean;
    case 2:
      return c.var + c.mean * c.mean;
    default:
      return c.third + 3.0 * c.mean * c.var + c.mean * c.mean * c.mean;
  }
}

ThermalMoments potential_thermal_moments(const SeparableSystem& system,
                                         double beta) {
  require_beta(beta);
  const CentralMoments c = total_potential_centrals(system, beta);
  ThermalMoments out;
  out.beta = beta;
  out.mean = c.mean;
  out.dispersion = c.var;
  out.third = c.third;
  return out;
}

double partition_function(const SeparableSystem& system, double beta) {
  require_beta(beta);
  if (system.f() < 1)
    throw std::invalid_argument("system needs at least one component");
  const double fd = static_cast<double>(system.f());
  double Z = std::pow(2.0 * kPi * beta, -0.5 * fd);
  for (const auto& comp : system.components)
    Z *= configuration_factor(comp, beta);
  return Z;
}

double closed_form_Z_degenerate_double_well(double beta) {
  require_beta(beta);
  const double x = 0.5 * beta;
  return 0.5 * kPi * std::exp(x) *
         (num::bessel_i(-0.25, x) + num::bessel_i(0.25, x));
}

double heat_capacity_canonical(const SeparableSystem& system, double beta) {
  require_beta(beta);
  const CentralMoments c = total_potential_centrals(system, beta);
  return 0.5 * static_cast<double>(system.f()) + beta * beta * c.var;
}

double heat_capacity_from_lnZ(const SeparableSystem& system, double beta) {
  require_beta(beta);
  const double h = beta * 1e-3;
  auto lnZ = [&](double b) { return std::log(partition_function(system, b)); };
  const double f_0 = lnZ(beta);
  const double f_p1 = lnZ(beta + h), f_m1 = lnZ(beta - h);
  const double f_p2 = lnZ(beta + 2.0 * h), f_m2 = lnZ(beta - 2.0 * h);
  const double f_ph = lnZ(beta + 0.5 * h), f_mh = lnZ(beta - 0.5 * h);
  auto second = [](double fm2, double fm1, double fc, double fp1, double fp2,
                   double step) {
    return (-fm2 + 16.0 * fm1 - 30.0 * fc + 16.0 * fp1 - fp2) /
           (12.0 * step * step);
  };
  const double d_h = second(f_m2, f_m1, f_0, f_p1, f_p2, h);
  const double d_h2 = second(f_m1, f_mh, f_0, f_ph, f_p1, 0.5 * h);
  const double d2 = (16.0 * d_h2 - d_h) / 15.0;
  return beta * beta * d2;
}

double dC_dbeta(const SeparableSystem& system, double beta) {
  require_beta(beta);
  const CentralMoments c = total_potential_centrals(system, beta);
  // Kinetic parts of 2 beta <dE^2> and beta^2 <dE^3> cancel exactly.
  return 2.0 * beta * c.var - beta * beta * c.third;
}

}  // namespace caloric
