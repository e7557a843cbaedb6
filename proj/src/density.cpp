#include "caloric/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "caloric/format.hpp"
#include "caloric/numerics.hpp"

namespace caloric {

namespace {

constexpr double kPi = 3.14159265358979323846;

double beta_fn(double x, double y) {
  return std::exp(std::lgamma(x) + std::lgamma(y) - std::lgamma(x + y));
}

bool power_typed(SingularKind kind) {
  return kind == SingularKind::PowerEdge || kind == SingularKind::SupportEdge;
}

}  // namespace

double LevelDensity::value_at(double E) const {
  if (E < 0.0 || E > grid_max() || cells() == 0) return 0.0;
  const double x = E / step;
  auto j = static_cast<std::size_t>(x);
  if (j >= cells()) j = cells() - 1;
  const double t = x - static_cast<double>(j);
  return values[j] * (1.0 - t) + values[j + 1] * t;
}

double PowerLawSpec::M() const {
  if (rotational) {
    const double fr = static_cast<double>(f_rot);
    return fr / rot.J + fr / rot.I;
  }
  double m = 0.0;
  for (const auto& p : pairs) m += 1.0 / p.J + 1.0 / p.I;
  return m;
}

double power_law_normalization(const PowerLawSpec& spec) {
  if (spec.rotational) return 1.0;
  if (spec.pairs.empty())
    throw std::invalid_argument("power-law spec has no degrees of freedom");
  // Per DoF: rho_i = K_i E^(M_i - 1) with
  //   K_i = (2 pi)^(-1) (4 / (J I)) a^(-1/J) b^(-1/I) B(1/J, 1/I);
  // the f-DoF convolution gives K = prod(K_i Gamma(M_i)) / Gamma(M).
  double ln_K = 0.0;
  for (const auto& p : spec.pairs) {
    if (!(p.J > 0.0 && p.I > 0.0 && p.a > 0.0 && p.b > 0.0))
      throw std::invalid_argument("power-law pair needs positive J, I, a, b");
    const double Mi = 1.0 / p.J + 1.0 / p.I;
    ln_K += std::log(4.0 / (2.0 * kPi * p.J * p.I)) -
            std::log(p.a) / p.J - std::log(p.b) / p.I +
            std::lgamma(1.0 / p.J) + std::lgamma(1.0 / p.I) -
            std::lgamma(Mi) + std::lgamma(Mi);
    // lgamma(Mi) cancels: B(1/J,1/I) = G(1/J)G(1/I)/G(Mi), then * Gamma(Mi).
  }
  ln_K -= std::lgamma(spec.M());
  return std::exp(ln_K);
}

double density_power_law(const PowerLawSpec& spec, double E) {
  if (!(E > 0.0)) throw std::invalid_argument("density_power_law needs E > 0");
  const double M = spec.M();
  if (!(M > 0.0)) throw std::invalid_argument("power-law exponent M must be > 0");
  return power_law_normalization(spec) * std::pow(E, M - 1.0);
}

double density_plateau(int f, const std::vector<Plateau>& plateaus,
                       const std::vector<double>& omegas, double E) {
  if (f < 1) throw std::invalid_argument("density_plateau needs f >= 1");
  if (static_cast<int>(omegas.size()) != f - 1)
    throw std::invalid_argument("density_plateau needs f - 1 frequencies");
  if (plateaus.empty())
    throw std::invalid_argument("density_plateau needs plateaus");
  double prod_omega = 1.0;
  for (double w : omegas) prod_omega *= w;
  const double fd = static_cast<double>(f);
  const double coeff =
      1.0 / (std::sqrt(2.0 * kPi) * std::tgamma(fd - 0.5) * prod_omega);
  double sum = 0.0;
  for (const auto& p : plateaus) {
    const double x = E - p.energy;
    if (x > 0.0) sum += p.length * std::pow(x, fd - 1.5);
  }
  return coeff * sum;
}

namespace {

// ---- one-DoF quadrature density ------------------------------------------

// Real solutions of V(q) = E for a polynomial component, via bisection on the
// monotonic segments between stationary points.
std::vector<double> level_crossings(const PotentialComponent1D& comp,
                                    double E) {
  std::vector<double> stat_q =
      num::real_cubic_roots(4.0 * comp.c, 0.0, 2.0 * comp.b, comp.a);
  auto val = [&](double q) { return comp.value(q) - E; };
  std::vector<double> breaks;
  // Outer brackets where V definitely exceeds E.
  double lo = stat_q.empty() ? -1.0 : stat_q.front() - 1.0;
  while (val(lo) <= 0.0) lo = lo * 2.0 - 1.0;
  double hi = stat_q.empty() ? 1.0 : stat_q.back() + 1.0;
  while (val(hi) <= 0.0) hi = hi * 2.0 + 1.0;
  breaks.push_back(lo);
  for (double q : stat_q)
    if (q > lo && q < hi) breaks.push_back(q);
  breaks.push_back(hi);

  std::vector<double> roots;
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    double a = breaks[k], b = breaks[k + 1];
    double fa = val(a), fb = val(b);
    if (fa == 0.0) roots.push_back(a);
    if ((fa > 0.0) == (fb > 0.0)) continue;
    double root = num::bisect(val, a, b, 1e-15 * (1.0 + std::abs(b)));
    // Newton polish on the quartic.
    for (int it = 0; it < 3; ++it) {
      const double fq = val(root);
      const double dq = comp.a + 2.0 * comp.b * root +
                        4.0 * comp.c * root * root * root;
      if (dq == 0.0) break;
      root -= fq / dq;
    }
    roots.push_back(root);
  }
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end(),
                          [](double x, double y) {
                            return std::abs(x - y) <
                                   1e-13 * (1.0 + std::abs(x));
                          }),
              roots.end());
  return roots;
}

// (1/pi) integral over one allowed interval [l, r] of (2 (E - V))^(-1/2) dq
// by the Chebyshev-Gauss rule: with E - V = -c (q - l)(q - r)(q^2 + p q + s)
// the turning-point factors match the rule's weight exactly, so the sum
// converges spectrally in the remaining smooth factor.
double interval_density(const PotentialComponent1D& comp, double l, double r) {
  double pq = 0.0, sq = 0.0;
  const bool quartic = comp.c != 0.0;
  if (quartic) {
    pq = l + r;
    sq = comp.b / comp.c + (l + r) * (l + r) - l * r;
  }
  auto g = [&](double q) {
    if (!quartic) return comp.b;  // E - V = -b (q - l)(q - r)
    return comp.c * (q * q + pq * q + sq);
  };
  const double mid = 0.5 * (l + r), half = 0.5 * (r - l);
  double prev = 0.0;
  for (int n = 16; n <= (1 << 14); n *= 2) {
    double acc = 0.0;
    for (int k = 0; k < n; ++k) {
      const double angle = kPi * (2.0 * k + 1.0) / (2.0 * n);
      const double q = mid + half * std::cos(angle);
      const double gq = std::abs(g(q));
      acc += 1.0 / std::sqrt(2.0 * gq);
    }
    acc /= static_cast<double>(n);
    if (n > 16 && std::abs(acc - prev) <= 1e-12 * std::abs(acc)) return acc;
    prev = acc;
  }
  return prev;
}

double pure_power_density(const PotentialComponent1D& comp, double E) {
  // Exact Beta-integral form of (1/pi) int (2(E - b q^I))^(-1/2) dq.
  const double I = comp.power_exp;
  const double Mi = 0.5 + 1.0 / I;
  const double K = std::sqrt(2.0) / (kPi * I) * beta_fn(0.5, 1.0 / I) *
                   std::pow(comp.power_coeff, -1.0 / I);
  return K * std::pow(E, Mi - 1.0);
}

}  // namespace

double density_1d_numeric(const PotentialComponent1D& comp, double E) {
  if (E < 0.0) return 0.0;
  switch (comp.kind) {
    case PotentialKind::PlateauWell:
      return density_plateau(1, comp.plateaus, {}, E);
    case PotentialKind::PurePower:
      return E == 0.0 ? 0.0 : pure_power_density(comp, E);
    default:
      break;
  }
  if (E == 0.0) return 0.0;  // allowed set has measure zero at the minimum
  for (const auto& sp : stationary_points_1d(comp)) {
    if (!sp.minimum && std::abs(E - sp.energy) <
                           1e-13 * (1.0 + std::abs(sp.energy)))
      throw std::domain_error(
          "density_1d_numeric: E coincides with a stationary maximum "
          "(divergent); query at an offset energy");
  }
  std::vector<double> roots = level_crossings(comp, E);
  double rho = 0.0;
  for (std::size_t k = 0; k + 1 < roots.size(); ++k) {
    const double mid = 0.5 * (roots[k] + roots[k + 1]);
    if (comp.value(mid) < E) rho += interval_density(comp, roots[k], roots[k + 1]);
  }
  return rho;
}

// ---- grid builders ---------------------------------------------------------

namespace {

void check_grid_args(double E_max, int cells) {
  if (!(E_max > 0.0) || cells < 8)
    throw std::invalid_argument("grid needs E_max > 0 and cells >= 8");
}

// Offset rule: a node that coincides with a singular energy stores the value
// half a cell to the right.
double offset_if_singular(double E, double h,
                          const std::vector<double>& singular) {
  for (double s : singular)
    if (std::abs(E - s) < 1e-9 * (1.0 + std::abs(s))) return s + 0.5 * h;
  return E;
}

}  // namespace

LevelDensity grid_density_1d(const PotentialComponent1D& comp, double E_max,
                             int cells) {
  check_grid_args(E_max, cells);
  LevelDensity out;
  out.step = E_max / cells;
  out.f = 1;
  out.continuous = false;

  if (comp.kind == PotentialKind::PlateauWell)
    return grid_density_plateau(1, comp.plateaus, {}, E_max, cells);

  if (comp.kind == PotentialKind::PurePower) {
    PowerLawSpec spec;
    spec.pairs.push_back({2.0, comp.power_exp, 0.5, comp.power_coeff});
    return grid_density_power_law(spec, E_max, cells);
  }

  const double h = out.step;
  std::vector<double> sing;
  for (const auto& sp : stationary_points_1d(comp)) {
    if (sp.energy <= E_max) sing.push_back(sp.energy);
    SingularPoint s;
    s.energy = sp.energy;
    if (sp.energy == 0.0) {
      s.kind = SingularKind::SupportEdge;
      s.exponent = 0.0;  // finite one-sided limit 1/omega
    } else {
      s.kind = sp.minimum ? SingularKind::Jump : SingularKind::LogDivergence;
    }
    if (sp.energy <= E_max) out.singular_points.push_back(s);
  }

  out.values.resize(cells + 1);
  for (int j = 0; j <= cells; ++j) {
    const double E = offset_if_singular(h * j, h, sing);
    out.values[j] = E <= 0.0 ? 0.0 : density_1d_numeric(comp, E);
  }

  out.cell_mass.resize(cells);
  auto rho = [&](double E) {
    // Deep refinement can place nodes inside the coincidence guard of a
    // divergent stationary energy; nudge them off, preserving the side.
    for (double s : sing) {
      const double eps = 4e-13 * (1.0 + std::abs(s));
      if (std::abs(E - s) < eps) {
        E = E < s ? s - eps : s + eps;
        break;
      }
    }
    return E <= 0.0 ? 0.0 : density_1d_numeric(comp, E);
  };
  for (int j = 0; j < cells; ++j) {
    const double a = h * j, b = h * (j + 1);
    // Cells containing or adjacent to a singular energy get adaptive
    // treatment split at the exact location; the rest use Simpson panels.
    double nearest = std::numeric_limits<double>::infinity();
    double cut = -1.0;
    for (double s : sing) {
      const double d = std::max(a - s, s - b);
      if (d < nearest) {
        nearest = d;
        cut = s;
      }
    }
    if (nearest <= h) {
      double mass = 0.0;
      double x0 = a;
      if (cut > a && cut < b) {
        mass += num::integrate(rho, x0, cut, 1e-11, 1e-16).value;
        x0 = cut;
      }
      mass += num::integrate(rho, x0, b, 1e-11, 1e-16).value;
      out.cell_mass[j] = mass;
    } else {
      const double f0 = out.values[j], f4 = out.values[j + 1];
      const double f1 = rho(a + 0.25 * h), f2 = rho(a + 0.5 * h),
                   f3 = rho(a + 0.75 * h);
      out.cell_mass[j] = h / 12.0 * (f0 + 4.0 * f1 + 2.0 * f2 + 4.0 * f3 + f4);
    }
  }
  return out;
}

LevelDensity grid_density_power_law(const PowerLawSpec& spec, double E_max,
                                    int cells) {
  check_grid_args(E_max, cells);
  const double M = spec.M();
  const double K = power_law_normalization(spec);
  LevelDensity out;
  out.step = E_max / cells;
  out.f = spec.f();
  out.continuous = M >= 1.0;
  out.values.resize(cells + 1);
  out.cell_mass.resize(cells);
  const double h = out.step;
  for (int j = 0; j <= cells; ++j) {
    double E = h * j;
    if (j == 0) {
      if (M > 1.0) {
        out.values[0] = 0.0;
        continue;
      }
      E = 0.5 * h;  // offset rule at a divergent (or finite-K) support edge
    }
    out.values[j] = K * std::pow(E, M - 1.0);
  }
  for (int j = 0; j < cells; ++j)
    out.cell_mass[j] =
        K / M * (std::pow(h * (j + 1), M) - std::pow(h * j, M));
  out.singular_points.push_back({0.0, SingularKind::SupportEdge, M - 1.0});
  return out;
}

LevelDensity grid_density_plateau(int f, const std::vector<Plateau>& plateaus,
                                  const std::vector<double>& omegas,
                                  double E_max, int cells) {
  check_grid_args(E_max, cells);
  if (f < 1 || static_cast<int>(omegas.size()) != f - 1)
    throw std::invalid_argument("plateau grid needs f >= 1 and f - 1 omegas");
  LevelDensity out;
  out.step = E_max / cells;
  out.f = f;
  out.continuous = f >= 2;
  const double h = out.step;
  const double fd = static_cast<double>(f);
  double prod_omega = 1.0;
  for (double w : omegas) prod_omega *= w;
  const double coeff =
      1.0 / (std::sqrt(2.0 * kPi) * std::tgamma(fd - 0.5) * prod_omega);
  std::vector<double> sing;
  for (const auto& p : plateaus)
    if (p.energy <= E_max && p.energy >= 0.0) sing.push_back(p.energy);

  out.values.resize(cells + 1);
  for (int j = 0; j <= cells; ++j) {
    double E = h * j;
    if (f == 1) E = offset_if_singular(E, h, sing);
    double sum = 0.0;
    for (const auto& p : plateaus) {
      const double x = E - p.energy;
      if (x > 0.0) sum += p.length * std::pow(x, fd - 1.5);
    }
    out.values[j] = coeff * sum;
  }
  out.cell_mass.resize(cells);
  const double pw = fd - 0.5;
  for (int j = 0; j < cells; ++j) {
    double mass = 0.0;
    for (const auto& p : plateaus) {
      const double x0 = std::max(h * j - p.energy, 0.0);
      const double x1 = h * (j + 1) - p.energy;
      if (x1 > 0.0)
        mass += p.length * (std::pow(x1, pw) - std::pow(x0, pw)) / pw;
    }
    out.cell_mass[j] = coeff * mass;
  }
  for (double s : sing)
    out.singular_points.push_back({s, SingularKind::PowerEdge, fd - 1.5});
  return out;
}

LevelDensity grid_density_oscillators(const std::vector<double>& omegas,
                                      double E_max, int cells) {
  check_grid_args(E_max, cells);
  if (omegas.empty())
    throw std::invalid_argument("oscillator stack needs at least one omega");
  const int k = static_cast<int>(omegas.size());
  double prod_omega = 1.0;
  for (double w : omegas) {
    if (!(w > 0.0)) throw std::invalid_argument("omegas must be positive");
    prod_omega *= w;
  }
  LevelDensity out;
  out.step = E_max / cells;
  out.f = k;
  out.continuous = k >= 2;
  const double h = out.step;
  const double norm = 1.0 / (std::tgamma(static_cast<double>(k)) * prod_omega);
  out.values.resize(cells + 1);
  for (int j = 0; j <= cells; ++j)
    out.values[j] = norm * std::pow(h * j, k - 1);
  if (k == 1) out.values[0] = norm;  // flat density, finite at the edge
  out.cell_mass.resize(cells);
  const double kd = static_cast<double>(k);
  for (int j = 0; j < cells; ++j)
    out.cell_mass[j] =
        norm / kd * (std::pow(h * (j + 1), kd) - std::pow(h * j, kd));
  out.singular_points.push_back(
      {0.0, SingularKind::SupportEdge, static_cast<double>(k - 1)});
  return out;
}

// ---- convolution -----------------------------------------------------------

namespace {

int kind_strength(SingularKind kind) {
  switch (kind) {
    case SingularKind::InverseSqrt: return 5;
    case SingularKind::LogDivergence: return 4;
    case SingularKind::Jump: return 3;
    case SingularKind::PowerEdge: return 2;
    case SingularKind::Compound: return 1;
    case SingularKind::SupportEdge: return 0;
  }
  return 0;
}

double support_start(const LevelDensity& d) {
  double lo = 0.0;
  bool found = false;
  for (const auto& s : d.singular_points)
    if (power_typed(s.kind) && (!found || s.energy < lo)) {
      lo = s.energy;
      found = true;
    }
  return found ? lo : 0.0;
}

}  // namespace

LevelDensity convolve_pair(const LevelDensity& lhs, const LevelDensity& rhs) {
  if (lhs.cells() == 0 || rhs.cells() == 0)
    throw std::invalid_argument("convolve_pair: empty grid");
  if (std::abs(lhs.step - rhs.step) > 1e-12 * lhs.step)
    throw std::invalid_argument("convolve_pair: grid spacings differ");
  // The factor with divergent values supplies exact cell masses; the other
  // supplies midpoint values. Either order is mathematically the same.
  const bool swap = !rhs.continuous && lhs.continuous;
  const LevelDensity& A = swap ? rhs : lhs;  // mass side
  const LevelDensity& B = swap ? lhs : rhs;  // value side
  const double h = lhs.step;
  const std::size_t G = lhs.cells();

  // Midpoint values of B; near B's singular energies the cell average keeps
  // the mass of the divergence instead of sampling a meaningless midpoint.
  std::vector<double> half(G);
  for (std::size_t k = 0; k < G; ++k)
    half[k] = 0.5 * (B.values[k] + B.values[k + 1]);
  for (const auto& s : B.singular_points) {
    const auto c = static_cast<long>(std::floor(s.energy / h));
    for (long k = c - 2; k <= c + 2; ++k)
      if (k >= 0 && k < static_cast<long>(G))
        half[static_cast<std::size_t>(k)] = B.cell_mass[k] / h;
  }

  LevelDensity out;
  out.step = h;
  out.f = lhs.f + rhs.f;
  out.continuous = true;
  out.values.assign(G + 1, 0.0);
  for (std::size_t n = 1; n <= G; ++n) {
    double acc = 0.0;
    const std::size_t jmax = n - 1;
    for (std::size_t j = 0; j <= jmax; ++j)
      acc += A.cell_mass[j] * half[jmax - j];
    out.values[n] = acc;
  }
  out.cell_mass.resize(G);
  for (std::size_t j = 0; j < G; ++j)
    out.cell_mass[j] = 0.5 * h * (out.values[j] + out.values[j + 1]);

  // Singular energies of the result: sums of one singular energy per factor.
  const double a0 = support_start(A), b0 = support_start(B);
  auto add = [&](double E, SingularKind kind, double expo) {
    if (E > lhs.grid_max() + 0.5 * h) return;
    for (auto& s : out.singular_points)
      if (std::abs(s.energy - E) < 0.5 * h) {
        if (kind_strength(kind) > kind_strength(s.kind)) {
          s.kind = kind;
          s.exponent = expo;
        }
        return;
      }
    out.singular_points.push_back({E, kind, expo});
  };
  for (const auto& sa : A.singular_points)
    for (const auto& sb : B.singular_points) {
      SingularKind kind = SingularKind::Compound;
      double expo = 0.0;
      const bool a_edge = power_typed(sa.kind) && sa.energy == a0;
      const bool b_edge = power_typed(sb.kind) && sb.energy == b0;
      if (a_edge && b_edge) {
        kind = SingularKind::PowerEdge;
        expo = sa.exponent + sb.exponent + 1.0;
      } else if (b_edge && !power_typed(sa.kind)) {
        kind = sa.kind;  // carried across the partner's support onset
      } else if (a_edge && !power_typed(sb.kind)) {
        kind = sb.kind;
      }
      add(sa.energy + sb.energy, kind, expo);
    }
  std::sort(out.singular_points.begin(), out.singular_points.end(),
            [](const SingularPoint& x, const SingularPoint& y) {
              return x.energy < y.energy;
            });
  return out;
}

LevelDensity convolve_densities(const std::vector<LevelDensity>& parts) {
  if (parts.empty())
    throw std::invalid_argument("convolve_densities: no parts");
  LevelDensity acc = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i)
    acc = convolve_pair(parts[i], acc);
  return acc;
}

LevelDensity system_density(const SeparableSystem& system, double E_max,
                            int cells) {
  if (system.f() < 1)
    throw std::invalid_argument("system_density needs f >= 1");
  std::vector<double> omegas;
  std::vector<const PotentialComponent1D*> other;
  for (const auto& comp : system.components) {
    if (comp.kind == PotentialKind::Harmonic)
      omegas.push_back(std::sqrt(2.0 * comp.b));  // V = b q^2 = omega^2 q^2 / 2
    else
      other.push_back(&comp);
  }
  std::vector<LevelDensity> parts;
  // The smooth oscillator stack seeds the chain so each quadrature part
  // contributes through its exact cell masses.
  if (!omegas.empty())
    parts.push_back(grid_density_oscillators(omegas, E_max, cells));
  for (const auto* comp : other)
    parts.push_back(grid_density_1d(*comp, E_max, cells));
  if (parts.size() == 1) return parts.front();
  return convolve_densities(parts);
}

// ---- derivatives -----------------------------------------------------------

NearSingularError::NearSingularError(double E, double singular_E)
    : std::runtime_error("derivative query at E = " + format_double(E) +
                         " falls inside the exclusion window of the singular "
                         "energy " +
                         format_double(singular_E)),
      singular_energy_(singular_E) {}

namespace {

double stencil_log_deriv(const std::vector<double>& lng, std::size_t j,
                         int order, double h, std::size_t stride) {
  const double s = static_cast<double>(stride) * h;
  const double g_m2 = lng[j - 2 * stride], g_m1 = lng[j - stride],
               g_0 = lng[j], g_p1 = lng[j + stride], g_p2 = lng[j + 2 * stride];
  switch (order) {
    case 1:
      return (g_m2 - 8.0 * g_m1 + 8.0 * g_p1 - g_p2) / (12.0 * s);
    case 2:
      return (-g_m2 + 16.0 * g_m1 - 30.0 * g_0 + 16.0 * g_p1 - g_p2) /
             (12.0 * s * s);
    case 3:
      return (g_p2 - 2.0 * g_p1 + 2.0 * g_m1 - g_m2) / (2.0 * s * s * s);
    case 4:
      return (g_m2 - 4.0 * g_m1 + 6.0 * g_0 - 4.0 * g_p1 + g_p2) /
             (s * s * s * s);
    default:
      throw std::invalid_argument("log_density_derivative: order must be 1..4");
  }
}

}  // namespace

DerivativeEstimate log_density_derivative(const LevelDensity& density,
                                          int order, double E) {
  if (order < 1 || order > 4)
    throw std::invalid_argument("log_density_derivative: order must be 1..4");
  const double h = density.step;
  const auto G = static_cast<long>(density.cells());
  const long j = std::lround(E / h);
  if (j < 2 || j > G - 2)
    throw std::invalid_argument(
        "log_density_derivative: stencil leaves the grid");
  for (const auto& s : density.singular_points)
    if (std::abs(E - s.energy) < 2.0 * h)
      throw NearSingularError(E, s.energy);

  const auto ju = static_cast<std::size_t>(j);
  // ln rho over the widest stencil we may touch.
  std::vector<double> lng(density.values.size(),
                          -std::numeric_limits<double>::infinity());
  const long wide = 4;
  for (long k = std::max(0l, j - wide);
       k <= std::min(G, j + wide); ++k) {
    const double val = density.values[static_cast<std::size_t>(k)];
    if (val <= 0.0)
      throw std::domain_error(
          "log_density_derivative: rho is not positive on the stencil");
    lng[static_cast<std::size_t>(k)] = std::log(val);
  }

  DerivativeEstimate out;
  out.value = stencil_log_deriv(lng, ju, order, h, 1);
  // Truncation gauge: doubled-stride stencil when it stays on-grid and clear
  // of singular windows, else a one-node shift on the cleaner side.
  auto clean = [&](double Eq, double halfwidth) {
    if (Eq - halfwidth < 0.0 || Eq + halfwidth > density.grid_max())
      return false;
    for (const auto& s : density.singular_points)
      if (std::abs(Eq - s.energy) < halfwidth) return false;
    return true;
  };
  if (j >= 4 && j <= G - 4 && clean(E, 4.0 * h)) {
    for (long k = j - 4; k <= j + 4; ++k) {
      auto ku = static_cast<std::size_t>(k);
      if (std::isinf(lng[ku])) {
        const double val = density.values[ku];
        if (val > 0.0) lng[ku] = std::log(val);
      }
    }
    bool ok = true;
    for (long k = j - 4; k <= j + 4; k += 2)
      if (std::isinf(lng[static_cast<std::size_t>(k)])) ok = false;
    if (ok) {
      const double wide_val = stencil_log_deriv(lng, ju, order, h, 2);
      out.truncation = std::abs(out.value - wide_val);
      return out;
    }
  }
  for (long shift : {+1l, -1l}) {
    const long js = j + shift;
    if (js < 2 || js > G - 2) continue;
    if (!clean(h * static_cast<double>(js), 2.0 * h)) continue;
    bool ok = true;
    for (long k = js - 2; k <= js + 2; ++k) {
      auto ku = static_cast<std::size_t>(k);
      if (std::isinf(lng[ku])) {
        const double val = density.values[ku];
        if (val <= 0.0) {
          ok = false;
          break;
        }
        lng[ku] = std::log(val);
      }
    }
    if (!ok) continue;
    const double shifted =
        stencil_log_deriv(lng, static_cast<std::size_t>(js), order, h, 1);
    out.truncation = std::abs(out.value - shifted);
    return out;
  }
  out.truncation = std::abs(out.value) * 1e-6;  // no clean gauge available
  return out;
}

// ---- Laplace transform -----------------------------------------------------

double laplace_transform(const LevelDensity& density, double beta) {
  if (!(beta > 0.0))
    throw std::invalid_argument("laplace_transform needs beta > 0");
  const double h = density.step;
  const auto G = density.cells();
  const double t = beta * h;

  // Power-onset windows: within them a cell integrates A (E - E_c)^alpha
  // against the exact exponential, A calibrated from the stored exact mass.
  struct Window {
    double E_c, alpha;
    long first, last;
  };
  std::vector<Window> windows;
  const long span = std::max(
      2l, std::min(32l, static_cast<long>(std::ceil(2.0 / t))));
  for (const auto& s : density.singular_points) {
    if (!power_typed(s.kind)) continue;
    const auto c = static_cast<long>(std::llround(s.energy / h));
    if (std::abs(s.energy - h * static_cast<double>(c)) > 1e-9 * h) continue;
    windows.push_back({s.energy, s.exponent, c, c + span - 1});
  }
  auto window_for = [&](long j) -> const Window* {
    for (const auto& w : windows)
      if (j >= w.first && j <= w.last) return &w;
    return nullptr;
  };
  auto near_singular = [&](long j) {
    const double a = h * static_cast<double>(j);
    for (const auto& s : density.singular_points)
      if (s.energy > a - 2.5 * h && s.energy < a + 3.5 * h) return true;
    return false;
  };

  // Exact integral of x^alpha e^(-beta x) over [x0, x1], alpha > -1, as a
  // series in beta (converges fast because beta x1 <= ~2 inside windows).
  auto power_cell = [&](double alpha, double x0, double x1) {
    double sum = 0.0;
    double coef = 1.0;  // (-beta)^m / m!
    for (int m = 0; m < 80; ++m) {
      const double p = alpha + 1.0 + m;
      const double term =
          coef * (std::pow(x1, p) - (x0 > 0.0 ? std::pow(x0, p) : 0.0)) / p;
      sum += term;
      if (std::abs(term) < 1e-17 * std::abs(sum) && m > 2) break;
      coef *= -beta / (m + 1.0);
    }
    return sum;
  };

  double Z = 0.0;
  const double em = -std::expm1(-t);  // 1 - e^{-t}
  double tail;                        // 1 - (1 + t) e^{-t}
  if (t < 1e-3) {
    tail = t * t *
           (0.5 + t * (-1.0 / 3.0 + t * (0.125 + t * (-1.0 / 30.0 + t / 144.0))));
  } else {
    tail = em - t * std::exp(-t);
  }
  for (std::size_t j = 0; j < G; ++j) {
    const double a = h * static_cast<double>(j);
    if (beta * a > 746.0) break;
    const auto jl = static_cast<long>(j);
    if (const Window* w = window_for(jl)) {
      const double x0 = a - w->E_c, x1 = x0 + h;
      const double p = w->alpha + 1.0;
      const double denom = std::pow(x1, p) - (x0 > 0.0 ? std::pow(x0, p) : 0.0);
      if (denom > 0.0 && density.cell_mass[j] != 0.0) {
        const double A = density.cell_mass[j] * p / denom;
        Z += A * std::exp(-beta * w->E_c) * power_cell(w->alpha, x0, x1);
        continue;
      }
    }
    if (near_singular(jl)) {
      Z += density.cell_mass[j] * std::exp(-beta * (a + 0.5 * h));
      continue;
    }
    const double r0 = density.values[j];
    const double slope = (density.values[j + 1] - r0) / h;
    Z += std::exp(-beta * a) * (r0 * em / beta + slope * tail / (beta * beta));
  }
  return Z;
}

// ---- serialization ---------------------------------------------------------

std::string singular_kind_name(SingularKind kind) {
  switch (kind) {
    case SingularKind::SupportEdge: return "support_edge";
    case SingularKind::Jump: return "jump";
    case SingularKind::LogDivergence: return "log_divergence";
    case SingularKind::InverseSqrt: return "inverse_sqrt";
    case SingularKind::PowerEdge: return "power_edge";
    case SingularKind::Compound: return "compound";
  }
  return "unknown";
}

void write_density_csv(const LevelDensity& density, std::ostream& table,
                       std::ostream& sidecar) {
  table << "E,rho\n";
  for (std::size_t j = 0; j < density.values.size(); ++j)
    table << format_double(density.energy_at(j)) << ','
          << format_double(density.values[j]) << '\n';
  sidecar << "E_c,type,exponent\n";
  for (const auto& s : density.singular_points)
    sidecar << format_double(s.energy) << ',' << singular_kind_name(s.kind)
            << ',' << format_double(s.exponent) << '\n';
}

}  // namespace caloric
