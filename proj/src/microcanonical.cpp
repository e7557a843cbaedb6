#include "caloric/microcanonical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace caloric {

namespace {

constexpr double kDivergenceCut = 1e-8;  // |d2 ln rho| below this is "flat"

// Per-node usability map and ln rho for stencil work.
struct LogGrid {
  double h = 0.0;
  long G = 0;
  std::vector<double> lng;
  std::vector<bool> positive;
  std::vector<double> singular;

  explicit LogGrid(const LevelDensity& d) {
    h = d.step;
    G = static_cast<long>(d.cells());
    lng.resize(d.values.size());
    positive.resize(d.values.size());
    for (std::size_t j = 0; j < d.values.size(); ++j) {
      positive[j] = d.values[j] > 0.0;
      lng[j] = positive[j] ? std::log(d.values[j])
                           : -std::numeric_limits<double>::infinity();
    }
    for (const auto& s : d.singular_points) singular.push_back(s.energy);
  }

  bool node_clear(long j) const {
    if (j < 2 || j > G - 2) return false;
    const double E = h * static_cast<double>(j);
    for (double s : singular)
      if (std::abs(E - s) < 2.0 * h) return false;
    for (long k = j - 2; k <= j + 2; ++k)
      if (!positive[static_cast<std::size_t>(k)]) return false;
    return true;
  }

  double d1(long j) const {
    const auto u = static_cast<std::size_t>(j);
    return (lng[u - 2] - 8.0 * lng[u - 1] + 8.0 * lng[u + 1] - lng[u + 2]) /
           (12.0 * h);
  }

  double d2(long j) const {
    const auto u = static_cast<std::size_t>(j);
    return (-lng[u - 2] + 16.0 * lng[u - 1] - 30.0 * lng[u] +
            16.0 * lng[u + 1] - lng[u + 2]) /
           (12.0 * h * h);
  }
};

// Quadratic (or lower-order) interpolation through up to 3 nodes.
double interp_nodes(const std::vector<double>& x, const std::vector<double>& y,
                    double q) {
  const std::size_t n = x.size();
  if (n == 1) return y[0];
  if (n == 2)
    return y[0] + (y[1] - y[0]) * (q - x[0]) / (x[1] - x[0]);
  double acc = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    double term = y[i];
    for (std::size_t k = 0; k < 3; ++k)
      if (k != i) term *= (q - x[k]) / (x[i] - x[k]);
    acc += term;
  }
  return acc;
}

}  // namespace

double beta_mic(const LevelDensity& density, double E) {
  double value = log_density_derivative(density, 1, E).value;
  // Stencils live on grid nodes; off-node queries interpolate the node
  // estimates cubically so exact point values (e.g. (M-1)/E for power laws)
  // hold to O(h^4) instead of the half-cell snap error.
  const double x = E / density.step;
  const double nearest = std::round(x);
  if (std::abs(x - nearest) > 1e-9 * std::max(1.0, std::abs(x))) {
    const long j0 = static_cast<long>(std::floor(x)) - 1;
    const long top = static_cast<long>(density.cells());
    double node_d1[4];
    bool usable = j0 >= 2 && j0 + 5 <= top;
    for (int i = 0; i < 4 && usable; ++i) {
      try {
        node_d1[i] =
            log_density_derivative(density, 1, (j0 + i) * density.step).value;
      } catch (const std::exception&) {
        usable = false;
      }
    }
    if (usable) {
      const double t = x - static_cast<double>(j0);
      value = node_d1[0] * (-(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0) +
              node_d1[1] * (t * (t - 2.0) * (t - 3.0) / 2.0) +
              node_d1[2] * (-t * (t - 1.0) * (t - 3.0) / 2.0) +
              node_d1[3] * (t * (t - 1.0) * (t - 2.0) / 6.0);
    }
  }
  if (value < 0.0) {
    // Undefined regime: beta >= 0 has no solution anywhere past E, i.e. the
    // density never stops falling. Adjacent-step scan tolerates quadrature
    // jitter on flat densities, whose beta is 0, not an error.
    const auto j = static_cast<std::size_t>(std::lround(x));
    bool grows = false;
    for (std::size_t k = j; k + 1 < density.values.size(); ++k)
      if (density.values[k + 1] >= density.values[k]) {
        grows = true;
        break;
      }
    if (!grows)
      throw std::domain_error(
          "beta_mic: density is strictly decreasing past E; microcanonical "
          "temperature is undefined here (M <= 1 regime)");
  }
  return value;
}

CaloricCurve build_caloric_curve(const LevelDensity& density) {
  if (!density.continuous || density.f < 2)
    throw std::invalid_argument(
        "build_caloric_curve needs a continuous density (f >= 2)");
  const LogGrid grid(density);
  CaloricCurve curve;
  curve.grid_step = density.step;

  std::vector<bool> gap_before;  // true when grid indices are not adjacent
  long prev_j = -10;
  for (long j = 2; j <= grid.G - 2; ++j) {
    if (!grid.node_clear(j)) continue;
    curve.samples.push_back({grid.h * static_cast<double>(j), grid.d1(j)});
    gap_before.push_back(j != prev_j + 1);
    prev_j = j;
  }
  for (const auto& s : curve.samples)
    if (s.beta > 0.0) {
      curve.microcanonical_defined = true;
      break;
    }

  const std::size_t n = curve.samples.size();
  if (n == 0) return curve;
  std::size_t start = 0;
  int dir = 0;
  auto close_branch = [&](std::size_t last) {
    CaloricBranch b;
    b.first = start;
    b.last = last;
    b.decreasing = dir <= 0;
    b.beta_lo = b.beta_hi = curve.samples[start].beta;
    for (std::size_t k = start; k <= last; ++k) {
      b.beta_lo = std::min(b.beta_lo, curve.samples[k].beta);
      b.beta_hi = std::max(b.beta_hi, curve.samples[k].beta);
    }
    b.E_lo = curve.samples[start].E;
    b.E_hi = curve.samples[last].E;
    curve.branches.push_back(b);
  };
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (gap_before[k + 1]) {
      close_branch(k);
      start = k + 1;
      dir = 0;
      continue;
    }
    const double delta = curve.samples[k + 1].beta - curve.samples[k].beta;
    const int step_dir = delta < 0.0 ? -1 : (delta > 0.0 ? 1 : 0);
    if (step_dir == 0) continue;
    if (dir == 0) {
      dir = step_dir;
    } else if (step_dir != dir) {
      // Turning point: branches share the extremal sample.
      close_branch(k);
      curve.turning_points.push_back(curve.samples[k].E);
      start = k;
      dir = step_dir;
    }
  }
  close_branch(n - 1);
  return curve;
}

std::vector<CaloricRoot> solve_caloric(const CaloricCurve& curve, double beta) {
  if (!(beta > 0.0))
    throw std::invalid_argument("solve_caloric needs beta > 0");
  std::vector<CaloricRoot> roots;
  const double tol = curve.grid_step / 64.0;
  for (std::size_t bi = 0; bi < curve.branches.size(); ++bi) {
    const CaloricBranch& b = curve.branches[bi];
    if (b.last <= b.first) continue;
    if (beta < b.beta_lo || beta > b.beta_hi) continue;
    // Locate the bracketing sample pair along the monotonic branch.
    for (std::size_t k = b.first; k < b.last; ++k) {
      const CurveSample& s0 = curve.samples[k];
      const CurveSample& s1 = curve.samples[k + 1];
      const double lo = std::min(s0.beta, s1.beta);
      const double hi = std::max(s0.beta, s1.beta);
      if (beta < lo || beta > hi) continue;
      double Ea = s0.E, Eb = s1.E;
      double fa = s0.beta - beta;
      if (fa == 0.0) {
        Eb = Ea;
      } else {
        while (Eb - Ea > tol) {
          const double Em = 0.5 * (Ea + Eb);
          const double t = (Em - s0.E) / (s1.E - s0.E);
          const double fm = s0.beta + t * (s1.beta - s0.beta) - beta;
          if ((fm > 0.0) == (fa > 0.0)) {
            Ea = Em;
            fa = fm;
          } else {
            Eb = Em;
          }
        }
      }
      const double E = 0.5 * (Ea + Eb);
      bool dup = false;
      for (const auto& r : roots)
        if (std::abs(r.E - E) < curve.grid_step) dup = true;
      if (!dup) roots.push_back({E, bi, b.decreasing});
      break;  // one root per monotonic branch
    }
  }
  std::sort(roots.begin(), roots.end(),
            [](const CaloricRoot& a, const CaloricRoot& b) { return a.E < b.E; });
  return roots;
}

std::vector<MicroCapacity> heat_capacity_micro(const LevelDensity& density,
                                               double beta) {
  if (!(beta > 0.0))
    throw std::invalid_argument("heat_capacity_micro needs beta > 0");
  const CaloricCurve curve = build_caloric_curve(density);
  const std::vector<CaloricRoot> roots = solve_caloric(curve, beta);
  const LogGrid grid(density);
  std::vector<MicroCapacity> out;
  for (const auto& root : roots) {
    MicroCapacity mc;
    mc.branch = root.branch;
    mc.decreasing = root.decreasing;
    mc.E = root.E;
    // Usable stencil nodes around the root; quadratic interpolation of the
    // log-derivatives removes the node-snapping bias.
    const long j0 = std::lround(root.E / grid.h);
    std::vector<double> xs, d1s, d2s;
    for (long j = j0 - 1; j <= j0 + 1; ++j) {
      if (!grid.node_clear(j)) continue;
      xs.push_back(grid.h * static_cast<double>(j));
      d1s.push_back(grid.d1(j));
      d2s.push_back(grid.d2(j));
    }
    if (xs.empty()) {
      mc.near_singular = true;
      mc.C = std::numeric_limits<double>::quiet_NaN();
      out.push_back(mc);
      continue;
    }
    double E = root.E;
    if (xs.size() >= 2) {
      for (int it = 0; it < 4; ++it) {
        const double g = interp_nodes(xs, d1s, E) - beta;
        const double gp = interp_nodes(xs, d2s, E);
        if (gp == 0.0) break;
        double En = E - g / gp;
        En = std::clamp(En, root.E - grid.h, root.E + grid.h);
        E = En;
      }
      mc.E = E;
    }
    const double d2 = interp_nodes(xs, d2s, E);
    if (std::abs(d2) < kDivergenceCut) {
      mc.divergent = true;
      mc.C = mc.decreasing ? std::numeric_limits<double>::infinity()
                           : -std::numeric_limits<double>::infinity();
    } else {
      mc.C = -beta * beta / d2;
    }
    out.push_back(mc);
  }
  return out;
}

ThermalDistribution thermal_distribution(const LevelDensity& density,
                                         double beta) {
  if (!(beta > 0.0))
    throw std::invalid_argument("thermal_distribution needs beta > 0");
  ThermalDistribution dist;
  dist.beta = beta;
  const std::size_t n = density.values.size();
  dist.energies.resize(n);
  dist.values.resize(n);
  double peak = 0.0;
  std::size_t peak_j = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const double E = density.energy_at(j);
    dist.energies[j] = E;
    const double w = density.values[j] * std::exp(-beta * E);
    dist.values[j] = w;
    if (w > peak) {
      peak = w;
      peak_j = j;
    }
  }
  if (peak <= 0.0)
    throw std::domain_error("thermal_distribution: density vanishes");
  const double Z = laplace_transform(density, beta);
  dist.normalization = peak / Z;
  for (double& w : dist.values) w /= peak;

  // Extrema from slope sign changes, vertex-refined; flat runs carry the
  // previous slope sign.
  auto vertex = [&](std::size_t j) {
    const double wl = dist.values[j - 1], wc = dist.values[j],
                 wr = dist.values[j + 1];
    const double den = wl - 2.0 * wc + wr;
    double E = dist.energies[j];
    if (den != 0.0) {
      const double shift = 0.5 * (wl - wr) / den * density.step;
      if (std::abs(shift) <= density.step) E += shift;
    }
    return E;
  };
  int last_sign = 0;
  const double floor_w = 1e-12;
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const double delta = dist.values[j + 1] - dist.values[j];
    const int s = delta > 0.0 ? 1 : (delta < 0.0 ? -1 : 0);
    if (s == 0) continue;
    if (last_sign != 0 && s != last_sign && j > 0 &&
        dist.values[j] > floor_w) {
      DistributionExtremum ex;
      ex.maximum = last_sign > 0;
      ex.E = vertex(j);
      dist.extrema.push_back(ex);
    }
    last_sign = s;
  }
  dist.mode = dist.energies[peak_j];
  if (peak_j > 0 && peak_j + 1 < n) dist.mode = vertex(peak_j);
  return dist;
}

double micro_capacity_derivative(const LevelDensity& density, int n,
                                 double beta) {
  if (n < 1 || n > 3)
    throw std::invalid_argument(
        "micro_capacity_derivative supports n in 1..3");
  if (!(beta > 0.0))
    throw std::invalid_argument("micro_capacity_derivative needs beta > 0");
  auto C_at = [&](double b) {
    const std::vector<MicroCapacity> caps = heat_capacity_micro(density, b);
    if (caps.size() != 1)
      throw std::domain_error(
          "micro_capacity_derivative: beta falls in a multivalued or empty "
          "caloric window");
    const MicroCapacity& mc = caps.front();
    if (mc.near_singular || mc.divergent || !std::isfinite(mc.C))
      throw std::domain_error(
          "micro_capacity_derivative: capacity not finite at a stencil point");
    return mc.C;
  };
  const double h = beta * 1e-2;
  switch (n) {
    case 1:
      return (C_at(beta + h) - C_at(beta - h)) / (2.0 * h);
    case 2:
      return (C_at(beta + h) - 2.0 * C_at(beta) + C_at(beta - h)) / (h * h);
    default:
      return (C_at(beta + 2.0 * h) - 2.0 * C_at(beta + h) +
              2.0 * C_at(beta - h) - C_at(beta - 2.0 * h)) /
             (2.0 * h * h * h);
  }
}

}  // namespace caloric
