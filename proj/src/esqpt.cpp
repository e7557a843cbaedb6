#include "caloric/esqpt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace caloric {

namespace {

// Solve a small symmetric positive system by Gaussian elimination.
void solve3(double a[3][3], double b[3], double x[3]) {
  int idx[3] = {0, 1, 2};
  for (int col = 0; col < 3; ++col) {
    int piv = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::abs(a[idx[r]][col]) > std::abs(a[idx[piv]][col])) piv = r;
    std::swap(idx[col], idx[piv]);
    const double d = a[idx[col]][col];
    if (d == 0.0) {
      x[0] = x[1] = x[2] = 0.0;
      return;
    }
    for (int r = col + 1; r < 3; ++r) {
      const double m = a[idx[r]][col] / d;
      for (int c = col; c < 3; ++c) a[idx[r]][c] -= m * a[idx[col]][c];
      b[idx[r]] -= m * b[idx[col]];
    }
  }
  for (int col = 2; col >= 0; --col) {
    double s = b[idx[col]];
    for (int c = col + 1; c < 3; ++c) s -= a[idx[col]][c] * x[c];
    x[col] = s / a[idx[col]][col];
  }
}

struct SidePoint {
  double x = 0.0;  // E - E_c
  double y = 0.0;  // finite-difference derivative of rho
};

double rms(const std::vector<double>& res) {
  double s = 0.0;
  for (double r : res) s += r * r;
  return std::sqrt(s / static_cast<double>(res.size()));
}

// Least-squares line through (x, y); returns {intercept, slope}.
std::pair<double, double> fit_line(const std::vector<SidePoint>& pts) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(pts.size());
  for (const auto& p : pts) {
    sx += p.x;
    sy += p.y;
    sxx += p.x * p.x;
    sxy += p.x * p.y;
  }
  const double den = n * sxx - sx * sx;
  if (den == 0.0) return {sy / n, 0.0};
  const double slope = (n * sxy - sx * sy) / den;
  return {(sy - slope * sx) / n, slope};
}

}  // namespace

std::string singularity_type_name(SingularityType type) {
  switch (type) {
    case SingularityType::None: return "none";
    case SingularityType::JumpDerivative: return "jump";
    case SingularityType::LogDerivative: return "log";
    case SingularityType::InverseSqrt: return "inverse_sqrt";
    case SingularityType::UnclassifiedDegenerate: return "unclassified_degenerate";
  }
  return "unknown";
}

std::vector<StationaryPointInfo> enumerate_stationary_points(
    const SeparableSystem& system) {
  if (system.f() < 1)
    throw std::invalid_argument("enumerate_stationary_points: empty system");
  std::vector<std::vector<StationaryPoint1D>> per_component;
  for (const auto& comp : system.components) {
    if (comp.kind == PotentialKind::PlateauWell ||
        comp.kind == PotentialKind::PurePower)
      throw std::invalid_argument(
          "enumerate_stationary_points handles polynomial components only; "
          "plateau wells go through predict_plateau_singularities");
    per_component.push_back(stationary_points_1d(comp));
  }
  std::vector<StationaryPointInfo> points;
  std::vector<int> odo(per_component.size(), 0);
  while (true) {
    StationaryPointInfo info;
    info.choice.assign(odo.begin(), odo.end());
    for (std::size_t i = 0; i < odo.size(); ++i) {
      const StationaryPoint1D& sp = per_component[i][odo[i]];
      info.E_c += sp.energy;
      if (!sp.minimum) ++info.r;
      if (sp.degenerate) info.degenerate = true;
    }
    points.push_back(std::move(info));
    std::size_t i = 0;
    for (; i < odo.size(); ++i) {
      if (++odo[i] < static_cast<int>(per_component[i].size())) break;
      odo[i] = 0;
    }
    if (i == odo.size()) break;
  }
  std::sort(points.begin(), points.end(),
            [](const StationaryPointInfo& a, const StationaryPointInfo& b) {
              if (a.E_c != b.E_c) return a.E_c < b.E_c;
              return a.choice < b.choice;
            });
  return points;
}

std::vector<PredictedSingularity> predict_singularities(
    const std::vector<StationaryPointInfo>& points, int f) {
  if (f < 1) throw std::invalid_argument("predict_singularities: f >= 1");
  std::vector<PredictedSingularity> merged;
  for (const auto& pt : points) {
    PredictedSingularity p;
    p.E_c = pt.E_c;
    p.derivative_order = f - 1;
    p.degenerate = pt.degenerate;
    if (pt.degenerate) {
      p.type = SingularityType::UnclassifiedDegenerate;
      p.sign = 0;
    } else if (pt.r % 2 == 0) {
      p.type = SingularityType::JumpDerivative;
      p.sign = (pt.r / 2) % 2 == 0 ? 1 : -1;
    } else {
      p.type = SingularityType::LogDerivative;
      p.sign = ((pt.r + 1) / 2) % 2 == 0 ? 1 : -1;
    }
    bool absorbed = false;
    for (auto& m : merged) {
      if (std::abs(m.E_c - p.E_c) < 1e-9 * (1.0 + std::abs(p.E_c)) &&
          m.type == p.type && m.sign == p.sign) {
        ++m.multiplicity;
        absorbed = true;
        break;
      }
    }
    if (!absorbed) merged.push_back(p);
  }
  std::sort(merged.begin(), merged.end(),
            [](const PredictedSingularity& a, const PredictedSingularity& b) {
              if (a.E_c != b.E_c) return a.E_c < b.E_c;
              return a.type < b.type;
            });
  return merged;
}

std::vector<PredictedSingularity> predict_plateau_singularities(
    const std::vector<Plateau>& plateaus, int f) {
  if (f < 1 || plateaus.empty())
    throw std::invalid_argument("predict_plateau_singularities: bad input");
  std::vector<PredictedSingularity> out;
  for (const auto& p : plateaus) {
    bool absorbed = false;
    for (auto& m : out)
      if (std::abs(m.E_c - p.energy) < 1e-9 * (1.0 + std::abs(p.energy))) {
        ++m.multiplicity;
        absorbed = true;
      }
    if (absorbed) continue;
    PredictedSingularity s;
    s.E_c = p.energy;
    s.type = SingularityType::InverseSqrt;
    s.sign = 1;
    s.derivative_order = f - 1;
    out.push_back(s);
  }
  std::sort(out.begin(), out.end(),
            [](const PredictedSingularity& a, const PredictedSingularity& b) {
              return a.E_c < b.E_c;
            });
  return out;
}

namespace {

// Order-th finite-difference derivative of rho at node j, with rho extended
// by zero below the grid. Caller keeps j + 2 on the grid.
double fd_derivative(const LevelDensity& d, long j, int order) {
  auto v = [&](long k) {
    return k < 0 ? 0.0 : d.values[static_cast<std::size_t>(k)];
  };
  const double h = d.step;
  switch (order) {
    case 0:
      return v(j);
    case 1:
      return (v(j - 2) - 8.0 * v(j - 1) + 8.0 * v(j + 1) - v(j + 2)) /
             (12.0 * h);
    case 2:
      return (-v(j - 2) + 16.0 * v(j - 1) - 30.0 * v(j) + 16.0 * v(j + 1) -
              v(j + 2)) /
             (12.0 * h * h);
    case 3:
      return (v(j + 2) - 2.0 * v(j + 1) + 2.0 * v(j - 1) - v(j - 2)) /
             (2.0 * h * h * h);
    default:
      return (v(j - 2) - 4.0 * v(j - 1) + 6.0 * v(j) - 4.0 * v(j + 1) +
              v(j + 2)) /
             (h * h * h * h);
  }
}

struct ModelFits {
  double rms_none = 0.0, rms_jump = 0.0, rms_log = 0.0, rms_invsqrt = 0.0;
  double amp_jump = 0.0, amp_log = 0.0, amp_invsqrt = 0.0;
};

ModelFits fit_models(const std::vector<SidePoint>& left,
                     const std::vector<SidePoint>& right, double inner_x) {
  ModelFits out;
  std::vector<SidePoint> all(left);
  all.insert(all.end(), right.begin(), right.end());

  {  // null model: one shared line
    auto [a, b] = fit_line(all);
    std::vector<double> res;
    for (const auto& p : all) res.push_back(p.y - a - b * p.x);
    out.rms_none = rms(res);
  }
  {  // jump: independent lines per side
    auto [al, bl] = fit_line(left);
    auto [ar, br] = fit_line(right);
    std::vector<double> res;
    for (const auto& p : left) res.push_back(p.y - al - bl * p.x);
    for (const auto& p : right) res.push_back(p.y - ar - br * p.x);
    out.rms_jump = rms(res);
    out.amp_jump = std::abs(ar - al);
  }
  {  // log: y = A ln|x| + c_side
    double a[3][3] = {{0}}, b[3] = {0}, x[3] = {0};
    for (const auto& p : all) {
      const double u = std::log(std::abs(p.x));
      const bool is_left = p.x < 0.0;
      const double cols[3] = {u, is_left ? 1.0 : 0.0, is_left ? 0.0 : 1.0};
      for (int i = 0; i < 3; ++i) {
        for (int k = 0; k < 3; ++k) a[i][k] += cols[i] * cols[k];
        b[i] += cols[i] * p.y;
      }
    }
    solve3(a, b, x);
    std::vector<double> res;
    for (const auto& p : all) {
      const double u = std::log(std::abs(p.x));
      const double fit = x[0] * u + (p.x < 0.0 ? x[1] : x[2]);
      res.push_back(p.y - fit);
    }
    out.rms_log = rms(res);
    out.amp_log = std::abs(x[0]);
  }
  {  // inverse sqrt: y = A x^(-1/2) on the right + c_side
    double a[3][3] = {{0}}, b[3] = {0}, x[3] = {0};
    for (const auto& p : all) {
      const bool is_left = p.x < 0.0;
      const double u = is_left ? 0.0 : 1.0 / std::sqrt(p.x);
      const double cols[3] = {u, is_left ? 1.0 : 0.0, is_left ? 0.0 : 1.0};
      for (int i = 0; i < 3; ++i) {
        for (int k = 0; k < 3; ++k) a[i][k] += cols[i] * cols[k];
        b[i] += cols[i] * p.y;
      }
    }
    solve3(a, b, x);
    std::vector<double> res;
    for (const auto& p : all) {
      const bool is_left = p.x < 0.0;
      const double u = is_left ? 0.0 : 1.0 / std::sqrt(p.x);
      const double fit = x[0] * u + (is_left ? x[1] : x[2]);
      res.push_back(p.y - fit);
    }
    out.rms_invsqrt = rms(res);
    out.amp_invsqrt = std::abs(x[0]) / std::sqrt(inner_x);
  }
  return out;
}

}  // namespace

DetectionReport detect_nonanalyticity(const LevelDensity& density, double E_c,
                                      int order) {
  if (order < 0 || order > 4)
    throw std::invalid_argument("detect_nonanalyticity: order must be 0..4");
  if (order > density.f - 1)
    throw std::invalid_argument(
        "detect_nonanalyticity: order exceeds f - 1 for this density");
  if (E_c < 0.0 || E_c > density.grid_max())
    throw std::invalid_argument("detect_nonanalyticity: E_c outside the grid");
  const double h = density.step;
  const auto G = static_cast<long>(density.cells());
  const long c0 = std::lround(E_c / h);
  constexpr long kStart = 4;   // blind cells on each side of the candidate
  constexpr long kMax = 30;    // flank length cap

  DetectionReport report;
  report.E_c = E_c;
  report.resolution_bound = static_cast<double>(kStart) * h;

  // Flank extents limited by other singular energies and the grid top.
  auto side_limit = [&](long c, int dir) {
    long limit = kMax;
    for (const auto& s : density.singular_points) {
      const double d = (s.energy - h * static_cast<double>(c)) * dir;
      if (d > 0.5 * h) {
        const long cells = static_cast<long>(std::floor(d / h));
        limit = std::min(limit, cells - kStart - 2);
      }
    }
    if (dir > 0) limit = std::min(limit, G - 2 - (c + kStart));
    return limit;
  };

  double best_rms = std::numeric_limits<double>::infinity();
  bool any = false;
  for (long c = c0 - 3; c <= c0 + 3; ++c) {
    if (c < 0 || c > G) continue;
    const long nl = side_limit(c, -1);
    const long nr = side_limit(c, +1);
    if (nl < 10 || nr < 10) continue;
    std::vector<SidePoint> left, right;
    for (long i = 0; i < nl; ++i) {
      const long j = c - kStart - i;
      left.push_back({h * static_cast<double>(j - c), fd_derivative(density, j, order)});
    }
    for (long i = 0; i < nr; ++i) {
      const long j = c + kStart + i;
      right.push_back(
          {h * static_cast<double>(j - c), fd_derivative(density, j, order)});
    }
    const ModelFits fits =
        fit_models(left, right, static_cast<double>(kStart) * h);
    const double candidate_best =
        std::min({fits.rms_jump, fits.rms_log, fits.rms_invsqrt});
    if (!any || candidate_best < best_rms) {
      any = true;
      best_rms = candidate_best;
      report.located_E = h * static_cast<double>(c);
      report.rms_none = fits.rms_none;
      report.rms_jump = fits.rms_jump;
      report.rms_log = fits.rms_log;
      report.rms_invsqrt = fits.rms_invsqrt;
      if (fits.rms_jump <= fits.rms_log && fits.rms_jump <= fits.rms_invsqrt) {
        report.detected = SingularityType::JumpDerivative;
        report.amplitude = fits.amp_jump;
      } else if (fits.rms_log <= fits.rms_invsqrt) {
        report.detected = SingularityType::LogDerivative;
        report.amplitude = fits.amp_log;
      } else {
        report.detected = SingularityType::InverseSqrt;
        report.amplitude = fits.amp_invsqrt;
      }
    }
  }
  if (!any) {
    report.located_E = E_c;
    report.detected = SingularityType::None;
    return report;  // not enough flanking data: inconclusive
  }
  const double ratio =
      best_rms > 0.0 ? report.rms_none / best_rms
                     : std::numeric_limits<double>::infinity();
  report.conclusive = ratio > 10.0 && report.amplitude > 5.0 * best_rms;
  if (!report.conclusive) report.detected = SingularityType::None;
  return report;
}

}  // namespace caloric
