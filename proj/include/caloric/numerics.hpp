#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

// Shared numerical kernels: adaptive Gauss-Kronrod quadrature (with a
// recordable panel mesh for correlated re-evaluation), a modified Bessel
// function of the first kind, real cubic roots, bisection, and a stable
// string hash for run directories.
namespace caloric::num {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;  // absolute error estimate
};

namespace detail {

// 7-15 Gauss-Kronrod pair, positive abscissae of [-1, 1], node 0 last.
inline constexpr double kGkX[8] = {
    0.9914553711208126, 0.9491079123427585, 0.8648644233597691,
    0.7415311855993944, 0.5860872354676911, 0.4058451513773972,
    0.2077849550078985, 0.0};
inline constexpr double kGkWK[8] = {
    0.0229353220105292, 0.0630920926299785, 0.1047900103222502,
    0.1406532597155259, 0.1690047266392679, 0.1903505780647854,
    0.2044329400752989, 0.2094821410847278};
// Embedded 7-point Gauss weights, matching kGkX indices 1, 3, 5, 7.
inline constexpr double kGkWG[4] = {
    0.1294849661688697, 0.2797053914892767, 0.3818300505051189,
    0.4179591836734694};

template <class F>
QuadResult gk15(const F& f, double a, double b) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double acc_k = 0.0, acc_g = 0.0;
  for (int i = 0; i < 8; ++i) {
    double fs;
    if (i == 7) {
      fs = f(mid);
    } else {
      const double dx = half * kGkX[i];
      fs = f(mid - dx) + f(mid + dx);
    }
    acc_k += kGkWK[i] * fs;
    if (i % 2 == 1 || i == 7) acc_g += kGkWG[i / 2] * fs;
  }
  QuadResult r;
  r.value = acc_k * half;
  r.error = std::abs(acc_k - acc_g) * std::abs(half);
  return r;
}

struct Panel {
  double a, b;
  QuadResult est;
};

// Worst-panel-first refinement against one global budget. Splitting only the
// current worst panel keeps integrable endpoint singularities (log, inverse
// square root) convergent: each split halves the dominant error term, whereas
// a per-branch budget that shrinks with depth never catches up with it. The
// split cap bounds total work at ~30k integrand evaluations.
template <class F>
void refine(const F& f, double a, double b, double rel_tol, double abs_floor,
            std::vector<Panel>& panels, QuadResult& total) {
  panels.clear();
  panels.push_back({a, b, gk15(f, a, b)});
  auto worse = [](const Panel& x, const Panel& y) {
    return x.est.error < y.est.error;
  };
  std::vector<Panel> frozen;  // too narrow to split; error kept in the total
  double value = panels[0].est.value;
  double error = panels[0].est.error;
  for (int splits = 0; splits < 2000; ++splits) {
    const double budget = std::max(rel_tol * std::abs(value), abs_floor);
    if (error <= budget || panels.empty()) break;
    std::pop_heap(panels.begin(), panels.end(), worse);
    Panel p = panels.back();
    panels.pop_back();
    const double mid = 0.5 * (p.a + p.b);
    if (!(mid > p.a && mid < p.b)) {
      frozen.push_back(p);
      continue;
    }
    Panel l{p.a, mid, gk15(f, p.a, mid)};
    Panel r{mid, p.b, gk15(f, mid, p.b)};
    value += l.est.value + r.est.value - p.est.value;
    error += l.est.error + r.est.error - p.est.error;
    panels.push_back(l);
    std::push_heap(panels.begin(), panels.end(), worse);
    panels.push_back(r);
    std::push_heap(panels.begin(), panels.end(), worse);
  }
  panels.insert(panels.end(), frozen.begin(), frozen.end());
  total = {value, error};
}

}  // namespace detail

// Adaptive quadrature of f over [a, b] to a relative tolerance. abs_floor
// bounds the absolute error budget from below so near-zero integrals do not
// demand unbounded refinement.
template <class F>
QuadResult integrate(const F& f, double a, double b, double rel_tol,
                     double abs_floor = 1e-300) {
  std::vector<detail::Panel> panels;
  QuadResult total;
  detail::refine(f, a, b, rel_tol, abs_floor, panels, total);
  return total;
}

// Fixed quadrature mesh: the panel set an adaptive run settled on, frozen so
// that related integrands (e.g. the same Boltzmann factor at nearby beta)
// are evaluated on identical nodes and share their discretization error.
struct QuadMesh {
  std::vector<double> nodes;
  std::vector<double> weights;
};

template <class F>
QuadMesh build_mesh(const F& f, double a, double b, double rel_tol) {
  std::vector<detail::Panel> panels;
  QuadResult total;
  detail::refine(f, a, b, rel_tol, 1e-300, panels, total);
  QuadMesh mesh;
  mesh.nodes.reserve(panels.size() * 15);
  mesh.weights.reserve(panels.size() * 15);
  for (const auto& p : panels) {
    const double mid = 0.5 * (p.a + p.b);
    const double half = 0.5 * (p.b - p.a);
    for (int i = 0; i < 8; ++i) {
      if (i == 7) {
        mesh.nodes.push_back(mid);
        mesh.weights.push_back(detail::kGkWK[i] * half);
      } else {
        const double dx = half * detail::kGkX[i];
        mesh.nodes.push_back(mid - dx);
        mesh.weights.push_back(detail::kGkWK[i] * half);
        mesh.nodes.push_back(mid + dx);
        mesh.weights.push_back(detail::kGkWK[i] * half);
      }
    }
  }
  return mesh;
}

template <class F>
double integrate_on_mesh(const QuadMesh& mesh, const F& f) {
  double acc = 0.0;
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i)
    acc += mesh.weights[i] * f(mesh.nodes[i]);
  return acc;
}

// Modified Bessel function of the first kind, nu > -1, x >= 0. Power series
// with all-positive terms; accurate to ~1e-14 relative for x up to several
// hundred (no cancellation, term recurrence is exact).
double bessel_i(double nu, double x);

// All real roots of c3 x^3 + c2 x^2 + c1 x + c0 = 0, ascending, polished by
// Newton steps. Degenerates to the quadratic/linear case when c3 == 0.
std::vector<double> real_cubic_roots(double c3, double c2, double c1,
                                     double c0);

// Root of a sign-changing continuous function on [lo, hi] by bisection.
double bisect(const std::function<double(double)>& f, double lo, double hi,
              double xtol);

// FNV-1a 64-bit hash (stable across platforms and runs).
std::uint64_t fnv1a(std::string_view s);

}  // namespace caloric::num
