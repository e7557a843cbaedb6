#include "caloric/numerics.hpp"

#include <algorithm>
#include <stdexcept>

namespace caloric::num {

double bessel_i(double nu, double x) {
  if (x < 0.0) throw std::invalid_argument("bessel_i: x must be >= 0");
  if (nu <= -1.0) throw std::invalid_argument("bessel_i: nu must be > -1");
  if (x == 0.0) return nu == 0.0 ? 1.0 : 0.0;
  const double q = 0.25 * x * x;
  // term_0 = (x/2)^nu / Gamma(nu+1); term_k = term_{k-1} * q / (k (k+nu)).
  double term = std::pow(0.5 * x, nu) / std::tgamma(nu + 1.0);
  double sum = term;
  for (int k = 1; k < 600; ++k) {
    term *= q / (static_cast<double>(k) * (static_cast<double>(k) + nu));
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return sum;
}

namespace {

double polish_cubic(double c3, double c2, double c1, double c0, double x) {
  for (int it = 0; it < 6; ++it) {
    const double f = ((c3 * x + c2) * x + c1) * x + c0;
    const double df = (3.0 * c3 * x + 2.0 * c2) * x + c1;
    if (df == 0.0) break;
    const double step = f / df;
    x -= step;
    if (std::abs(step) <= 1e-15 * (1.0 + std::abs(x))) break;
  }
  return x;
}

}  // namespace

std::vector<double> real_cubic_roots(double c3, double c2, double c1,
                                     double c0) {
  std::vector<double> roots;
  if (c3 == 0.0) {
    if (c2 == 0.0) {
      if (c1 != 0.0) roots.push_back(-c0 / c1);
      return roots;
    }
    const double disc = c1 * c1 - 4.0 * c2 * c0;
    if (disc >= 0.0) {
      const double s = std::sqrt(disc);
      roots.push_back((-c1 - s) / (2.0 * c2));
      roots.push_back((-c1 + s) / (2.0 * c2));
      std::sort(roots.begin(), roots.end());
    }
    return roots;
  }
  // Depressed form t^3 + p t + q with x = t - c2/(3 c3).
  const double shift = c2 / (3.0 * c3);
  const double p = c1 / c3 - 3.0 * shift * shift;
  const double q =
      2.0 * shift * shift * shift - shift * c1 / c3 + c0 / c3;
  const double disc = 0.25 * q * q + p * p * p / 27.0;
  if (disc > 0.0) {
    const double s = std::sqrt(disc);
    const double u = std::cbrt(-0.5 * q + s);
    const double w = std::cbrt(-0.5 * q - s);
    roots.push_back(u + w - shift);
  } else if (p == 0.0 && q == 0.0) {
    roots.push_back(-shift);
  } else {
    // Three real roots (trigonometric form).
    const double m = 2.0 * std::sqrt(-p / 3.0);
    double arg = 3.0 * q / (p * m);
    arg = std::clamp(arg, -1.0, 1.0);
    const double theta = std::acos(arg) / 3.0;
    for (int k = 0; k < 3; ++k) {
      const double t =
          m * std::cos(theta - 2.0 * M_PI * static_cast<double>(k) / 3.0);
      roots.push_back(t - shift);
    }
  }
  for (double& r : roots) r = polish_cubic(c3, c2, c1, c0, r);
  std::sort(roots.begin(), roots.end());
  // Merge roots that polished onto each other.
  std::vector<double> out;
  for (double r : roots) {
    if (out.empty() || std::abs(r - out.back()) >
                           1e-9 * (1.0 + std::abs(r) + std::abs(out.back())))
      out.push_back(r);
  }
  return out;
}

double bisect(const std::function<double(double)>& f, double lo, double hi,
              double xtol) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0))
    throw std::invalid_argument("bisect: no sign change on bracket");
  while (hi - lo > xtol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace caloric::num
