#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "caloric/canonical.hpp"
#include "caloric/density.hpp"
#include "caloric/potential.hpp"
#include "oracles.hpp"

using namespace caloric;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Smooth compactly supported density for convolution algebra tests.
LevelDensity make_bump(double center, double width, double E_max, int cells) {
  LevelDensity d;
  d.step = E_max / cells;
  d.f = 1;
  d.continuous = true;
  auto f = [&](double E) {
    const double x = (E - center) / width;
    if (std::abs(x) >= 0.5) return 0.0;
    const double c = std::cos(kPi * x);
    return c * c * c * c;
  };
  d.values.resize(cells + 1);
  for (int j = 0; j <= cells; ++j) d.values[j] = f(d.step * j);
  d.cell_mass.resize(cells);
  for (int j = 0; j < cells; ++j) {
    const double a = d.step * j, h = d.step;
    d.cell_mass[j] = h / 12.0 *
                     (f(a) + 4.0 * f(a + 0.25 * h) + 2.0 * f(a + 0.5 * h) +
                      4.0 * f(a + 0.75 * h) + f(a + h));
  }
  return d;
}

double max_rel_dev(const LevelDensity& x, const LevelDensity& y,
                   double floor_frac) {
  double peak = 0.0;
  for (double v : y.values) peak = std::max(peak, std::abs(v));
  double worst = 0.0;
  for (std::size_t j = 0; j < y.values.size(); ++j)
    if (std::abs(y.values[j]) > floor_frac * peak)
      worst = std::max(worst,
                       std::abs(x.values[j] - y.values[j]) / std::abs(y.values[j]));
  return worst;
}

}  // namespace

TEST_CASE("power-law exponents and flat harmonic density") {
  PowerLawSpec ho;
  ho.pairs.push_back({2.0, 2.0, 0.5, 1.0});  // p^2/2 + q^2, omega = sqrt(2)
  CHECK(ho.M() == doctest::Approx(1.0).epsilon(1e-15));
  for (double E : {0.3, 1.0, 7.5})
    CHECK(density_power_law(ho, E) ==
          doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(density_power_law(ho, 0.0), std::invalid_argument);
}

TEST_CASE("quartic and hard-wall power laws decrease as predicted") {
  PowerLawSpec quartic;
  quartic.pairs.push_back({2.0, 4.0, 0.5, 1.0});
  CHECK(quartic.M() == doctest::Approx(0.75).epsilon(1e-15));
  const double r = density_power_law(quartic, 2.0) / density_power_law(quartic, 1.0);
  CHECK(r == doctest::Approx(std::pow(2.0, -0.25)).epsilon(1e-12));

  PowerLawSpec wall;
  wall.pairs.push_back({2.0, 1e7, 0.5, 1.0});
  CHECK(wall.M() == doctest::Approx(0.5).epsilon(1e-6));
  const double rw = density_power_law(wall, 4.0) / density_power_law(wall, 1.0);
  CHECK(rw == doctest::Approx(0.5).epsilon(1e-5));
}

TEST_CASE("rotational power-law exponent") {
  PowerLawSpec rot;
  rot.rotational = true;
  rot.f_rot = 3;
  rot.rot = {2.0, 4.0, 0.5, 1.0};
  CHECK(rot.M() == doctest::Approx(3.0 / 2.0 + 3.0 / 4.0).epsilon(1e-15));
  CHECK(power_law_normalization(rot) == 1.0);
}

TEST_CASE("power-law scaling: rho(lambda E) = lambda^(M-1) rho(E)") {
  oracles::Draw draw(48111u);
  for (int t = 0; t < 20; ++t) {
    PowerLawSpec spec;
    const int n = draw.uniform_int(1, 3);
    for (int i = 0; i < n; ++i)
      spec.pairs.push_back({draw.uniform(1.0, 6.0), draw.uniform(1.0, 6.0),
                            draw.uniform(0.3, 2.0), draw.uniform(0.3, 2.0)});
    const double M = spec.M();
    const double E = draw.uniform(0.5, 3.0);
    const double lam = draw.uniform(1.5, 4.0);
    const double lhs = density_power_law(spec, lam * E);
    const double rhs = std::pow(lam, M - 1.0) * density_power_law(spec, E);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("plateau density closed forms at f = 1 and f = 2") {
  for (double E : {0.2, 1.0, 3.7}) {
    CHECK(density_plateau(1, {{0.0, 1.0}}, {}, E) ==
          doctest::Approx(1.0 / (kPi * std::sqrt(2.0 * E))).epsilon(1e-13));
    const double L = 2.5, w = 1.3;
    CHECK(density_plateau(2, {{0.0, L}}, {w}, E) ==
          doctest::Approx(L * std::sqrt(2.0 * E) / (kPi * w)).epsilon(1e-13));
  }
  // Segment geometry is irrelevant: splitting a plateau leaves rho unchanged.
  const double whole = density_plateau(2, {{0.5, 2.0}}, {1.0}, 3.0);
  const double split =
      density_plateau(2, {{0.5, 0.75}, {0.5, 1.25}}, {1.0}, 3.0);
  CHECK(whole == doctest::Approx(split).epsilon(1e-15));
  CHECK_THROWS_AS(density_plateau(3, {{0.0, 1.0}}, {1.0}, 1.0),
                  std::invalid_argument);
}

TEST_CASE("harmonic quadrature density equals 1/omega") {
  auto ho = build_harmonic(1.0);  // omega = sqrt(2)
  for (double E : {0.1, 0.7, 2.0, 9.0})
    CHECK(density_1d_numeric(ho, E) ==
          doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-9));
  CHECK(density_1d_numeric(ho, 0.0) == 0.0);
  CHECK(density_1d_numeric(ho, -1.0) == 0.0);
}

TEST_CASE("pure quartic density follows the E^(-1/4) scaling law") {
  auto comp = build_pure_power(1.0, 4.0);
  const double rho1 = density_1d_numeric(comp, 1.0);
  for (double E : {0.5, 2.0, 5.0})
    CHECK(density_1d_numeric(comp, E) ==
          doctest::Approx(rho1 * std::pow(E, -0.25)).epsilon(1e-11));
  // Same density through the Beta-integral normalization route.
  PowerLawSpec spec;
  spec.pairs.push_back({2.0, 4.0, 0.5, 1.0});
  CHECK(rho1 == doctest::Approx(density_power_law(spec, 1.0)).epsilon(1e-12));
}

TEST_CASE("double well below the barrier sums both allowed intervals") {
  auto dw = build_quartic(0.0, -2.0, 1.0);
  auto V = [&](double q) { return dw.value(q); };
  // Independent phase-space cell count, 1e-4 contract.
  for (double E : {0.3, 0.7, 1.5, 2.5}) {
    const double rho = density_1d_numeric(dw, E);
    const double oracle = oracles::band_count_density(V, E, -3.0, 3.0);
    CHECK(rho == doctest::Approx(oracle).epsilon(1e-4));
  }
  // Tighter area-slope oracle away from the barrier energy.
  for (double E : {0.4, 2.2}) {
    const double rho = density_1d_numeric(dw, E);
    const double oracle = oracles::area_slope_density(V, E, -3.0, 3.0);
    CHECK(rho == doctest::Approx(oracle).epsilon(2e-6));
  }
  CHECK_THROWS_AS(density_1d_numeric(dw, 1.0), std::domain_error);
}

TEST_CASE("tilted single well against the cell-count oracle") {
  auto sw = build_quartic(1.8, -0.5, 0.8);
  auto V = [&](double q) { return sw.value(q); };
  for (double E : {0.25, 1.1, 3.0}) {
    const double rho = density_1d_numeric(sw, E);
    const double oracle = oracles::band_count_density(V, E, -3.5, 3.5);
    CHECK(rho == doctest::Approx(oracle).epsilon(1e-4));
  }
}

TEST_CASE("harmonic grid: flat values and exact masses") {
  auto grid = grid_density_1d(build_harmonic(1.0), 8.0, 200);
  const double flat = 1.0 / std::sqrt(2.0);
  REQUIRE(grid.values.size() == 201);
  for (double v : grid.values) CHECK(v == doctest::Approx(flat).epsilon(1e-9));
  double total = 0.0;
  for (double m : grid.cell_mass) {
    CHECK(m == doctest::Approx(flat * grid.step).epsilon(1e-9));
    total += m;
  }
  CHECK(total == doctest::Approx(flat * 8.0).epsilon(1e-9));
  REQUIRE(grid.singular_points.size() == 1);
  CHECK(grid.singular_points[0].kind == SingularKind::SupportEdge);
}

TEST_CASE("double-well grid: values match pointwise evaluation away from singular energies") {
  auto dw = build_quartic(0.5, -2.0, 1.0);
  auto grid = grid_density_1d(dw, 6.0, 1200);
  REQUIRE(grid.singular_points.size() == 3);
  CHECK(grid.singular_points[0].kind == SingularKind::SupportEdge);
  CHECK(grid.singular_points[1].kind == SingularKind::Jump);
  CHECK(grid.singular_points[1].energy == doctest::Approx(0.9980051329904565));
  CHECK(grid.singular_points[2].kind == SingularKind::LogDivergence);
  CHECK(grid.singular_points[2].energy == doctest::Approx(1.5462557908366603));

  for (double E : {0.31, 0.77, 1.31, 2.49, 4.03}) {
    CHECK(grid.value_at(E) ==
          doctest::Approx(density_1d_numeric(dw, E)).epsilon(2e-4));
  }
  // Node on the support edge stores the half-cell offset value.
  CHECK(grid.values[0] ==
        doctest::Approx(density_1d_numeric(dw, 0.5 * grid.step)).epsilon(1e-9));
  // Total mass equals the accessible phase-space volume at the top.
  double total = 0.0;
  for (double m : grid.cell_mass) total += m;
  auto V = [&](double q) { return dw.value(q); };
  double area = 0.0;
  const double dq = 1e-5;
  for (double q = -4.0; q < 4.0; q += dq) {
    const double v = V(q + 0.5 * dq);
    if (v < 6.0) area += std::sqrt(2.0 * (6.0 - v)) * dq;
  }
  CHECK(total == doctest::Approx(area / kPi).epsilon(1e-6));
}

TEST_CASE("power-law grid carries exact node values and masses") {
  PowerLawSpec spec;
  spec.pairs.push_back({2.0, 2.0, 0.5, 0.5});  // omega = 1
  spec.pairs.push_back({2.0, 2.0, 0.5, 0.5});
  auto grid = grid_density_power_law(spec, 10.0, 500);
  CHECK(grid.f == 2);
  CHECK(grid.continuous);
  const double K = power_law_normalization(spec);
  CHECK(K == doctest::Approx(1.0).epsilon(1e-12));  // rho = E for two unit oscillators
  for (int j = 1; j <= 500; j += 97)
    CHECK(grid.values[j] == doctest::Approx(K * grid.energy_at(j)).epsilon(1e-13));
  for (int j = 0; j < 500; j += 83) {
    const double a = grid.energy_at(j), b = a + grid.step;
    CHECK(grid.cell_mass[j] ==
          doctest::Approx(0.5 * K * (b * b - a * a)).epsilon(1e-13));
  }
  REQUIRE(grid.singular_points.size() == 1);
  CHECK(grid.singular_points[0].exponent == doctest::Approx(1.0));
}

TEST_CASE("oscillator stack grid matches the Gamma-law density") {
  auto grid = grid_density_oscillators({1.0, 2.0, 1.5}, 12.0, 300);
  CHECK(grid.f == 3);
  const double norm = 1.0 / (2.0 * 3.0);  // 1/((k-1)! prod omega)
  for (int j = 10; j <= 300; j += 50) {
    const double E = grid.energy_at(j);
    CHECK(grid.values[j] == doctest::Approx(norm * E * E).epsilon(1e-13));
  }
}

TEST_CASE("convolution of two oscillator grids reproduces the two-DoF law") {
  PowerLawSpec one;
  one.pairs.push_back({2.0, 2.0, 0.5, 0.5});
  auto a = grid_density_power_law(one, 10.0, 2000);
  auto conv = convolve_pair(a, a);
  PowerLawSpec two;
  two.pairs.push_back({2.0, 2.0, 0.5, 0.5});
  two.pairs.push_back({2.0, 2.0, 0.5, 0.5});
  auto exact = grid_density_power_law(two, 10.0, 2000);
  CHECK(conv.f == 2);
  for (int j = 40; j <= 2000; j += 112)
    CHECK(conv.values[j] ==
          doctest::Approx(exact.values[j]).epsilon(1e-4));
}

TEST_CASE("well-plus-oscillator convolution matches the plateau closed form") {
  auto well = grid_density_plateau(1, {{0.0, 1.0}}, {}, 8.0, 4000);
  auto osc = grid_density_oscillators({1.0, 1.0}, 8.0, 4000);
  auto conv = convolve_pair(osc, well);
  auto exact = grid_density_plateau(3, {{0.0, 1.0}}, {1.0, 1.0}, 8.0, 4000);
  // 1e-4 relative away from the onset.
  for (int j = 100; j <= 4000; j += 177)
    CHECK(conv.values[j] == doctest::Approx(exact.values[j]).epsilon(1e-4));
}

// Discrete convolution is associative only up to its O(h^2) cell-mass
// quadrature, so the deviation must shrink at second order under refinement.
TEST_CASE("convolution is associative on smooth densities") {
  auto dev_at = [](int G) {
    auto b1 = make_bump(1.0, 1.0, 4.0, G);
    auto b2 = make_bump(0.6, 0.7, 4.0, G);
    auto b3 = make_bump(0.8, 0.9, 4.0, G);
    auto left = convolve_pair(convolve_pair(b1, b2), b3);
    auto right = convolve_pair(b1, convolve_pair(b2, b3));
    return max_rel_dev(left, right, 1e-3);
  };
  const double coarse = dev_at(16000);
  const double fine = dev_at(32000);
  CHECK(fine < 2e-6);
  CHECK(fine < coarse / 2.0);
}

TEST_CASE("convolution rejects mismatched spacings and empty grids") {
  auto a = make_bump(1.0, 1.0, 4.0, 100);
  auto b = make_bump(1.0, 1.0, 4.0, 200);
  CHECK_THROWS_AS(convolve_pair(a, b), std::invalid_argument);
  LevelDensity empty;
  CHECK_THROWS_AS(convolve_pair(a, empty), std::invalid_argument);
  CHECK_THROWS_AS(convolve_densities({}), std::invalid_argument);
}

TEST_CASE("system density merges harmonic components into the exact stack") {
  SeparableSystem sys;
  sys.components.push_back(build_harmonic(0.5));  // omega = 1
  sys.components.push_back(build_harmonic(2.0));  // omega = 2
  auto d = system_density(sys, 10.0, 400);
  CHECK(d.f == 2);
  for (int j = 20; j <= 400; j += 60)
    CHECK(d.values[j] == doctest::Approx(d.energy_at(j) / 2.0).epsilon(1e-12));
}

TEST_CASE("three-DoF system density: singular bookkeeping from the well") {
  SeparableSystem sys;
  sys.components.push_back(build_quartic(0.5, -2.0, 1.0));
  sys.components.push_back(build_harmonic(1.0));
  sys.components.push_back(build_harmonic(1.0));
  auto d = system_density(sys, 8.0, 1600);
  CHECK(d.f == 3);
  CHECK(d.continuous);
  REQUIRE(d.singular_points.size() == 3);
  CHECK(d.singular_points[0].energy == doctest::Approx(0.0).scale(1.0));
  CHECK(d.singular_points[1].energy == doctest::Approx(0.9980051329904565));
  CHECK(d.singular_points[1].kind == SingularKind::Jump);
  CHECK(d.singular_points[2].energy == doctest::Approx(1.5462557908366603));
  CHECK(d.singular_points[2].kind == SingularKind::LogDivergence);
  CHECK(d.values[0] == 0.0);
  for (double v : d.values) CHECK(v >= 0.0);
}

TEST_CASE("logarithmic derivatives of an exact power-law grid") {
  PowerLawSpec spec;  // M = 2
  spec.pairs.push_back({2.0, 2.0, 0.5, 0.5});
  spec.pairs.push_back({2.0, 2.0, 0.5, 0.5});
  auto grid = grid_density_power_law(spec, 10.0, 2000);
  const double E = 0.5;
  CHECK(log_density_derivative(grid, 1, E).value ==
        doctest::Approx(1.0 / E).epsilon(1e-8));
  CHECK(log_density_derivative(grid, 2, E).value ==
        doctest::Approx(-1.0 / (E * E)).epsilon(1e-6));
  CHECK(log_density_derivative(grid, 3, E).value ==
        doctest::Approx(2.0 / (E * E * E)).epsilon(1e-3));
  CHECK(log_density_derivative(grid, 4, E).value ==
        doctest::Approx(-6.0 / (E * E * E * E)).epsilon(1e-3));
  CHECK(log_density_derivative(grid, 1, E).truncation >= 0.0);
  // The two-stencil gauge brackets the true error of an O(h^2) stencil.
  const auto d3 = log_density_derivative(grid, 3, E);
  CHECK(std::abs(d3.value - 2.0 / (E * E * E)) < 2.0 * d3.truncation + 1e-12);
  CHECK_THROWS_AS(log_density_derivative(grid, 5, E), std::invalid_argument);
  CHECK_THROWS_AS(log_density_derivative(grid, 1, 10.5), std::invalid_argument);
}

TEST_CASE("flat density has zero slope") {
  auto grid = grid_density_1d(build_harmonic(1.0), 8.0, 400);
  CHECK(log_density_derivative(grid, 1, 4.0).value ==
        doctest::Approx(0.0).scale(1.0).epsilon(1e-10));
}

TEST_CASE("derivative queries refuse the singular exclusion window") {
  auto dw = build_quartic(0.5, -2.0, 1.0);
  auto grid = grid_density_1d(dw, 6.0, 1200);
  const double E_c = 0.9980051329904565;
  try {
    log_density_derivative(grid, 1, E_c + 0.5 * grid.step);
    FAIL("expected NearSingularError");
  } catch (const NearSingularError& e) {
    CHECK(e.singular_energy() == doctest::Approx(E_c).epsilon(1e-9));
  }
  // Two full cells clear of every singular energy works.
  CHECK_NOTHROW(log_density_derivative(grid, 1, 0.5));
}

TEST_CASE("laplace transform of grids reproduces partition functions") {
  // Flat density: exact geometric answer.
  auto ho = grid_density_1d(build_harmonic(1.0), 60.0, 1200);
  for (double beta : {0.5, 1.0, 2.0}) {
    const double want =
        (1.0 - std::exp(-beta * 60.0)) / (std::sqrt(2.0) * beta);
    CHECK(laplace_transform(ho, beta) == doctest::Approx(want).epsilon(1e-6));
  }

  // Power law: K Gamma(M) / beta^M.
  PowerLawSpec spec;
  spec.pairs.push_back({2.0, 4.0, 0.5, 1.0});
  spec.pairs.push_back({2.0, 2.0, 0.5, 0.5});
  auto grid = grid_density_power_law(spec, 200.0, 8000);
  const double M = spec.M();
  const double K = power_law_normalization(spec);
  for (double beta : {0.5, 1.0, 3.0}) {
    const double want = K * std::tgamma(M) / std::pow(beta, M);
    CHECK(laplace_transform(grid, beta) == doctest::Approx(want).epsilon(2e-4));
  }
}

TEST_CASE("laplace consistency for a well-plus-oscillator system") {
  SeparableSystem sys;
  sys.components.push_back(build_quartic(0.5, -2.0, 1.0));
  sys.components.push_back(build_harmonic(1.0));
  auto d = system_density(sys, 138.0, 4000);
  for (double beta : {0.2, 0.5, 1.0, 2.0, 5.0}) {
    const double Z = partition_function(sys, beta);
    CHECK(laplace_transform(d, beta) == doctest::Approx(Z).epsilon(5e-3));
  }
}

TEST_CASE("density CSV has the documented header and sidecar") {
  auto grid = grid_density_1d(build_quartic(0.5, -2.0, 1.0), 4.0, 64);
  std::ostringstream table, sidecar;
  write_density_csv(grid, table, sidecar);
  const std::string t = table.str();
  CHECK(t.rfind("E,rho\n", 0) == 0);
  std::size_t rows = 0;
  for (char ch : t)
    if (ch == '\n') ++rows;
  CHECK(rows == 66);  // header + 65 nodes
  const std::string s = sidecar.str();
  CHECK(s.rfind("E_c,type,exponent\n", 0) == 0);
  CHECK(s.find("jump") != std::string::npos);
  CHECK(s.find("log_divergence") != std::string::npos);
}

TEST_CASE("value_at interpolates and vanishes outside the grid") {
  PowerLawSpec spec;
  spec.pairs.push_back({2.0, 2.0, 0.5, 0.5});
  spec.pairs.push_back({2.0, 2.0, 0.5, 0.5});
  auto grid = grid_density_power_law(spec, 10.0, 100);
  CHECK(grid.value_at(-0.5) == 0.0);
  CHECK(grid.value_at(11.0) == 0.0);
  const double mid = 0.05 + 0.5 * grid.step;
  CHECK(grid.value_at(mid) == doctest::Approx(mid).epsilon(1e-3));
}
