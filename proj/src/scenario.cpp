#include "caloric/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <thread>

#include "caloric/canonical.hpp"
#include "caloric/density.hpp"
#include "caloric/esqpt.hpp"
#include "caloric/format.hpp"
#include "caloric/microcanonical.hpp"
#include "caloric/numerics.hpp"

namespace caloric {

namespace {

constexpr const char* kVersion = "0.1.0";

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_number(const std::string& s, int line) {
  const std::string t = trim(s);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size())
    throw ScenarioError(line, "expected a number, got '" + t + "'");
  return v;
}

int parse_int(const std::string& s, int line) {
  const double v = parse_number(s, line);
  if (v != std::floor(v) || std::abs(v) > 1e9)
    throw ScenarioError(line, "expected an integer, got '" + trim(s) + "'");
  return static_cast<int>(v);
}

bool parse_bool(const std::string& s, int line) {
  const std::string t = trim(s);
  if (t == "true") return true;
  if (t == "false") return false;
  throw ScenarioError(line, "expected true or false, got '" + t + "'");
}

std::vector<double> parse_list(const std::string& s, int line) {
  std::vector<double> out;
  std::string item;
  std::istringstream in(trim(s));
  while (std::getline(in, item, ';')) out.push_back(parse_number(item, line));
  if (out.empty()) throw ScenarioError(line, "expected a ';'-separated list");
  return out;
}

// "(E,L);(E,L);..."
std::vector<Plateau> parse_plateaus(const std::string& s, int line) {
  std::vector<Plateau> out;
  std::string item;
  std::istringstream in(trim(s));
  while (std::getline(in, item, ';')) {
    const std::string t = trim(item);
    if (t.size() < 5 || t.front() != '(' || t.back() != ')')
      throw ScenarioError(line, "plateau entries look like (E,L)");
    const auto comma = t.find(',');
    if (comma == std::string::npos)
      throw ScenarioError(line, "plateau entries look like (E,L)");
    Plateau p;
    p.energy = parse_number(t.substr(1, comma - 1), line);
    p.length = parse_number(t.substr(comma + 1, t.size() - comma - 2), line);
    out.push_back(p);
  }
  if (out.empty()) throw ScenarioError(line, "expected at least one plateau");
  return out;
}

struct RawSection {
  int header_line = 0;
  std::map<std::string, std::pair<std::string, int>> entries;
};

PotentialComponent1D build_component(const ComponentSpec& spec, int line) {
  try {
    if (spec.kind == "harmonic") return build_harmonic(spec.b);
    if (spec.kind == "quartic") return build_quartic(spec.a, spec.b, spec.c);
    if (spec.kind == "plateau") return build_plateau(spec.plateaus);
    if (spec.kind == "power") return build_pure_power(spec.power_b, spec.power_I);
  } catch (const std::exception& e) {
    throw ScenarioError(line, std::string("invalid component: ") + e.what());
  }
  throw ScenarioError(line, "unknown kind '" + spec.kind + "'");
}

double highest_stationary_energy(const SeparableSystem& system) {
  double total = 0.0;
  for (const auto& comp : system.components) {
    double top = 0.0;
    if (comp.kind == PotentialKind::PlateauWell) {
      for (const auto& p : comp.plateaus) top = std::max(top, p.energy);
    } else if (comp.kind == PotentialKind::QuarticFamily) {
      for (const auto& sp : stationary_points_1d(comp))
        top = std::max(top, sp.energy);
    }
    total += top;
  }
  return total;
}

}  // namespace

ScenarioError::ScenarioError(int line, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ": " + message),
      line_(line) {}

Scenario parse_scenario(const std::string& text) {
  std::map<int, RawSection> systems;
  RawSection grids, outputs;
  RawSection* current = nullptr;
  std::string current_name;

  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ScenarioError(line_no, "unterminated section header");
      const std::string name = trim(line.substr(1, line.size() - 2));
      if (name == "grids") {
        current = &grids;
      } else if (name == "outputs") {
        current = &outputs;
      } else if (name.rfind("system.", 0) == 0) {
        const int n = parse_int(name.substr(7), line_no);
        if (n < 1) throw ScenarioError(line_no, "system index starts at 1");
        current = &systems[n];
      } else {
        throw ScenarioError(line_no, "unknown section [" + name + "]");
      }
      current->header_line = line_no;
      current_name = name;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ScenarioError(line_no, "expected key = value");
    if (current == nullptr)
      throw ScenarioError(line_no, "key outside any section");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (current->entries.count(key))
      throw ScenarioError(line_no, "duplicate key '" + key + "'");
    current->entries[key] = {value, line_no};
  }

  Scenario scenario;
  if (systems.empty()) throw ScenarioError(0, "f >= 1 required: no [system.N]");
  int expect = 1;
  for (const auto& [n, section] : systems) {
    if (n != expect)
      throw ScenarioError(section.header_line,
                          "system sections must be numbered 1..f without gaps");
    ++expect;
    ComponentSpec spec;
    auto it = section.entries.find("kind");
    if (it == section.entries.end())
      throw ScenarioError(section.header_line, "system section needs kind");
    spec.kind = it->second.first;
    std::vector<std::string> allowed{"kind"};
    if (spec.kind == "harmonic") {
      allowed.push_back("b");
    } else if (spec.kind == "quartic") {
      allowed.insert(allowed.end(), {"a", "b", "c"});
    } else if (spec.kind == "plateau") {
      allowed.push_back("plateaus");
    } else if (spec.kind == "power") {
      allowed.push_back("power");
    } else {
      throw ScenarioError(it->second.second,
                          "unknown kind '" + spec.kind + "'");
    }
    for (const auto& [key, entry] : section.entries) {
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
        throw ScenarioError(entry.second, "unknown key '" + key +
                                              "' for kind " + spec.kind);
    }
    for (const auto& [key, entry] : section.entries) {
      const auto& [value, vline] = entry;
      if (key == "kind") continue;
      if (key == "a") spec.a = parse_number(value, vline);
      if (key == "b") spec.b = parse_number(value, vline);
      if (key == "c") spec.c = parse_number(value, vline);
      if (key == "plateaus") spec.plateaus = parse_plateaus(value, vline);
      if (key == "power") {
        const auto comma = value.find(',');
        if (comma == std::string::npos)
          throw ScenarioError(vline, "power takes 'b,I'");
        spec.power_b = parse_number(value.substr(0, comma), vline);
        spec.power_I = parse_number(value.substr(comma + 1), vline);
      }
    }
    build_component(spec, section.header_line);  // validates parameters
    scenario.components.push_back(std::move(spec));
  }

  for (const auto& [key, entry] : grids.entries) {
    const auto& [value, vline] = entry;
    if (key == "beta_min") {
      scenario.beta_grid.min = parse_number(value, vline);
    } else if (key == "beta_max") {
      scenario.beta_grid.max = parse_number(value, vline);
    } else if (key == "beta_count") {
      scenario.beta_grid.count = parse_int(value, vline);
    } else if (key == "beta_spacing") {
      if (value == "linear") {
        scenario.beta_grid.log_spacing = false;
      } else if (value == "log") {
        scenario.beta_grid.log_spacing = true;
      } else {
        throw ScenarioError(vline, "beta_spacing is linear or log");
      }
    } else if (key == "energy_max") {
      scenario.energy_grid.max = parse_number(value, vline);
    } else if (key == "energy_cells") {
      scenario.energy_grid.cells = parse_int(value, vline);
    } else {
      throw ScenarioError(vline, "unknown key '" + key + "' in [grids]");
    }
  }
  for (const char* required :
       {"beta_min", "beta_max", "beta_count", "energy_max", "energy_cells"}) {
    if (!grids.entries.count(required))
      throw ScenarioError(grids.header_line ? grids.header_line : 0,
                          std::string("[grids] needs ") + required);
  }

  for (const auto& [key, entry] : outputs.entries) {
    const auto& [value, vline] = entry;
    OutputSpec& out = scenario.outputs;
    if (key == "canonical_sweep") {
      out.canonical_sweep = parse_bool(value, vline);
    } else if (key == "micro_sweep") {
      out.micro_sweep = parse_bool(value, vline);
    } else if (key == "caloric_curve") {
      out.caloric_curve = parse_bool(value, vline);
    } else if (key == "stationary_points") {
      out.stationary_points = parse_bool(value, vline);
    } else if (key == "singularity_report") {
      out.singularity_report = parse_bool(value, vline);
    } else if (key == "closed_form_checks") {
      out.closed_form_checks = parse_bool(value, vline);
    } else if (key == "distribution_betas") {
      out.distribution_betas = parse_list(value, vline);
    } else {
      throw ScenarioError(vline, "unknown key '" + key + "' in [outputs]");
    }
  }

  const BetaGridSpec& bg = scenario.beta_grid;
  const int gline = grids.header_line ? grids.header_line : 0;
  if (!(bg.min > 0.0)) throw ScenarioError(gline, "beta_min must be > 0");
  if (!(bg.max >= bg.min))
    throw ScenarioError(gline, "beta_max must be >= beta_min");
  if (bg.count < 1) throw ScenarioError(gline, "beta_count must be >= 1");
  if (bg.count == 1 && bg.max != bg.min)
    throw ScenarioError(gline, "beta_count 1 needs beta_max == beta_min");
  if (!(scenario.energy_grid.max > 0.0))
    throw ScenarioError(gline, "energy_max must be > 0");
  if (scenario.energy_grid.cells < 8)
    throw ScenarioError(gline, "energy_cells must be >= 8");
  for (double b : scenario.outputs.distribution_betas)
    if (!(b > 0.0))
      throw ScenarioError(outputs.header_line,
                          "distribution betas must be > 0");

  const SeparableSystem system = build_system(scenario);
  const double top = highest_stationary_energy(system);
  if (scenario.energy_grid.max <= top)
    scenario.warnings.push_back(
        "energy_max " + format_double(scenario.energy_grid.max) +
        " does not exceed the highest stationary energy " +
        format_double(top));
  return scenario;
}

std::string serialize_scenario(const Scenario& scenario) {
  std::ostringstream out;
  for (std::size_t i = 0; i < scenario.components.size(); ++i) {
    const ComponentSpec& c = scenario.components[i];
    out << "[system." << (i + 1) << "]\n";
    out << "kind = " << c.kind << '\n';
    if (c.kind == "harmonic") out << "b = " << format_double(c.b) << '\n';
    if (c.kind == "quartic")
      out << "a = " << format_double(c.a) << '\n'
          << "b = " << format_double(c.b) << '\n'
          << "c = " << format_double(c.c) << '\n';
    if (c.kind == "plateau") {
      out << "plateaus = ";
      for (std::size_t k = 0; k < c.plateaus.size(); ++k)
        out << (k ? ";" : "") << '(' << format_double(c.plateaus[k].energy)
            << ',' << format_double(c.plateaus[k].length) << ')';
      out << '\n';
    }
    if (c.kind == "power")
      out << "power = " << format_double(c.power_b) << ','
          << format_double(c.power_I) << '\n';
    out << '\n';
  }
  out << "[grids]\n";
  out << "beta_min = " << format_double(scenario.beta_grid.min) << '\n';
  out << "beta_max = " << format_double(scenario.beta_grid.max) << '\n';
  out << "beta_count = " << scenario.beta_grid.count << '\n';
  out << "beta_spacing = " << (scenario.beta_grid.log_spacing ? "log" : "linear")
      << '\n';
  out << "energy_max = " << format_double(scenario.energy_grid.max) << '\n';
  out << "energy_cells = " << scenario.energy_grid.cells << '\n';
  out << '\n';
  out << "[outputs]\n";
  const OutputSpec& o = scenario.outputs;
  auto flag = [&](const char* name, bool v) {
    if (v) out << name << " = true\n";
  };
  flag("canonical_sweep", o.canonical_sweep);
  flag("micro_sweep", o.micro_sweep);
  flag("caloric_curve", o.caloric_curve);
  flag("stationary_points", o.stationary_points);
  flag("singularity_report", o.singularity_report);
  flag("closed_form_checks", o.closed_form_checks);
  if (!o.distribution_betas.empty()) {
    out << "distribution_betas = ";
    for (std::size_t k = 0; k < o.distribution_betas.size(); ++k)
      out << (k ? ";" : "") << format_double(o.distribution_betas[k]);
    out << '\n';
  }
  return out.str();
}

SeparableSystem build_system(const Scenario& scenario) {
  SeparableSystem system;
  for (const auto& spec : scenario.components)
    system.components.push_back(build_component(spec, 0));
  return system;
}

std::vector<double> beta_values(const BetaGridSpec& grid) {
  std::vector<double> out;
  out.reserve(grid.count);
  if (grid.count == 1) {
    out.push_back(grid.min);
    return out;
  }
  if (grid.log_spacing) {
    const double l0 = std::log(grid.min), l1 = std::log(grid.max);
    for (int i = 0; i < grid.count; ++i)
      out.push_back(std::exp(l0 + (l1 - l0) * i / (grid.count - 1)));
  } else {
    for (int i = 0; i < grid.count; ++i)
      out.push_back(grid.min + (grid.max - grid.min) * i / (grid.count - 1));
  }
  out.front() = grid.min;
  out.back() = grid.max;
  return out;
}

namespace {

void parallel_for(std::size_t count, int threads,
                  const std::function<void(std::size_t)>& body) {
  if (threads <= 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  const auto n_threads = std::min<std::size_t>(threads, count);
  const std::size_t chunk = (count + n_threads - 1) / n_threads;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < n_threads; ++t) {
    const std::size_t lo = t * chunk, hi = std::min(count, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&body, lo, hi] {
      for (std::size_t i = lo; i < hi; ++i) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

struct StageLog {
  std::vector<std::pair<std::string, long>> wall_ms;
  std::vector<std::pair<std::string, std::string>> errors;
};

}  // namespace

RunResult run_scenario(const Scenario& scenario, const RunOptions& options) {
  namespace fs = std::filesystem;
  set_tolerance_profile(options.fast_profile ? ToleranceProfile::Fast
                                             : ToleranceProfile::Strict);
  const std::string config = serialize_scenario(scenario);
  char hash_hex[17];
  std::snprintf(hash_hex, sizeof hash_hex, "%016llx",
                static_cast<unsigned long long>(num::fnv1a(config)));
  RunResult result;
  const fs::path dir = fs::path(options.out_root) / ("run_" + std::string(hash_hex));
  fs::create_directories(dir);
  result.directory = dir.string();

  {
    std::ofstream cfg(dir / "scenario.cfg", std::ios::binary);
    cfg << config;
    result.files.push_back("scenario.cfg");
  }

  const SeparableSystem system = build_system(scenario);
  const std::vector<double> betas = beta_values(scenario.beta_grid);
  const OutputSpec& want = scenario.outputs;
  StageLog log;

  auto stage = [&](const char* name, bool enabled, auto&& fn) {
    if (!enabled) return;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      fn();
    } catch (const std::exception& e) {
      log.errors.emplace_back(name, e.what());
      result.errors.push_back(std::string(name) + ": " + e.what());
    }
    const auto t1 = std::chrono::steady_clock::now();
    log.wall_ms.emplace_back(
        name,
        std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count());
  };

  auto open_csv = [&](const std::string& basename) {
    std::ofstream out(dir / basename, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + basename);
    result.files.push_back(basename);
    return out;
  };

  stage("canonical_sweep", want.canonical_sweep, [&] {
    struct Row {
      double Z, C, dC, mean, var, third, var1;
    };
    std::vector<Row> rows(betas.size());
    SeparableSystem first_only;
    first_only.components.push_back(system.components.front());
    parallel_for(betas.size(), options.threads, [&](std::size_t i) {
      const double beta = betas[i];
      Row& r = rows[i];
      r.Z = partition_function(system, beta);
      const ThermalMoments m = potential_thermal_moments(system, beta);
      r.C = heat_capacity_canonical(system, beta);
      r.dC = dC_dbeta(system, beta);
      r.mean = m.mean;
      r.var = m.dispersion;
      r.third = m.third;
      r.var1 = potential_thermal_moments(first_only, beta).dispersion;
    });
    auto out = open_csv("canonical_sweep.csv");
    out << "beta,T,Z,lnZ,C_can,dC_dbeta,mean_V,var_V,skew_V,"
           "C_can_per_dof,beta2_varV1\n";
    const double fd = static_cast<double>(system.f());
    for (std::size_t i = 0; i < betas.size(); ++i) {
      const Row& r = rows[i];
      const double b = betas[i];
      out << format_double(b) << ',' << format_double(1.0 / b) << ','
          << format_double(r.Z) << ',' << format_double(std::log(r.Z)) << ','
          << format_double(r.C) << ',' << format_double(r.dC) << ','
          << format_double(r.mean) << ',' << format_double(r.var) << ','
          << format_double(r.third) << ',' << format_double(r.C / fd) << ','
          << format_double(b * b * r.var1) << '\n';
    }
  });

  // Shared level-density grid for the energy-domain outputs.
  LevelDensity density;
  bool have_density = false;
  const bool need_density = want.micro_sweep || want.caloric_curve ||
                            want.singularity_report ||
                            !want.distribution_betas.empty();
  stage("density_grid", need_density, [&] {
    density = system_density(system, scenario.energy_grid.max,
                             scenario.energy_grid.cells);
    have_density = true;
  });

  stage("caloric_curve", want.caloric_curve, [&] {
    if (!have_density) throw std::runtime_error("density grid unavailable");
    const CaloricCurve curve = build_caloric_curve(density);
    auto out = open_csv("caloric_curve.csv");
    out << "E,beta_mic,branch_id\n";
    for (std::size_t b = 0; b < curve.branches.size(); ++b) {
      const CaloricBranch& br = curve.branches[b];
      for (std::size_t k = br.first; k <= br.last; ++k)
        out << format_double(curve.samples[k].E) << ','
            << format_double(curve.samples[k].beta) << ',' << b << '\n';
    }
  });

  stage("micro_sweep", want.micro_sweep, [&] {
    if (!have_density) throw std::runtime_error("density grid unavailable");
    std::vector<std::vector<MicroCapacity>> rows(betas.size());
    parallel_for(betas.size(), options.threads, [&](std::size_t i) {
      rows[i] = heat_capacity_micro(density, betas[i]);
    });
    auto out = open_csv("micro_sweep.csv");
    out << "beta,branch_id,C_mic,E\n";
    for (std::size_t i = 0; i < betas.size(); ++i)
      for (const MicroCapacity& mc : rows[i])
        out << format_double(betas[i]) << ',' << mc.branch << ','
            << format_double(mc.C) << ',' << format_double(mc.E) << '\n';
  });

  stage("distribution", !want.distribution_betas.empty(), [&] {
    if (!have_density) throw std::runtime_error("density grid unavailable");
    for (double beta : want.distribution_betas) {
      const ThermalDistribution dist = thermal_distribution(density, beta);
      auto out = open_csv("distribution_beta_" + format_double(beta) + ".csv");
      out << "E,w\n";
      for (std::size_t j = 0; j < dist.energies.size(); ++j)
        out << format_double(dist.energies[j]) << ','
            << format_double(dist.values[j]) << '\n';
    }
  });

  const bool any_plateau =
      std::any_of(system.components.begin(), system.components.end(),
                  [](const PotentialComponent1D& c) {
                    return c.kind == PotentialKind::PlateauWell;
                  });
  const bool all_polynomial =
      std::all_of(system.components.begin(), system.components.end(),
                  [](const PotentialComponent1D& c) {
                    return c.kind == PotentialKind::Harmonic ||
                           c.kind == PotentialKind::QuarticFamily;
                  });
  const bool plateau_plus_harmonic =
      any_plateau &&
      std::all_of(system.components.begin(), system.components.end(),
                  [](const PotentialComponent1D& c) {
                    return c.kind == PotentialKind::PlateauWell ||
                           c.kind == PotentialKind::Harmonic;
                  });

  auto predictions_for_system = [&]() {
    if (all_polynomial)
      return predict_singularities(enumerate_stationary_points(system),
                                   system.f());
    if (plateau_plus_harmonic) {
      std::vector<Plateau> all;
      for (const auto& comp : system.components)
        if (comp.kind == PotentialKind::PlateauWell)
          for (const auto& p : comp.plateaus) all.push_back(p);
      return predict_plateau_singularities(all, system.f());
    }
    throw std::runtime_error(
        "singularity prediction supports polynomial systems and plateau "
        "wells with harmonic companions");
  };

  stage("stationary_points", want.stationary_points, [&] {
    const std::vector<StationaryPointInfo> points =
        enumerate_stationary_points(system);
    // Group identical (E_c, r, degenerate) rows; keeps r visible, unlike the
    // type-level merge in the singularity report.
    struct GroupedRow {
      double E_c;
      int r;
      bool degenerate;
      int multiplicity;
    };
    std::vector<GroupedRow> grouped;
    for (const auto& pt : points) {
      bool absorbed = false;
      for (auto& g : grouped)
        if (g.r == pt.r && g.degenerate == pt.degenerate &&
            std::abs(g.E_c - pt.E_c) < 1e-9 * (1.0 + std::abs(pt.E_c))) {
          ++g.multiplicity;
          absorbed = true;
          break;
        }
      if (!absorbed) grouped.push_back({pt.E_c, pt.r, pt.degenerate, 1});
    }
    auto out = open_csv("stationary_points.csv");
    out << "E_c,r,degenerate,predicted_type,multiplicity\n";
    for (const auto& g : grouped) {
      SingularityType type;
      if (g.degenerate) {
        type = SingularityType::UnclassifiedDegenerate;
      } else {
        type = g.r % 2 == 0 ? SingularityType::JumpDerivative
                            : SingularityType::LogDerivative;
      }
      out << format_double(g.E_c) << ',' << g.r << ','
          << (g.degenerate ? "true" : "false") << ','
          << singularity_type_name(type) << ',' << g.multiplicity << '\n';
    }
  });

  stage("singularity_report", want.singularity_report, [&] {
    if (!have_density) throw std::runtime_error("density grid unavailable");
    const std::vector<PredictedSingularity> predictions =
        predictions_for_system();
    const int order = std::min(system.f() - 1, 4);
    auto out = open_csv("singularity_report.csv");
    out << "E_c,predicted_type,sign,multiplicity,order,located_E,"
           "detected_type,conclusive,amplitude,rms_none,rms_best,"
           "resolution_bound\n";
    for (const auto& p : predictions) {
      if (p.E_c >= density.grid_max()) continue;
      const DetectionReport rep = detect_nonanalyticity(density, p.E_c, order);
      const double rms_best =
          std::min({rep.rms_jump, rep.rms_log, rep.rms_invsqrt});
      out << format_double(p.E_c) << ',' << singularity_type_name(p.type)
          << ',' << p.sign << ',' << p.multiplicity << ',' << order << ','
          << format_double(rep.located_E) << ','
          << singularity_type_name(rep.detected) << ','
          << (rep.conclusive ? "true" : "false") << ','
          << format_double(rep.amplitude) << ','
          << format_double(rep.rms_none) << ',' << format_double(rms_best)
          << ',' << format_double(rep.resolution_bound) << '\n';
    }
  });

  stage("closed_form_checks", want.closed_form_checks, [&] {
    auto out = open_csv("closed_form_checks.csv");
    out << "check,x,reference,computed,rel_error\n";
    constexpr double kPi = 3.14159265358979323846;
    for (const auto& comp : system.components) {
      if (comp.kind == PotentialKind::QuarticFamily && comp.a == 0.0 &&
          comp.b == -2.0 && comp.c == 1.0) {
        // Quadrature partition function against the Bessel closed form.
        SeparableSystem sub;
        sub.components.push_back(comp);
        std::vector<double> check_betas = betas;
        if (check_betas.size() > 20) {
          std::vector<double> thin;
          for (std::size_t i = 0; i < 20; ++i)
            thin.push_back(
                check_betas[i * (check_betas.size() - 1) / 19]);
          check_betas = thin;
        }
        for (double beta : check_betas) {
          const double reference = std::exp(-beta * comp.v) /
                                   std::sqrt(2.0 * kPi * beta) *
                                   closed_form_Z_degenerate_double_well(beta);
          const double computed = partition_function(sub, beta);
          out << "bessel_partition," << format_double(beta) << ','
              << format_double(reference) << ',' << format_double(computed)
              << ','
              << format_double(std::abs(computed - reference) /
                               std::abs(reference))
              << '\n';
        }
      }
      if (comp.kind == PotentialKind::PlateauWell) {
        // Laplace transform of the one-DoF grid density against the exact
        // mixture sum (times the kinetic Gaussian factor).
        const LevelDensity grid = grid_density_1d(
            comp, scenario.energy_grid.max, scenario.energy_grid.cells);
        for (double beta : {0.5, 1.0, 2.0, 5.0}) {
          double mixture = 0.0;
          for (const auto& p : comp.plateaus)
            mixture += p.length * std::exp(-beta * p.energy);
          const double reference = mixture / std::sqrt(2.0 * kPi * beta);
          const double computed = laplace_transform(grid, beta);
          out << "plateau_laplace," << format_double(beta) << ','
              << format_double(reference) << ',' << format_double(computed)
              << ','
              << format_double(std::abs(computed - reference) /
                               std::abs(reference))
              << '\n';
        }
      }
    }
  });

  {
    std::ofstream man(dir / "manifest.txt", std::ios::binary);
    man << "version = " << kVersion << '\n';
    man << "config_hash = " << hash_hex << '\n';
    man << "f = " << system.f() << '\n';
    man << "beta_min = " << format_double(scenario.beta_grid.min) << '\n';
    man << "beta_max = " << format_double(scenario.beta_grid.max) << '\n';
    man << "beta_count = " << scenario.beta_grid.count << '\n';
    man << "beta_spacing = "
        << (scenario.beta_grid.log_spacing ? "log" : "linear") << '\n';
    man << "energy_max = " << format_double(scenario.energy_grid.max) << '\n';
    man << "energy_cells = " << scenario.energy_grid.cells << '\n';
    man << "tolerance_profile = " << (options.fast_profile ? "fast" : "strict")
        << '\n';
    man << "quadrature_rel_tol = "
        << (options.fast_profile ? "1e-8" : "1e-13") << '\n';
    man << "threads = " << options.threads << '\n';
    for (std::size_t i = 0; i < scenario.warnings.size(); ++i)
      man << "warning_" << i << " = " << scenario.warnings[i] << '\n';
    // Wall times vary run to run; every numeric CSV above is deterministic.
    for (const auto& [name, ms] : log.wall_ms)
      man << "wall_ms_" << name << " = " << ms << '\n';
    for (const auto& [name, msg] : log.errors)
      man << "error_" << name << " = " << msg << '\n';
    result.files.push_back("manifest.txt");
  }
  return result;
}

}  // namespace caloric
