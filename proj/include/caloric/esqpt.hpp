#pragma once

#include <string>
#include <vector>

#include "caloric/density.hpp"
#include "caloric/potential.hpp"

namespace caloric {

// One stationary point of the full f-DoF Hamiltonian flow (all momenta 0,
// every coordinate at a 1-D stationary point of its component).
struct StationaryPointInfo {
  std::vector<int> choice;  // per component, index into its 1-D point list
  double E_c = 0.0;         // sum of component stationary energies
  int r = 0;                // count of components sitting at a 1-D maximum
  bool degenerate = false;
};

enum class SingularityType {
  None,
  JumpDerivative,     // jump of the (f-1)-th derivative of rho
  LogDerivative,      // log divergence of the (f-1)-th derivative
  InverseSqrt,        // one-sided (E - E_c)^(-1/2) divergence
  UnclassifiedDegenerate,
};

std::string singularity_type_name(SingularityType type);

struct PredictedSingularity {
  double E_c = 0.0;
  SingularityType type = SingularityType::None;
  int sign = 0;              // (-1)^(r/2) for even r, (-1)^((r+1)/2) for odd
  int derivative_order = 0;  // f - 1
  int multiplicity = 1;      // coincident stationary points merged
  bool degenerate = false;
};

// Cartesian product of per-component stationary points, sorted by E_c.
// Rejects PlateauWell and PurePower components.
std::vector<StationaryPointInfo> enumerate_stationary_points(
    const SeparableSystem& system);

// Even r gives a jump of the (f-1)-th derivative with sign (-1)^(r/2);
// odd r a log divergence with sign (-1)^((r+1)/2). Coincident E_c with
// identical type and sign merge with multiplicity.
std::vector<PredictedSingularity> predict_singularities(
    const std::vector<StationaryPointInfo>& points, int f);

// Plateau wells: every onset energy E_k carries a one-sided inverse-sqrt
// divergence of the (f-1)-th derivative.
std::vector<PredictedSingularity> predict_plateau_singularities(
    const std::vector<Plateau>& plateaus, int f);

struct DetectionReport {
  double E_c = 0.0;        // candidate fed in
  double located_E = 0.0;  // best-fitting location within the scan window
  SingularityType detected = SingularityType::None;
  double rms_none = 0.0;     // shared-line residual (null model)
  double rms_jump = 0.0;     // per-side lines
  double rms_log = 0.0;      // A ln|E - E_c| + per-side offsets
  double rms_invsqrt = 0.0;  // right-sided A (E - E_c)^(-1/2) + offsets
  double amplitude = 0.0;    // fitted strength of the winning model
  bool conclusive = false;
  double resolution_bound = 0.0;  // half-width of the blind window
};

// Fits singularity models to the order-th finite-difference derivative of
// rho on flanking nodes outside the exclusion window. order must be at most
// f - 1 and at most 4.
DetectionReport detect_nonanalyticity(const LevelDensity& density, double E_c,
                                      int order);

}  // namespace caloric
