#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "fembem/eigen_tools.hpp"
#include "fembem/filters.hpp"
#include "fembem/solver.hpp"

namespace fembem {

/// Fixed: p for every k. Log: p = max(p_min, ceil(c2 ln k) + offset).
enum class DegreeRule { Fixed, Log };
std::string to_string(DegreeRule r);

struct ExperimentConfig {
  Formulation formulation = Formulation::Conforming;
  std::string geometry = "circle";       // circle | kite
  double radius = 0.4;
  std::string coefficients = "disk";     // disk (n0 inside, Mie truth) | free (n = 1, Mie truth) | smooth (manufactured)
  double n0 = 1.5;
  double incident_angle = 0.0;
  std::vector<double> ks{4.0};
  std::vector<int> levels{1, 2, 3, 4};
  DegreeRule degree_rule = DegreeRule::Fixed;
  int p = 2;
  int p_min = 2;
  int p_offset = 1;
  double c1 = 0.5, c2 = 1.0;
  PenaltyParams pen;
  NormRealization realization = NormRealization::Fourier;
  SolverKind solver = SolverKind::Auto;
  std::string out_dir = "results";
  std::uint64_t seed = 1;
  // asserted criteria
  double ratio_bound = 5.0;
  double eoc_min = 1.7, eoc_max = 2.3;
  double garding_ratio_bound = 2.0;
  double continuity_exponent_bound = 0.3;
  double t_exponent_bound = 4.3;
  int eps_grid = 20;
  // negative control of the quasi-optimality sweep (p <= 0 disables it)
  double control_k = 16.0;
  int control_p = 1;
  double control_khp = 2.0;
  /// Garding coercivity is asserted only when true (false for deliberately small penalties).
  bool assert_garding = true;

  /// Degree at wavenumber k.
  int degree(double k) const;
  /// Coarsest level in `levels` with k h / p <= c1 (the finest if none qualifies).
  int resolved_level(double k, int p) const;
  void validate() const;
};

/// Keys missing from the JSON object keep their values in `base`.
ExperimentConfig config_from_json(const std::string& text, ExperimentConfig base = {});
std::string config_to_json(const ExperimentConfig& c);
ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {});

/// One row of results. Unused numeric fields stay NaN.
struct RunRecord {
  std::string experiment, formulation, geometry, coefficients, realization;
  double k = 0.0;
  int level = -1, p = 0;
  double n0 = 0.0, pen_a = 0.0, pen_b = 0.0, pen_d = 0.0;
  std::uint64_t seed = 0;
  double h = 0.0, khp = 0.0;
  int ndof_u = 0, ndof_m = 0, ndof_ext = 0;
  double residual = 0.0;
  int valid = 1;
  double error = kNaN, error_vol = kNaN, error_m = kNaN, error_ext = kNaN;
  double best = kNaN, ratio = kNaN, eoc = kNaN, eoc_best = kNaN;
  double garding_min = kNaN, garding_max = kNaN, eps = kNaN;
  double norm_T = kNaN, norm_T_theta = kNaN;
  double inverse_constant = kNaN;
  double value = kNaN;  // experiment-specific measurement (jump error, Calderon residual, filter constant)
  double value2 = kNaN;
  // wall times, not part of the deterministic output
  double t_volume = 0.0, t_bem = 0.0, t_solve = 0.0, t_measure = 0.0;

  static constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
};

/// Criterion verdict attached to an experiment; unasserted verdicts are reported but never fail a run.
struct Verdict {
  std::string name;
  bool pass = false;
  std::string detail;
  bool asserted = true;
};

struct ExperimentResult {
  std::vector<RunRecord> records;
  std::vector<Verdict> verdicts;
  bool pass() const;
};

/// Least-squares slope of log y against log x.
double fit_exponent(const std::vector<double>& x, const std::vector<double>& y);

/// Assembled problem of one (k, level, p) run.
struct Discretization {
  CurvedMesh mesh;
  BoundaryMesh bmesh;
  SpaceTriple spaces;
  VolumeForms forms;
  BemOperators ops, ops0;
  CoupledSystem T;
  RVector mu;
  double t_volume = 0.0, t_bem = 0.0;
};
Discretization discretize(const ExperimentConfig& c, double k, int level, int p);

/// h-convergence against the exact solution: error and best approximation in the theorem norm
/// (EnergyN for conforming, DGPlus for dG) with EOCs between consecutive levels.
ExperimentResult run_convergence_study(const ExperimentConfig& c);
/// k sweep under the resolution rule plus the negative control; ratios error / best approximation.
ExperimentResult run_quasioptimality_sweep(const ExperimentConfig& c);
/// Minimal generalized eigenvalue of the Garding part of T + Theta against the energy Gram matrix per k.
ExperimentResult run_garding_experiment(const ExperimentConfig& c);
/// Energy-norm operator norms of T and T + Theta per k with fitted growth exponents.
ExperimentResult run_continuity_experiment(const ExperimentConfig& c);
/// Boundary filters on mixed-mode data: split identity, zero mean and the bound constant per k.
ExperimentResult run_filter_experiment(const ExperimentConfig& c);
/// Jump relations of the potentials for the levels of the config (k = first k, p = config p).
ExperimentResult run_jump_experiment(const ExperimentConfig& c);
/// Calderon residual for the levels of the config.
ExperimentResult run_calderon_experiment(const ExperimentConfig& c);
/// Adjoint-consistency residual for 20 random discrete triples at the first (k, level).
ExperimentResult run_adjoint_experiment(const ExperimentConfig& c);
/// Inverse-inequality constant over levels (at p) and over p = 1..4 (at the middle level).
ExperimentResult run_inverse_experiment(const ExperimentConfig& c);

/// Dispatch by name: converge, quasiopt, garding, continuity, filters, jumps, calderon, adjoint, inverse.
ExperimentResult run_experiment(const std::string& name, const ExperimentConfig& c);
std::vector<std::string> experiment_names();
/// Preset used when no config file is given (the acceptance settings of each experiment).
ExperimentConfig default_config(const std::string& name);

}  // namespace fembem
