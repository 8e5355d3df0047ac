#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "annihilate/hjsolver.hpp"
#include "annihilate/integrator.hpp"
#include "annihilate/levelset.hpp"
#include "annihilate/particles.hpp"

namespace annihilate {

// Analytic initial data u0(x; eps). Only `pair_bump` depends on eps.
struct InitialDatum {
  std::string id;
  double window_lo = -1.0;  // u0 is constant outside [window_lo, window_hi]
  double window_hi = 1.0;   // (pair_bump: crossings lie inside for a >= 1/100)
  double left_value = 0.0;  // limit of u0 at -infinity
  std::function<double(double x, double eps)> u0;
  // Exact solution of the scaled problem, when known.
  std::function<double(double t, double x, double eps)> exact;
};

// Ids: pair_bump, sigmoid, double_bump, constant.
InitialDatum catalog_datum(const std::string& id);
std::vector<std::string> catalog_ids();

// Uniform +1 lattice x_i = i, i = 1..n, coupling 1/n.
ParticleState lattice_state(std::size_t n);

// Crossings of the levels eps (k + a) by u0 on [lo, hi]; charge is the sign
// of the slope. Coupling eps = 1/n. With base u0(-inf), from_particles(state,
// base) is within eps of u0.
ParticleState sample_particles(const std::function<double(double)>& u0, std::size_t n, double a,
                               double lo, double hi, std::size_t scan_points = 4096);

// Exact sup over [lo, hi] of |u_n - ref| for a piecewise-linear reference.
double sup_distance(const StepFunction& un, const GridFunction& ref, double lo, double hi);
// Same for a callable reference that is monotone between consecutive
// breakpoints of un and the given extra points.
double sup_distance(const StepFunction& un, const std::function<double(double)>& ref, double lo,
                    double hi, const std::vector<double>& extra_points = {});

struct ExperimentSpec {
  std::string datum = "sigmoid";
  std::vector<std::size_t> ladder = {8, 16, 32, 64, 128};
  double a = 0.5;
  double t_end = 0.25;
  std::size_t snapshots = 10;  // uniform in (0, t_end], plus t = 0
  SchemeConfig scheme;         // reference grid; t_end/snapshot_times are overwritten
  IntegratorConfig integrator; // t_end/sample_times are overwritten
  std::size_t scan_points = 8192;
  double slack = 1.1;
  int margin_cells = 2;
  unsigned threads = 1;
};

ExperimentSpec default_experiment(const std::string& datum);

struct ConvergenceRow {
  std::size_t n = 0;
  double e_n = 0.0;
  std::size_t events = 0;
  double runtime_s = 0.0;
  std::size_t particles = 0;
  // Max deviation of crossings from the exact ones (pair_bump only, else NaN).
  double crossing_error = 0.0;
  std::string error;  // non-empty if the row failed
};

struct ConvergenceTable {
  std::string datum;
  std::vector<ConvergenceRow> rows;
  std::vector<double> snapshot_times;
  HJSolution reference;   // empty when an exact solution is used
  bool monotone = false;  // e_n non-increasing up to the slack factor
  // Final-time profiles per row on the reference grid / comparison points.
  std::vector<std::vector<double>> final_profiles;
  std::vector<double> profile_x;
};

ConvergenceTable run_convergence(const ExperimentSpec& spec);

struct InvariantResult {
  std::string name;
  bool pass = true;
  double worst = 0.0;      // worst measured statistic (meaning per invariant)
  double threshold = 0.0;  // bound the statistic is compared with
  std::size_t checked = 0;
  bool informational = false;  // reported, not part of the pass/fail verdict
  double aux = 0.0;            // secondary statistic (dM_lipschitz: fitted C)
  std::string detail;
};

struct PropertyReport {
  std::uint64_t seed = 0;
  std::size_t runs = 0;
  std::size_t runs_with_events = 0;
  std::size_t total_events = 0;
  std::vector<InvariantResult> invariants;
  bool pass() const;
  const InvariantResult* find(const std::string& name) const;
};

struct PropertySuiteConfig {
  std::uint64_t seed = 1;
  std::vector<std::size_t> sizes = {4, 8, 16, 32};
  std::size_t runs = 100;
  IntegratorConfig integrator;  // tolerances; t_end and samples set per run
  std::size_t uniform_samples = 40;
  double stencil = 1e-6;  // relative half-width of the residual stencils
};

// Evolves `init` to config.t_end, sampling uniform times with residual
// stencils of relative half-width `stencil`, and runs check_trajectory.
Trajectory check_initial_state(const ParticleState& init, IntegratorConfig config,
                               std::size_t uniform_samples, double stencil,
                               std::vector<InvariantResult>& out);

// Invariant battery on random configurations plus fixed fixtures.
PropertyReport run_property_suite(const PropertySuiteConfig& config);

// Checks of one trajectory; appends/merges into `out` by name.
void check_trajectory(const Trajectory& traj, const std::vector<double>& uniform_times,
                      double stencil, std::vector<InvariantResult>& out);

// Worst |d+(t)^2 - (1 + 8 gamma n t/(n^2 - 1))| over the samples of an
// evolved lattice.
double lattice_equality_deviation(const Trajectory& traj);

// Slope of log(cluster extent) against log(tau - t) before one event, fitted
// on tau - t in [w, 100 w] with w = 1e-9 max(1, tau). NaN if < 3 points.
double collision_exponent(const Trajectory& traj, std::size_t event_index,
                          std::size_t* points = nullptr);

// sup over common sample times of d_M between two trajectories.
double sup_dM(const Trajectory& a, const Trajectory& b);

// Three separated opposite pairs colliding at different times.
ParticleState three_collision_fixture();

// Evolves the fixture and perturbations of size delta (direction fixed),
// returning sup_t d_M for each delta.
std::vector<double> stability_study(const ParticleState& base, const std::vector<double>& deltas,
                                    const IntegratorConfig& config);

// Largest change in the relative order of crossings of two systems sampled
// with offsets a1 and a2 and evolved independently: returns the number of
// cross-system pairs whose order flips between two sample times.
std::size_t offset_order_violations(const std::function<double(double)>& u0, std::size_t n,
                                    double a1, double a2, double lo, double hi,
                                    const IntegratorConfig& config);

}  // namespace annihilate
