#pragma once

#include <cstddef>
#include <vector>

#include "annihilate/integrator.hpp"
#include "annihilate/particles.hpp"

namespace annihilate {

struct Jump {
  double location = 0.0;
  double size = 0.0;
};

// Piecewise-constant function base + sum_{x_i <= x} jump_i (right-continuous,
// so the Heaviside convention is H(0) = 1). `eps` is the level spacing.
struct StepFunction {
  std::vector<Jump> jumps;  // sorted by location, strictly increasing
  double base = 0.0;
  double eps = 1.0;

  double operator()(double x) const;
  double left_limit(double x) const;
  // Upper and lower semicontinuous envelopes.
  double upper(double x) const;
  double lower(double x) const;
  double sup_norm() const;
  double total_variation() const;
};

// Jumps b_i * gamma at the charged positions; eps = gamma.
StepFunction from_particles(const ParticleState& state, double base = 0.0);

// Builds a step function from unsorted jumps, merging equal locations and
// dropping zero jumps.
StepFunction make_step_function(std::vector<Jump> jumps, double base, double eps);

enum class Staircase { Upper, Lower };

// Upper: eps (floor(alpha/eps) + 1/2). Lower: eps ceil(alpha/eps) - eps/2.
double staircase(double alpha, double eps, Staircase variant);

// -sum_{j != i} jump_j / (x_i - x_j) at the i-th jump of u.
double nonlocal_operator_closed_form(const StepFunction& u, std::size_t at_jump);

// Exact value of int_{|z| >= rho} E*_eps[u(x+z) - u^*(x)] dz / z^2 for any
// rho > 0. The integrand is piecewise constant in z.
double far_field_integral(const StepFunction& u, double x, double rho);

// Principal-value integral of E*_eps[u(x+z) - u^*(x)] / z^2 over the line at a
// jump location x. The part inside B_rho vanishes by symmetry, so rho must be
// below the distance to the nearest other jump (JumpTooClose otherwise).
// rho <= 0 selects half of that distance.
double nonlocal_operator_quadrature(const StepFunction& u, double x, double rho = 0.0);

struct ResidualReport {
  double max_residual = 0.0;
  std::size_t checked = 0;   // (time, particle) pairs compared
  std::size_t skipped = 0;   // sample times skipped near events
};

// Tracks jump locations of u_n across consecutive samples and compares their
// centred-difference velocity with -b_i times the nonlocal operator. Empty
// `sample_times` checks every interior sample.
ResidualReport hje_residual(const Trajectory& traj, const std::vector<double>& sample_times = {});

}  // namespace annihilate
