#pragma once

#include <cstddef>
#include <limits>
#include <memory>
#include <utility>
#include <vector>

#include "annihilate/errors.hpp"
#include "annihilate/particles.hpp"

namespace annihilate {

struct EventRecord {
  double tau = 0.0;
  double y = 0.0;
  std::vector<std::size_t> cluster;
  std::vector<int> pre_charges;
  std::vector<int> post_charges;
};

struct IntegratorConfig {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  // Gap below which approaching opposite charges are merged. Values <= 0 mean
  // 1e-7 times the spread of the initial charged particles.
  double cluster_gap = 0.0;
  double max_step = std::numeric_limits<double>::infinity();
  double t_end = 1.0;
  // Safety factor sigma of the collision cap dt <= sigma g^2 / (4 gamma).
  double collision_safety = 0.5;
  // The integrator lands exactly on these times and records a snapshot.
  std::vector<double> sample_times;
  // Also record the state after every accepted step and around every event.
  bool record_steps = false;
  std::size_t max_steps = 50'000'000;
};

struct Trajectory {
  std::vector<ParticleState> samples;
  std::vector<EventRecord> events;
  IntegratorConfig config;
};

// Thrown by evolve; carries the trajectory computed before the failure.
class EvolutionError : public Error {
 public:
  EvolutionError(const Error& cause, Trajectory partial)
      : Error(cause.code(), cause.what()),
        partial_(std::make_shared<Trajectory>(std::move(partial))) {}
  const Trajectory& partial() const { return *partial_; }

 private:
  std::shared_ptr<Trajectory> partial_;
};

struct StepResult {
  ParticleState state;
  double dt = 0.0;
};

// Adaptive Dormand-Prince 5(4) stepper. Keeps the step-size estimate and the
// last derivative (first-same-as-last) between calls.
class Stepper {
 public:
  explicit Stepper(IntegratorConfig config);

  // Advances by at most dt_max. Returns the accepted step.
  StepResult advance(const ParticleState& state, double dt_max);

  std::size_t accepted() const { return accepted_; }
  std::size_t rejected() const { return rejected_; }

 private:
  IntegratorConfig config_;
  double dt_hint_ = 0.0;
  std::vector<double> fsal_x_;
  std::vector<int> fsal_b_;
  std::vector<double> fsal_v_;
  std::size_t accepted_ = 0;
  std::size_t rejected_ = 0;
};

// One adaptive step from a fresh stepper.
StepResult step(const ParticleState& state, double dt_max, const IntegratorConfig& config);

// Cluster threshold actually used for a given initial state.
double effective_cluster_gap(const ParticleState& initial, const IntegratorConfig& config);

// Maximal groups of neighbouring charged particles linked by gaps below
// cluster_gap that are approaching each other. Size-1 groups are omitted.
std::vector<std::vector<std::size_t>> detect_cluster(const ParticleState& state,
                                                     double cluster_gap);
std::vector<std::vector<std::size_t>> detect_cluster(const ParticleState& state,
                                                     const IntegratorConfig& config);

// Merges a cluster at its mean position. The event time is extrapolated
// from the cluster's second moment; the returned state keeps state.time.
std::pair<ParticleState, EventRecord> resolve_annihilation(
    const ParticleState& state, const std::vector<std::size_t>& cluster,
    const IntegratorConfig& config);

Trajectory evolve(const ParticleState& initial, const IntegratorConfig& config);

}  // namespace annihilate
