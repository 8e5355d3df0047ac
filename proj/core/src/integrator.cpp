#include "annihilate/integrator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <sstream>

#include "annihilate/detail/summation.hpp"

namespace annihilate {
namespace {

// Dormand-Prince 5(4) tableau.
constexpr std::array<double, 7> kC = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
constexpr std::array<double, 7> kB = {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192,
                                      -2187.0 / 6784, 11.0 / 84, 0.0};
// Difference between the 5th and embedded 4th order weights.
constexpr std::array<double, 7> kE = {71.0 / 57600, 0.0, -71.0 / 16695, 71.0 / 1920,
                                      -17253.0 / 339200, 22.0 / 525, -1.0 / 40};

// Velocities of the charged particles idx at positions x (charged entries
// only, indexed like idx). Returns false on coincident positions.
bool charged_velocities(const std::vector<double>& x, const std::vector<int>& b, double gamma,
                        std::vector<double>& out) {
  const std::size_t m = x.size();
  out.assign(m, 0.0);
  for (std::size_t a = 0; a < m; ++a) {
    detail::CompensatedSum<double> sum;
    for (std::size_t c = 0; c < m; ++c) {
      if (c == a) continue;
      const double d = x[a] - x[c];
      if (d == 0.0) return false;
      sum += static_cast<double>(b[a] * b[c]) / d;
    }
    out[a] = gamma * sum.value();
    if (!std::isfinite(out[a])) return false;
  }
  return true;
}

bool strictly_increasing(const std::vector<double>& x) {
  for (std::size_t a = 0; a + 1 < x.size(); ++a)
    if (!(x[a + 1] > x[a])) return false;
  return true;
}

}  // namespace

Stepper::Stepper(IntegratorConfig config) : config_(std::move(config)) {}

StepResult Stepper::advance(const ParticleState& state, double dt_max) {
  if (!(dt_max > 0.0)) throw InvalidState("dt_max must be positive");
  const std::vector<std::size_t> idx = charged_indices(state);
  const std::size_t m = idx.size();
  StepResult res{state, dt_max};
  if (m < 2) {
    res.state.time = state.time + dt_max;
    ++accepted_;
    return res;
  }

  std::vector<double> x0(m), g(m, std::numeric_limits<double>::infinity());
  std::vector<int> b(m);
  for (std::size_t a = 0; a < m; ++a) {
    x0[a] = state.positions[idx[a]];
    b[a] = state.charges[idx[a]];
  }
  double g_opp = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a + 1 < m; ++a) {
    const double d = x0[a + 1] - x0[a];
    g[a] = std::min(g[a], d);
    g[a + 1] = std::min(g[a + 1], d);
    if (b[a] != b[a + 1]) g_opp = std::min(g_opp, d);
  }
  const double gamma = state.coupling;

  std::array<std::vector<double>, 7> k;
  if (fsal_x_ == x0 && fsal_b_ == b) {
    k[0] = fsal_v_;
  } else if (!charged_velocities(x0, b, gamma, k[0])) {
    throw NonFiniteForce("coincident charged particles at t = " + std::to_string(state.time));
  }

  const double cap = config_.collision_safety * g_opp * g_opp / (4.0 * gamma);
  const double dt_lim = std::min({dt_max, config_.max_step, cap});
  double dt = dt_lim;
  if (dt_hint_ > 0.0) {
    dt = std::min(dt_hint_, dt_lim);
  } else {
    double vmax = 0.0, gmin = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < m; ++a) {
      vmax = std::max(vmax, std::abs(k[0][a]));
      gmin = std::min(gmin, g[a]);
    }
    if (vmax > 0.0) dt = std::min(dt, 0.01 * gmin / vmax);
  }

  std::vector<double> xs(m), y5(m);
  for (;;) {
    const double t_floor = 4.0 * std::max(std::abs(std::nextafter(state.time, INFINITY) - state.time),
                                          std::numeric_limits<double>::min());
    if (!(dt > t_floor)) {
      std::ostringstream os;
      os << "step size collapsed to " << dt << " at t = " << state.time
         << " (smallest opposite gap " << g_opp << ")";
      throw StepSizeUnderflow(os.str());
    }
    bool ok = true;
    for (int s = 1; s < 7 && ok; ++s) {
      for (std::size_t a = 0; a < m; ++a) {
        double inc = 0.0;
        for (int r = 0; r < s; ++r) inc += kA[s][r] * k[r][a];
        xs[a] = x0[a] + dt * inc;
      }
      ok = strictly_increasing(xs) && charged_velocities(xs, b, gamma, k[s]);
    }
    double err = 0.0;
    if (ok) {
      // Stage 7 is evaluated at the 5th order solution (FSAL).
      y5 = xs;
      for (std::size_t a = 0; a < m; ++a) {
        double e = 0.0;
        for (int r = 0; r < 7; ++r) e += kE[r] * k[r][a];
        const double scale = config_.abs_tol + config_.rel_tol * g[a];
        err = std::max(err, std::abs(dt * e) / scale);
      }
      ok = std::isfinite(err);
    }
    if (!ok) {
      ++rejected_;
      dt *= 0.25;
      continue;
    }
    if (err > 1.0) {
      ++rejected_;
      dt *= std::max(0.2, 0.9 * std::pow(err, -0.2));
      continue;
    }
    const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
    const double proposal = dt * fac;
    dt_hint_ = (dt == dt_max && dt < dt_hint_) ? std::max(dt_hint_, proposal) : proposal;
    for (std::size_t a = 0; a < m; ++a) res.state.positions[idx[a]] = y5[a];
    res.state.time = state.time + dt;
    res.dt = dt;
    fsal_x_ = std::move(y5);
    fsal_b_ = std::move(b);
    fsal_v_ = k[6];
    ++accepted_;
    return res;
  }
}

StepResult step(const ParticleState& state, double dt_max, const IntegratorConfig& config) {
  Stepper s(config);
  return s.advance(state, dt_max);
}

double effective_cluster_gap(const ParticleState& initial, const IntegratorConfig& config) {
  if (config.cluster_gap > 0.0) return config.cluster_gap;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t i = 0; i < initial.size(); ++i) {
    if (initial.charges[i] == 0) continue;
    lo = std::min(lo, initial.positions[i]);
    hi = std::max(hi, initial.positions[i]);
  }
  const double spread = hi > lo ? hi - lo : 1.0;
  return 1e-7 * spread;
}

std::vector<std::vector<std::size_t>> detect_cluster(const ParticleState& state,
                                                     double cluster_gap) {
  const std::vector<std::size_t> idx = charged_indices(state);
  std::vector<std::vector<std::size_t>> clusters;
  if (idx.size() < 2) return clusters;

  std::vector<char> close(idx.size() - 1, 0);
  bool any = false;
  for (std::size_t a = 0; a + 1 < idx.size(); ++a) {
    close[a] = state.positions[idx[a + 1]] - state.positions[idx[a]] < cluster_gap;
    any = any || close[a];
  }
  if (!any) return clusters;

  std::vector<double> v;
  bool have_v = true;
  try {
    v = velocities(state);
  } catch (const NonFiniteForce&) {
    have_v = false;
  }

  std::vector<std::size_t> current;
  auto flush = [&] {
    if (current.size() >= 2) clusters.push_back(current);
    current.clear();
  };
  for (std::size_t a = 0; a + 1 < idx.size(); ++a) {
    const std::size_t i = idx[a], j = idx[a + 1];
    bool linked = close[a];
    if (linked && have_v) linked = v[j] - v[i] < 0.0;
    if (!linked) {
      flush();
      continue;
    }
    if (state.charges[i] == state.charges[j]) {
      std::ostringstream os;
      os << "equal-sign particles " << i << " and " << j << " approach within gap "
         << state.positions[j] - state.positions[i] << "; cluster_gap " << cluster_gap
         << " is too large";
      throw NonAlternatingCluster(os.str());
    }
    if (current.empty()) current.push_back(i);
    current.push_back(j);
  }
  flush();
  return clusters;
}

std::vector<std::vector<std::size_t>> detect_cluster(const ParticleState& state,
                                                     const IntegratorConfig& config) {
  return detect_cluster(state, effective_cluster_gap(state, config));
}

std::pair<ParticleState, EventRecord> resolve_annihilation(
    const ParticleState& state, const std::vector<std::size_t>& cluster,
    const IntegratorConfig& /*config*/) {
  if (cluster.size() < 2) throw InvalidState("a cluster needs at least two particles");
  std::vector<std::size_t> members = cluster;
  std::sort(members.begin(), members.end(), [&](std::size_t p, std::size_t q) {
    return state.positions[p] < state.positions[q];
  });
  int net = 0;
  double charge_sq = 0.0;
  for (std::size_t a = 0; a < members.size(); ++a) {
    const std::size_t i = members[a];
    if (i >= state.size() || state.charges[i] == 0)
      throw InvalidState("cluster member " + std::to_string(i) + " is not a charged particle");
    if (a > 0 && state.charges[i] == state.charges[members[a - 1]])
      throw NonAlternatingCluster("cluster charges do not alternate in sign");
    net += state.charges[i];
    charge_sq += 1.0;
  }
  if (std::abs(net) > 1)
    throw NetChargeTooLarge("cluster net charge " + std::to_string(net) + " exceeds 1");

  detail::CompensatedSum<double> sx;
  for (std::size_t i : members) sx += state.positions[i];
  const double y = sx.value() / static_cast<double>(members.size());
  detail::CompensatedSum<double> sm;
  for (std::size_t i : members) {
    const double d = state.positions[i] - y;
    sm += 0.5 * d * d;
  }
  // Second moment of the cluster decays at rate B while it collapses.
  const double rate = -0.5 * state.coupling * (static_cast<double>(net * net) - charge_sq);

  EventRecord ev;
  ev.tau = state.time + sm.value() / rate;
  ev.y = y;

  std::ptrdiff_t survivor = -1;
  if (net != 0) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i : members) {
      if (state.charges[i] != net) continue;
      const double d = std::abs(state.positions[i] - y);
      if (d < best || (d == best && static_cast<std::ptrdiff_t>(i) < survivor)) {
        best = d;
        survivor = static_cast<std::ptrdiff_t>(i);
      }
    }
  }

  ParticleState out = state;
  std::vector<std::size_t> sorted_idx = cluster;
  std::sort(sorted_idx.begin(), sorted_idx.end());
  for (std::size_t i : sorted_idx) {
    ev.cluster.push_back(i);
    ev.pre_charges.push_back(state.charges[i]);
    out.positions[i] = y;
    if (static_cast<std::ptrdiff_t>(i) != survivor) out.charges[i] = 0;
    ev.post_charges.push_back(out.charges[i]);
  }
  return {std::move(out), std::move(ev)};
}

Trajectory evolve(const ParticleState& initial, const IntegratorConfig& config) {
  const ValidityReport report = validate_state(initial);
  if (!report.ok()) throw InvalidState("initial state is invalid: " + report.violations.front());
  if (!(config.t_end >= initial.time)) throw InvalidState("t_end is before the initial time");
  if (!(config.abs_tol > 0.0) || !(config.rel_tol >= 0.0))
    throw InvalidState("tolerances must be positive");

  Trajectory traj;
  traj.config = config;
  const double gap = effective_cluster_gap(initial, config);
  traj.config.cluster_gap = gap;

  std::vector<double> targets;
  for (double t : config.sample_times)
    if (t > initial.time && t < config.t_end) targets.push_back(t);
  std::sort(targets.begin(), targets.end());
  targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
  targets.push_back(config.t_end);

  ParticleState state = initial;
  traj.samples.push_back(state);
  Stepper stepper(config);
  std::size_t next = 0;
  std::size_t steps = 0;
  try {
    while (state.time < config.t_end) {
      std::vector<std::vector<std::size_t>> clusters = detect_cluster(state, gap);
      if (!clusters.empty()) {
        std::vector<EventRecord> batch;
        for (const auto& c : clusters) {
          auto [s, ev] = resolve_annihilation(state, c, config);
          state = std::move(s);
          batch.push_back(std::move(ev));
        }
        std::stable_sort(batch.begin(), batch.end(),
                         [](const EventRecord& p, const EventRecord& q) { return p.tau < q.tau; });
        for (auto& ev : batch) traj.events.push_back(std::move(ev));
        if (config.record_steps) traj.samples.push_back(state);
      }
      if (++steps > config.max_steps)
        throw StepSizeUnderflow("exceeded max_steps = " + std::to_string(config.max_steps));
      const double target = targets[next];
      // Steps that stop a few ulps short of a target are snapped onto it.
      const double snap = 64.0 * (std::nextafter(target, INFINITY) - target);
      if (target - state.time > snap) {
        StepResult r = stepper.advance(state, target - state.time);
        if (r.dt == target - state.time) r.state.time = target;
        state = std::move(r.state);
      } else {
        state.time = target;
      }
      if (state.time >= target) {
        state.time = target;
        traj.samples.push_back(state);
        ++next;
      } else if (config.record_steps) {
        traj.samples.push_back(state);
      }
    }
  } catch (const Error& e) {
    if (traj.samples.empty() || traj.samples.back().time != state.time) traj.samples.push_back(state);
    throw EvolutionError(e, std::move(traj));
  }
  return traj;
}

}  // namespace annihilate
