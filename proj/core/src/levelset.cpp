#include "annihilate/levelset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "annihilate/detail/summation.hpp"
#include "annihilate/errors.hpp"

namespace annihilate {

double StepFunction::operator()(double x) const {
  double v = base;
  for (const Jump& j : jumps) {
    if (j.location > x) break;
    v += j.size;
  }
  return v;
}

double StepFunction::left_limit(double x) const {
  double v = base;
  for (const Jump& j : jumps) {
    if (j.location >= x) break;
    v += j.size;
  }
  return v;
}

double StepFunction::upper(double x) const { return std::max((*this)(x), left_limit(x)); }

double StepFunction::lower(double x) const { return std::min((*this)(x), left_limit(x)); }

double StepFunction::sup_norm() const {
  double v = base, m = std::abs(base);
  for (const Jump& j : jumps) {
    v += j.size;
    m = std::max(m, std::abs(v));
  }
  return m;
}

double StepFunction::total_variation() const {
  double tv = 0.0;
  for (const Jump& j : jumps) tv += std::abs(j.size);
  return tv;
}

StepFunction make_step_function(std::vector<Jump> jumps, double base, double eps) {
  std::stable_sort(jumps.begin(), jumps.end(),
                   [](const Jump& a, const Jump& b) { return a.location < b.location; });
  StepFunction u;
  u.base = base;
  u.eps = eps;
  for (const Jump& j : jumps) {
    if (!u.jumps.empty() && u.jumps.back().location == j.location)
      u.jumps.back().size += j.size;
    else
      u.jumps.push_back(j);
  }
  u.jumps.erase(std::remove_if(u.jumps.begin(), u.jumps.end(),
                               [](const Jump& j) { return j.size == 0.0; }),
                u.jumps.end());
  return u;
}

StepFunction from_particles(const ParticleState& state, double base) {
  std::vector<Jump> jumps;
  for (std::size_t i = 0; i < state.size(); ++i)
    if (state.charges[i] != 0)
      jumps.push_back({state.positions[i], state.charges[i] * state.coupling});
  return make_step_function(std::move(jumps), base, state.coupling);
}

double staircase(double alpha, double eps, Staircase variant) {
  if (variant == Staircase::Upper) return eps * (std::floor(alpha / eps) + 0.5);
  return eps * std::ceil(alpha / eps) - 0.5 * eps;
}

double nonlocal_operator_closed_form(const StepFunction& u, std::size_t at_jump) {
  const double xi = u.jumps.at(at_jump).location;
  detail::CompensatedSum<double> s;
  for (std::size_t j = 0; j < u.jumps.size(); ++j) {
    if (j == at_jump) continue;
    s += u.jumps[j].size / (xi - u.jumps[j].location);
  }
  return -s.value();
}

namespace {

// E*_eps of a difference of two values of u, snapping to the level lattice
// when the difference is an integer number of levels up to rounding.
double upper_level(double diff, double eps) {
  const double q = diff / eps;
  const double r = std::nearbyint(q);
  const double k = std::abs(q - r) < 1e-9 ? r : std::floor(q);
  return eps * (k + 0.5);
}

}  // namespace

double far_field_integral(const StepFunction& u, double x, double rho) {
  if (!(rho > 0.0)) throw InvalidState("rho must be positive");
  const double ref = u.upper(x);
  detail::CompensatedSum<double> total;

  // Right half-line: distances to jumps strictly right of x.
  {
    double value = u(x);
    double a = rho;
    auto it = std::upper_bound(u.jumps.begin(), u.jumps.end(), x,
                               [](double v, const Jump& j) { return v < j.location; });
    for (; it != u.jumps.end(); ++it) {
      const double z = it->location - x;
      if (z > a) {
        total += upper_level(value - ref, u.eps) * (1.0 / a - 1.0 / z);
        a = z;
      }
      value += it->size;
    }
    total += upper_level(value - ref, u.eps) / a;
  }
  // Left half-line, walking outward from x.
  {
    double value = u.left_limit(x);
    double a = rho;
    auto it = std::lower_bound(u.jumps.begin(), u.jumps.end(), x,
                               [](const Jump& j, double v) { return j.location < v; });
    while (it != u.jumps.begin()) {
      --it;
      const double z = x - it->location;
      if (z > a) {
        total += upper_level(value - ref, u.eps) * (1.0 / a - 1.0 / z);
        a = z;
      }
      value -= it->size;
    }
    total += upper_level(value - ref, u.eps) / a;
  }
  return total.value();
}

double nonlocal_operator_quadrature(const StepFunction& u, double x, double rho) {
  auto it = std::lower_bound(u.jumps.begin(), u.jumps.end(), x,
                             [](const Jump& j, double v) { return j.location < v; });
  if (it == u.jumps.end() || it->location != x)
    throw InvalidState("nonlocal_operator_quadrature must be evaluated at a jump location");
  double nearest = std::numeric_limits<double>::infinity();
  if (it != u.jumps.begin()) nearest = std::min(nearest, x - std::prev(it)->location);
  if (std::next(it) != u.jumps.end()) nearest = std::min(nearest, std::next(it)->location - x);
  if (rho <= 0.0) rho = std::isfinite(nearest) ? 0.5 * nearest : 1.0;
  if (rho >= nearest) throw JumpTooClose("rho exceeds the distance to the nearest jump");
  return far_field_integral(u, x, rho);
}

ResidualReport hje_residual(const Trajectory& traj, const std::vector<double>& sample_times) {
  ResidualReport report;
  const auto& s = traj.samples;
  std::vector<std::size_t> ks;
  if (sample_times.empty()) {
    for (std::size_t k = 1; k + 1 < s.size(); ++k) ks.push_back(k);
  } else {
    for (double t : sample_times)
      for (std::size_t k = 1; k + 1 < s.size(); ++k)
        if (s[k].time == t) {
          ks.push_back(k);
          break;
        }
  }
  for (std::size_t k : ks) {
    const ParticleState &a = s[k - 1], &b = s[k], &c = s[k + 1];
    const double h1 = b.time - a.time, h2 = c.time - b.time;
    bool near_event = !(h1 > 0.0 && h2 > 0.0) || a.charges != b.charges || b.charges != c.charges;
    for (const EventRecord& ev : traj.events)
      if (ev.tau >= a.time && ev.tau <= c.time) near_event = true;
    if (near_event) {
      ++report.skipped;
      continue;
    }
    const StepFunction ua = from_particles(a), ub = from_particles(b), uc = from_particles(c);
    if (ua.jumps.size() != ub.jumps.size() || uc.jumps.size() != ub.jumps.size()) {
      ++report.skipped;
      continue;
    }
    for (std::size_t r = 0; r < ub.jumps.size(); ++r) {
      const double xa = ua.jumps[r].location, xb = ub.jumps[r].location, xc = uc.jumps[r].location;
      const double v_fd =
          (h1 * h1 * (xc - xb) + h2 * h2 * (xb - xa)) / (h1 * h2 * (h1 + h2));
      const double charge = ub.jumps[r].size > 0.0 ? 1.0 : -1.0;
      const double v_op = -charge * nonlocal_operator_quadrature(ub, xb);
      report.max_residual = std::max(report.max_residual, std::abs(v_fd - v_op));
      ++report.checked;
    }
  }
  return report;
}

}  // namespace annihilate
