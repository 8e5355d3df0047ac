#include "annihilate/particles.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "annihilate/detail/summation.hpp"
#include "annihilate/errors.hpp"

namespace annihilate {

ParticleState make_state(std::vector<double> positions, std::vector<int> charges,
                         std::optional<double> coupling, double time) {
  if (positions.size() != charges.size()) {
    std::ostringstream os;
    os << "positions has length " << positions.size() << " but charges has length "
       << charges.size();
    throw InvalidState(os.str());
  }
  for (std::size_t i = 0; i < charges.size(); ++i) {
    if (charges[i] < -1 || charges[i] > 1)
      throw InvalidState("charge at index " + std::to_string(i) + " is not in {-1,0,+1}");
    if (!std::isfinite(positions[i]))
      throw InvalidState("position at index " + std::to_string(i) + " is not finite");
  }
  ParticleState s;
  s.coupling = coupling.value_or(1.0 / static_cast<double>(std::max<std::size_t>(positions.size(), 1)));
  if (!(s.coupling > 0.0) || !std::isfinite(s.coupling))
    throw InvalidState("coupling must be positive and finite");
  if (!(time >= 0.0) || !std::isfinite(time)) throw InvalidState("time must be nonnegative");
  s.positions = std::move(positions);
  s.charges = std::move(charges);
  s.time = time;
  return s;
}

ValidityReport validate_state(const ParticleState& state) {
  ValidityReport r;
  if (state.positions.size() != state.charges.size()) {
    r.violations.push_back("positions and charges differ in length");
    return r;
  }
  if (!(state.coupling > 0.0) || !std::isfinite(state.coupling))
    r.violations.push_back("coupling is not positive and finite");
  if (!std::isfinite(state.time) || state.time < 0.0)
    r.violations.push_back("time is not a nonnegative finite number");
  std::ptrdiff_t prev = -1;
  for (std::size_t i = 0; i < state.size(); ++i) {
    const int b = state.charges[i];
    if (b < -1 || b > 1) {
      r.violations.push_back("charge at index " + std::to_string(i) + " is not in {-1,0,+1}");
      continue;
    }
    if (!std::isfinite(state.positions[i])) {
      r.violations.push_back("position at index " + std::to_string(i) + " is not finite");
      continue;
    }
    if (b == 0) continue;
    if (prev >= 0 && !(state.positions[i] > state.positions[prev])) {
      std::ostringstream os;
      os << "charged particles " << prev << " and " << i << " are out of order ("
         << state.positions[prev] << " >= " << state.positions[i] << ")";
      r.violations.push_back(os.str());
    }
    prev = static_cast<std::ptrdiff_t>(i);
  }
  return r;
}

double force(const ParticleState& state, std::size_t i) {
  const int bi = state.charges.at(i);
  if (bi == 0) return 0.0;
  const double xi = state.positions[i];
  detail::CompensatedSum<double> sum;
  for (std::size_t j = 0; j < state.size(); ++j) {
    if (j == i || state.charges[j] == 0) continue;
    const double d = xi - state.positions[j];
    if (d == 0.0)
      throw NonFiniteForce("charged particles " + std::to_string(i) + " and " +
                           std::to_string(j) + " coincide");
    sum += static_cast<double>(bi * state.charges[j]) / d;
  }
  const double v = state.coupling * sum.value();
  if (!std::isfinite(v)) throw NonFiniteForce("force on particle " + std::to_string(i));
  return v;
}

std::vector<double> velocities(const ParticleState& state) {
  const std::vector<std::size_t> idx = charged_indices(state);
  std::vector<double> v(state.size(), 0.0);
  for (std::size_t a = 0; a < idx.size(); ++a) {
    const std::size_t i = idx[a];
    const double xi = state.positions[i];
    const int bi = state.charges[i];
    detail::CompensatedSum<double> sum;
    for (std::size_t c = 0; c < idx.size(); ++c) {
      if (c == a) continue;
      const std::size_t j = idx[c];
      const double d = xi - state.positions[j];
      if (d == 0.0)
        throw NonFiniteForce("charged particles " + std::to_string(i) + " and " +
                             std::to_string(j) + " coincide");
      sum += static_cast<double>(bi * state.charges[j]) / d;
    }
    v[i] = state.coupling * sum.value();
    if (!std::isfinite(v[i])) throw NonFiniteForce("force on particle " + std::to_string(i));
  }
  return v;
}

double energy(const ParticleState& state) {
  const std::vector<std::size_t> idx = charged_indices(state);
  detail::CompensatedSum<double> sum;
  for (std::size_t a = 0; a < idx.size(); ++a) {
    for (std::size_t c = a + 1; c < idx.size(); ++c) {
      const double d = std::abs(state.positions[idx[a]] - state.positions[idx[c]]);
      if (d == 0.0)
        throw NonFiniteEnergy("charged particles " + std::to_string(idx[a]) + " and " +
                              std::to_string(idx[c]) + " coincide");
      sum += -static_cast<double>(state.charges[idx[a]] * state.charges[idx[c]]) * std::log(d);
    }
  }
  // Each unordered pair appears twice in the double sum, cancelling the 1/2.
  const double e = state.coupling * state.coupling * sum.value();
  if (!std::isfinite(e)) throw NonFiniteEnergy("energy is not finite");
  return e;
}

std::vector<std::size_t> charged_indices(const ParticleState& state) {
  std::vector<std::size_t> idx;
  idx.reserve(state.size());
  for (std::size_t i = 0; i < state.size(); ++i)
    if (state.charges[i] != 0) idx.push_back(i);
  return idx;
}

int net_charge(const ParticleState& state) {
  int s = 0;
  for (int b : state.charges) s += b;
  return s;
}

std::size_t count_charge(const ParticleState& state, int sign) {
  std::size_t c = 0;
  for (int b : state.charges)
    if (b == sign) ++c;
  return c;
}

NeighborGaps neighbor_gaps(const ParticleState& state) {
  NeighborGaps g;
  const std::vector<std::size_t> idx = charged_indices(state);
  for (std::size_t a = 0; a + 1 < idx.size(); ++a) {
    const double d = state.positions[idx[a + 1]] - state.positions[idx[a]];
    const int b0 = state.charges[idx[a]];
    const int b1 = state.charges[idx[a + 1]];
    if (b0 != b1)
      g.opposite = std::min(g.opposite, d);
    else if (b0 > 0)
      g.plus = std::min(g.plus, d);
    else
      g.minus = std::min(g.minus, d);
  }
  return g;
}

}  // namespace annihilate
