#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "annihilate/errors.hpp"
#include "annihilate/particles.hpp"

using namespace annihilate;

namespace {

// Direct long double evaluation, independent of the library's summation.
long double oracle_force(const ParticleState& s, std::size_t i) {
  long double acc = 0.0L;
  if (s.charges[i] == 0) return 0.0L;
  for (std::size_t j = 0; j < s.size(); ++j) {
    if (j == i || s.charges[j] == 0) continue;
    acc += static_cast<long double>(s.charges[i] * s.charges[j]) /
           (static_cast<long double>(s.positions[i]) - s.positions[j]);
  }
  return s.coupling * acc;
}

long double oracle_energy(const ParticleState& s) {
  long double acc = 0.0L;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = i + 1; j < s.size(); ++j)
      acc -= s.charges[i] * s.charges[j] *
             std::log(std::fabs(static_cast<long double>(s.positions[i]) - s.positions[j]));
  return static_cast<long double>(s.coupling) * s.coupling * acc;
}

ParticleState random_state(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> pos(-2.0, 2.0);
  std::uniform_int_distribution<int> charge(-1, 1);
  std::vector<double> x(n);
  std::vector<int> b(n);
  for (auto& v : x) v = pos(rng);
  std::sort(x.begin(), x.end());
  for (auto& c : b) c = charge(rng);
  return make_state(x, b);
}

}  // namespace

TEST(Particles, ValidityExamples) {
  EXPECT_TRUE(validate_state(make_state({0.0, 1.0}, {1, -1})).ok());
  EXPECT_FALSE(validate_state(make_state({1.0, 0.0}, {1, -1})).ok());
  EXPECT_TRUE(validate_state(make_state({0.0, 0.0, 1.0}, {0, 1, -1})).ok());
  EXPECT_FALSE(validate_state(make_state({0.0, 0.0}, {1, 1})).ok());
}

TEST(Particles, MakeStateRejectsBadInput) {
  EXPECT_THROW(make_state({0.0, 1.0}, {1}), InvalidState);
  EXPECT_THROW(make_state({0.0, 1.0}, {1, 2}), InvalidState);
  EXPECT_THROW(make_state({0.0, NAN}, {1, -1}), InvalidState);
  EXPECT_THROW(make_state({0.0, 1.0}, {1, -1}, -1.0), InvalidState);
}

TEST(Particles, DefaultCouplingIsInverseCount) {
  EXPECT_DOUBLE_EQ(make_state({0.0, 1.0, 2.0, 3.0}, {1, 1, -1, 0}).coupling, 0.25);
}

TEST(Particles, ForceExamples) {
  // Opposite pair, gamma = 1/2: attraction of strength 1/2 over distance 2.
  const ParticleState pair = make_state({-1.0, 1.0}, {1, -1});
  EXPECT_DOUBLE_EQ(force(pair, 0), 0.25);
  EXPECT_DOUBLE_EQ(force(pair, 1), -0.25);
  const ParticleState neutral = make_state({-1.0, 0.0, 1.0}, {1, 0, -1});
  EXPECT_EQ(force(neutral, 1), 0.0);
  const ParticleState triple = make_state({-1.0, 0.0, 1.0}, {1, -1, 1});
  EXPECT_EQ(force(triple, 1), 0.0);
}

TEST(Particles, CoincidentChargedParticlesGiveNonFiniteForce) {
  const ParticleState s = make_state({0.0, 0.0}, {1, -1});
  EXPECT_THROW(force(s, 0), NonFiniteForce);
}

TEST(Particles, EnergyExamples) {
  EXPECT_DOUBLE_EQ(energy(make_state({0.0, 1.0}, {1, 1})), 0.0);
  EXPECT_NEAR(energy(make_state({0.0, std::exp(1.0)}, {1, -1})), 0.25, 1e-15);
  EXPECT_EQ(energy(make_state({0.0, 1.0}, {1, 0})), 0.0);
  EXPECT_THROW(energy(make_state({0.0, 0.0}, {1, -1})), NonFiniteEnergy);
}

TEST(Particles, ForceAndEnergyMatchOracle) {
  std::mt19937_64 rng(7);
  for (int run = 0; run < 200; ++run) {
    const ParticleState s = random_state(rng, 2 + run % 12);
    const std::vector<double> v = velocities(s);
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double ref = static_cast<double>(oracle_force(s, i));
      EXPECT_NEAR(force(s, i), ref, 1e-12 * (1.0 + std::abs(ref)));
      EXPECT_NEAR(v[i], ref, 1e-12 * (1.0 + std::abs(ref)));
    }
    const double e = static_cast<double>(oracle_energy(s));
    EXPECT_NEAR(energy(s), e, 1e-12 * (1.0 + std::abs(e)));
  }
}

TEST(Particles, ForceSymmetries) {
  std::mt19937_64 rng(11);
  for (int run = 0; run < 100; ++run) {
    const ParticleState s = random_state(rng, 2 + run % 10);
    ParticleState shifted = s, scaled = s, flipped = s;
    for (auto& x : shifted.positions) x += 0.375;
    for (auto& x : scaled.positions) x *= 2.0;
    for (auto& b : flipped.charges) b = -b;
    double sum = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double f = force(s, i);
      EXPECT_NEAR(force(shifted, i), f, 1e-9 * (1.0 + std::abs(f)));
      // x -> 2x halves the velocity exactly (power-of-two scaling).
      EXPECT_EQ(force(scaled, i), 0.5 * f);
      EXPECT_EQ(force(flipped, i), f);
      sum += f;
      scale += std::abs(f);
    }
    EXPECT_LE(std::abs(sum), 1e-12 * (1.0 + scale));
  }
}

TEST(Particles, NeighborGapsSkipNeutralParticles) {
  const ParticleState s = make_state({0.0, 0.5, 1.0, 3.0, 3.25}, {1, 0, 1, -1, -1});
  const NeighborGaps g = neighbor_gaps(s);
  EXPECT_DOUBLE_EQ(g.plus, 1.0);
  EXPECT_DOUBLE_EQ(g.minus, 0.25);
  EXPECT_DOUBLE_EQ(g.opposite, 2.0);
  EXPECT_EQ(net_charge(s), 0);
  EXPECT_EQ(count_charge(s, 1), 2u);
  EXPECT_EQ(charged_indices(s).size(), 4u);
}
