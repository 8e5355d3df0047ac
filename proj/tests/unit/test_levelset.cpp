#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "annihilate/errors.hpp"
#include "annihilate/levelset.hpp"

using namespace annihilate;

namespace {

ParticleState random_charged(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> pos(-3.0, 3.0);
  std::vector<double> x(n);
  for (;;) {
    for (auto& v : x) v = pos(rng);
    std::sort(x.begin(), x.end());
    bool ok = true;
    for (std::size_t i = 0; i + 1 < n; ++i) ok = ok && x[i + 1] - x[i] > 1e-3;
    if (ok) break;
  }
  std::vector<int> b(n);
  for (auto& c : b) c = rng() % 2 ? 1 : -1;
  return make_state(x, b);
}

double oracle_sum(const ParticleState& s, std::size_t i) {
  double acc = 0.0;
  for (std::size_t j = 0; j < s.size(); ++j)
    if (j != i) acc -= s.charges[j] / (s.positions[i] - s.positions[j]);
  return acc;
}

}  // namespace

TEST(LevelSet, FromParticlesExamples) {
  const StepFunction u = from_particles(make_state({0.0, 1.0}, {1, -1}));
  EXPECT_EQ(u(-0.5), 0.0);
  EXPECT_EQ(u(0.0), 0.5);  // H(0) = 1
  EXPECT_EQ(u(0.5), 0.5);
  EXPECT_EQ(u(1.0), 0.0);
  const StepFunction up = from_particles(make_state({0.0, 1.0}, {1, 1}));
  EXPECT_EQ(up(-1.0), 0.0);
  EXPECT_EQ(up(0.5), 0.5);
  EXPECT_EQ(up(2.0), 1.0);
  const StepFunction flat = from_particles(make_state({0.0, 1.0}, {0, 0}), 0.25);
  EXPECT_TRUE(flat.jumps.empty());
  EXPECT_EQ(flat(0.5), 0.25);
  EXPECT_DOUBLE_EQ(up.total_variation(), 1.0);
}

TEST(LevelSet, StaircaseExamples) {
  EXPECT_DOUBLE_EQ(staircase(0.6, 0.5, Staircase::Upper), 0.75);
  EXPECT_DOUBLE_EQ(staircase(0.0, 0.125, Staircase::Upper), 0.0625);
  EXPECT_DOUBLE_EQ(staircase(0.0, 0.125, Staircase::Lower), -0.0625);
}

TEST(LevelSet, StaircaseIsPeriodicAndClose) {
  const double eps = 0.125;
  for (int k = -400; k <= 400; ++k) {
    const double a = k * 0.00390625 + 0.001;  // off-lattice samples
    for (auto v : {Staircase::Upper, Staircase::Lower}) {
      const double d = staircase(a, eps, v) - a;
      EXPECT_LE(std::abs(d), eps / 2 + 1e-15);
      EXPECT_NEAR(staircase(a + eps, eps, v) - (a + eps), d, 1e-12);
    }
  }
}

TEST(LevelSet, EnvelopeSandwich) {
  std::mt19937_64 rng(21);
  for (int run = 0; run < 30; ++run) {
    const ParticleState s = random_charged(rng, 2 + run % 7);
    const StepFunction u = from_particles(s);
    for (const Jump& j : u.jumps) {
      for (double x : {j.location, j.location - 1e-4, j.location + 1e-4}) {
        EXPECT_LE(u.lower(x), u(x));
        EXPECT_LE(u(x), u.upper(x));
      }
      const double gap = u.upper(j.location) - u.lower(j.location);
      EXPECT_NEAR(gap, u.eps, 1e-15);
    }
  }
}

TEST(LevelSet, ClosedFormExamples) {
  const StepFunction pair = from_particles(make_state({-1.0, 1.0}, {1, -1}));
  EXPECT_DOUBLE_EQ(nonlocal_operator_closed_form(pair, 0), -0.25);
  const StepFunction triple = from_particles(make_state({-1.0, 0.0, 1.0}, {1, -1, 1}));
  EXPECT_EQ(nonlocal_operator_closed_form(triple, 1), 0.0);
}

TEST(LevelSet, VelocityRelation) {
  std::mt19937_64 rng(23);
  for (int run = 0; run < 30; ++run) {
    const ParticleState s = random_charged(rng, 2 + run % 7);
    const StepFunction u = from_particles(s);
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double v = force(s, i);
      EXPECT_NEAR(-s.charges[i] * nonlocal_operator_closed_form(u, i), v, 1e-12 * (1 + std::abs(v)));
    }
  }
}

TEST(LevelSet, QuadratureMatchesClosedForm) {
  std::mt19937_64 rng(29);
  for (int run = 0; run < 100; ++run) {
    const ParticleState s = random_charged(rng, 2 + run % 7);
    const StepFunction u = from_particles(s);
    const double n = static_cast<double>(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double quad = nonlocal_operator_quadrature(u, s.positions[i]);
      EXPECT_NEAR(quad, nonlocal_operator_closed_form(u, i), 1e-10);
      EXPECT_NEAR(n * quad, oracle_sum(s, i), 1e-10 * std::max(1.0, std::abs(oracle_sum(s, i))));
    }
  }
}

TEST(LevelSet, SingleJumpHasZeroOperator) {
  const StepFunction u = from_particles(make_state({0.3}, {1}, 1.0));
  EXPECT_EQ(nonlocal_operator_quadrature(u, 0.3, 1.0), 0.0);
  EXPECT_EQ(nonlocal_operator_closed_form(u, 0), 0.0);
}

TEST(LevelSet, QuadratureRejectsLargeRadiusAndNonJumps) {
  const StepFunction u = from_particles(make_state({0.0, 1.0}, {1, -1}));
  EXPECT_THROW(nonlocal_operator_quadrature(u, 0.0, 1.5), JumpTooClose);
  EXPECT_THROW(nonlocal_operator_quadrature(u, 0.5), InvalidState);
}

TEST(LevelSet, FarFieldBound) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> r(0.01, 2.0);
  for (int run = 0; run < 50; ++run) {
    const ParticleState s = random_charged(rng, 2 + run % 7);
    const StepFunction u = from_particles(s);
    for (const Jump& j : u.jumps) {
      const double rho = r(rng);
      const double far = far_field_integral(u, j.location, rho);
      EXPECT_LE(std::abs(far), (4.0 * u.sup_norm() + u.eps) / rho * (1 + 1e-12));
    }
  }
}

TEST(LevelSet, LevelReconstructionFromContinuousFunction) {
  // v is piecewise linear through (x_i, u*(x_i)) with midpoints lifted by
  // eps/2, so 0 < v - u_n < eps off the jumps.
  const ParticleState s = make_state({-2.0, -1.1, -0.3, 0.4, 1.0, 2.2, 2.9, 3.5},
                                     {1, 1, -1, 1, 1, -1, -1, 1});
  const StepFunction u = from_particles(s);
  const double eps = u.eps;  // 1/8, exact in binary
  std::vector<std::pair<double, double>> knots;
  knots.emplace_back(-3.0, u(-3.0) + eps / 2);
  for (std::size_t i = 0; i < u.jumps.size(); ++i) {
    const double x = u.jumps[i].location;
    knots.emplace_back(x, u.upper(x));
    const double next = i + 1 < u.jumps.size() ? u.jumps[i + 1].location : x + 1.0;
    knots.emplace_back(0.5 * (x + next), u(x) + eps / 2);
  }
  const auto v = [&](double x) {
    for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
      const auto [x0, y0] = knots[k];
      const auto [x1, y1] = knots[k + 1];
      if (x == x0) return y0;
      if (x > x0 && x < x1) return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
    }
    return knots.back().second;
  };
  for (int k = 0; k <= 2000; ++k) {
    const double x = -2.9 + k * 0.0034;
    const double val = v(x);
    const bool at_jump = std::any_of(u.jumps.begin(), u.jumps.end(),
                                     [&](const Jump& j) { return j.location == x; });
    if (!at_jump) {
      EXPECT_GT(val - u(x), 0.0);
      EXPECT_LT(val - u(x), eps);
    }
    EXPECT_DOUBLE_EQ(std::floor(val / eps) * eps, u.upper(x)) << "x=" << x;
  }
  for (const Jump& j : u.jumps)
    EXPECT_DOUBLE_EQ(std::floor(v(j.location) / eps) * eps, u.upper(j.location));
}

TEST(LevelSet, ResidualIsZeroForStationaryState) {
  IntegratorConfig c;
  c.t_end = 1.0;
  c.sample_times = {0.25, 0.5, 0.75};
  const Trajectory tr = evolve(make_state({0.0, 1.0, 2.0}, {0, 1, 0}, 1.0), c);
  const ResidualReport r = hje_residual(tr);
  EXPECT_EQ(r.max_residual, 0.0);
  EXPECT_GT(r.checked, 0u);
}

TEST(LevelSet, ResidualShrinksWithTolerance) {
  const ParticleState s = make_state({-1.0, -0.2, 0.5, 1.3}, {1, -1, 1, 1});
  const double delta = 1e-4;
  std::vector<double> centres;
  double prev = std::numeric_limits<double>::infinity();
  for (double tol : {1e-6, 1e-9, 1e-12}) {
    IntegratorConfig c;
    c.t_end = 0.05;
    c.abs_tol = tol;
    c.rel_tol = tol;
    c.sample_times.clear();
    centres.clear();
    for (double t : {0.01, 0.02, 0.03, 0.04}) {
      centres.push_back(t);
      for (double off : {-delta, 0.0, delta}) c.sample_times.push_back(t + off);
    }
    const ResidualReport r = hje_residual(evolve(s, c), centres);
    EXPECT_EQ(r.checked, 16u);
    EXPECT_LE(r.max_residual, prev * 1.01 + 1e-9);
    prev = r.max_residual;
  }
  EXPECT_LT(prev, 1e-6);
}
