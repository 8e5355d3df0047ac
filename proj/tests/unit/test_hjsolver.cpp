#include <algorithm>
#include <array>
#include <functional>
#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "annihilate/errors.hpp"
#include "annihilate/hjsolver.hpp"

using namespace annihilate;

namespace {

double smoothstep(double s) {
  s = std::clamp(s, 0.0, 1.0);
  return s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
}

// Random smooth datum, constant outside [-1, 1].
std::function<double(double)> random_datum(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> amp(-1.0, 1.0), centre(-0.5, 0.5), width(0.2, 0.5);
  std::vector<std::array<double, 3>> parts;
  for (int k = 0; k < 3; ++k) parts.push_back({amp(rng), centre(rng), width(rng)});
  const double rise = amp(rng);
  return [parts, rise](double x) {
    double v = rise * smoothstep((x + 1.0) / 2.0);
    for (const auto& [a, c, w] : parts) {
      const double s = (x - c) / w;
      if (std::abs(s) < 1.0) v += a * std::pow(1.0 - s * s, 3);
    }
    return v;
  };
}

SchemeConfig small_scheme() {
  SchemeConfig c;
  c.L = 2.0;
  c.h = 1.0 / 32;
  c.rho_cells = 4;
  c.cfl = 0.5;
  c.t_end = 0.1;
  return c;
}

}  // namespace

TEST(HJSolver, ConstantHasZeroOperatorAndIsFixed) {
  const SchemeConfig c = small_scheme();
  const GridFunction u = sample_grid([](double) { return 0.7; }, c);
  for (std::size_t i = 0; i < u.size(); i += 7) EXPECT_EQ(levy_operator(u, i, c.rho_cells), 0.0);
  const GridFunction next = step_hj(u, c, 0.01);
  EXPECT_EQ(next.values, u.values);
  const HJSolution sol = solve_hj([](double) { return 0.7; }, c);
  for (const auto& s : sol.snapshots) EXPECT_EQ(s.values, u.values);
}

TEST(HJSolver, GaussianOperatorMatchesClosedForm) {
  // pv int (exp(-z^2) - 1) / z^2 dz = -2 sqrt(pi).
  SchemeConfig c;
  c.L = 8.0;
  c.h = 1.0 / 64;
  c.rho_cells = 8;
  const GridFunction u = sample_grid([](double x) { return std::exp(-x * x); }, c);
  const std::size_t mid = u.size() / 2;
  ASSERT_EQ(u.x(mid), 0.0);
  const double ref = -2.0 * std::sqrt(std::numbers::pi);
  EXPECT_NEAR(levy_operator(u, mid, c.rho_cells), ref, 1e-3 * std::abs(ref));
}

TEST(HJSolver, QuarticNearField) {
  const double rho = 0.25, y = 0.3;
  const int cells = 32;
  SchemeConfig c;
  c.L = 2.0;
  c.h = rho / cells;
  const GridFunction u = sample_grid([&](double x) { return std::pow(x - y, 4); }, c);
  const LevyKernel k(c.h, cells, u.size());
  for (std::size_t i : {u.size() / 2, u.size() / 2 + 20, u.size() / 2 - 20}) {
    const double a = u.x(i) - y;
    const double ref = 12.0 * a * a * rho + 2.0 / 3.0 * rho * rho * rho;
    EXPECT_NEAR(k.near_field(u, i), ref, 1e-2 * ref);
  }
}

TEST(HJSolver, FarFieldBound) {
  std::mt19937_64 rng(41);
  const SchemeConfig c = small_scheme();
  for (int run = 0; run < 10; ++run) {
    const GridFunction u = sample_grid(random_datum(rng), c);
    for (int cells : {2, 4, 16}) {
      const LevyKernel k(c.h, cells, u.size());
      const double rho = cells * c.h;
      for (std::size_t i = 0; i < u.size(); i += 5)
        EXPECT_LE(std::abs(k.far_field(u, i)), 4.0 * u.sup_norm() / rho * (1 + 1e-12));
    }
  }
}

TEST(HJSolver, ComparisonPrincipleIsExact) {
  std::mt19937_64 rng(43);
  const SchemeConfig c = small_scheme();
  for (int run = 0; run < 10; ++run) {
    const auto f = random_datum(rng);
    const auto g = random_datum(rng);
    GridFunction u = sample_grid(f, c);
    GridFunction w = sample_grid([&](double x) { return f(x) + std::abs(g(x)); }, c);
    for (int s = 0; s < 40; ++s) {
      const double dt = std::min(stable_dt(u, c), stable_dt(w, c));
      u = step_hj(u, c, dt);
      w = step_hj(w, c, dt);
      for (std::size_t i = 0; i < u.size(); ++i) ASSERT_LE(u.values[i], w.values[i]);
    }
  }
}

TEST(HJSolver, SupNormAndLipschitzDoNotIncrease) {
  std::mt19937_64 rng(47);
  const SchemeConfig c = small_scheme();
  for (int run = 0; run < 10; ++run) {
    GridFunction u = sample_grid(random_datum(rng), c);
    for (int s = 0; s < 40; ++s) {
      const GridFunction next = step_hj(u, c);
      EXPECT_LE(next.sup_norm(), u.sup_norm() + 1e-12);
      EXPECT_LE(next.lipschitz(), u.lipschitz() + 1e-12);
      EXPECT_EQ(next.tail_left, u.tail_left);
      EXPECT_EQ(next.tail_right, u.tail_right);
      u = next;
    }
  }
}

TEST(HJSolver, AntisymmetryIsPreserved) {
  SchemeConfig c = small_scheme();
  c.snapshot_times = {0.02, 0.05};
  // Antisymmetrised explicitly so that sampled nodes are exact negatives.
  const auto f = [](double x) { return smoothstep((x + 0.8) / 1.6) + 0.3 * smoothstep((x - 0.1) / 0.5); };
  const auto u0 = [&](double x) { return 0.5 * (f(x) - f(-x)); };
  const HJSolution sol = solve_hj(u0, c);
  for (const auto& s : sol.snapshots)
    for (std::size_t i = 0; i < s.size(); ++i)
      EXPECT_EQ(s.values[i], -s.values[s.size() - 1 - i]) << "t=" << s.time;
}

TEST(HJSolver, TranslationByOneCell) {
  const SchemeConfig c = small_scheme();
  const auto f = [](double x) { return smoothstep((x + 0.5) / 1.0); };
  GridFunction u = sample_grid(f, c);
  GridFunction w = sample_grid([&](double x) { return f(x - c.h); }, c);
  for (int s = 0; s < 30; ++s) {
    const double dt = std::min(stable_dt(u, c), stable_dt(w, c));
    u = step_hj(u, c, dt);
    w = step_hj(w, c, dt);
  }
  for (std::size_t i = 0; i + 1 < u.size(); ++i) EXPECT_NEAR(w.values[i + 1], u.values[i], 1e-12);
}

TEST(HJSolver, ForcedStepAboveCflThrows) {
  const SchemeConfig c = small_scheme();
  const GridFunction u = sample_grid([](double x) { return smoothstep((x + 0.5) / 1.0); }, c);
  EXPECT_THROW(step_hj(u, c, 10.0 * stable_dt(u, c)), CFLViolation);
}

TEST(HJSolver, RejectsNonConstantFarField) {
  SchemeConfig c = small_scheme();
  EXPECT_THROW(solve_hj([](double x) { return x; }, c), ConfigError);
}

TEST(HJSolver, SelfConvergenceIsFirstOrder) {
  SchemeConfig c;
  c.L = 3.0;
  c.h = 1.0 / 16;
  c.t_end = 0.2;
  const RefinementStudy st =
      refinement_study([](double x) { return smoothstep((x + 1.0) / 2.0); }, c, 3);
  ASSERT_GE(st.order.size(), 2u);
  for (std::size_t k = 0; k + 1 < st.error.size(); ++k) EXPECT_LT(st.error[k + 1], st.error[k]);
  EXPECT_GT(st.order.back(), 0.7);
  EXPECT_LT(st.order.back(), 1.5);
}

TEST(HJSolver, BarrierExamples) {
  SchemeConfig c;
  c.L = 4.0;
  c.h = 1.0 / 32;
  c.t_end = 0.5;
  const auto zero = [](double) { return 0.0; };
  const auto below = [](double x) {
    const double s = x * x / 4.0;
    return s < 1.0 ? -0.5 + 0.5 * std::pow(1.0 - s, 4) : -0.5;
  };
  const BarrierReport flat = barrier_check(zero, 0.0, 0.0, below, c);
  EXPECT_TRUE(flat.ok);
  EXPECT_GE(flat.min_margin, 0.0);

  // v0 = 1/(2(1+x^2)) - 1/2 lies above `below`; Lipschitz 0.325, semiconcave 0.25.
  const auto bump = [](double x) { return 0.5 / (1.0 + x * x) - 0.5; };
  for (int k = -400; k <= 400; ++k) ASSERT_LE(below(k * 0.01), bump(k * 0.01) + 1e-15);
  const BarrierReport r = barrier_check(bump, 0.325, 0.25, below, c);
  EXPECT_TRUE(r.ok);
  // The grid covers [-4, 4], where sup |v0| is reached at the ends.
  EXPECT_DOUBLE_EQ(r.sigma, barrier_speed(0.325, 0.25, 0.5 - 0.5 / 17.0));
}
