#include "annihilate/hjsolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "annihilate/errors.hpp"

namespace annihilate {

double GridFunction::at(std::ptrdiff_t i) const {
  if (i < 0) return tail_left;
  if (i >= static_cast<std::ptrdiff_t>(values.size())) return tail_right;
  return values[static_cast<std::size_t>(i)];
}

double GridFunction::interpolate(double xq) const {
  if (values.empty()) return tail_left;
  if (xq < x_min) return tail_left;
  const double s = (xq - x_min) / h;
  const std::size_t n = values.size();
  if (s >= static_cast<double>(n - 1)) return s == static_cast<double>(n - 1) ? values[n - 1] : tail_right;
  const auto i = static_cast<std::size_t>(std::floor(s));
  const double f = s - static_cast<double>(i);
  return (1.0 - f) * values[i] + f * values[i + 1];
}

double GridFunction::sup_norm() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

double GridFunction::lipschitz() const {
  double m = 0.0;
  const auto n = static_cast<std::ptrdiff_t>(values.size());
  for (std::ptrdiff_t i = -1; i < n; ++i) m = std::max(m, std::abs(at(i + 1) - at(i)));
  return m / h;
}

GridFunction sample_grid(const std::function<double(double)>& u0, const SchemeConfig& config) {
  if (!(config.h > 0.0) || !(config.L > 0.0)) throw ConfigError("grid needs L > 0 and h > 0");
  GridFunction g;
  g.h = config.h;
  const auto half = static_cast<std::size_t>(std::llround(config.L / config.h));
  g.x_min = -static_cast<double>(half) * config.h;
  g.values.resize(2 * half + 1);
  for (std::size_t i = 0; i < g.values.size(); ++i) g.values[i] = u0(g.x(i));
  g.tail_left = u0(g.x_min);
  g.tail_right = u0(g.x_max());
  return g;
}

LevyKernel::LevyKernel(double h, int rho_cells, std::size_t nodes) : rho_cells_(rho_cells) {
  if (rho_cells < 2) throw ConfigError("rho must be at least two grid cells");
  if (nodes < 1) throw ConfigError("grid has no nodes");
  const std::size_t K = static_cast<std::size_t>(rho_cells);
  const std::size_t n = std::max(nodes, K + 1);
  w_.assign(n, 0.0);
  w_near_.assign(n, 0.0);
  // Near field: trapezoid rule for (u(x+z) + u(x-z) - 2u(x)) / z^2 on [0, rho];
  // the z = 0 endpoint is u''(x) / 2 ~ D_1 / (2 h^2).
  w_near_[1] += 0.5 / h;
  for (std::size_t k = 1; k < K; ++k) w_near_[k] += 1.0 / (static_cast<double>(k * k) * h);
  w_near_[K] += 0.5 / (static_cast<double>(K * K) * h);
  // Far field: exact integral of 1/z^2 over the cell represented by node k.
  auto cell = [h](double a, double b) { return 1.0 / (a * h) - 1.0 / (b * h); };
  for (std::size_t k = 0; k < n; ++k) w_[k] = w_near_[k];
  w_[K] += cell(static_cast<double>(K), static_cast<double>(K) + 0.5);
  for (std::size_t k = K + 1; k < n; ++k)
    w_[k] += cell(static_cast<double>(k) - 0.5, static_cast<double>(k) + 0.5);
  tail_ = 1.0 / ((static_cast<double>(n) - 0.5) * h);
  total_ = 2.0 * tail_;
  for (std::size_t k = 1; k < n; ++k) total_ += 2.0 * w_[k];
}

double LevyKernel::apply(const GridFunction& u, std::size_t i) const {
  const auto ii = static_cast<std::ptrdiff_t>(i);
  const double ui = u.values[i];
  double s = 0.0;
  for (std::size_t k = 1; k < w_.size(); ++k) {
    const auto kk = static_cast<std::ptrdiff_t>(k);
    s += w_[k] * ((u.at(ii + kk) - ui) + (u.at(ii - kk) - ui));
  }
  s += tail_ * ((u.tail_left - ui) + (u.tail_right - ui));
  return s;
}

double LevyKernel::near_field(const GridFunction& u, std::size_t i) const {
  const auto ii = static_cast<std::ptrdiff_t>(i);
  const double ui = u.values[i];
  double s = 0.0;
  for (std::size_t k = 1; k <= static_cast<std::size_t>(rho_cells_); ++k) {
    const auto kk = static_cast<std::ptrdiff_t>(k);
    s += w_near_[k] * ((u.at(ii + kk) - ui) + (u.at(ii - kk) - ui));
  }
  return s;
}

double LevyKernel::far_field(const GridFunction& u, std::size_t i) const {
  const auto ii = static_cast<std::ptrdiff_t>(i);
  const double ui = u.values[i];
  double s = 0.0;
  for (std::size_t k = static_cast<std::size_t>(rho_cells_); k < w_.size(); ++k) {
    const auto kk = static_cast<std::ptrdiff_t>(k);
    s += (w_[k] - w_near_[k]) * ((u.at(ii + kk) - ui) + (u.at(ii - kk) - ui));
  }
  s += tail_ * ((u.tail_left - ui) + (u.tail_right - ui));
  return s;
}

double levy_operator(const GridFunction& u, std::size_t i, int rho_cells) {
  return LevyKernel(u.h, rho_cells, u.size()).apply(u, i);
}

namespace {

// I[u] at every node, reading a tail-padded copy of the values.
std::vector<double> levy_all(const GridFunction& u, const LevyKernel& kernel) {
  const std::size_t n = u.size();
  const std::size_t m = kernel.weights().size();
  std::vector<double> ext(n + 2 * m);
  for (std::size_t j = 0; j < ext.size(); ++j)
    ext[j] = u.at(static_cast<std::ptrdiff_t>(j) - static_cast<std::ptrdiff_t>(m));
  const double* w = kernel.weights().data();
  const double tail = kernel.tail_weight();
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* c = ext.data() + m + i;
    const double ui = *c;
    double s = 0.0;
    for (std::size_t k = 1; k < m; ++k) s += w[k] * ((c[k] - ui) + (c[-static_cast<std::ptrdiff_t>(k)] - ui));
    s += tail * ((u.tail_left - ui) + (u.tail_right - ui));
    v[i] = s;
  }
  return v;
}

double max_rate(const GridFunction& u, const std::vector<double>& v, double total_weight) {
  double rate = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const auto ii = static_cast<std::ptrdiff_t>(i);
    const double dp = (u.at(ii + 1) - u.values[i]) / u.h;
    const double dm = (u.values[i] - u.at(ii - 1)) / u.h;
    const double g = std::max(std::abs(dp), std::abs(dm));
    rate = std::max(rate, std::abs(v[i]) / u.h + total_weight * g);
  }
  return rate;
}

void check_config(const SchemeConfig& config) {
  if (!(config.cfl > 0.0 && config.cfl < 1.0)) throw ConfigError("cfl must lie in (0, 1)");
  if (config.rho_cells < 2) throw ConfigError("rho_cells must be at least 2");
  if (!(config.h > 0.0) || !(config.L > 0.0)) throw ConfigError("grid needs L > 0 and h > 0");
}

}  // namespace

double stable_dt(const GridFunction& u, const SchemeConfig& config) {
  check_config(config);
  const LevyKernel kernel(u.h, config.rho_cells, u.size());
  const std::vector<double> v = levy_all(u, kernel);
  const double rate = max_rate(u, v, kernel.total_weight());
  return rate > 0.0 ? config.cfl / rate : std::numeric_limits<double>::infinity();
}

namespace {

GridFunction step_with(const GridFunction& u, const LevyKernel& kernel, const SchemeConfig& config,
                       double dt) {
  const std::vector<double> v = levy_all(u, kernel);
  const double rate = max_rate(u, v, kernel.total_weight());
  const double limit = rate > 0.0 ? config.cfl / rate : std::numeric_limits<double>::infinity();
  if (dt <= 0.0) dt = std::min(limit, config.t_end - u.time);
  if (!(dt > 0.0)) return u;
  if (dt > limit) {
    std::ostringstream os;
    os << "dt = " << dt << " exceeds the stable step " << limit;
    throw CFLViolation(os.str());
  }
  GridFunction out = u;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const auto ii = static_cast<std::ptrdiff_t>(i);
    const double dp = (u.at(ii + 1) - u.values[i]) / u.h;
    const double dm = (u.values[i] - u.at(ii - 1)) / u.h;
    double phi;
    if (v[i] >= 0.0)
      phi = v[i] * std::max({dp, -dm, 0.0});
    else
      phi = v[i] * std::max({dm, -dp, 0.0});
    out.values[i] = u.values[i] + dt * phi;
  }
  out.time = u.time + dt;
  return out;
}

}  // namespace

GridFunction step_hj(const GridFunction& u, const SchemeConfig& config, double dt) {
  check_config(config);
  const LevyKernel kernel(u.h, config.rho_cells, u.size());
  return step_with(u, kernel, config, dt);
}

HJSolution solve_hj(const std::function<double(double)>& u0, const SchemeConfig& config) {
  check_config(config);
  GridFunction u = sample_grid(u0, config);
  const double tol = 1e-14 * std::max(1.0, u.sup_norm());
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double xi = u.x(i);
    if (xi <= -0.5 * config.L && std::abs(u.values[i] - u.tail_left) > tol)
      throw ConfigError("initial datum is not constant on x <= -L/2");
    if (xi >= 0.5 * config.L && std::abs(u.values[i] - u.tail_right) > tol)
      throw ConfigError("initial datum is not constant on x >= L/2");
  }
  const LevyKernel kernel(u.h, config.rho_cells, u.size());

  std::vector<double> targets;
  for (double t : config.snapshot_times)
    if (t > 0.0 && t < config.t_end) targets.push_back(t);
  std::sort(targets.begin(), targets.end());
  targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
  targets.push_back(config.t_end);

  HJSolution sol;
  sol.snapshots.push_back(u);
  for (double target : targets) {
    while (u.time < target) {
      const std::vector<double> v = levy_all(u, kernel);
      const double rate = max_rate(u, v, kernel.total_weight());
      const double limit = rate > 0.0 ? config.cfl / rate : std::numeric_limits<double>::infinity();
      const double remaining = target - u.time;
      const bool last = limit >= remaining;
      u = step_with(u, kernel, config, last ? remaining : limit);
      if (last) u.time = target;
      ++sol.steps;
    }
    sol.snapshots.push_back(u);
  }
  return sol;
}

RefinementStudy refinement_study(const std::function<double(double)>& u0,
                                 const SchemeConfig& config, int levels) {
  RefinementStudy study;
  std::vector<GridFunction> finals;
  SchemeConfig c = config;
  c.snapshot_times.clear();
  for (int l = 0; l <= levels; ++l) {
    study.h.push_back(c.h);
    finals.push_back(solve_hj(u0, c).snapshots.back());
    c.h *= 0.5;
  }
  for (std::size_t l = 0; l + 1 < finals.size(); ++l) {
    const GridFunction &coarse = finals[l], &fine = finals[l + 1];
    double e = 0.0;
    for (std::size_t i = 0; i < coarse.size(); ++i) e = std::max(e, std::abs(coarse.values[i] - fine.values[2 * i]));
    study.error.push_back(e);
  }
  for (std::size_t l = 0; l + 1 < study.error.size(); ++l)
    study.order.push_back(std::log2(study.error[l] / study.error[l + 1]));
  return study;
}

double barrier_speed(double lipschitz, double semiconcavity, double v0_sup) {
  const double L = lipschitz, K = semiconcavity;
  return 2.0 * (K * L + kBarrierConstant * (K + L * L) + 4.0 * v0_sup * L + 1.0);
}

BarrierReport barrier_check(const std::function<double(double)>& v0, double lipschitz,
                            double semiconcavity, const std::function<double(double)>& u0,
                            const SchemeConfig& config) {
  const GridFunction v_grid = sample_grid(v0, config);
  BarrierReport r;
  r.sigma = barrier_speed(lipschitz, semiconcavity, v_grid.sup_norm());
  r.min_margin = std::numeric_limits<double>::infinity();
  const HJSolution sol = solve_hj(u0, config);
  for (const GridFunction& g : sol.snapshots)
    for (std::size_t i = 0; i < g.size(); ++i)
      r.min_margin = std::min(r.min_margin, v_grid.values[i] + r.sigma * g.time - g.values[i]);
  r.ok = r.min_margin >= 0.0;
  return r;
}

}  // namespace annihilate
