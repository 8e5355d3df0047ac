#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace annihilate {

// Samples of u on the uniform grid x_i = x_min + i h, extended by constants
// tail_left / tail_right outside the grid.
struct GridFunction {
  double x_min = 0.0;
  double h = 1.0;
  std::vector<double> values;
  double tail_left = 0.0;
  double tail_right = 0.0;
  double time = 0.0;

  std::size_t size() const { return values.size(); }
  double x(std::size_t i) const { return x_min + static_cast<double>(i) * h; }
  double x_max() const { return x(values.empty() ? 0 : values.size() - 1); }
  // Node value or tail; index may lie outside the grid.
  double at(std::ptrdiff_t i) const;
  // Piecewise-linear interpolation, tails outside the grid.
  double interpolate(double x) const;
  double sup_norm() const;
  // max_i |u_{i+1} - u_i| / h, including the steps to the tails.
  double lipschitz() const;
};

struct SchemeConfig {
  double L = 4.0;      // grid covers [-L, L]
  double h = 1.0 / 64;
  int rho_cells = 4;   // near/far split radius rho = rho_cells * h
  double cfl = 0.5;
  double t_end = 1.0;
  std::vector<double> snapshot_times;
};

// Samples u0 on [-L, L]; tails are u0(-L), u0(L).
GridFunction sample_grid(const std::function<double(double)>& u0, const SchemeConfig& config);

// Quadrature weights of the order-1 Levy operator on a grid with n nodes:
// I[u]_i = sum_{k=1}^{n-1} w_k (u_{i+k} + u_{i-k} - 2 u_i)
//          + tail_weight (tail_left + tail_right - 2 u_i).
class LevyKernel {
 public:
  LevyKernel(double h, int rho_cells, std::size_t nodes);

  double apply(const GridFunction& u, std::size_t i) const;
  // The parts of apply() from |z| < rho and |z| >= rho.
  double near_field(const GridFunction& u, std::size_t i) const;
  double far_field(const GridFunction& u, std::size_t i) const;
  // Sum of the coefficients of u_i's neighbours, i.e. -d I_i / d u_i.
  double total_weight() const { return total_; }

  const std::vector<double>& weights() const { return w_; }
  double tail_weight() const { return tail_; }

 private:
  int rho_cells_;
  std::vector<double> w_;       // w_[k], k >= 1, combined near + far
  std::vector<double> w_near_;  // near-field part of w_[k]
  double tail_ = 0.0;
  double total_ = 0.0;
};

double levy_operator(const GridFunction& u, std::size_t i, int rho_cells);

// Largest dt for which the explicit upwind update is monotone.
double stable_dt(const GridFunction& u, const SchemeConfig& config);

// One forward-Euler step with monotone upwinding. dt <= 0 takes the stable
// step (capped at t_end). Throws CFLViolation when dt exceeds the stable step.
GridFunction step_hj(const GridFunction& u, const SchemeConfig& config, double dt = 0.0);

struct HJSolution {
  std::vector<GridFunction> snapshots;  // initial, snapshot_times, t_end
  std::size_t steps = 0;
};

// Requires u0 constant on |x| >= L/2.
HJSolution solve_hj(const std::function<double(double)>& u0, const SchemeConfig& config);

struct RefinementStudy {
  std::vector<double> h;
  std::vector<double> error;  // sup distance at t_end to the next finer level
  std::vector<double> order;  // log2(error_k / error_{k+1})
};

// Runs the solver at h, h/2, ..., h/2^levels and compares on coarse nodes.
RefinementStudy refinement_study(const std::function<double(double)>& u0,
                                 const SchemeConfig& config, int levels);

struct BarrierReport {
  bool ok = true;
  double sigma = 0.0;
  double min_margin = 0.0;  // min over snapshots and nodes of v0 + sigma t - u
};

// Constant of the parabola lemma used in the barrier speed.
inline constexpr double kBarrierConstant = 2.414213562373095;  // 1 + sqrt(2)

// sigma = 2 (K L + C (K + L^2) + 4 ||v0|| L + 1).
double barrier_speed(double lipschitz, double semiconcavity, double v0_sup);

// Checks that the scheme solution from u0 stays below v0 + sigma t.
BarrierReport barrier_check(const std::function<double(double)>& v0, double lipschitz,
                            double semiconcavity, const std::function<double(double)>& u0,
                            const SchemeConfig& config);

}  // namespace annihilate
