#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "annihilate/levelset.hpp"
#include "annihilate/particles.hpp"

namespace annihilate {

struct Atom {
  double location = 0.0;
  double weight = 0.0;
};

// Finite signed sum of point masses.
struct SignedAtomicMeasure {
  std::vector<Atom> atoms;

  double total_mass() const;
  double total_variation() const;
  // |kappa| of the complement of [-R, R].
  double variation_outside(double R) const;
};

// kappa = gamma * sum_i b_i delta_{x_i}.
SignedAtomicMeasure measure_from_particles(const ParticleState& state);

// x -> kappa((-inf, x]). `eps` becomes the level spacing of the result;
// eps <= 0 uses the largest atom weight.
StepFunction cdf(const SignedAtomicMeasure& mu, double eps = 0.0);

struct AecReport {
  std::vector<double> s;  // s_n per measure
  bool pass = false;
};

// s_n = max over atom intervals (x, y] of (|kappa_n((x,y])| - omega(y - x))^+.
double aec_defect(const SignedAtomicMeasure& mu, const std::function<double(double)>& omega);

// Passes iff s_n is non-increasing over the second half of the sequence and
// its last value is at most `threshold`.
AecReport aec_modulus(const std::vector<SignedAtomicMeasure>& mus,
                      const std::function<double(double)>& omega, double threshold = 0.05);

// Bounded Lipschitz test functions: tanh((x - c)/s) and max(0, 1 - |x - c|/s)
// with s = (hi - lo) / 2^j and c = lo + m s for j = 0..levels, m = 0..2^j.
struct TestDictionary {
  double lo = -1.0;
  double hi = 1.0;
  int levels = 6;

  std::size_t size() const;
  double eval(std::size_t index, double x) const;
};

// max over the dictionary of |int phi d(mu) - int phi d(nu)|.
double narrow_distance_proxy(const SignedAtomicMeasure& mu, const SignedAtomicMeasure& nu,
                             const TestDictionary& dictionary);

}  // namespace annihilate
