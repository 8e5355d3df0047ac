#include "annihilate/measures.hpp"

#include <algorithm>
#include <cmath>

#include "annihilate/detail/summation.hpp"

namespace annihilate {

double SignedAtomicMeasure::total_mass() const {
  detail::CompensatedSum<double> s;
  for (const Atom& a : atoms) s += a.weight;
  return s.value();
}

double SignedAtomicMeasure::total_variation() const {
  // Atoms at one location cancel before taking absolute values.
  const StepFunction u = cdf(*this, 1.0);
  return u.total_variation();
}

double SignedAtomicMeasure::variation_outside(double R) const {
  const StepFunction u = cdf(*this, 1.0);
  double s = 0.0;
  for (const Jump& j : u.jumps)
    if (j.location < -R || j.location > R) s += std::abs(j.size);
  return s;
}

SignedAtomicMeasure measure_from_particles(const ParticleState& state) {
  SignedAtomicMeasure mu;
  for (std::size_t i = 0; i < state.size(); ++i)
    if (state.charges[i] != 0) mu.atoms.push_back({state.positions[i], state.charges[i] * state.coupling});
  return mu;
}

StepFunction cdf(const SignedAtomicMeasure& mu, double eps) {
  std::vector<Jump> jumps;
  jumps.reserve(mu.atoms.size());
  double wmax = 0.0;
  for (const Atom& a : mu.atoms) {
    jumps.push_back({a.location, a.weight});
    wmax = std::max(wmax, std::abs(a.weight));
  }
  if (eps <= 0.0) eps = wmax > 0.0 ? wmax : 1.0;
  return make_step_function(std::move(jumps), 0.0, eps);
}

double aec_defect(const SignedAtomicMeasure& mu, const std::function<double(double)>& omega) {
  const StepFunction u = cdf(mu, 1.0);
  const std::size_t m = u.jumps.size();
  double s = 0.0;
  for (std::size_t p = 0; p < m; ++p) {
    double mass = 0.0;
    for (std::size_t q = p; q < m; ++q) {
      mass += u.jumps[q].size;
      s = std::max(s, std::abs(mass) - omega(u.jumps[q].location - u.jumps[p].location));
    }
  }
  return s;
}

AecReport aec_modulus(const std::vector<SignedAtomicMeasure>& mus,
                      const std::function<double(double)>& omega, double threshold) {
  AecReport r;
  for (const auto& mu : mus) r.s.push_back(aec_defect(mu, omega));
  if (r.s.empty()) {
    r.pass = true;
    return r;
  }
  bool monotone = true;
  for (std::size_t k = r.s.size() / 2; k + 1 < r.s.size(); ++k)
    if (r.s[k + 1] > r.s[k] + 1e-12) monotone = false;
  r.pass = monotone && r.s.back() <= threshold;
  return r;
}

std::size_t TestDictionary::size() const {
  std::size_t n = 0;
  for (int j = 0; j <= levels; ++j) n += 2 * ((std::size_t{1} << j) + 1);
  return n;
}

double TestDictionary::eval(std::size_t index, double x) const {
  for (int j = 0; j <= levels; ++j) {
    const std::size_t count = (std::size_t{1} << j) + 1;
    const double s = (hi - lo) / static_cast<double>(std::size_t{1} << j);
    if (index < 2 * count) {
      const double c = lo + static_cast<double>(index % count) * s;
      if (index < count) return std::tanh((x - c) / s);
      return std::max(0.0, 1.0 - std::abs(x - c) / s);
    }
    index -= 2 * count;
  }
  return 0.0;
}

double narrow_distance_proxy(const SignedAtomicMeasure& mu, const SignedAtomicMeasure& nu,
                             const TestDictionary& dictionary) {
  double best = 0.0;
  for (std::size_t f = 0; f < dictionary.size(); ++f) {
    detail::CompensatedSum<double> s;
    for (const Atom& a : mu.atoms) s += a.weight * dictionary.eval(f, a.location);
    for (const Atom& a : nu.atoms) s += -a.weight * dictionary.eval(f, a.location);
    best = std::max(best, std::abs(s.value()));
  }
  return best;
}

}  // namespace annihilate
