#include "annihilate/moments.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>

#include "annihilate/detail/summation.hpp"
#include "annihilate/errors.hpp"

namespace annihilate {

MomentVector moments(const std::vector<double>& positions) {
  const std::size_t n = positions.size();
  std::vector<detail::CompensatedSum<long double>> sums(n);
  for (double xi : positions) {
    long double p = 1.0L;
    for (std::size_t k = 0; k < n; ++k) {
      p *= static_cast<long double>(xi);
      sums[k] += p;
    }
  }
  MomentVector m;
  m.values.resize(n);
  for (std::size_t k = 0; k < n; ++k)
    m.values[k] = static_cast<double>(sums[k].value() / static_cast<long double>(k + 1));
  return m;
}

double d_M(const MomentVector& a, const MomentVector& b) {
  if (a.size() != b.size()) {
    std::ostringstream os;
    os << "moment vectors have lengths " << a.size() << " and " << b.size();
    throw LengthMismatch(os.str());
  }
  long double s = 0.0L;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const long double d = static_cast<long double>(a.values[k]) - b.values[k];
    s += d * d;
  }
  return static_cast<double>(std::sqrt(s));
}

double d_M(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) {
    std::ostringstream os;
    os << "configurations have " << x.size() << " and " << y.size() << " points";
    throw LengthMismatch(os.str());
  }
  return d_M(moments(x), moments(y));
}

std::vector<long double> moments_to_elementary(const MomentVector& m) {
  const std::size_t n = m.size();
  std::vector<long double> e(n + 1, 0.0L);
  e[0] = 1.0L;
  for (std::size_t j = 1; j <= n; ++j) {
    long double s = 0.0L;
    for (std::size_t k = 1; k <= j; ++k) {
      const long double sign = (k % 2 == 1) ? 1.0L : -1.0L;
      s += sign * e[j - k] * static_cast<long double>(k) * m.values[k - 1];
    }
    e[j] = s / static_cast<long double>(j);
  }
  return e;
}

namespace {

// p(z) = sum_k (-1)^k e_k z^{n-k} and its derivative by Horner.
void eval_poly(const std::vector<long double>& e, long double z, long double& p, long double& dp) {
  p = 0.0L;
  dp = 0.0L;
  for (std::size_t k = 0; k < e.size(); ++k) {
    const long double c = (k % 2 == 0) ? e[k] : -e[k];
    dp = dp * z + p;
    p = p * z + c;
  }
}

}  // namespace

std::vector<double> reconstruct_positions(const MomentVector& m) {
  const std::size_t n = m.size();
  if (n == 0) return {};
  const std::vector<long double> e = moments_to_elementary(m);

  long double scale = 1.0L;
  for (std::size_t k = 1; k <= n; ++k)
    scale = std::max(scale, std::pow(std::abs(e[k]), 1.0L / static_cast<long double>(k)));

  using Mat = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  // Companion matrix of the monic polynomial, last column holds -c_{n-k}.
  Mat comp = Mat::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t r = 1; r < n; ++r) comp(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(r - 1)) = 1.0L;
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t k = n - r;  // coefficient of z^r is (-1)^k e_k
    const long double c = (k % 2 == 0) ? e[k] : -e[k];
    comp(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(n - 1)) = -c;
  }
  Eigen::EigenSolver<Mat> solver(comp, false);
  if (solver.info() != Eigen::Success) throw ComplexRoots("eigenvalue iteration did not converge");
  const auto ev = solver.eigenvalues();

  std::vector<double> roots;
  roots.reserve(n);
  for (Eigen::Index r = 0; r < ev.size(); ++r) {
    const std::complex<long double> z = ev[r];
    if (std::abs(z.imag()) > 1e-6L * scale) {
      std::ostringstream os;
      os << "root " << static_cast<double>(z.real()) << " + " << static_cast<double>(z.imag())
         << "i is not real";
      throw ComplexRoots(os.str());
    }
    long double x = z.real();
    // A few Newton corrections; multiple roots make dp vanish, then stop.
    for (int it = 0; it < 3; ++it) {
      long double p, dp;
      eval_poly(e, x, p, dp);
      if (dp == 0.0L) break;
      const long double nx = x - p / dp;
      if (!std::isfinite(nx) || std::abs(nx - x) > 1e-6L * scale) break;
      x = nx;
    }
    roots.push_back(static_cast<double>(x));
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

}  // namespace annihilate
