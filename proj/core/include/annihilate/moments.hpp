#pragma once

#include <vector>

namespace annihilate {

// Entry k-1 holds M_k(x) = (1/k) sum_i x_i^k, k = 1..n.
struct MomentVector {
  std::vector<double> values;
  std::size_t size() const { return values.size(); }
};

// Accumulated in extended precision with compensated summation.
MomentVector moments(const std::vector<double>& positions);

// Euclidean distance of the moment vectors. Throws LengthMismatch.
double d_M(const std::vector<double>& x, const std::vector<double>& y);
double d_M(const MomentVector& a, const MomentVector& b);

// Elementary symmetric values e_0..e_n via Newton's identities
// m e_m = sum_{k=1}^m (-1)^{k-1} e_{m-k} k M_k.
std::vector<long double> moments_to_elementary(const MomentVector& m);

// Roots of prod (z - x_i) = sum_k (-1)^k e_k z^{n-k}, sorted ascending.
// Throws ComplexRoots when the moments are not realised by real points.
std::vector<double> reconstruct_positions(const MomentVector& m);

}  // namespace annihilate
