#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "permtest/errors.hpp"

namespace permtest {

/// Optimal relabeling between two vectors: distance^2 = sum_j (a_j - b_{permutation[j]})^2,
/// times 4 for the categorical distance.
struct Matching {
  std::vector<std::size_t> permutation;
  double distance = 0.0;
};

namespace detail {

inline std::vector<std::size_t> stable_order(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  return idx;
}

// Pairing order statistics is optimal for squared scalar costs.
inline Matching sorted_matching(std::span<const double> a, std::span<const double> b, double scale) {
  if (a.size() != b.size()) throw LengthMismatch("distance: vectors differ in length");
  const auto ia = stable_order(a);
  const auto ib = stable_order(b);
  Matching m;
  m.permutation.resize(a.size());
  double ss = 0.0;
  for (std::size_t r = 0; r < a.size(); ++r) {
    m.permutation[ia[r]] = ib[r];
    const double diff = a[ia[r]] - b[ib[r]];
    ss += diff * diff;
  }
  m.distance = scale * std::sqrt(ss);
  return m;
}

}  // namespace detail

inline constexpr double kSimplexTolerance = 1e-8;

/// Throws NotAProbabilityVector unless entries lie in [0,1] and sum to 1.
inline void require_probability_vector(std::span<const double> p, double tol = kSimplexTolerance) {
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0 && v <= 1.0)) throw NotAProbabilityVector("probability entries must lie in [0, 1]");
    sum += v;
  }
  if (std::abs(sum - 1.0) > tol) throw NotAProbabilityVector("probability vector does not sum to 1");
}

/// min over relabelings pi of || theta - mu_pi ||.
inline Matching gauss_distance(std::span<const double> theta, std::span<const double> mu) {
  return detail::sorted_matching(theta, mu, 1.0);
}

/// min over relabelings pi of 2 || sqrt(p) - sqrt(q_pi) ||.
inline Matching cat_distance(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw LengthMismatch("distance: vectors differ in length");
  require_probability_vector(p);
  require_probability_vector(q);
  std::vector<double> sp(p.size()), sq(q.size());
  std::transform(p.begin(), p.end(), sp.begin(), [](double v) { return std::sqrt(v); });
  std::transform(q.begin(), q.end(), sq.begin(), [](double v) { return std::sqrt(v); });
  return detail::sorted_matching(sp, sq, 2.0);
}

}  // namespace permtest
