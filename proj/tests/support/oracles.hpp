#pragma once

// Independent reference computations used only by the tests. Nothing here
// calls into the library's numerical routines.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

/// e_0..e_k by summing the product over every subset (2^k terms).
inline std::vector<double> elementary_by_subsets(const std::vector<double>& x) {
  const std::size_t k = x.size();
  std::vector<double> e(k + 1, 0.0);
  for (std::size_t mask = 0; mask < (std::size_t{1} << k); ++mask) {
    double prod = 1.0;
    std::size_t bits = 0;
    for (std::size_t j = 0; j < k; ++j)
      if (mask & (std::size_t{1} << j)) {
        prod *= x[j];
        ++bits;
      }
    e[bits] += prod;
  }
  return e;
}

/// Same subset sums over |x|; the natural scale for relative error of e_l.
inline std::vector<double> elementary_abs_scale(const std::vector<double>& x) {
  std::vector<double> a(x.size());
  std::transform(x.begin(), x.end(), a.begin(), [](double v) { return std::abs(v); });
  return elementary_by_subsets(a);
}

/// Coefficients of prod_{j != l} (t - x_j) by direct expansion, lowest degree first.
inline std::vector<double> expand_product_without(const std::vector<double>& x, std::size_t l) {
  std::vector<double> c{1.0};
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (j == l) continue;
    std::vector<double> next(c.size() + 1, 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) {
      next[i + 1] += c[i];
      next[i] -= x[j] * c[i];
    }
    c = std::move(next);
  }
  return c;
}

/// Determinant by Eigen's partial-pivot LU.
inline double lu_determinant(const Eigen::MatrixXd& m) { return m.partialPivLu().determinant(); }

/// Minimum over all permutations of ||a - b_pi||, by enumeration.
inline double brute_force_matching(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<std::size_t> perm(a.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  double best = std::numeric_limits<double>::infinity();
  do {
    double ss = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) ss += (a[j] - b[perm[j]]) * (a[j] - b[perm[j]]);
    best = std::min(best, ss);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return std::sqrt(best);
}

/// Argmin of f over lo, lo+step, ..., hi.
inline std::pair<double, double> grid_argmin(const std::function<double(double)>& f, double lo, double hi, double step) {
  double best_t = lo, best = std::numeric_limits<double>::infinity();
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
  for (std::size_t i = 0; i <= count; ++i) {
    const double t = lo + step * static_cast<double>(i);
    const double v = f(t);
    if (v < best) {
      best = v;
      best_t = t;
    }
  }
  return {best_t, best};
}

/// Dense grid argmin done in two stages: coarse step over [lo, hi], then a
/// fine step over a window around the coarse winner.
inline std::pair<double, double> two_stage_argmin(const std::function<double(double)>& f, double lo, double hi,
                                                  double coarse, double fine, double window) {
  const auto c = grid_argmin(f, lo, hi, coarse);
  return grid_argmin(f, std::max(lo, c.first - window), std::min(hi, c.first + window), fine);
}

/// CDF of Gamma(shape = a integer, scale 1) in closed form (Erlang).
inline double erlang_cdf(int a, double x) {
  if (x <= 0.0) return 0.0;
  double term = 1.0, sum = 1.0;
  for (int i = 1; i < a; ++i) {
    term *= x / i;
    sum += term;
  }
  return 1.0 - std::exp(-x) * sum;
}

/// chi2_df density written out from its definition.
inline double chi2_density(int df, double x) {
  if (x <= 0.0) return 0.0;
  const double h = 0.5 * df;
  return std::exp((h - 1.0) * std::log(x) - 0.5 * x - h * std::log(2.0) - std::lgamma(h));
}

/// P(0.5 * chi2_{2a} + chi2_b <= y) = P(Gamma(a,1) + chi2_b <= y) for b >= 1,
/// integrating the chi2_b density against the Erlang CDF. The substitution
/// x = u^2 removes the singularity at 0 for b = 1; composite Simpson on u.
inline double erlang_plus_chi2_cdf(int a, int b, double y, int panels = 20000) {
  if (y <= 0.0) return 0.0;
  if (b == 0) return erlang_cdf(a, y);
  const double umax = std::sqrt(y);
  const double h = umax / panels;
  auto g = [&](double u) {
    const double x = u * u;
    // density in u: f(x) * 2u; for b = 1 use the limit 2u * x^{-1/2} = 2 to stay finite at u = 0.
    double dens;
    if (b == 1) dens = 2.0 * std::exp(-0.5 * x - 0.5 * std::log(2.0) - std::lgamma(0.5));
    else dens = chi2_density(b, x) * 2.0 * u;
    return dens * erlang_cdf(a, y - x);
  };
  double s = g(0.0) + g(umax);
  for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * g(h * i);
  return s * h / 3.0;
}

/// Empirical CDF of a sample at x.
inline double ecdf(const std::vector<double>& sorted, double x) {
  return static_cast<double>(std::upper_bound(sorted.begin(), sorted.end(), x) - sorted.begin()) /
         static_cast<double>(sorted.size());
}

}  // namespace oracle
