#pragma once

// Thresholds that minimize the sum of Type-1 and Type-2 error against a local
// alternative at scale delta, and critical values under a noncentral null.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "permtest/distributions.hpp"
#include "permtest/errors.hpp"

namespace permtest {

enum class ThresholdKind { Gaussian, Categorical };

inline const char* to_string(ThresholdKind k) { return k == ThresholdKind::Gaussian ? "gauss" : "cat"; }

struct ThresholdSpec {
  int k = 2;
  double delta = 0.0;
  ThresholdKind kind = ThresholdKind::Gaussian;
  double t_star = 0.0;
  double total_error = 1.0;
};

inline constexpr std::size_t kThresholdGridPoints = 512;
inline constexpr std::size_t kSplitGridPoints = 201;

namespace detail {

inline void check_threshold_args(int k, double delta) {
  if (k < 2) throw Error("threshold: k must be at least 2");
  if (!(delta > 0.0) || !std::isfinite(delta)) throw Error("threshold: delta must be positive");
}

// Brent minimization on [lo, hi]; bits chosen so the abscissa is resolved well below tol.
template <class F>
std::pair<double, double> minimize_on(F&& f, double lo, double hi) {
  std::uintmax_t iters = 200;
  return boost::math::tools::brent_find_minima(f, lo, hi, 40, iters);
}

// Coarse grid over (0, upper] then local refinement inside the best cell.
template <class F>
std::pair<double, double> grid_then_refine(F&& f, double upper, std::size_t points) {
  std::size_t best = 1;
  double best_val = std::numeric_limits<double>::infinity();
  const double step = upper / static_cast<double>(points);
  for (std::size_t i = 1; i <= points; ++i) {
    const double v = f(step * static_cast<double>(i));
    if (v < best_val) {
      best_val = v;
      best = i;
    }
  }
  const double lo = step * static_cast<double>(best - 1);
  const double hi = step * static_cast<double>(std::min(best + 1, points));
  auto r = minimize_on(f, std::max(lo, 1e-12), hi);
  if (r.second <= best_val) return r;
  return {step * static_cast<double>(best), best_val};
}

inline double threshold_upper(int df, double delta) {
  const double d2 = delta * delta;
  return df + d2 + 12.0 * std::sqrt(2.0 * df + 4.0 * d2);
}

// P(chi2_{df, s} + (delta^2 - s) <= t) as a function of the split s = delta_1^2.
inline double split_probability(int df, double delta_sq, double s, double t) {
  const double x = t - (delta_sq - s);
  if (x <= 0.0) return 0.0;
  return chi2_cdf(ChiSquared{df, s}, x);
}

template <class Better>
double optimize_split(int df, double delta, double t, Better better) {
  const double d2 = delta * delta;
  std::size_t best = 0;
  double best_val = split_probability(df, d2, 0.0, t);
  const double step = d2 / static_cast<double>(kSplitGridPoints - 1);
  for (std::size_t i = 1; i < kSplitGridPoints; ++i) {
    const double v = split_probability(df, d2, step * static_cast<double>(i), t);
    if (better(v, best_val)) {
      best_val = v;
      best = i;
    }
  }
  const double lo = step * static_cast<double>(best == 0 ? 0 : best - 1);
  const double hi = std::min(d2, step * static_cast<double>(best + 1));
  const double sign = better(1.0, 0.0) ? -1.0 : 1.0;
  auto r = minimize_on([&](double s) { return sign * split_probability(df, d2, s, t); }, lo, hi);
  const double refined = sign * r.second;
  return better(refined, best_val) ? refined : best_val;
}

}  // namespace detail

/// sup over delta_1^2 + delta_2^2 = delta^2 of P(chi2_{df, delta_1^2} + delta_2^2 <= t).
inline double split_sup(int df, double delta, double t) {
  return detail::optimize_split(df, delta, t, [](double a, double b) { return a > b; });
}

/// inf over the same splits.
inline double split_inf(int df, double delta, double t) {
  return detail::optimize_split(df, delta, t, [](double a, double b) { return a < b; });
}

/// P(chi2_k > t) + P(chi2_{k, delta^2} <= t).
inline double gauss_total_error(int k, double delta, double t) {
  return chi2_sf(ChiSquared{k, 0.0}, t) + chi2_cdf(ChiSquared{k, delta * delta}, t);
}

/// P(chi2_{k-1} > t) + worst split of the alternative mass.
inline double cat_total_error(int k, double delta, double t) {
  return chi2_sf(ChiSquared{k - 1, 0.0}, t) + split_sup(k - 1, delta, t);
}

inline ThresholdSpec optimal_threshold_gauss(int k, double delta) {
  detail::check_threshold_args(k, delta);
  auto f = [&](double t) { return gauss_total_error(k, delta, t); };
  const auto r = detail::grid_then_refine(f, detail::threshold_upper(k, delta), kThresholdGridPoints);
  return {k, delta, ThresholdKind::Gaussian, r.first, r.second};
}

inline ThresholdSpec optimal_threshold_cat(int k, double delta) {
  detail::check_threshold_args(k, delta);
  auto f = [&](double t) { return cat_total_error(k, delta, t); };
  const auto r = detail::grid_then_refine(f, detail::threshold_upper(k - 1, delta), kThresholdGridPoints);
  return {k, delta, ThresholdKind::Categorical, r.first, r.second};
}

/// Upper alpha quantile of chi2_{df, tau_sq}.
inline double noncentral_null_threshold(int df, double tau_sq, double alpha) {
  if (!(tau_sq >= 0.0)) throw Error("noncentral threshold: tau_sq must be nonnegative");
  return chi2_quantile(ChiSquared{df, tau_sq}, alpha);
}

}  // namespace permtest
