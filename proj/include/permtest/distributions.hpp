#pragma once

// Null laws used for calibration: central and noncentral chi-squared, and
// nonnegative combinations of independent chi-squared variables (which covers
// the two-sample mixture 0.5*beta*X1 + 0.5*(1-beta)*X2 + X3).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/distributions/poisson.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/roots.hpp>

#include "permtest/errors.hpp"
#include "permtest/rng.hpp"

namespace permtest {

inline constexpr double kPoissonTailCutoff = 1e-12;

struct ChiSquared {
  int df = 1;
  double noncentrality = 0.0;

  double mean() const { return df + noncentrality; }
  double variance() const { return 2.0 * df + 4.0 * noncentrality; }
};

namespace detail {

inline void check_chi2(const ChiSquared& dist) {
  if (dist.df < 1) throw Error("chi-squared: df must be a positive integer");
  if (!(dist.noncentrality >= 0.0)) throw Error("chi-squared: noncentrality must be >= 0");
}

struct CdfPair {
  double lower;
  double upper;
};

// Poisson(lambda/2) mixture of central laws, summed outward from the Poisson
// mode. Each direction stops once a geometric bound on the remaining Poisson
// mass drops below tail_cutoff / 2. Central terms come from the recurrences
// P(a+1,x) = P(a,x) - D(a), Q(a+1,x) = Q(a,x) + D(a), D(a) = x^a e^-x / Gamma(a+1).
inline CdfPair noncentral_cdf_pair(int df, double lambda, double x, double tail_cutoff) {
  using boost::math::gamma_p;
  using boost::math::gamma_p_derivative;
  using boost::math::gamma_q;
  const double half = 0.5 * lambda;
  const double xh = 0.5 * x;
  const double a0 = 0.5 * df;
  const auto mode = static_cast<long>(std::floor(half));
  const double w_mode = boost::math::pdf(boost::math::poisson_distribution<double>(half), static_cast<double>(mode));

  double lower = 0.0;
  double upper = 0.0;

  // Upward pass: j = mode, mode + 1, ...
  {
    double a = a0 + static_cast<double>(mode);
    double p = gamma_p(a, xh);
    double q = gamma_q(a, xh);
    double dterm = gamma_p_derivative(a + 1.0, xh);  // D(a)
    const bool recur = dterm > 0.0 && std::isfinite(dterm);
    double w = w_mode;
    for (long j = mode;; ++j) {
      lower += w * p;
      upper += w * q;
      const double r = half / static_cast<double>(j + 1);
      if (r < 1.0 && w * r / (1.0 - r) < 0.5 * tail_cutoff) break;
      if (j - mode > 100000) break;
      w *= r;
      if (recur) {
        p = std::max(0.0, p - dterm);
        q = std::min(1.0, q + dterm);
        dterm *= xh / (a + 1.0);
      } else {
        p = gamma_p(a + 1.0, xh);
        q = gamma_q(a + 1.0, xh);
      }
      a += 1.0;
    }
  }
  // Downward pass: j = mode - 1, ..., 0
  if (mode > 0) {
    double a = a0 + static_cast<double>(mode);
    double w = w_mode;
    double p = gamma_p(a, xh);
    double q = gamma_q(a, xh);
    double dterm = gamma_p_derivative(a, xh);  // D(a - 1)
    const bool recur = dterm > 0.0 && std::isfinite(dterm);
    for (long j = mode; j > 0; --j) {
      const double s = static_cast<double>(j) / half;  // w_{j-1} = w_j * j / half
      w *= s;
      if (recur) {
        p = std::min(1.0, p + dterm);
        q = std::max(0.0, q - dterm);
        a -= 1.0;
        dterm *= a / xh;  // D(a - 1) = D(a) * a / x
      } else {
        a -= 1.0;
        p = gamma_p(a, xh);
        q = gamma_q(a, xh);
      }
      lower += w * p;
      upper += w * q;
      const double s_next = static_cast<double>(j - 1) / half;
      if (s_next < 1.0 && w * s_next / (1.0 - s_next) < 0.5 * tail_cutoff) break;
    }
  }
  return {std::clamp(lower, 0.0, 1.0), std::clamp(upper, 0.0, 1.0)};
}

inline CdfPair chi2_cdf_pair(const ChiSquared& dist, double x, double tail_cutoff) {
  check_chi2(dist);
  if (!(x > 0.0)) return {0.0, 1.0};
  if (std::isinf(x)) return {1.0, 0.0};
  if (dist.noncentrality == 0.0) {
    return {boost::math::gamma_p(0.5 * dist.df, 0.5 * x), boost::math::gamma_q(0.5 * dist.df, 0.5 * x)};
  }
  return noncentral_cdf_pair(dist.df, dist.noncentrality, x, tail_cutoff);
}

}  // namespace detail

/// P(X <= x). Zero for x <= 0.
inline double chi2_cdf(const ChiSquared& dist, double x, double tail_cutoff = kPoissonTailCutoff) {
  return detail::chi2_cdf_pair(dist, x, tail_cutoff).lower;
}

/// P(X > x), computed without cancellation so small p-values keep their digits.
inline double chi2_sf(const ChiSquared& dist, double x, double tail_cutoff = kPoissonTailCutoff) {
  return detail::chi2_cdf_pair(dist, x, tail_cutoff).upper;
}

/// Density of the central law.
inline double chi2_pdf(int df, double x) {
  if (x < 0.0) return 0.0;
  if (x == 0.0) return df == 2 ? 0.5 : (df == 1 ? std::numeric_limits<double>::infinity() : 0.0);
  return 0.5 * boost::math::gamma_p_derivative(0.5 * df, 0.5 * x);
}

/// Upper-alpha critical value q with P(X <= q) = 1 - alpha.
inline double chi2_quantile(const ChiSquared& dist, double alpha) {
  detail::check_chi2(dist);
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error("chi2_quantile: alpha must lie in (0, 1)");
  if (dist.noncentrality == 0.0) return 2.0 * boost::math::gamma_q_inv(0.5 * dist.df, alpha);

  // Root of the tail with the better conditioning for this alpha.
  const bool use_upper = alpha < 0.5;
  auto f = [&](double x) {
    const auto pr = detail::chi2_cdf_pair(dist, x, kPoissonTailCutoff);
    return use_upper ? pr.upper - alpha : (1.0 - alpha) - pr.lower;
  };
  double lo = 0.0;
  double hi = dist.mean() + 10.0 * std::sqrt(dist.variance());
  while (f(hi) > 0.0) hi *= 2.0;
  std::uintmax_t iters = 200;
  const auto r = boost::math::tools::toms748_solve(f, lo, hi, f(lo), f(hi),
                                                   boost::math::tools::eps_tolerance<double>(50), iters);
  return 0.5 * (r.first + r.second);
}

inline double chi2_sample(const ChiSquared& dist, Rng& rng) {
  detail::check_chi2(dist);
  std::normal_distribution<double> normal;
  if (dist.noncentrality == 0.0) {
    return std::gamma_distribution<double>(0.5 * dist.df, 2.0)(rng);
  }
  // chi2_{df-1} + (Z + sqrt(lambda))^2
  const double z = normal(rng) + std::sqrt(dist.noncentrality);
  double rest = 0.0;
  if (dist.df > 1) rest = std::gamma_distribution<double>(0.5 * (dist.df - 1), 2.0)(rng);
  return rest + z * z;
}

inline std::vector<double> sample(const ChiSquared& dist, Rng& rng, std::size_t count) {
  std::vector<double> out(count);
  for (auto& v : out) v = chi2_sample(dist, rng);
  return out;
}

/// Law of sum_i weight_i * X_i with X_i ~ chi2_{df_i} independent. Terms with
/// zero weight or zero df are point masses at 0 and are dropped.
class ChiSquaredCombination {
 public:
  struct Term {
    double weight;
    int df;
  };

  ChiSquaredCombination() = default;
  explicit ChiSquaredCombination(const std::vector<Term>& terms) {
    for (const auto& t : terms) {
      if (t.df < 0 || !(t.weight >= 0.0)) throw Error("chi-squared combination: bad term");
      if (t.df == 0 || t.weight == 0.0) continue;
      // Equal weights add their degrees of freedom: one integral fewer.
      auto same = std::find_if(terms_.begin(), terms_.end(), [&](const Term& u) {
        return std::abs(u.weight - t.weight) <= 1e-14 * std::max(u.weight, t.weight);
      });
      if (same != terms_.end()) same->df += t.df;
      else terms_.push_back(t);
    }
    // Innermost (last) term is evaluated in closed form; keep the largest
    // scaled spread there so the outer integrals see the smoother integrands.
    std::stable_sort(terms_.begin(), terms_.end(),
                     [](const Term& a, const Term& b) { return a.weight * a.df < b.weight * b.df; });
  }

  const std::vector<Term>& terms() const { return terms_; }
  bool is_point_mass() const { return terms_.empty(); }

  double mean() const {
    double m = 0.0;
    for (const auto& t : terms_) m += t.weight * t.df;
    return m;
  }
  double variance() const {
    double v = 0.0;
    for (const auto& t : terms_) v += 2.0 * t.weight * t.weight * t.df;
    return v;
  }

  double cdf(double y) const {
    if (terms_.empty()) return y >= 0.0 ? 1.0 : 0.0;
    if (!(y > 0.0)) return 0.0;
    if (std::isinf(y)) return 1.0;
    return cdf_from(0, y);
  }
  double sf(double y) const { return 1.0 - cdf(y); }

  double draw(Rng& rng) const {
    double s = 0.0;
    for (const auto& t : terms_) s += t.weight * std::gamma_distribution<double>(0.5 * t.df, 2.0)(rng);
    return s;
  }

 private:
  // After the substitution x = u^2 the chi2_df density becomes
  // 2 u^(df-1) e^(-u^2/2) / (2^(df/2) Gamma(df/2)), bounded at u = 0.
  static double transformed_density(int df, double u) {
    const double log_norm = -0.5 * df * std::log(2.0) - std::lgamma(0.5 * df);
    return 2.0 * std::pow(u, df - 1) * std::exp(-0.5 * u * u + log_norm);
  }

  double cdf_from(std::size_t i, double y) const {
    if (y <= 0.0) return 0.0;
    const auto& t = terms_[i];
    if (i + 1 == terms_.size()) return boost::math::gamma_p(0.5 * t.df, 0.5 * y / t.weight);
    const double u_max = std::sqrt(y / t.weight);
    auto integrand = [&](double u) {
      const double rest = y - t.weight * u * u;
      return transformed_density(t.df, u) * cdf_from(i + 1, rest);
    };
    boost::math::quadrature::tanh_sinh<double> integrator;
    const double tol = i == 0 ? 1e-10 : 1e-12;
    const double v = integrator.integrate(integrand, 0.0, u_max, tol);
    return std::clamp(v, 0.0, 1.0);
  }

  std::vector<Term> terms_;
};

/// Two-sample limiting law 0.5*beta*chi2_{k-d} + 0.5*(1-beta)*chi2_{k-d} + chi2_{d-1}.
struct MixtureNull {
  int k = 2;
  int d = 1;
  double beta = 0.5;

  void validate() const {
    if (d < 1 || d > k) throw InvalidShape("mixture null requires 1 <= d <= k");
    if (!(beta >= 0.0 && beta <= 1.0)) throw InvalidShape("mixture null requires beta in [0, 1]");
  }
  double mean() const { return 0.5 * (k - d) + (d - 1); }

  ChiSquaredCombination combination() const {
    validate();
    return ChiSquaredCombination({{0.5 * beta, k - d}, {0.5 * (1.0 - beta), k - d}, {1.0, d - 1}});
  }
  /// The part that T_g - T_f converges to (no cluster component).
  ChiSquaredCombination within_cluster_part() const {
    validate();
    return ChiSquaredCombination({{0.5 * beta, k - d}, {0.5 * (1.0 - beta), k - d}});
  }
};

enum class QuantileMethod { Quadrature, MonteCarlo };

struct QuantileOptions {
  QuantileMethod method = QuantileMethod::Quadrature;
  std::uint64_t seed = 0x5EEDULL;
  std::size_t draws = 10'000'000;
};

/// y with P(Y > y) = alpha.
inline double combination_quantile(const ChiSquaredCombination& law, double alpha, const QuantileOptions& opt = {}) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error("quantile: alpha must lie in (0, 1)");
  if (law.is_point_mass()) return 0.0;
  if (opt.method == QuantileMethod::MonteCarlo) {
    if (opt.draws == 0) throw Error("quantile: Monte Carlo needs draws > 0");
    Rng rng = make_stream(opt.seed, 0);
    std::vector<double> xs(opt.draws);
    for (auto& x : xs) x = law.draw(rng);
    const auto idx = static_cast<std::size_t>(std::ceil((1.0 - alpha) * static_cast<double>(opt.draws))) - 1;
    std::nth_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(idx), xs.end());
    return xs[idx];
  }
  const auto& terms = law.terms();
  if (terms.size() == 1) {
    return terms[0].weight * chi2_quantile(ChiSquared{terms[0].df, 0.0}, alpha);
  }
  auto f = [&](double y) { return law.sf(y) - alpha; };
  double lo = 0.0;
  double hi = law.mean() + 10.0 * std::sqrt(law.variance());
  while (f(hi) > 0.0) hi *= 2.0;
  std::uintmax_t iters = 100;
  const auto r = boost::math::tools::toms748_solve(f, lo, hi, f(lo), f(hi),
                                                   boost::math::tools::eps_tolerance<double>(36), iters);
  return 0.5 * (r.first + r.second);
}

inline double mixture_cdf(const MixtureNull& m, double y) { return m.combination().cdf(y); }
inline double mixture_sf(const MixtureNull& m, double y) { return m.combination().sf(y); }

/// Critical value X(alpha) of the two-sample mixture null.
inline double mixture_quantile(const MixtureNull& m, double alpha, const QuantileOptions& opt = {}) {
  return combination_quantile(m.combination(), alpha, opt);
}

inline std::vector<double> sample(const MixtureNull& m, Rng& rng, std::size_t count) {
  const auto law = m.combination();
  std::vector<double> out(count);
  for (auto& v : out) v = law.draw(rng);
  return out;
}

/// Piecewise-linear CDF table; used where many evaluations of an expensive
/// CDF are needed (e.g. KS distances over 10^4 points).
class TabulatedCdf {
 public:
  template <class Cdf>
  TabulatedCdf(Cdf&& cdf, double upper, std::size_t points) : upper_(upper), values_(points + 1) {
    for (std::size_t i = 0; i <= points; ++i) values_[i] = cdf(upper * static_cast<double>(i) / points);
  }
  double operator()(double x) const {
    if (!(x > 0.0)) return values_.front();
    if (x >= upper_) return values_.back();
    const double pos = x / upper_ * static_cast<double>(values_.size() - 1);
    const auto i = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(i);
    return values_[i] + frac * (values_[i + 1] - values_[i]);
  }

 private:
  double upper_;
  std::vector<double> values_;
};

}  // namespace permtest
