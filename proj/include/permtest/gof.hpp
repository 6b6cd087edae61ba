#pragma once

// One-sample and two-sample goodness-of-fit tests for nulls known only up to
// a relabeling of the coordinates.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "permtest/diagnostics.hpp"
#include "permtest/distributions.hpp"
#include "permtest/errors.hpp"
#include "permtest/model.hpp"
#include "permtest/partition.hpp"
#include "permtest/polynomials.hpp"

#ifndef PERMTEST_VERSION
#define PERMTEST_VERSION "0.1.0"
#endif

namespace permtest {

inline constexpr const char* kVersion = PERMTEST_VERSION;

enum class TestKind { Gauss, GaussDegenerate, Cat, CatDegenerate, TwoSample };

inline const char* to_string(TestKind k) {
  switch (k) {
    case TestKind::Gauss: return "gauss";
    case TestKind::GaussDegenerate: return "gauss_degenerate";
    case TestKind::Cat: return "cat";
    case TestKind::CatDegenerate: return "cat_degenerate";
    case TestKind::TwoSample: return "two_sample";
  }
  return "unknown";
}

inline TestKind parse_test_kind(const std::string& s) {
  for (auto k : {TestKind::Gauss, TestKind::GaussDegenerate, TestKind::Cat, TestKind::CatDegenerate, TestKind::TwoSample})
    if (s == to_string(k)) return k;
  throw Error("unknown test kind: " + s);
}

struct StatisticResult {
  std::string name;
  double value = 0.0;
  std::vector<int> dof;  // one entry for chi-squared laws, three for the two-sample mixture
  double threshold = 0.0;
  std::optional<double> p_value;

  bool operator==(const StatisticResult&) const = default;
};

struct TwoSampleDetails {
  std::size_t d_lower = 0;  // clusters found in the x sample
  std::size_t d_upper = 0;  // clusters found in the y sample
  double beta = 0.5;
  double critical_value = 0.0;
  std::string lambda_rule;
  double lambda_x = 0.0;
  double lambda_y = 0.0;

  bool operator==(const TwoSampleDetails&) const = default;
};

struct TestReport {
  TestKind kind = TestKind::Gauss;
  std::size_t k = 0;
  std::size_t d = 0;
  double n = 0.0;
  std::optional<double> m;
  std::vector<std::string> categories;
  std::vector<StatisticResult> statistics;
  std::optional<NullHypothesis> null_spec;
  bool reject = false;
  double alpha = 0.05;
  ConditionDiagnostics diagnostics;
  std::optional<TwoSampleDetails> two_sample;
  std::optional<std::uint64_t> seed;
  std::string version = kVersion;

  const StatisticResult& statistic(const std::string& name) const {
    for (const auto& s : statistics)
      if (s.name == name) return s;
    throw Error("report has no statistic named " + name);
  }
};

/// g(t) with 1/g(t) = sum_h (t - c_h)^-2, and g = 0 at every center.
inline double envelope_g(double t, std::span<const double> centers) {
  double inv = 0.0;
  for (double c : centers) {
    const double diff = t - c;
    if (diff == 0.0) return 0.0;
    inv += 1.0 / (diff * diff);
  }
  return 1.0 / inv;
}

namespace detail {

inline void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error("alpha must lie in (0, 1)");
}

inline std::vector<double> node_scale(NullKind kind, std::span<const double> v) {
  return kind == NullKind::Categorical ? sqrt_each(v) : std::vector<double>(v.begin(), v.end());
}

}  // namespace detail

/// A one-sample test with its basis, reference sums and thresholds built once;
/// evaluate() is then cheap enough for Monte Carlo loops.
class OneSampleTest {
 public:
  /// `flat` forces the non-degenerate statistic (throws DegenerateNodes on ties).
  OneSampleTest(NullHypothesis null, double alpha, bool flat = false)
      : null_(std::move(null)), alpha_(alpha) {
    detail::check_alpha(alpha_);
    validate_partition(null_.partition, null_.reference, true);
    const bool cat = null_.kind == NullKind::Categorical;
    const int k = static_cast<int>(null_.k());
    const int d = static_cast<int>(null_.d());
    const int shift = cat ? 1 : 0;
    scaled_ref_ = detail::node_scale(null_.kind, null_.reference);

    if (flat || !null_.degenerate()) {
      require_distinct(scaled_ref_);
      kind_ = cat ? TestKind::Cat : TestKind::Gauss;
      basis_.emplace(scaled_ref_);
      weights_.assign(null_.k(), 1.0);
      names_ = {"T"};
      dofs_ = {k - shift};
    } else {
      kind_ = cat ? TestKind::CatDegenerate : TestKind::GaussDegenerate;
      scaled_centers_ = detail::node_scale(null_.kind, null_.partition.centers);
      require_distinct(scaled_centers_);
      if (d >= 2) {
        basis_.emplace(scaled_centers_);
        for (auto s : null_.partition.sizes()) weights_.push_back(1.0 / static_cast<double>(s));
        names_ = {"T_f", "T_g"};
        dofs_ = {d - shift, k - shift};
      } else {
        names_ = {"T_g"};
        dofs_ = {k - shift};
      }
    }
    if (basis_) ref_sums_ = basis_->sums(scaled_ref_);
    for (int df : dofs_) thresholds_.push_back(chi2_quantile(ChiSquared{df, 0.0}, alpha_));
  }

  TestKind kind() const { return kind_; }
  const NullHypothesis& null() const { return null_; }
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<int>& dofs() const { return dofs_; }
  const std::vector<double>& thresholds() const { return thresholds_; }
  double alpha() const { return alpha_; }

  /// Statistic values in names() order. `point` is X (Gaussian) or p_hat (categorical).
  std::vector<double> evaluate(std::span<const double> point, double n) const {
    if (point.size() != null_.k()) throw LengthMismatch("sample length differs from the null reference");
    const double scale = null_.kind == NullKind::Categorical ? 4.0 * n : n;
    const auto z = detail::node_scale(null_.kind, point);
    std::vector<double> out;
    out.reserve(names_.size());
    if (basis_) {
      const auto s = basis_->sums(z);
      double t = 0.0;
      for (std::size_t l = 0; l < s.size(); ++l) {
        const double diff = s[l] - ref_sums_[l];
        t += weights_[l] * diff * diff;
      }
      out.push_back(scale * t);
    }
    if (kind_ == TestKind::GaussDegenerate || kind_ == TestKind::CatDegenerate) {
      double t = 0.0;
      for (double v : z) t += envelope_g(v, scaled_centers_);
      out.push_back(scale * t);
    }
    return out;
  }

  bool rejects(std::span<const double> values) const {
    for (std::size_t i = 0; i < values.size(); ++i)
      if (values[i] > thresholds_[i]) return true;
    return false;
  }

  std::vector<StatisticResult> results(std::span<const double> values) const {
    std::vector<StatisticResult> out;
    for (std::size_t i = 0; i < values.size(); ++i)
      out.push_back({names_[i], values[i], {dofs_[i]}, thresholds_[i],
                     chi2_sf(ChiSquared{dofs_[i], 0.0}, values[i])});
    return out;
  }

 private:
  NullHypothesis null_;
  double alpha_;
  TestKind kind_ = TestKind::Gauss;
  std::vector<double> scaled_ref_;
  std::vector<double> scaled_centers_;
  std::optional<LagrangeIntegralBasis> basis_;
  std::vector<double> weights_;
  std::vector<double> ref_sums_;
  std::vector<std::string> names_;
  std::vector<int> dofs_;
  std::vector<double> thresholds_;
};

namespace detail {

inline TestReport one_sample_report(const OneSampleTest& test, std::span<const double> point, double n,
                                    const CategoricalSample* counts) {
  TestReport r;
  r.kind = test.kind();
  r.k = test.null().k();
  r.d = test.null().d();
  r.n = n;
  r.alpha = test.alpha();
  r.null_spec = test.null();
  const auto values = test.evaluate(point, n);
  r.statistics = test.results(values);
  r.reject = test.rejects(values);
  r.diagnostics = condition_diagnostics(test.null(), n, counts);
  return r;
}

inline void require_kind(const NullHypothesis& null, NullKind kind) {
  if (null.kind != kind) throw Error(std::string("expected a ") + to_string(kind) + " null hypothesis");
}

}  // namespace detail

/// Distinct-mean Gaussian test: T = n sum_l (sum_j f_l(X_j) - sum_j f_l(mu_j))^2 against chi2_k.
inline TestReport gauss_test(const GaussianSample& sample, const NullHypothesis& null, double alpha) {
  detail::require_kind(null, NullKind::Gaussian);
  if (null.degenerate()) throw DegenerateNodes("tied null means; use gauss_test_degenerate");
  OneSampleTest test(null, alpha);
  return detail::one_sample_report(test, sample.x, sample.n, nullptr);
}

/// Tied-mean Gaussian test: T_f against chi2_d, T_g against chi2_k; reject if either exceeds.
inline TestReport gauss_test_degenerate(const GaussianSample& sample, const NullHypothesis& null, double alpha) {
  detail::require_kind(null, NullKind::Gaussian);
  if (!null.degenerate()) throw InvalidPartition("null has no tied means; use gauss_test");
  OneSampleTest test(null, alpha);
  return detail::one_sample_report(test, sample.x, sample.n, nullptr);
}

/// Distinct-probability categorical test on the square-root scale, chi2_{k-1}.
inline TestReport cat_test(const CategoricalSample& sample, const NullHypothesis& null, double alpha) {
  detail::require_kind(null, NullKind::Categorical);
  OneSampleTest test(null, alpha, true);
  auto r = detail::one_sample_report(test, sample.frequencies(), static_cast<double>(sample.total()), &sample);
  return r;
}

/// Tied-probability categorical test: T_f against chi2_{d-1}, T_g against chi2_{k-1}.
inline TestReport cat_test_degenerate(const CategoricalSample& sample, const NullHypothesis& null, double alpha) {
  detail::require_kind(null, NullKind::Categorical);
  if (!null.degenerate()) throw InvalidPartition("null has no tied probabilities; use cat_test");
  OneSampleTest test(null, alpha);
  return detail::one_sample_report(test, sample.frequencies(), static_cast<double>(sample.total()), &sample);
}

inline TestReport run_gauss(const GaussianSample& sample, const NullHypothesis& null, double alpha) {
  return null.degenerate() ? gauss_test_degenerate(sample, null, alpha) : gauss_test(sample, null, alpha);
}

inline TestReport run_cat(const CategoricalSample& sample, const NullHypothesis& null, double alpha) {
  return null.degenerate() ? cat_test_degenerate(sample, null, alpha) : cat_test(sample, null, alpha);
}

// ---------------------------------------------------------------------------
// Two-sample test

/// Clustering threshold lambda_n as a function of the sample size.
struct LambdaRule {
  enum class Kind { Log, SqrtTwoLog, Fixed };
  Kind kind = Kind::Log;
  double value = 0.0;

  double operator()(double n) const {
    double v = value;
    if (kind == Kind::Log) v = std::log(n);
    if (kind == Kind::SqrtTwoLog) v = std::sqrt(2.0 * std::log(n));
    if (!(v > 0.0) || !std::isfinite(v)) throw Error("lambda_n must be positive; sample too small for " + describe());
    return v;
  }

  std::string describe() const {
    switch (kind) {
      case Kind::Log: return "log";
      case Kind::SqrtTwoLog: return "sqrt2log";
      case Kind::Fixed: break;
    }
    std::ostringstream os;
    os.precision(17);
    os << value;
    return os.str();
  }

  /// "log", "sqrt2log" or a positive number.
  static LambdaRule parse(const std::string& s) {
    if (s == "log") return {Kind::Log, 0.0};
    if (s == "sqrt2log") return {Kind::SqrtTwoLog, 0.0};
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || !(v > 0.0) || !std::isfinite(v))
      throw ConfigError("lambda must be log, sqrt2log or a positive number, got '" + s + "'");
    return {Kind::Fixed, v};
  }
};

/// Memoized mixture critical values keyed by (k, d, beta, alpha). Thread-safe.
class MixtureQuantileCache {
 public:
  double get(int k, int d, double beta, double alpha) {
    const auto key = std::make_tuple(k, d, beta, alpha);
    {
      std::lock_guard<std::mutex> lock(mutex_);
      if (auto it = values_.find(key); it != values_.end()) return it->second;
    }
    const double v = mixture_quantile(MixtureNull{k, d, beta}, alpha);
    std::lock_guard<std::mutex> lock(mutex_);
    values_.emplace(key, v);
    return v;
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<int, int, double, double>, double> values_;
};

struct TwoSampleOptions {
  LambdaRule lambda;
  bool p_values = true;
  MixtureQuantileCache* cache = nullptr;
};

namespace detail {

struct DataDrivenClustering {
  Partition partition;
  std::vector<double> root_centers;
  std::optional<LagrangeIntegralBasis> basis;
  std::vector<double> weights;
};

inline DataDrivenClustering build_clustering(std::span<const double> freq, double n, double lambda) {
  DataDrivenClustering c;
  c.partition = cluster_empirical(freq, n, lambda);
  c.root_centers = sqrt_each(c.partition.centers);
  c.basis.emplace(c.root_centers);
  for (auto s : c.partition.sizes()) c.weights.push_back(1.0 / static_cast<double>(s));
  return c;
}

inline double weighted_basis_gap(const DataDrivenClustering& c, std::span<const double> a, std::span<const double> b) {
  const auto sa = c.basis->sums(a);
  const auto sb = c.basis->sums(b);
  double t = 0.0;
  for (std::size_t h = 0; h < sa.size(); ++h) t += c.weights[h] * (sa[h] - sb[h]) * (sa[h] - sb[h]);
  return t;
}

inline double within_spread(std::span<const double> roots, const Partition& part) {
  return tau_squared(roots, part, 1.0);
}

}  // namespace detail

/// Two-sample test of p = q up to relabeling from counts x (size n) and y (size m).
inline TestReport two_sample_test(const CategoricalSample& x, const CategoricalSample& y, double alpha,
                                  const TwoSampleOptions& opt = {}) {
  detail::check_alpha(alpha);
  if (x.counts.size() != y.counts.size()) throw LengthMismatch("two samples have different numbers of categories");
  if (x.counts.size() < 2) throw Error("two-sample test needs k >= 2");
  const auto p_hat = x.frequencies();
  const auto q_hat = y.frequencies();
  const double n = static_cast<double>(x.total());
  const double m = static_cast<double>(y.total());
  const std::size_t k = p_hat.size();
  const double lambda_x = opt.lambda(n);
  const double lambda_y = opt.lambda(m);

  const auto lower = detail::build_clustering(p_hat, n, lambda_x);
  const auto upper = detail::build_clustering(q_hat, m, lambda_y);
  const auto rp = sqrt_each(p_hat);
  const auto rq = sqrt_each(q_hat);

  const double c = 2.0 * n * m / (n + m);
  const double t_f = c * (detail::weighted_basis_gap(lower, rp, rq) + detail::weighted_basis_gap(upper, rp, rq));
  double g_sum = 0.0;
  for (std::size_t j = 0; j < k; ++j)
    g_sum += envelope_g(rq[j], lower.root_centers) + envelope_g(rp[j], upper.root_centers);
  const double t_g = c * g_sum;

  TwoSampleDetails det;
  det.d_lower = lower.partition.d();
  det.d_upper = upper.partition.d();
  det.beta = m / (n + m);
  det.lambda_rule = opt.lambda.describe();
  det.lambda_x = lambda_x;
  det.lambda_y = lambda_y;
  const int kk = static_cast<int>(k);
  const int d_hat = static_cast<int>(std::max(det.d_lower, det.d_upper));
  det.critical_value = opt.cache ? opt.cache->get(kk, d_hat, det.beta, alpha)
                                 : mixture_quantile(MixtureNull{kk, d_hat, det.beta}, alpha);

  TestReport r;
  r.kind = TestKind::TwoSample;
  r.k = k;
  r.d = static_cast<std::size_t>(d_hat);
  r.n = n;
  r.m = m;
  r.alpha = alpha;
  const std::vector<int> dof{kk - d_hat, kk - d_hat, d_hat - 1};
  std::optional<ChiSquaredCombination> law;
  if (opt.p_values) law = MixtureNull{kk, d_hat, det.beta}.combination();
  for (auto [name, value] : {std::pair{"T_f", t_f}, std::pair{"T_g", t_g}}) {
    StatisticResult s{name, value, dof, det.critical_value, std::nullopt};
    if (law) s.p_value = law->sf(value);
    r.statistics.push_back(std::move(s));
  }
  r.reject = t_f > det.critical_value || t_g > det.critical_value;

  auto& diag = r.diagnostics;
  double zeta = 0.0;
  if (lower.partition.d() >= 2) zeta = std::max(zeta, max_abs_eta(lower.root_centers) / std::sqrt(n));
  if (upper.partition.d() >= 2) zeta = std::max(zeta, max_abs_eta(upper.root_centers) / std::sqrt(m));
  diag.zeta_bar_max = zeta;
  detail::flag_near_degenerate(diag, "zeta_bar_max", zeta);
  diag.min_nq = std::min(min_cell_variance(p_hat, n), min_cell_variance(q_hat, m));
  if (*diag.min_nq < kBoundaryCountLimit)
    diag.warnings.push_back("min n*p*(1-p) below " + std::to_string(kBoundaryCountLimit) +
                            ": a cell probability is close to the boundary");
  diag.tau_sq = 4.0 * (n * detail::within_spread(rp, lower.partition) + m * detail::within_spread(rq, upper.partition));
  if (det.d_lower != det.d_upper)
    diag.warnings.push_back("cluster counts differ between samples (" + std::to_string(det.d_lower) + " vs " +
                            std::to_string(det.d_upper) + "); threshold uses the larger");
  if (x.has_zero_count() || y.has_zero_count()) diag.warnings.push_back("zero count in at least one category");
  r.two_sample = det;
  return r;
}

}  // namespace permtest
