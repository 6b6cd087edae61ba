#pragma once

// Monte Carlo engine: power curves over local alternatives and null
// calibration of the statistics against their limiting laws.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <mutex>
#include <numbers>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "permtest/distributions.hpp"
#include "permtest/errors.hpp"
#include "permtest/gof.hpp"
#include "permtest/metrics.hpp"
#include "permtest/model.hpp"
#include "permtest/rng.hpp"

namespace permtest {

struct ScenarioConfig {
  int scenario_id = 0;  // 0 for a custom configuration
  NullKind kind = NullKind::Gaussian;
  bool two_sample = false;
  std::vector<double> null_reference;
  std::vector<double> grid;                // sqrt(n) * distance, or sqrt(2nm/(n+m)) * distance
  std::vector<std::size_t> sample_sizes;  // n
  std::vector<std::size_t> sample_sizes_m; // m for two-sample runs; empty means m = n
  std::size_t replications = 10'000;
  double alpha = 0.05;
  std::uint64_t seed = 20'240'601;
  LambdaRule lambda;

  std::size_t m_for(std::size_t i) const { return sample_sizes_m.empty() ? sample_sizes[i] : sample_sizes_m[i]; }

  void validate() const {
    if (null_reference.size() < 2) throw ConfigError("null reference needs at least 2 entries");
    if (sample_sizes.empty()) throw ConfigError("no sample sizes given");
    if (!sample_sizes_m.empty() && sample_sizes_m.size() != sample_sizes.size())
      throw ConfigError("sample_sizes_m must match sample_sizes in length");
    for (auto n : sample_sizes)
      if (n < 1) throw ConfigError("sample sizes must be positive");
    for (auto m : sample_sizes_m)
      if (m < 1) throw ConfigError("sample sizes must be positive");
    if (replications < 1) throw ConfigError("replications must be at least 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    for (double x : grid)
      if (!(x >= 0.0) || !std::isfinite(x)) throw ConfigError("grid values must be finite and nonnegative");
    if (two_sample && kind != NullKind::Categorical) throw ConfigError("two-sample runs need a categorical null");
    try {
      if (kind == NullKind::Categorical) NullHypothesis::categorical(null_reference);
      else NullHypothesis::gaussian(null_reference);
    } catch (const Error& e) {
      throw ConfigError(std::string("invalid null reference: ") + e.what());
    }
  }
};

inline std::vector<double> default_grid() {
  std::vector<double> g;
  for (int i = 0; i <= 16; ++i) g.push_back(0.5 * i);
  return g;
}

/// Preset configurations for scenarios 1 to 5.
inline ScenarioConfig scenario_preset(int id) {
  ScenarioConfig c;
  c.scenario_id = id;
  c.grid = default_grid();
  c.sample_sizes = {200, 500, 1000, 2000};
  switch (id) {
    case 1: c.null_reference = {1, 2, 3, 4, 5}; break;
    case 2: c.null_reference = {1, 3, 3, 3, 5, 5}; break;
    case 3:
      c.kind = NullKind::Categorical;
      c.null_reference = {0.1, 0.2, 0.3, 0.4};
      break;
    case 4:
      c.kind = NullKind::Categorical;
      c.null_reference = {0.1, 0.1, 0.4, 0.4};
      break;
    case 5:
      c.kind = NullKind::Categorical;
      c.two_sample = true;
      c.null_reference = {0.1, 0.1, 0.4, 0.4};
      c.sample_sizes = {1000, 2000, 5000};
      break;
    default: throw ConfigError("scenario must be 1..5");
  }
  return c;
}

// ---------------------------------------------------------------------------
// Alternatives at an exact distance

inline constexpr double kDistanceTolerance = 1e-9;

namespace detail {

inline std::vector<double> random_unit(std::size_t k, Rng& rng) {
  std::normal_distribution<double> z;
  std::vector<double> u(k);
  double norm = 0.0;
  do {
    norm = 0.0;
    for (auto& v : u) {
      v = z(rng);
      norm += v * v;
    }
  } while (norm == 0.0);
  norm = std::sqrt(norm);
  for (auto& v : u) v /= norm;
  return u;
}

// Root of f(s) = target on [0, hi] with f(0) <= target <= f(hi), f continuous.
template <class F>
double bisect_distance(F&& f, double hi, double target) {
  double lo = 0.0;
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (f(mid) < target) lo = mid;
    else hi = mid;
  }
  const double flo = f(lo), fhi = f(hi);
  return std::abs(flo - target) <= std::abs(fhi - target) ? lo : hi;
}

inline std::vector<double> gaussian_alternative(std::span<const double> mu, double target, Rng& rng) {
  const auto u = random_unit(mu.size(), rng);
  auto point = [&](double s) {
    std::vector<double> t(mu.begin(), mu.end());
    for (std::size_t j = 0; j < t.size(); ++j) t[j] += s * u[j];
    return t;
  };
  auto dist = [&](double s) { return gauss_distance(point(s), mu).distance; };
  // dist(s) <= s, and dist(s) >= s - 2 ||mu||, so this bracket always closes.
  double hi = std::max(target, 1e-300);
  while (dist(hi) < target) hi *= 2.0;
  return point(bisect_distance(dist, hi, target));
}

inline std::optional<std::vector<double>> categorical_alternative_once(std::span<const double> q, double target,
                                                                       Rng& rng) {
  const std::size_t k = q.size();
  const auto a = sqrt_each(q);
  auto u = random_unit(k, rng);
  double dot = 0.0;
  for (std::size_t j = 0; j < k; ++j) dot += u[j] * a[j];
  double norm = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    u[j] -= dot * a[j];
    norm += u[j] * u[j];
  }
  norm = std::sqrt(norm);
  if (norm < 1e-12) return std::nullopt;
  for (auto& v : u) v /= norm;

  // Great circle through sqrt(q); stay in the nonnegative orthant.
  double s_max = std::numbers::pi / 2;
  for (std::size_t j = 0; j < k; ++j)
    if (u[j] < 0.0) s_max = std::min(s_max, std::atan(a[j] / -u[j]));
  auto point = [&](double s) {
    std::vector<double> p(k);
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double v = std::max(0.0, std::cos(s) * a[j] + std::sin(s) * u[j]);
      p[j] = v * v;
      sum += p[j];
    }
    for (auto& v : p) v /= sum;
    return p;
  };
  auto dist = [&](double s) { return cat_distance(point(s), q).distance; };
  if (dist(s_max) < target) return std::nullopt;
  return point(bisect_distance(dist, s_max, target));
}

}  // namespace detail

inline constexpr int kAlternativeAttempts = 64;

/// A parameter at exactly `target` from the reference (up to relabeling), along
/// a direction drawn from `rng`. Throws InfeasibleDistance or Error when the
/// construction cannot be verified.
inline std::vector<double> alternative_at_distance(std::span<const double> reference, double target, Rng& rng,
                                                   NullKind kind) {
  if (!(target >= 0.0) || !std::isfinite(target)) throw Error("alternative: target distance must be nonnegative");
  if (target == 0.0) return {reference.begin(), reference.end()};
  std::vector<double> out;
  double got = 0.0;
  if (kind == NullKind::Gaussian) {
    out = detail::gaussian_alternative(reference, target, rng);
    got = gauss_distance(out, reference).distance;
  } else {
    if (target > 2.0 * std::numbers::sqrt2) throw InfeasibleDistance("distance exceeds the diameter of the simplex");
    for (int attempt = 0; attempt < kAlternativeAttempts && out.empty(); ++attempt)
      if (auto p = detail::categorical_alternative_once(reference, target, rng)) out = std::move(*p);
    if (out.empty()) throw InfeasibleDistance("no direction reaches the requested distance inside the simplex");
    require_probability_vector(out);
    got = cat_distance(out, reference).distance;
  }
  if (std::abs(got - target) > kDistanceTolerance)
    throw Error("alternative construction missed the requested distance");
  return out;
}

inline std::vector<double> alternative_at_distance(std::span<const double> reference, double target,
                                                   std::uint64_t direction_seed, NullKind kind) {
  Rng rng = make_stream(direction_seed, 0);
  return alternative_at_distance(reference, target, rng, kind);
}

// ---------------------------------------------------------------------------
// Sampling

inline std::vector<double> sample_gaussian(std::span<const double> theta, double n, Rng& rng) {
  std::normal_distribution<double> z;
  const double sd = 1.0 / std::sqrt(n);
  std::vector<double> x(theta.size());
  for (std::size_t j = 0; j < x.size(); ++j) x[j] = theta[j] + sd * z(rng);
  return x;
}

/// Multinomial counts by sequential conditional binomials.
inline CategoricalSample sample_multinomial(std::span<const double> p, std::int64_t n, Rng& rng) {
  CategoricalSample s;
  s.counts.assign(p.size(), 0);
  std::int64_t left = n;
  double mass = 1.0;
  for (std::size_t j = 0; j + 1 < p.size() && left > 0; ++j) {
    const double prob = mass > 0.0 ? std::clamp(p[j] / mass, 0.0, 1.0) : 0.0;
    const auto c = std::binomial_distribution<std::int64_t>(left, prob)(rng);
    s.counts[j] = c;
    left -= c;
    mass -= p[j];
  }
  s.counts.back() += left;
  return s;
}

// ---------------------------------------------------------------------------
// Parallel engine

/// Worker count: PERMTEST_THREADS if set and positive, else hardware concurrency.
inline std::size_t thread_count() {
  if (const char* env = std::getenv("PERMTEST_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(i) for i in [0, count). Results must be written to slot i by the
/// body; callers then fold the slots in index order.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min(thread_count(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < count;) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = count;
        }
      }
    });
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

// ---------------------------------------------------------------------------
// Power curves

struct PowerPoint {
  double x = 0.0;
  double power = 0.0;
  double stderr_ = 0.0;
  std::size_t n = 0;
  std::optional<std::size_t> m;
};

struct PowerCurve {
  ScenarioConfig config;
  std::vector<PowerPoint> points;
};

namespace detail {

inline double effective_size(double n, double m) { return 2.0 * n * m / (n + m); }

// One replication at (size index i, grid point x): returns whether the test rejects.
class ReplicationRunner {
 public:
  explicit ReplicationRunner(const ScenarioConfig& c) : c_(c) {
    if (!c_.two_sample) {
      null_ = c_.kind == NullKind::Categorical ? NullHypothesis::categorical(c_.null_reference)
                                               : NullHypothesis::gaussian(c_.null_reference);
      test_.emplace(*null_, c_.alpha);
    }
  }

  bool power_rep(std::size_t i, double x, Rng& rng) const {
    const double n = static_cast<double>(c_.sample_sizes[i]);
    if (c_.two_sample) {
      const double m = static_cast<double>(c_.m_for(i));
      const auto q = alternative_at_distance(c_.null_reference, x / std::sqrt(effective_size(n, m)), rng,
                                             NullKind::Categorical);
      return two_sample(i, c_.null_reference, q, rng).reject;
    }
    const auto theta = alternative_at_distance(c_.null_reference, x / std::sqrt(n), rng, c_.kind);
    const auto values = statistics(i, theta, rng);
    return test_->rejects(values);
  }

  std::vector<double> statistics(std::size_t i, std::span<const double> theta, Rng& rng) const {
    const double n = static_cast<double>(c_.sample_sizes[i]);
    if (c_.kind == NullKind::Gaussian) return test_->evaluate(sample_gaussian(theta, n, rng), n);
    const auto counts = sample_multinomial(theta, c_.sample_sizes[i], rng);
    return test_->evaluate(counts.frequencies(), n);
  }

  TestReport two_sample(std::size_t i, std::span<const double> p, std::span<const double> q, Rng& rng) const {
    const auto x = sample_multinomial(p, static_cast<std::int64_t>(c_.sample_sizes[i]), rng);
    const auto y = sample_multinomial(q, static_cast<std::int64_t>(c_.m_for(i)), rng);
    return two_sample_test(x, y, c_.alpha, TwoSampleOptions{c_.lambda, false, &cache_});
  }

  const std::optional<OneSampleTest>& test() const { return test_; }

 private:
  const ScenarioConfig& c_;
  std::optional<NullHypothesis> null_;
  std::optional<OneSampleTest> test_;
  mutable MixtureQuantileCache cache_;
};

}  // namespace detail

/// Empirical rejection frequency at every (sample size, grid point).
inline PowerCurve run_power_curve(const ScenarioConfig& config) {
  config.validate();
  if (config.grid.empty()) throw ConfigError("alternative grid is empty");
  PowerCurve curve{config, {}};
  detail::ReplicationRunner runner(config);
  const std::size_t reps = config.replications;
  std::vector<unsigned char> hits(reps);
  for (std::size_t i = 0; i < config.sample_sizes.size(); ++i) {
    for (std::size_t g = 0; g < config.grid.size(); ++g) {
      const double x = config.grid[g];
      parallel_for(reps, [&](std::size_t r) {
        Rng rng = make_stream(config.seed, stream_id(i, g, r));
        hits[r] = runner.power_rep(i, x, rng) ? 1 : 0;
      });
      std::size_t count = 0;
      for (auto h : hits) count += h;
      PowerPoint pt;
      pt.x = x;
      pt.power = static_cast<double>(count) / static_cast<double>(reps);
      pt.stderr_ = std::sqrt(pt.power * (1.0 - pt.power) / static_cast<double>(reps));
      pt.n = config.sample_sizes[i];
      if (config.two_sample) pt.m = config.m_for(i);
      curve.points.push_back(pt);
    }
  }
  return curve;
}

// ---------------------------------------------------------------------------
// Null calibration

/// Kolmogorov-Smirnov distance between a sample and a continuous CDF.
template <class Cdf>
double ks_distance(std::vector<double> xs, Cdf&& cdf) {
  if (xs.empty()) throw Error("ks_distance: empty sample");
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

struct CalibrationRow {
  std::string statistic;
  std::string law;
  double ks = 0.0;
  double exceedance = 0.0;  // fraction above the statistic's level-alpha threshold
  double mean = 0.0;
};

struct CalibrationResult {
  std::size_t n = 0;
  std::optional<std::size_t> m;
  std::vector<CalibrationRow> rows;
  double rejection_rate = 0.0;
  std::optional<double> dominance;     // P(T_g >= T_f)
  std::optional<double> d_recovery;    // two-sample: both clusterings find the true d
};

namespace detail {

inline double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double fraction_above(std::span<const double> v, double t) {
  std::size_t c = 0;
  for (double x : v) c += x > t ? 1 : 0;
  return static_cast<double>(c) / static_cast<double>(v.size());
}

inline std::string chi2_label(int df) { return "chi2_" + std::to_string(df); }

inline CalibrationRow chi2_row(const std::string& name, std::vector<double> values, int df, double alpha) {
  CalibrationRow row{name, chi2_label(df), 0.0, 0.0, mean_of(values)};
  if (df == 0) {
    row.ks = ks_distance(values, [](double x) { return x >= 0.0 ? 1.0 : 0.0; });
    row.exceedance = fraction_above(values, 0.0);
    return row;
  }
  const ChiSquared law{df, 0.0};
  row.exceedance = fraction_above(values, chi2_quantile(law, alpha));
  row.ks = ks_distance(std::move(values), [&](double x) { return chi2_cdf(law, x); });
  return row;
}

inline CalibrationRow combination_row(const std::string& name, const std::string& label, std::vector<double> values,
                                      const ChiSquaredCombination& law, double alpha) {
  CalibrationRow row{name, label, 0.0, 0.0, mean_of(values)};
  row.exceedance = fraction_above(values, combination_quantile(law, alpha));
  if (law.is_point_mass()) {
    row.ks = ks_distance(std::move(values), [](double x) { return x >= 0.0 ? 1.0 : 0.0; });
    return row;
  }
  const double upper = law.mean() + 20.0 * std::sqrt(law.variance());
  TabulatedCdf table([&](double y) { return law.cdf(y); }, upper, 4000);
  row.ks = ks_distance(std::move(values), table);
  return row;
}

}  // namespace detail

/// Simulates the null `replications` times per sample size and compares each
/// statistic with its limiting law.
inline std::vector<CalibrationResult> run_null_calibration(const ScenarioConfig& config) {
  config.validate();
  detail::ReplicationRunner runner(config);
  const std::size_t reps = config.replications;
  std::vector<CalibrationResult> out;
  for (std::size_t i = 0; i < config.sample_sizes.size(); ++i) {
    CalibrationResult res;
    res.n = config.sample_sizes[i];
    if (config.two_sample) {
      res.m = config.m_for(i);
      const auto truth = detect_null_partition(config.null_reference);
      std::vector<double> tf(reps), tg(reps);
      std::vector<unsigned char> rej(reps), found(reps);
      parallel_for(reps, [&](std::size_t r) {
        Rng rng = make_stream(config.seed, stream_id(i, 0xCA11, r));
        const auto rep = runner.two_sample(i, config.null_reference, config.null_reference, rng);
        tf[r] = rep.statistics[0].value;
        tg[r] = rep.statistics[1].value;
        rej[r] = rep.reject ? 1 : 0;
        found[r] = rep.two_sample->d_lower == truth.d() && rep.two_sample->d_upper == truth.d() ? 1 : 0;
      });
      const int k = static_cast<int>(config.null_reference.size());
      const int d = static_cast<int>(truth.d());
      const double beta = static_cast<double>(*res.m) / static_cast<double>(res.n + *res.m);
      const MixtureNull law{k, d, beta};
      std::vector<double> diff(reps);
      std::size_t dom = 0, rejections = 0, recovered = 0;
      for (std::size_t r = 0; r < reps; ++r) {
        diff[r] = tg[r] - tf[r];
        dom += tg[r] >= tf[r] ? 1 : 0;
        rejections += rej[r];
        recovered += found[r];
      }
      res.rows.push_back(detail::chi2_row("T_f", tf, d - 1, config.alpha));
      res.rows.push_back(detail::combination_row("T_g", "mixture", tg, law.combination(), config.alpha));
      res.rows.push_back(
          detail::combination_row("T_g-T_f", "mixture_within", diff, law.within_cluster_part(), config.alpha));
      res.rejection_rate = static_cast<double>(rejections) / static_cast<double>(reps);
      res.dominance = static_cast<double>(dom) / static_cast<double>(reps);
      res.d_recovery = static_cast<double>(recovered) / static_cast<double>(reps);
      out.push_back(std::move(res));
      continue;
    }

    const auto& test = *runner.test();
    const std::size_t s = test.names().size();
    std::vector<std::vector<double>> values(s, std::vector<double>(reps));
    std::vector<unsigned char> rej(reps);
    parallel_for(reps, [&](std::size_t r) {
      Rng rng = make_stream(config.seed, stream_id(i, 0xCA11, r));
      const auto v = runner.statistics(i, config.null_reference, rng);
      for (std::size_t j = 0; j < s; ++j) values[j][r] = v[j];
      rej[r] = test.rejects(v) ? 1 : 0;
    });
    for (std::size_t j = 0; j < s; ++j)
      res.rows.push_back(detail::chi2_row(test.names()[j], values[j], test.dofs()[j], config.alpha));
    if (s == 2) {
      std::vector<double> diff(reps);
      std::size_t dom = 0;
      for (std::size_t r = 0; r < reps; ++r) {
        diff[r] = values[1][r] - values[0][r];
        dom += values[1][r] >= values[0][r] ? 1 : 0;
      }
      res.rows.push_back(detail::chi2_row("T_g-T_f", diff, test.dofs()[1] - test.dofs()[0], config.alpha));
      res.dominance = static_cast<double>(dom) / static_cast<double>(reps);
    }
    std::size_t rejections = 0;
    for (auto v : rej) rejections += v;
    res.rejection_rate = static_cast<double>(rejections) / static_cast<double>(reps);
    out.push_back(std::move(res));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Output and configuration files

inline void write_power_csv(std::ostream& os, const PowerCurve& curve) {
  os << "x,power,stderr,n,m,scenario\n";
  os.precision(17);
  for (const auto& p : curve.points) {
    os << p.x << ',' << p.power << ',' << p.stderr_ << ',' << p.n << ',';
    if (p.m) os << *p.m;
    os << ',' << curve.config.scenario_id << '\n';
  }
}

inline void write_calibration_csv(std::ostream& os, const std::vector<CalibrationResult>& results, int scenario) {
  os << "n,m,statistic,law,ks,exceedance,mean,rejection_rate,dominance,d_recovery,scenario\n";
  os.precision(17);
  for (const auto& r : results)
    for (const auto& row : r.rows) {
      os << r.n << ',';
      if (r.m) os << *r.m;
      os << ',' << row.statistic << ',' << row.law << ',' << row.ks << ',' << row.exceedance << ',' << row.mean
         << ',' << r.rejection_rate << ',';
      if (r.dominance) os << *r.dominance;
      os << ',';
      if (r.d_recovery) os << *r.d_recovery;
      os << ',' << scenario << '\n';
    }
}

inline nlohmann::json config_to_json(const ScenarioConfig& c) {
  nlohmann::json j;
  j["scenario"] = c.scenario_id;
  j["kind"] = to_string(c.kind);
  j["two_sample"] = c.two_sample;
  j["null"] = c.null_reference;
  j["grid"] = c.grid;
  j["sample_sizes"] = c.sample_sizes;
  if (!c.sample_sizes_m.empty()) j["sample_sizes_m"] = c.sample_sizes_m;
  j["replications"] = c.replications;
  j["alpha"] = c.alpha;
  j["seed"] = c.seed;
  if (c.two_sample) j["lambda"] = c.lambda.describe();
  return j;
}

/// Parses a JSON run configuration. A "scenario" key selects a preset whose
/// fields the remaining keys override.
inline ScenarioConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
  static const std::vector<std::string> known = {"scenario",     "kind",           "two_sample",   "null",
                                                 "grid",         "sample_sizes",   "sample_sizes_m",
                                                 "replications", "alpha",          "seed",         "lambda"};
  for (const auto& [key, _] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end()) throw ConfigError("unknown configuration key: " + key);
  try {
    ScenarioConfig c;
    if (j.contains("scenario") && j.at("scenario").get<int>() != 0) c = scenario_preset(j.at("scenario").get<int>());
    if (j.contains("kind")) {
      const auto kind = j.at("kind").get<std::string>();
      if (kind == "gaussian") c.kind = NullKind::Gaussian;
      else if (kind == "categorical") c.kind = NullKind::Categorical;
      else throw ConfigError("kind must be gaussian or categorical");
    }
    if (j.contains("two_sample")) c.two_sample = j.at("two_sample").get<bool>();
    if (j.contains("null")) c.null_reference = j.at("null").get<std::vector<double>>();
    if (j.contains("grid")) c.grid = j.at("grid").get<std::vector<double>>();
    if (j.contains("sample_sizes")) c.sample_sizes = j.at("sample_sizes").get<std::vector<std::size_t>>();
    if (j.contains("sample_sizes_m")) c.sample_sizes_m = j.at("sample_sizes_m").get<std::vector<std::size_t>>();
    if (j.contains("replications")) c.replications = j.at("replications").get<std::size_t>();
    if (j.contains("alpha")) c.alpha = j.at("alpha").get<double>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("lambda")) c.lambda = LambdaRule::parse(j.at("lambda").get<std::string>());
    if (c.grid.empty()) c.grid = default_grid();
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed configuration: ") + e.what());
  }
}

inline ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("configuration is not valid JSON: ") + e.what());
  }
  return config_from_json(j);
}

/// Run manifest: configuration echo plus library version.
inline nlohmann::json run_manifest(const ScenarioConfig& c, const std::string& mode) {
  nlohmann::json j;
  j["version"] = kVersion;
  j["mode"] = mode;
  j["config"] = config_to_json(c);
  return j;
}

}  // namespace permtest
