#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "permtest/errors.hpp"
#include "permtest/metrics.hpp"
#include "permtest/partition.hpp"

namespace permtest {

enum class NullKind { Gaussian, Categorical };

inline const char* to_string(NullKind k) { return k == NullKind::Gaussian ? "gaussian" : "categorical"; }

/// Reference vector (mu or q) known up to relabeling, with its tie structure.
struct NullHypothesis {
  NullKind kind = NullKind::Gaussian;
  std::vector<double> reference;
  Partition partition;

  std::size_t k() const { return reference.size(); }
  std::size_t d() const { return partition.d(); }
  bool degenerate() const { return d() < k(); }

  static NullHypothesis gaussian(std::vector<double> mu) {
    if (mu.size() < 2) throw Error("null hypothesis needs k >= 2");
    for (double v : mu)
      if (!std::isfinite(v)) throw Error("null reference must be finite");
    NullHypothesis h{NullKind::Gaussian, std::move(mu), {}};
    h.partition = detect_null_partition(h.reference);
    return h;
  }

  static NullHypothesis categorical(std::vector<double> q) {
    if (q.size() < 2) throw Error("null hypothesis needs k >= 2");
    require_probability_vector(q);
    for (double v : q)
      if (!(v > 0.0 && v < 1.0)) throw NotAProbabilityVector("categorical null entries must lie in (0, 1)");
    NullHypothesis h{NullKind::Categorical, std::move(q), {}};
    h.partition = detect_null_partition(h.reference);
    return h;
  }

  /// Same reference, caller-supplied partition (checked for exactness).
  NullHypothesis with_partition(Partition part) const {
    validate_partition(part, reference, true);
    NullHypothesis h = *this;
    h.partition = std::move(part);
    return h;
  }

  bool operator==(const NullHypothesis&) const = default;
};

/// X ~ N(theta, I/n).
struct GaussianSample {
  std::vector<double> x;
  double n = 1.0;
};

/// Category counts n_1..n_k.
struct CategoricalSample {
  std::vector<std::int64_t> counts;

  std::int64_t total() const {
    std::int64_t s = 0;
    for (auto c : counts) s += c;
    return s;
  }

  void validate() const {
    for (auto c : counts)
      if (c < 0) throw Error("counts must be nonnegative");
    if (total() <= 0) throw EmptySample("sample has no observations");
  }

  std::vector<double> frequencies() const {
    validate();
    const double n = static_cast<double>(total());
    std::vector<double> p(counts.size());
    for (std::size_t j = 0; j < counts.size(); ++j) p[j] = static_cast<double>(counts[j]) / n;
    return p;
  }

  bool has_zero_count() const {
    for (auto c : counts)
      if (c == 0) return true;
    return false;
  }
};

inline std::vector<double> sqrt_each(std::span<const double> v) {
  std::vector<double> out(v.size());
  for (std::size_t j = 0; j < v.size(); ++j) out[j] = std::sqrt(v[j]);
  return out;
}

}  // namespace permtest
