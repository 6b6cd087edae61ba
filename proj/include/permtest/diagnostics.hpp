#pragma once

// Finite-n condition quantities. None of these change which test is run; they
// flag nulls close to degeneracy or to the boundary of the simplex.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "permtest/metrics.hpp"
#include "permtest/model.hpp"

namespace permtest {

struct ConditionDiagnostics {
  std::optional<double> eta_max;       // max |eta_jl| / sqrt(n), distinct Gaussian nodes
  std::optional<double> eta_bar_max;   // same over cluster centers
  std::optional<double> zeta_max;      // square-root scale analogue for categorical nodes
  std::optional<double> zeta_bar_max;
  std::optional<double> min_nq;        // min_j n q_j (1 - q_j)
  std::optional<double> tau_sq;        // within-cluster spread, n * sum (mu_j - nu_h)^2
  std::optional<double> delta1_sq;
  std::optional<double> delta2_sq;
  std::vector<std::string> warnings;

  bool operator==(const ConditionDiagnostics&) const = default;
};

inline constexpr double kNearDegenerateLimit = 0.1;
inline constexpr double kBoundaryCountLimit = 10.0;

/// eta_jl = 1/(x_j - x_l) * prod_{h != j,l} (x_l - x_h)/(x_j - x_h), 0-based j, l.
inline double eta(std::span<const double> nodes, std::size_t j, std::size_t l) {
  double v = 1.0 / (nodes[j] - nodes[l]);
  for (std::size_t h = 0; h < nodes.size(); ++h)
    if (h != j && h != l) v *= (nodes[l] - nodes[h]) / (nodes[j] - nodes[h]);
  return v;
}

inline double max_abs_eta(std::span<const double> nodes) {
  double m = 0.0;
  for (std::size_t j = 0; j < nodes.size(); ++j)
    for (std::size_t l = 0; l < nodes.size(); ++l)
      if (j != l) m = std::max(m, std::abs(eta(nodes, j, l)));
  return m;
}

/// n * sum_h sum_{j in C_h} (v_j - mean_h)^2 with cluster means as centers.
inline double tau_squared(std::span<const double> values, const Partition& part, double n) {
  double ss = 0.0;
  for (const auto& cluster : part.clusters) {
    double mean = 0.0;
    for (auto j : cluster) mean += values[j];
    mean /= static_cast<double>(cluster.size());
    for (auto j : cluster) ss += (values[j] - mean) * (values[j] - mean);
  }
  return n * ss;
}

struct NoncentralitySplit {
  double delta1_sq = 0.0;
  double delta2_sq = 0.0;
  Matching matching;
};

/// delta_1^2 = 4n sum (1 - p_l) d_l^2 and delta_2^2 = 4n sum p_l d_l^2 with
/// d_l = sqrt(p_l) - sqrt(q_pi(l)) under the optimal relabeling pi.
inline NoncentralitySplit noncentrality_split(std::span<const double> p, std::span<const double> q, double n) {
  NoncentralitySplit out;
  out.matching = cat_distance(p, q);
  for (std::size_t l = 0; l < p.size(); ++l) {
    const double dl = std::sqrt(p[l]) - std::sqrt(q[out.matching.permutation[l]]);
    out.delta1_sq += 4.0 * n * (1.0 - p[l]) * dl * dl;
    out.delta2_sq += 4.0 * n * p[l] * dl * dl;
  }
  return out;
}

inline double min_cell_variance(std::span<const double> q, double n) {
  double m = std::numeric_limits<double>::infinity();
  for (double v : q) m = std::min(m, n * v * (1.0 - v));
  return m;
}

namespace detail {

inline void flag_near_degenerate(ConditionDiagnostics& diag, const char* name, double value) {
  if (value > kNearDegenerateLimit)
    diag.warnings.push_back(std::string(name) + " exceeds " + std::to_string(kNearDegenerateLimit) +
                            ": reference values nearly tied at this sample size");
}

}  // namespace detail

/// Diagnostics for a one-sample null at sample size n. When counts are given
/// (categorical), the noncentrality split is evaluated at the plug-in p_hat.
inline ConditionDiagnostics condition_diagnostics(const NullHypothesis& null, double n,
                                                  const CategoricalSample* sample = nullptr) {
  ConditionDiagnostics diag;
  const double sn = std::sqrt(n);
  std::vector<double> centers = null.partition.centers;
  if (null.kind == NullKind::Gaussian) {
    if (!null.degenerate()) {
      diag.eta_max = max_abs_eta(null.reference) / sn;
      detail::flag_near_degenerate(diag, "eta_max", *diag.eta_max);
    } else if (null.d() >= 2) {
      diag.eta_bar_max = max_abs_eta(centers) / sn;
      detail::flag_near_degenerate(diag, "eta_bar_max", *diag.eta_bar_max);
    }
    diag.tau_sq = tau_squared(null.reference, null.partition, n);
    return diag;
  }

  const auto root_q = sqrt_each(null.reference);
  if (!null.degenerate()) {
    diag.zeta_max = max_abs_eta(root_q) / sn;
    detail::flag_near_degenerate(diag, "zeta_max", *diag.zeta_max);
  } else if (null.d() >= 2) {
    diag.zeta_bar_max = max_abs_eta(sqrt_each(centers)) / sn;
    detail::flag_near_degenerate(diag, "zeta_bar_max", *diag.zeta_bar_max);
  }
  diag.min_nq = min_cell_variance(null.reference, n);
  if (*diag.min_nq < kBoundaryCountLimit)
    diag.warnings.push_back("min n*q*(1-q) below " + std::to_string(kBoundaryCountLimit) +
                            ": a cell probability is close to the boundary");
  diag.tau_sq = 4.0 * tau_squared(root_q, null.partition, n);
  if (sample != nullptr) {
    const auto split = noncentrality_split(sample->frequencies(), null.reference, n);
    diag.delta1_sq = split.delta1_sq;
    diag.delta2_sq = split.delta2_sq;
    if (sample->has_zero_count()) diag.warnings.push_back("zero count in at least one category");
  }
  return diag;
}

}  // namespace permtest
