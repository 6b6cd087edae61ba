#pragma once

// Symmetric-polynomial kernel: power sums, elementary symmetric polynomials,
// the inverse-Vandermonde matrix E and the integrated Lagrange basis f_l whose
// node sums drive every test statistic in the library.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "permtest/errors.hpp"

namespace permtest {

/// p_1..p_max_order with p_l = sum_j x_j^l.
inline std::vector<double> power_sums(std::span<const double> x, int max_order) {
  if (max_order < 1) throw Error("power_sums: max_order must be >= 1");
  std::vector<double> p(static_cast<std::size_t>(max_order), 0.0);
  for (double v : x) {
    double pw = 1.0;
    for (int l = 0; l < max_order; ++l) {
      pw *= v;
      p[static_cast<std::size_t>(l)] += pw;
    }
  }
  return p;
}

struct SymmetricCoefficients {
  std::vector<double> e;  // e_0..e_k, e[0] == 1
  std::vector<double> p;  // p_1..p_k
};

namespace detail {

// Newton's recurrence loses relative accuracy when the nodes straddle zero,
// so the power sums and the recurrence run in extended precision.
inline std::vector<long double> newton_elementary(std::span<const double> x) {
  const std::size_t k = x.size();
  std::vector<long double> p(k, 0.0L), e(k + 1, 0.0L);
  for (double v : x) {
    long double pw = 1.0L;
    for (std::size_t l = 0; l < k; ++l) {
      pw *= v;
      p[l] += pw;
    }
  }
  e[0] = 1.0L;
  for (std::size_t l = 1; l <= k; ++l) {
    long double acc = 0.0L;
    long double sign = 1.0L;
    for (std::size_t j = 1; j <= l; ++j) {
      acc += sign * e[l - j] * p[j - 1];
      sign = -sign;
    }
    e[l] = acc / static_cast<long double>(l);
  }
  return e;
}

inline std::vector<long double> leave_one_out(const std::vector<long double>& e_full, double node) {
  const std::size_t k = e_full.size() - 1;
  std::vector<long double> e(k, 0.0L);
  if (k == 0) return e;
  e[0] = 1.0L;
  for (std::size_t m = 1; m < k; ++m) e[m] = e_full[m] - node * e[m - 1];
  return e;
}

}  // namespace detail

/// e_0..e_k of x from the power sums via Newton's identities
///   l * e_l = sum_{j=1}^{l} (-1)^{j-1} e_{l-j} p_j.
inline SymmetricCoefficients elementary_symmetric(std::span<const double> x) {
  const std::size_t k = x.size();
  SymmetricCoefficients out;
  const auto e = detail::newton_elementary(x);
  out.e.assign(e.begin(), e.end());
  if (k > 0) out.p = power_sums(x, static_cast<int>(k));
  return out;
}

/// Elementary symmetric polynomials of the node set with `node` removed,
/// obtained by synthetic division of prod (t - x_j) by (t - node).
/// Returns e_0..e_{k-1}.
inline std::vector<double> leave_one_out_symmetric(std::span<const double> e_full, double node) {
  const std::size_t k = e_full.size() - 1;
  std::vector<double> e(k, 0.0);
  if (k == 0) return e;
  e[0] = 1.0;
  for (std::size_t m = 1; m < k; ++m) e[m] = e_full[m] - node * e[m - 1];
  return e;
}

/// Relative scale below which two nodes are treated as tied.
inline constexpr double kNodeTieTolerance = 1e-9;

/// Smallest pairwise gap among the nodes (infinity for fewer than two).
inline double min_pairwise_gap(std::span<const double> nodes) {
  std::vector<double> s(nodes.begin(), nodes.end());
  std::sort(s.begin(), s.end());
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < s.size(); ++i) gap = std::min(gap, s[i] - s[i - 1]);
  return gap;
}

inline bool nodes_distinct(std::span<const double> nodes) {
  double scale = 0.0;
  for (double v : nodes) scale = std::max(scale, std::abs(v));
  return !(min_pairwise_gap(nodes) < kNodeTieTolerance * (1.0 + scale));
}

inline void require_distinct(std::span<const double> nodes) {
  if (!nodes_distinct(nodes)) {
    throw DegenerateNodes("reference nodes are not pairwise distinct; use the degenerate test path");
  }
}

/// V(j,l) = x_j^(l-1).
inline Eigen::MatrixXd vandermonde(std::span<const double> nodes) {
  const auto k = static_cast<Eigen::Index>(nodes.size());
  Eigen::MatrixXd v(k, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    double pw = 1.0;
    for (Eigen::Index l = 0; l < k; ++l) {
      v(j, l) = pw;
      pw *= nodes[static_cast<std::size_t>(j)];
    }
  }
  return v;
}

struct EMatrix {
  Eigen::MatrixXd entries;
  std::vector<double> nodes;
};

/// Inverse of the Vandermonde matrix written through elementary symmetric
/// polynomials: entry (j,l) = (-1)^(j-1) e_{k-j}(nodes \ l) / prod_{j' != l}(x_j' - x_l).
inline EMatrix e_matrix(std::span<const double> nodes) {
  require_distinct(nodes);
  const std::size_t k = nodes.size();
  const auto full = detail::newton_elementary(nodes);
  EMatrix out{Eigen::MatrixXd(k, k), std::vector<double>(nodes.begin(), nodes.end())};
  for (std::size_t l = 0; l < k; ++l) {
    const auto loo = detail::leave_one_out(full, nodes[l]);
    long double denom = 1.0L;
    for (std::size_t j = 0; j < k; ++j)
      if (j != l) denom *= static_cast<long double>(nodes[j]) - nodes[l];
    for (std::size_t j = 1; j <= k; ++j) {
      const long double sign = (j % 2 == 1) ? 1.0L : -1.0L;
      out.entries(static_cast<Eigen::Index>(j - 1), static_cast<Eigen::Index>(l)) =
          static_cast<double>(sign * loo[k - j] / denom);
    }
  }
  return out;
}

namespace detail {

inline std::vector<double> lagrange_integral_coeffs(std::span<const double> nodes,
                                                    const std::vector<long double>& e_full,
                                                    std::size_t l) {
  const std::size_t k = nodes.size();
  const auto loo = leave_one_out(e_full, nodes[l]);
  long double denom = 1.0L;
  for (std::size_t j = 0; j < k; ++j)
    if (j != l) denom *= static_cast<long double>(nodes[l]) - nodes[j];
  std::vector<double> c(k);
  for (std::size_t j = 1; j <= k; ++j) {
    const long double sign = ((k - j) % 2 == 0) ? 1.0L : -1.0L;
    c[j - 1] = static_cast<double>(sign * loo[k - j] / (static_cast<long double>(j) * denom));
  }
  return c;
}

}  // namespace detail

/// Monomial coefficients c_1..c_k of f_l(t) = int_0^t L_l(s) ds, with L_l the
/// l-th Lagrange polynomial on the nodes (0-based l). Stored as c[j-1].
inline std::vector<double> f_coefficients(std::span<const double> nodes, std::size_t l) {
  require_distinct(nodes);
  if (l >= nodes.size()) throw Error("f_coefficients: index out of range");
  return detail::lagrange_integral_coeffs(nodes, detail::newton_elementary(nodes), l);
}

/// sum_j f(x_j) for f(t) = sum_i c_i t^i, as a combination of power sums.
inline double sum_f(std::span<const double> x, std::span<const double> coeffs) {
  if (coeffs.empty()) return 0.0;
  const auto p = power_sums(x, static_cast<int>(coeffs.size()));
  double s = 0.0;
  for (std::size_t i = 0; i < coeffs.size(); ++i) s += coeffs[i] * p[i];
  return s;
}

/// The family f_1..f_k on a fixed node set, precomputed once.
class LagrangeIntegralBasis {
 public:
  explicit LagrangeIntegralBasis(std::vector<double> nodes) : nodes_(std::move(nodes)) {
    if (nodes_.empty()) throw Error("LagrangeIntegralBasis: no nodes");
    require_distinct(nodes_);
    const auto full = detail::newton_elementary(nodes_);
    coeffs_.reserve(nodes_.size());
    for (std::size_t l = 0; l < nodes_.size(); ++l)
      coeffs_.push_back(detail::lagrange_integral_coeffs(nodes_, full, l));
  }

  std::size_t size() const { return nodes_.size(); }
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& coefficients(std::size_t l) const { return coeffs_.at(l); }

  /// sum_j f_l(x_j) for every l; one pass of power sums shared by all l.
  std::vector<double> sums(std::span<const double> x) const {
    const std::size_t k = size();
    const auto p = power_sums(x, static_cast<int>(k));
    std::vector<double> out(k, 0.0);
    for (std::size_t l = 0; l < k; ++l) {
      double s = 0.0;
      for (std::size_t i = 0; i < k; ++i) s += coeffs_[l][i] * p[i];
      out[l] = s;
    }
    return out;
  }

  double value(std::size_t l, double t) const {
    const auto& c = coeffs_.at(l);
    double acc = 0.0;
    for (std::size_t i = c.size(); i-- > 0;) acc = acc * t + c[i];
    return acc * t;
  }

  /// f_l'(t) by term-wise differentiation of the monomial form.
  double derivative(std::size_t l, double t) const {
    const auto& c = coeffs_.at(l);
    double acc = 0.0;
    for (std::size_t i = c.size(); i-- > 0;) acc = acc * t + static_cast<double>(i + 1) * c[i];
    return acc;
  }

 private:
  std::vector<double> nodes_;
  std::vector<std::vector<double>> coeffs_;
};

}  // namespace permtest
