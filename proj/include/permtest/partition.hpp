#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "permtest/errors.hpp"

namespace permtest {

/// Grouping of the indices [k] into d disjoint clusters, ordered by center.
struct Partition {
  std::vector<std::vector<std::size_t>> clusters;
  std::vector<double> centers;
  std::size_t k = 0;

  std::size_t d() const { return clusters.size(); }

  std::vector<std::size_t> sizes() const {
    std::vector<std::size_t> s;
    s.reserve(clusters.size());
    for (const auto& c : clusters) s.push_back(c.size());
    return s;
  }

  /// Cluster index of every element of [k].
  std::vector<std::size_t> labels() const {
    std::vector<std::size_t> out(k, 0);
    for (std::size_t h = 0; h < clusters.size(); ++h)
      for (auto j : clusters[h]) out[j] = h;
    return out;
  }

  bool operator==(const Partition&) const = default;
};

/// Clusters of exactly equal reference values; centers are the distinct values.
inline Partition detect_null_partition(std::span<const double> reference) {
  Partition part;
  part.k = reference.size();
  std::vector<std::size_t> order(reference.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return reference[a] < reference[b]; });
  for (auto j : order) {
    if (part.centers.empty() || reference[j] != part.centers.back()) {
      part.centers.push_back(reference[j]);
      part.clusters.emplace_back();
    }
    part.clusters.back().push_back(j);
  }
  return part;
}

/// Throws InvalidPartition unless the clusters cover [k] disjointly, are
/// nonempty, have pairwise distinct centers, and (when `exact`) every reference
/// value equals its cluster center.
inline void validate_partition(const Partition& part, std::span<const double> reference, bool exact = true) {
  if (part.k != reference.size()) throw InvalidPartition("partition size does not match the reference");
  if (part.centers.size() != part.clusters.size() || part.clusters.empty())
    throw InvalidPartition("partition needs one center per cluster");
  std::vector<int> seen(part.k, 0);
  for (std::size_t h = 0; h < part.clusters.size(); ++h) {
    if (part.clusters[h].empty()) throw InvalidPartition("empty cluster");
    for (auto j : part.clusters[h]) {
      if (j >= part.k || seen[j]++) throw InvalidPartition("clusters must be disjoint subsets of [k]");
      if (exact && reference[j] != part.centers[h])
        throw InvalidPartition("reference value differs from its cluster center");
    }
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) throw InvalidPartition("clusters do not cover [k]");
  auto c = part.centers;
  std::sort(c.begin(), c.end());
  if (std::adjacent_find(c.begin(), c.end()) != c.end()) throw InvalidPartition("cluster centers must be distinct");
}

/// Sequential clustering of empirical frequencies on the square-root scale.
/// Frequencies are sorted; each new cluster starts at the first unassigned
/// element and absorbs every later element within lambda_n / sqrt(n) of it.
/// Centers r_g satisfy sqrt(r_g) = mean of sqrt(p_hat) over the cluster.
inline Partition cluster_empirical(std::span<const double> p_hat, double n, double lambda_n) {
  if (!(lambda_n > 0.0)) throw Error("cluster_empirical: lambda_n must be positive");
  if (!(n > 0.0)) throw Error("cluster_empirical: n must be positive");
  const std::size_t k = p_hat.size();
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p_hat[a] < p_hat[b]; });
  std::vector<double> root(k);
  for (std::size_t j = 0; j < k; ++j) root[j] = std::sqrt(p_hat[j]);

  const double sn = std::sqrt(n);
  Partition part;
  part.k = k;
  std::size_t start = 0;
  while (start < k) {
    const double anchor = root[order[start]];
    std::size_t end = start + 1;
    while (end < k && sn * std::abs(root[order[end]] - anchor) <= lambda_n) ++end;
    std::vector<std::size_t> cluster(order.begin() + static_cast<std::ptrdiff_t>(start),
                                     order.begin() + static_cast<std::ptrdiff_t>(end));
    double mean_root = 0.0;
    for (auto j : cluster) mean_root += root[j];
    mean_root /= static_cast<double>(cluster.size());
    part.clusters.push_back(std::move(cluster));
    part.centers.push_back(mean_root * mean_root);
    start = end;
  }
  return part;
}

}  // namespace permtest
