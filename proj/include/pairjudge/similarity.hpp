#pragma once

#include <span>
#include <vector>

namespace pairjudge {

/// Cosine similarity of two equal-length, non-zero vectors.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

/// 1 - cosine similarity, in [0, 2].
inline double cosine_distance(std::span<const double> a, std::span<const double> b) {
  return 1.0 - cosine_similarity(a, b);
}

/// Distances over all unordered pairs (i < j), row-major.
std::vector<double> pairwise_cosine_distances(const std::vector<std::vector<double>>& vectors);

/// Median of a non-empty sequence (mean of the middle two for even sizes).
double median(std::vector<double> values);

}  // namespace pairjudge
