#include "pairjudge/similarity.hpp"

#include <algorithm>
#include <cmath>

#include "pairjudge/error.hpp"

namespace pairjudge {

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorKind::DimensionMismatch, "vectors differ in length");
  if (a.empty()) throw Error(ErrorKind::DimensionMismatch, "empty vectors");
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw Error(ErrorKind::InvalidArgument, "zero-norm vector has no direction");
  // clamp rounding noise so identical vectors give exactly distance 0
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

std::vector<double> pairwise_cosine_distances(const std::vector<std::vector<double>>& vectors) {
  std::vector<double> out;
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    for (std::size_t j = i + 1; j < vectors.size(); ++j) {
      out.push_back(vectors[i] == vectors[j] ? 0.0 : cosine_distance(vectors[i], vectors[j]));
    }
  }
  return out;
}

double median(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorKind::EmptyInput, "median of nothing");
  std::sort(values.begin(), values.end());
  const auto n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace pairjudge
