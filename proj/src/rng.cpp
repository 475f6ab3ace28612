#include "pairjudge/rng.hpp"

#include <limits>
#include <numeric>
#include <string>

#include "pairjudge/digest.hpp"
#include "pairjudge/error.hpp"

namespace pairjudge {

std::uint64_t derive_seed(std::uint64_t root, std::string_view label) {
  const auto bytes = sha256(length_prefixed({std::to_string(root), label}));
  std::uint64_t seed = 0;
  for (int i = 0; i < 8; ++i) seed = (seed << 8) | bytes[i];
  return seed;
}

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound == 0) throw Error(ErrorKind::InvalidArgument, "Rng::below bound must be positive");
  // rejection sampling over the largest multiple of bound
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return x % bound;
}

double Rng::unit() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::vector<std::size_t> Rng::permutation(std::size_t n) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  shuffle(order);
  return order;
}

}  // namespace pairjudge
