#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <string_view>

namespace threadnet {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives an independent stream seed from a master seed, a purpose tag and
/// an index. All randomness in the project flows through this so that one
/// --seed reproduces every draw.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                                 std::uint64_t index = 0) {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a over the tag
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return splitmix64(master ^ splitmix64(h ^ splitmix64(index)));
}

inline std::mt19937_64 make_engine(std::uint64_t master, std::string_view tag,
                                   std::uint64_t index = 0) {
  return std::mt19937_64(derive_seed(master, tag, index));
}

/// Categorical draw by CDF inversion; weights need not be normalized.
template <typename Derived>
int sample_categorical(const Eigen::MatrixBase<Derived>& weights,
                       std::mt19937_64& rng) {
  const double total = weights.sum();
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double u = unif(rng) * total;
  for (Eigen::Index k = 0; k < weights.size(); ++k) {
    u -= weights[k];
    if (u <= 0.0) return static_cast<int>(k);
  }
  return static_cast<int>(weights.size() - 1);
}

}  // namespace threadnet
