#ifndef STORMCLASS_RNG_HPP
#define STORMCLASS_RNG_HPP

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace stormclass {

using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Mixes a parent seed with an ordered list of integer keys.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = splitmix64(seed);
  for (std::uint64_t k : keys) h = splitmix64(h ^ splitmix64(k));
  return h;
}

constexpr std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Sub-seed for a named pipeline stage.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view stage) {
  return derive_seed(seed, {fnv1a64(stage)});
}

/// Counter-based standard normal: the same key always yields the same draw.
double keyed_standard_normal(std::uint64_t key);

}  // namespace stormclass

#endif  // STORMCLASS_RNG_HPP
