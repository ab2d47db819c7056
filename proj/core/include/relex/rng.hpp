#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace relex {

// Deterministic stream derivation. Every source of randomness in a run is a
// named substream of the run seed, so adding or removing one consumer does
// not perturb the others.
std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value);
std::uint64_t hash_string(std::string_view s);

// Seed for a named substream, e.g. derive_seed(seed, "shuffle", epoch).
std::uint64_t derive_seed(std::uint64_t run_seed, std::string_view stream,
                          std::uint64_t a = 0, std::uint64_t b = 0);

inline std::mt19937_64 make_rng(std::uint64_t run_seed, std::string_view stream,
                                std::uint64_t a = 0, std::uint64_t b = 0) {
  return std::mt19937_64(derive_seed(run_seed, stream, a, b));
}

}  // namespace relex
