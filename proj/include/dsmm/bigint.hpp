#pragma once

#include <gmpxx.h>

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dsmm {

using BigInt = mpz_class;

// Lowercase hexadecimal, no leading zeros, "0" for zero, "-" prefix for
// negative values.
std::string to_hex(const BigInt& x);
BigInt from_hex(std::string_view hex);

// Non-negative residue of x modulo m.
BigInt mod(const BigInt& x, const BigInt& m);
BigInt powm(const BigInt& base, const BigInt& exp, const BigInt& m);
// Modular inverse; returns false when gcd(x, m) != 1.
bool invert(BigInt& out, const BigInt& x, const BigInt& m);
std::size_t bit_length(const BigInt& x);
BigInt pow2(unsigned long e);

// Miller-Rabin style probable prime test (40 rounds).
bool is_probable_prime(const BigInt& n);

using Digest = std::array<std::uint8_t, 32>;
Digest sha256(std::span<const std::uint8_t> data);
Digest sha256(std::string_view data);
BigInt digest_to_int(const Digest& d);

// Deterministic, seedable random source. Every probabilistic operation in the
// library draws from an injected Rng so runs replay bit-for-bit.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed), seed_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  // Uniform in [0, bound); bound must be positive.
  std::uint64_t uniform(std::uint64_t bound);
  // Uniform in [0, bound) for arbitrary-size bound > 0.
  BigInt below(const BigInt& bound);
  // Uniform in [lo, hi).
  BigInt between(const BigInt& lo, const BigInt& hi);
  // Exactly `bits` random bits with the top bit set.
  BigInt bits_with_top(std::size_t bits);
  double uniform01();

  // Independent child stream: seed derived from this stream's seed material
  // and the label, so derivation is order-independent.
  Rng derive(std::string_view label) const;
  std::uint64_t seed() const { return seed_; }

  // Standard UniformRandomBitGenerator interface.
  using result_type = std::uint64_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
};

// Seed of a derived stream; stable across platforms.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label);

}  // namespace dsmm
