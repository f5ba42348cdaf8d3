#pragma once

// Additively homomorphic public-key ciphers.
//
// Two schemes share one interface:
//  * paillier_like: Paillier with generator N+1, plaintext space Z_N,
//    ciphertexts in Z_{N^2}. Each player has a distinct modulus.
//  * shared_modulus: exponential-message scheme c = h^m * z^M mod n with
//    n = p*q and M | p-1. Every player shares the plaintext modulus M while
//    holding an independent trapdoor p. Decryption solves a discrete log in
//    the order-M subgroup of Z_p^* (Pohlig-Hellman over baby-step/giant-step).
//
// Both satisfy E(m1)*E(m2) = E(m1+m2 mod N) and E(m)^k = E(mk mod N).

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dsmm/bigint.hpp"

namespace dsmm {

enum class Scheme { paillier_like, shared_modulus };

std::string_view scheme_name(Scheme s);
Scheme scheme_from_name(std::string_view name);

struct PublicKey {
  std::string key_id;
  Scheme scheme = Scheme::paillier_like;
  BigInt N;               // plaintext modulus
  BigInt generator;       // N+1 for Paillier, h for shared-modulus
  BigInt cipher_modulus;  // N^2 for Paillier, p*q for shared-modulus
  std::size_t n_bits = 0;
};

namespace detail {
struct Trapdoor;
}

struct SecretKey {
  std::string key_id;
  Scheme scheme = Scheme::paillier_like;
  BigInt N;
  BigInt p;
  BigInt q;
  std::shared_ptr<const detail::Trapdoor> trapdoor;
};

struct KeyPair {
  PublicKey pk;
  SecretKey sk;
};

struct Ciphertext {
  BigInt value;
  std::string key_id;

  friend bool operator==(const Ciphertext&, const Ciphertext&) = default;
};

// Half-open interval [lo, hi) of admissible moduli.
struct Interval {
  BigInt lo;
  BigInt hi;
};

inline constexpr int kIntervalKeygenAttempts = 10'000;

KeyPair paillier_keygen(std::size_t bit_length, Rng& rng,
                        const std::optional<Interval>& interval = std::nullopt);
// Deterministic Paillier key from two distinct odd primes.
KeyPair paillier_from_primes(const BigInt& p, const BigInt& q);

BigInt default_search_bound();  // 2^24
KeyPair shared_modulus_keygen(const BigInt& M, std::size_t bit_length, Rng& rng,
                              const BigInt& search_bound = default_search_bound());

Ciphertext encrypt(const PublicKey& pk, const BigInt& m, Rng& rng);
BigInt decrypt(const SecretKey& sk, const Ciphertext& c);
Ciphertext hom_add(const PublicKey& pk, const Ciphertext& c1, const Ciphertext& c2);
Ciphertext hom_scale(const PublicKey& pk, const Ciphertext& c, const BigInt& k);
// c^u * E(r): encrypts u*m + r.
Ciphertext hom_affine(const PublicKey& pk, const Ciphertext& c, const BigInt& u,
                      const BigInt& r, Rng& rng);

// Per-player Paillier moduli for a ring of players P_2..P_n with
//   (n-1) d B^2 < N_2   and   N_{i-1} + (n-i+1) d B^2 < N_i.
struct ModulusChain {
  std::vector<KeyPair> keys;
  BigInt B;
  int d = 1;

  std::vector<BigInt> moduli() const;
};

ModulusChain build_modulus_chain(int n, const BigInt& B, int d, int bit_slack, Rng& rng);

// Ring keys for `count` players, each in its own interval so that any
// increasing selection of at most group_size-1 of them forms a valid chain.
ModulusChain build_group_chain(int count, const BigInt& B, int d, int group_size, int bit_slack,
                               Rng& rng);

// Chain hypothesis for ring moduli in ring order, with per-term bound `unit`
// (B^2, or d B^2 under wiretap repetition).
bool chain_hypothesis_holds(std::span<const BigInt> ring_moduli, const BigInt& unit);

nlohmann::json key_to_json(const PublicKey& pk, const SecretKey* sk = nullptr);
KeyPair key_from_json(const nlohmann::json& j);
PublicKey public_key_from_json(const nlohmann::json& j);

}  // namespace dsmm
