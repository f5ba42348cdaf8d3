#pragma once

// Prime-order subgroup of Z_p^* shared by the message signatures and the
// affine-transform proofs.

#include <cstddef>
#include <string>
#include <string_view>

#include "dsmm/bigint.hpp"

namespace dsmm {

struct DlogGroup {
  BigInt p;      // field prime, p = k*q + 1
  BigInt q;      // prime subgroup order
  BigInt g;      // generator of the order-q subgroup

  BigInt exp(const BigInt& e) const { return powm(g, mod(e, q), p); }
  BigInt pow(const BigInt& base, const BigInt& e) const { return powm(base, mod(e, q), p); }
  BigInt mul(const BigInt& x, const BigInt& y) const { return x * y % p; }
  bool contains(const BigInt& x) const;
};

DlogGroup make_dlog_group(std::size_t p_bits, std::size_t q_bits, Rng& rng);
// Group used throughout the library: 256-bit p, 160-bit q, fixed seed.
const DlogGroup& default_group();

// Schnorr signatures over a DlogGroup.
struct SigningKey {
  BigInt x;  // secret exponent
  BigInt y;  // public g^x
};

SigningKey make_signing_key(const DlogGroup& group, Rng& rng);
// Deterministic nonce derived from the secret and the message.
std::string schnorr_sign(const DlogGroup& group, const SigningKey& key, std::string_view message);
bool schnorr_verify(const DlogGroup& group, const BigInt& public_y, std::string_view message,
                    std::string_view signature);

}  // namespace dsmm
