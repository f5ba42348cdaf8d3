#include "dsmm/dlog_group.hpp"

#include "dsmm/error.hpp"

namespace dsmm {

namespace {

BigInt hash_to_exponent(const DlogGroup& group, std::string_view prefix, const BigInt& a,
                        const BigInt& b, std::string_view message) {
  std::string material(prefix);
  material += '|';
  material += to_hex(a);
  material += '|';
  material += to_hex(b);
  material += '|';
  material.append(message);
  return mod(digest_to_int(sha256(material)), group.q);
}

}  // namespace

bool DlogGroup::contains(const BigInt& x) const {
  return x > 0 && x < p && powm(x, q, p) == 1;
}

DlogGroup make_dlog_group(std::size_t p_bits, std::size_t q_bits, Rng& rng) {
  if (q_bits < 16 || p_bits < q_bits + 8) throw ParameterError("make_dlog_group: bad sizes");
  DlogGroup group;
  do {
    group.q = rng.bits_with_top(q_bits) | 1;
  } while (!is_probable_prime(group.q));
  for (;;) {
    BigInt k = rng.bits_with_top(p_bits - q_bits);
    if (mpz_odd_p(k.get_mpz_t())) k += 1;
    BigInt p = k * group.q + 1;
    if (bit_length(p) != p_bits || !is_probable_prime(p)) continue;
    group.p = p;
    for (;;) {
      BigInt h = rng.between(2, p - 1);
      BigInt g = powm(h, k, p);
      if (g != 1) {
        group.g = g;
        return group;
      }
    }
  }
}

const DlogGroup& default_group() {
  static const DlogGroup group = [] {
    Rng rng(0x5eedd15cULL);
    return make_dlog_group(256, 160, rng);
  }();
  return group;
}

SigningKey make_signing_key(const DlogGroup& group, Rng& rng) {
  SigningKey key;
  key.x = rng.between(1, group.q);
  key.y = group.exp(key.x);
  return key;
}

std::string schnorr_sign(const DlogGroup& group, const SigningKey& key, std::string_view message) {
  BigInt k = hash_to_exponent(group, "nonce", key.x, key.y, message);
  if (k == 0) k = 1;
  BigInt R = group.exp(k);
  BigInt e = hash_to_exponent(group, "challenge", R, key.y, message);
  BigInt s = mod(k + key.x * e, group.q);
  return to_hex(e) + "." + to_hex(s);
}

bool schnorr_verify(const DlogGroup& group, const BigInt& public_y, std::string_view message,
                    std::string_view signature) {
  auto dot = signature.find('.');
  if (dot == std::string_view::npos) return false;
  BigInt e;
  BigInt s;
  try {
    e = from_hex(signature.substr(0, dot));
    s = from_hex(signature.substr(dot + 1));
  } catch (const Error&) {
    return false;
  }
  if (e < 0 || e >= group.q || s < 0 || s >= group.q) return false;
  if (!group.contains(public_y)) return false;
  // R = g^s * y^{-e}
  BigInt R = group.mul(group.exp(s), group.pow(public_y, group.q - e));
  return hash_to_exponent(group, "challenge", R, public_y, message) == e;
}

}  // namespace dsmm
