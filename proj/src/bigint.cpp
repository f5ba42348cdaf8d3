#include "dsmm/bigint.hpp"

#include <openssl/evp.h>

#include <stdexcept>

#include "dsmm/error.hpp"

namespace dsmm {

std::string to_hex(const BigInt& x) { return x.get_str(16); }

BigInt from_hex(std::string_view hex) {
  if (hex.empty()) throw FormatError("empty hex string");
  std::string_view digits = hex.front() == '-' ? hex.substr(1) : hex;
  if (digits.empty()) throw FormatError("empty hex string");
  for (char c : digits) {
    bool ok = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
    if (!ok) throw FormatError("invalid hex digit in '" + std::string(hex) + "'");
  }
  return BigInt(std::string(hex), 16);
}

BigInt mod(const BigInt& x, const BigInt& m) {
  BigInt r;
  mpz_mod(r.get_mpz_t(), x.get_mpz_t(), m.get_mpz_t());
  return r;
}

BigInt powm(const BigInt& base, const BigInt& exp, const BigInt& m) {
  BigInt r;
  if (exp < 0) {
    BigInt inv;
    if (!invert(inv, base, m)) throw RangeError("powm: base not invertible");
    BigInt e = -exp;
    mpz_powm(r.get_mpz_t(), inv.get_mpz_t(), e.get_mpz_t(), m.get_mpz_t());
    return r;
  }
  mpz_powm(r.get_mpz_t(), base.get_mpz_t(), exp.get_mpz_t(), m.get_mpz_t());
  return r;
}

bool invert(BigInt& out, const BigInt& x, const BigInt& m) {
  if (m == 1) {
    out = 0;
    return true;
  }
  return mpz_invert(out.get_mpz_t(), x.get_mpz_t(), m.get_mpz_t()) != 0;
}

std::size_t bit_length(const BigInt& x) {
  if (x == 0) return 0;
  return mpz_sizeinbase(x.get_mpz_t(), 2);
}

BigInt pow2(unsigned long e) {
  BigInt r;
  mpz_ui_pow_ui(r.get_mpz_t(), 2, e);
  return r;
}

bool is_probable_prime(const BigInt& n) {
  if (n < 2) return false;
  return mpz_probab_prime_p(n.get_mpz_t(), 40) > 0;
}

Digest sha256(std::span<const std::uint8_t> data) {
  Digest out{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 ||
      len != out.size()) {
    throw std::runtime_error("SHA-256 failed");
  }
  return out;
}

Digest sha256(std::string_view data) {
  return sha256(std::span<const std::uint8_t>(
      reinterpret_cast<const std::uint8_t*>(data.data()), data.size()));
}

BigInt digest_to_int(const Digest& d) {
  BigInt r;
  mpz_import(r.get_mpz_t(), d.size(), 1, 1, 1, 0, d.data());
  return r;
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view label) {
  std::string material = std::to_string(seed);
  material.push_back('\0');
  material.append(label);
  Digest d = sha256(material);
  std::uint64_t out = 0;
  for (int i = 0; i < 8; ++i) out = (out << 8) | d[i];
  return out;
}

std::uint64_t Rng::uniform(std::uint64_t bound) {
  if (bound == 0) throw ParameterError("Rng::uniform: zero bound");
  // Rejection sampling on the largest multiple of bound.
  const std::uint64_t limit = max() - (max() % bound + 1) % bound;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x > limit);
  return x % bound;
}

BigInt Rng::below(const BigInt& bound) {
  if (bound <= 0) throw ParameterError("Rng::below: bound must be positive");
  if (bound == 1) return 0;
  const std::size_t bits = bit_length(bound - 1);
  const std::size_t words = (bits + 63) / 64;
  std::vector<std::uint64_t> buf(words);
  BigInt r;
  do {
    for (auto& w : buf) w = engine_();
    const std::size_t extra = words * 64 - bits;
    if (extra > 0) buf.back() &= (~std::uint64_t{0}) >> extra;
    // buf.back() holds the most significant word.
    mpz_import(r.get_mpz_t(), words, -1, sizeof(std::uint64_t), 0, 0, buf.data());
  } while (r >= bound);
  return r;
}

BigInt Rng::between(const BigInt& lo, const BigInt& hi) {
  if (hi <= lo) throw ParameterError("Rng::between: empty range");
  return lo + below(hi - lo);
}

BigInt Rng::bits_with_top(std::size_t bits) {
  if (bits == 0) throw ParameterError("Rng::bits_with_top: zero bits");
  BigInt top = pow2(bits - 1);
  return top + below(top);
}

double Rng::uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

Rng Rng::derive(std::string_view label) const { return Rng(derive_seed(seed_, label)); }

}  // namespace dsmm
