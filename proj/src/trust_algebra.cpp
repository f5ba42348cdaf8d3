#include "dsmm/trust_algebra.hpp"

#include <cmath>

#include "dsmm/error.hpp"

namespace dsmm {

namespace {

void same_ring(const TrustPair& x, const TrustPair& y) {
  if (x.ring() != y.ring()) throw AlgebraError("trust pairs over different rings");
}

void same_key(const PublicKey& pk, const TrustCipherPair& c) {
  if (c.ea.key_id != pk.key_id || c.eb.key_id != pk.key_id) {
    throw AlgebraError("trust cipher pair components not under the given key");
  }
}

bool is_unit(const BigInt& x, const BigInt& N) {
  BigInt g;
  mpz_gcd(g.get_mpz_t(), x.get_mpz_t(), N.get_mpz_t());
  return g == 1;
}

}  // namespace

TrustPair::TrustPair(BigInt a, BigInt b, BigInt ring)
    : a_(std::move(a)), b_(std::move(b)), ring_(std::move(ring)) {
  if (ring_ < 2) throw AlgebraError("trust ring modulus must be >= 2");
  if (a_ < 0 || a_ >= ring_ || b_ < 0 || b_ >= ring_) {
    throw AlgebraError("trust pair components must lie in [0, N)");
  }
}

std::string to_string(const TrustPair& x) {
  return "⟨" + to_hex(x.a()) + "," + to_hex(x.b()) + "⟩";
}

TrustPair seq_agg(const TrustPair& x, const TrustPair& y) {
  same_ring(x, y);
  const BigInt& N = x.ring();
  return {mod(x.a() * y.a() + x.b() * y.b(), N), mod(x.a() * y.b() + x.b() * y.a(), N), N};
}

TrustPair par_agg(const TrustPair& x, const TrustPair& y) {
  same_ring(x, y);
  const BigInt& N = x.ring();
  return {mod(x.a() + y.a() - x.a() * y.a(), N), mod(x.b() * y.b(), N), N};
}

bool par_invertible(const TrustPair& x) {
  const BigInt& N = x.ring();
  if (!is_unit(x.b(), N)) return false;
  return x.a() == 0 || is_unit(mod(x.a() - 1, N), N);
}

std::optional<TrustPair> par_invert(const TrustPair& x) {
  if (!par_invertible(x)) return std::nullopt;
  const BigInt& N = x.ring();
  BigInt b_inv;
  invert(b_inv, x.b(), N);
  if (x.a() == 0) return TrustPair(0, b_inv, N);
  BigInt am1_inv;
  invert(am1_inv, mod(x.a() - 1, N), N);
  return TrustPair(mod(x.a() * am1_inv, N), b_inv, N);
}

TrustCipherPair encrypt_pair(const PublicKey& pk, const TrustPair& x, Rng& rng) {
  if (x.ring() != pk.N) throw AlgebraError("trust pair ring differs from key plaintext modulus");
  return {encrypt(pk, x.a(), rng), encrypt(pk, x.b(), rng)};
}

TrustPair decrypt_pair(const SecretKey& sk, const TrustCipherPair& c) {
  if (c.ea.key_id != sk.key_id || c.eb.key_id != sk.key_id) {
    throw AlgebraError("trust cipher pair not under the given key");
  }
  return {decrypt(sk, c.ea), decrypt(sk, c.eb), sk.N};
}

TrustCipherPair hom_seq_agg(const PublicKey& pk, const TrustCipherPair& ex, const TrustPair& y) {
  same_key(pk, ex);
  if (y.ring() != pk.N) throw AlgebraError("clear operand ring differs from key");
  Ciphertext first = hom_add(pk, hom_scale(pk, ex.ea, y.a()), hom_scale(pk, ex.eb, y.b()));
  Ciphertext second = hom_add(pk, hom_scale(pk, ex.ea, y.b()), hom_scale(pk, ex.eb, y.a()));
  return {first, second};
}

TrustCipherPair hom_par_agg(const PublicKey& pk, const TrustCipherPair& ex, const TrustPair& y,
                            Rng& rng) {
  same_key(pk, ex);
  if (y.ring() != pk.N) throw AlgebraError("clear operand ring differs from key");
  const BigInt neg_c = mod(-y.a(), pk.N);
  Ciphertext first =
      hom_add(pk, hom_add(pk, ex.ea, encrypt(pk, y.a(), rng)), hom_scale(pk, ex.ea, neg_c));
  return {first, hom_scale(pk, ex.eb, y.b())};
}

void PrecisionParams::validate() const {
  if (p < 1 || n < 1) throw ParameterError("precision: p and n must be >= 1");
  if (!(coefficient_bound(p, n) < N)) {
    throw ParameterError("precision: need 2^{n(2p+1)} < N");
  }
}

BigInt encode_trust(double x, const PrecisionParams& params) {
  if (!(x >= 0.0 && x <= 1.0)) throw RangeError("encode_trust: value outside [0,1]");
  params.validate();
  // floor(x * 2^p) computed exactly from the binary expansion of x.
  BigInt scaled;
  mpz_set_d(scaled.get_mpz_t(), std::floor(std::ldexp(x, params.p)));
  return mod(scaled, params.N);
}

BigInt balanced_lift(const BigInt& v, const BigInt& N) {
  BigInt r = mod(v, N);
  if (2 * r >= N) r -= N;
  return r;
}

double decode_trust(const BigInt& v, const PrecisionParams& params, int scale_exponent) {
  BigInt lifted = balanced_lift(v, params.N);
  mpf_class num(lifted, 512);
  mpf_class den(pow2(static_cast<unsigned long>(params.p) * scale_exponent), 512);
  mpf_class q(0, 512);
  q = num / den;
  return q.get_d();
}

BigInt coefficient_bound(int p, int n) {
  if (p < 1 || n < 1) throw ParameterError("coefficient_bound: p and n must be >= 1");
  return pow2(static_cast<unsigned long>(n) * (2ul * p + 1));
}

nlohmann::json pair_to_json(const TrustPair& x) {
  return {{"a", to_hex(x.a())}, {"b", to_hex(x.b())}};
}

TrustPair pair_from_json(const nlohmann::json& j, const BigInt& ring) {
  try {
    return {from_hex(j.at("a").get<std::string>()), from_hex(j.at("b").get<std::string>()), ring};
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed trust pair: ") + e.what());
  }
}

}  // namespace dsmm
