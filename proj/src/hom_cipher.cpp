#include "dsmm/hom_cipher.hpp"

#include <algorithm>

#include "dsmm/error.hpp"

namespace dsmm {

namespace detail {

// Baby-step/giant-step solver in a cyclic group of prime order `order`
// generated by `base` inside Z_p^*.
struct PrimeOrderDlog {
  BigInt order;
  BigInt base;
  BigInt giant;  // base^{-m}
  std::uint64_t m = 0;
  std::map<BigInt, std::uint64_t> baby;

  PrimeOrderDlog(const BigInt& ord, const BigInt& b, const BigInt& p) : order(ord), base(b) {
    BigInt root = sqrt(ord);
    if (root * root < ord) root += 1;
    m = root.get_ui();
    BigInt cur = 1;
    for (std::uint64_t j = 0; j < m; ++j) {
      baby.emplace(cur, j);
      cur = cur * base % p;
    }
    // cur = base^m
    if (!invert(giant, cur, p)) throw ParameterError("dlog: base not invertible");
  }

  std::uint64_t solve(const BigInt& target, const BigInt& p) const {
    BigInt y = target;
    for (std::uint64_t i = 0; i <= m; ++i) {
      auto it = baby.find(y);
      if (it != baby.end()) {
        BigInt x = BigInt(static_cast<unsigned long>(i)) * m + it->second;
        x %= order;
        return x.get_ui();
      }
      y = y * giant % p;
    }
    throw RangeError("dlog: element outside the message subgroup");
  }
};

struct PrimePower {
  BigInt prime;
  unsigned exponent = 0;
  BigInt value;  // prime^exponent
};

struct Trapdoor {
  Scheme scheme = Scheme::paillier_like;
  // Paillier
  BigInt n_square;
  BigInt lambda;
  BigInt mu;
  // shared-modulus
  BigInt p;
  BigInt cofactor;   // (p-1)/M
  BigInt g_order_m;  // h^cofactor mod p, of order exactly M
  std::vector<PrimePower> factors;
  std::vector<PrimeOrderDlog> solvers;
};

}  // namespace detail

namespace {

using detail::PrimePower;
using detail::Trapdoor;

std::string make_key_id(Scheme scheme, const BigInt& N, const BigInt& gen, const BigInt& cmod) {
  std::string material = std::string(scheme_name(scheme)) + "|" + to_hex(N) + "|" + to_hex(gen) +
                         "|" + to_hex(cmod);
  Digest d = sha256(material);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string id = "k";
  for (int i = 0; i < 8; ++i) {
    id.push_back(kHex[d[i] >> 4]);
    id.push_back(kHex[d[i] & 0xf]);
  }
  return id;
}

BigInt random_prime(std::size_t bits, Rng& rng) {
  if (bits < 2) throw ParameterError("random_prime: need at least 2 bits");
  for (;;) {
    BigInt c = rng.bits_with_top(bits);
    if (bits > 2) c |= 1;
    while (bit_length(c) == bits) {
      if (is_probable_prime(c)) return c;
      c += (bits > 2) ? 2 : 1;
    }
  }
}

BigInt next_odd_prime(BigInt c) {
  if (c <= 3) return 3;
  if (mpz_even_p(c.get_mpz_t())) c += 1;
  while (!is_probable_prime(c)) c += 2;
  return c;
}

// Paillier requires gcd(N, (p-1)(q-1)) = 1.
bool paillier_primes_ok(const BigInt& p, const BigInt& q) {
  if (p == q || p < 3 || q < 3) return false;
  if (mpz_even_p(p.get_mpz_t()) || mpz_even_p(q.get_mpz_t())) return false;
  BigInt phi = (p - 1) * (q - 1);
  BigInt g;
  BigInt n = p * q;
  mpz_gcd(g.get_mpz_t(), n.get_mpz_t(), phi.get_mpz_t());
  return g == 1;
}

std::vector<PrimePower> factor_small(const BigInt& M) {
  std::vector<PrimePower> out;
  BigInt rest = M;
  auto take = [&](const BigInt& prime) {
    unsigned e = 0;
    BigInt value = 1;
    while (rest % prime == 0) {
      rest /= prime;
      value *= prime;
      ++e;
    }
    if (e > 0) out.push_back({prime, e, value});
  };
  take(2);
  for (unsigned long f = 3; f < (1ul << 20); f += 2) {
    if (BigInt(f) * f > rest) break;
    if (rest % f == 0) take(BigInt(f));
  }
  if (rest > 1) {
    if (!is_probable_prime(rest)) {
      throw ParameterError("shared modulus: M has no small factorization");
    }
    out.push_back({rest, 1, rest});
  }
  return out;
}

std::shared_ptr<const Trapdoor> paillier_trapdoor(const BigInt& p, const BigInt& q) {
  auto t = std::make_shared<Trapdoor>();
  t->scheme = Scheme::paillier_like;
  BigInt N = p * q;
  t->n_square = N * N;
  BigInt pm = p - 1;
  BigInt qm = q - 1;
  mpz_lcm(t->lambda.get_mpz_t(), pm.get_mpz_t(), qm.get_mpz_t());
  if (!invert(t->mu, t->lambda, N)) throw GenerationError("paillier: lambda not invertible");
  return t;
}

std::shared_ptr<const Trapdoor> shared_trapdoor(const BigInt& M, const BigInt& p,
                                                const BigInt& h) {
  auto t = std::make_shared<Trapdoor>();
  t->scheme = Scheme::shared_modulus;
  t->p = p;
  t->cofactor = (p - 1) / M;
  t->g_order_m = powm(h, t->cofactor, p);
  t->factors = factor_small(M);
  for (const auto& f : t->factors) {
    BigInt base = powm(t->g_order_m, M / f.prime, p);
    t->solvers.emplace_back(f.prime, base, p);
  }
  return t;
}

// Does g have order exactly M in Z_p^*?
bool has_order(const BigInt& g, const BigInt& M, const std::vector<PrimePower>& factors,
               const BigInt& p) {
  if (powm(g, M, p) != 1) return false;
  for (const auto& f : factors) {
    if (powm(g, M / f.prime, p) == 1) return false;
  }
  return true;
}

BigInt shared_dlog(const Trapdoor& t, const BigInt& M, const BigInt& x) {
  const BigInt& p = t.p;
  BigInt result = 0;
  BigInt modulus = 1;
  for (std::size_t idx = 0; idx < t.factors.size(); ++idx) {
    const PrimePower& f = t.factors[idx];
    const auto& solver = t.solvers[idx];
    BigInt cof = M / f.value;
    BigInt g_e = powm(t.g_order_m, cof, p);
    BigInt h_e = powm(x, cof, p);
    BigInt g_e_inv;
    invert(g_e_inv, g_e, p);
    BigInt digit_pow = 1;
    BigInt x_e = 0;
    for (unsigned i = 0; i < f.exponent; ++i) {
      BigInt shifted = powm(g_e_inv, x_e, p) * h_e % p;
      BigInt e = 1;
      for (unsigned k = i + 1; k < f.exponent; ++k) e *= f.prime;
      BigInt target = powm(shifted, e, p);
      BigInt digit = solver.solve(target, p);
      x_e += digit * digit_pow;
      digit_pow *= f.prime;
    }
    // CRT: result = x_e mod f.value, result = result mod modulus
    BigInt inv;
    invert(inv, mod(modulus, f.value), f.value);
    BigInt k = mod((x_e - result) * inv, f.value);
    result += k * modulus;
    modulus *= f.value;
  }
  return mod(result, M);
}

void check_same_key(const Ciphertext& a, const std::string& key_id) {
  if (a.key_id != key_id) {
    throw KeyMismatchError("ciphertext under key " + a.key_id + " used with key " + key_id);
  }
}

PublicKey make_paillier_public(const BigInt& N) {
  PublicKey pk;
  pk.scheme = Scheme::paillier_like;
  pk.N = N;
  pk.generator = N + 1;
  pk.cipher_modulus = N * N;
  pk.n_bits = bit_length(N);
  pk.key_id = make_key_id(pk.scheme, pk.N, pk.generator, pk.cipher_modulus);
  return pk;
}

}  // namespace

std::string_view scheme_name(Scheme s) {
  return s == Scheme::paillier_like ? "paillier_like" : "shared_modulus";
}

Scheme scheme_from_name(std::string_view name) {
  if (name == "paillier_like") return Scheme::paillier_like;
  if (name == "shared_modulus") return Scheme::shared_modulus;
  throw FormatError("unknown scheme '" + std::string(name) + "'");
}

KeyPair paillier_from_primes(const BigInt& p, const BigInt& q) {
  if (!is_probable_prime(p) || !is_probable_prime(q) || !paillier_primes_ok(p, q)) {
    throw ParameterError("paillier: need two distinct odd primes with gcd(N, phi(N)) = 1");
  }
  KeyPair kp;
  kp.pk = make_paillier_public(p * q);
  kp.sk.key_id = kp.pk.key_id;
  kp.sk.scheme = Scheme::paillier_like;
  kp.sk.N = kp.pk.N;
  kp.sk.p = p;
  kp.sk.q = q;
  kp.sk.trapdoor = paillier_trapdoor(p, q);
  return kp;
}

KeyPair paillier_keygen(std::size_t bit_length_, Rng& rng, const std::optional<Interval>& interval) {
  if (!interval) {
    if (bit_length_ < 16) throw ParameterError("paillier_keygen: bit_length must be >= 16");
    const std::size_t pb = bit_length_ / 2;
    const std::size_t qb = bit_length_ - pb;
    for (;;) {
      BigInt p = random_prime(pb, rng);
      BigInt q = random_prime(qb, rng);
      if (paillier_primes_ok(p, q)) return paillier_from_primes(p, q);
    }
  }
  const BigInt& lo = interval->lo;
  const BigInt& hi = interval->hi;
  // Narrow intervals are still searched; the bounded search reports failure.
  if (lo < 1 || hi <= lo) throw ParameterError("paillier_keygen: empty interval");
  const std::size_t pbits = std::max<std::size_t>(2, bit_length(lo) / 2);
  for (int attempt = 0; attempt < kIntervalKeygenAttempts; ++attempt) {
    BigInt p = pbits <= 2 ? BigInt(3) : random_prime(pbits, rng);
    if (p < 3) p = 3;
    BigInt qlo = (lo + p - 1) / p;
    BigInt qhi = (hi + p - 1) / p;  // exclusive
    if (qhi <= qlo) continue;
    BigInt q = next_odd_prime(rng.between(qlo, qhi));
    BigInt N = p * q;
    if (N < lo || N >= hi) continue;
    if (!paillier_primes_ok(p, q)) continue;
    return paillier_from_primes(p, q);
  }
  throw GenerationError("paillier_keygen: no valid semiprime found in [" + lo.get_str() + ", " +
                        hi.get_str() + ")");
}

BigInt default_search_bound() { return pow2(24); }

KeyPair shared_modulus_keygen(const BigInt& M, std::size_t bit_length_, Rng& rng,
                              const BigInt& search_bound) {
  if (M < 2) throw ParameterError("shared_modulus_keygen: M must be >= 2");
  if (M > search_bound) {
    throw ParameterError("shared_modulus_keygen: M exceeds the discrete-log search bound");
  }
  const std::size_t mbits = bit_length(M);
  const std::size_t pbits = bit_length_ / 2;
  if (pbits < mbits + 8) {
    throw ParameterError("shared_modulus_keygen: bit_length too small for M");
  }
  auto factors = factor_small(M);
  BigInt p;
  BigInt cofactor;
  for (;;) {
    cofactor = rng.bits_with_top(pbits - mbits);
    p = cofactor * M + 1;
    if (is_probable_prime(p)) break;
  }
  BigInt q;
  do {
    q = random_prime(bit_length_ - pbits, rng);
  } while (q == p);
  const BigInt n = p * q;
  BigInt h;
  for (;;) {
    h = rng.between(2, n);
    BigInt g;
    mpz_gcd(g.get_mpz_t(), h.get_mpz_t(), n.get_mpz_t());
    if (g != 1) continue;
    if (has_order(powm(h, cofactor, p), M, factors, p)) break;
  }
  KeyPair kp;
  kp.pk.scheme = Scheme::shared_modulus;
  kp.pk.N = M;
  kp.pk.generator = h;
  kp.pk.cipher_modulus = n;
  kp.pk.n_bits = bit_length(n);
  kp.pk.key_id = make_key_id(kp.pk.scheme, M, h, n);
  kp.sk.key_id = kp.pk.key_id;
  kp.sk.scheme = Scheme::shared_modulus;
  kp.sk.N = M;
  kp.sk.p = p;
  kp.sk.q = q;
  kp.sk.trapdoor = shared_trapdoor(M, p, h);
  return kp;
}

Ciphertext encrypt(const PublicKey& pk, const BigInt& m, Rng& rng) {
  if (m < 0 || m >= pk.N) throw RangeError("encrypt: plaintext outside [0, N)");
  const BigInt& cm = pk.cipher_modulus;
  if (pk.scheme == Scheme::paillier_like) {
    const BigInt& N = pk.N;
    BigInt r;
    BigInt g;
    do {
      r = rng.between(1, N);
      mpz_gcd(g.get_mpz_t(), r.get_mpz_t(), N.get_mpz_t());
    } while (g != 1);
    BigInt gm = (1 + m * N) % cm;
    return {gm * powm(r, N, cm) % cm, pk.key_id};
  }
  BigInt z;
  BigInt g;
  do {
    z = rng.between(1, cm);
    mpz_gcd(g.get_mpz_t(), z.get_mpz_t(), cm.get_mpz_t());
  } while (g != 1);
  return {powm(pk.generator, m, cm) * powm(z, pk.N, cm) % cm, pk.key_id};
}

BigInt decrypt(const SecretKey& sk, const Ciphertext& c) {
  check_same_key(c, sk.key_id);
  const Trapdoor& t = *sk.trapdoor;
  if (sk.scheme == Scheme::paillier_like) {
    BigInt u = powm(c.value, t.lambda, t.n_square);
    BigInt l = (u - 1) / sk.N;
    return l * t.mu % sk.N;
  }
  BigInt x = powm(c.value % t.p, t.cofactor, t.p);
  return shared_dlog(t, sk.N, x);
}

Ciphertext hom_add(const PublicKey& pk, const Ciphertext& c1, const Ciphertext& c2) {
  check_same_key(c1, pk.key_id);
  check_same_key(c2, pk.key_id);
  return {c1.value * c2.value % pk.cipher_modulus, pk.key_id};
}

Ciphertext hom_scale(const PublicKey& pk, const Ciphertext& c, const BigInt& k) {
  check_same_key(c, pk.key_id);
  if (k < 0 || k >= pk.N) throw RangeError("hom_scale: scalar outside [0, N)");
  return {powm(c.value, k, pk.cipher_modulus), pk.key_id};
}

Ciphertext hom_affine(const PublicKey& pk, const Ciphertext& c, const BigInt& u, const BigInt& r,
                      Rng& rng) {
  return hom_add(pk, hom_scale(pk, c, u), encrypt(pk, r, rng));
}

std::vector<BigInt> ModulusChain::moduli() const {
  std::vector<BigInt> out;
  out.reserve(keys.size());
  for (const auto& k : keys) out.push_back(k.pk.N);
  return out;
}

namespace {

// Smallest lower interval end; keeps enough semiprimes in [L, 2L).
const BigInt kMinChainModulus = 256;

}  // namespace

ModulusChain build_modulus_chain(int n, const BigInt& B, int d, int bit_slack, Rng& rng) {
  if (n < 3) throw ParameterError("build_modulus_chain: n must be >= 3");
  if (B < 1) throw ParameterError("build_modulus_chain: B must be >= 1");
  if (d < 1) throw ParameterError("build_modulus_chain: d must be >= 1");
  if (bit_slack < 0) throw ParameterError("build_modulus_chain: bit_slack must be >= 0");
  const BigInt unit = BigInt(d) * B * B;
  ModulusChain chain{{}, B, d};
  BigInt lo = std::max({BigInt(BigInt(n - 1) * unit + 1), BigInt(3 * unit), kMinChainModulus});
  lo <<= bit_slack;
  for (int i = 2; i <= n; ++i) {
    if (i > 2) lo = 2 * lo + BigInt(n - i + 1) * unit + 1;
    chain.keys.push_back(paillier_keygen(16, rng, Interval{lo, 2 * lo}));
  }
  return chain;
}

ModulusChain build_group_chain(int count, const BigInt& B, int d, int group_size, int bit_slack,
                               Rng& rng) {
  if (count < 1) throw ParameterError("build_group_chain: count must be >= 1");
  if (group_size < 2) throw ParameterError("build_group_chain: group_size must be >= 2");
  if (B < 1 || d < 1 || bit_slack < 0) throw ParameterError("build_group_chain: bad bounds");
  const BigInt unit = BigInt(d) * B * B;
  const BigInt gap = BigInt(group_size - 1) * unit + 1;
  ModulusChain chain{{}, B, d};
  BigInt lo = std::max(gap, kMinChainModulus) << bit_slack;
  for (int i = 0; i < count; ++i) {
    if (i > 0) lo = 2 * lo + gap;
    chain.keys.push_back(paillier_keygen(16, rng, Interval{lo, 2 * lo}));
  }
  return chain;
}

bool chain_hypothesis_holds(std::span<const BigInt> ring_moduli, const BigInt& unit) {
  const std::size_t g = ring_moduli.size();
  if (g == 0) return false;
  if (!(BigInt(static_cast<unsigned long>(g)) * unit < ring_moduli[0])) return false;
  for (std::size_t t = 1; t < g; ++t) {
    BigInt need = ring_moduli[t - 1] + BigInt(static_cast<unsigned long>(g - t)) * unit;
    if (!(need < ring_moduli[t])) return false;
  }
  return true;
}

nlohmann::json key_to_json(const PublicKey& pk, const SecretKey* sk) {
  nlohmann::json j;
  j["key_id"] = pk.key_id;
  j["scheme"] = std::string(scheme_name(pk.scheme));
  j["n_bits"] = pk.n_bits;
  j["N"] = to_hex(pk.N);
  j["public"] = {{"g", to_hex(pk.generator)}, {"modulus", to_hex(pk.cipher_modulus)}};
  if (sk != nullptr) {
    if (sk->key_id != pk.key_id) throw KeyMismatchError("key_to_json: key pair mismatch");
    j["secret"] = {{"p", to_hex(sk->p)}, {"q", to_hex(sk->q)}};
  }
  return j;
}

PublicKey public_key_from_json(const nlohmann::json& j) {
  try {
    PublicKey pk;
    pk.key_id = j.at("key_id").get<std::string>();
    pk.scheme = scheme_from_name(j.at("scheme").get<std::string>());
    pk.n_bits = j.at("n_bits").get<std::size_t>();
    pk.N = from_hex(j.at("N").get<std::string>());
    pk.generator = from_hex(j.at("public").at("g").get<std::string>());
    pk.cipher_modulus = from_hex(j.at("public").at("modulus").get<std::string>());
    std::string expect = make_key_id(pk.scheme, pk.N, pk.generator, pk.cipher_modulus);
    if (expect != pk.key_id) throw FormatError("key_id does not match key material");
    return pk;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed key document: ") + e.what());
  }
}

KeyPair key_from_json(const nlohmann::json& j) {
  KeyPair kp;
  kp.pk = public_key_from_json(j);
  if (!j.contains("secret")) return kp;
  try {
    BigInt p = from_hex(j.at("secret").at("p").get<std::string>());
    BigInt q = from_hex(j.at("secret").at("q").get<std::string>());
    if (kp.pk.scheme == Scheme::paillier_like) {
      KeyPair full = paillier_from_primes(p, q);
      if (full.pk.key_id != kp.pk.key_id) throw FormatError("secret material does not match key");
      return full;
    }
    if (p * q != kp.pk.cipher_modulus || (p - 1) % kp.pk.N != 0) {
      throw FormatError("secret material does not match key");
    }
    kp.sk.key_id = kp.pk.key_id;
    kp.sk.scheme = Scheme::shared_modulus;
    kp.sk.N = kp.pk.N;
    kp.sk.p = p;
    kp.sk.q = q;
    kp.sk.trapdoor = shared_trapdoor(kp.pk.N, p, kp.pk.generator);
    return kp;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed key document: ") + e.what());
  }
}

}  // namespace dsmm
