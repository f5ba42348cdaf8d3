#pragma once

// (trust, distrust) pairs over D = Z_N.
//
//   sequential  <a,b> * <c,d> = <ac+bd, ad+bc>     neutral <1,0>
//   parallel    <a,b> + <c,d> = <a+c-ac, bd>       neutral <0,1>
//
// A pair is invertible for the parallel law iff b is a unit and (a = 0 or
// a-1 is a unit).

#include <optional>
#include <string>

#include <json.hpp>

#include "dsmm/bigint.hpp"
#include "dsmm/hom_cipher.hpp"

namespace dsmm {

class TrustPair {
 public:
  TrustPair(BigInt a, BigInt b, BigInt ring);

  const BigInt& a() const { return a_; }
  const BigInt& b() const { return b_; }
  const BigInt& ring() const { return ring_; }

  static TrustPair seq_neutral(const BigInt& ring) { return {1, 0, ring}; }
  static TrustPair par_neutral(const BigInt& ring) { return {0, 1, ring}; }

  friend bool operator==(const TrustPair&, const TrustPair&) = default;

 private:
  BigInt a_;
  BigInt b_;
  BigInt ring_;
};

std::string to_string(const TrustPair& x);  // "⟨a,b⟩" with hex residues

TrustPair seq_agg(const TrustPair& x, const TrustPair& y);
TrustPair par_agg(const TrustPair& x, const TrustPair& y);
bool par_invertible(const TrustPair& x);
std::optional<TrustPair> par_invert(const TrustPair& x);

struct TrustCipherPair {
  Ciphertext ea;
  Ciphertext eb;
};

TrustCipherPair encrypt_pair(const PublicKey& pk, const TrustPair& x, Rng& rng);
TrustPair decrypt_pair(const SecretKey& sk, const TrustCipherPair& c);
// E(x) * y with y in clear: <E(a)^c E(b)^d, E(a)^d E(b)^c>.
TrustCipherPair hom_seq_agg(const PublicKey& pk, const TrustCipherPair& ex, const TrustPair& y);
// E(x) + y with y in clear: <E(a) E(c) E(a)^{-c}, E(b)^d>.
TrustCipherPair hom_par_agg(const PublicKey& pk, const TrustCipherPair& ex, const TrustPair& y,
                            Rng& rng);

// Fixed-precision encoding of trust proportions: step 2^-p, n aggregated
// factors, ring modulus N with 2^{n(2p+1)} < N.
struct PrecisionParams {
  int p = 1;
  int n = 1;
  BigInt N;

  void validate() const;
};

BigInt encode_trust(double x, const PrecisionParams& params);
// Balanced lift of v to [-N/2, N/2) divided by 2^{p * scale_exponent}.
double decode_trust(const BigInt& v, const PrecisionParams& params, int scale_exponent);
// 2^{n(2p+1)}
BigInt coefficient_bound(int p, int n);
BigInt balanced_lift(const BigInt& v, const BigInt& N);

nlohmann::json pair_to_json(const TrustPair& x);
TrustPair pair_from_json(const nlohmann::json& j, const BigInt& ring);

}  // namespace dsmm
