#pragma once

// Parallel matrix product: every coefficient C_ij is cut into blocks of two
// or three external dot products that all run concurrently, so the whole
// product finishes in at most five rounds. Also the wiretap repetition of a
// dot product over random ring orders.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dsmm/bigint.hpp"
#include "dsmm/dot_protocols.hpp"
#include "dsmm/net_sim.hpp"
#include "dsmm/trust_algebra.hpp"

namespace dsmm {

struct BlockPartition {
  int n = 0;
  int owner = 0;
  std::optional<std::array<int, 3>> triple;  // present iff n is even
  std::vector<std::array<int, 2>> pairs;

  // All blocks, triple first, as 1-based player indices.
  std::vector<std::vector<int>> blocks() const;
};

BlockPartition partition_blocks(int n, int i);

using Matrix = std::vector<std::vector<BigInt>>;
using TrustMatrix = std::vector<std::vector<TrustPair>>;

Matrix plain_matmul(const Matrix& A, const Matrix& B);
// C_ij = parallel aggregate over k != i of A_ik * B_kj (sequential law).
TrustMatrix plain_trust_matmul(const TrustMatrix& A, const TrustMatrix& B);

struct MatmulOptions {
  CipherMode mode = CipherMode::shared_modulus;
  bool proofs = false;
  bool signatures = false;
};

struct MatmulAbort {
  int row = 0;
  int col = 0;
  int block = 0;
  AbortInfo info;
};

struct MatmulResult {
  Matrix C;
  Metrics metrics;
  std::optional<MatmulAbort> abort;
};

struct TrustMatmulResult {
  TrustMatrix C;
  Metrics metrics;
  std::optional<MatmulAbort> abort;
};

// Keys for PDSMM: shared-modulus keys over shared_plain_modulus(n, B, d), or
// group-chain ring keys plus per-player master keys.
Network make_pdsmm_network(int n, const BigInt& B, CipherMode mode, std::uint64_t seed, int d = 1);

MatmulResult run_pdsmm(const Matrix& A, const Matrix& B, const BigInt& bound, Network& net,
                       const MatmulOptions& options = {});

// Trust matrices over Z_M; the network must hold shared-modulus keys over M.
Network make_trust_network(int n, const BigInt& M, std::uint64_t seed);
// Plaintext ring for trust products of n players at precision p.
BigInt trust_plain_modulus(int n, int p);
TrustMatmulResult run_pdsmm_trust(const TrustMatrix& A, const TrustMatrix& B, Network& net);

// ---------------------------------------------------------------------------
// Ring orders and wiretap repetition

struct RingOrder {
  int occurrence = 1;
  std::vector<int> order;  // permutation of 2..n
};

// names/nonces are indexed by player (names[0] is P_1, which stays first).
RingOrder random_ring_order(const std::vector<std::string>& names, const std::string& date,
                            const std::vector<std::string>& nonces, int occurrence);

struct RingSeedMaterial {
  std::vector<std::string> names;
  std::string date;
  std::vector<std::string> nonces;
};
// Names "P1".."Pn", a fixed date and nonces derived from `seed`.
RingSeedMaterial default_ring_seed(int n, std::uint64_t seed);

// Occurrence coefficients of one value v: index 0 carries the masked value,
// indices 1..d-1 the lambdas.
//   chain:  v + sum (B - lambda),  lambda in [0, B)
//   shared: v - sum lambda mod M
std::vector<BigInt> wiretap_split(const BigInt& v, const BigInt& B,
                                  const std::vector<BigInt>& lambdas, CipherMode mode,
                                  const BigInt& M = 0);
// P_1's recovery from the occurrence sums (ring part only, without u_1 v_1).
BigInt wiretap_recover(const std::vector<BigInt>& occurrence_sums, int d, const BigInt& B,
                       const BigInt& sum_u, CipherMode mode, const BigInt& M = 0);

struct WiretapResult {
  BigInt S;
  Metrics metrics;
  std::optional<AbortInfo> abort;
  std::vector<RingOrder> orders;
  std::vector<BigInt> occurrence_sums;
};

// Keys for wiretap repetition with factor d.
Network make_wiretap_network(const DotProductInstance& inst, int d, std::uint64_t seed);

WiretapResult run_wiretap(const DotProductInstance& inst, int d, Network& net,
                          const std::optional<RingSeedMaterial>& seed_material = std::nullopt);

// 2 ln(min{k-1, n-k, (n-1)/2}) (1 + (k-1)/(n-k-1)), n odd, 2 <= k <= n-2.
double avg_bound_thm4(int n, int k);
// n ln(1/eps), 0 < eps < 1.
double worst_bound_prop1(int n, double eps);

}  // namespace dsmm
