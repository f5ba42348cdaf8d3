#pragma once

// Distributed dot products.
//
//  * MPWP / P-MPWP: weighted sum sum_{i>=2} u_i v_i with additive re-masking
//    shares (matrix circulation vs. point-to-point shares).
//  * DSDP: linear ring protocol, P_1 holds U, P_i holds v_i.
//  * ESDP: DSDP run by a master over others, without the master's own term.
//
// Ring sessions are reactive (net_sim Session) so many of them can share one
// network and run concurrently.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dsmm/bigint.hpp"
#include "dsmm/dlog_group.hpp"
#include "dsmm/hom_cipher.hpp"
#include "dsmm/net_sim.hpp"
#include "dsmm/trust_algebra.hpp"

namespace dsmm {

enum class CipherMode { shared_modulus, paillier_chain };

std::string_view mode_name(CipherMode m);
CipherMode mode_from_name(std::string_view name);

struct DotProductInstance {
  int n = 3;
  std::vector<BigInt> U;  // U[0] = u_1 ... U[n-1] = u_n, held by P_1
  std::vector<BigInt> V;  // V[i-1] held by P_i
  BigInt B = 1;
  CipherMode mode = CipherMode::shared_modulus;
  bool proofs_enabled = false;
  bool signatures_enabled = false;

  // Sizes and the input bound 0 <= u_i, v_i <= B.
  void validate() const;
  BigInt plain_dot() const;           // sum over i = 1..n
  BigInt plain_weighted_sum() const;  // sum over i = 2..n
};

// Inputs drawn from `seed`: u_i in [min_u, B], v_i in [0, B].
DotProductInstance random_instance(int n, const BigInt& B, CipherMode mode, std::uint64_t seed,
                                   const BigInt& min_u = 0);

// Reason recorded when a run ends without any failed check, e.g. because an
// adversary swallowed the final message.
inline constexpr std::string_view kStalledReason = "protocol stalled before completion";

struct AbortInfo {
  PlayerId player;
  std::string step;
  std::string reason;
};

// Instrumentation of one ring run (ring positions 1..m stand for P_2..P_n).
struct DotTrace {
  std::vector<BigInt> u;       // coefficients used by the master
  std::vector<BigInt> r;       // masks
  std::vector<BigInt> deltas;  // decrypted running sums
  std::vector<BigInt> unwind;  // S_{m+1}, S_m, ..., S_1 (chain mode)
  BigInt gamma_plain;          // D_master(gamma)
};

struct DotResult {
  BigInt S;
  Metrics metrics;
  std::optional<AbortInfo> abort;
  DotTrace trace;

  bool aborted() const { return abort.has_value(); }
};

// ---------------------------------------------------------------------------
// Proof of a non-trivial affine transform

struct AffineProofBundle {
  Ciphertext alpha;
  BigInt mu;   // g^u
  BigInt rho;  // g^r
};

struct ChainedCheckState {
  BigInt delta_prev;  // g^{Delta_{i-1}}
};

struct AffineCheck {
  bool accepted = false;
  ChainedCheckState next;  // g^{Delta_i}
};

AffineProofBundle make_affine_proof(const BigInt& u, const BigInt& r, const Ciphertext& v_cipher,
                                    const PublicKey& pk, const DlogGroup& group, Rng& rng);

// Accepts iff mu, rho are not in {1, g} and g^{Delta + k N} = mu^v rho delta_prev
// for some 0 <= k <= max_wrap. N = 0 disables the wrap allowance.
AffineCheck verify_affine_step(const BigInt& mu, const BigInt& rho, const BigInt& v,
                               const BigInt& delta, const std::optional<ChainedCheckState>& chained,
                               const DlogGroup& group, const BigInt& wrap_modulus = 0,
                               long max_wrap = 0);
AffineCheck verify_affine_step(const AffineProofBundle& bundle, const BigInt& v,
                               const BigInt& delta, const std::optional<ChainedCheckState>& chained,
                               const DlogGroup& group, const BigInt& wrap_modulus = 0,
                               long max_wrap = 0);

// ---------------------------------------------------------------------------
// Ring sessions

// Plaintext algebra of a ring session.
struct IntegerAlgebra {
  using Plain = BigInt;
  using Cipher = Ciphertext;
};
struct TrustAlgebra {
  using Plain = TrustPair;
  using Cipher = TrustCipherPair;
};

template <class Algebra>
struct RingConfig {
  using Plain = typename Algebra::Plain;

  std::string id;  // session id, no '/'
  PlayerId master;
  std::vector<PlayerId> ring;  // in ring order; chain mode needs increasing moduli
  std::vector<Plain> u;        // master's coefficients, one per ring member
  std::vector<Plain> v;        // private values of the ring members
  // Added (integer) or parallel-aggregated (trust) by the master at the end.
  std::optional<Plain> master_term;
  CipherMode mode = CipherMode::shared_modulus;
  bool proofs = false;
  bool signatures = false;
};

template <class Algebra>
class RingSession final : public Session {
 public:
  using Plain = typename Algebra::Plain;
  using Cipher = typename Algebra::Cipher;

  explicit RingSession(RingConfig<Algebra> config);
  ~RingSession() override;

  const std::string& id() const override { return config_.id; }
  void start(Network& net) override;
  void on_message(Network& net, const Message& msg) override;

  bool done() const { return result_.has_value(); }
  const std::optional<Plain>& result() const { return result_; }
  const std::optional<AbortInfo>& abort() const { return abort_; }
  const DotTrace& trace() const { return trace_; }
  const RingConfig<Algebra>& config() const { return config_; }

 private:
  struct Member;
  void fail(PlayerId who, std::string step, std::string reason);
  bool check_signature(Network& net, const Message& msg, const std::string& step);
  void master_on_c(Network& net, const Message& msg);
  void master_on_gamma(Network& net, const Message& msg);
  void member_on_message(Network& net, std::size_t pos, const Message& msg);
  void member_try_advance(Network& net, std::size_t pos);
  void post(Network& net, PlayerId from, PlayerId to, const std::string& step, std::size_t idx,
            std::string payload);

  RingConfig<Algebra> config_;
  std::vector<Member> members_;
  std::vector<std::optional<Cipher>> c_in_;
  std::size_t c_received_ = 0;
  std::vector<Plain> masks_;
  std::optional<Plain> result_;
  std::optional<AbortInfo> abort_;
  DotTrace trace_;
};

using DotSession = RingSession<IntegerAlgebra>;
using TrustDotSession = RingSession<TrustAlgebra>;

extern template class RingSession<IntegerAlgebra>;
extern template class RingSession<TrustAlgebra>;

// ---------------------------------------------------------------------------
// Network setup and protocol drivers

// Smallest power of two above (n-1) * d * B^2 (at least 2^8).
BigInt shared_plain_modulus(int n, const BigInt& B, int d = 1);
// Key size used for shared-modulus keys over Z_M.
std::size_t shared_key_bits(const BigInt& M);

// Network with keys matching the instance: shared-modulus keys over
// shared_plain_modulus, or a modulus chain for P_2..P_n plus a master key.
Network make_dot_network(const DotProductInstance& inst, std::uint64_t seed);

DotResult run_dsdp(const DotProductInstance& inst, Network& net);

struct EsdpOptions {
  CipherMode mode = CipherMode::shared_modulus;
  bool proofs = false;
  bool signatures = false;
};
// Dot product of U with the values V of `others`, computed for `master`.
DotResult run_esdp(Network& net, PlayerId master, const std::vector<PlayerId>& others,
                   const std::vector<BigInt>& U, const std::vector<BigInt>& V,
                   const EsdpOptions& options = {});

// Shared-modulus MPWP: returns sum_{i=2}^n u_i v_i.
DotResult run_mpwp(const DotProductInstance& inst, Network& net);
// Network of shared-modulus keys for MPWP.
Network make_mpwp_network(const DotProductInstance& inst, std::uint64_t seed);

// Throws ParameterError unless N_1 > (n-1)(B^2+B) and N_i > (n-1)B.
void check_pmpwp_moduli(int n, const BigInt& B, const std::vector<BigInt>& moduli);
// P-MPWP over independent Paillier keys; the masks z_i are drawn in [0, z_bound]
// (default B).
DotResult run_pmpwp(const DotProductInstance& inst, Network& net,
                    const std::optional<BigInt>& z_bound = std::nullopt);
Network make_pmpwp_network(const DotProductInstance& inst, std::uint64_t seed,
                           std::size_t key_bits = 128);

}  // namespace dsmm
