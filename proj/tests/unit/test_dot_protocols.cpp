#include <doctest.h>

#include "dsmm/dot_protocols.hpp"
#include "dsmm/error.hpp"

using namespace dsmm;

namespace {

DotProductInstance make_inst(std::vector<long> U, std::vector<long> V, long B, CipherMode mode) {
  DotProductInstance inst;
  inst.n = static_cast<int>(U.size());
  for (long u : U) inst.U.emplace_back(u);
  for (long v : V) inst.V.emplace_back(v);
  inst.B = B;
  inst.mode = mode;
  return inst;
}

BigInt oracle_dot(const DotProductInstance& inst, int from = 0) {
  BigInt s = 0;
  for (int i = from; i < inst.n; ++i) s += inst.U[i] * inst.V[i];
  return s;
}

const CipherMode kModes[] = {CipherMode::shared_modulus, CipherMode::paillier_chain};

}  // namespace

TEST_CASE("mode names") {
  CHECK(mode_from_name("shared") == CipherMode::shared_modulus);
  CHECK(mode_from_name("chain") == CipherMode::paillier_chain);
  CHECK(mode_from_name(mode_name(CipherMode::paillier_chain)) == CipherMode::paillier_chain);
  CHECK_THROWS(mode_from_name("rot13"));
}

TEST_CASE("instance validation") {
  CHECK_THROWS_AS(make_inst({1, 2}, {1, 2}, 5, CipherMode::shared_modulus).validate(),
                  ParameterError);
  CHECK_THROWS_AS(make_inst({1, 2, 9}, {1, 2, 3}, 5, CipherMode::shared_modulus).validate(),
                  ParameterError);
  auto inst = random_instance(6, 50, CipherMode::shared_modulus, 3, 2);
  inst.validate();
  for (const auto& u : inst.U) CHECK(u >= 2);
}

TEST_CASE("dsdp examples") {
  for (CipherMode mode : kModes) {
    CAPTURE(mode_name(mode));
    auto inst = make_inst({2, 3, 4}, {5, 6, 7}, 10, mode);
    Network net = make_dot_network(inst, 1);
    DotResult r = run_dsdp(inst, net);
    REQUIRE_FALSE(r.aborted());
    CHECK(r.S == 56);
    CHECK(r.metrics.message_count == 6);
    CHECK(r.metrics.round_count == 4);

    auto zero = make_inst({0, 0, 0}, {9, 8, 7}, 10, mode);
    Network net0 = make_dot_network(zero, 2);
    CHECK(run_dsdp(zero, net0).S == 0);
  }
}

TEST_CASE("dsdp message and round counts") {
  for (int n = 3; n <= 9; ++n) {
    auto inst = random_instance(n, 100, CipherMode::shared_modulus, n);
    Network net = make_dot_network(inst, n);
    DotResult r = run_dsdp(inst, net);
    CHECK(r.metrics.message_count == static_cast<std::size_t>(3 * n - 3));
    CHECK(r.metrics.round_count == n + 1);
  }
}

TEST_CASE("dsdp matches the integer dot product") {
  const BigInt bounds[] = {1, 10, 256, 65536};
  std::uint64_t seed = 100;
  for (CipherMode mode : kModes) {
    for (const BigInt& B : bounds) {
      for (int t = 0; t < 6; ++t, ++seed) {
        const int n = 3 + static_cast<int>(seed % 10);
        auto inst = random_instance(n, B, mode, seed);
        Network net = make_dot_network(inst, seed);
        DotResult r = run_dsdp(inst, net);
        REQUIRE_FALSE(r.aborted());
        CHECK(r.S == oracle_dot(inst));
      }
    }
  }
}

TEST_CASE("chain unwind follows the running sums") {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const int n = 3 + static_cast<int>(seed % 5);
    auto inst = random_instance(n, 1000, CipherMode::paillier_chain, seed);
    Network net = make_dot_network(inst, seed);
    DotResult r = run_dsdp(inst, net);
    REQUIRE_FALSE(r.aborted());
    const std::size_t m = n - 1;
    // Running sums recomputed from the masks and the ring moduli.
    std::vector<BigInt> delta(m + 1, 0);
    for (std::size_t j = 1; j <= m; ++j) {
      const BigInt& Nj = net.keys(PlayerId{static_cast<int>(j) + 1}).ring.pk.N;
      delta[j] = mod(delta[j - 1] + r.trace.u[j - 1] * inst.V[j] + r.trace.r[j - 1], Nj);
      CHECK(r.trace.deltas[j - 1] == delta[j]);
    }
    REQUIRE(r.trace.unwind.size() == m + 1);
    CHECK(r.trace.unwind[0] == delta[m]);
    for (std::size_t k = 1; k <= m; ++k) {
      // After removing masks m, ..., m-k+1: Delta_{m-k} + sum_{j>m-k} u_j v_j.
      BigInt tail = 0;
      for (std::size_t j = m - k + 1; j <= m; ++j) tail += inst.U[j] * inst.V[j];
      CHECK(r.trace.unwind[k] == delta[m - k] + tail);
    }
  }
}

TEST_CASE("dsdp rejects violated hypotheses") {
  auto inst = random_instance(5, 100, CipherMode::shared_modulus, 1);
  DotProductInstance small = inst;
  small.B = 100;
  Rng rng(1);
  Network net = create_network(5, make_shared_directory(5, 1024, 128, rng), 1);
  CHECK_THROWS_AS(run_dsdp(small, net), ParameterError);

  ModulusChain bad;
  bad.keys = {paillier_from_primes(17, 23), paillier_from_primes(19, 23)};
  bad.B = 10;
  Network cnet = create_network(3, chain_directory_from(bad, rng), 1);
  auto ci = make_inst({1, 2, 3}, {1, 2, 3}, 10, CipherMode::paillier_chain);
  CHECK_THROWS_AS(run_dsdp(ci, cnet), ParameterError);
}

TEST_CASE("undersized chain admits a wrong result") {
  // 437 < 391 + 100 breaks the second link for B = 10.
  ModulusChain bad;
  bad.keys = {paillier_from_primes(17, 23), paillier_from_primes(19, 23)};
  bad.B = 10;
  bool witness = false;
  for (std::uint64_t seed = 1; seed < 200 && !witness; ++seed) {
    Rng rng(seed);
    Network net = create_network(3, chain_directory_from(bad, rng), seed);
    auto inst = random_instance(3, 10, CipherMode::paillier_chain, seed);
    RingConfig<IntegerAlgebra> cfg;
    cfg.id = "probe";
    cfg.master = PlayerId{1};
    cfg.ring = {PlayerId{2}, PlayerId{3}};
    cfg.u = {inst.U[1], inst.U[2]};
    cfg.v = {inst.V[1], inst.V[2]};
    cfg.mode = CipherMode::paillier_chain;
    DotSession s(cfg);
    Session* list[] = {&s};
    run_sessions(net, list);
    REQUIRE(s.result());
    witness = *s.result() != oracle_dot(inst, 1);
  }
  CHECK(witness);
}

TEST_CASE("affine proofs") {
  const DlogGroup& g = default_group();
  Rng rng(4);
  KeyPair kp = paillier_keygen(96, rng);
  Ciphertext cv = encrypt(kp.pk, 4, rng);

  AffineProofBundle ok = make_affine_proof(3, 5, cv, kp.pk, g, rng);
  CHECK(decrypt(kp.sk, ok.alpha) == 17);
  CHECK(ok.mu == g.exp(3));
  CHECK(ok.rho == g.exp(5));
  AffineCheck c = verify_affine_step(ok, 4, 17, std::nullopt, g);
  CHECK(c.accepted);
  CHECK(c.next.delta_prev == g.exp(17));

  CHECK_FALSE(verify_affine_step(make_affine_proof(0, 5, cv, kp.pk, g, rng), 4, 5, std::nullopt, g)
                  .accepted);
  CHECK_FALSE(verify_affine_step(make_affine_proof(1, 5, cv, kp.pk, g, rng), 4, 9, std::nullopt, g)
                  .accepted);
  CHECK_FALSE(verify_affine_step(make_affine_proof(3, 1, cv, kp.pk, g, rng), 4, 13, std::nullopt, g)
                  .accepted);

  // Chained step: Delta_3 = Delta_2 + u v + r.
  AffineProofBundle next = make_affine_proof(6, 7, cv, kp.pk, g, rng);
  CHECK(verify_affine_step(next, 4, 17 + 24 + 7, c.next, g).accepted);
  CHECK_FALSE(verify_affine_step(next, 4, 17 + 24 + 7, ChainedCheckState{1}, g).accepted);
  // Substituted alpha: the decrypted value no longer matches mu^v rho.
  CHECK_FALSE(verify_affine_step(ok, 4, 0, std::nullopt, g).accepted);
  // Wrap allowance for a reduction modulo N.
  CHECK(verify_affine_step(ok, 4, 17 - 11, std::nullopt, g, 11, 2).accepted);
  CHECK_FALSE(verify_affine_step(ok, 4, 17 - 11, std::nullopt, g).accepted);
}

TEST_CASE("honest runs with proofs and signatures") {
  for (CipherMode mode : kModes) {
    for (int n = 3; n <= 6; ++n) {
      auto inst = random_instance(n, 100, mode, 40 + n, 2);
      inst.proofs_enabled = true;
      inst.signatures_enabled = true;
      Network net = make_dot_network(inst, 40 + n);
      DotResult r = run_dsdp(inst, net);
      CHECK_FALSE(r.aborted());
      CHECK(r.S == oracle_dot(inst));
      CHECK(r.metrics.message_count == static_cast<std::size_t>(3 * n - 3));
    }
  }
}

TEST_CASE("proofs reject u in {0, 1} by design") {
  auto inst = make_inst({5, 1, 4}, {5, 6, 7}, 10, CipherMode::shared_modulus);
  inst.proofs_enabled = true;
  Network net = make_dot_network(inst, 3);
  DotResult r = run_dsdp(inst, net);
  REQUIRE(r.aborted());
  CHECK(r.abort->player == PlayerId{2});
}

TEST_CASE("esdp") {
  Rng rng(5);
  Network net = create_network(3, make_shared_directory(3, 1 << 12, 128, rng, 1 << 12), 5);
  DotResult r = run_esdp(net, PlayerId{1}, {PlayerId{2}, PlayerId{3}}, {3, 4}, {5, 6});
  CHECK(r.S == 39);
  CHECK(r.metrics.round_count == 4);

  Network net0 = create_network(3, make_shared_directory(3, 1 << 12, 128, rng, 1 << 12), 6);
  CHECK(run_esdp(net0, PlayerId{1}, {PlayerId{2}, PlayerId{3}}, {0, 0}, {5, 6}).S == 0);

  Network net3 = create_network(4, make_shared_directory(4, 1 << 12, 128, rng, 1 << 12), 7);
  DotResult r3 =
      run_esdp(net3, PlayerId{1}, {PlayerId{2}, PlayerId{3}, PlayerId{4}}, {1, 2, 3}, {4, 5, 6});
  CHECK(r3.S == 32);
  CHECK(r3.metrics.round_count == 5);
  CHECK_THROWS_AS(run_esdp(net3, PlayerId{1}, {PlayerId{2}}, {1, 2}, {3}), ParameterError);
}

TEST_CASE("mpwp") {
  auto inst = make_inst({0, 2, 3}, {0, 4, 5}, 10, CipherMode::shared_modulus);
  Network net = make_mpwp_network(inst, 1);
  DotResult r = run_mpwp(inst, net);
  REQUIRE_FALSE(r.aborted());
  CHECK(r.S == 23);

  auto zero = make_inst({1, 5, 6, 7}, {1, 0, 0, 0}, 10, CipherMode::shared_modulus);
  Network n0 = make_mpwp_network(zero, 2);
  CHECK(run_mpwp(zero, n0).S == 0);

  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto ri = random_instance(3 + static_cast<int>(seed % 6), 300, CipherMode::shared_modulus, seed);
    Network rn = make_mpwp_network(ri, seed);
    CHECK(run_mpwp(ri, rn).S == ri.plain_weighted_sum());
  }
}

TEST_CASE("mpwp volume grows cubically") {
  std::vector<double> bytes;
  for (int n : {4, 8, 16}) {
    auto inst = random_instance(n, 100, CipherMode::shared_modulus, 1);
    Network net = make_mpwp_network(inst, 1);
    bytes.push_back(static_cast<double>(run_mpwp(inst, net).metrics.total_bytes));
  }
  // Doubling n multiplies the volume by roughly 8.
  CHECK(bytes[1] / bytes[0] > 6);
  CHECK(bytes[2] / bytes[1] > 6);
}

TEST_CASE("pmpwp") {
  auto inst = make_inst({0, 1, 2, 3}, {0, 4, 5, 6}, 10, CipherMode::shared_modulus);
  Network net = make_pmpwp_network(inst, 1);
  DotResult r = run_pmpwp(inst, net);
  REQUIRE_FALSE(r.aborted());
  CHECK(r.S == 32);
  CHECK(r.metrics.phases.at("share").messages == 6);

  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto ri = random_instance(3 + static_cast<int>(seed % 8), 1000, CipherMode::shared_modulus, seed);
    Network rn = make_pmpwp_network(ri, seed);
    CHECK(run_pmpwp(ri, rn).S == ri.plain_weighted_sum());
  }
}

TEST_CASE("pmpwp modulus requirements are strict") {
  const int n = 4;
  const BigInt B = 10;
  const BigInt n1 = (n - 1) * (B * B + B);
  CHECK_NOTHROW(check_pmpwp_moduli(n, B, {n1 + 1, 31, 31, 31}));
  CHECK_THROWS_AS(check_pmpwp_moduli(n, B, {n1, 31, 31, 31}), ParameterError);
  CHECK_THROWS_AS(check_pmpwp_moduli(n, B, {n1 + 1, 30, 31, 31}), ParameterError);
}
