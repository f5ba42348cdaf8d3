#include "dsmm/matmul_protocols.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <set>

#include "dsmm/error.hpp"

namespace dsmm {

namespace {

int cyc(int x, int n) { return ((x - 1) % n + n) % n + 1; }

void check_square(const std::vector<std::vector<BigInt>>& M, int n, const char* what) {
  if (static_cast<int>(M.size()) != n) throw ParameterError(std::string(what) + " must be n x n");
  for (const auto& row : M) {
    if (static_cast<int>(row.size()) != n) {
      throw ParameterError(std::string(what) + " must be n x n");
    }
  }
}

std::string session_id(const char* kind, int i, int j, int b) {
  return std::string(kind) + ":" + std::to_string(i) + ":" + std::to_string(j) + ":" +
         std::to_string(b);
}

// Ring order inside a block: chain mode follows increasing ring moduli.
std::vector<PlayerId> ring_for_block(const std::vector<int>& block, const Network& net,
                                     CipherMode mode) {
  std::vector<PlayerId> ring;
  for (int k : block) ring.push_back(PlayerId{k});
  if (mode == CipherMode::paillier_chain) {
    std::stable_sort(ring.begin(), ring.end(), [&](PlayerId a, PlayerId b) {
      return net.keys(a).ring.pk.N < net.keys(b).ring.pk.N;
    });
  }
  return ring;
}

}  // namespace

std::vector<std::vector<int>> BlockPartition::blocks() const {
  std::vector<std::vector<int>> out;
  if (triple) out.push_back({(*triple)[0], (*triple)[1], (*triple)[2]});
  for (const auto& p : pairs) out.push_back({p[0], p[1]});
  return out;
}

BlockPartition partition_blocks(int n, int i) {
  if (n < 3) throw ParameterError("partition_blocks: n must be >= 3");
  if (i < 1 || i > n) throw ParameterError("partition_blocks: row owner outside 1..n");
  BlockPartition bp;
  bp.n = n;
  bp.owner = i;
  int t = (n - 1) / 2;
  if (n % 2 == 0) {
    // k_m = ((i - m - 1) mod n) + 1, listed as (k_3, k_2, k_1).
    bp.triple = std::array<int, 3>{cyc(i - 3, n), cyc(i - 2, n), cyc(i - 1, n)};
    t = (n - 4) / 2;
  }
  for (int h = 1; h <= t; ++h) bp.pairs.push_back({cyc(i + 2 * h - 1, n), cyc(i + 2 * h, n)});
  return bp;
}

Matrix plain_matmul(const Matrix& A, const Matrix& B) {
  const std::size_t n = A.size();
  Matrix C(n, std::vector<BigInt>(n, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t j = 0; j < n; ++j) C[i][j] += A[i][k] * B[k][j];
  return C;
}

TrustMatrix plain_trust_matmul(const TrustMatrix& A, const TrustMatrix& B) {
  const std::size_t n = A.size();
  TrustMatrix C;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<TrustPair> row;
    for (std::size_t j = 0; j < n; ++j) {
      TrustPair s = TrustPair::par_neutral(A[i][j].ring());
      for (std::size_t k = 0; k < n; ++k) {
        if (k == i) continue;
        s = par_agg(s, seq_agg(A[i][k], B[k][j]));
      }
      row.push_back(s);
    }
    C.push_back(std::move(row));
  }
  return C;
}

Network make_pdsmm_network(int n, const BigInt& B, CipherMode mode, std::uint64_t seed, int d) {
  Rng rng(derive_seed(seed, "keys"));
  const BigInt b = std::max(B, BigInt(1));
  KeyDirectory dir;
  if (mode == CipherMode::shared_modulus) {
    BigInt M = shared_plain_modulus(std::max(n, 4), b, d);
    dir = make_shared_directory(n, M, shared_key_bits(M), rng, M);
  } else {
    dir = make_group_chain_directory(n, b, d, 0, rng);
  }
  return create_network(n, std::move(dir), seed);
}

MatmulResult run_pdsmm(const Matrix& A, const Matrix& B, const BigInt& bound, Network& net,
                       const MatmulOptions& options) {
  const int n = static_cast<int>(A.size());
  if (n < 3) throw ParameterError("PDSMM needs n >= 3");
  check_square(A, n, "A");
  check_square(B, n, "B");
  if (net.size() != n) throw ConfigurationError("network size differs from n");
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (A[i][j] < 0 || A[i][j] > bound || B[i][j] < 0 || B[i][j] > bound) {
        throw ParameterError("matrix entry outside [0, B]");
      }
  const BigInt unit = bound * bound;
  struct Slot {
    int i, j, b;
    std::unique_ptr<DotSession> s;
  };
  std::vector<Slot> slots;
  for (int i = 1; i <= n; ++i) {
    const auto blocks = partition_blocks(n, i).blocks();
    for (int j = 1; j <= n; ++j) {
      for (std::size_t b = 0; b < blocks.size(); ++b) {
        RingConfig<IntegerAlgebra> cfg;
        cfg.id = session_id("pdsmm", i, j, static_cast<int>(b));
        cfg.master = PlayerId{i};
        cfg.ring = ring_for_block(blocks[b], net, options.mode);
        for (PlayerId k : cfg.ring) {
          cfg.u.push_back(A[i - 1][k.index - 1]);
          cfg.v.push_back(B[k.index - 1][j - 1]);
        }
        cfg.mode = options.mode;
        cfg.proofs = options.proofs;
        cfg.signatures = options.signatures;
        // Each block must decrypt exactly.
        if (options.mode == CipherMode::shared_modulus) {
          const BigInt& M = net.keys(cfg.master).master.pk.N;
          if (!(BigInt(static_cast<long>(cfg.ring.size())) * unit < M)) {
            throw ParameterError("shared modulus too small for a block");
          }
        } else {
          std::vector<BigInt> mod;
          for (PlayerId k : cfg.ring) mod.push_back(net.keys(k).ring.pk.N);
          if (!chain_hypothesis_holds(mod, unit)) {
            throw ParameterError("ring keys of a block violate the chain hypothesis");
          }
        }
        slots.push_back({i, j, static_cast<int>(b), std::make_unique<DotSession>(std::move(cfg))});
      }
    }
  }
  std::vector<Session*> list;
  for (auto& s : slots) list.push_back(s.s.get());
  run_sessions(net, list);

  MatmulResult out;
  out.metrics = net.metrics_snapshot();
  out.C.assign(n, std::vector<BigInt>(n, 0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out.C[i][j] = A[i][i] * B[i][j];
  for (auto& s : slots) {
    if (s.s->abort() || !s.s->result()) {
      if (!out.abort) {
        AbortInfo info = s.s->abort().value_or(AbortInfo{PlayerId{s.i}, "gamma", std::string(kStalledReason)});
        out.abort = MatmulAbort{s.i, s.j, s.b, info};
      }
      continue;
    }
    out.C[s.i - 1][s.j - 1] += *s.s->result();
  }
  return out;
}

BigInt trust_plain_modulus(int n, int p) {
  if (n < 1 || p < 1) throw ParameterError("trust_plain_modulus: n, p must be positive");
  return coefficient_bound(p, n) * 2;
}

Network make_trust_network(int n, const BigInt& M, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "keys"));
  return create_network(n, make_shared_directory(n, M, shared_key_bits(M), rng, M), seed);
}

TrustMatmulResult run_pdsmm_trust(const TrustMatrix& A, const TrustMatrix& B, Network& net) {
  const int n = static_cast<int>(A.size());
  if (n < 3) throw ParameterError("PDSMM needs n >= 3");
  if (net.size() != n) throw ConfigurationError("network size differs from n");
  const BigInt& M = net.keys(PlayerId{1}).master.pk.N;
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(A[i].size()) != n || static_cast<int>(B.size()) != n ||
        static_cast<int>(B[i].size()) != n) {
      throw ParameterError("trust matrices must be n x n");
    }
    for (int j = 0; j < n; ++j) {
      if (A[i][j].ring() != M || B[i][j].ring() != M) {
        throw ParameterError("trust entries must live in the key ring Z_M");
      }
    }
  }
  struct Slot {
    int i, j, b;
    std::unique_ptr<TrustDotSession> s;
  };
  std::vector<Slot> slots;
  for (int i = 1; i <= n; ++i) {
    const auto blocks = partition_blocks(n, i).blocks();
    for (int j = 1; j <= n; ++j) {
      for (std::size_t b = 0; b < blocks.size(); ++b) {
        RingConfig<TrustAlgebra> cfg;
        cfg.id = session_id("trust", i, j, static_cast<int>(b));
        cfg.master = PlayerId{i};
        for (int k : blocks[b]) {
          cfg.ring.push_back(PlayerId{k});
          cfg.u.push_back(A[i - 1][k - 1]);
          cfg.v.push_back(B[k - 1][j - 1]);
        }
        slots.push_back(
            {i, j, static_cast<int>(b), std::make_unique<TrustDotSession>(std::move(cfg))});
      }
    }
  }
  std::vector<Session*> list;
  for (auto& s : slots) list.push_back(s.s.get());
  run_sessions(net, list);

  TrustMatmulResult out;
  out.metrics = net.metrics_snapshot();
  // The diagonal term is left out: start from the parallel neutral.
  out.C.assign(n, std::vector<TrustPair>(n, TrustPair::par_neutral(M)));
  for (auto& s : slots) {
    if (s.s->abort() || !s.s->result()) {
      if (!out.abort) {
        AbortInfo info = s.s->abort().value_or(AbortInfo{PlayerId{s.i}, "gamma", std::string(kStalledReason)});
        out.abort = MatmulAbort{s.i, s.j, s.b, info};
      }
      continue;
    }
    auto& c = out.C[s.i - 1][s.j - 1];
    c = par_agg(c, *s.s->result());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Ring orders

RingOrder random_ring_order(const std::vector<std::string>& names, const std::string& date,
                            const std::vector<std::string>& nonces, int occurrence) {
  const std::size_t n = names.size();
  if (n < 1) throw ConfigurationError("ring order needs at least one player");
  if (nonces.size() != n) throw ConfigurationError("one nonce per player");
  std::vector<std::pair<std::string, std::string>> sorted;
  for (std::size_t i = 0; i < n; ++i) sorted.emplace_back(names[i], nonces[i]);
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 1; i < n; ++i) {
    if (sorted[i].first == sorted[i - 1].first) {
      throw ConfigurationError("duplicate distinguished name '" + sorted[i].first + "'");
    }
  }
  std::string material;
  for (const auto& s : sorted) material += s.first + '\n';
  material += '\0';
  material += date;
  material += '\0';
  for (const auto& s : sorted) material += s.second + '\n';
  material += '\0';
  material += std::to_string(occurrence);
  const Digest base = sha256(material);

  // Counter-mode expansion of the base digest into 64-bit words.
  std::uint64_t counter = 0;
  std::vector<std::uint64_t> pool;
  auto next_word = [&]() {
    if (pool.empty()) {
      std::string block(base.begin(), base.end());
      for (int b = 7; b >= 0; --b) block.push_back(static_cast<char>((counter >> (8 * b)) & 0xff));
      ++counter;
      Digest d = sha256(block);
      for (int w = 3; w >= 0; --w) {
        std::uint64_t x = 0;
        for (int b = 0; b < 8; ++b) x = (x << 8) | d[8 * w + b];
        pool.push_back(x);
      }
    }
    std::uint64_t x = pool.back();
    pool.pop_back();
    return x;
  };
  auto uniform = [&](std::uint64_t bound) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    for (;;) {
      std::uint64_t x = next_word();
      if (x < limit) return x % bound;
    }
  };

  RingOrder ro;
  ro.occurrence = occurrence;
  for (std::size_t k = 2; k <= n; ++k) ro.order.push_back(static_cast<int>(k));
  for (std::size_t k = ro.order.size(); k > 1; --k) {
    std::swap(ro.order[k - 1], ro.order[uniform(k)]);
  }
  return ro;
}

RingSeedMaterial default_ring_seed(int n, std::uint64_t seed) {
  RingSeedMaterial m;
  m.date = "1970-01-01";
  for (int i = 1; i <= n; ++i) {
    m.names.push_back("P" + std::to_string(i));
    m.nonces.push_back(to_hex(BigInt(std::to_string(derive_seed(seed, "nonce:" + std::to_string(i))))));
  }
  return m;
}

// ---------------------------------------------------------------------------
// Wiretap

std::vector<BigInt> wiretap_split(const BigInt& v, const BigInt& B,
                                  const std::vector<BigInt>& lambdas, CipherMode mode,
                                  const BigInt& M) {
  std::vector<BigInt> out{v};
  for (const auto& l : lambdas) {
    if (mode == CipherMode::paillier_chain) {
      if (l < 0 || l >= B) throw ParameterError("chain-mode lambda outside [0, B)");
      out[0] += B - l;
    } else {
      if (M < 2 || l < 0 || l >= M) throw ParameterError("shared-mode lambda outside Z_M");
      out[0] -= l;
    }
    out.push_back(l);
  }
  if (mode == CipherMode::shared_modulus) out[0] = mod(out[0], M);
  return out;
}

BigInt wiretap_recover(const std::vector<BigInt>& occurrence_sums, int d, const BigInt& B,
                       const BigInt& sum_u, CipherMode mode, const BigInt& M) {
  if (static_cast<int>(occurrence_sums.size()) != d) {
    throw ParameterError("one sum per occurrence");
  }
  BigInt s = 0;
  for (const auto& x : occurrence_sums) s += x;
  if (mode == CipherMode::paillier_chain) return s - BigInt(d - 1) * B * sum_u;
  return mod(s, M);
}

Network make_wiretap_network(const DotProductInstance& inst, int d, std::uint64_t seed) {
  if (d < 1) throw ParameterError("wiretap needs d >= 1");
  Rng rng(derive_seed(seed, "keys"));
  const BigInt b = std::max(inst.B, BigInt(1));
  KeyDirectory dir;
  if (inst.mode == CipherMode::shared_modulus) {
    BigInt M = shared_plain_modulus(std::max(inst.n, 4), b);
    dir = make_shared_directory(inst.n, M, shared_key_bits(M), rng, M);
  } else {
    dir = make_group_chain_directory(inst.n, b, d, 0, rng);
  }
  return create_network(inst.n, std::move(dir), seed);
}

WiretapResult run_wiretap(const DotProductInstance& inst, int d, Network& net,
                          const std::optional<RingSeedMaterial>& seed_material) {
  if (d < 1) throw ParameterError("wiretap needs d >= 1");
  inst.validate();
  const int n = inst.n;
  if (net.size() != n) throw ConfigurationError("network size differs from n");
  const RingSeedMaterial sm = seed_material.value_or(default_ring_seed(n, net.seed()));
  if (static_cast<int>(sm.names.size()) != n) throw ConfigurationError("one name per player");
  const PlayerId master{1};
  const BigInt& M = net.keys(master).master.pk.N;
  const bool chain = inst.mode == CipherMode::paillier_chain;
  const BigInt B = inst.B;
  if (chain && B < 1) throw ParameterError("chain-mode wiretap needs B >= 1");
  if (!chain) {
    for (int i = 1; i <= n; ++i) {
      const PublicKey& pk = net.keys(PlayerId{i}).ring.pk;
      if (pk.scheme != Scheme::shared_modulus || pk.N != M) {
        throw ParameterError("shared mode needs one common plaintext modulus");
      }
    }
    if (!(BigInt(n - 1) * B * B < M)) throw ParameterError("shared modulus must exceed (n-1)B^2");
  }

  // Every ring player masks its value with d-1 lambdas of its own.
  std::vector<std::vector<BigInt>> coeff(n + 1);
  for (int j = 2; j <= n; ++j) {
    Rng& rng = net.rng(PlayerId{j});
    std::vector<BigInt> lambdas;
    for (int o = 1; o < d; ++o) lambdas.push_back(chain ? rng.below(B) : rng.below(M));
    coeff[j] = wiretap_split(inst.V[j - 1], B, lambdas, inst.mode, M);
  }

  WiretapResult out;
  const BigInt unit = BigInt(d) * B * B;
  struct Slot {
    int occ;
    std::unique_ptr<DotSession> s;
  };
  std::vector<Slot> slots;
  for (int o = 1; o <= d; ++o) {
    RingOrder ro = random_ring_order(sm.names, sm.date, sm.nonces, o);
    out.orders.push_back(ro);
    // Position k of the ring (k = 2..n) is taken by player order[k-2].
    const auto blocks = partition_blocks(n, 1).blocks();
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      std::vector<int> members;
      for (int pos : blocks[b]) members.push_back(ro.order[pos - 2]);
      RingConfig<IntegerAlgebra> cfg;
      cfg.id = session_id("wiretap", o, 1, static_cast<int>(b));
      cfg.master = master;
      cfg.ring = ring_for_block(members, net, inst.mode);
      for (PlayerId k : cfg.ring) {
        cfg.u.push_back(inst.U[k.index - 1]);
        cfg.v.push_back(coeff[k.index][o - 1]);
      }
      cfg.mode = inst.mode;
      cfg.proofs = inst.proofs_enabled;
      cfg.signatures = inst.signatures_enabled;
      if (chain) {
        std::vector<BigInt> mod;
        for (PlayerId k : cfg.ring) mod.push_back(net.keys(k).ring.pk.N);
        if (!chain_hypothesis_holds(mod, unit) ||
            !(mod.back() < net.keys(master).master.pk.N)) {
          throw ParameterError("modulus chain is not widened for d repetitions");
        }
      }
      slots.push_back({o, std::make_unique<DotSession>(std::move(cfg))});
    }
  }
  std::vector<Session*> list;
  for (auto& s : slots) list.push_back(s.s.get());
  run_sessions(net, list);

  out.metrics = net.metrics_snapshot();
  out.occurrence_sums.assign(d, 0);
  for (auto& s : slots) {
    if (s.s->abort() || !s.s->result()) {
      if (!out.abort) out.abort = s.s->abort().value_or(AbortInfo{master, "gamma", std::string(kStalledReason)});
      continue;
    }
    out.occurrence_sums[s.occ - 1] += *s.s->result();
  }
  if (out.abort) return out;
  BigInt sum_u = 0;
  for (int j = 2; j <= n; ++j) sum_u += inst.U[j - 1];
  out.S = wiretap_recover(out.occurrence_sums, d, B, sum_u, inst.mode, M) + inst.U[0] * inst.V[0];
  return out;
}

// ---------------------------------------------------------------------------
// Bounds

double avg_bound_thm4(int n, int k) {
  if (n < 3 || n % 2 == 0) throw ParameterError("avg_bound_thm4: n must be odd and >= 3");
  if (k < 2 || k > n - 2) throw ParameterError("avg_bound_thm4: need 2 <= k <= n-2");
  const int a = std::min({k - 1, n - k, (n - 1) / 2});
  return 2.0 * std::log(static_cast<double>(a)) *
         (1.0 + static_cast<double>(k - 1) / static_cast<double>(n - k - 1));
}

double worst_bound_prop1(int n, double eps) {
  if (n < 1) throw ParameterError("worst_bound_prop1: n must be positive");
  if (!(eps > 0.0 && eps < 1.0)) throw ParameterError("worst_bound_prop1: eps must be in (0,1)");
  return static_cast<double>(n) * std::log(1.0 / eps);
}

}  // namespace dsmm
