#include "dsmm/dot_protocols.hpp"

#include <algorithm>
#include <numeric>

#include <json.hpp>

#include "dsmm/error.hpp"

namespace dsmm {

using nlohmann::json;

std::string_view mode_name(CipherMode m) {
  return m == CipherMode::shared_modulus ? "shared_modulus" : "paillier_chain";
}

CipherMode mode_from_name(std::string_view name) {
  if (name == "shared_modulus" || name == "shared") return CipherMode::shared_modulus;
  if (name == "paillier_chain" || name == "chain") return CipherMode::paillier_chain;
  throw ConfigurationError("unknown cipher mode '" + std::string(name) + "'");
}

void DotProductInstance::validate() const {
  if (n < 3) throw ParameterError("dot product needs n >= 3 players");
  if (static_cast<int>(U.size()) != n || static_cast<int>(V.size()) != n) {
    throw ParameterError("U and V must hold n coefficients");
  }
  if (B < 0) throw ParameterError("bound B must be non-negative");
  for (int i = 0; i < n; ++i) {
    if (U[i] < 0 || U[i] > B || V[i] < 0 || V[i] > B) {
      throw ParameterError("coefficient " + std::to_string(i + 1) + " outside [0, B]");
    }
  }
}

BigInt DotProductInstance::plain_dot() const {
  BigInt s = 0;
  for (std::size_t i = 0; i < U.size() && i < V.size(); ++i) s += U[i] * V[i];
  return s;
}

BigInt DotProductInstance::plain_weighted_sum() const {
  BigInt s = 0;
  for (std::size_t i = 1; i < U.size() && i < V.size(); ++i) s += U[i] * V[i];
  return s;
}

DotProductInstance random_instance(int n, const BigInt& B, CipherMode mode, std::uint64_t seed,
                                   const BigInt& min_u) {
  if (n < 1 || B < 0 || min_u < 0 || min_u > B) throw ParameterError("random_instance: bad bounds");
  Rng rng(derive_seed(seed, "inputs"));
  DotProductInstance inst;
  inst.n = n;
  inst.B = B;
  inst.mode = mode;
  for (int i = 0; i < n; ++i) {
    inst.U.push_back(rng.between(min_u, B + 1));
    inst.V.push_back(rng.below(B + 1));
  }
  return inst;
}

// ---------------------------------------------------------------------------
// Affine proofs

AffineProofBundle make_affine_proof(const BigInt& u, const BigInt& r, const Ciphertext& v_cipher,
                                    const PublicKey& pk, const DlogGroup& group, Rng& rng) {
  AffineProofBundle b;
  b.alpha = hom_affine(pk, v_cipher, u, r, rng);
  b.mu = group.exp(u);
  b.rho = group.exp(r);
  return b;
}

AffineCheck verify_affine_step(const BigInt& mu, const BigInt& rho, const BigInt& v,
                               const BigInt& delta, const std::optional<ChainedCheckState>& chained,
                               const DlogGroup& group, const BigInt& wrap_modulus, long max_wrap) {
  AffineCheck out;
  out.next.delta_prev = group.exp(delta);
  auto trivial = [&](const BigInt& x) { return x == 1 || x == group.g || !group.contains(x); };
  if (trivial(mu) || trivial(rho)) return out;
  BigInt target = group.mul(group.pow(mu, v), rho);
  if (chained) {
    if (!group.contains(chained->delta_prev)) return out;
    target = group.mul(target, chained->delta_prev);
  }
  BigInt x = out.next.delta_prev;
  const BigInt step = wrap_modulus > 0 ? group.exp(wrap_modulus) : BigInt(1);
  for (long k = 0; k <= max_wrap; ++k) {
    if (x == target) {
      out.accepted = true;
      return out;
    }
    if (wrap_modulus <= 0) break;
    x = group.mul(x, step);
  }
  return out;
}

AffineCheck verify_affine_step(const AffineProofBundle& bundle, const BigInt& v,
                               const BigInt& delta, const std::optional<ChainedCheckState>& chained,
                               const DlogGroup& group, const BigInt& wrap_modulus, long max_wrap) {
  return verify_affine_step(bundle.mu, bundle.rho, v, delta, chained, group, wrap_modulus,
                            max_wrap);
}

// ---------------------------------------------------------------------------
// Algebra-specific operations

namespace {

// Decrypted running sums may exceed N at most twice over: Delta_prev < N,
// u v < N and r < N.
constexpr long kMaxWrap = 2;
constexpr int kMaskAttempts = 256;

Ciphertext cipher_from_hex(const json& j, const PublicKey& pk) {
  BigInt v = from_hex(j.get<std::string>());
  if (v < 0 || v >= pk.cipher_modulus) throw FormatError("ciphertext outside the key's space");
  return {v, pk.key_id};
}

template <class A>
struct Ops;

template <>
struct Ops<IntegerAlgebra> {
  using Plain = BigInt;
  using Cipher = Ciphertext;

  static Cipher encrypt(const PublicKey& pk, const Plain& x, Rng& rng) {
    return dsmm::encrypt(pk, x, rng);
  }
  static Plain decrypt(const SecretKey& sk, const Cipher& c) { return dsmm::decrypt(sk, c); }
  static Cipher affine(const PublicKey& pk, const Cipher& c, const Plain& u, const Plain& r,
                       Rng& rng) {
    return hom_affine(pk, c, u, r, rng);
  }
  static Cipher fold(const PublicKey& pk, const Cipher& c, const Plain& x, Rng& rng) {
    return hom_add(pk, c, dsmm::encrypt(pk, x, rng));
  }
  static Plain mask(const PublicKey& pk, Rng& rng, bool nontrivial) {
    if (nontrivial && pk.N > 2) return 2 + rng.below(pk.N - 2);
    return rng.below(pk.N);
  }
  static json to_json(const Cipher& c) { return to_hex(c.value); }
  static Cipher from_json(const json& j, const PublicKey& pk) { return cipher_from_hex(j, pk); }
  static void check_plain(const Plain& x, const PublicKey& pk, const char* what) {
    if (x < 0 || x >= pk.N) throw ParameterError(std::string(what) + " outside [0, N)");
  }
};

template <>
struct Ops<TrustAlgebra> {
  using Plain = TrustPair;
  using Cipher = TrustCipherPair;

  static Cipher encrypt(const PublicKey& pk, const Plain& x, Rng& rng) {
    return encrypt_pair(pk, x, rng);
  }
  static Plain decrypt(const SecretKey& sk, const Cipher& c) { return decrypt_pair(sk, c); }
  static Cipher affine(const PublicKey& pk, const Cipher& c, const Plain& u, const Plain& r,
                       Rng& rng) {
    return hom_par_agg(pk, hom_seq_agg(pk, c, u), r, rng);
  }
  static Cipher fold(const PublicKey& pk, const Cipher& c, const Plain& x, Rng& rng) {
    return hom_par_agg(pk, c, x, rng);
  }
  static Plain mask(const PublicKey& pk, Rng& rng, bool) {
    for (int i = 0; i < kMaskAttempts; ++i) {
      TrustPair r(rng.below(pk.N), rng.below(pk.N), pk.N);
      if (par_invertible(r)) return r;
    }
    throw ConfigurationError("no invertible trust mask found");
  }
  static json to_json(const Cipher& c) {
    return json{{"a", to_hex(c.ea.value)}, {"b", to_hex(c.eb.value)}};
  }
  static Cipher from_json(const json& j, const PublicKey& pk) {
    return {cipher_from_hex(j.at("a"), pk), cipher_from_hex(j.at("b"), pk)};
  }
  static void check_plain(const Plain& x, const PublicKey& pk, const char* what) {
    if (x.ring() != pk.N) throw ParameterError(std::string(what) + " lives in another ring");
  }
};

template <class A>
constexpr bool kIsInteger = std::is_same_v<A, IntegerAlgebra>;

}  // namespace

// ---------------------------------------------------------------------------
// Ring session

template <class A>
struct RingSession<A>::Member {
  std::optional<Cipher> own;  // alpha for the head, beta otherwise
  std::optional<Cipher> next;
  BigInt mu, rho;             // proof for `own`
  BigInt mu_next, rho_next;   // proof for `next`, forwarded with beta
  std::optional<ChainedCheckState> delta_prev;
  bool sent = false;
};

template <class A>
RingSession<A>::RingSession(RingConfig<A> config) : config_(std::move(config)) {
  const std::size_t m = config_.ring.size();
  if (config_.id.empty() || config_.id.find('/') != std::string::npos) {
    throw ConfigurationError("session id must be non-empty and free of '/'");
  }
  if (m == 0) throw ConfigurationError("ring session needs at least one ring member");
  if (config_.u.size() != m || config_.v.size() != m) {
    throw ConfigurationError("ring session: one u and one v per ring member");
  }
  std::vector<PlayerId> all = config_.ring;
  all.push_back(config_.master);
  std::sort(all.begin(), all.end());
  if (std::adjacent_find(all.begin(), all.end()) != all.end()) {
    throw ConfigurationError("ring session: players must be distinct");
  }
  if constexpr (!kIsInteger<A>) {
    if (config_.mode != CipherMode::shared_modulus) {
      throw ConfigurationError("trust sessions need the shared-modulus scheme");
    }
    if (config_.proofs) throw ConfigurationError("affine proofs apply to integer sessions only");
  }
  members_.resize(m);
  c_in_.resize(m);
  masks_.reserve(m);
  trace_.deltas.resize(m);
}

template <class A>
RingSession<A>::~RingSession() = default;

template <class A>
void RingSession<A>::fail(PlayerId who, std::string step, std::string reason) {
  if (!abort_) abort_ = AbortInfo{who, std::move(step), std::move(reason)};
}

template <class A>
void RingSession<A>::post(Network& net, PlayerId from, PlayerId to, const std::string& step,
                          std::size_t idx, std::string payload) {
  net.post(from, to, config_.id + "/" + step + std::to_string(idx), std::move(payload),
           config_.signatures);
}

template <class A>
bool RingSession<A>::check_signature(Network& net, const Message& msg, const std::string& step) {
  if (!config_.signatures) return true;
  if (!verify_message(net.group(), net.keys(msg.from).signing.y, msg)) {
    fail(msg.to, step, "signature of P" + std::to_string(msg.from.index) + " rejected");
    return false;
  }
  return true;
}

template <class A>
void RingSession<A>::start(Network& net) {
  const std::size_t m = config_.ring.size();
  const PublicKey& mk = net.keys(config_.master).master.pk;
  // Key compatibility is a precondition: reject before any message is sent.
  for (std::size_t j = 0; j < m; ++j) {
    const PublicKey& pk = net.keys(config_.ring[j]).ring.pk;
    Ops<A>::check_plain(config_.v[j], pk, "ring value");
    Ops<A>::check_plain(config_.u[j], pk, "coefficient");
    if (config_.mode == CipherMode::shared_modulus) {
      if (pk.scheme != Scheme::shared_modulus || pk.N != mk.N) {
        throw ParameterError("shared-modulus session needs one common plaintext modulus");
      }
    } else {
      if (pk.scheme != Scheme::paillier_like || mk.scheme != Scheme::paillier_like) {
        throw ParameterError("chain session needs Paillier keys");
      }
      if (j > 0 && !(net.keys(config_.ring[j - 1]).ring.pk.N < pk.N)) {
        throw ParameterError("chain session: ring moduli must increase along the ring");
      }
    }
  }
  if (config_.mode == CipherMode::paillier_chain &&
      !(net.keys(config_.ring.back()).ring.pk.N < mk.N)) {
    throw ParameterError("chain session: master modulus must exceed the last ring modulus");
  }
  for (std::size_t j = 0; j < m; ++j) {
    PlayerId p = config_.ring[j];
    const PublicKey& pk = net.keys(p).ring.pk;
    Cipher c = Ops<A>::encrypt(pk, config_.v[j], net.rng(p));
    post(net, p, config_.master, "c", p.index, json{{"c", Ops<A>::to_json(c)}}.dump());
  }
}

template <class A>
void RingSession<A>::on_message(Network& net, const Message& msg) {
  if (abort_ || result_) return;
  try {
    if (msg.to == config_.master) {
      const std::string phase = msg.phase();
      if (phase == "c") {
        master_on_c(net, msg);
      } else if (phase == "gamma") {
        master_on_gamma(net, msg);
      }
      return;
    }
    for (std::size_t pos = 0; pos < config_.ring.size(); ++pos) {
      if (config_.ring[pos] == msg.to) {
        member_on_message(net, pos, msg);
        return;
      }
    }
  } catch (const json::exception& e) {
    fail(msg.to, msg.phase(), std::string("malformed payload: ") + e.what());
  } catch (const FormatError& e) {
    fail(msg.to, msg.phase(), e.what());
  } catch (const KeyMismatchError& e) {
    fail(msg.to, msg.phase(), e.what());
  } catch (const RangeError& e) {
    fail(msg.to, msg.phase(), e.what());
  }
}

template <class A>
void RingSession<A>::master_on_c(Network& net, const Message& msg) {
  const std::size_t m = config_.ring.size();
  std::size_t j = 0;
  while (j < m && config_.ring[j] != msg.from) ++j;
  if (j == m) {
    fail(config_.master, "c", "ciphertext from a player outside the ring");
    return;
  }
  if (!check_signature(net, msg, "c")) return;
  if (c_in_[j]) return;  // duplicate
  const PublicKey& pk = net.keys(config_.ring[j]).ring.pk;
  c_in_[j] = Ops<A>::from_json(json::parse(msg.payload).at("c"), pk);
  if (++c_received_ < m) return;

  Rng& rng = net.rng(config_.master);
  std::vector<Cipher> alpha;
  std::vector<BigInt> mu(m), rho(m);
  for (std::size_t i = 0; i < m; ++i) {
    const PublicKey& pki = net.keys(config_.ring[i]).ring.pk;
    masks_.push_back(Ops<A>::mask(pki, rng, config_.proofs));
    alpha.push_back(Ops<A>::affine(pki, *c_in_[i], config_.u[i], masks_[i], rng));
    if constexpr (kIsInteger<A>) {
      trace_.u.push_back(config_.u[i]);
      trace_.r.push_back(masks_[i]);
      if (config_.proofs) {
        mu[i] = net.group().exp(config_.u[i]);
        rho[i] = net.group().exp(masks_[i]);
      }
    }
  }
  auto alpha_payload = [&](std::size_t i) {
    json j = {{"alpha", Ops<A>::to_json(alpha[i])}};
    if (config_.proofs) {
      j["mu"] = to_hex(mu[i]);
      j["rho"] = to_hex(rho[i]);
    }
    return j.dump();
  };
  post(net, config_.master, config_.ring[0], "alpha", config_.ring[0].index, alpha_payload(0));
  for (std::size_t i = 0; i + 1 < m; ++i) {
    post(net, config_.master, config_.ring[i], "alpha", config_.ring[i + 1].index,
         alpha_payload(i + 1));
  }
}

template <class A>
void RingSession<A>::member_on_message(Network& net, std::size_t pos, const Message& msg) {
  const std::size_t m = config_.ring.size();
  const PlayerId me = config_.ring[pos];
  Member& st = members_[pos];
  const std::string phase = msg.phase();
  json j;
  if (phase == "alpha") {
    if (msg.from != config_.master) {
      fail(me, "alpha", "alpha from a player other than the master");
      return;
    }
    if (!check_signature(net, msg, "alpha")) return;
    const std::string tail = msg.tag.substr(msg.tag.rfind('/') + 1 + phase.size());
    const int k = std::stoi(tail);
    j = json::parse(msg.payload);
    auto read_proof = [&](BigInt& mu, BigInt& rho) {
      if (!config_.proofs) return;
      mu = from_hex(j.at("mu").get<std::string>());
      rho = from_hex(j.at("rho").get<std::string>());
    };
    if (pos == 0 && k == me.index) {
      if (st.own) return;
      st.own = Ops<A>::from_json(j.at("alpha"), net.keys(me).ring.pk);
      read_proof(st.mu, st.rho);
    } else if (pos + 1 < m && k == config_.ring[pos + 1].index) {
      if (st.next) return;
      st.next = Ops<A>::from_json(j.at("alpha"), net.keys(config_.ring[pos + 1]).ring.pk);
      read_proof(st.mu_next, st.rho_next);
    } else {
      fail(me, "alpha", "unexpected alpha index " + std::to_string(k));
      return;
    }
  } else if (phase == "beta") {
    if (pos == 0 || msg.from != config_.ring[pos - 1]) {
      fail(me, "beta", "beta from an unexpected player");
      return;
    }
    if (!check_signature(net, msg, "beta")) return;
    if (st.own) return;
    j = json::parse(msg.payload);
    st.own = Ops<A>::from_json(j.at("beta"), net.keys(me).ring.pk);
    if (config_.proofs) {
      st.delta_prev = ChainedCheckState{from_hex(j.at("delta").get<std::string>())};
      st.mu = from_hex(j.at("mu").get<std::string>());
      st.rho = from_hex(j.at("rho").get<std::string>());
    }
  } else {
    fail(me, phase, "unexpected step");
    return;
  }
  member_try_advance(net, pos);
}

template <class A>
void RingSession<A>::member_try_advance(Network& net, std::size_t pos) {
  const std::size_t m = config_.ring.size();
  Member& st = members_[pos];
  if (st.sent || !st.own) return;
  const bool last = pos + 1 == m;
  if (!last && !st.next) return;
  const PlayerId me = config_.ring[pos];
  const KeyPair& kp = net.keys(me).ring;
  const Plain delta = Ops<A>::decrypt(kp.sk, *st.own);
  json check;
  if constexpr (kIsInteger<A>) {
    trace_.deltas[pos] = delta;
    if (config_.proofs) {
      std::optional<ChainedCheckState> chained;
      if (pos > 0) chained = st.delta_prev;
      AffineCheck res = verify_affine_step(st.mu, st.rho, config_.v[pos], delta, chained,
                                           net.group(), kp.pk.N, kMaxWrap);
      if (!res.accepted) {
        fail(me, "affine-check", "P" + std::to_string(me.index) + " rejected the affine proof");
        return;
      }
      check["delta"] = to_hex(res.next.delta_prev);
    }
  }
  st.sent = true;
  Rng& rng = net.rng(me);
  if (!last) {
    const PlayerId nxt = config_.ring[pos + 1];
    const PublicKey& npk = net.keys(nxt).ring.pk;
    json j = {{"beta", Ops<A>::to_json(Ops<A>::fold(npk, *st.next, delta, rng))}};
    if (config_.proofs) {
      j["delta"] = check["delta"];
      j["mu"] = to_hex(st.mu_next);
      j["rho"] = to_hex(st.rho_next);
    }
    post(net, me, nxt, "beta", nxt.index, j.dump());
  } else {
    const PublicKey& mpk = net.keys(config_.master).master.pk;
    Cipher g = Ops<A>::encrypt(mpk, delta, rng);
    post(net, me, config_.master, "gamma", config_.master.index,
         json{{"gamma", Ops<A>::to_json(g)}}.dump());
  }
}

template <class A>
void RingSession<A>::master_on_gamma(Network& net, const Message& msg) {
  const std::size_t m = config_.ring.size();
  if (msg.from != config_.ring.back()) {
    fail(config_.master, "gamma", "gamma from a player other than the ring tail");
    return;
  }
  if (!check_signature(net, msg, "gamma")) return;
  if (masks_.size() != m) {
    fail(config_.master, "gamma", "gamma before the masks were drawn");
    return;
  }
  const KeyPair& mk = net.keys(config_.master).master;
  Plain d = Ops<A>::decrypt(mk.sk, Ops<A>::from_json(json::parse(msg.payload).at("gamma"), mk.pk));
  if constexpr (kIsInteger<A>) {
    trace_.gamma_plain = d;
    BigInt s;
    if (config_.mode == CipherMode::shared_modulus) {
      s = d;
      for (const auto& r : masks_) s -= r;
      s = mod(s, mk.pk.N);
    } else {
      // S_{j} = (S_{j+1} - r_j) mod N_j, from the tail back to the head.
      s = d;
      trace_.unwind.push_back(s);
      for (std::size_t j = m; j-- > 0;) {
        s = mod(s - masks_[j], net.keys(config_.ring[j]).ring.pk.N);
        trace_.unwind.push_back(s);
      }
    }
    if (config_.master_term) s += *config_.master_term;
    result_ = s;
  } else {
    Plain acc = d;
    for (const auto& r : masks_) {
      auto inv = par_invert(r);
      if (!inv) throw ConfigurationError("trust mask lost its inverse");
      acc = par_agg(acc, *inv);
    }
    if (config_.master_term) acc = par_agg(acc, *config_.master_term);
    result_ = acc;
  }
}

template class RingSession<IntegerAlgebra>;
template class RingSession<TrustAlgebra>;

// ---------------------------------------------------------------------------
// DSDP / ESDP drivers

BigInt shared_plain_modulus(int n, const BigInt& B, int d) {
  if (n < 2 || d < 1 || B < 0) throw ParameterError("shared_plain_modulus: bad parameters");
  BigInt need = BigInt(n - 1) * d * B * B;
  return pow2(std::max<std::size_t>(8, bit_length(need)));
}

std::size_t shared_key_bits(const BigInt& M) {
  std::size_t pbits = std::max<std::size_t>(64, bit_length(M) + 16);
  return 2 * pbits;
}

Network make_dot_network(const DotProductInstance& inst, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "keys"));
  KeyDirectory dir;
  if (inst.mode == CipherMode::shared_modulus) {
    BigInt M = shared_plain_modulus(inst.n, inst.B);
    dir = make_shared_directory(inst.n, M, shared_key_bits(M), rng, M);
  } else {
    dir = make_chain_directory(inst.n, std::max(inst.B, BigInt(1)), 1, 0, rng);
  }
  return create_network(inst.n, std::move(dir), seed);
}

namespace {

void check_dsdp_keys(const DotProductInstance& inst, const Network& net) {
  if (net.size() != inst.n) throw ConfigurationError("network size differs from n");
  const BigInt unit = inst.B * inst.B;
  const PublicKey& mk = net.keys(PlayerId{1}).master.pk;
  if (inst.mode == CipherMode::shared_modulus) {
    for (int i = 2; i <= inst.n; ++i) {
      const PublicKey& pk = net.keys(PlayerId{i}).ring.pk;
      if (pk.scheme != Scheme::shared_modulus || pk.N != mk.N) {
        throw ParameterError("shared mode needs one common plaintext modulus");
      }
    }
    if (!(BigInt(inst.n - 1) * unit < mk.N)) {
      throw ParameterError("shared modulus M must exceed (n-1)B^2");
    }
  } else {
    std::vector<BigInt> ring;
    for (int i = 2; i <= inst.n; ++i) {
      const PublicKey& pk = net.keys(PlayerId{i}).ring.pk;
      if (pk.scheme != Scheme::paillier_like) throw ParameterError("chain mode needs Paillier keys");
      ring.push_back(pk.N);
    }
    if (!chain_hypothesis_holds(ring, unit)) {
      throw ParameterError("modulus chain violates N_{i-1} + (n-i+1)B^2 < N_i");
    }
    if (!(ring.back() < mk.N)) throw ParameterError("master modulus must exceed N_n");
  }
}

template <class A>
DotResult collect(const RingSession<A>& s, const Network& net) {
  DotResult out;
  out.metrics = net.metrics_snapshot();
  out.abort = s.abort();
  out.trace = s.trace();
  if constexpr (kIsInteger<A>) {
    if (s.result()) out.S = *s.result();
  }
  if (!out.abort && !s.result()) {
    out.abort = AbortInfo{s.config().master, "gamma", std::string(kStalledReason)};
  }
  return out;
}

}  // namespace

DotResult run_dsdp(const DotProductInstance& inst, Network& net) {
  inst.validate();
  check_dsdp_keys(inst, net);
  RingConfig<IntegerAlgebra> cfg;
  cfg.id = "dsdp";
  cfg.master = PlayerId{1};
  for (int i = 2; i <= inst.n; ++i) {
    cfg.ring.push_back(PlayerId{i});
    cfg.u.push_back(inst.U[i - 1]);
    cfg.v.push_back(inst.V[i - 1]);
  }
  cfg.master_term = inst.U[0] * inst.V[0];
  cfg.mode = inst.mode;
  cfg.proofs = inst.proofs_enabled;
  cfg.signatures = inst.signatures_enabled;
  DotSession session(std::move(cfg));
  Session* list[] = {&session};
  run_sessions(net, list);
  return collect(session, net);
}

DotResult run_esdp(Network& net, PlayerId master, const std::vector<PlayerId>& others,
                   const std::vector<BigInt>& U, const std::vector<BigInt>& V,
                   const EsdpOptions& options) {
  if (others.empty() || U.size() != others.size() || V.size() != others.size()) {
    throw ParameterError("esdp: one coefficient and one value per other player");
  }
  RingConfig<IntegerAlgebra> cfg;
  cfg.id = "esdp";
  cfg.master = master;
  cfg.ring = others;
  cfg.u = U;
  cfg.v = V;
  cfg.mode = options.mode;
  cfg.proofs = options.proofs;
  cfg.signatures = options.signatures;
  DotSession session(std::move(cfg));
  Session* list[] = {&session};
  run_sessions(net, list);
  return collect(session, net);
}

// ---------------------------------------------------------------------------
// MPWP

namespace {

class MpwpSession final : public Session {
 public:
  MpwpSession(const DotProductInstance& inst, bool sign) : inst_(inst), sign_(sign) {
    const int n = inst.n;
    gamma_.resize(n + 1);
  }

  const std::string& id() const override { return id_; }

  void start(Network& net) override {
    const int n = inst_.n;
    const PublicKey& pk1 = net.keys(PlayerId{1}).master.pk;
    Rng& rng = net.rng(PlayerId{1});
    json tv = json::array();
    for (int i = 2; i <= n; ++i) tv.push_back(to_hex(encrypt(pk1, inst_.U[i - 1], rng).value));
    // (n-1) x (n-1) matrix of trivial ciphertexts, and A = 1.
    json mtx = json::array();
    for (int i = 0; i < (n - 1) * (n - 1); ++i) mtx.push_back("1");
    post(net, 1, 2, "circ", json{{"TV", tv}, {"M", mtx}, {"A", "1"}}.dump());
  }

  void on_message(Network& net, const Message& msg) override {
    if (abort_ || result_) return;
    if (sign_ && !verify_message(net.group(), net.keys(msg.from).signing.y, msg)) {
      abort_ = AbortInfo{msg.to, msg.phase(), "signature rejected"};
      return;
    }
    const std::string phase = msg.phase();
    json j = json::parse(msg.payload);
    if (phase == "circ") {
      on_circ(net, msg.to.index, j);
    } else if (phase == "bcast") {
      send_pss(net, msg.to.index, j.at("M"));
    } else if (phase == "gamma") {
      gamma_[msg.from.index] = from_hex(j.at("gamma").get<std::string>());
      ++gammas_;
      try_finish(net);
    } else if (phase == "acc") {
      acc_ = from_hex(j.at("A").get<std::string>());
      try_finish(net);
    }
  }

  const std::optional<BigInt>& result() const { return result_; }
  const std::optional<AbortInfo>& abort() const { return abort_; }

 private:
  void post(Network& net, int from, int to, const std::string& step, std::string payload) {
    net.post(PlayerId{from}, PlayerId{to}, id_ + "/" + step + std::to_string(to),
             std::move(payload), sign_);
  }

  void on_circ(Network& net, int i, json j) {
    const int n = inst_.n;
    const PublicKey& pk1 = net.keys(PlayerId{1}).master.pk;
    const BigInt& M = pk1.N;
    Rng& rng = net.rng(PlayerId{i});
    Ciphertext A{from_hex(j.at("A").get<std::string>()), pk1.key_id};
    Ciphertext tvi{from_hex(j.at("TV").at(i - 2).get<std::string>()), pk1.key_id};
    BigInt z = rng.below(M);
    A = hom_add(pk1, hom_add(pk1, A, hom_scale(pk1, tvi, inst_.V[i - 1])), encrypt(pk1, z, rng));
    j["A"] = to_hex(A.value);
    // z_i = sum_j z_{i,j} mod M, share j encrypted for P_j into row i.
    BigInt rest = z;
    for (int col = 2; col <= n; ++col) {
      BigInt share = col == n ? mod(rest, M) : rng.below(M);
      rest -= share;
      const PublicKey& pkj = net.keys(PlayerId{col}).ring.pk;
      j["M"][(i - 2) * (n - 1) + (col - 2)] = to_hex(encrypt(pkj, share, rng).value);
    }
    if (i < n) {
      post(net, i, i + 1, "circ", j.dump());
      return;
    }
    json mtx = j["M"];
    for (int t = 2; t < n; ++t) post(net, n, t, "bcast", json{{"M", mtx}}.dump());
    send_pss(net, n, mtx);
    post(net, n, 1, "acc", json{{"A", j["A"]}}.dump());
  }

  void send_pss(Network& net, int col, const json& mtx) {
    const int n = inst_.n;
    const KeyPair& kp = net.keys(PlayerId{col}).ring;
    const PublicKey& pk1 = net.keys(PlayerId{1}).master.pk;
    BigInt pss = 0;
    for (int row = 2; row <= n; ++row) {
      Ciphertext c{from_hex(mtx.at((row - 2) * (n - 1) + (col - 2)).get<std::string>()),
                   kp.pk.key_id};
      pss += decrypt(kp.sk, c);
    }
    pss = mod(pss, kp.pk.N);
    Ciphertext g = encrypt(pk1, pss, net.rng(PlayerId{col}));
    net.post(PlayerId{col}, PlayerId{1}, id_ + "/gamma" + std::to_string(col),
             json{{"gamma", to_hex(g.value)}}.dump(), sign_);
  }

  void try_finish(Network& net) {
    if (!acc_ || gammas_ < inst_.n - 1) return;
    const KeyPair& kp = net.keys(PlayerId{1}).master;
    BigInt s = decrypt(kp.sk, Ciphertext{*acc_, kp.pk.key_id});
    for (int j = 2; j <= inst_.n; ++j) s -= decrypt(kp.sk, Ciphertext{gamma_[j], kp.pk.key_id});
    result_ = mod(s, kp.pk.N);
  }

  std::string id_ = "mpwp";
  DotProductInstance inst_;
  bool sign_;
  std::vector<BigInt> gamma_;
  int gammas_ = 0;
  std::optional<BigInt> acc_;
  std::optional<BigInt> result_;
  std::optional<AbortInfo> abort_;
};

// P-MPWP: TV and A circulate, shares travel point-to-point.
class PmpwpSession final : public Session {
 public:
  PmpwpSession(const DotProductInstance& inst, BigInt z_bound, bool sign)
      : inst_(inst), z_bound_(std::move(z_bound)), sign_(sign) {
    const int n = inst.n;
    shares_.resize(n + 1);
    own_share_.resize(n + 1);
    gamma_.resize(n + 1);
    done_.assign(n + 1, false);
  }

  const std::string& id() const override { return id_; }

  void start(Network& net) override {
    const int n = inst_.n;
    const PublicKey& pk1 = net.keys(PlayerId{1}).master.pk;
    Rng& rng = net.rng(PlayerId{1});
    json tv = json::array();
    for (int i = 2; i <= n; ++i) tv.push_back(to_hex(encrypt(pk1, inst_.U[i - 1], rng).value));
    post(net, 1, 2, "circ", json{{"TV", tv}, {"A", "1"}}.dump());
  }

  void on_message(Network& net, const Message& msg) override {
    if (abort_ || result_) return;
    if (sign_ && !verify_message(net.group(), net.keys(msg.from).signing.y, msg)) {
      abort_ = AbortInfo{msg.to, msg.phase(), "signature rejected"};
      return;
    }
    const std::string phase = msg.phase();
    json j = json::parse(msg.payload);
    const int me = msg.to.index;
    if (phase == "circ") {
      on_circ(net, me, j);
    } else if (phase == "share") {
      const PublicKey& pk = net.keys(msg.to).ring.pk;
      shares_[me].push_back(Ciphertext{from_hex(j.at("z").get<std::string>()), pk.key_id});
      try_pss(net, me);
    } else if (phase == "gamma") {
      gamma_[msg.from.index] = from_hex(j.at("gamma").get<std::string>());
      ++gammas_;
      try_finish(net);
    } else if (phase == "acc") {
      acc_ = from_hex(j.at("A").get<std::string>());
      try_finish(net);
    }
  }

  const std::optional<BigInt>& result() const { return result_; }
  const std::optional<AbortInfo>& abort() const { return abort_; }

 private:
  void post(Network& net, int from, int to, const std::string& step, std::string payload) {
    net.post(PlayerId{from}, PlayerId{to}, id_ + "/" + step + std::to_string(to),
             std::move(payload), sign_);
  }

  void on_circ(Network& net, int i, json j) {
    const int n = inst_.n;
    const PublicKey& pk1 = net.keys(PlayerId{1}).master.pk;
    Rng& rng = net.rng(PlayerId{i});
    Ciphertext A{from_hex(j.at("A").get<std::string>()), pk1.key_id};
    Ciphertext tvi{from_hex(j.at("TV").at(i - 2).get<std::string>()), pk1.key_id};
    BigInt z = rng.below(z_bound_ + 1);
    A = hom_add(pk1, hom_add(pk1, A, hom_scale(pk1, tvi, inst_.V[i - 1])), encrypt(pk1, z, rng));
    j["A"] = to_hex(A.value);
    // Non-negative integer shares of z: gaps between sorted cut points.
    std::vector<BigInt> cuts;
    for (int t = 0; t < n - 2; ++t) cuts.push_back(rng.below(z + 1));
    std::sort(cuts.begin(), cuts.end());
    cuts.push_back(z);
    BigInt prev = 0;
    int slot = 0;
    for (int col = 2; col <= n; ++col) {
      BigInt share = cuts[slot] - prev;
      prev = cuts[slot++];
      if (col == i) {
        own_share_[i] = share;
        continue;
      }
      const PublicKey& pkj = net.keys(PlayerId{col}).ring.pk;
      post(net, i, col, "share", json{{"z", to_hex(encrypt(pkj, share, rng).value)}}.dump());
    }
    circ_done_.push_back(i);
    if (i < n) {
      post(net, i, i + 1, "circ", j.dump());
    } else {
      post(net, n, 1, "acc", json{{"A", j["A"]}}.dump());
    }
    try_pss(net, i);
  }

  void try_pss(Network& net, int j) {
    const int n = inst_.n;
    if (done_[j] || std::find(circ_done_.begin(), circ_done_.end(), j) == circ_done_.end()) return;
    if (static_cast<int>(shares_[j].size()) < n - 2) return;
    done_[j] = true;
    const KeyPair& kp = net.keys(PlayerId{j}).ring;
    Rng& rng = net.rng(PlayerId{j});
    // One decryption of the homomorphic sum of all shares.
    Ciphertext sum = encrypt(kp.pk, own_share_[j], rng);
    for (const auto& c : shares_[j]) sum = hom_add(kp.pk, sum, c);
    BigInt pss = decrypt(kp.sk, sum);
    const PublicKey& pk1 = net.keys(PlayerId{1}).master.pk;
    net.post(PlayerId{j}, PlayerId{1}, id_ + "/gamma" + std::to_string(j),
             json{{"gamma", to_hex(encrypt(pk1, mod(pss, pk1.N), rng).value)}}.dump(), sign_);
  }

  void try_finish(Network& net) {
    if (!acc_ || gammas_ < inst_.n - 1) return;
    const KeyPair& kp = net.keys(PlayerId{1}).master;
    BigInt s = decrypt(kp.sk, Ciphertext{*acc_, kp.pk.key_id});
    for (int j = 2; j <= inst_.n; ++j) s -= decrypt(kp.sk, Ciphertext{gamma_[j], kp.pk.key_id});
    result_ = s;
  }

  std::string id_ = "pmpwp";
  DotProductInstance inst_;
  BigInt z_bound_;
  bool sign_;
  std::vector<std::vector<Ciphertext>> shares_;
  std::vector<BigInt> own_share_;
  std::vector<int> circ_done_;
  std::vector<bool> done_;
  std::vector<BigInt> gamma_;
  int gammas_ = 0;
  std::optional<BigInt> acc_;
  std::optional<BigInt> result_;
  std::optional<AbortInfo> abort_;
};

template <class S>
DotResult collect_plain(const S& s, const Network& net) {
  DotResult out;
  out.metrics = net.metrics_snapshot();
  out.abort = s.abort();
  if (s.result()) out.S = *s.result();
  if (!out.abort && !s.result()) out.abort = AbortInfo{PlayerId{1}, "final", std::string(kStalledReason)};
  return out;
}

}  // namespace

Network make_mpwp_network(const DotProductInstance& inst, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "keys"));
  BigInt M = shared_plain_modulus(inst.n, inst.B);
  return create_network(inst.n, make_shared_directory(inst.n, M, shared_key_bits(M), rng, M),
                        seed);
}

DotResult run_mpwp(const DotProductInstance& inst, Network& net) {
  inst.validate();
  if (net.size() != inst.n) throw ConfigurationError("network size differs from n");
  const BigInt& M = net.keys(PlayerId{1}).master.pk.N;
  for (int i = 1; i <= inst.n; ++i) {
    const PublicKey& pk = net.keys(PlayerId{i}).ring.pk;
    if (pk.scheme != Scheme::shared_modulus || pk.N != M) {
      throw ParameterError("MPWP needs shared-modulus keys over one M");
    }
  }
  if (!(BigInt(inst.n - 1) * inst.B * inst.B < M)) {
    throw ParameterError("MPWP needs (n-1)B^2 < M");
  }
  MpwpSession s(inst, inst.signatures_enabled);
  Session* list[] = {&s};
  run_sessions(net, list);
  return collect_plain(s, net);
}

void check_pmpwp_moduli(int n, const BigInt& B, const std::vector<BigInt>& moduli) {
  if (static_cast<int>(moduli.size()) != n) throw ParameterError("one modulus per player");
  const BigInt n1 = n - 1;
  if (!(n1 * (B * B + B) < moduli[0])) {
    throw ParameterError("P-MPWP needs (n-1)(B^2+B) < N_1");
  }
  for (int i = 1; i < n; ++i) {
    if (!(n1 * B < moduli[i])) {
      throw ParameterError("P-MPWP needs (n-1)B < N_" + std::to_string(i + 1));
    }
  }
}

DotResult run_pmpwp(const DotProductInstance& inst, Network& net,
                    const std::optional<BigInt>& z_bound) {
  inst.validate();
  if (net.size() != inst.n) throw ConfigurationError("network size differs from n");
  std::vector<BigInt> moduli;
  for (int i = 1; i <= inst.n; ++i) {
    const PublicKey& pk = net.keys(PlayerId{i}).ring.pk;
    if (pk.scheme != Scheme::paillier_like) throw ParameterError("P-MPWP needs Paillier keys");
    moduli.push_back(pk.N);
  }
  check_pmpwp_moduli(inst.n, inst.B, moduli);
  BigInt zb = z_bound.value_or(inst.B);
  if (zb < 0) throw ParameterError("z bound must be non-negative");
  PmpwpSession s(inst, zb, inst.signatures_enabled);
  Session* list[] = {&s};
  run_sessions(net, list);
  return collect_plain(s, net);
}

Network make_pmpwp_network(const DotProductInstance& inst, std::uint64_t seed,
                           std::size_t key_bits) {
  Rng rng(derive_seed(seed, "keys"));
  const BigInt n1 = inst.n - 1;
  BigInt master_floor = n1 * (inst.B * inst.B + inst.B);
  BigInt member_floor = n1 * inst.B;
  return create_network(
      inst.n, make_paillier_directory(inst.n, key_bits, master_floor, member_floor, rng), seed);
}

}  // namespace dsmm
