#include "dsmm/adversary_lab.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "dsmm/error.hpp"
#include "dsmm/matmul_protocols.hpp"

namespace dsmm {

using nlohmann::json;

namespace {

int tag_index(const Message& m) {
  const std::string phase = m.phase();
  return std::stoi(m.tag.substr(m.tag.rfind('/') + 1 + phase.size()));
}

const Message* find_delivered(const std::vector<Message>& log, PlayerId to,
                              const std::string& phase, int idx) {
  for (const auto& m : log) {
    if (m.to == to && m.phase() == phase && tag_index(m) == idx) return &m;
  }
  return nullptr;
}

BigInt cipher_field(const Message& m, const char* field) {
  return from_hex(json::parse(m.payload).at(field).get<std::string>());
}

void fill_abort(AttackOutcome& out, const DotResult& res) {
  if (res.abort && res.abort->reason != kStalledReason) {
    out.abort = res.abort;
    out.abort_step = res.abort->step;
  }
}

// v from u v = y, when u divides y exactly.
std::optional<BigInt> divide_out(const BigInt& y, const BigInt& u) {
  if (u == 0 || y % u != 0) return std::nullopt;
  return y / u;
}

}  // namespace

AttackOutcome attack_alice_key(const DotProductInstance& inst, Network& net, PlayerId target) {
  inst.validate();
  if (target.index < 2 || target.index > inst.n) {
    throw ParameterError("attack target must be one of P_2..P_n");
  }
  struct State {
    std::optional<Ciphertext> c_target;
    BigInt u = 2;
    BigInt r;
    Rng rng;
  };
  auto st = std::make_shared<State>();
  st->rng = Rng(derive_seed(net.seed(), "adversary"));
  const PublicKey& tpk = net.keys(target).ring.pk;
  st->r = 2 + st->rng.below(tpk.N - 2);
  const DlogGroup& group = net.group();

  AdversaryHook hook;
  hook.mode = AdversaryMode::active;
  hook.compromised = {PlayerId{1}};
  hook.interceptor = [st, target, &net, &group](const Message& m,
                                                AdversaryControl& ctl) -> std::vector<Message> {
    if (m.phase() == "c" && m.from == target) {
      st->c_target = Ciphertext{cipher_field(m, "c"), net.keys(target).ring.pk.key_id};
      return {m};
    }
    if (m.phase() != "alpha" || m.from != PlayerId{1}) return {m};
    const int k = tag_index(m);
    const PublicKey& pk = net.keys(PlayerId{k}).ring.pk;
    json payload = json::parse(m.payload);
    Ciphertext forged;
    if (k == target.index && st->c_target) {
      forged = hom_affine(pk, *st->c_target, st->u, st->r, st->rng);
      if (payload.contains("mu")) {
        payload["mu"] = to_hex(group.exp(st->u));
        payload["rho"] = to_hex(group.exp(st->r));
      }
    } else {
      // x_i = 0 for every other player; the honest proof values are kept.
      forged = encrypt(pk, 0, st->rng);
    }
    payload["alpha"] = to_hex(forged.value);
    Message out = m;
    out.payload = payload.dump();
    out.signature.reset();
    if (m.signature) out = ctl.sign_as(PlayerId{1}, out);
    return {out};
  };
  net.attach_adversary(hook);
  DotResult res = run_dsdp(inst, net);

  AttackOutcome out;
  fill_abort(out, res);
  const Message* gamma = find_delivered(net.adversary_log(), PlayerId{1}, "gamma", 1);
  if (gamma == nullptr) {
    out.note = "no gamma reached the compromised master";
    return out;
  }
  const KeyPair& mk = net.keys(PlayerId{1}).master;
  BigInt d = decrypt(mk.sk, Ciphertext{cipher_field(*gamma, "gamma"), mk.pk.key_id});
  // D(gamma) = u' v + r' (mod N_target) + sum of x_i = 0.
  out.recovered = divide_out(mod(d - st->r, tpk.N), st->u);
  out.succeeded = out.recovered && *out.recovered == inst.V[target.index - 1];
  out.note = out.succeeded ? "target value recovered from gamma" : "recovery failed";
  return out;
}

AttackOutcome attack_charlie_key(const DotProductInstance& inst, Network& net, bool replay) {
  inst.validate();
  const int n = inst.n;
  const PlayerId alice{1}, bob{2}, charlie{n};
  struct State {
    BigInt u = 2;
    BigInt r;
    Rng rng;
  };
  auto st = std::make_shared<State>();
  st->rng = Rng(derive_seed(net.seed(), "adversary"));
  const PublicKey& bpk = net.keys(bob).ring.pk;
  st->r = 2 + st->rng.below(bpk.N - 2);
  const bool sign = inst.signatures_enabled;

  AdversaryHook hook;
  hook.mode = AdversaryMode::active;
  hook.compromised = {charlie};
  hook.interceptor = [=, &net](const Message& m, AdversaryControl& ctl) -> std::vector<Message> {
    const bool alice_link = m.from == alice || m.to == alice;
    if (replay) {
      // Genuine alphas pass and are replayed once more; gamma never reaches Alice.
      if (m.phase() == "alpha" && m.from == alice) {
        ctl.inject(m);
        return {m};
      }
      if (m.phase() == "gamma") return {};
      return {m};
    }
    if (!alice_link) return {m};
    if (m.phase() == "c" && m.from == bob) {
      // Impersonate Alice towards the ring.
      auto forge = [&](int k, PlayerId to, const Ciphertext& alpha) {
        Message f;
        f.from = alice;
        f.to = to;
        f.round = m.round + 1;
        f.tag = std::string(m.session()) + "/alpha" + std::to_string(k);
        f.payload = json{{"alpha", to_hex(alpha.value)}}.dump();
        // Charlie can only sign with its own key.
        if (sign) f = ctl.sign_as(charlie, f);
        ctl.inject(f);
      };
      Ciphertext c2{cipher_field(m, "c"), bpk.key_id};
      forge(2, bob, hom_affine(bpk, c2, st->u, st->r, st->rng));
      for (int k = 2; k < n; ++k) {
        const PublicKey& pk = net.keys(PlayerId{k + 1}).ring.pk;
        forge(k + 1, PlayerId{k}, encrypt(pk, 0, st->rng));
      }
    }
    return {};
  };
  net.attach_adversary(hook);
  DotResult res = run_dsdp(inst, net);

  AttackOutcome out;
  fill_abort(out, res);
  const Message* beta = find_delivered(net.adversary_log(), charlie, "beta", n);
  if (beta == nullptr) {
    out.note = "no beta reached the compromised player";
    return out;
  }
  const KeyPair& ck = net.keys(charlie).ring;
  BigInt d = decrypt(ck.sk, Ciphertext{cipher_field(*beta, "beta"), ck.pk.key_id});
  out.recovered = divide_out(mod(d - st->r, bpk.N), st->u);
  out.succeeded = out.recovered && *out.recovered == inst.V[1];
  out.note = out.succeeded ? "v_2 recovered from the last running sum"
                           : "running sum does not isolate v_2";
  return out;
}

AttackOutcome attack_sandwich(const DotProductInstance& inst, Network& net, int target,
                              const std::set<int>& compromised) {
  inst.validate();
  const int n = inst.n;
  if (target < 2 || target > n) throw ParameterError("sandwich target must be one of P_2..P_n");
  if (compromised.contains(target)) throw ParameterError("sandwich target must be honest");
  AdversaryHook hook;
  hook.mode = AdversaryMode::passive;
  for (int c : compromised) hook.compromised.insert(PlayerId{c});
  net.attach_adversary(hook);
  DotResult res = run_dsdp(inst, net);

  AttackOutcome out;
  fill_abort(out, res);
  if (res.aborted()) {
    out.note = "run did not complete";
    return out;
  }
  auto missing = [&](int p) {
    out.note = "missing key of P" + std::to_string(p);
    return out;
  };
  // Alice's u and r are needed in every case.
  if (!compromised.contains(1)) return missing(1);
  const auto& log = net.adversary_log();
  auto ring_sk = [&](int p) -> const KeyPair& { return net.keys(PlayerId{p}).ring; };
  auto running_sum_at = [&](int p) -> std::optional<BigInt> {
    // What P_p decrypts: alpha_2 for the head, beta_p otherwise.
    const Message* m = p == 2 ? find_delivered(log, PlayerId{2}, "alpha", 2)
                              : find_delivered(log, PlayerId{p}, "beta", p);
    if (m == nullptr) return std::nullopt;
    const KeyPair& kp = ring_sk(p);
    return decrypt(kp.sk, Ciphertext{cipher_field(*m, p == 2 ? "alpha" : "beta"), kp.pk.key_id});
  };

  const std::size_t ti = static_cast<std::size_t>(target - 2);  // ring position
  BigInt before = 0;
  if (target > 2) {
    if (!compromised.contains(target - 1)) return missing(target - 1);
    auto s = running_sum_at(target - 1);
    if (!s) return missing(target - 1);
    before = *s;
  }
  BigInt through;  // Delta_target
  if (target < n) {
    if (!compromised.contains(target + 1)) return missing(target + 1);
    auto s = running_sum_at(target + 1);
    if (!s) return missing(target + 1);
    const BigInt known = res.trace.u[ti + 1] * inst.V[target] + res.trace.r[ti + 1];
    through = mod(*s - known, ring_sk(target + 1).pk.N);
  } else {
    through = res.trace.gamma_plain;
  }
  const BigInt uv = mod(through - before - res.trace.r[ti], ring_sk(target).pk.N);
  out.recovered = divide_out(uv, res.trace.u[ti]);
  if (!out.recovered) {
    out.note = "u_i does not determine v_i (inconclusive)";
    return out;
  }
  out.succeeded = *out.recovered == inst.V[target - 1];
  out.note = out.succeeded ? "target value isolated between its neighbours" : "recovery failed";
  return out;
}

// ---------------------------------------------------------------------------
// Monte Carlo

ExposurePredicate default_predicate(int n) {
  return n % 2 == 1 ? ExposurePredicate::group : ExposurePredicate::ring_neighbor;
}

namespace {

struct Trial {
  int n;
  std::vector<char> malicious;  // by player index
  std::vector<int> honest;
  std::vector<std::vector<int>> blocks;  // ring positions 2..n
};

Trial draw_trial(int n, int k, Rng& rng) {
  Trial t{n, std::vector<char>(n + 1, 0), {}, partition_blocks(n, 1).blocks()};
  t.malicious[1] = 1;
  std::vector<int> others;
  for (int i = 2; i <= n; ++i) others.push_back(i);
  for (int c = 0; c < k - 1; ++c) {
    std::size_t pick = c + rng.uniform(others.size() - c);
    std::swap(others[c], others[pick]);
    t.malicious[others[c]] = 1;
  }
  for (int i = 2; i <= n; ++i)
    if (!t.malicious[i]) t.honest.push_back(i);
  return t;
}

// Marks honest players that are safe under one random ring order.
void mark_safe(const Trial& t, Rng& rng, ExposurePredicate pred, std::vector<char>& safe) {
  std::vector<int> order;
  for (int i = 2; i <= t.n; ++i) order.push_back(i);
  std::shuffle(order.begin(), order.end(), rng);
  if (pred == ExposurePredicate::group) {
    for (const auto& block : t.blocks) {
      int honest_in_block = 0;
      for (int pos : block) honest_in_block += !t.malicious[order[pos - 2]];
      if (honest_in_block < 2) continue;
      for (int pos : block)
        if (!t.malicious[order[pos - 2]]) safe[order[pos - 2]] = 1;
    }
  } else {
    const std::size_t m = order.size();
    for (std::size_t p = 0; p < m; ++p) {
      const int me = order[p];
      if (t.malicious[me]) continue;
      const int prev = p == 0 ? 1 : order[p - 1];
      const int next = p + 1 == m ? 1 : order[p + 1];
      if (!(t.malicious[prev] && t.malicious[next])) safe[me] = 1;
    }
  }
}

void check_mc(int n, int k, int trials, int min_k) {
  if (n < 3) throw ParameterError("Monte Carlo needs n >= 3");
  if (k < min_k || k > n - 2) throw ParameterError("Monte Carlo needs 2 <= k <= n-2");
  if (trials < 1) throw ParameterError("Monte Carlo needs at least one trial");
}

double breach_probability(int n, int k, int d, int trials, std::uint64_t seed,
                          ExposurePredicate pred) {
  long breaches = 0;
  for (int t = 0; t < trials; ++t) {
    Rng rng(derive_seed(seed, "trial:" + std::to_string(t)));
    Trial tr = draw_trial(n, k, rng);
    std::vector<char> safe(n + 1, 0);
    for (int o = 0; o < d; ++o) mark_safe(tr, rng, pred, safe);
    bool breach = false;
    for (int h : tr.honest) breach = breach || !safe[h];
    breaches += breach;
  }
  return static_cast<double>(breaches) / trials;
}

}  // namespace

double wiretap_breach_probability(int n, int k, int d, int trials, std::uint64_t seed,
                                  ExposurePredicate predicate) {
  check_mc(n, k, trials, 2);
  if (d < 1) throw ParameterError("Monte Carlo needs d >= 1");
  return breach_probability(n, k, d, trials, seed, predicate);
}

double wiretap_breach_probability(int n, int k, int d, int trials, std::uint64_t seed) {
  return wiretap_breach_probability(n, k, d, trials, seed, default_predicate(n));
}

double mean_occurrences_to_safety(int n, int k, int trials, std::uint64_t seed,
                                  ExposurePredicate predicate) {
  check_mc(n, k, trials, 2);
  constexpr int kMaxOccurrences = 100'000;
  double total = 0;
  for (int t = 0; t < trials; ++t) {
    Rng rng(derive_seed(seed, "trial:" + std::to_string(t)));
    Trial tr = draw_trial(n, k, rng);
    std::vector<char> safe(n + 1, 0);
    int occ = 0;
    auto all_safe = [&] {
      return std::all_of(tr.honest.begin(), tr.honest.end(), [&](int h) { return safe[h]; });
    };
    while (!all_safe()) {
      if (++occ > kMaxOccurrences) throw ConfigurationError("honest players can never be safe");
      mark_safe(tr, rng, predicate, safe);
    }
    total += occ;
  }
  return total / trials;
}

double breach_closed_form(int n, int d) {
  if (n < 3 || d < 0) throw ParameterError("breach_closed_form: bad parameters");
  return std::pow(1.0 - 1.0 / (n - 1), d);
}

// ---------------------------------------------------------------------------
// Scenarios

AttackScenario scenario_from_json(const json& j) {
  try {
    AttackScenario s;
    s.attack = j.value("attack", s.attack);
    s.n = j.value("n", s.n);
    if (j.contains("B")) {
      s.B = j["B"].is_string() ? from_hex(j["B"].get<std::string>())
                               : BigInt(std::to_string(j["B"].get<long long>()));
    }
    if (j.contains("mode")) s.mode = mode_from_name(j["mode"].get<std::string>());
    s.seed = j.value("seed", s.seed);
    if (j.contains("compromised")) s.compromised = j["compromised"].get<std::set<int>>();
    if (j.contains("target")) {
      s.target = j["target"].is_object() ? j["target"].at("player").get<int>()
                                         : j["target"].get<int>();
    }
    if (j.contains("countermeasures")) {
      const json& c = j["countermeasures"];
      s.proofs = c.value("proofs", false);
      s.signatures = c.value("signatures", false);
      s.wiretap_d = c.value("wiretap", 0);
    }
    s.replay = j.value("replay", false);
    s.trials = j.value("trials", s.trials);
    static const std::set<std::string> kinds{"alice", "charlie", "sandwich", "wiretap"};
    if (!kinds.contains(s.attack)) throw FormatError("unknown attack '" + s.attack + "'");
    for (int c : s.compromised) {
      if (c < 1 || c > s.n) throw FormatError("compromised player outside 1..n");
    }
    return s;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed scenario: ") + e.what());
  } catch (const ConfigurationError& e) {
    throw FormatError(e.what());
  }
}

json scenario_to_json(const AttackScenario& s) {
  return json{{"attack", s.attack},
              {"n", s.n},
              {"B", to_hex(s.B)},
              {"mode", std::string(mode_name(s.mode))},
              {"seed", s.seed},
              {"compromised", s.compromised},
              {"target", {{"player", s.target}}},
              {"countermeasures",
               {{"proofs", s.proofs}, {"signatures", s.signatures}, {"wiretap", s.wiretap_d}}},
              {"replay", s.replay},
              {"trials", s.trials}};
}

AttackReport evaluate_scenario(const AttackScenario& s) {
  AttackReport rep;
  rep.attack = s.attack;
  if (s.attack == "wiretap") {
    std::set<int> bad = s.compromised;
    bad.insert(1);
    const int k = static_cast<int>(bad.size());
    int d = s.wiretap_d;
    if (d <= 0) {
      d = (s.n % 2 == 1 && k >= 2 && k <= s.n - 2)
              ? static_cast<int>(std::ceil(avg_bound_thm4(s.n, k)))
              : static_cast<int>(std::ceil(worst_bound_prop1(s.n, 0.5)));
      d = std::max(d, 1);
    }
    rep.d = d;
    if (k > s.n - 2) throw ParameterError("wiretap scenario needs at least two honest players");
    // With the master alone there is nobody to sandwich a ring player.
    double p = k == 1 ? breach_probability(s.n, 1, d, s.trials, s.seed, default_predicate(s.n))
                      : wiretap_breach_probability(s.n, k, d, s.trials, s.seed);
    rep.breach_estimate = p;
    rep.outcome.succeeded = p >= 0.5;
    rep.outcome.note = "breach estimate over " + std::to_string(s.trials) + " trials";
    return rep;
  }
  // Alice's coefficients are kept away from 0 so that the sandwich can divide.
  DotProductInstance inst = random_instance(s.n, s.B, s.mode, s.seed, s.B >= 2 ? 2 : 0);
  inst.proofs_enabled = s.proofs;
  inst.signatures_enabled = s.signatures;
  Network net = make_dot_network(inst, s.seed);
  if (s.attack == "alice") {
    rep.outcome = attack_alice_key(inst, net, PlayerId{s.target});
  } else if (s.attack == "charlie") {
    rep.outcome = attack_charlie_key(inst, net, s.replay);
  } else {
    rep.outcome = attack_sandwich(inst, net, s.target, s.compromised);
  }
  return rep;
}

json report_to_json(const AttackReport& r) {
  json j;
  j["attack"] = r.attack;
  j["succeeded"] = r.outcome.succeeded;
  j["recovered"] = r.outcome.recovered ? json(to_hex(*r.outcome.recovered)) : json(nullptr);
  j["abort_step"] = r.outcome.abort_step ? json(*r.outcome.abort_step) : json(nullptr);
  if (r.outcome.abort) {
    j["abort_player"] = r.outcome.abort->player.index;
    j["abort_reason"] = r.outcome.abort->reason;
  }
  j["note"] = r.outcome.note;
  if (r.breach_estimate) {
    j["breach_estimate"] = *r.breach_estimate;
    j["d"] = r.d;
  }
  return j;
}

}  // namespace dsmm
