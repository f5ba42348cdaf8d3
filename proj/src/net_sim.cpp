#include "dsmm/net_sim.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <unordered_map>

#include <json.hpp>

#include "dsmm/error.hpp"

namespace dsmm {

using nlohmann::json;

std::string_view Message::session() const {
  std::string_view t = tag;
  auto slash = t.find('/');
  return slash == std::string_view::npos ? t : t.substr(0, slash);
}

std::string Message::phase() const {
  std::string_view t = tag;
  auto slash = t.rfind('/');
  std::string_view step = slash == std::string_view::npos ? t : t.substr(slash + 1);
  while (!step.empty() && step.back() >= '0' && step.back() <= '9') step.remove_suffix(1);
  return std::string(step);
}

std::string signing_bytes(const Message& msg) {
  json j = {{"from", msg.from.index},
            {"to", msg.to.index},
            {"round", msg.round},
            {"tag", msg.tag},
            {"payload", msg.payload}};
  return j.dump();
}

Message sign_message(const DlogGroup& group, const SigningKey& key, Message msg) {
  msg.signature = schnorr_sign(group, key, signing_bytes(msg));
  return msg;
}

bool verify_message(const DlogGroup& group, const BigInt& public_y, const Message& msg) {
  if (!msg.signature) return false;
  return schnorr_verify(group, public_y, signing_bytes(msg), *msg.signature);
}

std::string to_json_line(const Message& msg) {
  json j = {{"from", msg.from.index},
            {"to", msg.to.index},
            {"round", msg.round},
            {"tag", msg.tag},
            {"payload", msg.payload}};
  j["signature"] = msg.signature ? json(*msg.signature) : json(nullptr);
  return j.dump();
}

Message message_from_json_line(std::string_view line) {
  try {
    json j = json::parse(line);
    Message m;
    m.from = PlayerId{j.at("from").get<int>()};
    m.to = PlayerId{j.at("to").get<int>()};
    m.round = j.at("round").get<int>();
    m.tag = j.at("tag").get<std::string>();
    m.payload = j.at("payload").get<std::string>();
    if (j.contains("signature") && !j["signature"].is_null()) {
      m.signature = j["signature"].get<std::string>();
    }
    return m;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed transcript line: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Key directories

namespace {

SigningKey signing_key_for(Rng& rng) { return make_signing_key(default_group(), rng); }

// Master keys live above every ring modulus.
KeyPair master_key_above(const BigInt& ring_max, Rng& rng) {
  BigInt lo = pow2(bit_length(ring_max));
  return paillier_keygen(16, rng, Interval{lo, 2 * lo});
}

}  // namespace

KeyDirectory make_shared_directory(int n, const BigInt& M, std::size_t bit_length_, Rng& rng,
                                   const BigInt& search_bound) {
  if (n < 1) throw ConfigurationError("directory needs at least one player");
  KeyDirectory dir;
  dir.scheme = Scheme::shared_modulus;
  for (int i = 1; i <= n; ++i) {
    Rng prng = rng.derive("shared-key:" + std::to_string(i));
    KeyPair kp = shared_modulus_keygen(M, bit_length_, prng, search_bound);
    dir.players.push_back({kp, kp, signing_key_for(prng)});
  }
  return dir;
}

KeyDirectory chain_directory_from(const ModulusChain& chain, Rng& rng) {
  if (chain.keys.empty()) throw ConfigurationError("empty modulus chain");
  KeyDirectory dir;
  dir.scheme = Scheme::paillier_like;
  dir.B = chain.B;
  dir.d = chain.d;
  BigInt top = 0;
  for (const auto& k : chain.keys) top = std::max(top, k.pk.N);
  Rng mrng = rng.derive("master-key");
  KeyPair master = master_key_above(top, mrng);
  dir.players.push_back({master, master, signing_key_for(mrng)});
  for (std::size_t i = 0; i < chain.keys.size(); ++i) {
    Rng srng = rng.derive("signing:" + std::to_string(i + 2));
    dir.players.push_back({chain.keys[i], chain.keys[i], signing_key_for(srng)});
  }
  return dir;
}

KeyDirectory make_chain_directory(int n, const BigInt& B, int d, int bit_slack, Rng& rng) {
  Rng crng = rng.derive("chain");
  ModulusChain chain = build_modulus_chain(n, B, d, bit_slack, crng);
  return chain_directory_from(chain, rng);
}

KeyDirectory make_group_chain_directory(int n, const BigInt& B, int d, int bit_slack, Rng& rng) {
  if (n < 3) throw ConfigurationError("group chain directory needs n >= 3");
  Rng crng = rng.derive("group-chain");
  ModulusChain chain = build_group_chain(n, B, d, 4, bit_slack, crng);
  BigInt top = 0;
  for (const auto& k : chain.keys) top = std::max(top, k.pk.N);
  KeyDirectory dir;
  dir.scheme = Scheme::paillier_like;
  dir.B = B;
  dir.d = d;
  for (int i = 1; i <= n; ++i) {
    Rng prng = rng.derive("player:" + std::to_string(i));
    KeyPair master = master_key_above(top, prng);
    dir.players.push_back({chain.keys[i - 1], master, signing_key_for(prng)});
  }
  return dir;
}

KeyDirectory make_paillier_directory(int n, std::size_t bit_length_, const BigInt& master_floor,
                                     const BigInt& member_floor, Rng& rng) {
  if (n < 1) throw ConfigurationError("directory needs at least one player");
  KeyDirectory dir;
  dir.scheme = Scheme::paillier_like;
  for (int i = 1; i <= n; ++i) {
    Rng prng = rng.derive("paillier-key:" + std::to_string(i));
    const BigInt& floor = i == 1 ? master_floor : member_floor;
    KeyPair kp;
    if (bit_length(floor) + 1 < bit_length_) {
      kp = paillier_keygen(bit_length_, prng);
    } else {
      BigInt lo = floor + 1;
      kp = paillier_keygen(bit_length_, prng, Interval{lo, 2 * lo});
    }
    dir.players.push_back({kp, kp, signing_key_for(prng)});
  }
  return dir;
}

// ---------------------------------------------------------------------------
// Adversary control

void AdversaryControl::inject(Message msg) {
  net_.check_player(msg.from, "injected sender");
  net_.check_player(msg.to, "injected receiver");
  net_.injected_.push_back(std::move(msg));
}

const PlayerKeys* AdversaryControl::compromised_keys(PlayerId id) const {
  if (!net_.is_compromised(id)) return nullptr;
  return &net_.keys(id);
}

Message AdversaryControl::sign_as(PlayerId id, Message msg) const {
  const PlayerKeys* k = compromised_keys(id);
  if (k == nullptr) throw ConfigurationError("adversary cannot sign for an honest player");
  return sign_message(net_.group(), k->signing, std::move(msg));
}

const std::vector<Message>& AdversaryControl::observed() const { return net_.adversary_log_; }

int AdversaryControl::round() const { return net_.round(); }

// ---------------------------------------------------------------------------
// Network

Network::Network(KeyDirectory directory, std::uint64_t seed, const DlogGroup& group)
    : directory_(std::move(directory)), seed_(seed), group_(group) {}

const PlayerKeys& Network::keys(PlayerId id) const {
  check_player(id, "player");
  return directory_.players[id.index - 1];
}

Rng& Network::rng(PlayerId id) {
  check_player(id, "player");
  auto it = rngs_.find(id.index);
  if (it == rngs_.end()) {
    it = rngs_.emplace(id.index, Rng(derive_seed(seed_, "player:" + std::to_string(id.index))))
             .first;
  }
  return it->second;
}

void Network::check_player(PlayerId id, std::string_view what) const {
  if (id.index < 1 || id.index > size()) {
    throw RoutingError("unknown " + std::string(what) + " P" + std::to_string(id.index));
  }
}

void Network::post(PlayerId from, PlayerId to, std::string tag, std::string payload, bool sign) {
  Message msg{from, to, round_ + 1, std::move(tag), std::move(payload), std::nullopt};
  check_player(from, "sender");
  check_player(to, "receiver");
  if (sign) msg = sign_message(group_, keys(from).signing, std::move(msg));
  queue_.push_back(std::move(msg));
}

void Network::send(Message msg) {
  check_player(msg.from, "sender");
  check_player(msg.to, "receiver");
  queue_.push_back(std::move(msg));
}

std::vector<Message> Network::deliver_round() {
  ++round_;
  std::vector<Message> pending;
  pending.swap(queue_);
  std::stable_sort(pending.begin(), pending.end(), [](const Message& a, const Message& b) {
    return std::tie(a.round, a.from, a.tag, a.to) < std::tie(b.round, b.from, b.tag, b.to);
  });

  std::vector<Message> delivered;
  // Injected messages are the adversary's own and skip interception.
  std::vector<Message> forged;
  forged.swap(injected_ready_);
  if (hook_.mode == AdversaryMode::active && hook_.interceptor) {
    AdversaryControl control(*this);
    for (const auto& m : pending) {
      for (auto& out : hook_.interceptor(m, control)) {
        check_player(out.from, "sender");
        check_player(out.to, "receiver");
        delivered.push_back(std::move(out));
      }
    }
  } else {
    delivered = std::move(pending);
  }
  for (auto& m : forged) delivered.push_back(std::move(m));
  std::stable_sort(delivered.begin(), delivered.end(), [](const Message& a, const Message& b) {
    return std::tie(a.round, a.from, a.tag, a.to) < std::tie(b.round, b.from, b.tag, b.to);
  });
  // Injected messages wait for the next boundary.
  injected_ready_.swap(injected_);
  injected_.clear();

  for (const auto& m : delivered) {
    transcript_.push_back(m);
    total_bytes_ += m.byte_size();
    auto& ph = phases_[m.phase()];
    ph.messages += 1;
    ph.bytes += m.byte_size();
    if (hook_.mode != AdversaryMode::none) adversary_log_.push_back(m);
  }
  if (!delivered.empty()) last_delivery_round_ = round_;
  return delivered;
}

Metrics Network::metrics_snapshot() const {
  Metrics m;
  m.message_count = transcript_.size();
  m.total_bytes = total_bytes_;
  m.round_count = last_delivery_round_;
  m.phases = phases_;
  return m;
}

void Network::attach_adversary(AdversaryHook hook) {
  for (const auto& id : hook.compromised) check_player(id, "compromised player");
  if (hook.mode == AdversaryMode::active && !hook.interceptor) {
    throw ConfigurationError("active adversary needs an interceptor");
  }
  hook_ = std::move(hook);
}

Network create_network(int n, KeyDirectory directory, std::uint64_t seed) {
  if (n < 3) throw ConfigurationError("a network needs at least 3 players");
  if (directory.size() != n) {
    throw ConfigurationError("key directory holds " + std::to_string(directory.size()) +
                             " players, expected " + std::to_string(n));
  }
  return Network(std::move(directory), seed);
}

void export_transcript(std::ostream& out, std::span<const Message> transcript) {
  for (const auto& m : transcript) out << to_json_line(m) << '\n';
}

std::vector<Message> import_transcript(std::istream& in) {
  std::vector<Message> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(message_from_json_line(line));
  }
  return out;
}

std::string metrics_csv_header() { return "protocol,n,d,messages,bytes,rounds,seed"; }

std::string metrics_csv_row(std::string_view protocol, int n, int d, const Metrics& m,
                            std::uint64_t seed) {
  return std::string(protocol) + "," + std::to_string(n) + "," + std::to_string(d) + "," +
         std::to_string(m.message_count) + "," + std::to_string(m.total_bytes) + "," +
         std::to_string(m.round_count) + "," + std::to_string(seed);
}

void run_sessions(Network& net, std::span<Session* const> sessions, int max_rounds) {
  std::unordered_map<std::string, Session*> by_id;
  for (Session* s : sessions) {
    if (!by_id.emplace(s->id(), s).second) {
      throw ConfigurationError("duplicate session id " + s->id());
    }
  }
  for (Session* s : sessions) s->start(net);
  int rounds = 0;
  while (!net.idle()) {
    if (++rounds > max_rounds) throw ConfigurationError("run_sessions: round limit exceeded");
    for (const Message& m : net.deliver_round()) {
      auto it = by_id.find(std::string(m.session()));
      if (it != by_id.end()) it->second->on_message(net, m);
    }
  }
}

}  // namespace dsmm
