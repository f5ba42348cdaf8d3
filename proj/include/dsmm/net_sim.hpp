#pragma once

// Deterministic synchronous message-passing simulator.
//
// Messages posted while a round is being processed are delivered together at
// the next round boundary, ordered by (round, sender, tag, receiver). An
// attached adversary observes every delivered message and, in active mode,
// may drop, replace or inject messages before delivery.

#include <compare>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dsmm/bigint.hpp"
#include "dsmm/dlog_group.hpp"
#include "dsmm/hom_cipher.hpp"

namespace dsmm {

struct PlayerId {
  int index = 0;  // 1-based; P_1 is the master of a plain dot product

  auto operator<=>(const PlayerId&) const = default;
};

struct Message {
  PlayerId from;
  PlayerId to;
  int round = 0;
  std::string tag;      // "<session>/<step><index>"
  std::string payload;  // canonical JSON
  std::optional<std::string> signature;

  std::size_t byte_size() const {
    return payload.size() + (signature ? signature->size() : 0);
  }
  // Session part of the tag (before the first '/').
  std::string_view session() const;
  // Step name without the trailing index ("alpha" for ".../alpha3").
  std::string phase() const;

  friend bool operator==(const Message&, const Message&) = default;
};

// Bytes covered by a signature: canonical JSON of (from, to, round, tag, payload).
std::string signing_bytes(const Message& msg);
Message sign_message(const DlogGroup& group, const SigningKey& key, Message msg);
bool verify_message(const DlogGroup& group, const BigInt& public_y, const Message& msg);

std::string to_json_line(const Message& msg);
Message message_from_json_line(std::string_view line);

struct PhaseStats {
  std::size_t messages = 0;
  std::size_t bytes = 0;
};

struct Metrics {
  std::size_t message_count = 0;
  std::size_t total_bytes = 0;
  int round_count = 0;
  std::map<std::string, PhaseStats> phases;
};

// Key material of one player. `ring` is used when the player sits in a
// dot-product ring; `master` receives the final gamma when the player leads
// one. In shared-modulus directories both are the same key pair.
struct PlayerKeys {
  KeyPair ring;
  KeyPair master;
  SigningKey signing;
};

struct KeyDirectory {
  Scheme scheme = Scheme::shared_modulus;
  BigInt B;   // coefficient bound the keys were sized for
  int d = 1;  // wiretap repetition factor the keys were sized for
  std::vector<PlayerKeys> players;

  int size() const { return static_cast<int>(players.size()); }
};

// Every player gets an independent shared-modulus key over Z_M.
KeyDirectory make_shared_directory(int n, const BigInt& M, std::size_t bit_length, Rng& rng,
                                   const BigInt& search_bound = default_search_bound());
// P_2..P_n receive an increasing modulus chain; P_1 a master key above it.
KeyDirectory make_chain_directory(int n, const BigInt& B, int d, int bit_slack, Rng& rng);
// Same, from an existing chain for P_2..P_n.
KeyDirectory chain_directory_from(const ModulusChain& chain, Rng& rng);
// Every player gets a ring key in its own interval (any increasing selection
// of up to three is a valid chain) and a master key above all ring keys.
KeyDirectory make_group_chain_directory(int n, const BigInt& B, int d, int bit_slack, Rng& rng);
// Independent Paillier keys; P_1's modulus exceeds master_floor and every
// other modulus exceeds member_floor.
KeyDirectory make_paillier_directory(int n, std::size_t bit_length, const BigInt& master_floor,
                                     const BigInt& member_floor, Rng& rng);

enum class AdversaryMode { none, passive, active };

class Network;

// Capabilities handed to an active interceptor.
class AdversaryControl {
 public:
  explicit AdversaryControl(Network& net) : net_(net) {}

  // Deliver a forged or replayed message at the next round boundary.
  void inject(Message msg);
  // Secret material of compromised players only.
  const PlayerKeys* compromised_keys(PlayerId id) const;
  // Signs with a compromised player's key; throws for honest players.
  Message sign_as(PlayerId id, Message msg) const;
  const std::vector<Message>& observed() const;
  int round() const;

 private:
  Network& net_;
};

// Returns the messages to deliver in place of `in_flight`: empty to drop,
// the original to pass, anything else to replace.
using Interceptor = std::function<std::vector<Message>(const Message&, AdversaryControl&)>;

struct AdversaryHook {
  AdversaryMode mode = AdversaryMode::none;
  std::set<PlayerId> compromised;
  Interceptor interceptor;
};

class Network {
 public:
  Network(KeyDirectory directory, std::uint64_t seed, const DlogGroup& group = default_group());

  int size() const { return directory_.size(); }
  std::uint64_t seed() const { return seed_; }
  const KeyDirectory& directory() const { return directory_; }
  const PlayerKeys& keys(PlayerId id) const;
  const DlogGroup& group() const { return group_; }
  Rng& rng(PlayerId id);

  // Queue a message from `from` to `to` for the next round boundary.
  void post(PlayerId from, PlayerId to, std::string tag, std::string payload, bool sign);
  // Queue a fully formed message (round field is kept as given).
  void send(Message msg);
  std::vector<Message> deliver_round();
  bool idle() const { return queue_.empty() && injected_ready_.empty(); }
  int round() const { return round_; }

  const std::vector<Message>& transcript() const { return transcript_; }
  Metrics metrics_snapshot() const;

  void attach_adversary(AdversaryHook hook);
  const AdversaryHook& adversary() const { return hook_; }
  bool is_compromised(PlayerId id) const { return hook_.compromised.contains(id); }
  // Copies of every delivered message, as seen by an attached adversary.
  const std::vector<Message>& adversary_log() const { return adversary_log_; }

 private:
  friend class AdversaryControl;

  void check_player(PlayerId id, std::string_view what) const;

  KeyDirectory directory_;
  std::uint64_t seed_;
  DlogGroup group_;
  std::map<int, Rng> rngs_;
  std::vector<Message> queue_;
  std::vector<Message> injected_;
  std::vector<Message> injected_ready_;
  std::vector<Message> transcript_;
  std::vector<Message> adversary_log_;
  AdversaryHook hook_;
  int round_ = 0;
  std::uint64_t sequence_ = 0;
  std::map<std::string, PhaseStats> phases_;
  std::size_t total_bytes_ = 0;
  int last_delivery_round_ = 0;
};

Network create_network(int n, KeyDirectory directory, std::uint64_t seed);

void export_transcript(std::ostream& out, std::span<const Message> transcript);
std::vector<Message> import_transcript(std::istream& in);
// CSV row protocol,n,d,messages,bytes,rounds,seed
std::string metrics_csv_header();
std::string metrics_csv_row(std::string_view protocol, int n, int d, const Metrics& m,
                            std::uint64_t seed);

// A protocol instance driven by run_sessions. Tags of its messages start
// with id() followed by '/'.
class Session {
 public:
  virtual ~Session() = default;
  virtual const std::string& id() const = 0;
  virtual void start(Network& net) = 0;
  virtual void on_message(Network& net, const Message& msg) = 0;
};

// Starts every session and delivers rounds until the network is idle.
void run_sessions(Network& net, std::span<Session* const> sessions, int max_rounds = 100'000);

}  // namespace dsmm
