#pragma once

// Executable versions of the known attacks on the ring dot product and a
// Monte-Carlo model of the wiretap repetition.

#include <cstdint>
#include <optional>
#include <set>
#include <string>

#include <json.hpp>

#include "dsmm/bigint.hpp"
#include "dsmm/dot_protocols.hpp"
#include "dsmm/net_sim.hpp"

namespace dsmm {

struct AttackOutcome {
  std::optional<BigInt> recovered;
  bool succeeded = false;  // recovered equals the target's true secret
  std::optional<std::string> abort_step;
  std::optional<AbortInfo> abort;
  std::string note;
};

// Compromised master: every alpha except the target's is replaced by an
// encryption of 0 and the target's by c^{u'} E(r') with u', r' chosen by the
// adversary. The instance's proofs flag toggles the countermeasure.
AttackOutcome attack_alice_key(const DotProductInstance& inst, Network& net, PlayerId target);

// Compromised P_n, honest master: all traffic to and from P_1 is blocked and
// P_1's alphas are forged (or, with `replay`, the genuine signed alphas are
// replayed unchanged). Target is P_2. Signatures toggle the countermeasure.
AttackOutcome attack_charlie_key(const DotProductInstance& inst, Network& net, bool replay = false);

// Passive coalition: recovers v_i from the running sums seen by P_{i-1} and
// P_{i+1} plus the master's u and r. Succeeds only with all three keys.
AttackOutcome attack_sandwich(const DotProductInstance& inst, Network& net, int target,
                              const std::set<int>& compromised);

// Which honest players count as exposed in one occurrence.
enum class ExposurePredicate {
  group,          // paired (within a PDSMM block) only with malicious players
  ring_neighbor,  // both ring neighbours malicious
};

// Default predicate for n: group for odd n, ring neighbour otherwise.
ExposurePredicate default_predicate(int n);

// Malicious players are P_1 plus k-1 others drawn per trial. Returns the
// fraction of trials where some honest player is exposed in all d occurrences.
double wiretap_breach_probability(int n, int k, int d, int trials, std::uint64_t seed);
double wiretap_breach_probability(int n, int k, int d, int trials, std::uint64_t seed,
                                  ExposurePredicate predicate);

// Mean number of occurrences until every honest player was safe at least once.
double mean_occurrences_to_safety(int n, int k, int trials, std::uint64_t seed,
                                  ExposurePredicate predicate);

// Closed form claimed for k = n-2: (1 - 1/(n-1))^d.
double breach_closed_form(int n, int d);

// Scenario files: {attack, n, B, mode, seed, compromised, target,
// countermeasures: {proofs, signatures, wiretap}, replay, trials}.
struct AttackScenario {
  std::string attack = "alice";  // alice | charlie | sandwich | wiretap
  int n = 3;
  BigInt B = 100;
  CipherMode mode = CipherMode::shared_modulus;
  std::uint64_t seed = 1;
  std::set<int> compromised{1};
  int target = 2;
  bool proofs = false;
  bool signatures = false;
  int wiretap_d = 0;  // 0: derive from the average-case bound
  bool replay = false;
  int trials = 10'000;
};

AttackScenario scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const AttackScenario& s);

struct AttackReport {
  std::string attack;
  AttackOutcome outcome;
  std::optional<double> breach_estimate;
  int d = 0;
};

AttackReport evaluate_scenario(const AttackScenario& s);
nlohmann::json report_to_json(const AttackReport& r);

}  // namespace dsmm
