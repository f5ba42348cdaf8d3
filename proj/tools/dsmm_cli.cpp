// dsmm: run the distributed dot-product and matrix protocols from the shell.
//
// Exit codes: 0 ok, 2 usage or validation error, 3 protocol abort,
// 4 attack succeeded.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "dsmm/adversary_lab.hpp"
#include "dsmm/bench.hpp"
#include "dsmm/dot_protocols.hpp"
#include "dsmm/error.hpp"
#include "dsmm/hom_cipher.hpp"
#include "dsmm/io.hpp"
#include "dsmm/matmul_protocols.hpp"

using namespace dsmm;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 2;
constexpr int kAbort = 3;
constexpr int kAttackSucceeded = 4;

struct Common {
  int n = 3;
  std::string B = "100";  // decimal
  int d = 1;
  int p = 2;
  std::uint64_t seed = 1;
  std::string mode = "shared";
  bool proofs = false;
  bool signatures = false;
  std::string out;
  std::string metrics;
  std::string transcript;
};

void emit(const std::string& path, const json& j) {
  if (path.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    write_json_file(path, j);
  }
}

void emit_metrics(const Common& c, const std::string& protocol, int n, int d, const Metrics& m) {
  if (c.metrics.empty()) return;
  write_text_file(c.metrics,
                  metrics_csv_header() + "\n" + metrics_csv_row(protocol, n, d, m, c.seed) + "\n");
}

void emit_transcript(const Common& c, const Network& net) {
  if (c.transcript.empty()) return;
  std::ofstream out(c.transcript, std::ios::binary);
  if (!out) throw ConfigurationError("cannot write " + c.transcript);
  export_transcript(out, net.transcript());
}

BigInt parse_bound(const std::string& s) {
  BigInt b;
  if (s.empty() || b.set_str(s, 10) != 0 || b < 0) throw ParameterError("bad bound B: " + s);
  return b;
}

int cmd_keygen(const Common& c, const std::string& scheme, std::size_t bits) {
  Rng rng(derive_seed(c.seed, "keygen"));
  KeyPair kp;
  if (scheme == "paillier") {
    kp = paillier_keygen(bits, rng);
  } else if (scheme == "shared") {
    const BigInt M = shared_plain_modulus(c.n, parse_bound(c.B), c.d);
    kp = shared_modulus_keygen(M, std::max(bits, shared_key_bits(M)), rng, M);
  } else {
    throw ParameterError("unknown scheme '" + scheme + "'");
  }
  emit(c.out, key_to_json(kp.pk, &kp.sk));
  return kOk;
}

int cmd_dotprod(const Common& c, const std::string& protocol, const std::string& input) {
  InstanceFile f;
  if (!input.empty()) {
    f = instance_from_json(read_json_file(input));
  } else {
    f.protocol = protocol;
    f.seed = c.seed;
    f.inst = random_instance(c.n, parse_bound(c.B), mode_from_name(c.mode), c.seed);
    f.inst.proofs_enabled = c.proofs;
    f.inst.signatures_enabled = c.signatures;
  }
  f.inst.validate();
  const DotProductInstance& inst = f.inst;
  std::optional<BigInt> S;
  Metrics metrics;
  std::optional<AbortInfo> abort;
  int d = 1;
  auto finish = [&](const Network& net) {
    emit_transcript(c, net);
    emit_metrics(c, f.protocol, inst.n, d, metrics);
    emit(c.out, result_to_json(S, metrics, abort));
  };
  if (f.protocol == "wiretap") {
    d = c.d;
    Network net = make_wiretap_network(inst, d, f.seed);
    WiretapResult r = run_wiretap(inst, d, net);
    S = r.S;
    metrics = r.metrics;
    abort = r.abort;
    finish(net);
  } else {
    if (f.protocol == "mpwp" && inst.mode != CipherMode::shared_modulus) {
      throw ParameterError("MPWP runs in shared mode only");
    }
    Network net = f.protocol == "dsdp"    ? make_dot_network(inst, f.seed)
                  : f.protocol == "mpwp"  ? make_mpwp_network(inst, f.seed)
                  : f.protocol == "pmpwp" ? make_pmpwp_network(inst, f.seed)
                                          : throw ParameterError("unknown protocol '" + f.protocol + "'");
    DotResult r = f.protocol == "dsdp"   ? run_dsdp(inst, net)
                  : f.protocol == "mpwp" ? run_mpwp(inst, net)
                                         : run_pmpwp(inst, net);
    S = r.S;
    metrics = r.metrics;
    abort = r.abort;
    finish(net);
  }
  if (abort) {
    std::cerr << "aborted at " << abort->step << " by P" << abort->player.index << ": "
              << abort->reason << "\n";
    return kAbort;
  }
  return kOk;
}

Matrix seeded_matrix(int n, const BigInt& bound, Rng& rng) {
  Matrix M(n, std::vector<BigInt>(n));
  for (auto& row : M)
    for (auto& x : row) x = rng.below(bound + 1);
  return M;
}

int report_matmul_abort(const std::optional<MatmulAbort>& a) {
  if (!a) return kOk;
  std::cerr << "aborted in C[" << a->row << "][" << a->col << "] block " << a->block << " at "
            << a->info.step << ": " << a->info.reason << "\n";
  return kAbort;
}

json matmul_result_json(const json& C, const Metrics& m, const std::optional<MatmulAbort>& a) {
  json j;
  j["C"] = a ? json(nullptr) : C;
  j["metrics"] = metrics_to_json(m);
  j["aborted"] = a.has_value();
  j["abort_reason"] = a ? json(a->info.reason) : json(nullptr);
  return j;
}

int cmd_matmul(const Common& c, bool identity, const std::string& a_path,
               const std::string& b_path) {
  const BigInt bound = parse_bound(c.B);
  const CipherMode mode = mode_from_name(c.mode);
  Matrix A, B;
  if (identity) {
    A.assign(c.n, std::vector<BigInt>(c.n, 0));
    for (int i = 0; i < c.n; ++i) A[i][i] = 1;
    B = A;
  } else if (!a_path.empty() || !b_path.empty()) {
    if (a_path.empty() || b_path.empty()) throw ParameterError("--a and --b go together");
    A = matrix_from_json(read_json_file(a_path));
    B = matrix_from_json(read_json_file(b_path));
  } else {
    Rng rng(derive_seed(c.seed, "matrices"));
    A = seeded_matrix(c.n, bound, rng);
    B = seeded_matrix(c.n, bound, rng);
  }
  const int n = static_cast<int>(A.size());
  if (n < 3) throw ParameterError("PDSMM needs n >= 3");
  Network net = make_pdsmm_network(n, std::max(bound, BigInt(1)), mode, c.seed);
  MatmulResult r = run_pdsmm(A, B, std::max(bound, BigInt(1)), net,
                             MatmulOptions{mode, c.proofs, c.signatures});
  emit_transcript(c, net);
  emit_metrics(c, "pdsmm", n, 1, r.metrics);
  emit(c.out, matmul_result_json(matrix_to_json(r.C), r.metrics, r.abort));
  return report_matmul_abort(r.abort);
}

int cmd_trust(const Common& c, const std::string& a_path, const std::string& b_path) {
  if (c.n < 3) throw ParameterError("PDSMM needs n >= 3");
  if (c.p < 1) throw ParameterError("precision p must be >= 1");
  const BigInt M = trust_plain_modulus(c.n, c.p);
  TrustMatrix A, B;
  if (!a_path.empty() || !b_path.empty()) {
    if (a_path.empty() || b_path.empty()) throw ParameterError("--a and --b go together");
    A = trust_matrix_from_json(read_json_file(a_path), M);
    B = trust_matrix_from_json(read_json_file(b_path), M);
    if (static_cast<int>(A.size()) != c.n) throw ParameterError("matrix size differs from --n");
  } else {
    // Proportions with step 2^-p, encoded as integers in [0, 2^p].
    Rng rng(derive_seed(c.seed, "matrices"));
    const std::uint64_t steps = (std::uint64_t{1} << c.p) + 1;
    auto draw = [&] {
      TrustMatrix T;
      for (int i = 0; i < c.n; ++i) {
        std::vector<TrustPair> row;
        for (int j = 0; j < c.n; ++j) {
          const BigInt a = rng.uniform(steps);
          const BigInt b = rng.uniform(steps);
          row.emplace_back(a, b, M);
        }
        T.push_back(std::move(row));
      }
      return T;
    };
    A = draw();
    B = draw();
  }
  Network net = make_trust_network(c.n, M, c.seed);
  TrustMatmulResult r = run_pdsmm_trust(A, B, net);
  emit_transcript(c, net);
  emit_metrics(c, "pdsmm_trust", c.n, 1, r.metrics);
  json j = matmul_result_json(trust_matrix_to_json(r.C), r.metrics, r.abort);
  j["ring"] = to_hex(M);
  emit(c.out, j);
  return report_matmul_abort(r.abort);
}

int cmd_attack(const Common& c, const std::string& scenario_path) {
  AttackScenario s = scenario_from_json(read_json_file(scenario_path));
  AttackReport rep = evaluate_scenario(s);
  emit(c.out, report_to_json(rep));
  return rep.outcome.succeeded ? kAttackSucceeded : kOk;
}

int cmd_bench(const Common& c, const std::vector<std::string>& protocols,
              const std::vector<int>& sizes) {
  auto sweeps = default_sweeps();
  if (!protocols.empty()) {
    std::map<std::string, std::vector<int>> chosen;
    for (const auto& p : protocols) {
      if (!sweeps.contains(p)) throw ParameterError("unknown bench protocol '" + p + "'");
      chosen[p] = sizes.empty() ? sweeps[p] : sizes;
    }
    sweeps = std::move(chosen);
  } else if (!sizes.empty()) {
    for (auto& [p, ns] : sweeps) ns = sizes;
  }
  std::vector<BenchRow> rows = run_bench(sweeps, c.seed);
  std::string csv = bench_csv_header() + "\n";
  for (const auto& r : rows) csv += bench_csv_row(r) + "\n";
  const std::string path = c.metrics.empty() ? c.out : c.metrics;
  if (path.empty()) {
    std::cout << csv;
  } else {
    write_text_file(path, csv);
  }
  for (const auto& [p, e] : fit_volume_exponents(rows)) {
    std::cerr << "volume exponent " << p << ": " << e << "\n";
  }
  return kOk;
}

void add_common(CLI::App* sub, Common& c, bool protocol_flags) {
  sub->add_option("--n", c.n, "number of players")->capture_default_str();
  sub->add_option("--B", c.B, "input bound (decimal)")->capture_default_str();
  sub->add_option("--seed", c.seed, "random seed")->envname("DSMM_SEED")->capture_default_str();
  sub->add_option("--out", c.out, "output file (stdout if empty)");
  if (!protocol_flags) return;
  sub->add_option("--mode", c.mode, "cipher mode: shared | chain")->capture_default_str();
  sub->add_flag("--proofs", c.proofs, "enable affine-transform proofs");
  sub->add_flag("--signatures", c.signatures, "sign every message");
  sub->add_option("--metrics", c.metrics, "metrics CSV file");
  sub->add_option("--transcript", c.transcript, "transcript JSON-lines file");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed secure dot products and matrix multiplication"};
  app.set_config("--config", "", "read options from a TOML/INI file");
  app.require_subcommand(1);

  Common c;
  std::string scheme = "paillier", protocol = "dsdp", input, a_path, b_path, scenario;
  std::size_t bits = 512;
  bool identity = false;
  std::vector<std::string> bench_protocols;
  std::vector<int> bench_sizes;

  auto* keygen = app.add_subcommand("keygen", "generate a key pair as JSON");
  add_common(keygen, c, false);
  keygen->add_option("--scheme", scheme, "paillier | shared")->capture_default_str();
  keygen->add_option("--bits", bits, "modulus size in bits")->capture_default_str();
  keygen->add_option("--d", c.d, "repetition factor used to size the shared modulus")
      ->capture_default_str();

  auto* dot = app.add_subcommand("dotprod", "run a dot-product protocol");
  add_common(dot, c, true);
  dot->add_option("--protocol", protocol, "dsdp | mpwp | pmpwp | wiretap")->capture_default_str();
  dot->add_option("--d", c.d, "wiretap repetition factor")->capture_default_str();
  dot->add_option("--input", input, "instance JSON file");

  auto* mat = app.add_subcommand("matmul", "run the parallel matrix product");
  add_common(mat, c, true);
  mat->add_flag("--identity", identity, "use A = B = I");
  mat->add_option("--a", a_path, "matrix A as JSON");
  mat->add_option("--b", b_path, "matrix B as JSON");

  auto* trust = app.add_subcommand("trust", "run the trust-matrix product");
  add_common(trust, c, false);
  trust->add_option("--p", c.p, "precision bits")->capture_default_str();
  trust->add_option("--a", a_path, "trust matrix A as JSON");
  trust->add_option("--b", b_path, "trust matrix B as JSON");
  trust->add_option("--metrics", c.metrics, "metrics CSV file");
  trust->add_option("--transcript", c.transcript, "transcript JSON-lines file");

  auto* attack = app.add_subcommand("attack", "run an attack scenario");
  attack->add_option("--scenario", scenario, "scenario JSON file")->required();
  attack->add_option("--out", c.out, "report file (stdout if empty)");

  auto* bench = app.add_subcommand("bench", "communication sweeps");
  bench->add_option("--seed", c.seed, "random seed")->envname("DSMM_SEED")->capture_default_str();
  bench->add_option("--protocols", bench_protocols, "subset of mpwp pmpwp dsdp pdsmm");
  bench->add_option("--sizes", bench_sizes, "player counts (default: per-protocol sweep)");
  bench->add_option("--out", c.out, "CSV file (stdout if empty)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*keygen) return cmd_keygen(c, scheme, bits);
    if (*dot) return cmd_dotprod(c, protocol, input);
    if (*mat) return cmd_matmul(c, identity, a_path, b_path);
    if (*trust) return cmd_trust(c, a_path, b_path);
    if (*attack) return cmd_attack(c, scenario);
    if (*bench) return cmd_bench(c, bench_protocols, bench_sizes);
  } catch (const ParameterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ConfigurationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kAbort;
  }
  return kUsage;
}
