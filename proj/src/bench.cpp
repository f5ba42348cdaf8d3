#include "dsmm/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <tuple>

#include "dsmm/dot_protocols.hpp"
#include "dsmm/error.hpp"
#include "dsmm/matmul_protocols.hpp"

namespace dsmm {

namespace {

const BigInt kBenchBound = 100;

BenchRow from_metrics(const std::string& protocol, int n, const Metrics& m, std::uint64_t seed) {
  BenchRow r;
  r.protocol = protocol;
  r.n = n;
  r.messages = m.message_count;
  r.bytes = m.total_bytes;
  r.rounds = m.round_count;
  r.seed = seed;
  r.volume = static_cast<double>(m.total_bytes);
  return r;
}

Matrix random_matrix(int n, Rng& rng) {
  Matrix M(n, std::vector<BigInt>(n));
  for (auto& row : M)
    for (auto& x : row) x = rng.below(kBenchBound + 1);
  return M;
}

}  // namespace

BenchRow bench_point(const std::string& protocol, int n, std::uint64_t seed) {
  using clock = std::chrono::steady_clock;
  if (protocol == "pdsmm") {
    Rng rng(derive_seed(seed, "matrices"));
    Matrix A = random_matrix(n, rng), B = random_matrix(n, rng);
    Network net = make_pdsmm_network(n, kBenchBound, CipherMode::shared_modulus, seed);
    auto t0 = clock::now();
    MatmulResult res = run_pdsmm(A, B, kBenchBound, net);
    auto t1 = clock::now();
    if (res.abort) throw Error("bench run aborted: " + res.abort->info.reason);
    BenchRow r = from_metrics(protocol, n, res.metrics, seed);
    r.wall_time_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    r.volume /= static_cast<double>(n) * n;
    return r;
  }
  DotProductInstance inst = random_instance(n, kBenchBound, CipherMode::shared_modulus, seed);
  Network net = protocol == "mpwp"    ? make_mpwp_network(inst, seed)
                : protocol == "pmpwp" ? make_pmpwp_network(inst, seed)
                : protocol == "dsdp"  ? make_dot_network(inst, seed)
                                      : throw ParameterError("unknown bench protocol '" + protocol + "'");
  auto t0 = clock::now();
  DotResult res = protocol == "mpwp"    ? run_mpwp(inst, net)
                  : protocol == "pmpwp" ? run_pmpwp(inst, net)
                                        : run_dsdp(inst, net);
  auto t1 = clock::now();
  if (res.abort) throw Error("bench run aborted: " + res.abort->reason);
  BenchRow r = from_metrics(protocol, n, res.metrics, seed);
  r.wall_time_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  return r;
}

std::map<std::string, std::vector<int>> default_sweeps() {
  return {{"mpwp", {8, 16, 32, 64}},
          {"pmpwp", {8, 16, 32}},
          {"dsdp", {8, 16, 32, 64}},
          {"pdsmm", {4, 8, 16, 32}}};
}

std::vector<BenchRow> run_bench(const std::map<std::string, std::vector<int>>& sweeps,
                                std::uint64_t seed) {
  std::vector<BenchRow> rows;
  for (const auto& [protocol, sizes] : sweeps) {
    for (int n : sizes) rows.push_back(bench_point(protocol, n, seed));
  }
  std::sort(rows.begin(), rows.end(), [](const BenchRow& a, const BenchRow& b) {
    return std::tie(a.protocol, a.n, a.d) < std::tie(b.protocol, b.n, b.d);
  });
  return rows;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ParameterError("fit needs two or more points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] <= 0 || y[i] <= 0) throw ParameterError("fit needs positive values");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= x.size();
  my /= y.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0) throw ParameterError("fit needs distinct x values");
  return sxy / sxx;
}

std::map<std::string, double> fit_volume_exponents(const std::vector<BenchRow>& rows) {
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> pts;
  for (const auto& r : rows) {
    pts[r.protocol].first.push_back(r.n);
    pts[r.protocol].second.push_back(r.volume);
  }
  std::map<std::string, double> out;
  for (const auto& [p, xy] : pts) {
    if (xy.first.size() >= 2) out[p] = loglog_slope(xy.first, xy.second);
  }
  return out;
}

std::string bench_csv_header() { return "protocol,n,d,messages,bytes,rounds,wall_time_ms,seed"; }

std::string bench_csv_row(const BenchRow& r) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(3);
  os << r.protocol << ',' << r.n << ',' << r.d << ',' << r.messages << ',' << r.bytes << ','
     << r.rounds << ',' << r.wall_time_ms << ',' << r.seed;
  return os.str();
}

}  // namespace dsmm
