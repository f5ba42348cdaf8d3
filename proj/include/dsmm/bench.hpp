#pragma once

// Communication sweeps: one row per (protocol, n) with message and byte
// counts, rounds and wall time, plus a log-log volume fit.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace dsmm {

struct BenchRow {
  std::string protocol;
  int n = 0;
  int d = 1;
  std::size_t messages = 0;
  std::size_t bytes = 0;
  int rounds = 0;
  double wall_time_ms = 0;
  std::uint64_t seed = 0;
  // Bytes used for the volume fit (PDSMM: per coefficient of C).
  double volume = 0;
};

// Protocols: mpwp, pmpwp, dsdp, pdsmm.
BenchRow bench_point(const std::string& protocol, int n, std::uint64_t seed);

// Default sweep sizes per protocol.
std::map<std::string, std::vector<int>> default_sweeps();

// Rows sorted by (protocol, n, d).
std::vector<BenchRow> run_bench(const std::map<std::string, std::vector<int>>& sweeps,
                                std::uint64_t seed);

// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);
// Fitted volume exponent per protocol.
std::map<std::string, double> fit_volume_exponents(const std::vector<BenchRow>& rows);

std::string bench_csv_header();  // protocol,n,d,messages,bytes,rounds,wall_time_ms,seed
std::string bench_csv_row(const BenchRow& r);

}  // namespace dsmm
