#pragma once

// JSON documents for instances, results and matrices.

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "dsmm/dot_protocols.hpp"
#include "dsmm/matmul_protocols.hpp"

namespace dsmm {

// {protocol, n, B, mode, seed, proofs, signatures, U, V}; numbers in hex.
struct InstanceFile {
  std::string protocol = "dsdp";  // dsdp | mpwp | pmpwp | wiretap
  std::uint64_t seed = 0;
  DotProductInstance inst;
};

nlohmann::json instance_to_json(const InstanceFile& f);
InstanceFile instance_from_json(const nlohmann::json& j);

nlohmann::json metrics_to_json(const Metrics& m);

// {S, metrics, aborted, abort_reason}
nlohmann::json result_to_json(const std::optional<BigInt>& S, const Metrics& m,
                              const std::optional<AbortInfo>& abort);

nlohmann::json matrix_to_json(const Matrix& M);
Matrix matrix_from_json(const nlohmann::json& j);

nlohmann::json trust_matrix_to_json(const TrustMatrix& M);
TrustMatrix trust_matrix_from_json(const nlohmann::json& j, const BigInt& ring);

// Reads a whole JSON file; FormatError on parse failure.
nlohmann::json read_json_file(const std::string& path);
// Writes `j` pretty-printed with a trailing newline.
void write_json_file(const std::string& path, const nlohmann::json& j);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace dsmm
