#include "dsmm/io.hpp"

#include <fstream>
#include <sstream>

#include "dsmm/error.hpp"

namespace dsmm {

using nlohmann::json;

namespace {

json hex_list(const std::vector<BigInt>& xs) {
  json a = json::array();
  for (const auto& x : xs) a.push_back(to_hex(x));
  return a;
}

BigInt number(const json& j) {
  if (j.is_string()) return from_hex(j.get<std::string>());
  if (j.is_number_unsigned()) return BigInt(std::to_string(j.get<std::uint64_t>()));
  if (j.is_number_integer()) return BigInt(std::to_string(j.get<std::int64_t>()));
  throw FormatError("expected a hex string or an integer");
}

std::vector<BigInt> number_list(const json& j) {
  std::vector<BigInt> out;
  for (const auto& x : j) out.push_back(number(x));
  return out;
}

}  // namespace

json instance_to_json(const InstanceFile& f) {
  return json{{"protocol", f.protocol},
              {"n", f.inst.n},
              {"B", to_hex(f.inst.B)},
              {"mode", std::string(mode_name(f.inst.mode))},
              {"seed", f.seed},
              {"proofs", f.inst.proofs_enabled},
              {"signatures", f.inst.signatures_enabled},
              {"U", hex_list(f.inst.U)},
              {"V", hex_list(f.inst.V)}};
}

InstanceFile instance_from_json(const json& j) {
  try {
    InstanceFile f;
    f.protocol = j.value("protocol", f.protocol);
    f.seed = j.value("seed", std::uint64_t{0});
    f.inst.n = j.at("n").get<int>();
    f.inst.B = number(j.at("B"));
    if (j.contains("mode")) f.inst.mode = mode_from_name(j["mode"].get<std::string>());
    f.inst.proofs_enabled = j.value("proofs", false);
    f.inst.signatures_enabled = j.value("signatures", false);
    if (j.contains("U") && j.contains("V")) {
      f.inst.U = number_list(j["U"]);
      f.inst.V = number_list(j["V"]);
    } else {
      DotProductInstance gen = random_instance(f.inst.n, f.inst.B, f.inst.mode, f.seed);
      f.inst.U = gen.U;
      f.inst.V = gen.V;
    }
    f.inst.validate();
    return f;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed instance: ") + e.what());
  } catch (const ConfigurationError& e) {
    throw FormatError(e.what());
  }
}

json metrics_to_json(const Metrics& m) {
  json phases = json::object();
  for (const auto& [name, st] : m.phases) {
    phases[name] = {{"messages", st.messages}, {"bytes", st.bytes}};
  }
  return json{{"messages", m.message_count},
              {"bytes", m.total_bytes},
              {"rounds", m.round_count},
              {"phases", phases}};
}

json result_to_json(const std::optional<BigInt>& S, const Metrics& m,
                    const std::optional<AbortInfo>& abort) {
  json j;
  j["S"] = S && !abort ? json(to_hex(*S)) : json(nullptr);
  j["metrics"] = metrics_to_json(m);
  j["aborted"] = abort.has_value();
  j["abort_reason"] = abort ? json(abort->reason) : json(nullptr);
  if (abort) {
    j["abort_player"] = abort->player.index;
    j["abort_step"] = abort->step;
  }
  return j;
}

json matrix_to_json(const Matrix& M) {
  json a = json::array();
  for (const auto& row : M) a.push_back(hex_list(row));
  return a;
}

Matrix matrix_from_json(const json& j) {
  try {
    if (!j.is_array() || j.empty()) throw FormatError("matrix must be a non-empty array of rows");
    Matrix M;
    for (const auto& row : j) M.push_back(number_list(row));
    for (const auto& row : M) {
      if (row.size() != M.size()) throw FormatError("matrix must be square");
    }
    return M;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed matrix: ") + e.what());
  }
}

json trust_matrix_to_json(const TrustMatrix& M) {
  json a = json::array();
  for (const auto& row : M) {
    json r = json::array();
    for (const auto& x : row) r.push_back(pair_to_json(x));
    a.push_back(r);
  }
  return a;
}

TrustMatrix trust_matrix_from_json(const json& j, const BigInt& ring) {
  try {
    if (!j.is_array() || j.empty()) throw FormatError("matrix must be a non-empty array of rows");
    TrustMatrix M;
    for (const auto& row : j) {
      std::vector<TrustPair> r;
      for (const auto& x : row) r.push_back(pair_from_json(x, ring));
      M.push_back(std::move(r));
    }
    for (const auto& row : M) {
      if (row.size() != M.size()) throw FormatError("matrix must be square");
    }
    return M;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed trust matrix: ") + e.what());
  }
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigurationError("cannot write " + path);
  out << text;
}

}  // namespace dsmm
