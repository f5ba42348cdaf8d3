// Python bindings. Big integers cross the boundary as Python ints; structured
// results are handed over as JSON text and decoded on the Python side.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <string>
#include <vector>

#include "dsmm/adversary_lab.hpp"
#include "dsmm/bench.hpp"
#include "dsmm/dot_protocols.hpp"
#include "dsmm/error.hpp"
#include "dsmm/hom_cipher.hpp"
#include "dsmm/io.hpp"
#include "dsmm/matmul_protocols.hpp"
#include "dsmm/trust_algebra.hpp"

namespace py = pybind11;
using namespace dsmm;
using nlohmann::json;

namespace {

BigInt to_big(const py::handle& h) {
  BigInt x;
  x.set_str(py::str(py::int_(py::reinterpret_borrow<py::object>(h))).cast<std::string>(), 10);
  return x;
}

py::int_ to_py(const BigInt& x) {
  return py::reinterpret_steal<py::int_>(PyLong_FromString(x.get_str(16).c_str(), nullptr, 16));
}

std::vector<BigInt> to_vec(const py::sequence& s) {
  std::vector<BigInt> v;
  for (auto h : s) v.push_back(to_big(h));
  return v;
}

Matrix to_matrix(const py::sequence& rows) {
  Matrix M;
  for (auto r : rows) M.push_back(to_vec(py::reinterpret_borrow<py::sequence>(r)));
  return M;
}

std::string dot_product(const std::string& protocol, const py::sequence& U, const py::sequence& V,
                        const py::object& B, const std::string& mode, std::uint64_t seed, int d,
                        bool proofs, bool signatures) {
  DotProductInstance inst;
  inst.U = to_vec(U);
  inst.V = to_vec(V);
  inst.n = static_cast<int>(inst.U.size());
  inst.B = to_big(B);
  inst.mode = mode_from_name(mode);
  inst.proofs_enabled = proofs;
  inst.signatures_enabled = signatures;
  inst.validate();
  if (protocol == "wiretap") {
    Network net = make_wiretap_network(inst, d, seed);
    WiretapResult r = run_wiretap(inst, d, net);
    return result_to_json(r.S, r.metrics, r.abort).dump();
  }
  if (protocol == "mpwp" && inst.mode != CipherMode::shared_modulus)
    throw ParameterError("MPWP runs in shared mode only");
  DotResult r;
  if (protocol == "dsdp") {
    Network net = make_dot_network(inst, seed);
    r = run_dsdp(inst, net);
  } else if (protocol == "mpwp") {
    Network net = make_mpwp_network(inst, seed);
    r = run_mpwp(inst, net);
  } else if (protocol == "pmpwp") {
    Network net = make_pmpwp_network(inst, seed);
    r = run_pmpwp(inst, net);
  } else {
    throw ParameterError("unknown protocol '" + protocol + "'");
  }
  return result_to_json(r.S, r.metrics, r.abort).dump();
}

std::string matmul(const py::sequence& A, const py::sequence& B, const py::object& bound,
                   const std::string& mode, std::uint64_t seed, bool proofs, bool signatures) {
  Matrix a = to_matrix(A), b = to_matrix(B);
  const BigInt bnd = to_big(bound);
  const CipherMode m = mode_from_name(mode);
  Network net = make_pdsmm_network(static_cast<int>(a.size()), bnd, m, seed);
  MatmulResult r = run_pdsmm(a, b, bnd, net, MatmulOptions{m, proofs, signatures});
  json j;
  j["C"] = r.abort ? json(nullptr) : matrix_to_json(r.C);
  j["metrics"] = metrics_to_json(r.metrics);
  j["aborted"] = r.abort.has_value();
  j["abort_reason"] = r.abort ? json(r.abort->info.reason) : json(nullptr);
  return j.dump();
}

using PyPair = std::pair<py::int_, py::int_>;

PyPair pair_out(const TrustPair& x) { return {to_py(x.a()), to_py(x.b())}; }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Distributed and secure dot products and matrix products (simulated network).";

  // Later registrations are tried first.
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);

  m.def("dot_product", &dot_product, py::arg("protocol"), py::arg("U"), py::arg("V"),
        py::arg("B"), py::arg("mode") = "shared", py::arg("seed") = 1, py::arg("d") = 1,
        py::arg("proofs") = false, py::arg("signatures") = false);
  m.def("matmul", &matmul, py::arg("A"), py::arg("B"), py::arg("bound"),
        py::arg("mode") = "shared", py::arg("seed") = 1, py::arg("proofs") = false,
        py::arg("signatures") = false);

  m.def("keygen", [](const std::string& scheme, std::size_t bits, std::uint64_t seed,
                     const py::object& M) {
    Rng rng(derive_seed(seed, "keygen"));
    KeyPair kp = scheme == "paillier" ? paillier_keygen(bits, rng)
                 : scheme == "shared" ? shared_modulus_keygen(to_big(M), bits, rng, to_big(M))
                                      : throw ParameterError("unknown scheme '" + scheme + "'");
    return key_to_json(kp.pk, &kp.sk).dump();
  }, py::arg("scheme") = "paillier", py::arg("bits") = 512, py::arg("seed") = 1,
     py::arg("M") = py::int_(256));

  // Encrypt both values under a key, combine homomorphically, decrypt.
  m.def("homomorphic_affine", [](const std::string& key_json, const py::object& m1,
                                 const py::object& u, const py::object& r, std::uint64_t seed) {
    KeyPair kp = key_from_json(json::parse(key_json));
    Rng rng(seed);
    Ciphertext c = encrypt(kp.pk, to_big(m1), rng);
    return to_py(decrypt(kp.sk, hom_affine(kp.pk, c, to_big(u), to_big(r), rng)));
  }, py::arg("key"), py::arg("m"), py::arg("u"), py::arg("r"), py::arg("seed") = 1);

  m.def("seq_agg", [](const py::object& a, const py::object& b, const py::object& c,
                      const py::object& d, const py::object& N) {
    return pair_out(seq_agg(TrustPair(to_big(a), to_big(b), to_big(N)),
                            TrustPair(to_big(c), to_big(d), to_big(N))));
  });
  m.def("par_agg", [](const py::object& a, const py::object& b, const py::object& c,
                      const py::object& d, const py::object& N) {
    return pair_out(par_agg(TrustPair(to_big(a), to_big(b), to_big(N)),
                            TrustPair(to_big(c), to_big(d), to_big(N))));
  });
  m.def("par_invertible", [](const py::object& a, const py::object& b, const py::object& N) {
    return par_invertible(TrustPair(to_big(a), to_big(b), to_big(N)));
  });

  m.def("run_attack", [](const std::string& scenario) {
    return report_to_json(evaluate_scenario(scenario_from_json(json::parse(scenario)))).dump();
  }, py::arg("scenario"));

  m.def("breach_probability", [](int n, int k, int d, int trials, std::uint64_t seed) {
    return wiretap_breach_probability(n, k, d, trials, seed);
  }, py::arg("n"), py::arg("k"), py::arg("d"), py::arg("trials"), py::arg("seed") = 1);
  m.def("breach_closed_form", &breach_closed_form, py::arg("n"), py::arg("d"));
  m.def("avg_bound", &avg_bound_thm4, py::arg("n"), py::arg("k"));
  m.def("worst_bound", &worst_bound_prop1, py::arg("n"), py::arg("eps"));

  m.def("bench", [](const std::map<std::string, std::vector<int>>& sweeps, std::uint64_t seed) {
    std::vector<std::string> rows;
    for (const auto& r : run_bench(sweeps.empty() ? default_sweeps() : sweeps, seed))
      rows.push_back(bench_csv_row(r));
    return rows;
  }, py::arg("sweeps") = std::map<std::string, std::vector<int>>{}, py::arg("seed") = 1);
}
