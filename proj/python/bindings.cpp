#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "dfl/cli.hpp"
#include "dfl/errors.hpp"
#include "dfl/gibbs_exact.hpp"
#include "dfl/identities.hpp"
#include "dfl/monomials.hpp"
#include "dfl/symbolic.hpp"

namespace py = pybind11;

namespace {

dfl::QuenchedGraph make_graph(std::uint32_t n, const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges) {
  dfl::QuenchedGraph g;
  g.n_sites = n;
  for (const auto& [i, j] : edges) {
    if (i >= n || j >= n) throw dfl::ParameterError("edge index out of range");
    g.edges.push_back({i, j});
  }
  return g;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Diluted ferromagnet core: exact engine, monomial algebra and symbolic identities";

  py::register_exception<dfl::ParameterError>(m, "ParameterError", PyExc_ValueError);
  py::register_exception<dfl::CapacityError>(m, "CapacityError", PyExc_OverflowError);
  py::register_exception<dfl::StructuralError>(m, "StructuralError", PyExc_RuntimeError);

  m.def(
      "sample_graph_json",
      [](const std::string& model, double alpha, std::uint32_t n, std::uint64_t seed) {
        return dfl::graph_to_json(dfl::sample_graph({dfl::parse_dilution_kind(model), alpha}, n, seed)).dump();
      },
      py::arg("model"), py::arg("alpha"), py::arg("n"), py::arg("seed"));

  m.def(
      "log_partition",
      [](std::uint32_t n, const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges, double beta) {
        return dfl::log_partition(make_graph(n, edges), beta);
      },
      py::arg("n"), py::arg("edges"), py::arg("beta"));

  m.def(
      "correlation",
      [](std::uint32_t n, const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges, double beta,
         const std::vector<std::uint32_t>& sites) {
        std::uint32_t mask = 0;
        for (auto i : sites) {
          if (i >= n) throw dfl::ParameterError("site index out of range");
          mask ^= 1U << i;
        }
        const std::uint32_t masks[] = {mask};
        return dfl::correlations(make_graph(n, edges), beta, masks).at(mask);
      },
      py::arg("n"), py::arg("edges"), py::arg("beta"), py::arg("sites"));

  m.def(
      "monomial_expectation",
      [](std::uint32_t n, const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges, double beta,
         const std::string& monomial) {
        return dfl::monomial_expectation(make_graph(n, edges), beta, dfl::parse_monomial(monomial));
      },
      py::arg("n"), py::arg("edges"), py::arg("beta"), py::arg("monomial"));

  m.def(
      "canonicalize", [](const std::string& text) { return dfl::to_string(dfl::parse_monomial(text)); },
      py::arg("monomial"));
  m.def(
      "is_stochastically_stable",
      [](const std::string& text) { return dfl::is_stochastically_stable(dfl::parse_monomial(text)); },
      py::arg("monomial"));
  m.def(
      "site_degree", [](const std::string& text) { return dfl::site_degree(dfl::parse_monomial(text)); },
      py::arg("monomial"));

  m.def(
      "extract_identities",
      [](const std::string& g, int s, int order, const std::string& method) {
        const auto monomial = dfl::parse_monomial(g);
        dfl::MonomialCombination c;
        if (method == "streaming")
          c = dfl::gauge_complete(dfl::streaming_derivative(monomial, s, order));
        else if (method == "self-averaging")
          c = dfl::self_averaging_fG(monomial, s, order);
        else
          throw dfl::ParameterError("method must be 'streaming' or 'self-averaging'");
        std::vector<std::string> out;
        for (const auto& e : dfl::extract_identities(c)) out.push_back(dfl::to_string(e));
        return out;
      },
      py::arg("g"), py::arg("s"), py::arg("order"), py::arg("method") = "self-averaging");

  m.def(
      "compare_methods_json",
      [](const std::string& g, int s, int order) {
        return dfl::to_json(dfl::compare_methods(dfl::parse_monomial(g), s, order)).dump();
      },
      py::arg("g"), py::arg("s"), py::arg("order"));

  m.def(
      "residuals_json",
      [](const std::string& model, double alpha, std::uint32_t n, double beta, std::size_t n_disorder,
         std::uint64_t seed) {
        dfl::RunOptions opt;
        opt.n_disorder = n_disorder;
        opt.seed = seed;
        return dfl::to_json(dfl::residuals({dfl::parse_dilution_kind(model), alpha}, n, beta, opt)).dump();
      },
      py::arg("model"), py::arg("alpha"), py::arg("n"), py::arg("beta"), py::arg("n_disorder"), py::arg("seed"));

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out;
        std::ostringstream err;
        const int code = dfl::run_cli(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}
