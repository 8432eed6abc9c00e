#include "dfl/dilution.hpp"

#include <algorithm>
#include <cmath>

#include "dfl/errors.hpp"
#include "dfl/stats.hpp"

namespace dfl {

std::string to_string(DilutionKind kind) {
  return kind == DilutionKind::Bernoulli ? "bernoulli" : "poisson";
}

DilutionKind parse_dilution_kind(const std::string& text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "bernoulli") return DilutionKind::Bernoulli;
  if (lower == "poisson") return DilutionKind::Poisson;
  throw ParameterError("unknown dilution model '" + text + "'");
}

void DilutionModel::validate(std::uint32_t n_sites) const {
  if (!std::isfinite(alpha) || alpha < 0.0) throw ParameterError("alpha must be finite and >= 0");
  if (n_sites == 0) throw ParameterError("n_sites must be >= 1");
  if (kind == DilutionKind::Bernoulli && alpha > static_cast<double>(n_sites))
    throw ParameterError("Bernoulli dilution needs alpha <= N (edge probability alpha/N <= 1)");
}

double DilutionModel::mean_edge_count(std::uint32_t n_sites) const {
  const double n = n_sites;
  if (kind == DilutionKind::Bernoulli) return static_cast<double>(max_couples(n_sites)) * alpha / n;
  return alpha * n;
}

double DilutionModel::generator_prefactor(std::uint32_t n_sites) const {
  const double n = n_sites;
  if (kind == DilutionKind::Bernoulli) return static_cast<double>(max_couples(n_sites)) * alpha / (n * n);
  return alpha;
}

std::size_t QuenchedGraph::self_pairs() const {
  return static_cast<std::size_t>(
      std::count_if(edges.begin(), edges.end(), [](const Edge& e) { return e.i == e.j; }));
}

std::uint64_t sample_binomial(std::uint64_t trials, double p, Rng& rng) {
  if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("binomial probability outside [0,1]");
  std::uint64_t k = 0;
  for (std::uint64_t n = 0; n < trials; ++n) k += rng.uniform() < p ? 1 : 0;
  return k;
}

namespace {

constexpr double kPoissonPiece = 500.0;

std::uint64_t poisson_inversion(double lambda, Rng& rng) {
  const double u = rng.uniform();
  double p = std::exp(-lambda);
  double cdf = p;
  std::uint64_t k = 0;
  while (u >= cdf) {
    ++k;
    p *= lambda / static_cast<double>(k);
    cdf += p;
    // cdf can saturate just below 1 in double precision
    if (p == 0.0 && static_cast<double>(k) > lambda) break;
  }
  return k;
}

}  // namespace

std::uint64_t sample_poisson(double lambda, Rng& rng) {
  if (!std::isfinite(lambda) || lambda < 0.0) throw ParameterError("Poisson mean must be finite and >= 0");
  if (lambda == 0.0) return 0;
  std::uint64_t total = 0;
  double left = lambda;
  while (left > kPoissonPiece) {
    total += poisson_inversion(kPoissonPiece, rng);
    left -= kPoissonPiece;
  }
  return total + poisson_inversion(left, rng);
}

std::uint64_t sample_edge_count(const DilutionModel& model, std::uint32_t n_sites, Rng& rng) {
  model.validate(n_sites);
  if (model.kind == DilutionKind::Bernoulli)
    return sample_binomial(max_couples(n_sites), model.alpha / static_cast<double>(n_sites), rng);
  return sample_poisson(model.alpha * static_cast<double>(n_sites), rng);
}

void append_uniform_edges(std::uint32_t n_sites, std::uint64_t count, Rng& rng,
                          std::vector<Edge>& edges) {
  edges.reserve(edges.size() + count);
  for (std::uint64_t k = 0; k < count; ++k) {
    const auto i = static_cast<std::uint32_t>(rng.below(n_sites));
    const auto j = static_cast<std::uint32_t>(rng.below(n_sites));
    edges.push_back({i, j});
  }
}

QuenchedGraph sample_graph(const DilutionModel& model, std::uint32_t n_sites, Rng& rng) {
  QuenchedGraph g;
  g.n_sites = n_sites;
  g.model = model;
  g.seed = rng.seed();
  const std::uint64_t count = sample_edge_count(model, n_sites, rng);
  append_uniform_edges(n_sites, count, rng, g.edges);
  return g;
}

QuenchedGraph sample_graph(const DilutionModel& model, std::uint32_t n_sites, std::uint64_t seed) {
  Rng rng(seed, streams::kGraph);
  return sample_graph(model, n_sites, rng);
}

CavityGraph sample_cavity_graph(double alpha, std::uint32_t n_sites, double t, Rng& rng) {
  if (!(t >= 0.0 && t <= 1.0)) throw ParameterError("interpolation parameter t must lie in [0,1]");
  if (n_sites == 0) throw ParameterError("n_sites must be >= 1");
  const double n = n_sites;
  CavityGraph c;
  c.alpha_tilde = n * alpha / (n + 1.0);
  c.t = t;
  c.body = sample_graph(DilutionModel{DilutionKind::Poisson, c.alpha_tilde}, n_sites, rng);
  const std::uint64_t n_cavity = sample_poisson(2.0 * c.alpha_tilde * t, rng);
  c.cavity_sites.reserve(n_cavity);
  for (std::uint64_t k = 0; k < n_cavity; ++k)
    c.cavity_sites.push_back(static_cast<std::uint32_t>(rng.below(n_sites)));
  c.cavity_self_pairs = sample_poisson(alpha * t / (n + 1.0), rng);
  return c;
}

DistributionIdentityReport check_distribution_identity(const DilutionModel& model,
                                                       std::uint32_t n_sites,
                                                       const std::function<double(std::uint64_t)>& g,
                                                       std::size_t n_samples, Rng& rng) {
  if (n_samples == 0) throw ParameterError("n_samples must be >= 1");
  model.validate(n_sites);
  const double lambda = model.mean_edge_count(n_sites);
  RunningStats lhs;
  RunningStats rhs;
  RunningStats diff;
  const std::uint64_t couples = max_couples(n_sites);
  const double p = model.alpha / static_cast<double>(n_sites);
  for (std::size_t s = 0; s < n_samples; ++s) {
    // For Bernoulli the shifted expectation runs over Binomial(M-1, p); the
    // coupling k = k' + Bernoulli(p) keeps k ~ Binomial(M, p) and pairs the terms.
    std::uint64_t k = 0;
    std::uint64_t shifted = 0;
    if (model.kind == DilutionKind::Bernoulli) {
      shifted = couples > 0 ? sample_binomial(couples - 1, p, rng) : 0;
      k = shifted + ((couples > 0 && rng.uniform() < p) ? 1 : 0);
    } else {
      k = sample_edge_count(model, n_sites, rng);
      shifted = k;
    }
    const double l = static_cast<double>(k) * g(k);
    const double r = lambda * g(shifted + 1);
    lhs.add(l);
    rhs.add(r);
    diff.add(l - r);
  }
  auto finite_or_zero = [](double x) { return std::isfinite(x) ? x : 0.0; };
  return {lhs.mean(),
          rhs.mean(),
          finite_or_zero(lhs.stderr_of_mean()),
          finite_or_zero(rhs.stderr_of_mean()),
          finite_or_zero(diff.stderr_of_mean()),
          n_samples};
}

nlohmann::json graph_to_json(const QuenchedGraph& graph) {
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& e : graph.edges) edges.push_back({e.i, e.j});
  return {{"n", graph.n_sites},
          {"model", to_string(graph.model.kind)},
          {"alpha", graph.model.alpha},
          {"seed", graph.seed},
          {"edges", std::move(edges)}};
}

QuenchedGraph graph_from_json(const nlohmann::json& j) {
  QuenchedGraph g;
  try {
    g.n_sites = j.at("n").get<std::uint32_t>();
    g.model.kind = parse_dilution_kind(j.at("model").get<std::string>());
    g.model.alpha = j.at("alpha").get<double>();
    g.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& e : j.at("edges")) {
      const Edge edge{e.at(0).get<std::uint32_t>(), e.at(1).get<std::uint32_t>()};
      if (edge.i >= g.n_sites || edge.j >= g.n_sites) throw ParameterError("edge index out of range");
      g.edges.push_back(edge);
    }
  } catch (const nlohmann::json::exception& ex) {
    throw ParameterError(std::string("malformed graph JSON: ") + ex.what());
  }
  return g;
}

}  // namespace dfl
