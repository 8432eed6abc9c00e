#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dfl/rng.hpp"

namespace dfl {

enum class DilutionKind { Bernoulli, Poisson };

std::string to_string(DilutionKind kind);
DilutionKind parse_dilution_kind(const std::string& text);

/// Connectivity law of the random edge count.
///
/// Bernoulli: k ~ Binomial(M, alpha/N) with M = N(N-1)/2 couples.
/// Poisson:   k ~ Poisson(alpha N).
struct DilutionModel {
  DilutionKind kind = DilutionKind::Poisson;
  double alpha = 1.0;

  /// Throws ParameterError when alpha is negative/non-finite or, for
  /// Bernoulli, when alpha/N > 1.
  void validate(std::uint32_t n_sites) const;

  /// Expected number of edges at size N.
  double mean_edge_count(std::uint32_t n_sites) const;

  /// Prefactor of the self-averaging generator: M alpha / N^2 for
  /// Bernoulli, alpha for Poisson.
  double generator_prefactor(std::uint32_t n_sites) const;
};

/// Number of unordered couples of N sites.
constexpr std::uint64_t max_couples(std::uint32_t n_sites) {
  return static_cast<std::uint64_t>(n_sites) * (n_sites - (n_sites ? 1 : 0)) / 2;
}

/// One ordered interaction pair. Self-pairs (i == j) are legal and
/// contribute a configuration-independent -1 to H.
struct Edge {
  std::uint32_t i = 0;
  std::uint32_t j = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
};

/// One disorder realization.
struct QuenchedGraph {
  std::uint32_t n_sites = 0;
  std::vector<Edge> edges;
  DilutionModel model;
  std::uint64_t seed = 0;

  std::size_t self_pairs() const;
};

/// Poisson body graph plus the cavity terms of the interpolating state.
///
/// `cavity_sites` each carry a field term +beta sigma_i. `cavity_self_pairs`
/// counts pairs (N+1, N+1) of the (N+1)-spin graph; they only add the
/// constant beta per pair to ln Z but make Z_{N,t=1} equal Z_{N+1}/2 in
/// distribution at every finite N.
struct CavityGraph {
  QuenchedGraph body;
  std::vector<std::uint32_t> cavity_sites;
  std::uint64_t cavity_self_pairs = 0;
  double alpha_tilde = 0.0;
  double t = 0.0;
};

/// Binomial(trials, p) by direct summation of Bernoulli trials.
std::uint64_t sample_binomial(std::uint64_t trials, double p, Rng& rng);

/// Poisson(lambda) by exact inversion of the cumulative pmf. Means above
/// 500 are drawn as sums of independent Poisson pieces of mean <= 500 so
/// that exp(-lambda) never underflows.
std::uint64_t sample_poisson(double lambda, Rng& rng);

std::uint64_t sample_edge_count(const DilutionModel& model, std::uint32_t n_sites, Rng& rng);

/// Appends `count` i.i.d. uniform ordered pairs.
void append_uniform_edges(std::uint32_t n_sites, std::uint64_t count, Rng& rng,
                          std::vector<Edge>& edges);

/// Draws the edge count, then that many uniform pairs, from one stream.
QuenchedGraph sample_graph(const DilutionModel& model, std::uint32_t n_sites, Rng& rng);

/// Graph of disorder sample `seed`: stream (seed, streams::kGraph).
QuenchedGraph sample_graph(const DilutionModel& model, std::uint32_t n_sites, std::uint64_t seed);

CavityGraph sample_cavity_graph(double alpha, std::uint32_t n_sites, double t, Rng& rng);

struct DistributionIdentityReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double lhs_stderr = 0.0;
  double rhs_stderr = 0.0;
  /// Standard error of the paired difference lhs - rhs.
  double diff_stderr = 0.0;
  std::size_t n_samples = 0;
};

/// Monte Carlo check of E[k g(k)] = lambda E[g(k'+1)], with lambda = M alpha / N
/// and k' ~ Binomial(M-1, alpha/N) for Bernoulli, lambda = alpha N and k' ~ k
/// for Poisson. Both sides are drawn from one coupled sample.
DistributionIdentityReport check_distribution_identity(const DilutionModel& model,
                                                       std::uint32_t n_sites,
                                                       const std::function<double(std::uint64_t)>& g,
                                                       std::size_t n_samples, Rng& rng);

nlohmann::json graph_to_json(const QuenchedGraph& graph);
QuenchedGraph graph_from_json(const nlohmann::json& j);

}  // namespace dfl
