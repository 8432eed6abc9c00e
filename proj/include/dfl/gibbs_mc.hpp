#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "dfl/dilution.hpp"
#include "dfl/monomials.hpp"
#include "dfl/rng.hpp"
#include "dfl/stats.hpp"

namespace dfl {

struct McParams {
  int n_replicas = 1;
  int burn_in_sweeps = 1000;
  int measure_sweeps = 10000;
  int thin = 10;

  void validate() const;
};

/// s independent heat-bath chains on one shared graph.
///
/// Spins are stored as +1/-1 bytes, one array per replica, so sizes are not
/// limited to a machine word.
class ReplicaChains {
public:
  ReplicaChains(const QuenchedGraph& graph, double beta, int n_replicas, Rng& rng);

  const QuenchedGraph& graph() const { return graph_; }
  double beta() const { return beta_; }
  int n_replicas() const { return static_cast<int>(spins_.size()); }
  std::uint32_t n_sites() const { return graph_.n_sites; }

  const std::vector<std::int8_t>& spins(int replica) const { return spins_[static_cast<std::size_t>(replica)]; }
  void set_spins(int replica, std::vector<std::int8_t> spins);

  /// (neighbor, multiplicity) pairs of site i; self-pairs are listed with
  /// neighbor == i and are skipped by the local field.
  const std::vector<std::pair<std::uint32_t, int>>& neighbors(std::uint32_t i) const { return adjacency_[i]; }

  int local_field(int replica, std::uint32_t site) const;

  /// N single-site heat-bath updates per replica at uniformly random sites.
  void sweep(Rng& rng);

private:
  QuenchedGraph graph_;
  double beta_;
  std::vector<std::vector<std::pair<std::uint32_t, int>>> adjacency_;
  std::vector<std::vector<std::int8_t>> spins_;
  std::vector<double> up_probability_;  // indexed by local field + max degree
  int max_field_ = 0;
};

/// Probability of setting a spin to +1 given its local field.
double heat_bath_probability(double beta, int local_field);

void glauber_sweep(ReplicaChains& chains, Rng& rng);

/// Value of a monomial on one tuple of replica configurations.
double monomial_on_configs(const OverlapMonomial& monomial, const ReplicaChains& chains);

/// Time averages with batch-means standard errors, one per monomial.
std::vector<Estimate> estimate_monomials(const QuenchedGraph& graph, double beta,
                                         const std::vector<OverlapMonomial>& monomials,
                                         const McParams& params, Rng& rng);

/// Thermal estimates of every monomial on every disorder sample. Row k uses
/// graph seed derive_seed(master_seed, k) and thermal stream
/// (that seed, streams::kThermal).
std::vector<std::vector<double>> per_sample_monomials(const DilutionModel& model, std::uint32_t n_sites,
                                                      double beta,
                                                      const std::vector<OverlapMonomial>& monomials,
                                                      const McParams& params, std::size_t n_disorder,
                                                      std::uint64_t master_seed, unsigned threads = 1);

struct QuenchedEstimate {
  double mean = 0.0;
  /// Standard error across disorder samples; NaN when n_disorder == 1.
  double error = 0.0;
  std::size_t n_disorder = 0;

  bool has_stderr() const;
};

std::vector<QuenchedEstimate> quenched_estimate(const DilutionModel& model, std::uint32_t n_sites, double beta,
                                                const std::vector<OverlapMonomial>& monomials,
                                                const McParams& params, std::size_t n_disorder,
                                                std::uint64_t master_seed, unsigned threads = 1);

/// Smallest replica count able to host every monomial.
int required_replicas(const std::vector<OverlapMonomial>& monomials);

}  // namespace dfl
