#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include "dfl/dilution.hpp"
#include "dfl/monomials.hpp"

namespace dfl {

inline constexpr std::uint32_t kMaxExactSites = 24;
inline constexpr int kMaxMonomialDegree = 6;
inline constexpr int kMaxCorrelationOrder = 8;

/// N-bit spin word: bit i set means sigma_i = +1.
using SpinConfig = std::uint32_t;

constexpr int spin_of(SpinConfig c, std::uint32_t i) { return ((c >> i) & 1U) ? 1 : -1; }

/// Terms of the Gibbs exponent for exact enumeration. The score of a
/// configuration is sum over edges of sigma_i sigma_j plus sum over field
/// sites of sigma_i plus `constant`; the Gibbs weight is exp(beta score).
/// For a plain graph the score is -H.
struct SpinSystem {
  std::uint32_t n_sites = 0;
  std::vector<Edge> edges;
  std::vector<std::uint32_t> field_sites;
  std::int64_t constant = 0;

  static SpinSystem from_graph(const QuenchedGraph& graph);
  static SpinSystem from_cavity(const CavityGraph& cavity);

  /// Largest attainable score (all spins up).
  std::int64_t max_score() const;
  bool has_fields() const { return !field_sites.empty(); }
};

/// Score of one configuration, computed directly from the term lists.
std::int64_t score_of(const SpinSystem& system, SpinConfig config);

/// Number of configurations at each score, from one Gray-code sweep.
class ScoreSpectrum {
public:
  explicit ScoreSpectrum(const SpinSystem& system);

  double log_partition(double beta) const;
  /// Thermal mean and variance of the score.
  std::pair<double, double> score_moments(double beta) const;

  std::int64_t min_score() const { return min_score_; }
  std::span<const double> counts() const { return counts_; }

private:
  std::int64_t min_score_ = 0;
  std::vector<double> counts_;
};

struct ThermalState {
  QuenchedGraph graph;
  double beta = 0.0;
  double theta = 0.0;
  double log_z = 0.0;
};

ThermalState make_thermal_state(const QuenchedGraph& graph, double beta);

/// ln Z for the plain graph (no fields).
double log_partition(const QuenchedGraph& graph, double beta);
double log_partition(const SpinSystem& system, double beta);

/// Thermal correlations for a set of site subsets.
struct CorrelationCache {
  std::map<std::uint32_t, double> entries;

  double at(std::uint32_t mask) const { return mask == 0 ? 1.0 : entries.at(mask); }
};

/// Accumulates sum_sigma w(sigma) prod_{i in A} sigma_i for every requested
/// mask in a single sweep. Masks may have at most kMaxCorrelationOrder bits.
CorrelationCache correlations(const QuenchedGraph& graph, double beta,
                              std::span<const std::uint32_t> masks);
CorrelationCache correlations(const SpinSystem& system, double beta,
                              std::span<const std::uint32_t> masks);

/// omega(sigma_A) for every subset A of the N sites, indexed by mask, from
/// one weight sweep followed by an in-place Walsh-Hadamard transform.
class CorrelationTable {
public:
  CorrelationTable(const SpinSystem& system, double beta);

  std::uint32_t n_sites() const { return n_sites_; }
  double operator[](std::uint32_t mask) const { return values_[mask]; }
  double log_partition() const { return log_z_; }

private:
  std::uint32_t n_sites_;
  double log_z_;
  std::vector<double> values_;
};

/// Exact replicated-state expectations of overlap monomials for one table.
///
/// Each factor q_S^p expands into p site sums, so a monomial of site degree
/// d is (1/N^d) sum over d-tuples of prod over replicas r of omega(sigma_{A_r}),
/// where A_r is the parity-reduced set of sites carried by replica r.
class MonomialEvaluator {
public:
  explicit MonomialEvaluator(std::shared_ptr<const CorrelationTable> table);

  double operator()(const OverlapMonomial& monomial) const;

  const CorrelationTable& table() const { return *table_; }

private:
  std::shared_ptr<const CorrelationTable> table_;
};

double monomial_expectation(const QuenchedGraph& graph, double beta, const OverlapMonomial& monomial);

struct EnergyStats {
  double mean_h = 0.0;
  double thermal_variance_h = 0.0;
};

/// omega(h) and omega(h^2) - omega(h)^2 for h = H/N.
EnergyStats internal_energy_stats(const QuenchedGraph& graph, double beta);
EnergyStats internal_energy_stats(const ScoreSpectrum& spectrum, std::uint32_t n_sites, double beta);

/// Samples a cavity graph at parameter t and returns its ln Z, including the
/// cavity field terms and the constant from cavity self-pairs.
double log_partition_interpolated(std::uint32_t n_sites, double alpha, double beta, double t, Rng& rng);

/// Throws CapacityError when exact enumeration is out of reach.
void check_exact_capacity(std::uint32_t n_sites);

}  // namespace dfl
