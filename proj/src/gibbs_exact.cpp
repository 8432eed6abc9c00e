#include "dfl/gibbs_exact.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "dfl/errors.hpp"

namespace dfl {

namespace {

void check_beta(double beta) {
  if (!std::isfinite(beta) || beta < 0.0) throw ParameterError("beta must be finite and >= 0");
}

// Visits every configuration in Gray-code order with its score. Each step
// flips one spin and updates the score and the local fields in O(degree).
template <class Visit>
void gray_sweep(const SpinSystem& sys, Visit&& visit) {
  const std::uint32_t n = sys.n_sites;
  std::vector<int> coupling(static_cast<std::size_t>(n) * n, 0);
  std::vector<int> external(n, 0);
  std::int64_t score = sys.constant;
  for (const auto& e : sys.edges) {
    if (e.i == e.j) {
      score += 1;
      continue;
    }
    ++coupling[e.i * n + e.j];
    ++coupling[e.j * n + e.i];
    score += 1;  // all spins start at -1, so every pair is aligned
  }
  for (std::uint32_t i : sys.field_sites) {
    ++external[i];
    score -= 1;
  }
  std::vector<std::vector<std::uint32_t>> neighbors(n);
  std::vector<int> local(n, 0);
  for (std::uint32_t i = 0; i < n; ++i) {
    local[i] = external[i];
    for (std::uint32_t j = 0; j < n; ++j) {
      const int c = coupling[i * n + j];
      if (c == 0) continue;
      neighbors[i].push_back(j);
      local[i] -= c;
    }
  }

  SpinConfig config = 0;
  visit(config, score);
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t k = 1; k < total; ++k) {
    const auto i = static_cast<std::uint32_t>(std::countr_zero(k));
    const int old_spin = spin_of(config, i);
    score -= 2 * old_spin * local[i];
    config ^= (SpinConfig{1} << i);
    const int twice_new = -2 * old_spin;
    for (std::uint32_t j : neighbors[i]) local[j] += twice_new * coupling[j * n + i];
    visit(config, score);
  }
}

void fast_walsh_hadamard(std::vector<double>& v) {
  const std::size_t size = v.size();
  for (std::size_t len = 1; len < size; len <<= 1) {
    for (std::size_t base = 0; base < size; base += len << 1) {
      for (std::size_t k = base; k < base + len; ++k) {
        const double a = v[k];
        const double b = v[k + len];
        v[k] = a + b;
        v[k + len] = a - b;
      }
    }
  }
}

struct Contraction {
  const CorrelationTable& table;
  std::uint32_t n;
  std::vector<std::vector<int>> slot_replicas;
  std::vector<std::vector<int>> finalized;
  std::vector<std::uint32_t> masks;
  double total = 0.0;

  void run(std::size_t slot, double product) {
    if (slot == slot_replicas.size()) {
      total += product;
      return;
    }
    const auto& reps = slot_replicas[slot];
    const auto& done = finalized[slot];
    for (std::uint32_t i = 0; i < n; ++i) {
      const std::uint32_t bit = std::uint32_t{1} << i;
      for (int r : reps) masks[r] ^= bit;
      double p = product;
      for (int r : done) p *= table[masks[r]];
      if (p != 0.0) run(slot + 1, p);
      for (int r : reps) masks[r] ^= bit;
    }
  }
};

}  // namespace

void check_exact_capacity(std::uint32_t n_sites) {
  if (n_sites == 0) throw ParameterError("n_sites must be >= 1");
  if (n_sites > kMaxExactSites)
    throw CapacityError("exact enumeration supports at most " + std::to_string(kMaxExactSites) +
                        " sites, got " + std::to_string(n_sites));
}

SpinSystem SpinSystem::from_graph(const QuenchedGraph& graph) {
  return SpinSystem{graph.n_sites, graph.edges, {}, 0};
}

SpinSystem SpinSystem::from_cavity(const CavityGraph& cavity) {
  return SpinSystem{cavity.body.n_sites, cavity.body.edges, cavity.cavity_sites,
                    static_cast<std::int64_t>(cavity.cavity_self_pairs)};
}

std::int64_t SpinSystem::max_score() const {
  return constant + static_cast<std::int64_t>(edges.size()) + static_cast<std::int64_t>(field_sites.size());
}

std::int64_t score_of(const SpinSystem& system, SpinConfig config) {
  std::int64_t s = system.constant;
  for (const auto& e : system.edges) s += spin_of(config, e.i) * spin_of(config, e.j);
  for (std::uint32_t i : system.field_sites) s += spin_of(config, i);
  return s;
}

ScoreSpectrum::ScoreSpectrum(const SpinSystem& system) {
  check_exact_capacity(system.n_sites);
  const std::int64_t hi = system.max_score();
  min_score_ = hi - 2 * static_cast<std::int64_t>(system.edges.size() + system.field_sites.size());
  counts_.assign(static_cast<std::size_t>(hi - min_score_ + 1), 0.0);
  gray_sweep(system, [&](SpinConfig, std::int64_t score) {
    counts_[static_cast<std::size_t>(score - min_score_)] += 1.0;
  });
  // drop the empty top of the range so that back() is the true maximum
  while (counts_.size() > 1 && counts_.back() == 0.0) counts_.pop_back();
}

double ScoreSpectrum::log_partition(double beta) const {
  check_beta(beta);
  const auto top = static_cast<double>(min_score_ + static_cast<std::int64_t>(counts_.size()) - 1);
  double acc = 0.0;
  for (std::size_t k = 0; k < counts_.size(); ++k) {
    if (counts_[k] == 0.0) continue;
    const double s = static_cast<double>(min_score_ + static_cast<std::int64_t>(k));
    acc += counts_[k] * std::exp(beta * (s - top));
  }
  return beta * top + std::log(acc);
}

std::pair<double, double> ScoreSpectrum::score_moments(double beta) const {
  check_beta(beta);
  const auto top = static_cast<double>(min_score_ + static_cast<std::int64_t>(counts_.size()) - 1);
  double z = 0.0;
  double first = 0.0;
  for (std::size_t k = 0; k < counts_.size(); ++k) {
    if (counts_[k] == 0.0) continue;
    const double s = static_cast<double>(min_score_ + static_cast<std::int64_t>(k));
    const double w = counts_[k] * std::exp(beta * (s - top));
    z += w;
    first += w * s;
  }
  const double mean = first / z;
  double second = 0.0;
  for (std::size_t k = 0; k < counts_.size(); ++k) {
    if (counts_[k] == 0.0) continue;
    const double s = static_cast<double>(min_score_ + static_cast<std::int64_t>(k));
    const double w = counts_[k] * std::exp(beta * (s - top));
    second += w * (s - mean) * (s - mean);
  }
  return {mean, second / z};
}

ThermalState make_thermal_state(const QuenchedGraph& graph, double beta) {
  return ThermalState{graph, beta, std::tanh(beta), log_partition(graph, beta)};
}

double log_partition(const QuenchedGraph& graph, double beta) {
  return log_partition(SpinSystem::from_graph(graph), beta);
}

double log_partition(const SpinSystem& system, double beta) {
  check_beta(beta);
  return ScoreSpectrum(system).log_partition(beta);
}

CorrelationCache correlations(const QuenchedGraph& graph, double beta,
                              std::span<const std::uint32_t> masks) {
  return correlations(SpinSystem::from_graph(graph), beta, masks);
}

CorrelationCache correlations(const SpinSystem& system, double beta,
                              std::span<const std::uint32_t> masks) {
  check_beta(beta);
  check_exact_capacity(system.n_sites);
  const std::uint32_t full = system.n_sites == 32 ? ~0U : ((1U << system.n_sites) - 1U);
  std::vector<std::uint32_t> unique(masks.begin(), masks.end());
  std::sort(unique.begin(), unique.end());
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
  for (std::uint32_t m : unique) {
    if ((m & ~full) != 0) throw ParameterError("correlation mask addresses sites beyond N");
    if (std::popcount(m) > kMaxCorrelationOrder)
      throw CapacityError("correlation masks are limited to " + std::to_string(kMaxCorrelationOrder) + " sites");
  }
  const auto top = static_cast<double>(system.max_score());
  std::vector<double> sums(unique.size(), 0.0);
  double z = 0.0;
  gray_sweep(system, [&](SpinConfig c, std::int64_t score) {
    const double w = std::exp(beta * (static_cast<double>(score) - top));
    z += w;
    for (std::size_t k = 0; k < unique.size(); ++k)
      sums[k] += (std::popcount(unique[k] & ~c) & 1) ? -w : w;
  });
  CorrelationCache cache;
  cache.entries[0] = 1.0;
  for (std::size_t k = 0; k < unique.size(); ++k)
    if (unique[k] != 0) cache.entries[unique[k]] = std::clamp(sums[k] / z, -1.0, 1.0);
  return cache;
}

CorrelationTable::CorrelationTable(const SpinSystem& system, double beta) : n_sites_(system.n_sites) {
  check_beta(beta);
  check_exact_capacity(system.n_sites);
  const auto top = static_cast<double>(system.max_score());
  values_.assign(std::size_t{1} << n_sites_, 0.0);
  gray_sweep(system, [&](SpinConfig c, std::int64_t score) {
    values_[c] = std::exp(beta * (static_cast<double>(score) - top));
  });
  fast_walsh_hadamard(values_);
  const double z = values_[0];
  log_z_ = beta * top + std::log(z);
  const bool symmetric = !system.has_fields();
  for (std::size_t a = 0; a < values_.size(); ++a) {
    const int order = std::popcount(a);
    if (symmetric && (order & 1)) {
      // odd correlations vanish under the global spin flip
      values_[a] = 0.0;
      continue;
    }
    const double v = values_[a] / z;
    values_[a] = std::clamp((order & 1) ? -v : v, -1.0, 1.0);
  }
  values_[0] = 1.0;
}

MonomialEvaluator::MonomialEvaluator(std::shared_ptr<const CorrelationTable> table)
    : table_(std::move(table)) {}

double MonomialEvaluator::operator()(const OverlapMonomial& raw) const {
  const OverlapMonomial monomial = canonicalize(raw);
  const int degree = site_degree(monomial);
  if (degree > kMaxMonomialDegree)
    throw CapacityError("monomial site degree " + std::to_string(degree) + " exceeds cap " +
                        std::to_string(kMaxMonomialDegree));
  if (monomial.is_one()) return 1.0;

  const int replicas = monomial.max_label();
  Contraction c{*table_, table_->n_sites(), {}, {}, std::vector<std::uint32_t>(static_cast<std::size_t>(replicas), 0U)};
  for (const auto& f : monomial.factors()) {
    std::vector<int> reps;
    for (ReplicaLabel a : f.replicas) reps.push_back(a - 1);
    for (int k = 0; k < f.exponent; ++k) c.slot_replicas.push_back(reps);
  }
  std::vector<int> last(static_cast<std::size_t>(replicas), -1);
  for (std::size_t s = 0; s < c.slot_replicas.size(); ++s)
    for (int r : c.slot_replicas[s]) last[static_cast<std::size_t>(r)] = static_cast<int>(s);
  c.finalized.assign(c.slot_replicas.size(), {});
  for (int r = 0; r < replicas; ++r)
    if (last[static_cast<std::size_t>(r)] >= 0)
      c.finalized[static_cast<std::size_t>(last[static_cast<std::size_t>(r)])].push_back(r);

  c.run(0, 1.0);
  return c.total / std::pow(static_cast<double>(c.n), degree);
}

double monomial_expectation(const QuenchedGraph& graph, double beta, const OverlapMonomial& monomial) {
  const OverlapMonomial canonical = canonicalize(monomial);
  if (site_degree(canonical) > kMaxMonomialDegree)
    throw CapacityError("monomial site degree exceeds cap " + std::to_string(kMaxMonomialDegree));
  auto table = std::make_shared<const CorrelationTable>(SpinSystem::from_graph(graph), beta);
  return MonomialEvaluator(table)(canonical);
}

EnergyStats internal_energy_stats(const ScoreSpectrum& spectrum, std::uint32_t n_sites, double beta) {
  const auto [mean, var] = spectrum.score_moments(beta);
  const double n = n_sites;
  return {-mean / n, var / (n * n)};
}

EnergyStats internal_energy_stats(const QuenchedGraph& graph, double beta) {
  return internal_energy_stats(ScoreSpectrum(SpinSystem::from_graph(graph)), graph.n_sites, beta);
}

double log_partition_interpolated(std::uint32_t n_sites, double alpha, double beta, double t, Rng& rng) {
  check_exact_capacity(n_sites);
  if (n_sites + 1 > kMaxExactSites)
    throw CapacityError("interpolated state keeps one site in reserve: N must be <= " +
                        std::to_string(kMaxExactSites - 1));
  const CavityGraph cavity = sample_cavity_graph(alpha, n_sites, t, rng);
  return log_partition(SpinSystem::from_cavity(cavity), beta);
}

}  // namespace dfl
