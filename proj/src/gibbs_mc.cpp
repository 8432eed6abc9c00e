#include "dfl/gibbs_mc.hpp"

#include <cmath>
#include <map>

#include "dfl/errors.hpp"
#include "dfl/parallel.hpp"

namespace dfl {

void McParams::validate() const {
  if (n_replicas < 1) throw ParameterError("n_replicas must be >= 1");
  if (burn_in_sweeps < 1) throw ParameterError("burn_in_sweeps must be >= 1");
  if (measure_sweeps < 1) throw ParameterError("measure_sweeps must be >= 1");
  if (thin < 1) throw ParameterError("thin must be >= 1");
}

double heat_bath_probability(double beta, int local_field) {
  return 1.0 / (1.0 + std::exp(-2.0 * beta * static_cast<double>(local_field)));
}

ReplicaChains::ReplicaChains(const QuenchedGraph& graph, double beta, int n_replicas, Rng& rng)
    : graph_(graph), beta_(beta), adjacency_(graph.n_sites) {
  if (graph.n_sites == 0) throw ParameterError("graph has no sites");
  if (!std::isfinite(beta) || beta < 0.0) throw ParameterError("beta must be finite and >= 0");
  if (n_replicas < 1) throw ParameterError("n_replicas must be >= 1");

  std::vector<std::map<std::uint32_t, int>> counts(graph.n_sites);
  for (const auto& e : graph.edges) {
    if (e.i >= graph.n_sites || e.j >= graph.n_sites) throw ParameterError("edge index out of range");
    if (e.i == e.j) {
      ++counts[e.i][e.i];
      continue;
    }
    ++counts[e.i][e.j];
    ++counts[e.j][e.i];
  }
  for (std::uint32_t i = 0; i < graph.n_sites; ++i) {
    int degree = 0;
    for (const auto& [j, m] : counts[i]) {
      adjacency_[i].emplace_back(j, m);
      if (j != i) degree += m;
    }
    max_field_ = std::max(max_field_, degree);
  }
  up_probability_.resize(static_cast<std::size_t>(2 * max_field_ + 1));
  for (int h = -max_field_; h <= max_field_; ++h)
    up_probability_[static_cast<std::size_t>(h + max_field_)] = heat_bath_probability(beta, h);

  spins_.assign(static_cast<std::size_t>(n_replicas), std::vector<std::int8_t>(graph.n_sites));
  for (auto& replica : spins_)
    for (auto& s : replica) s = (rng() >> 63) ? 1 : -1;
}

void ReplicaChains::set_spins(int replica, std::vector<std::int8_t> spins) {
  if (spins.size() != graph_.n_sites) throw ParameterError("spin array has the wrong length");
  for (auto s : spins)
    if (s != 1 && s != -1) throw ParameterError("spins must be +1 or -1");
  spins_.at(static_cast<std::size_t>(replica)) = std::move(spins);
}

int ReplicaChains::local_field(int replica, std::uint32_t site) const {
  const auto& s = spins_[static_cast<std::size_t>(replica)];
  int h = 0;
  for (const auto& [j, m] : adjacency_[site])
    if (j != site) h += m * s[j];
  return h;
}

void ReplicaChains::sweep(Rng& rng) {
  const std::uint32_t n = graph_.n_sites;
  for (std::size_t r = 0; r < spins_.size(); ++r) {
    auto& s = spins_[r];
    for (std::uint32_t k = 0; k < n; ++k) {
      const auto i = static_cast<std::uint32_t>(rng.below(n));
      int h = 0;
      for (const auto& [j, m] : adjacency_[i])
        if (j != i) h += m * s[j];
      s[i] = rng.uniform() < up_probability_[static_cast<std::size_t>(h + max_field_)] ? 1 : -1;
    }
  }
}

void glauber_sweep(ReplicaChains& chains, Rng& rng) { chains.sweep(rng); }

namespace {

double factor_overlap(const std::vector<ReplicaLabel>& replicas, const ReplicaChains& chains) {
  const std::uint32_t n = chains.n_sites();
  long acc = 0;
  for (std::uint32_t i = 0; i < n; ++i) {
    int p = 1;
    for (ReplicaLabel a : replicas) p *= chains.spins(a - 1)[i];
    acc += p;
  }
  return static_cast<double>(acc) / static_cast<double>(n);
}

}  // namespace

double monomial_on_configs(const OverlapMonomial& monomial, const ReplicaChains& chains) {
  const OverlapMonomial m = canonicalize(monomial);
  if (m.max_label() > chains.n_replicas()) throw ParameterError("monomial needs more replicas than the chains hold");
  double v = 1.0;
  for (const auto& f : m.factors()) v *= std::pow(factor_overlap(f.replicas, chains), f.exponent);
  return v;
}

int required_replicas(const std::vector<OverlapMonomial>& monomials) {
  int r = 1;
  for (const auto& m : monomials) r = std::max(r, canonicalize(m).max_label());
  return r;
}

std::vector<Estimate> estimate_monomials(const QuenchedGraph& graph, double beta,
                                         const std::vector<OverlapMonomial>& monomials,
                                         const McParams& params, Rng& rng) {
  params.validate();
  std::vector<OverlapMonomial> canon;
  canon.reserve(monomials.size());
  for (const auto& m : monomials) canon.push_back(canonicalize(m));
  if (required_replicas(canon) > params.n_replicas)
    throw ParameterError("n_replicas is smaller than the largest replica label in use");

  // each distinct replica set is measured once per sample
  std::map<std::vector<ReplicaLabel>, std::size_t> factor_index;
  for (const auto& m : canon)
    for (const auto& f : m.factors()) factor_index.try_emplace(f.replicas, factor_index.size());
  std::vector<const std::vector<ReplicaLabel>*> factor_sets(factor_index.size());
  for (const auto& [set, k] : factor_index) factor_sets[k] = &set;

  ReplicaChains chains(graph, beta, params.n_replicas, rng);
  for (int k = 0; k < params.burn_in_sweeps; ++k) chains.sweep(rng);

  const std::size_t n_measure = static_cast<std::size_t>(params.measure_sweeps / params.thin);
  std::vector<std::vector<double>> series(canon.size());
  for (auto& s : series) s.reserve(n_measure);
  std::vector<double> q(factor_sets.size());
  for (int sweep = 1; sweep <= params.measure_sweeps; ++sweep) {
    chains.sweep(rng);
    if (sweep % params.thin != 0) continue;
    for (std::size_t k = 0; k < factor_sets.size(); ++k) q[k] = factor_overlap(*factor_sets[k], chains);
    for (std::size_t m = 0; m < canon.size(); ++m) {
      double v = 1.0;
      for (const auto& f : canon[m].factors()) v *= std::pow(q[factor_index.at(f.replicas)], f.exponent);
      series[m].push_back(v);
    }
  }

  std::vector<Estimate> out;
  out.reserve(canon.size());
  for (std::size_t m = 0; m < canon.size(); ++m) {
    if (canon[m].is_one()) {
      out.push_back({1.0, 0.0});
      continue;
    }
    out.push_back(batch_means(series[m]));
  }
  return out;
}

std::vector<std::vector<double>> per_sample_monomials(const DilutionModel& model, std::uint32_t n_sites,
                                                      double beta,
                                                      const std::vector<OverlapMonomial>& monomials,
                                                      const McParams& params, std::size_t n_disorder,
                                                      std::uint64_t master_seed, unsigned threads) {
  if (n_disorder == 0) throw ParameterError("n_disorder must be >= 1");
  model.validate(n_sites);
  params.validate();
  return parallel_map(n_disorder, threads, [&](std::size_t k) {
    const std::uint64_t seed = derive_seed(master_seed, k);
    const QuenchedGraph graph = sample_graph(model, n_sites, seed);
    Rng thermal(seed, streams::kThermal);
    std::vector<double> row;
    for (const auto& e : estimate_monomials(graph, beta, monomials, params, thermal)) row.push_back(e.value);
    return row;
  });
}

bool QuenchedEstimate::has_stderr() const { return std::isfinite(error); }

std::vector<QuenchedEstimate> quenched_estimate(const DilutionModel& model, std::uint32_t n_sites, double beta,
                                                const std::vector<OverlapMonomial>& monomials,
                                                const McParams& params, std::size_t n_disorder,
                                                std::uint64_t master_seed, unsigned threads) {
  const auto rows = per_sample_monomials(model, n_sites, beta, monomials, params, n_disorder, master_seed, threads);
  std::vector<QuenchedEstimate> out;
  for (std::size_t m = 0; m < monomials.size(); ++m) {
    RunningStats s;
    for (const auto& row : rows) s.add(row[m]);
    out.push_back({s.mean(), s.stderr_of_mean(), n_disorder});
  }
  return out;
}

}  // namespace dfl
