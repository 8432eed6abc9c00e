#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "dfl/dilution.hpp"
#include "dfl/gibbs_mc.hpp"
#include "dfl/stats.hpp"
#include "dfl/symbolic.hpp"

namespace dfl {

enum class Engine { Exact, MC };

std::string to_string(Engine e);
Engine parse_engine(const std::string& text);

inline constexpr int kSchemaVersion = 1;

struct NamedIdentity {
  std::string name;
  IdentityExpression expression;
};

/// I1..I6 in canonical form.
const std::vector<NamedIdentity>& standard_identities();

/// Every monomial that appears in I1..I6, in monomial order.
std::vector<OverlapMonomial> identity_monomials();

/// Shared knobs for disorder-averaged runs.
struct RunOptions {
  Engine engine = Engine::Exact;
  std::size_t n_disorder = 100;
  std::uint64_t seed = 0;
  McParams mc;
  unsigned threads = 1;
};

struct IdentityReport {
  DilutionModel model;
  std::uint32_t n_sites = 0;
  double beta = 0.0;
  Engine engine = Engine::Exact;
  std::size_t n_disorder = 0;
  std::uint64_t seed = 0;
  /// Keyed by identity name (I1..I6) and by monomial text.
  std::map<std::string, Estimate> residuals;
  std::map<std::string, Estimate> monomials;
  /// Per disorder sample: residual values in I1..I6 order.
  std::vector<std::vector<double>> sample_residuals;
};

/// Thermal values of `monomials` on the graph of every disorder sample.
/// Graph k has seed derive_seed(seed, k); the MC engine uses the thermal
/// stream of the same seed.
std::vector<std::vector<double>> sample_monomial_values(const DilutionModel& model, std::uint32_t n_sites,
                                                        double beta, const std::vector<OverlapMonomial>& monomials,
                                                        const RunOptions& options);

IdentityReport residuals(const DilutionModel& model, std::uint32_t n_sites, double beta, const RunOptions& options);

nlohmann::json to_json(const IdentityReport& report);
/// Long-format CSV: model,N,alpha,beta,identity,value,stderr,n_disorder,engine,seed.
std::string to_csv(const IdentityReport& report, bool header = true);
std::string csv_header();

enum class GeneratorKind { M2, Q12Sq };

std::string to_string(GeneratorKind g);
GeneratorKind parse_generator(const std::string& text);
OverlapMonomial generator_monomial(GeneratorKind g);
int generator_replicas(GeneratorKind g);

/// The truncated generator with its symbolic prefactor (alpha' for
/// Bernoulli, alpha for Poisson), through order theta^2.
MonomialCombination generator_combination(GeneratorKind g, DilutionKind kind);

struct ProfileResult {
  GeneratorKind generator = GeneratorKind::M2;
  std::vector<double> beta_grid;
  std::vector<Estimate> values;
  /// Trapezoid integral of |f_G| over the grid, with a jackknife stderr.
  Estimate integral;
  std::size_t n_disorder = 0;
};

ProfileResult f_G_profile(const DilutionModel& model, std::uint32_t n_sites, GeneratorKind g,
                          const std::vector<double>& beta_grid, const RunOptions& options);

/// Both generators from one pass over the disorder samples.
std::vector<ProfileResult> f_G_profiles(const DilutionModel& model, std::uint32_t n_sites,
                                        const std::vector<GeneratorKind>& generators,
                                        const std::vector<double>& beta_grid, const RunOptions& options);

struct VarianceBoundResult {
  Estimate integral;
  double bound = 0.0;
  double ratio = 0.0;
  std::vector<double> beta_grid;
  std::vector<Estimate> variance;
  /// Variance of omega(h) across disorder samples at each grid point and its
  /// integral. Reported for completeness; the bound above covers only the
  /// thermal part.
  std::vector<double> disorder_variance;
  double disorder_integral = 0.0;
};

/// Integral over the grid of E[omega(h^2) - omega(h)^2], h = H/N, against
/// the bound 3 alpha'/N, where alpha' is the generator prefactor.
VarianceBoundResult variance_bound_check(const DilutionModel& model, std::uint32_t n_sites, double beta_lo,
                                         double beta_hi, std::size_t n_grid, std::size_t n_disorder,
                                         std::uint64_t seed, unsigned threads = 1);

enum class GaugeVariant { Cavity, Bulk };

struct GaugeResult {
  GaugeVariant variant = GaugeVariant::Cavity;
  Estimate lhs;
  Estimate rhs;
  /// lhs + shift - rhs, shift being ln 2 for the cavity variant and 0 for
  /// the bulk one.
  double difference = 0.0;
  double stderr_difference = 0.0;
  /// Mean contribution of the cavity self-pair constant to the lhs.
  double self_pair_shift = 0.0;
  std::size_t n_disorder = 0;
};

/// Cavity variant: E ln Z_{N,t=1}(alpha~) + ln 2 against E ln Z_{N+1}(alpha).
/// Bulk variant: E ln Z_{N,t=0} against E ln Z_N of a Poisson(alpha~ N) graph.
GaugeResult cavity_gauge_check(double alpha, std::uint32_t n_sites, double beta, std::size_t n_disorder,
                               std::uint64_t seed, GaugeVariant variant = GaugeVariant::Cavity,
                               unsigned threads = 1);

struct FreeEnergyPoint {
  std::uint32_t n_sites = 0;
  Estimate a_bernoulli;
  Estimate a_poisson;
  Estimate diff;  // A_B - A_P, paired over shared edge sequences
};

/// A_N = E ln Z / N for Bernoulli (alpha_B = c N^2 / M) and Poisson
/// (alpha_P = c) at equal mean edge count c N. Each disorder sample draws
/// one sequence of uniform pairs; ln Z of its first k pairs is weighted by
/// the exact edge-count law of each model.
std::vector<FreeEnergyPoint> free_energy_compare(double edge_density, const std::vector<std::uint32_t>& n_sites_list,
                                                 double beta, std::size_t n_disorder, std::uint64_t seed,
                                                 unsigned threads = 1);

/// Jackknife standard error of g(mean of rows).
Estimate jackknife(const std::vector<std::vector<double>>& rows,
                   const std::function<double(const std::vector<double>&)>& statistic);

}  // namespace dfl
