#include "dfl/identities.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "dfl/errors.hpp"
#include "dfl/gibbs_exact.hpp"
#include "dfl/parallel.hpp"

namespace dfl {

namespace {

OverlapMonomial mono(const char* text) { return parse_monomial(text); }

IdentityExpression identity(std::initializer_list<std::pair<const char*, int>> terms) {
  std::vector<std::pair<OverlapMonomial, Rational>> list;
  for (const auto& [text, c] : terms) list.emplace_back(mono(text), Rational(c));
  return make_identity(list);
}

void check_grid(const std::vector<double>& grid) {
  if (grid.size() < 2) throw ParameterError("beta grid needs at least two points");
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!std::isfinite(grid[k]) || grid[k] < 0.0) throw ParameterError("beta grid values must be finite and >= 0");
    if (k > 0 && grid[k] <= grid[k - 1]) throw ParameterError("beta grid must be strictly increasing");
  }
}

Estimate column_estimate(const std::vector<std::vector<double>>& rows, std::size_t column) {
  RunningStats s;
  for (const auto& row : rows) s.add(row[column]);
  return s.estimate();
}

double column_variance(const std::vector<std::vector<double>>& rows, std::size_t column) {
  RunningStats s;
  for (const auto& row : rows) s.add(row[column]);
  return s.variance();
}

double residual_value(const IdentityExpression& e, const std::map<OverlapMonomial, double>& values) {
  double v = 0.0;
  for (const auto& [m, r] : e.terms) v += boost::rational_cast<double>(r) * values.at(m);
  return v;
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

nlohmann::json estimate_json(const Estimate& e) {
  nlohmann::json j;
  j["value"] = e.value;
  if (e.has_stderr())
    j["stderr"] = e.error;
  else
    j["stderr"] = nullptr;
  return j;
}

// Binomial(trials, p) and Poisson(lambda) pmfs on 0..kmax, built in log space.
std::vector<double> binomial_pmf(std::uint64_t trials, double p, std::size_t kmax) {
  std::vector<double> out(kmax + 1, 0.0);
  if (p == 0.0) {
    out[0] = 1.0;
    return out;
  }
  for (std::size_t k = 0; k <= kmax && k <= trials; ++k) {
    const double n = static_cast<double>(trials);
    const double kk = static_cast<double>(k);
    const double log_pmf = std::lgamma(n + 1) - std::lgamma(kk + 1) - std::lgamma(n - kk + 1) + kk * std::log(p) +
                           (p < 1.0 ? (n - kk) * std::log1p(-p) : (n == kk ? 0.0 : -INFINITY));
    out[k] = std::exp(log_pmf);
  }
  return out;
}

std::vector<double> poisson_pmf(double lambda, std::size_t kmax) {
  std::vector<double> out(kmax + 1, 0.0);
  if (lambda == 0.0) {
    out[0] = 1.0;
    return out;
  }
  for (std::size_t k = 0; k <= kmax; ++k) {
    const double kk = static_cast<double>(k);
    out[k] = std::exp(kk * std::log(lambda) - lambda - std::lgamma(kk + 1));
  }
  return out;
}

// Smallest k beyond which the Poisson(lambda) tail is below 1e-15.
std::size_t poisson_cutoff(double lambda) {
  if (lambda == 0.0) return 0;
  double p = std::exp(-lambda);
  double cdf = p;
  std::size_t k = 0;
  while (1.0 - cdf > 1e-15 || static_cast<double>(k) < lambda) {
    ++k;
    p *= lambda / static_cast<double>(k);
    cdf += p;
    if (p < 1e-300 && static_cast<double>(k) > lambda) break;
  }
  return k + 1;
}

}  // namespace

std::string to_string(Engine e) { return e == Engine::Exact ? "exact" : "mc"; }

Engine parse_engine(const std::string& text) {
  if (text == "exact") return Engine::Exact;
  if (text == "mc") return Engine::MC;
  throw ParameterError("unknown engine '" + text + "'");
}

const std::vector<NamedIdentity>& standard_identities() {
  static const std::vector<NamedIdentity> ids = {
      {"I1", identity({{"m1^4", 1}, {"m1^2 m2^2", -1}})},
      {"I2", identity({{"m1^2 q12^2", 1}, {"m1^2 q23^2", -1}})},
      {"I3", identity({{"m1^2 q123^2", 1}, {"m1^2 q234^2", -1}})},
      {"I4", identity({{"m1^2 q12^2", 1}, {"m3^2 q12^2", -1}})},
      {"I5", identity({{"q12^4", 1}, {"q12^2 q23^2", -4}, {"q12^2 q34^2", 3}})},
      {"I6", identity({{"q12^2 q123^2", 1}, {"q12^2 q134^2", -3}, {"q12^2 q345^2", 2}})},
  };
  return ids;
}

std::vector<OverlapMonomial> identity_monomials() {
  std::set<OverlapMonomial> all;
  for (const auto& id : standard_identities())
    for (const auto& [m, r] : id.expression.terms) all.insert(m);
  return {all.begin(), all.end()};
}

std::vector<std::vector<double>> sample_monomial_values(const DilutionModel& model, std::uint32_t n_sites,
                                                        double beta, const std::vector<OverlapMonomial>& monomials,
                                                        const RunOptions& options) {
  if (options.n_disorder == 0) throw ParameterError("n_disorder must be >= 1");
  model.validate(n_sites);
  if (options.engine == Engine::Exact) {
    check_exact_capacity(n_sites);
    for (const auto& m : monomials)
      if (site_degree(canonicalize(m)) > kMaxMonomialDegree) throw CapacityError("monomial degree exceeds cap");
  }
  McParams params = options.mc;
  params.n_replicas = std::max(params.n_replicas, required_replicas(monomials));
  if (options.engine == Engine::MC) params.validate();

  return parallel_map(options.n_disorder, options.threads, [&](std::size_t k) {
    const std::uint64_t seed = derive_seed(options.seed, k);
    const QuenchedGraph graph = sample_graph(model, n_sites, seed);
    std::vector<double> row;
    row.reserve(monomials.size());
    if (options.engine == Engine::Exact) {
      auto table = std::make_shared<const CorrelationTable>(SpinSystem::from_graph(graph), beta);
      const MonomialEvaluator eval(table);
      for (const auto& m : monomials) row.push_back(eval(m));
    } else {
      Rng thermal(seed, streams::kThermal);
      for (const auto& e : estimate_monomials(graph, beta, monomials, params, thermal)) row.push_back(e.value);
    }
    return row;
  });
}

IdentityReport residuals(const DilutionModel& model, std::uint32_t n_sites, double beta, const RunOptions& options) {
  const auto monomials = identity_monomials();
  const auto rows = sample_monomial_values(model, n_sites, beta, monomials, options);

  IdentityReport report;
  report.model = model;
  report.n_sites = n_sites;
  report.beta = beta;
  report.engine = options.engine;
  report.n_disorder = options.n_disorder;
  report.seed = options.seed;
  const auto& ids = standard_identities();
  for (const auto& row : rows) {
    std::map<OverlapMonomial, double> values;
    for (std::size_t m = 0; m < monomials.size(); ++m) values[monomials[m]] = row[m];
    std::vector<double> r;
    for (const auto& id : ids) r.push_back(residual_value(id.expression, values));
    report.sample_residuals.push_back(std::move(r));
  }
  for (std::size_t i = 0; i < ids.size(); ++i)
    report.residuals[ids[i].name] = column_estimate(report.sample_residuals, i);
  for (std::size_t m = 0; m < monomials.size(); ++m) report.monomials[to_string(monomials[m])] = column_estimate(rows, m);
  return report;
}

nlohmann::json to_json(const IdentityReport& report) {
  nlohmann::json residuals = nlohmann::json::object();
  for (const auto& id : standard_identities()) {
    auto j = estimate_json(report.residuals.at(id.name));
    j["expression"] = to_string(id.expression);
    residuals[id.name] = j;
  }
  nlohmann::json monomials = nlohmann::json::object();
  for (const auto& [name, e] : report.monomials) monomials[name] = estimate_json(e);
  return {{"schema_version", kSchemaVersion},
          {"kind", "identity_report"},
          {"model", to_string(report.model.kind)},
          {"alpha", report.model.alpha},
          {"n", report.n_sites},
          {"beta", report.beta},
          {"engine", to_string(report.engine)},
          {"n_disorder", report.n_disorder},
          {"seed", report.seed},
          {"stderr_defined", report.n_disorder >= 2},
          {"residuals", residuals},
          {"monomials", monomials}};
}

std::string csv_header() { return "model,N,alpha,beta,identity,value,stderr,n_disorder,engine,seed\n"; }

std::string to_csv(const IdentityReport& report, bool header) {
  std::ostringstream os;
  if (header) os << csv_header();
  for (const auto& id : standard_identities()) {
    const Estimate& e = report.residuals.at(id.name);
    os << to_string(report.model.kind) << ',' << report.n_sites << ',' << format_double(report.model.alpha) << ','
       << format_double(report.beta) << ',' << id.name << ',' << format_double(e.value) << ','
       << format_double(e.error) << ',' << report.n_disorder << ',' << to_string(report.engine) << ','
       << report.seed << '\n';
  }
  return os.str();
}

std::string to_string(GeneratorKind g) { return g == GeneratorKind::M2 ? "m2" : "q12sq"; }

GeneratorKind parse_generator(const std::string& text) {
  if (text == "m2" || text == "m^2" || text == "m1^2") return GeneratorKind::M2;
  if (text == "q12sq" || text == "q12^2" || text == "q2") return GeneratorKind::Q12Sq;
  throw ParameterError("unknown generator '" + text + "' (expected m2 or q12sq)");
}

OverlapMonomial generator_monomial(GeneratorKind g) {
  return g == GeneratorKind::M2 ? mono("m1^2") : mono("q12^2");
}

int generator_replicas(GeneratorKind g) { return g == GeneratorKind::M2 ? 1 : 2; }

MonomialCombination generator_combination(GeneratorKind g, DilutionKind kind) {
  return self_averaging_fG(generator_monomial(g), generator_replicas(g), 2,
                           kind == DilutionKind::Bernoulli ? Prefactor::AlphaPrime : Prefactor::Alpha);
}

Estimate jackknife(const std::vector<std::vector<double>>& rows,
                   const std::function<double(const std::vector<double>&)>& statistic) {
  const std::size_t n = rows.size();
  if (n == 0) throw ParameterError("jackknife needs at least one sample");
  const std::size_t width = rows.front().size();
  std::vector<double> total(width, 0.0);
  for (const auto& r : rows)
    for (std::size_t c = 0; c < width; ++c) total[c] += r[c];
  std::vector<double> mean(width);
  for (std::size_t c = 0; c < width; ++c) mean[c] = total[c] / static_cast<double>(n);
  const double full = statistic(mean);
  if (n < 2) return {full, std::numeric_limits<double>::quiet_NaN()};
  std::vector<double> loo(n);
  std::vector<double> partial(width);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < width; ++c) partial[c] = (total[c] - rows[i][c]) / static_cast<double>(n - 1);
    loo[i] = statistic(partial);
  }
  double avg = 0.0;
  for (double v : loo) avg += v;
  avg /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : loo) ss += (v - avg) * (v - avg);
  return {full, std::sqrt(ss * static_cast<double>(n - 1) / static_cast<double>(n))};
}

std::vector<ProfileResult> f_G_profiles(const DilutionModel& model, std::uint32_t n_sites,
                                        const std::vector<GeneratorKind>& generators,
                                        const std::vector<double>& beta_grid, const RunOptions& options) {
  check_grid(beta_grid);
  if (options.n_disorder == 0) throw ParameterError("n_disorder must be >= 1");
  model.validate(n_sites);
  if (options.engine == Engine::Exact) check_exact_capacity(n_sites);
  const double prefactor = model.generator_prefactor(n_sites);

  std::vector<MonomialCombination> combos;
  std::set<OverlapMonomial> needed;
  for (auto g : generators) {
    combos.push_back(generator_combination(g, model.kind));
    for (const auto& [m, list] : combos.back().terms()) needed.insert(m);
  }
  const std::vector<OverlapMonomial> monomials(needed.begin(), needed.end());
  McParams params = options.mc;
  params.n_replicas = std::max(params.n_replicas, required_replicas(monomials));

  const std::size_t grid = beta_grid.size();
  const auto rows = parallel_map(options.n_disorder, options.threads, [&](std::size_t k) {
    const std::uint64_t seed = derive_seed(options.seed, k);
    const QuenchedGraph graph = sample_graph(model, n_sites, seed);
    Rng thermal(seed, streams::kThermal);
    std::vector<double> row(combos.size() * grid);
    for (std::size_t b = 0; b < grid; ++b) {
      const double beta = beta_grid[b];
      std::map<OverlapMonomial, double> values;
      if (options.engine == Engine::Exact) {
        auto table = std::make_shared<const CorrelationTable>(SpinSystem::from_graph(graph), beta);
        const MonomialEvaluator eval(table);
        for (const auto& m : monomials) values[m] = eval(m);
      } else {
        const auto est = estimate_monomials(graph, beta, monomials, params, thermal);
        for (std::size_t m = 0; m < monomials.size(); ++m) values[monomials[m]] = est[m].value;
      }
      const double theta = std::tanh(beta);
      for (std::size_t g = 0; g < combos.size(); ++g)
        row[g * grid + b] = combos[g].evaluate([&](const OverlapMonomial& m) { return values.at(m); }, theta, prefactor);
    }
    return row;
  });

  std::vector<ProfileResult> out;
  for (std::size_t g = 0; g < combos.size(); ++g) {
    ProfileResult r;
    r.generator = generators[g];
    r.beta_grid = beta_grid;
    r.n_disorder = options.n_disorder;
    for (std::size_t b = 0; b < grid; ++b) r.values.push_back(column_estimate(rows, g * grid + b));
    r.integral = jackknife(rows, [&](const std::vector<double>& mean) {
      std::vector<double> y(grid);
      for (std::size_t b = 0; b < grid; ++b) y[b] = std::abs(mean[g * grid + b]);
      return trapezoid(beta_grid, y);
    });
    out.push_back(std::move(r));
  }
  return out;
}

ProfileResult f_G_profile(const DilutionModel& model, std::uint32_t n_sites, GeneratorKind g,
                          const std::vector<double>& beta_grid, const RunOptions& options) {
  return f_G_profiles(model, n_sites, {g}, beta_grid, options).front();
}

VarianceBoundResult variance_bound_check(const DilutionModel& model, std::uint32_t n_sites, double beta_lo,
                                         double beta_hi, std::size_t n_grid, std::size_t n_disorder,
                                         std::uint64_t seed, unsigned threads) {
  if (n_disorder == 0) throw ParameterError("n_disorder must be >= 1");
  if (!(beta_hi > beta_lo)) throw ParameterError("beta range must have hi > lo");
  model.validate(n_sites);
  check_exact_capacity(n_sites);
  const auto grid = linspace(beta_lo, beta_hi, n_grid);
  check_grid(grid);

  const auto rows = parallel_map(n_disorder, threads, [&](std::size_t k) {
    const QuenchedGraph graph = sample_graph(model, n_sites, derive_seed(seed, k));
    const ScoreSpectrum spectrum(SpinSystem::from_graph(graph));
    // thermal variances, their integral, then omega(h) for the disorder part
    const std::size_t g = grid.size();
    std::vector<double> row(2 * g + 1);
    for (std::size_t b = 0; b < g; ++b) {
      const auto stats = internal_energy_stats(spectrum, n_sites, grid[b]);
      row[b] = stats.thermal_variance_h;
      row[g + 1 + b] = stats.mean_h;
    }
    row[g] = trapezoid(grid, std::span<const double>(row.data(), g));
    return row;
  });

  VarianceBoundResult r;
  r.beta_grid = grid;
  for (std::size_t b = 0; b < grid.size(); ++b) r.variance.push_back(column_estimate(rows, b));
  r.integral = column_estimate(rows, grid.size());
  for (std::size_t b = 0; b < grid.size(); ++b) {
    const double v = n_disorder > 1 ? column_variance(rows, grid.size() + 1 + b) : 0.0;
    r.disorder_variance.push_back(v);
  }
  r.disorder_integral = trapezoid(grid, r.disorder_variance);
  r.bound = 3.0 * model.generator_prefactor(n_sites) / static_cast<double>(n_sites);
  r.ratio = r.bound > 0.0 ? r.integral.value / r.bound : std::numeric_limits<double>::quiet_NaN();
  return r;
}

GaugeResult cavity_gauge_check(double alpha, std::uint32_t n_sites, double beta, std::size_t n_disorder,
                               std::uint64_t seed, GaugeVariant variant, unsigned threads) {
  if (n_disorder == 0) throw ParameterError("n_disorder must be >= 1");
  if (!std::isfinite(beta) || beta < 0.0) throw ParameterError("beta must be finite and >= 0");
  DilutionModel{DilutionKind::Poisson, alpha}.validate(n_sites);
  check_exact_capacity(n_sites + 1);
  const double n = n_sites;
  const double alpha_tilde = n * alpha / (n + 1.0);
  const double t = variant == GaugeVariant::Cavity ? 1.0 : 0.0;

  const auto rows = parallel_map(n_disorder, threads, [&](std::size_t k) {
    const std::uint64_t s = derive_seed(seed, k);
    Rng cavity_rng(s, streams::kCavity);
    const CavityGraph cavity = sample_cavity_graph(alpha, n_sites, t, cavity_rng);
    const double lhs = log_partition(SpinSystem::from_cavity(cavity), beta);
    const double shift = beta * static_cast<double>(cavity.cavity_self_pairs);
    double rhs = 0.0;
    if (variant == GaugeVariant::Cavity)
      rhs = log_partition(sample_graph(DilutionModel{DilutionKind::Poisson, alpha}, n_sites + 1, s), beta);
    else
      rhs = log_partition(sample_graph(DilutionModel{DilutionKind::Poisson, alpha_tilde}, n_sites, s), beta);
    return std::vector<double>{lhs, rhs, shift};
  });

  GaugeResult r;
  r.variant = variant;
  r.n_disorder = n_disorder;
  r.lhs = column_estimate(rows, 0);
  r.rhs = column_estimate(rows, 1);
  r.self_pair_shift = column_estimate(rows, 2).value;
  const double gauge_shift = variant == GaugeVariant::Cavity ? std::numbers::ln2 : 0.0;
  r.difference = r.lhs.value + gauge_shift - r.rhs.value;
  r.stderr_difference = combined_stderr(r.lhs.error, r.rhs.error);
  return r;
}

std::vector<FreeEnergyPoint> free_energy_compare(double edge_density, const std::vector<std::uint32_t>& n_sites_list,
                                                 double beta, std::size_t n_disorder, std::uint64_t seed,
                                                 unsigned threads) {
  if (!std::isfinite(edge_density) || edge_density < 0.0) throw ParameterError("edge density must be >= 0");
  if (!std::isfinite(beta) || beta < 0.0) throw ParameterError("beta must be finite and >= 0");
  if (n_disorder == 0) throw ParameterError("n_disorder must be >= 1");
  std::vector<FreeEnergyPoint> out;
  for (std::uint32_t n_sites : n_sites_list) {
    if (n_sites < 2) throw ParameterError("free-energy comparison needs N >= 2");
    check_exact_capacity(n_sites);
    const std::uint64_t couples = max_couples(n_sites);
    const double mean_edges = edge_density * n_sites;
    const DilutionModel bern{DilutionKind::Bernoulli, edge_density * n_sites * n_sites / static_cast<double>(couples)};
    bern.validate(n_sites);
    const std::size_t kmax = poisson_cutoff(mean_edges);
    const auto p_bern = binomial_pmf(couples, mean_edges / static_cast<double>(couples), kmax);
    const auto p_pois = poisson_pmf(mean_edges, kmax);
    const std::size_t configs = std::size_t{1} << n_sites;
    const double down = std::exp(-2.0 * beta);

    const auto rows = parallel_map(n_disorder, threads, [&](std::size_t k) {
      Rng rng(derive_seed(seed, k), streams::kGraph);
      std::vector<Edge> edges;
      append_uniform_edges(n_sites, kmax, rng, edges);
      // w[c] = exp(beta (score(c) - offset)), the all-up configuration keeps weight 1
      std::vector<double> w(configs, 1.0);
      double offset = 0.0;
      double a_b = 0.0;
      double a_p = 0.0;
      for (std::size_t e = 0; e <= kmax; ++e) {
        if (e > 0) {
          const Edge& edge = edges[e - 1];
          offset += beta;
          if (edge.i != edge.j) {
            for (std::size_t c = 0; c < configs; ++c)
              if (((c >> edge.i) ^ (c >> edge.j)) & 1U) w[c] *= down;
          }
        }
        if (p_bern[e] == 0.0 && p_pois[e] == 0.0) continue;
        double z = 0.0;
        for (double x : w) z += x;
        const double f = offset + std::log(z);
        a_b += p_bern[e] * f;
        a_p += p_pois[e] * f;
      }
      const double inv_n = 1.0 / static_cast<double>(n_sites);
      return std::vector<double>{a_b * inv_n, a_p * inv_n, (a_b - a_p) * inv_n};
    });

    FreeEnergyPoint p;
    p.n_sites = n_sites;
    p.a_bernoulli = column_estimate(rows, 0);
    p.a_poisson = column_estimate(rows, 1);
    p.diff = column_estimate(rows, 2);
    out.push_back(p);
  }
  return out;
}

}  // namespace dfl
