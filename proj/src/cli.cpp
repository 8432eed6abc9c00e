#include "dfl/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>

#include "dfl/errors.hpp"
#include "dfl/gibbs_exact.hpp"
#include "dfl/gibbs_mc.hpp"
#include "dfl/identities.hpp"
#include "dfl/parallel.hpp"
#include "dfl/symbolic.hpp"

namespace dfl {

namespace {

using nlohmann::json;

json estimate_json(const Estimate& e) {
  json j;
  j["value"] = e.value;
  j["stderr"] = e.has_stderr() ? json(e.error) : json(nullptr);
  return j;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ParameterError("cannot open output file '" + path + "'");
  f << text;
}

json read_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ParameterError("cannot open file '" + path + "'");
  try {
    return json::parse(f);
  } catch (const json::exception& ex) {
    throw ParameterError("malformed JSON in '" + path + "': " + ex.what());
  }
}

// Turns {"alpha": 1, "n": "6,8", "compare": true} into flag arguments.
std::vector<std::string> config_arguments(const json& cfg) {
  if (!cfg.is_object()) throw ParameterError("config file must hold a JSON object");
  std::vector<std::string> out;
  for (const auto& [key, value] : cfg.items()) {
    const std::string flag = "--" + key;
    if (value.is_boolean()) {
      if (value.get<bool>()) out.push_back(flag);
    } else if (value.is_string()) {
      out.push_back(flag);
      out.push_back(value.get<std::string>());
    } else if (value.is_number_integer() || value.is_number_unsigned()) {
      out.push_back(flag);
      out.push_back(value.dump());
    } else if (value.is_number_float()) {
      std::ostringstream os;
      os.precision(17);
      os << value.get<double>();
      out.push_back(flag);
      out.push_back(os.str());
    } else if (value.is_array()) {
      std::string joined;
      for (const auto& v : value) joined += (joined.empty() ? "" : ",") + (v.is_string() ? v.get<std::string>() : v.dump());
      out.push_back(flag);
      out.push_back(joined);
    } else {
      throw ParameterError("unsupported value for config key '" + key + "'");
    }
  }
  return out;
}

struct CommonOptions {
  std::string model = "poisson";
  double alpha = 1.0;
  unsigned n = 8;
  std::string n_list;
  double beta = 0.4;
  std::string beta_range;
  std::uint64_t seed = 0;
  std::string engine = "exact";
  std::size_t disorder = 100;
  int burn_in = 1000;
  int sweeps = 10000;
  int thin = 10;
  int replicas = 0;
  std::string json_path;
  std::string csv_path;
};

McParams mc_params(const CommonOptions& o) {
  McParams p;
  p.n_replicas = std::max(1, o.replicas);
  p.burn_in_sweeps = o.burn_in;
  p.measure_sweeps = o.sweeps;
  p.thin = o.thin;
  return p;
}

void emit(std::ostream& out, const CommonOptions& o, const json& payload, const std::string& csv) {
  if (!o.json_path.empty()) write_text(o.json_path, payload.dump(2) + "\n");
  if (!o.csv_path.empty()) write_text(o.csv_path, csv);
  if (o.json_path.empty() && o.csv_path.empty()) out << payload.dump(2) << "\n";
}

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

// ---- selftest ------------------------------------------------------------

struct Check {
  std::string name;
  std::function<bool(std::string&)> run;
};

std::vector<Check> selftest_checks() {
  std::vector<Check> checks;
  checks.push_back({"two-spin partition function", [](std::string& detail) {
                      QuenchedGraph g{2, {{0, 1}}, {}, 0};
                      const double v = log_partition(g, 0.5);
                      detail = fmt(v);
                      return std::abs(v - std::log(4.0 * std::cosh(0.5))) < 1e-12;
                    }});
  checks.push_back({"beta=0 identity values", [](std::string& detail) {
                      for (unsigned n : {4U, 8U}) {
                        RunOptions opt;
                        opt.n_disorder = 3;
                        opt.seed = 11;
                        const auto r = residuals({DilutionKind::Poisson, 1.0}, n, 0.0, opt);
                        const double expect = 2.0 * (n - 1.0) / (n * n * n);
                        for (const auto& [id, want] : {std::pair{"I1", expect}, std::pair{"I5", expect},
                                                       std::pair{"I2", 0.0}, std::pair{"I4", 0.0}}) {
                          if (std::abs(r.residuals.at(id).value - want) > 1e-12) {
                            detail = std::string(id) + " at N=" + std::to_string(n);
                            return false;
                          }
                        }
                      }
                      return true;
                    }});
  checks.push_back({"first Griffiths inequality", [](std::string& detail) {
                      for (std::uint64_t s = 0; s < 5; ++s) {
                        const auto g = sample_graph({DilutionKind::Poisson, 1.5}, 8, s);
                        const CorrelationTable t(SpinSystem::from_graph(g), 0.7);
                        for (std::uint32_t i = 0; i < 8; ++i)
                          for (std::uint32_t j = i + 1; j < 8; ++j)
                            if (t[(1U << i) | (1U << j)] < -1e-12) {
                              detail = "negative pair correlation";
                              return false;
                            }
                      }
                      return true;
                    }});
  checks.push_back({"symbolic methods agree", [](std::string& detail) {
                      for (const auto& [g, s] : {std::pair{"m1^2", 1}, std::pair{"q12^2", 2}}) {
                        if (!compare_methods(parse_monomial(g), s, 3).all_equal) {
                          detail = g;
                          return false;
                        }
                      }
                      return true;
                    }});
  checks.push_back({"generator identities", [](std::string& detail) {
                      std::vector<std::string> got;
                      for (auto g : {GeneratorKind::M2, GeneratorKind::Q12Sq})
                        for (const auto& e : extract_identities(generator_combination(g, DilutionKind::Bernoulli)))
                          got.push_back(to_string(e));
                      std::vector<std::string> want;
                      for (const auto& id : standard_identities())
                        want.push_back(to_string(id.expression));
                      // I4 coincides with I2 in canonical form; generator order is I1 I2 I3 I4 I5 I6
                      detail = std::to_string(got.size()) + " identities";
                      return got == want;
                    }});
  checks.push_back({"distribution identities", [](std::string& detail) {
                      Rng rng(5, streams::kAux);
                      for (auto kind : {DilutionKind::Bernoulli, DilutionKind::Poisson}) {
                        for (int power = 0; power <= 2; ++power) {
                          const auto r = check_distribution_identity(
                              {kind, 2.0}, 8, [power](std::uint64_t k) { return std::pow(double(k), power); },
                              20000, rng);
                          if (std::abs(r.lhs - r.rhs) > 4.0 * r.diff_stderr + 1e-12) {
                            detail = to_string(kind) + " g=k^" + std::to_string(power);
                            return false;
                          }
                        }
                      }
                      return true;
                    }});
  checks.push_back({"heat-bath detailed balance", [](std::string& detail) {
                      for (double beta : {0.2, 1.0, 3.0})
                        for (int h = -4; h <= 4; ++h) {
                          const double p = heat_bath_probability(beta, h);
                          // p(-1 -> +1) w(-1) = p(+1 -> -1) w(+1) with w(s) = exp(beta h s)
                          const double lhs = p * std::exp(-beta * h);
                          const double rhs = heat_bath_probability(beta, -h) * std::exp(beta * h);
                          if (std::abs(lhs - rhs) > 1e-12 * std::max(1.0, lhs)) {
                            detail = "beta=" + fmt(beta);
                            return false;
                          }
                        }
                      return true;
                    }});
  checks.push_back({"MC two-spin correlation", [](std::string& detail) {
                      QuenchedGraph g{2, {{0, 1}}, {}, 0};
                      McParams p;
                      p.n_replicas = 2;
                      p.burn_in_sweeps = 200;
                      p.measure_sweeps = 40000;
                      p.thin = 1;
                      Rng rng(3, streams::kThermal);
                      const auto e = estimate_monomials(g, 1.0, {parse_monomial("q12^2")}, p, rng).front();
                      // at N=2, q12^2 = (1 + omega(s0 s1)^2) / 2 in the product state
                      const double want = 0.5 * (1.0 + std::pow(std::tanh(1.0), 2));
                      detail = fmt(e.value) + " vs " + fmt(want);
                      return std::abs(e.value - want) <= 4.0 * e.error;
                    }});
  checks.push_back({"canonical form invariance", [](std::string& detail) {
                      const auto a = parse_monomial("q12^2 q13^2");
                      const auto b = parse_monomial("q23^2 q12^2");
                      const auto c = parse_monomial("q{1,1}^2");
                      detail = to_string(a);
                      return a == b && c.is_one() && canonicalize(a) == a;
                    }});
  checks.push_back({"variance bound", [](std::string& detail) {
                      const auto r = variance_bound_check({DilutionKind::Bernoulli, 1.0}, 8, 0.1, 1.0, 16, 50, 7);
                      detail = fmt(r.integral.value) + " <= " + fmt(r.bound);
                      return r.integral.value >= 0.0 && r.integral.value <= r.bound;
                    }});
  checks.push_back({"gauge identity at beta=0", [](std::string& detail) {
                      const auto r = cavity_gauge_check(1.0, 6, 0.0, 20, 9);
                      detail = fmt(r.difference);
                      return std::abs(r.difference) < 1e-9;
                    }});
  return checks;
}

int run_selftest(std::ostream& out) {
  json results = json::array();
  bool ok = true;
  for (const auto& check : selftest_checks()) {
    std::string detail;
    bool pass = false;
    try {
      pass = check.run(detail);
    } catch (const std::exception& ex) {
      detail = std::string("exception: ") + ex.what();
    }
    ok = ok && pass;
    out << (pass ? "PASS " : "FAIL ") << check.name << (detail.empty() ? "" : " (" + detail + ")") << "\n";
    results.push_back({{"check", check.name}, {"pass", pass}, {"detail", detail}});
  }
  out << json{{"schema_version", kSchemaVersion}, {"kind", "selftest"}, {"pass", ok}, {"checks", results}}.dump()
      << "\n";
  return ok ? kExitOk : kExitSelftest;
}

void add_model_options(CLI::App* app, CommonOptions& o) {
  app->add_option("--model", o.model, "Dilution model: bernoulli or poisson");
  app->add_option("--alpha", o.alpha, "Connectivity alpha");
  app->add_option("--seed", o.seed, "Master seed");
}

void add_output_options(CLI::App* app, CommonOptions& o) {
  app->add_option("--json", o.json_path, "Write the JSON report to this path");
  app->add_option("--csv", o.csv_path, "Write the CSV table to this path");
}

void add_mc_options(CLI::App* app, CommonOptions& o) {
  app->add_option("--burn-in", o.burn_in, "MC burn-in sweeps");
  app->add_option("--sweeps", o.sweeps, "MC measurement sweeps");
  app->add_option("--thin", o.thin, "Sweeps between MC measurements");
  app->add_option("--replicas", o.replicas, "Replica count (default: as many as the monomials need)");
}

DilutionModel model_of(const CommonOptions& o) { return {parse_dilution_kind(o.model), o.alpha}; }

RunOptions run_options(const CommonOptions& o, unsigned threads) {
  RunOptions r;
  r.engine = parse_engine(o.engine);
  r.n_disorder = o.disorder;
  r.seed = o.seed;
  r.mc = mc_params(o);
  r.threads = threads;
  return r;
}

std::vector<OverlapMonomial> monomial_list(const std::vector<std::string>& texts) {
  if (texts.empty()) return identity_monomials();
  std::vector<OverlapMonomial> out;
  for (const auto& t : texts) out.push_back(parse_monomial(t));
  return out;
}

}  // namespace

std::vector<unsigned> parse_int_list(const std::string& text) {
  std::vector<unsigned> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const long v = std::stol(item, &used);
      if (used != item.size() || v <= 0) throw std::invalid_argument(item);
      out.push_back(static_cast<unsigned>(v));
    } catch (const std::exception&) {
      throw ParameterError("cannot parse integer list '" + text + "'");
    }
  }
  if (out.empty()) throw ParameterError("empty integer list");
  return out;
}

BetaRange parse_beta_range(const std::string& text) {
  BetaRange r;
  char c1 = 0;
  char c2 = 0;
  std::istringstream is(text);
  if (!(is >> r.lo >> c1 >> r.hi >> c2 >> r.points) || c1 != ':' || c2 != ':' || !is.eof())
    throw ParameterError("beta range must look like lo:hi:points, got '" + text + "'");
  if (!(r.hi > r.lo) || r.lo < 0.0 || r.points < 2) throw ParameterError("beta range needs 0 <= lo < hi and >= 2 points");
  return r;
}

int run_cli(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Diluted ferromagnet: sampling, exact and MC observables, identity checks, symbolic derivations", "dfl"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.fallthrough();
  std::optional<unsigned> thread_flag;
  std::string config_path;
  app.add_option("--threads", thread_flag, "Worker threads (DFL_THREADS takes precedence when set)");
  app.add_option("--config", config_path, "JSON file of option values; command-line flags win");

  CommonOptions o;
  std::vector<std::string> monomial_texts;
  std::string quantity = "residuals";
  std::string generator = "m2";
  std::string variant = "cavity";
  std::string graph_path;
  std::string g_text = "m1^2";
  int s = 0;
  int order = 3;
  bool compare = false;
  bool symbolic_json = false;
  double density = 0.5;

  auto* sample = app.add_subcommand("sample-graph", "Sample and dump one quenched graph");
  add_model_options(sample, o);
  sample->add_option("--n", o.n, "Number of sites");
  add_output_options(sample, o);

  auto* exact = app.add_subcommand("exact", "Exact observables on one graph");
  add_model_options(exact, o);
  exact->add_option("--n", o.n, "Number of sites");
  exact->add_option("--beta", o.beta, "Inverse temperature");
  exact->add_option("--graph", graph_path, "Read the graph from a JSON dump instead of sampling");
  exact->add_option("--monomial", monomial_texts, "Monomials to evaluate (default: all identity monomials)");
  add_output_options(exact, o);

  auto* mc = app.add_subcommand("mc", "Monte Carlo observables");
  add_model_options(mc, o);
  mc->add_option("--n", o.n, "Number of sites");
  mc->add_option("--beta", o.beta, "Inverse temperature");
  mc->add_option("--disorder", o.disorder, "Disorder samples");
  mc->add_option("--monomial", monomial_texts, "Monomials to estimate (default: all identity monomials)");
  add_mc_options(mc, o);
  add_output_options(mc, o);

  auto* ids = app.add_subcommand("identities", "Identity residual report");
  add_model_options(ids, o);
  ids->add_option("--n", o.n, "Number of sites");
  ids->add_option("--beta", o.beta, "Inverse temperature");
  ids->add_option("--engine", o.engine, "exact or mc");
  ids->add_option("--disorder", o.disorder, "Disorder samples");
  add_mc_options(ids, o);
  add_output_options(ids, o);

  auto* scan = app.add_subcommand("scan", "Sweeps over N or beta");
  add_model_options(scan, o);
  scan->add_option("--quantity", quantity, "residuals, var-bound or fg");
  scan->add_option("--n", o.n_list, "Comma-separated sizes");
  scan->add_option("--beta", o.beta, "Inverse temperature (residuals)");
  scan->add_option("--beta-range", o.beta_range, "lo:hi:points (var-bound, fg, or a residual beta sweep)");
  scan->add_option("--engine", o.engine, "exact or mc");
  scan->add_option("--disorder", o.disorder, "Disorder samples");
  scan->add_option("--generator", generator, "m2 or q12sq (fg)");
  add_mc_options(scan, o);
  add_output_options(scan, o);

  auto* cmp = app.add_subcommand("compare-dilutions", "Free energy of both dilutions at equal edge density");
  cmp->add_option("--c", density, "Edge density c (mean edges per site)");
  cmp->add_option("--n", o.n_list, "Comma-separated sizes");
  cmp->add_option("--beta", o.beta, "Inverse temperature");
  cmp->add_option("--disorder", o.disorder, "Disorder samples");
  cmp->add_option("--seed", o.seed, "Master seed");
  add_output_options(cmp, o);

  auto* gauge = app.add_subcommand("gauge-check", "Cavity gauge identity");
  gauge->add_option("--alpha", o.alpha, "Connectivity alpha");
  gauge->add_option("--n", o.n, "Number of sites N (the comparison uses N+1)");
  gauge->add_option("--beta", o.beta, "Inverse temperature");
  gauge->add_option("--disorder", o.disorder, "Disorder samples");
  gauge->add_option("--seed", o.seed, "Master seed");
  gauge->add_option("--variant", variant, "cavity (t=1) or bulk (t=0)");
  add_output_options(gauge, o);

  auto* sym = app.add_subcommand("symbolic", "Derive identities from both methods");
  sym->add_option("--g", g_text, "Generator monomial, e.g. m1^2 or q12^2");
  sym->add_option("--s", s, "Replica count (default: largest label of G)");
  sym->add_option("--order", order, "Expansion order K");
  sym->add_flag("--compare", compare, "Compare the two methods order by order");
  sym->add_flag("--json", symbolic_json, "Print JSON instead of text");

  auto* selftest = app.add_subcommand("selftest", "Run the built-in invariant checks");

  try {
    std::vector<std::string> args = raw_args;
    // the config file is read first so that its values can be overridden
    for (std::size_t k = 0; k + 1 < args.size(); ++k) {
      if (args[k] == "--config") {
        auto extra = config_arguments(read_json_file(args[k + 1]));
        // options belong to the subcommand: insert them after its name
        std::size_t at = args.size();
        for (std::size_t p = 0; p < args.size(); ++p)
          if (app.get_subcommand_ptr(args[p]) != nullptr) {
            at = p + 1;
            break;
          }
        args.insert(args.begin() + static_cast<std::ptrdiff_t>(at), extra.begin(), extra.end());
        break;
      }
    }
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);

    const unsigned threads = resolve_threads(thread_flag);

    if (*sample) {
      const auto g = sample_graph(model_of(o), o.n, o.seed);
      json j = graph_to_json(g);
      j["schema_version"] = kSchemaVersion;
      emit(out, o, j, "");
    } else if (*exact) {
      QuenchedGraph g = graph_path.empty() ? sample_graph(model_of(o), o.n, o.seed) : graph_from_json(read_json_file(graph_path));
      check_exact_capacity(g.n_sites);
      if (!std::isfinite(o.beta) || o.beta < 0.0) throw ParameterError("beta must be finite and >= 0");
      const auto monomials = monomial_list(monomial_texts);
      auto table = std::make_shared<const CorrelationTable>(SpinSystem::from_graph(g), o.beta);
      const MonomialEvaluator eval(table);
      const auto energy = internal_energy_stats(g, o.beta);
      json values = json::object();
      std::string csv = "monomial,value\n";
      for (const auto& m : monomials) {
        const double v = eval(m);
        values[to_string(m)] = v;
        csv += to_string(m) + "," + fmt(v) + "\n";
      }
      json pairs = json::array();
      for (std::uint32_t i = 0; i < g.n_sites; ++i)
        for (std::uint32_t j = i + 1; j < g.n_sites; ++j) pairs.push_back({i, j, (*table)[(1U << i) | (1U << j)]});
      emit(out, o,
           {{"schema_version", kSchemaVersion},
            {"kind", "exact"},
            {"graph", graph_to_json(g)},
            {"beta", o.beta},
            {"theta", std::tanh(o.beta)},
            {"log_z", table->log_partition()},
            {"mean_h", energy.mean_h},
            {"thermal_variance_h", energy.thermal_variance_h},
            {"monomials", values},
            {"pair_correlations", pairs}},
           csv);
    } else if (*mc) {
      const auto monomials = monomial_list(monomial_texts);
      McParams params = mc_params(o);
      params.n_replicas = std::max(params.n_replicas, required_replicas(monomials));
      json values = json::object();
      std::string csv = "monomial,value,stderr,n_disorder\n";
      if (o.disorder <= 1) {
        const auto g = sample_graph(model_of(o), o.n, derive_seed(o.seed, 0));
        Rng rng(g.seed, streams::kThermal);
        const auto est = estimate_monomials(g, o.beta, monomials, params, rng);
        for (std::size_t m = 0; m < monomials.size(); ++m) {
          values[to_string(monomials[m])] = estimate_json(est[m]);
          csv += to_string(monomials[m]) + "," + fmt(est[m].value) + "," + fmt(est[m].error) + ",1\n";
        }
      } else {
        const auto est = quenched_estimate(model_of(o), o.n, o.beta, monomials, params, o.disorder, o.seed, threads);
        for (std::size_t m = 0; m < monomials.size(); ++m) {
          values[to_string(monomials[m])] = estimate_json({est[m].mean, est[m].error});
          csv += to_string(monomials[m]) + "," + fmt(est[m].mean) + "," + fmt(est[m].error) + "," +
                 std::to_string(o.disorder) + "\n";
        }
      }
      emit(out, o,
           {{"schema_version", kSchemaVersion},
            {"kind", "mc"},
            {"model", o.model},
            {"alpha", o.alpha},
            {"n", o.n},
            {"beta", o.beta},
            {"n_disorder", o.disorder},
            {"seed", o.seed},
            {"params",
             {{"replicas", params.n_replicas},
              {"burn_in", params.burn_in_sweeps},
              {"sweeps", params.measure_sweeps},
              {"thin", params.thin}}},
            {"monomials", values}},
           csv);
    } else if (*ids) {
      const auto report = residuals(model_of(o), o.n, o.beta, run_options(o, threads));
      emit(out, o, to_json(report), to_csv(report));
    } else if (*scan) {
      const std::vector<unsigned> sizes = o.n_list.empty() ? std::vector<unsigned>{o.n} : parse_int_list(o.n_list);
      const DilutionModel model = model_of(o);
      json rows = json::array();
      std::string csv;
      if (quantity == "residuals") {
        std::vector<double> betas{o.beta};
        if (!o.beta_range.empty()) {
          const auto r = parse_beta_range(o.beta_range);
          betas = linspace(r.lo, r.hi, r.points);
        }
        csv = csv_header();
        for (unsigned n : sizes)
          for (double beta : betas) {
            const auto report = residuals(model, n, beta, run_options(o, threads));
            rows.push_back(to_json(report));
            csv += to_csv(report, false);
          }
      } else if (quantity == "var-bound") {
        const auto r = parse_beta_range(o.beta_range.empty() ? "0.1:1.0:64" : o.beta_range);
        csv = "model,N,alpha,beta_lo,beta_hi,points,integral,stderr,bound,ratio,disorder_integral,n_disorder,seed\n";
        for (unsigned n : sizes) {
          const auto v = variance_bound_check(model, n, r.lo, r.hi, r.points, o.disorder, o.seed, threads);
          rows.push_back({{"n", n},
                          {"integral", estimate_json(v.integral)},
                          {"bound", v.bound},
                          {"ratio", v.ratio},
                          {"disorder_variance_integral", v.disorder_integral}});
          csv += o.model + "," + std::to_string(n) + "," + fmt(o.alpha) + "," + fmt(r.lo) + "," + fmt(r.hi) + "," +
                 std::to_string(r.points) + "," + fmt(v.integral.value) + "," + fmt(v.integral.error) + "," +
                 fmt(v.bound) + "," + fmt(v.ratio) + "," + fmt(v.disorder_integral) + "," +
                 std::to_string(o.disorder) + "," +
                 std::to_string(o.seed) + "\n";
        }
      } else if (quantity == "fg") {
        const auto r = parse_beta_range(o.beta_range.empty() ? "0.1:0.8:32" : o.beta_range);
        const auto grid = linspace(r.lo, r.hi, r.points);
        const auto g = parse_generator(generator);
        csv = "model,N,alpha,generator,beta,value,stderr,n_disorder,engine,seed\n";
        for (unsigned n : sizes) {
          const auto p = f_G_profile(model, n, g, grid, run_options(o, threads));
          json values = json::array();
          for (std::size_t b = 0; b < grid.size(); ++b) {
            values.push_back({{"beta", grid[b]}, {"value", estimate_json(p.values[b])}});
            csv += o.model + "," + std::to_string(n) + "," + fmt(o.alpha) + "," + to_string(g) + "," + fmt(grid[b]) +
                   "," + fmt(p.values[b].value) + "," + fmt(p.values[b].error) + "," + std::to_string(o.disorder) +
                   "," + o.engine + "," + std::to_string(o.seed) + "\n";
          }
          rows.push_back({{"n", n}, {"generator", to_string(g)}, {"integral", estimate_json(p.integral)}, {"profile", values}});
        }
      } else {
        throw ParameterError("unknown scan quantity '" + quantity + "' (expected residuals, var-bound or fg)");
      }
      emit(out, o,
           {{"schema_version", kSchemaVersion},
            {"kind", "scan"},
            {"quantity", quantity},
            {"model", o.model},
            {"alpha", o.alpha},
            {"n_disorder", o.disorder},
            {"seed", o.seed},
            {"rows", rows}},
           csv);
    } else if (*cmp) {
      const std::vector<unsigned> sizes = o.n_list.empty() ? std::vector<unsigned>{6, 8, 10, 12} : parse_int_list(o.n_list);
      const std::vector<std::uint32_t> ns(sizes.begin(), sizes.end());
      const auto points = free_energy_compare(density, ns, o.beta, o.disorder, o.seed, threads);
      json rows = json::array();
      std::string csv = "N,c,beta,A_bernoulli,stderr_bernoulli,A_poisson,stderr_poisson,diff,stderr_diff,n_disorder,seed\n";
      for (const auto& p : points) {
        rows.push_back({{"n", p.n_sites},
                        {"A_bernoulli", estimate_json(p.a_bernoulli)},
                        {"A_poisson", estimate_json(p.a_poisson)},
                        {"diff", estimate_json(p.diff)}});
        csv += std::to_string(p.n_sites) + "," + fmt(density) + "," + fmt(o.beta) + "," + fmt(p.a_bernoulli.value) +
               "," + fmt(p.a_bernoulli.error) + "," + fmt(p.a_poisson.value) + "," + fmt(p.a_poisson.error) + "," +
               fmt(p.diff.value) + "," + fmt(p.diff.error) + "," + std::to_string(o.disorder) + "," +
               std::to_string(o.seed) + "\n";
      }
      emit(out, o,
           {{"schema_version", kSchemaVersion},
            {"kind", "compare_dilutions"},
            {"c", density},
            {"beta", o.beta},
            {"n_disorder", o.disorder},
            {"seed", o.seed},
            {"rows", rows}},
           csv);
    } else if (*gauge) {
      GaugeVariant v;
      if (variant == "cavity")
        v = GaugeVariant::Cavity;
      else if (variant == "bulk")
        v = GaugeVariant::Bulk;
      else
        throw ParameterError("unknown gauge variant '" + variant + "'");
      const auto r = cavity_gauge_check(o.alpha, o.n, o.beta, o.disorder, o.seed, v, threads);
      emit(out, o,
           {{"schema_version", kSchemaVersion},
            {"kind", "gauge_check"},
            {"variant", variant},
            {"alpha", o.alpha},
            {"n", o.n},
            {"beta", o.beta},
            {"n_disorder", o.disorder},
            {"seed", o.seed},
            {"mean_lhs", estimate_json(r.lhs)},
            {"mean_rhs", estimate_json(r.rhs)},
            {"difference", r.difference},
            {"stderr", r.stderr_difference},
            {"self_pair_shift", r.self_pair_shift}},
           "");
    } else if (*sym) {
      std::string text = g_text;
      if (text == "m^2" || text == "m2") text = "m1^2";
      const OverlapMonomial g = parse_monomial(text);
      const int replicas = s > 0 ? s : std::max(1, g.max_label());
      const auto streaming = gauge_complete(streaming_derivative(g, replicas, order));
      const auto averaging = self_averaging_fG(g, replicas, std::max(0, order - 1));
      const auto identities = extract_identities(averaging);
      if (symbolic_json) {
        json j{{"schema_version", kSchemaVersion},
               {"kind", "symbolic"},
               {"g", to_string(g)},
               {"s", replicas},
               {"order", order},
               {"streaming_derivative", to_json(streaming_derivative(g, replicas, order))},
               {"gauge_completed", to_json(streaming)},
               {"self_averaging_fG", to_json(averaging)}};
        json list = json::array();
        for (const auto& e : identities) list.push_back(to_json(e));
        j["identities"] = list;
        if (compare) j["comparison"] = to_json(compare_methods(g, replicas, order));
        out << j.dump(2) << "\n";
      } else {
        out << "G = " << to_string(g) << ", s = " << replicas << ", K = " << order << "\n\n";
        out << "streaming derivative:\n" << to_string(streaming_derivative(g, replicas, order)) << "\n\n";
        out << "after gauge completion:\n" << to_string(streaming) << "\n\n";
        out << "self-averaging generator f_G:\n" << to_string(averaging) << "\n\n";
        out << "identities:\n";
        for (std::size_t k = 0; k < identities.size(); ++k) out << "  " << k + 1 << ". " << to_string(identities[k]) << " = 0\n";
        if (compare) {
          const auto report = compare_methods(g, replicas, order);
          out << "\n";
          for (const auto& c : report.orders)
            out << "  identity " << c.index + 1 << ": streaming theta^" << c.streaming_order << " vs generator theta^"
                << c.self_averaging_order << ": " << (c.equal ? "equal" : "different")
                << ", coefficient ratio " << to_string(c.ratio) << "\n";
          out << "methods agree: " << (report.all_equal ? "true" : "false") << "\n";
        }
      }
    } else if (*selftest) {
      return run_selftest(out);
    }
    return kExitOk;
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& ex) {
    err << json{{"schema_version", kSchemaVersion}, {"error", "config"}, {"message", ex.what()}}.dump() << "\n";
    return kExitConfig;
  } catch (const CapacityError& ex) {
    err << json{{"schema_version", kSchemaVersion}, {"error", "capacity"}, {"message", ex.what()}}.dump() << "\n";
    return kExitCapacity;
  } catch (const ParameterError& ex) {
    err << json{{"schema_version", kSchemaVersion}, {"error", "config"}, {"message", ex.what()}}.dump() << "\n";
    return kExitConfig;
  } catch (const StructuralError& ex) {
    err << json{{"schema_version", kSchemaVersion}, {"error", "structural"}, {"message", ex.what()}}.dump() << "\n";
    return kExitConfig;
  } catch (const std::exception& ex) {
    err << json{{"schema_version", kSchemaVersion}, {"error", "internal"}, {"message", ex.what()}}.dump() << "\n";
    return kExitConfig;
  }
}

}  // namespace dfl
