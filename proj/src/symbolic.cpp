#include "dfl/symbolic.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

#include "dfl/errors.hpp"

namespace dfl {

namespace {

std::int64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::int64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

void check_order_args(const OverlapMonomial& m, int s, int order, int min_order) {
  if (s < 1) throw ParameterError("replica count s must be >= 1");
  if (order < min_order) throw ParameterError("expansion order is out of range");
  if (s > 16) throw CapacityError("replica count s is limited to 16");
  if (canonicalize(m).max_label() > s)
    throw ParameterError("s must be at least the largest replica label of the monomial");
}

std::vector<ReplicaLabel> labels_of(std::uint32_t mask) {
  std::vector<ReplicaLabel> out;
  for (int a = 0; a < 32; ++a)
    if (mask & (1U << a)) out.push_back(a + 1);
  return out;
}

std::vector<ReplicaLabel> with_fresh(std::vector<ReplicaLabel> set, int first_fresh, int count) {
  for (int k = 0; k < count; ++k) set.push_back(first_fresh + k);
  return set;
}

OverlapMonomial times_factor(const OverlapMonomial& m, std::vector<ReplicaLabel> set, int exponent) {
  if (set.empty()) return canonicalize(m);
  return multiply(m, overlap(std::move(set), exponent));
}

// Expected value of tau^(l) times the reweighted state for `replicas`
// replicas sharing one extra edge: sum over A of theta^(|A|+u) times
// (-1)^u binom(replicas+u-1, u) <G q^2 over (A xor {l}) + fresh>.
void add_edge_expansion(MonomialCombination& out, const OverlapMonomial& g, int replicas, int l, int order,
                        const Rational& weight, Prefactor prefactor) {
  const std::uint32_t full = (1U << replicas) - 1U;
  for (std::uint32_t a = 0; a <= full; ++a) {
    const int size = std::popcount(a);
    if (size > order) continue;
    const std::uint32_t b = a ^ (1U << (l - 1));
    for (int u = 0; size + u <= order; ++u) {
      const Rational c = weight * denominator_coefficient(replicas, u);
      const auto set = with_fresh(labels_of(b), replicas + 1, u);
      out.add(times_factor(g, set, 2), Coefficient{c, size + u, prefactor, false});
    }
  }
}

}  // namespace

std::string to_string(const Rational& r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

std::string to_string(Prefactor p) {
  switch (p) {
    case Prefactor::AlphaPrime:
      return "alpha'";
    case Prefactor::Alpha:
      return "alpha";
    case Prefactor::TwoAlphaTilde:
      return "2alpha~";
  }
  return "?";
}

double Coefficient::evaluate(double theta, double prefactor_value) const {
  double v = boost::rational_cast<double>(value) * prefactor_value * std::pow(theta, theta_power);
  if (one_minus_theta_sq) v *= 1.0 - theta * theta;
  return v;
}

void MonomialCombination::add(const OverlapMonomial& monomial, const Coefficient& coefficient) {
  if (coefficient.value.numerator() == 0) return;
  const OverlapMonomial key = canonicalize(monomial);
  auto& list = terms_[key];
  auto it = std::find_if(list.begin(), list.end(), [&](const Coefficient& c) { return c.same_shape(coefficient); });
  if (it == list.end()) {
    list.push_back(coefficient);
  } else {
    it->value += coefficient.value;
    if (it->value.numerator() == 0) list.erase(it);
  }
  if (list.empty()) {
    terms_.erase(key);
    return;
  }
  std::sort(list.begin(), list.end(), [](const Coefficient& x, const Coefficient& y) {
    return std::tie(x.theta_power, x.prefactor, x.one_minus_theta_sq) <
           std::tie(y.theta_power, y.prefactor, y.one_minus_theta_sq);
  });
}

void MonomialCombination::add(const MonomialCombination& other) {
  for (const auto& [m, list] : other.terms_)
    for (const auto& c : list) add(m, c);
}

std::size_t MonomialCombination::size() const {
  std::size_t n = 0;
  for (const auto& [m, list] : terms_) n += list.size();
  return n;
}

Rational MonomialCombination::coefficient(const OverlapMonomial& monomial, int theta_power) const {
  Rational r = 0;
  auto it = terms_.find(canonicalize(monomial));
  if (it == terms_.end()) return r;
  for (const auto& c : it->second)
    if (c.theta_power == theta_power) r += c.value;
  return r;
}

int MonomialCombination::max_theta_power() const {
  int p = -1;
  for (const auto& [m, list] : terms_)
    for (const auto& c : list) p = std::max(p, c.theta_power);
  return p;
}

double MonomialCombination::evaluate(const std::function<double(const OverlapMonomial&)>& value, double theta,
                                     double prefactor_value) const {
  double total = 0.0;
  for (const auto& [m, list] : terms_) {
    double coeff = 0.0;
    for (const auto& c : list) coeff += c.evaluate(theta, prefactor_value);
    if (coeff != 0.0) total += coeff * value(m);
  }
  return total;
}

Rational denominator_coefficient(int s, int u) {
  const std::int64_t b = binomial(s + u - 1, u);
  return Rational(u % 2 == 0 ? b : -b);
}

MonomialCombination streaming_derivative(const OverlapMonomial& f, int s, int order) {
  check_order_args(f, s, order, 1);
  MonomialCombination out;
  const std::uint32_t full = (1U << s) - 1U;
  for (std::uint32_t a = 0; a <= full; ++a) {
    const int j = std::popcount(a);
    if (j > order) continue;
    for (int u = 0; j + u <= order; ++u) {
      if (j + u == 0) continue;  // cancels against -<F>
      const auto set = with_fresh(labels_of(a), s + 1, u);
      out.add(times_factor(f, set, 1),
              Coefficient{denominator_coefficient(s, u), j + u, Prefactor::TwoAlphaTilde, false});
    }
  }
  return out;
}

MonomialCombination gauge_complete(const MonomialCombination& c) {
  MonomialCombination out;
  for (const auto& [m, list] : c.terms()) {
    const auto odd = odd_replicas(m);
    if (odd.empty()) {
      for (const auto& coeff : list) out.add(m, coeff);
      continue;
    }
    const bool single = std::any_of(m.factors().begin(), m.factors().end(), [&](const OverlapFactor& f) {
      return f.replicas == odd && f.exponent % 2 == 1;
    });
    if (!single)
      throw StructuralError("odd part of '" + to_string(m) + "' is not a single appended factor");
    const OverlapMonomial squared = multiply(m, overlap(odd, 1));
    for (const auto& coeff : list) out.add(squared, coeff);
  }
  return out;
}

MonomialCombination self_averaging_fG_series(const OverlapMonomial& g, int s, int order, Prefactor prefactor) {
  check_order_args(g, s, order, 0);
  MonomialCombination out;
  // energy on one of the replicas of G
  for (int l = 1; l <= s; ++l) add_edge_expansion(out, g, s, l, order, Rational(1), prefactor);
  // energy on an independent replica, s + 1, counted once per l
  add_edge_expansion(out, g, s + 1, s + 1, order, Rational(-s), prefactor);
  return out;
}

MonomialCombination self_averaging_fG(const OverlapMonomial& g, int s, int order, Prefactor prefactor) {
  const MonomialCombination series = self_averaging_fG_series(g, s, order, prefactor);
  // sum_k c_k theta^k = (1 - theta^2) sum_k theta^k (c_k + c_{k-2} + ...)
  MonomialCombination out;
  for (const auto& [m, list] : series.terms()) {
    for (const auto& c : list) {
      for (int k = c.theta_power; k <= order; k += 2)
        out.add(m, Coefficient{c.value, k, prefactor, true});
    }
  }
  return out;
}

IdentityExpression make_identity(const std::vector<std::pair<OverlapMonomial, Rational>>& terms, int order) {
  std::map<OverlapMonomial, Rational> merged;
  for (const auto& [m, r] : terms) merged[canonicalize(m)] += r;
  IdentityExpression e;
  e.order = order;
  for (const auto& [m, r] : merged)
    if (r.numerator() != 0) e.terms.emplace_back(m, r);
  if (e.terms.empty()) {
    e.scale = 0;
    return e;
  }
  e.scale = e.terms.front().second;
  for (auto& [m, r] : e.terms) r /= e.scale;
  return e;
}

std::vector<IdentityExpression> extract_identities(const MonomialCombination& c) {
  std::map<int, std::vector<std::pair<OverlapMonomial, Rational>>> by_order;
  for (const auto& [m, list] : c.terms())
    for (const auto& coeff : list) by_order[coeff.theta_power].emplace_back(m, coeff.value);
  std::vector<IdentityExpression> out;
  for (const auto& [order, terms] : by_order) {
    IdentityExpression e = make_identity(terms, order);
    if (!e.terms.empty()) out.push_back(std::move(e));
  }
  return out;
}

std::string to_string(const IdentityExpression& e) {
  if (e.terms.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [m, r] : e.terms) {
    const bool negative = r.numerator() < 0;
    const Rational mag = negative ? -r : r;
    if (first) {
      if (negative) os << "-";
    } else {
      os << (negative ? " - " : " + ");
    }
    first = false;
    if (mag != Rational(1)) os << to_string(mag) << ' ';
    os << '<' << to_string(m) << '>';
  }
  return os.str();
}

RobustnessReport compare_methods(const OverlapMonomial& g, int s, int order) {
  check_order_args(g, s, order, 1);
  RobustnessReport report;
  report.g = canonicalize(g);
  report.s = s;
  report.order = order;
  std::map<int, IdentityExpression> streaming;
  for (auto& e : extract_identities(gauge_complete(streaming_derivative(g, s, order))))
    streaming[e.order] = e;
  std::map<int, IdentityExpression> averaging;
  for (auto& e : extract_identities(self_averaging_fG(g, s, order - 1))) averaging[e.order] = e;

  report.all_equal = true;
  for (int i = 0; i < order; ++i) {
    auto st = streaming.find(i + 1);
    auto sa = averaging.find(i);
    if (st == streaming.end() && sa == averaging.end()) continue;
    OrderComparison cmp;
    cmp.index = i;
    cmp.streaming_order = i + 1;
    cmp.self_averaging_order = i;
    if (st != streaming.end()) cmp.streaming = st->second;
    if (sa != averaging.end()) cmp.self_averaging = sa->second;
    cmp.equal = st != streaming.end() && sa != averaging.end() && st->second == sa->second;
    cmp.ratio = cmp.equal ? cmp.streaming.scale / cmp.self_averaging.scale : Rational(0);
    report.all_equal = report.all_equal && cmp.equal;
    report.orders.push_back(std::move(cmp));
  }
  return report;
}

std::string to_string(const MonomialCombination& c) {
  if (c.empty()) return "0";
  struct Key {
    int power;
    Prefactor prefactor;
    bool flag;
    bool operator<(const Key& o) const {
      return std::tie(power, prefactor, flag) < std::tie(o.power, o.prefactor, o.flag);
    }
  };
  std::map<Key, std::vector<std::pair<OverlapMonomial, Rational>>> groups;
  for (const auto& [m, list] : c.terms())
    for (const auto& coeff : list)
      groups[{coeff.theta_power, coeff.prefactor, coeff.one_minus_theta_sq}].emplace_back(m, coeff.value);
  std::ostringstream os;
  bool first = true;
  for (const auto& [key, terms] : groups) {
    if (!first) os << '\n';
    first = false;
    IdentityExpression e = make_identity(terms, key.power);
    os << to_string(key.prefactor);
    if (key.flag) os << " (1-theta^2)";
    if (key.power > 0) os << " theta^" << key.power;
    os << " * " << to_string(e.scale) << " * (" << to_string(e) << ')';
  }
  return os.str();
}

nlohmann::json to_json(const MonomialCombination& c) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& [m, list] : c.terms())
    for (const auto& coeff : list)
      terms.push_back({{"monomial", to_string(m)},
                       {"coefficient", to_string(coeff.value)},
                       {"theta_power", coeff.theta_power},
                       {"prefactor", to_string(coeff.prefactor)},
                       {"one_minus_theta_sq", coeff.one_minus_theta_sq}});
  return terms;
}

nlohmann::json to_json(const IdentityExpression& e) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& [m, r] : e.terms) terms.push_back({{"monomial", to_string(m)}, {"coefficient", to_string(r)}});
  return {{"order", e.order}, {"scale", to_string(e.scale)}, {"text", to_string(e)}, {"terms", terms}};
}

nlohmann::json to_json(const RobustnessReport& r) {
  nlohmann::json orders = nlohmann::json::array();
  for (const auto& o : r.orders)
    orders.push_back({{"index", o.index},
                      {"streaming_order", o.streaming_order},
                      {"self_averaging_order", o.self_averaging_order},
                      {"equal", o.equal},
                      {"ratio", to_string(o.ratio)},
                      {"streaming", to_json(o.streaming)},
                      {"self_averaging", to_json(o.self_averaging)}});
  return {{"g", to_string(r.g)}, {"s", r.s}, {"order", r.order}, {"all_equal", r.all_equal}, {"orders", orders}};
}

}  // namespace dfl
