#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <boost/rational.hpp>
#include <json.hpp>

#include "dfl/monomials.hpp"

namespace dfl {

using Rational = boost::rational<std::int64_t>;

std::string to_string(const Rational& r);

/// Symbolic global prefactor of a generated combination.
///  - AlphaPrime:    alpha' = M alpha / N^2 (Bernoulli self-averaging)
///  - Alpha:         alpha (Poisson self-averaging)
///  - TwoAlphaTilde: 2 alpha~ with alpha~ = N alpha / (N+1) (cavity streaming)
enum class Prefactor { AlphaPrime, Alpha, TwoAlphaTilde };

std::string to_string(Prefactor p);

/// rational * prefactor * theta^theta_power, times (1 - theta^2) when the
/// flag is set.
struct Coefficient {
  Rational value;
  int theta_power = 0;
  Prefactor prefactor = Prefactor::AlphaPrime;
  bool one_minus_theta_sq = false;

  double evaluate(double theta, double prefactor_value) const;
  bool same_shape(const Coefficient& other) const {
    return theta_power == other.theta_power && prefactor == other.prefactor &&
           one_minus_theta_sq == other.one_minus_theta_sq;
  }
};

/// Formal linear combination of canonical monomials. Coefficients of equal
/// shape are merged and zero coefficients are dropped.
class MonomialCombination {
public:
  void add(const OverlapMonomial& monomial, const Coefficient& coefficient);
  void add(const MonomialCombination& other);

  const std::map<OverlapMonomial, std::vector<Coefficient>>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  std::size_t size() const;

  /// Sum of all coefficients of `monomial` with the given theta power.
  Rational coefficient(const OverlapMonomial& monomial, int theta_power) const;
  int max_theta_power() const;

  /// prefactor * sum over terms of coefficient * <monomial>, with the
  /// monomial values supplied by the caller.
  double evaluate(const std::function<double(const OverlapMonomial&)>& value, double theta,
                  double prefactor_value) const;

private:
  std::map<OverlapMonomial, std::vector<Coefficient>> terms_;
};

/// (-1)^u binom(s+u-1, u): coefficient of x^u in (1+x)^(-s).
Rational denominator_coefficient(int s, int u);

/// d/dt <F_s>_t of the interpolating cavity state, through order theta^K.
/// Each term carries the first-power factor q over A + {s+1..s+u}.
MonomialCombination streaming_derivative(const OverlapMonomial& f, int s, int order);

/// Multiplies every term by q_O, O being its set of odd replicas, so each
/// appended first-power factor becomes a square. Terms with no odd replica
/// are kept as they are.
MonomialCombination gauge_complete(const MonomialCombination& c);

/// The self-averaging generator f_G through order theta^K, written as
/// prefactor * (1 - theta^2) * sum_k theta^k R_k.
MonomialCombination self_averaging_fG(const OverlapMonomial& g, int s, int order,
                                      Prefactor prefactor = Prefactor::AlphaPrime);

/// The raw series sum_k theta^k c_k of f_G before the (1 - theta^2) factor is
/// pulled out.
MonomialCombination self_averaging_fG_series(const OverlapMonomial& g, int s, int order,
                                             Prefactor prefactor = Prefactor::AlphaPrime);

/// One per-order linear constraint, normalized so that the coefficient of
/// the first monomial (in monomial order) is 1.
struct IdentityExpression {
  int order = 0;
  std::vector<std::pair<OverlapMonomial, Rational>> terms;
  /// Coefficient that was divided out; includes the sign.
  Rational scale;

  bool operator==(const IdentityExpression& other) const { return terms == other.terms; }
};

std::string to_string(const IdentityExpression& e);
std::vector<IdentityExpression> extract_identities(const MonomialCombination& c);

/// Builds a normalized identity from explicit (monomial, coefficient) pairs.
IdentityExpression make_identity(const std::vector<std::pair<OverlapMonomial, Rational>>& terms, int order = 0);

struct OrderComparison {
  int index = 0;
  int streaming_order = 0;
  int self_averaging_order = 0;
  bool equal = false;
  /// streaming scale / self-averaging scale (symbolic prefactors excluded).
  Rational ratio;
  IdentityExpression streaming;
  IdentityExpression self_averaging;
};

struct RobustnessReport {
  OverlapMonomial g;
  int s = 0;
  int order = 0;
  std::vector<OrderComparison> orders;
  bool all_equal = false;
};

/// Identity i of the streaming method (order theta^(i+1)) is compared with
/// identity i of the self-averaging method (order theta^i).
RobustnessReport compare_methods(const OverlapMonomial& g, int s, int order);

std::string to_string(const MonomialCombination& c);
nlohmann::json to_json(const MonomialCombination& c);
nlohmann::json to_json(const IdentityExpression& e);
nlohmann::json to_json(const RobustnessReport& r);

}  // namespace dfl
