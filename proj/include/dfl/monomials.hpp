#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace dfl {

using ReplicaLabel = int;

/// q_S^p: the multi-overlap of replica set S raised to the power p.
/// A singleton set is the magnetization m_a.
struct OverlapFactor {
  std::vector<ReplicaLabel> replicas;
  int exponent = 1;

  /// Orders by (set size, set contents, exponent).
  std::strong_ordering operator<=>(const OverlapFactor& other) const {
    if (auto c = replicas.size() <=> other.replicas.size(); c != 0) return c;
    if (auto c = replicas <=> other.replicas; c != 0) return c;
    return exponent <=> other.exponent;
  }
  bool operator==(const OverlapFactor&) const = default;
};

/// Product of overlap factors. Default-constructed value is the empty
/// product 1.
///
/// Canonical form:
///  - repeated labels inside one factor cancel in pairs (sigma^2 = 1) and
///    factors left with no replica become 1;
///  - factors with equal replica sets merge by adding exponents;
///  - labels are 1..r, chosen as the lexicographically least factor list
///    over all relabelings, with factors sorted by (set size, set contents,
///    exponent).
class OverlapMonomial {
public:
  OverlapMonomial() = default;

  /// Raw, not necessarily canonical product.
  explicit OverlapMonomial(std::vector<OverlapFactor> factors);

  /// Canonical monomial built from raw factors.
  static OverlapMonomial canonical(std::vector<OverlapFactor> factors);

  const std::vector<OverlapFactor>& factors() const { return factors_; }
  bool is_canonical() const { return canonical_; }
  bool is_one() const { return factors_.empty(); }

  /// Largest replica label in use (0 for the empty product).
  ReplicaLabel max_label() const;
  /// Number of distinct replica labels in use.
  int replica_count() const;

  /// Monomials order by replica count first, then by factor list. Under this
  /// order each identity's leading monomial is the one with fewest replicas.
  std::strong_ordering operator<=>(const OverlapMonomial& other) const;
  bool operator==(const OverlapMonomial& other) const;

private:
  friend OverlapMonomial canonicalize(const OverlapMonomial& monomial);
  std::vector<OverlapFactor> factors_;
  bool canonical_ = true;
};

OverlapMonomial canonicalize(const OverlapMonomial& monomial);

/// True iff every replica occurs an even number of times, counting each
/// factor with its exponent.
bool is_stochastically_stable(const OverlapMonomial& monomial);

/// Replicas that occur an odd number of times.
std::vector<ReplicaLabel> odd_replicas(const OverlapMonomial& monomial);

OverlapMonomial multiply(const OverlapMonomial& a, const OverlapMonomial& b);

/// Number of site indices in the expansion: the sum of exponents.
int site_degree(const OverlapMonomial& monomial);

/// Applies `relabel(old) -> new` to every label; the result is not canonical.
OverlapMonomial relabel(const OverlapMonomial& monomial,
                        const std::function<ReplicaLabel(ReplicaLabel)>& map);

/// Text such as "m1^2 q12^2" or "q123^2"; labels above 9 use "q{1,10}".
std::string to_string(const OverlapMonomial& monomial);

/// Inverse of to_string. Accepts factors separated by spaces or '*'.
/// Throws ParameterError on malformed text. The result is canonical.
OverlapMonomial parse_monomial(const std::string& text);

/// Shorthand for q_S^p as a one-factor raw monomial.
OverlapMonomial overlap(std::vector<ReplicaLabel> replicas, int exponent = 1);

struct MonomialHash {
  std::size_t operator()(const OverlapMonomial& m) const;
};

}  // namespace dfl
