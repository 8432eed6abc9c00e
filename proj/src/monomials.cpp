#include "dfl/monomials.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>

#include "dfl/errors.hpp"

namespace dfl {

namespace {

// Arrangements of twin classes examined before giving up.
constexpr std::size_t kMaxArrangements = 5'000'000;

std::vector<OverlapFactor> reduce_and_merge(const std::vector<OverlapFactor>& raw) {
  std::map<std::vector<ReplicaLabel>, int> merged;
  for (const auto& f : raw) {
    if (f.exponent < 0) throw ParameterError("overlap exponent must be >= 0");
    if (f.exponent == 0) continue;
    std::map<ReplicaLabel, int> parity;
    for (ReplicaLabel a : f.replicas) {
      if (a <= 0) throw ParameterError("replica labels must be positive");
      parity[a] ^= 1;
    }
    std::vector<ReplicaLabel> set;
    for (const auto& [a, odd] : parity)
      if (odd) set.push_back(a);
    if (set.empty()) continue;
    merged[set] += f.exponent;
  }
  std::vector<OverlapFactor> out;
  out.reserve(merged.size());
  for (auto& [set, e] : merged) out.push_back({set, e});
  return out;
}

std::vector<OverlapFactor> apply_map(const std::vector<OverlapFactor>& factors,
                                     const std::map<ReplicaLabel, ReplicaLabel>& map) {
  std::vector<OverlapFactor> out = factors;
  for (auto& f : out) {
    for (auto& a : f.replicas) a = map.at(a);
    std::sort(f.replicas.begin(), f.replicas.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

OverlapMonomial::OverlapMonomial(std::vector<OverlapFactor> factors)
    : factors_(std::move(factors)), canonical_(factors_.empty()) {}

OverlapMonomial OverlapMonomial::canonical(std::vector<OverlapFactor> factors) {
  return canonicalize(OverlapMonomial(std::move(factors)));
}

ReplicaLabel OverlapMonomial::max_label() const {
  ReplicaLabel m = 0;
  for (const auto& f : factors_)
    for (ReplicaLabel a : f.replicas) m = std::max(m, a);
  return m;
}

int OverlapMonomial::replica_count() const {
  std::set<ReplicaLabel> used;
  for (const auto& f : factors_) used.insert(f.replicas.begin(), f.replicas.end());
  return static_cast<int>(used.size());
}

std::strong_ordering OverlapMonomial::operator<=>(const OverlapMonomial& other) const {
  if (auto c = replica_count() <=> other.replica_count(); c != 0) return c;
  return factors_ <=> other.factors_;
}

bool OverlapMonomial::operator==(const OverlapMonomial& other) const {
  return factors_ == other.factors_;
}

OverlapMonomial canonicalize(const OverlapMonomial& monomial) {
  if (monomial.is_canonical()) return monomial;
  std::vector<OverlapFactor> factors = reduce_and_merge(monomial.factors());

  // Twin classes: labels contained in exactly the same factors. Swapping two
  // twins maps the monomial to itself, so only the assignment of label
  // positions to classes matters.
  std::map<ReplicaLabel, std::vector<std::size_t>> membership;
  for (std::size_t k = 0; k < factors.size(); ++k)
    for (ReplicaLabel a : factors[k].replicas) membership[a].push_back(k);
  std::map<std::vector<std::size_t>, std::vector<ReplicaLabel>> classes;
  for (const auto& [a, sig] : membership) classes[sig].push_back(a);
  std::vector<std::vector<ReplicaLabel>> class_members;
  for (auto& [sig, members] : classes) class_members.push_back(members);

  std::vector<int> arrangement;
  for (std::size_t c = 0; c < class_members.size(); ++c)
    arrangement.insert(arrangement.end(), class_members[c].size(), static_cast<int>(c));

  std::vector<OverlapFactor> best;
  bool have_best = false;
  std::size_t visited = 0;
  do {
    if (++visited > kMaxArrangements)
      throw CapacityError("monomial has too many inequivalent relabelings to canonicalize");
    std::map<ReplicaLabel, ReplicaLabel> map;
    std::vector<std::size_t> next_member(class_members.size(), 0);
    for (std::size_t pos = 0; pos < arrangement.size(); ++pos) {
      const auto c = static_cast<std::size_t>(arrangement[pos]);
      map[class_members[c][next_member[c]++]] = static_cast<ReplicaLabel>(pos + 1);
    }
    auto candidate = apply_map(factors, map);
    if (!have_best || candidate < best) {
      best = std::move(candidate);
      have_best = true;
    }
  } while (std::next_permutation(arrangement.begin(), arrangement.end()));

  OverlapMonomial out(std::move(best));
  out.canonical_ = true;
  return out;
}

std::vector<ReplicaLabel> odd_replicas(const OverlapMonomial& monomial) {
  std::map<ReplicaLabel, int> count;
  for (const auto& f : monomial.factors()) {
    for (ReplicaLabel a : f.replicas) count[a] += f.exponent;
  }
  std::vector<ReplicaLabel> odd;
  for (const auto& [a, c] : count)
    if (c % 2 != 0) odd.push_back(a);
  return odd;
}

bool is_stochastically_stable(const OverlapMonomial& monomial) {
  return odd_replicas(monomial).empty();
}

OverlapMonomial multiply(const OverlapMonomial& a, const OverlapMonomial& b) {
  if (a.is_one()) return canonicalize(b);
  if (b.is_one()) return canonicalize(a);
  std::vector<OverlapFactor> all = a.factors();
  all.insert(all.end(), b.factors().begin(), b.factors().end());
  return OverlapMonomial::canonical(std::move(all));
}

int site_degree(const OverlapMonomial& monomial) {
  int d = 0;
  for (const auto& f : monomial.factors()) d += f.exponent;
  return d;
}

OverlapMonomial relabel(const OverlapMonomial& monomial,
                        const std::function<ReplicaLabel(ReplicaLabel)>& map) {
  std::vector<OverlapFactor> out = monomial.factors();
  for (auto& f : out)
    for (auto& a : f.replicas) a = map(a);
  return OverlapMonomial(std::move(out));
}

OverlapMonomial overlap(std::vector<ReplicaLabel> replicas, int exponent) {
  return OverlapMonomial({OverlapFactor{std::move(replicas), exponent}});
}

std::string to_string(const OverlapMonomial& monomial) {
  if (monomial.is_one()) return "1";
  std::ostringstream os;
  bool first = true;
  for (const auto& f : monomial.factors()) {
    if (!first) os << ' ';
    first = false;
    const bool wide = std::any_of(f.replicas.begin(), f.replicas.end(), [](int a) { return a > 9; });
    if (f.replicas.size() == 1) {
      os << 'm' << f.replicas.front();
    } else if (!wide) {
      os << 'q';
      for (ReplicaLabel a : f.replicas) os << a;
    } else {
      os << "q{";
      for (std::size_t k = 0; k < f.replicas.size(); ++k) os << (k ? "," : "") << f.replicas[k];
      os << '}';
    }
    if (f.exponent != 1) os << '^' << f.exponent;
  }
  return os.str();
}

OverlapMonomial parse_monomial(const std::string& text) {
  std::vector<OverlapFactor> factors;
  std::size_t pos = 0;
  auto fail = [&](const std::string& why) -> void {
    throw ParameterError("cannot parse monomial '" + text + "': " + why);
  };
  auto skip_separators = [&] {
    while (pos < text.size() && (std::isspace(static_cast<unsigned char>(text[pos])) || text[pos] == '*'))
      ++pos;
  };
  auto read_int = [&]() -> int {
    const std::size_t start = pos;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
    if (start == pos) fail("expected a number");
    return std::stoi(text.substr(start, pos - start));
  };

  skip_separators();
  if (pos == text.size()) fail("empty monomial");
  {
    std::string rest = text.substr(pos);
    while (!rest.empty() && std::isspace(static_cast<unsigned char>(rest.back()))) rest.pop_back();
    if (rest == "1") return OverlapMonomial();
  }
  while (pos < text.size()) {
    const char head = text[pos++];
    if (head != 'm' && head != 'q') fail(std::string("unexpected character '") + head + "'");
    if (pos < text.size() && text[pos] == '_') ++pos;
    OverlapFactor f;
    if (pos < text.size() && text[pos] == '{') {
      ++pos;
      while (true) {
        f.replicas.push_back(read_int());
        if (pos < text.size() && text[pos] == ',') {
          ++pos;
          continue;
        }
        if (pos < text.size() && text[pos] == '}') {
          ++pos;
          break;
        }
        fail("unterminated replica list");
      }
    } else if (head == 'm') {
      f.replicas.push_back(read_int());
    } else {
      const std::size_t start = pos;
      while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos])))
        f.replicas.push_back(text[pos++] - '0');
      if (start == pos) fail("q needs replica digits");
    }
    if (head == 'm' && f.replicas.size() != 1) fail("m takes exactly one replica");
    if (pos < text.size() && text[pos] == '^') {
      ++pos;
      f.exponent = read_int();
      if (f.exponent == 0) fail("exponent must be positive");
    }
    factors.push_back(std::move(f));
    skip_separators();
  }
  return OverlapMonomial::canonical(std::move(factors));
}

std::size_t MonomialHash::operator()(const OverlapMonomial& m) const {
  std::size_t h = 0x9E3779B97F4A7C15ULL;
  auto combine = [&](std::size_t v) { h ^= v + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2); };
  for (const auto& f : m.factors()) {
    combine(static_cast<std::size_t>(f.exponent));
    for (ReplicaLabel a : f.replicas) combine(static_cast<std::size_t>(a));
    combine(0xFFFF);
  }
  return h;
}

}  // namespace dfl
