#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dpd/candidate.hpp"
#include "dpd/facts.hpp"
#include "dpd/operators.hpp"

namespace dpd {

enum class Comparator : std::uint8_t { Lt, Gt, Le, Ge, Eq, Ne };

const char* to_string(Comparator c);
std::optional<Comparator> parse_comparator(std::string_view s);
// < and >=, > and <=, = and != are each other's inverse.
Comparator inverse(Comparator c);
bool is_numeric(Comparator c);
bool compare(Comparator c, std::int64_t lhs, std::int64_t rhs);

enum class Consequent : std::uint8_t { APattern, NotAPattern };

const char* to_string(Consequent c);
std::optional<Consequent> parse_consequent(std::string_view s);
Consequent flip(Consequent c);
bool agrees(Consequent c, Label label);

// One antecedent condition. `roles` holds indices into the pattern's role
// list; `value` is the numeric constant or the CatValue ordinal.
struct Comparison {
    Comparator comparator = Comparator::Eq;
    Op op = Op::IsFinal;
    std::vector<std::uint8_t> roles;
    std::int64_t value = 0;

    bool operator==(const Comparison&) const = default;
};

// Canonical order used for normalization: operator name, roles, comparator,
// value.
bool canonical_less(const Comparison& a, const Comparison& b);

// Antecedent-match count a, joint count j, class count c and |D|.
struct RuleStats {
    std::size_t matched = 0;
    std::size_t correct = 0;
    std::size_t classCount = 0;
    std::size_t total = 0;

    double support() const { return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0; }
    double confidence() const {
        return matched ? static_cast<double>(correct) / static_cast<double>(matched) : 0.0;
    }
    bool operator==(const RuleStats&) const = default;
};

struct Rule {
    std::vector<Comparison> antecedent;
    Consequent consequent = Consequent::APattern;
    RuleStats stats;

    double support() const { return stats.support(); }
    double confidence() const { return stats.confidence(); }
};

// Antecedent sorted by canonical_less; the stored order is left untouched.
std::vector<Comparison> normalized(const std::vector<Comparison>& antecedent);
// Same (normalized antecedent, consequent).
bool same_rule(const Rule& a, const Rule& b);
// Multiset inclusion of normalized antecedents.
bool antecedent_subset(const Rule& a, const Rule& b);

// "DIT(singleton) < 2", "aggregation(singleton,singleton) != notLinked".
std::string render(const Comparison& c, const std::vector<std::string>& roles);
// Single line: "if A and B then aPattern".
std::string render(const Rule& r, const std::vector<std::string>& roles);
// Multi-line listing layout:
//   if
//     A
//     and B
//   then
//     aPattern
std::string render_listing(const Rule& r, const std::vector<std::string>& roles);
// Single-line rendering of the normalized antecedent; total tie-break key.
std::string canonical_text(const Rule& r, const std::vector<std::string>& roles);

// Parses either rendering (whitespace-insensitive, also accepts the
// "delegate"/"returned"/"received" spellings and the ≤ ≥ ≠ glyphs).
// Throws ContractError with a position on malformed text, unknown operators,
// roles or values.
Rule parse_rule(std::string_view text, const std::vector<std::string>& roles);

// Sentinel for metric values that are undefined (external artifacts); every
// comparison against it is false.
inline constexpr std::int32_t kUndefinedFeature = INT32_MIN;

// Evaluates one comparison against concrete artifacts (one per role index).
bool holds(const Comparison& c, const CodeFactsGraph& graph, std::span<const CodeFactsGraph::Index> roleArtifacts);
bool holds_feature(const Comparison& c, std::int32_t feature);

// Direct evaluation through the operators (no precomputed tables).
bool matches(const Rule& rule, const Candidate& candidate, const CodeFactsGraph& graph,
             const std::vector<std::string>& roles);

// Role index → artifact index for a candidate. Throws ContractError when a
// role is missing or an artifact is unknown to the graph.
std::vector<CodeFactsGraph::Index> bind_roles(const Candidate& candidate, const CodeFactsGraph& graph,
                                              const std::vector<std::string>& roles);

} // namespace dpd
