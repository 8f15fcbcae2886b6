#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dpd/operators.hpp"
#include "dpd/rng.hpp"
#include "dpd/rule.hpp"

namespace dpd {

using SymbolId = std::uint16_t;

struct ConstRange {
    std::int64_t lo = 0;
    std::int64_t hi = 0;
};

struct GrammarConfig {
    std::vector<std::string> roles;
    std::vector<Op> ops;
    // Range for the constant of each numeric operator; missing entries
    // default to [0, 10].
    std::map<Op, ConstRange> constRanges;
};

// What a terminal means once a tree is turned into a rule.
enum class TermKind : std::uint8_t { Keyword, Comparator, Op, Role, Value, Consequent, Const };

struct Terminal {
    TermKind kind = TermKind::Keyword;
    std::uint8_t payload = 0;
};

struct Production {
    std::vector<SymbolId> rhs;
};

// Context-free rule grammar specialised to a pattern's roles and an operator
// subset:
//   <rule>   ::= <antc> <consq>
//   <antc>   ::= <cmp> | and <antc> <cmp>
//   <cmp>    ::= <numCmp> | <catCmp>
//   <numCmp> ::= <numCmptor> <numOp> <role> const
//   <catCmp> ::= <catCmptor> OP <role>... <valueOfOP>    (one per operator)
//   <consq>  ::= aPattern | notAPattern
class Grammar {
public:
    // Throws ConfigError on an empty operator set, no roles, duplicate roles
    // or an inverted constant range.
    explicit Grammar(const GrammarConfig& config);

    std::size_t symbol_count() const { return names_.size(); }
    const std::string& name(SymbolId s) const { return names_[s]; }
    bool is_terminal(SymbolId s) const { return terminal_[s]; }
    const Terminal& terminal(SymbolId s) const { return terms_[s]; }
    const std::vector<Production>& productions(SymbolId nt) const { return prods_[nt]; }

    SymbolId root() const { return rule_; }
    SymbolId antc() const { return antc_; }
    SymbolId cmp() const { return cmp_; }
    SymbolId num_cmp() const { return numCmp_; }
    SymbolId cat_cmp() const { return catCmp_; }
    SymbolId num_cmptor() const { return numCmptor_; }
    SymbolId cat_cmptor() const { return catCmptor_; }
    SymbolId num_op() const { return numOp_; }
    SymbolId role() const { return role_; }
    SymbolId consq() const { return consq_; }
    SymbolId const_symbol() const { return const_; }
    SymbolId and_symbol() const { return and_; }

    // Smallest number of nonterminal expansions needed to complete `s`
    // (0 for terminals).
    int min_cost(SymbolId s) const { return minCost_[s]; }
    // 1 + sum of min_cost over the production's right-hand side.
    int production_cost(SymbolId nt, std::size_t p) const;

    const std::vector<std::string>& roles() const { return roles_; }
    const std::vector<Op>& ops() const { return ops_; }
    bool enabled(Op op) const;
    ConstRange const_range(Op op) const;

    // Terminal symbol for a comparator / operator / role / value /
    // consequent; npos-like 0xFFFF when absent from this grammar.
    static constexpr SymbolId kNone = 0xFFFF;
    SymbolId comparator_symbol(Comparator c) const;
    SymbolId op_symbol(Op op) const;
    SymbolId role_symbol(std::uint8_t role) const;
    SymbolId value_symbol(CatValue v) const;
    SymbolId consequent_symbol(Consequent c) const;
    SymbolId domain_nonterminal(Domain d) const;

    // BNF listing, one nonterminal per line.
    std::string to_bnf() const;

private:
    SymbolId add(std::string name, bool terminal, Terminal t = {});
    void add_production(SymbolId nt, std::vector<SymbolId> rhs);
    void compute_min_costs();

    std::vector<std::string> names_;
    std::vector<bool> terminal_;
    std::vector<Terminal> terms_;
    std::vector<std::vector<Production>> prods_;
    std::vector<int> minCost_;

    std::vector<std::string> roles_;
    std::vector<Op> ops_;
    std::map<Op, ConstRange> ranges_;

    SymbolId rule_ = 0, antc_ = 0, cmp_ = 0, numCmp_ = kNone, catCmp_ = kNone, numCmptor_ = kNone,
             catCmptor_ = kNone, numOp_ = kNone, role_ = 0, consq_ = 0, const_ = 0, and_ = 0;
    std::map<Comparator, SymbolId> cmpSyms_;
    std::map<Op, SymbolId> opSyms_;
    std::vector<SymbolId> roleSyms_;
    std::map<CatValue, SymbolId> valueSyms_;
    std::map<Consequent, SymbolId> consqSyms_;
    std::map<Domain, SymbolId> domainNts_;
};

// Derivation tree node. Terminals have no production; the `const` terminal
// carries its value.
struct TreeNode {
    SymbolId symbol = 0;
    std::int16_t production = -1;
    std::int64_t value = 0;
    std::vector<TreeNode> children;

    bool operator==(const TreeNode&) const = default;
};

// Number of nonterminal expansions in the tree.
int derivation_count(const TreeNode& tree, const Grammar& g);

// Every node expands its nonterminal with one of its productions, constants
// lie in the range of their operator and the tree fits the budget.
bool conforms(const TreeNode& tree, const Grammar& g, int maxDerivations);

// Random derivation of `symbol` within `budget` expansions: productions are
// chosen uniformly; when a partial tree's minimal completion would exceed the
// budget the derivation restarts, and after 100 restarts the minimal
// production is picked at every step. Throws ConfigError if
// budget < min_cost(symbol).
TreeNode derive(const Grammar& g, SymbolId symbol, int budget, Rng& rng);
inline TreeNode random_rule_tree(const Grammar& g, int budget, Rng& rng) { return derive(g, g.root(), budget, rng); }

// Phenotype of a <rule> tree (comparisons in left-to-right order).
Rule to_rule(const TreeNode& tree, const Grammar& g);
Comparison to_comparison(const TreeNode& cmpNode, const Grammar& g);
// Inverse mapping; throws ContractError when the rule uses operators, roles
// or values outside the grammar.
TreeNode to_tree(const Rule& rule, const Grammar& g);

// Pointers to the <cmp> subtrees in pre-order.
std::vector<TreeNode*> cmp_nodes(TreeNode& tree, const Grammar& g);
std::vector<const TreeNode*> cmp_nodes(const TreeNode& tree, const Grammar& g);

} // namespace dpd
