#include "dpd/grammar.hpp"

#include <algorithm>
#include <climits>
#include <set>

#include "dpd/errors.hpp"

namespace dpd {

namespace {

constexpr Comparator kNumComparators[] = {Comparator::Ge, Comparator::Le, Comparator::Gt, Comparator::Lt};
constexpr Comparator kCatComparators[] = {Comparator::Eq, Comparator::Ne};

} // namespace

SymbolId Grammar::add(std::string name, bool terminal, Terminal t) {
    names_.push_back(std::move(name));
    terminal_.push_back(terminal);
    terms_.push_back(t);
    prods_.emplace_back();
    return static_cast<SymbolId>(names_.size() - 1);
}

void Grammar::add_production(SymbolId nt, std::vector<SymbolId> rhs) { prods_[nt].push_back({std::move(rhs)}); }

Grammar::Grammar(const GrammarConfig& config) : roles_(config.roles) {
    if (roles_.empty()) throw ConfigError("grammar needs at least one role");
    if (roles_.size() > 64) throw ConfigError("too many roles");
    {
        std::set<std::string> seen;
        for (const auto& r : roles_) {
            if (r.empty()) throw ConfigError("empty role name");
            if (!seen.insert(r).second) throw ConfigError("duplicate role '" + r + "'");
        }
    }
    {
        std::set<Op> seen;
        for (Op op : config.ops)
            if (seen.insert(op).second) ops_.push_back(op);
    }
    if (ops_.empty()) throw ConfigError("operator set is empty");
    for (const auto& [op, range] : config.constRanges) {
        if (range.lo > range.hi)
            throw ConfigError(std::string("inverted constant range for ") + op_name(op));
    }
    ranges_ = config.constRanges;

    std::vector<Op> numeric, categorical;
    for (Op op : ops_) (is_numeric(op) ? numeric : categorical).push_back(op);

    rule_ = add("<rule>", false);
    antc_ = add("<antc>", false);
    cmp_ = add("<cmp>", false);
    if (!numeric.empty()) numCmp_ = add("<numCmp>", false);
    if (!categorical.empty()) catCmp_ = add("<catCmp>", false);
    if (!numeric.empty()) numCmptor_ = add("<numCmptor>", false);
    if (!categorical.empty()) catCmptor_ = add("<catCmptor>", false);
    if (!numeric.empty()) numOp_ = add("<numOp>", false);
    role_ = add("<role>", false);
    consq_ = add("<consq>", false);

    and_ = add("and", true, {TermKind::Keyword, 0});
    const_ = add("const", true, {TermKind::Const, 0});
    auto comparator_sym = [&](Comparator c) {
        auto it = cmpSyms_.find(c);
        if (it != cmpSyms_.end()) return it->second;
        SymbolId s = add(to_string(c), true, {TermKind::Comparator, static_cast<std::uint8_t>(c)});
        cmpSyms_[c] = s;
        return s;
    };
    for (std::size_t i = 0; i < roles_.size(); ++i)
        roleSyms_.push_back(add(roles_[i], true, {TermKind::Role, static_cast<std::uint8_t>(i)}));
    for (Consequent c : {Consequent::APattern, Consequent::NotAPattern})
        consqSyms_[c] = add(to_string(c), true, {TermKind::Consequent, static_cast<std::uint8_t>(c)});

    add_production(rule_, {antc_, consq_});
    add_production(antc_, {cmp_});
    add_production(antc_, {and_, antc_, cmp_});
    if (numCmp_ != kNone) add_production(cmp_, {numCmp_});
    if (catCmp_ != kNone) add_production(cmp_, {catCmp_});

    if (!numeric.empty()) {
        add_production(numCmp_, {numCmptor_, numOp_, role_, const_});
        for (Comparator c : kNumComparators) add_production(numCmptor_, {comparator_sym(c)});
        for (Op op : numeric) {
            SymbolId s = add(op_name(op), true, {TermKind::Op, static_cast<std::uint8_t>(op)});
            opSyms_[op] = s;
            add_production(numOp_, {s});
        }
    }
    if (!categorical.empty()) {
        for (Comparator c : kCatComparators) add_production(catCmptor_, {comparator_sym(c)});
        for (Op op : categorical) {
            SymbolId s = add(op_name(op), true, {TermKind::Op, static_cast<std::uint8_t>(op)});
            opSyms_[op] = s;
            Domain d = domain_of(op);
            SymbolId dnt;
            if (auto it = domainNts_.find(d); it != domainNts_.end()) {
                dnt = it->second;
            } else {
                dnt = add(domain_symbol(d), false);
                domainNts_[d] = dnt;
                for (CatValue v : domain_values(d)) {
                    SymbolId vs;
                    if (auto vit = valueSyms_.find(v); vit != valueSyms_.end()) {
                        vs = vit->second;
                    } else {
                        vs = add(value_name(v), true, {TermKind::Value, static_cast<std::uint8_t>(v)});
                        valueSyms_[v] = vs;
                    }
                    add_production(dnt, {vs});
                }
            }
            std::vector<SymbolId> rhs{catCmptor_, s};
            for (std::size_t i = 0; i < arity(op); ++i) rhs.push_back(role_);
            rhs.push_back(dnt);
            add_production(catCmp_, std::move(rhs));
        }
    }
    for (SymbolId s : roleSyms_) add_production(role_, {s});
    for (Consequent c : {Consequent::APattern, Consequent::NotAPattern}) add_production(consq_, {consqSyms_[c]});

    compute_min_costs();
}

void Grammar::compute_min_costs() {
    constexpr int kInf = INT_MAX / 4;
    minCost_.assign(names_.size(), kInf);
    for (std::size_t s = 0; s < names_.size(); ++s)
        if (terminal_[s]) minCost_[s] = 0;
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t s = 0; s < names_.size(); ++s) {
            if (terminal_[s]) continue;
            for (const auto& p : prods_[s]) {
                int cost = 1;
                for (SymbolId r : p.rhs) cost = std::min(kInf, cost + minCost_[r]);
                if (cost < minCost_[s]) {
                    minCost_[s] = cost;
                    changed = true;
                }
            }
        }
    }
}

int Grammar::production_cost(SymbolId nt, std::size_t p) const {
    int cost = 1;
    for (SymbolId r : prods_[nt][p].rhs) cost += minCost_[r];
    return cost;
}

bool Grammar::enabled(Op op) const { return opSyms_.count(op) != 0; }

ConstRange Grammar::const_range(Op op) const {
    auto it = ranges_.find(op);
    return it == ranges_.end() ? ConstRange{0, 10} : it->second;
}

SymbolId Grammar::comparator_symbol(Comparator c) const {
    auto it = cmpSyms_.find(c);
    return it == cmpSyms_.end() ? kNone : it->second;
}

SymbolId Grammar::op_symbol(Op op) const {
    auto it = opSyms_.find(op);
    return it == opSyms_.end() ? kNone : it->second;
}

SymbolId Grammar::role_symbol(std::uint8_t role) const { return role < roleSyms_.size() ? roleSyms_[role] : kNone; }

SymbolId Grammar::value_symbol(CatValue v) const {
    auto it = valueSyms_.find(v);
    return it == valueSyms_.end() ? kNone : it->second;
}

SymbolId Grammar::consequent_symbol(Consequent c) const { return consqSyms_.at(c); }

SymbolId Grammar::domain_nonterminal(Domain d) const {
    auto it = domainNts_.find(d);
    return it == domainNts_.end() ? kNone : it->second;
}

std::string Grammar::to_bnf() const {
    std::string out;
    for (std::size_t s = 0; s < names_.size(); ++s) {
        if (terminal_[s]) continue;
        out += names_[s] + " ::=";
        for (std::size_t p = 0; p < prods_[s].size(); ++p) {
            out += p ? " |" : "";
            for (SymbolId r : prods_[s][p].rhs) out += " " + names_[r];
        }
        out += '\n';
    }
    return out;
}

int derivation_count(const TreeNode& tree, const Grammar& g) {
    if (g.is_terminal(tree.symbol)) return 0;
    int n = 1;
    for (const auto& c : tree.children) n += derivation_count(c, g);
    return n;
}

namespace {

Op num_cmp_op(const TreeNode& numCmp, const Grammar& g) {
    return static_cast<Op>(g.terminal(numCmp.children[1].children[0].symbol).payload);
}

bool conforms_node(const TreeNode& n, const Grammar& g) {
    if (n.symbol >= g.symbol_count()) return false;
    if (g.is_terminal(n.symbol)) return n.production == -1 && n.children.empty();
    const auto& prods = g.productions(n.symbol);
    if (n.production < 0 || static_cast<std::size_t>(n.production) >= prods.size()) return false;
    const auto& rhs = prods[static_cast<std::size_t>(n.production)].rhs;
    if (rhs.size() != n.children.size()) return false;
    for (std::size_t i = 0; i < rhs.size(); ++i) {
        if (n.children[i].symbol != rhs[i]) return false;
        if (!conforms_node(n.children[i], g)) return false;
    }
    if (n.symbol == g.num_cmp()) {
        ConstRange r = g.const_range(num_cmp_op(n, g));
        std::int64_t v = n.children[3].value;
        if (v < r.lo || v > r.hi) return false;
    }
    return true;
}

struct Deriver {
    const Grammar& g;
    Rng& rng;
    int budget;
    int committed = 0;
    bool greedy = false;

    bool expand(TreeNode& node, SymbolId sym) {
        node.symbol = sym;
        node.production = -1;
        node.value = 0;
        node.children.clear();
        if (g.is_terminal(sym)) return true;
        const auto& prods = g.productions(sym);
        std::size_t p = 0;
        if (greedy) {
            int best = INT_MAX;
            for (std::size_t i = 0; i < prods.size(); ++i) {
                int c = g.production_cost(sym, i);
                if (c < best) {
                    best = c;
                    p = i;
                }
            }
        } else {
            p = static_cast<std::size_t>(rng.below(prods.size()));
        }
        committed += g.production_cost(sym, p) - g.min_cost(sym);
        if (committed > budget) return false;
        node.production = static_cast<std::int16_t>(p);
        node.children.resize(prods[p].rhs.size());
        for (std::size_t i = 0; i < prods[p].rhs.size(); ++i)
            if (!expand(node.children[i], prods[p].rhs[i])) return false;
        if (sym == g.num_cmp()) {
            ConstRange r = g.const_range(num_cmp_op(node, g));
            node.children[3].value = rng.between(r.lo, r.hi);
        }
        return true;
    }
};

} // namespace

bool conforms(const TreeNode& tree, const Grammar& g, int maxDerivations) {
    return conforms_node(tree, g) && derivation_count(tree, g) <= maxDerivations;
}

TreeNode derive(const Grammar& g, SymbolId symbol, int budget, Rng& rng) {
    if (budget < g.min_cost(symbol))
        throw ConfigError("derivation budget " + std::to_string(budget) + " is below the minimum " +
                          std::to_string(g.min_cost(symbol)) + " for " + g.name(symbol));
    constexpr int kRestarts = 100;
    TreeNode tree;
    for (int attempt = 0; attempt <= kRestarts; ++attempt) {
        Deriver d{g, rng, budget};
        d.committed = g.min_cost(symbol);
        d.greedy = attempt == kRestarts;
        if (d.expand(tree, symbol)) return tree;
    }
    throw ConfigError("derivation failed within budget");
}

Comparison to_comparison(const TreeNode& cmpNode, const Grammar& g) {
    const TreeNode& inner = cmpNode.children.at(0);
    Comparison c;
    auto term = [&](const TreeNode& n) -> const Terminal& {
        return g.terminal(g.is_terminal(n.symbol) ? n.symbol : n.children.at(0).symbol);
    };
    if (inner.symbol == g.num_cmp()) {
        c.comparator = static_cast<Comparator>(term(inner.children[0]).payload);
        c.op = static_cast<Op>(term(inner.children[1]).payload);
        c.roles.push_back(term(inner.children[2]).payload);
        c.value = inner.children[3].value;
    } else {
        c.comparator = static_cast<Comparator>(term(inner.children[0]).payload);
        c.op = static_cast<Op>(term(inner.children[1]).payload);
        for (std::size_t i = 2; i + 1 < inner.children.size(); ++i) c.roles.push_back(term(inner.children[i]).payload);
        c.value = term(inner.children.back()).payload;
    }
    return c;
}

namespace {

void collect(const TreeNode& antc, const Grammar& g, std::vector<Comparison>& out) {
    if (antc.production == 0) {
        out.push_back(to_comparison(antc.children[0], g));
    } else {
        collect(antc.children[1], g, out);
        out.push_back(to_comparison(antc.children[2], g));
    }
}

template <class Node, class Out>
void collect_cmps(Node& n, const Grammar& g, Out& out) {
    if (n.symbol == g.cmp()) {
        out.push_back(&n);
        return;
    }
    for (auto& c : n.children) collect_cmps(c, g, out);
}

std::int16_t find_production(const Grammar& g, SymbolId nt, const std::vector<SymbolId>& rhs) {
    const auto& prods = g.productions(nt);
    for (std::size_t i = 0; i < prods.size(); ++i)
        if (prods[i].rhs == rhs) return static_cast<std::int16_t>(i);
    throw ContractError("no production " + g.name(nt) + " for the requested expansion");
}

TreeNode leaf(SymbolId s) {
    TreeNode n;
    n.symbol = s;
    return n;
}

TreeNode unit(const Grammar& g, SymbolId nt, SymbolId term) {
    if (term == Grammar::kNone) throw ContractError("symbol not in grammar under " + g.name(nt));
    TreeNode n;
    n.symbol = nt;
    n.production = find_production(g, nt, {term});
    n.children.push_back(leaf(term));
    return n;
}

TreeNode build_cmp(const Comparison& c, const Grammar& g) {
    if (!g.enabled(c.op)) throw ContractError(std::string("operator not in grammar: ") + op_name(c.op));
    if (c.roles.size() != arity(c.op)) throw ContractError("comparison arity mismatch");
    TreeNode inner;
    if (is_numeric(c.op)) {
        inner.symbol = g.num_cmp();
        inner.children.push_back(unit(g, g.num_cmptor(), g.comparator_symbol(c.comparator)));
        inner.children.push_back(unit(g, g.num_op(), g.op_symbol(c.op)));
        inner.children.push_back(unit(g, g.role(), g.role_symbol(c.roles[0])));
        TreeNode k = leaf(g.const_symbol());
        k.value = c.value;
        inner.children.push_back(k);
    } else {
        inner.symbol = g.cat_cmp();
        inner.children.push_back(unit(g, g.cat_cmptor(), g.comparator_symbol(c.comparator)));
        inner.children.push_back(leaf(g.op_symbol(c.op)));
        for (std::uint8_t r : c.roles) inner.children.push_back(unit(g, g.role(), g.role_symbol(r)));
        auto v = static_cast<CatValue>(c.value);
        if (!in_domain(c.op, v)) throw ContractError("value outside the operator's domain");
        inner.children.push_back(unit(g, g.domain_nonterminal(domain_of(c.op)), g.value_symbol(v)));
    }
    std::vector<SymbolId> rhs;
    for (const auto& ch : inner.children) rhs.push_back(ch.symbol);
    inner.production = find_production(g, inner.symbol, rhs);
    TreeNode cmp;
    cmp.symbol = g.cmp();
    cmp.production = find_production(g, g.cmp(), {inner.symbol});
    cmp.children.push_back(std::move(inner));
    return cmp;
}

} // namespace

Rule to_rule(const TreeNode& tree, const Grammar& g) {
    if (tree.symbol != g.root()) throw ContractError("not a <rule> tree");
    Rule r;
    collect(tree.children.at(0), g, r.antecedent);
    r.consequent = static_cast<Consequent>(g.terminal(tree.children.at(1).children.at(0).symbol).payload);
    return r;
}

TreeNode to_tree(const Rule& rule, const Grammar& g) {
    if (rule.antecedent.empty()) throw ContractError("rule without antecedent");
    TreeNode antc;
    antc.symbol = g.antc();
    antc.production = 0;
    antc.children.push_back(build_cmp(rule.antecedent[0], g));
    for (std::size_t i = 1; i < rule.antecedent.size(); ++i) {
        TreeNode next;
        next.symbol = g.antc();
        next.production = 1;
        next.children.push_back(leaf(g.and_symbol()));
        next.children.push_back(std::move(antc));
        next.children.push_back(build_cmp(rule.antecedent[i], g));
        antc = std::move(next);
    }
    TreeNode root;
    root.symbol = g.root();
    root.production = 0;
    root.children.push_back(std::move(antc));
    root.children.push_back(unit(g, g.consq(), g.consequent_symbol(rule.consequent)));
    return root;
}

std::vector<TreeNode*> cmp_nodes(TreeNode& tree, const Grammar& g) {
    std::vector<TreeNode*> out;
    collect_cmps(tree, g, out);
    return out;
}

std::vector<const TreeNode*> cmp_nodes(const TreeNode& tree, const Grammar& g) {
    std::vector<const TreeNode*> out;
    collect_cmps(tree, g, out);
    return out;
}

} // namespace dpd
