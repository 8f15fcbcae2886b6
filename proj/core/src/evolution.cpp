#include "dpd/evolution.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "dpd/classifier.hpp"
#include "dpd/errors.hpp"
#include "parallel.hpp"

namespace dpd {

void EvolutionConfig::validate() const {
    if (popSize < 2) throw ConfigError("popSize must be at least 2");
    if (!(crossoverProb >= 0.0 && crossoverProb <= 1.0)) throw ConfigError("crossoverProb must lie in [0,1]");
    if (!(supportThreshold >= 0.0 && supportThreshold <= 1.0)) throw ConfigError("support threshold must lie in [0,1]");
    if (!(confidenceThreshold >= 0.0 && confidenceThreshold <= 1.0))
        throw ConfigError("confidence threshold must lie in [0,1]");
    if (maxDerivations < 1) throw ConfigError("maxDerivations must be positive");
    if (threads < 1) throw ConfigError("threads must be at least 1");
}

Individual evaluate(TreeNode genotype, const Grammar& g, const Dataset& data) {
    Individual ind;
    ind.rule = to_rule(genotype, g);
    ind.rule.stats = data.stats(ind.rule);
    ind.genotype = std::move(genotype);
    return ind;
}

std::vector<Individual> tournament_select(const std::vector<const Individual*>& pool, std::size_t count, Rng& rng) {
    if (pool.empty()) throw ContractError("tournament over an empty pool");
    std::vector<Individual> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        const Individual* a = pool[rng.below(pool.size())];
        const Individual* b = pool[rng.below(pool.size())];
        const Individual* win;
        if (a->fitness() != b->fitness()) win = a->fitness() > b->fitness() ? a : b;
        else if (a->confidence() != b->confidence()) win = a->confidence() > b->confidence() ? a : b;
        else win = rng.chance(0.5) ? a : b;
        out.push_back(*win);
    }
    return out;
}

std::pair<TreeNode, TreeNode> crossover(const TreeNode& a, const TreeNode& b, const Grammar& g, int maxDerivations,
                                        Rng& rng) {
    TreeNode ca = a, cb = b;
    auto na = cmp_nodes(ca, g);
    auto nb = cmp_nodes(cb, g);
    if (na.empty() || nb.empty()) throw ContractError("crossover on a tree without comparisons");
    TreeNode* x = na[rng.below(na.size())];
    TreeNode* y = nb[rng.below(nb.size())];
    std::swap(*x, *y);
    if (derivation_count(ca, g) > maxDerivations) ca = a;
    if (derivation_count(cb, g) > maxDerivations) cb = b;
    return {std::move(ca), std::move(cb)};
}

std::size_t diversity_k(std::size_t n, Rng& rng) {
    if (n <= 1) return 1;
    double total = 0, w = 1;
    for (std::size_t k = 1; k <= n; ++k) total += (w *= 0.5);
    double u = rng.uniform() * total;
    w = 1;
    for (std::size_t k = 1; k <= n; ++k) {
        w *= 0.5;
        if (u < w) return k;
        u -= w;
    }
    return n;
}

TreeNode diversity_mutate(const TreeNode& tree, const Grammar& g, int maxDerivations, Rng& rng) {
    TreeNode out = tree;
    auto nodes = cmp_nodes(out, g);
    if (nodes.empty()) throw ContractError("mutation on a tree without comparisons");
    std::size_t k = diversity_k(nodes.size(), rng);
    std::vector<std::size_t> idx(nodes.size());
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t j = i + static_cast<std::size_t>(rng.below(idx.size() - i));
        std::swap(idx[i], idx[j]);
        TreeNode* node = nodes[idx[i]];
        int others = derivation_count(out, g) - derivation_count(*node, g);
        *node = derive(g, g.cmp(), maxDerivations - others, rng);
    }
    return out;
}

TreeNode dpd_mutate(const TreeNode& tree, const Grammar& g, Rng& rng) {
    TreeNode out = tree;
    auto nodes = cmp_nodes(out, g);
    if (nodes.empty()) throw ContractError("mutation on a tree without comparisons");
    const double p = 1.0 / static_cast<double>(nodes.size());
    for (TreeNode* node : nodes) {
        if (!rng.chance(p)) continue;
        TreeNode& cmptor = node->children[0].children[0];
        auto c = static_cast<Comparator>(g.terminal(cmptor.children[0].symbol).payload);
        SymbolId inv = g.comparator_symbol(inverse(c));
        const auto& prods = g.productions(cmptor.symbol);
        for (std::size_t i = 0; i < prods.size(); ++i) {
            if (prods[i].rhs[0] == inv) {
                cmptor.production = static_cast<std::int16_t>(i);
                cmptor.children[0].symbol = inv;
            }
        }
    }
    if (rng.chance(0.5)) {
        TreeNode& consq = out.children[1];
        auto c = static_cast<Consequent>(g.terminal(consq.children[0].symbol).payload);
        SymbolId flipped = g.consequent_symbol(flip(c));
        const auto& prods = g.productions(consq.symbol);
        for (std::size_t i = 0; i < prods.size(); ++i) {
            if (prods[i].rhs[0] == flipped) {
                consq.production = static_cast<std::int16_t>(i);
                consq.children[0].symbol = flipped;
            }
        }
    }
    return out;
}

namespace {

struct CmpLess {
    bool operator()(const Comparison& a, const Comparison& b) const { return canonical_less(a, b); }
};

struct Entry {
    const Individual* ind;
    std::vector<Comparison> norm;
    std::string key;
};

} // namespace

std::vector<Individual> update_archive(const std::vector<Individual>& archive, const std::vector<Individual>& pop,
                                       const EvolutionConfig& config, const std::vector<std::string>& roles) {
    std::vector<Entry> entries;
    std::map<std::string, std::size_t> byKey;
    auto consider = [&](const Individual& ind) {
        const Rule& r = ind.rule;
        if (r.support() < config.supportThreshold || r.confidence() < config.confidenceThreshold) return;
        Entry e{&ind, normalized(r.antecedent), {}};
        Rule n;
        n.antecedent = e.norm;
        n.consequent = r.consequent;
        e.key = render(n, roles);
        if (byKey.count(e.key)) return;
        byKey.emplace(e.key, entries.size());
        entries.push_back(std::move(e));
    };
    for (const auto& ind : archive) consider(ind);
    for (const auto& ind : pop) consider(ind);

    // Index by the first normalized comparison so that subset candidates of
    // a rule are found through its own comparisons.
    std::map<Comparison, std::vector<std::size_t>, CmpLess> byFirst;
    for (std::size_t i = 0; i < entries.size(); ++i) byFirst[entries[i].norm.front()].push_back(i);

    std::vector<Individual> kept;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const Entry& b = entries[i];
        bool redundant = false;
        for (std::size_t ci = 0; ci < b.norm.size() && !redundant; ++ci) {
            if (ci && !canonical_less(b.norm[ci - 1], b.norm[ci])) continue;
            auto it = byFirst.find(b.norm[ci]);
            if (it == byFirst.end()) continue;
            for (std::size_t ai : it->second) {
                if (ai == i) continue;
                const Entry& a = entries[ai];
                if (a.ind->rule.consequent != b.ind->rule.consequent) continue;
                if (a.norm.size() >= b.norm.size()) continue;
                if (b.ind->rule.confidence() > a.ind->rule.confidence()) continue;
                if (std::includes(b.norm.begin(), b.norm.end(), a.norm.begin(), a.norm.end(), canonical_less)) {
                    redundant = true;
                    break;
                }
            }
        }
        if (!redundant) kept.push_back(*b.ind);
    }

    std::vector<Rule> rules;
    rules.reserve(kept.size());
    for (const auto& k : kept) rules.push_back(k.rule);
    std::vector<std::size_t> order(kept.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return precedes(rules[x], rules[y], roles); });
    std::vector<Individual> out;
    out.reserve(kept.size());
    for (std::size_t i : order) out.push_back(std::move(kept[i]));
    if (config.extPopSize > 0 && out.size() > config.extPopSize) out.resize(config.extPopSize);
    return out;
}

std::vector<Rule> EvolutionResult::rules() const {
    std::vector<Rule> out;
    out.reserve(archive.size());
    for (const auto& ind : archive) out.push_back(ind.rule);
    return out;
}

namespace {

std::vector<Individual> evaluate_all(std::vector<TreeNode> trees, const Grammar& g, const Dataset& data,
                                     unsigned threads) {
    std::vector<Individual> out(trees.size());
    detail::parallel_for(trees.size(), threads,
                         [&](std::size_t i) { out[i] = evaluate(std::move(trees[i]), g, data); });
    return out;
}

} // namespace

EvolutionResult run_g3p4dpd(const EvolutionConfig& config, const Grammar& g, const Dataset& data,
                            const GenerationObserver& observer) {
    config.validate();
    if (data.empty()) throw ConfigError("training dataset is empty");
    if (data.roles() != g.roles()) throw ContractError("grammar and dataset roles differ");
    EvolutionResult result;
    if (data.count(Label::Positive) == 0) result.warnings.push_back("training data has no positive samples");
    if (data.count(Label::Negative) == 0) result.warnings.push_back("training data has no negative samples");

    Rng rng(config.seed);
    const auto& roles = g.roles();

    std::vector<TreeNode> trees;
    trees.reserve(config.popSize);
    for (std::size_t i = 0; i < config.popSize; ++i) trees.push_back(random_rule_tree(g, config.maxDerivations, rng));
    std::vector<Individual> pop = evaluate_all(std::move(trees), g, data, config.threads);
    std::vector<Individual> archive = update_archive({}, pop, config, roles);
    if (observer) observer(0, pop, archive);

    for (std::size_t gen = 1; gen <= config.maxGen; ++gen) {
        std::vector<const Individual*> pool;
        pool.reserve(pop.size() + archive.size());
        for (const auto& ind : pop) pool.push_back(&ind);
        for (const auto& ind : archive) pool.push_back(&ind);
        std::vector<Individual> parents = tournament_select(pool, config.popSize, rng);

        std::vector<TreeNode> offspring;
        offspring.reserve(parents.size());
        for (std::size_t i = 0; i + 1 < parents.size(); i += 2) {
            if (rng.chance(config.crossoverProb)) {
                auto [x, y] = crossover(parents[i].genotype, parents[i + 1].genotype, g, config.maxDerivations, rng);
                offspring.push_back(std::move(x));
                offspring.push_back(std::move(y));
            } else {
                offspring.push_back(std::move(parents[i].genotype));
                offspring.push_back(std::move(parents[i + 1].genotype));
            }
        }
        if (parents.size() % 2) offspring.push_back(std::move(parents.back().genotype));
        for (auto& child : offspring) {
            if (rng.chance(0.5)) child = diversity_mutate(child, g, config.maxDerivations, rng);
            else child = dpd_mutate(child, g, rng);
        }
        pop = evaluate_all(std::move(offspring), g, data, config.threads);
        archive = update_archive(archive, pop, config, roles);
        if (observer) observer(gen, pop, archive);
    }
    result.archive = std::move(archive);
    return result;
}

} // namespace dpd
