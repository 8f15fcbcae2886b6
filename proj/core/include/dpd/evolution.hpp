#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "dpd/dataset.hpp"
#include "dpd/grammar.hpp"
#include "dpd/rng.hpp"
#include "dpd/rule.hpp"

namespace dpd {

struct EvolutionConfig {
    std::size_t popSize = 100;
    std::size_t maxGen = 150;
    // 0 keeps the archive unbounded.
    std::size_t extPopSize = 0;
    double crossoverProb = 0.8;
    int maxDerivations = 25;
    double supportThreshold = 0.01;
    double confidenceThreshold = 0.7;
    std::uint64_t seed = 1;
    // Worker threads for fitness evaluation; results do not depend on it.
    unsigned threads = 1;

    // Throws ConfigError.
    void validate() const;
};

struct Individual {
    TreeNode genotype;
    // Phenotype with support/confidence caches for the training dataset.
    Rule rule;

    double fitness() const { return rule.support(); }
    double confidence() const { return rule.confidence(); }
};

Individual evaluate(TreeNode genotype, const Grammar& g, const Dataset& data);

// Binary tournaments with replacement over `pool`; ties go to the higher
// confidence, then to a coin flip.
std::vector<Individual> tournament_select(const std::vector<const Individual*>& pool, std::size_t count, Rng& rng);

// Swaps one uniformly chosen <cmp> subtree between the parents. A child that
// would exceed maxDerivations is replaced by its parent.
std::pair<TreeNode, TreeNode> crossover(const TreeNode& a, const TreeNode& b, const Grammar& g, int maxDerivations,
                                        Rng& rng);

// Re-derives k comparisons, P(k) proportional to 2^-k for k in [1, n].
TreeNode diversity_mutate(const TreeNode& tree, const Grammar& g, int maxDerivations, Rng& rng);
// Draws k as diversity_mutate does; exposed for tests.
std::size_t diversity_k(std::size_t n, Rng& rng);

// Inverts each comparator with probability 1/n and the consequent with
// probability 1/2.
TreeNode dpd_mutate(const TreeNode& tree, const Grammar& g, Rng& rng);

// Thresholded, deduplicated, non-redundant union of archive and population
// in precedence order, truncated to extPopSize when bounded.
std::vector<Individual> update_archive(const std::vector<Individual>& archive, const std::vector<Individual>& pop,
                                       const EvolutionConfig& config, const std::vector<std::string>& roles);

struct EvolutionResult {
    std::vector<Individual> archive;
    std::vector<std::string> warnings;

    std::vector<Rule> rules() const;
};

// Called after the initial evaluation (generation 0) and after every
// generation with the current population and archive.
using GenerationObserver =
    std::function<void(std::size_t generation, const std::vector<Individual>& pop, const std::vector<Individual>& archive)>;

// Archive-based generational loop. Deterministic for a given config (seed
// included), grammar and dataset regardless of `threads`.
EvolutionResult run_g3p4dpd(const EvolutionConfig& config, const Grammar& g, const Dataset& data,
                            const GenerationObserver& observer = {});

} // namespace dpd
