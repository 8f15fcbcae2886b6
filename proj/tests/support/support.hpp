#pragma once

// Independent reference implementations and corpus generators shared by the
// unit and acceptance tests. Nothing here calls the engine's own matching,
// counting or pruning code.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "dpd/candidates.hpp"
#include "dpd/classifier.hpp"
#include "dpd/dataset.hpp"
#include "dpd/repository.hpp"
#include "dpd/rng.hpp"

namespace dpd::testing {

std::filesystem::path fixture_dir(const std::string& name);
std::filesystem::path template_path(const std::string& pattern);
std::string read_file(const std::filesystem::path& p);

// Fresh empty directory below the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

// Comparison truth computed straight from compute_metric / eval_categorical.
bool oracle_holds(const Comparison& c, const CodeFactsGraph& g, const std::vector<CodeFactsGraph::Index>& args);
bool oracle_matches(const Rule& r, const Sample& s, const std::vector<std::string>& roles);

struct OracleCounts {
    std::size_t matched = 0;
    std::size_t correct = 0;
    std::size_t total = 0;
};
OracleCounts oracle_counts(const Rule& r, const std::vector<Sample>& samples, const std::vector<std::string>& roles);

// Straight-line database coverage over rules already in precedence order.
std::vector<std::size_t> oracle_prune(const std::vector<Rule>& sorted, const std::vector<Sample>& samples,
                                      const std::vector<std::string>& roles, int threshold);

// Every injective assignment of non-external artifacts to the roles that
// satisfies the template edges, checked against raw facts.
std::vector<Candidate> oracle_candidates(const CodeFactsGraph& g, const RoleTemplate& t);

struct Counts {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};
Counts oracle_confusion(const std::vector<bool>& predictedPositive, const std::vector<bool>& actualPositive);

// Random valid graph of `n` project artifacts plus a few externals.
CodeFactsGraph random_graph(Rng& rng, std::size_t n);

// Random dataset over a random graph: every role tuple is random, labels are
// coin flips.
Dataset random_dataset(Rng& rng, const std::vector<std::string>& roles, std::size_t samples,
                       std::shared_ptr<const CodeFactsGraph> graph);

// Singleton corpus: positives have a private constructor and a static field
// of their own type; each negative lacks at least one of the two. All other
// facts are drawn from the same distribution for both classes.
LabeledRepository singleton_corpus(std::size_t positives, std::size_t negatives, std::uint64_t seed);

// Java sources for a small project with `n` singletons (eager or lazy) and
// 3n look-alikes: public-constructor classes, private-constructor utilities
// and classes exposing a public shared instance. Returns the singleton ids.
std::vector<std::string> write_singleton_project(const std::filesystem::path& dir, std::size_t n, std::uint64_t seed);

} // namespace dpd::testing
