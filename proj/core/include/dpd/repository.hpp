#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "dpd/candidate.hpp"
#include "dpd/classifier.hpp"
#include "dpd/dataset.hpp"
#include "dpd/evolution.hpp"
#include "dpd/facts.hpp"
#include "dpd/grammar.hpp"

namespace dpd {

struct RepoSample {
    Candidate candidate;
    Label label = Label::Negative;
    std::string project;
};

// Labelled samples of one pattern drawn from one or more projects.
struct LabeledRepository {
    std::string pattern;
    std::vector<std::string> roles;
    std::map<std::string, std::shared_ptr<const CodeFactsGraph>> projects;
    // Where each project's facts were loaded from (kept for re-saving).
    std::map<std::string, std::string> factsPaths;
    std::vector<RepoSample> samples;

    // Throws ContractError when empty, when a sample names an unknown
    // project or role, or an artifact missing from its project's graph.
    void validate() const;

    std::vector<Label> labels() const;
    Dataset dataset() const;
    // Dataset restricted to `indices`; onAccess(i) is called for every
    // repository sample read.
    Dataset dataset(const std::vector<std::size_t>& indices,
                    const std::function<void(std::size_t)>& onAccess = {}) const;
};

// {"version":1,"pattern":..,"roles":[..],
//  "projects":[{"id":..,"facts":"path" | {facts object}}],
//  "samples":[{"project":..,"label":"positive"|"negative","roles":{..}}]}
// Relative facts paths are resolved against `baseDir`.
LabeledRepository repository_from_json(std::string_view text, const std::filesystem::path& baseDir);
std::string repository_to_json(const LabeledRepository& repo);
LabeledRepository load_repository(const std::filesystem::path& path);
void save_repository(const LabeledRepository& repo, const std::filesystem::path& path);

struct Confusion {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

    std::size_t total() const { return tp + fp + tn + fn; }
    bool operator==(const Confusion&) const = default;
};

struct Metrics {
    Confusion counts;
    double accuracy = 0, precision = 0, recall = 0, specificity = 0, f1 = 0;
    // Set when the metric's denominator was zero (its value is then 0).
    bool accuracyUndefined = false, precisionUndefined = false, recallUndefined = false,
         specificityUndefined = false, f1Undefined = false;

    static Metrics from(const Confusion& c);
};

// aPattern is the positive class.
Metrics evaluate(const DetectionModel& model, const Dataset& test);

struct TrainConfig {
    EvolutionConfig evolution;
    // Empty selects every operator.
    std::vector<Op> ops;
    // Missing numeric operators use the range observed on the training data.
    std::map<Op, ConstRange> constRanges;
    int coverageThreshold = 1;
    Strategy strategy = Strategy::DFML_CHI2;
    int lapK = 5;

    // Throws ConfigError.
    void validate() const;
};

struct TrainResult {
    DetectionModel model;
    std::size_t archiveSize = 0;
    std::vector<std::string> warnings;
};

Grammar training_grammar(const Dataset& data, const TrainConfig& config);
std::vector<Rule> pruned_rules(const std::vector<Rule>& archive, const Dataset& data, int coverageThreshold);

// Evolution, precedence sort, database coverage pruning, model assembly.
TrainResult train(const Dataset& data, const std::string& pattern, const TrainConfig& config);
TrainResult train(const LabeledRepository& repo, const TrainConfig& config);
TrainResult train_on_indices(const LabeledRepository& repo, const std::vector<std::size_t>& indices,
                             const TrainConfig& config, const std::function<void(std::size_t)>& onAccess = {});

struct Fold {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

struct FoldPlan {
    std::vector<Fold> folds;
    std::vector<std::string> warnings;
};

// Per-class shuffle dealt round-robin over the folds, the starting fold
// carrying over between classes. Classes smaller than k cannot appear in
// every fold; a warning is emitted and they are spread as far as they go.
// Throws ConfigError when k < 2 or k exceeds the number of samples.
FoldPlan stratified_kfold(const std::vector<Label>& labels, std::size_t k, std::uint64_t seed);

struct XvalConfig {
    TrainConfig base;
    std::vector<double> supports{0.01};
    std::vector<double> confidences{0.7};
    std::vector<Strategy> strategies{Strategy::DFML_CHI2};
    std::vector<int> coverages{1};
    std::size_t folds = 10;
    std::size_t runs = 30;
    std::uint64_t seed = 1;
    unsigned threads = 1;
};

struct Summary {
    double mean = 0;
    double std = 0;
};

struct XvalCell {
    double support = 0;
    double confidence = 0;
    Strategy strategy = Strategy::DFML_CHI2;
    int coverage = 1;
    std::size_t emptyModels = 0;
    Summary accuracy, precision, recall, specificity, f1;
};

struct XvalReport {
    std::string pattern;
    std::size_t folds = 0;
    std::size_t runs = 0;
    std::uint64_t seed = 0;
    std::vector<XvalCell> cells;
    std::vector<std::string> warnings;

    std::string to_json() const;
};

// One evolution per (support, confidence, run, fold) with seed
// derive_seed(seed, run, fold); every coverage/strategy pair is evaluated on
// its archive. Folds of run r come from stratified_kfold(.., derive_seed(seed, r)).
XvalReport cross_validate(const Dataset& data, const std::string& pattern, const XvalConfig& config);
XvalReport cross_validate(const LabeledRepository& repo, const XvalConfig& config);

Summary summarize(const std::vector<double>& values);

} // namespace dpd
