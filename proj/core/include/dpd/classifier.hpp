#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dpd/candidate.hpp"
#include "dpd/dataset.hpp"
#include "dpd/facts.hpp"
#include "dpd/rule.hpp"

namespace dpd {

// Total order on rules: higher confidence, then higher support, then fewer
// comparisons, then canonical text. Confidence and support are compared as
// exact fractions.
bool precedes(const Rule& a, const Rule& b, const std::vector<std::string>& roles);
void sort_rules(std::vector<Rule>& rules, const std::vector<std::string>& roles);

// Database coverage pruning. Sorts `rules` by precedence, then keeps each
// rule that correctly classifies at least one remaining sample; samples
// covered `threshold` times are retired.
std::vector<Rule> prune_database_coverage(std::vector<Rule> rules, const Dataset& data, int threshold);

enum class Strategy : std::uint8_t { MAXL, DFML, DFML_CHI2, DFML_LAP };

const char* to_string(Strategy s);
// Case-insensitive; also accepts "DFML_X2", "DFML_Laplace".
std::optional<Strategy> parse_strategy(std::string_view s);

struct RuleScores {
    double chi2 = 0;
    double maxChi2 = 0;
    // chi2^2 / maxChi2; 0 for degenerate marginals and negative correlation.
    double weightedChi2 = 0;
    double laplace = 0;

    bool operator==(const RuleScores&) const = default;
};

// From the rule's (a, j, c, |D|) counts.
RuleScores rule_scores(const RuleStats& stats);

struct DetectionModel {
    std::string pattern;
    std::vector<std::string> roles;
    // Precedence order.
    std::vector<Rule> rules;
    std::vector<RuleScores> scores;
    Strategy strategy = Strategy::DFML_CHI2;
    int lapK = 5;
    int coverageThreshold = 1;
    std::size_t trainingSize = 0;
    Consequent defaultLabel = Consequent::NotAPattern;

    bool empty() const { return rules.empty(); }
};

// Sorts the rules and fills the score caches.
DetectionModel build_model(std::string pattern, std::vector<std::string> roles, std::vector<Rule> rules,
                           Strategy strategy, int lapK, int coverageThreshold, std::size_t trainingSize);

struct Verdict {
    Consequent label = Consequent::NotAPattern;
    // Indices into model.rules of the rules that decided the outcome.
    std::vector<std::size_t> explanation;
};

// Decision from the (ascending) indices of the covering rules.
Verdict decide(const DetectionModel& model, const std::vector<std::size_t>& covering);
Verdict classify(const DetectionModel& model, const Candidate& candidate, const CodeFactsGraph& graph);
// Same, using the dataset's precomputed features (roles must agree).
Verdict classify(const DetectionModel& model, const Dataset& data, std::size_t sample);

// Model files: {"version":1,...}. Keys sorted, two-space indentation.
std::string model_to_json(const DetectionModel& model);
// Throws ModelError (Parse, SchemaViolation, UnsupportedVersion).
DetectionModel model_from_json(std::string_view text);
void save_model(const DetectionModel& model, const std::filesystem::path& path);
DetectionModel load_model(const std::filesystem::path& path);

} // namespace dpd
