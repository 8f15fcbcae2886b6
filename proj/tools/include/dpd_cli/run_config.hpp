#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "dpd/repository.hpp"

namespace dpd::cli {

// Settings shared by the train and xval commands. support, confidence,
// strategy and coverage hold one value for train and a grid for xval.
struct RunConfig {
    EvolutionConfig evolution;
    std::vector<Op> ops;
    std::map<Op, ConstRange> constRanges;
    std::vector<double> supports{0.01};
    std::vector<double> confidences{0.7};
    std::vector<Strategy> strategies{Strategy::DFML_CHI2};
    std::vector<int> coverages{1};
    int lapK = 5;
    std::vector<std::string> roles;
    std::string templatePath;
    std::size_t folds = 10;
    std::size_t runs = 30;

    // Throws ConfigError for unknown keys and unparsable values.
    void set(std::string_view key, std::string_view value);

    // Single-valued view; ConfigError when a grid key holds several values.
    TrainConfig train_config() const;
    XvalConfig xval_config() const;
};

// Flat `key = value` lines; '#' starts a comment.
void apply_config_text(RunConfig& config, std::string_view text);
void apply_config_file(RunConfig& config, const std::filesystem::path& path);
// "key=value" as given to --set.
void apply_assignment(RunConfig& config, std::string_view assignment);

std::vector<std::string> config_keys();

} // namespace dpd::cli
