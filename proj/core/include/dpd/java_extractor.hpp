#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "dpd/facts.hpp"

namespace dpd {

struct SkippedFile {
    std::string path;
    std::string reason;
};

struct ExtractionReport {
    std::size_t filesParsed = 0;
    std::vector<SkippedFile> filesSkipped;
    // Methods whose body could not be analyzed; their declarations are kept
    // but no invocations or creations are recorded for them.
    std::vector<std::string> degradedMethods;

    // {"files_parsed":n,"files_skipped":[{"path","reason"}...]}
    std::string to_json() const;
};

struct ExtractionResult {
    CodeFactsGraph graph;
    ExtractionReport report;
};

struct SourceFile {
    std::string path;
    std::string text;
};

// Parses every *.java file below `sourceRoot` (lexicographic path order).
// Throws ExtractError: MissingSourceRoot when the directory does not exist,
// NoParsableFiles when source files exist but none could be parsed.
ExtractionResult extract_facts(const std::filesystem::path& sourceRoot,
                               const std::vector<std::string>& containerTypes);

// Same, over in-memory sources (paths are only used for reporting).
ExtractionResult extract_sources(std::vector<SourceFile> files,
                                 const std::vector<std::string>& containerTypes);

} // namespace dpd
