#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dpd {

// Raised when an API precondition is violated (bad arity, unknown operator,
// malformed template). Indicates a programming or input-contract bug.
class ContractError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Raised for invalid user configuration (bad thresholds, empty operator set,
// missing directories).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class FactsErrc {
    Io,
    MalformedJson,
    SchemaViolation,
    UnsupportedVersion,
    DuplicateArtifact,
    InvalidArtifact,
    DanglingReference,
    SupertypeCycle,
};

const char* to_string(FactsErrc code);

// Error loading or validating a code-facts graph. `entities` names the
// offending artifact ids (a cycle lists every member).
class FactsError : public std::runtime_error {
public:
    FactsError(FactsErrc code, std::string message, std::vector<std::string> entities = {})
        : std::runtime_error(std::move(message)), code_(code), entities_(std::move(entities)) {}

    FactsErrc code() const noexcept { return code_; }
    const std::vector<std::string>& entities() const noexcept { return entities_; }

private:
    FactsErrc code_;
    std::vector<std::string> entities_;
};

enum class ExtractErrc {
    MissingSourceRoot,
    NoParsableFiles,
};

class ExtractError : public std::runtime_error {
public:
    ExtractError(ExtractErrc code, std::string message)
        : std::runtime_error(std::move(message)), code_(code) {}

    ExtractErrc code() const noexcept { return code_; }

private:
    ExtractErrc code_;
};

enum class ModelErrc {
    Io,
    Parse,
    SchemaViolation,
    UnsupportedVersion,
};

// Error reading a serialized detection model, candidate list or repository.
class ModelError : public std::runtime_error {
public:
    ModelError(ModelErrc code, std::string message)
        : std::runtime_error(std::move(message)), code_(code) {}

    ModelErrc code() const noexcept { return code_; }

private:
    ModelErrc code_;
};

} // namespace dpd
