#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "dpd/facts.hpp"

namespace dpd {

enum class Label : std::uint8_t { Negative, Positive };

const char* to_string(Label label);
std::optional<Label> parse_label(std::string_view s);

// A pattern name plus one artifact per role.
struct Candidate {
    std::string pattern;
    std::map<std::string, ArtifactId> roleMap;

    // Compact JSON object of the role map with sorted keys; used as the
    // canonical ordering and deduplication key.
    std::string key() const;

    bool operator==(const Candidate&) const = default;
};

} // namespace dpd
