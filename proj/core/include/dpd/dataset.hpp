#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "dpd/candidate.hpp"
#include "dpd/facts.hpp"
#include "dpd/grammar.hpp"
#include "dpd/rule.hpp"

namespace dpd {

struct Sample {
    Candidate candidate;
    Label label = Label::Negative;
    std::shared_ptr<const CodeFactsGraph> graph;
};

// Labelled candidates of one pattern with every operator value precomputed,
// so that rule evaluation is a table lookup. Immutable after construction.
class Dataset {
public:
    Dataset() = default;
    // Throws ContractError when a sample lacks a role, names an unknown
    // artifact or has no graph.
    Dataset(std::vector<std::string> roles, std::vector<Sample> samples);

    std::size_t size() const { return samples_.size(); }
    bool empty() const { return samples_.empty(); }
    const std::vector<std::string>& roles() const { return roles_; }
    const Sample& sample(std::size_t i) const { return samples_[i]; }
    const std::vector<Sample>& samples() const { return samples_; }
    Label label(std::size_t i) const { return samples_[i].label; }
    std::size_t count(Label label) const;

    std::int32_t feature(std::size_t i, Op op, std::span<const std::uint8_t> roles) const;
    bool matches(const Rule& rule, std::size_t i) const;
    RuleStats stats(const Rule& rule) const;

    // Numeric constant ranges: [0, max observed value] of each metric over
    // the non-external artifacts of the sample graphs.
    std::map<Op, ConstRange> observed_ranges() const;

    Dataset subset(const std::vector<std::size_t>& indices) const;

private:
    std::size_t slot(Op op, std::span<const std::uint8_t> roles) const;

    std::vector<std::string> roles_;
    std::vector<Sample> samples_;
    std::vector<std::size_t> offset_;
    std::size_t width_ = 0;
    std::vector<std::int32_t> features_;
};

} // namespace dpd
