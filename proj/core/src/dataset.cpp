#include "dpd/dataset.hpp"

#include <algorithm>
#include <set>

#include "dpd/errors.hpp"
#include "dpd/operators.hpp"

namespace dpd {

namespace {

std::size_t power(std::size_t base, std::size_t exp) {
    std::size_t r = 1;
    while (exp--) r *= base;
    return r;
}

} // namespace

Dataset::Dataset(std::vector<std::string> roles, std::vector<Sample> samples)
    : roles_(std::move(roles)), samples_(std::move(samples)) {
    if (roles_.empty()) throw ContractError("dataset needs at least one role");
    const std::size_t r = roles_.size();
    offset_.resize(kOpCount + 1);
    for (std::size_t k = 0; k < kOpCount; ++k)
        offset_[k + 1] = offset_[k] + power(r, arity(static_cast<Op>(k)));
    width_ = offset_[kOpCount];
    features_.assign(samples_.size() * width_, kUndefinedFeature);

    std::vector<CodeFactsGraph::Index> args;
    for (std::size_t i = 0; i < samples_.size(); ++i) {
        const Sample& s = samples_[i];
        if (!s.graph) throw ContractError("sample without a code-facts graph");
        auto bound = bind_roles(s.candidate, *s.graph, roles_);
        std::int32_t* row = features_.data() + i * width_;
        for (std::size_t k = 0; k < kOpCount; ++k) {
            Op op = static_cast<Op>(k);
            std::size_t n = arity(op);
            std::size_t combos = power(r, n);
            for (std::size_t code = 0; code < combos; ++code) {
                args.clear();
                std::size_t rest = code;
                for (std::size_t a = 0; a < n; ++a) {
                    args.push_back(bound[rest % r]);
                    rest /= r;
                }
                if (is_numeric(op) && s.graph->at(args[0]).isExternal()) continue;
                row[offset_[k] + code] = eval_op(op, *s.graph, args);
            }
        }
    }
}

std::size_t Dataset::count(Label label) const {
    return static_cast<std::size_t>(
        std::count_if(samples_.begin(), samples_.end(), [&](const Sample& s) { return s.label == label; }));
}

std::size_t Dataset::slot(Op op, std::span<const std::uint8_t> roles) const {
    std::size_t code = 0, mul = 1;
    for (std::uint8_t r : roles) {
        if (r >= roles_.size()) throw ContractError("role index out of range");
        code += r * mul;
        mul *= roles_.size();
    }
    return offset_[static_cast<std::size_t>(op)] + code;
}

std::int32_t Dataset::feature(std::size_t i, Op op, std::span<const std::uint8_t> roles) const {
    if (roles.size() != arity(op)) throw ContractError("feature lookup with wrong arity");
    return features_[i * width_ + slot(op, roles)];
}

bool Dataset::matches(const Rule& rule, std::size_t i) const {
    const std::int32_t* row = features_.data() + i * width_;
    for (const Comparison& c : rule.antecedent)
        if (!holds_feature(c, row[slot(c.op, c.roles)])) return false;
    return true;
}

RuleStats Dataset::stats(const Rule& rule) const {
    RuleStats st;
    st.total = samples_.size();
    std::vector<std::size_t> slots;
    slots.reserve(rule.antecedent.size());
    for (const Comparison& c : rule.antecedent) {
        if (c.roles.size() != arity(c.op)) throw ContractError("comparison arity mismatch");
        slots.push_back(slot(c.op, c.roles));
    }
    for (std::size_t i = 0; i < samples_.size(); ++i) {
        bool classMatch = agrees(rule.consequent, samples_[i].label);
        if (classMatch) ++st.classCount;
        const std::int32_t* row = features_.data() + i * width_;
        bool ok = true;
        for (std::size_t k = 0; k < slots.size() && ok; ++k) ok = holds_feature(rule.antecedent[k], row[slots[k]]);
        if (!ok) continue;
        ++st.matched;
        if (classMatch) ++st.correct;
    }
    return st;
}

std::map<Op, ConstRange> Dataset::observed_ranges() const {
    std::map<Op, ConstRange> out;
    for (Op op : kNumericOps) out[op] = {0, 0};
    std::set<const CodeFactsGraph*> seen;
    for (const Sample& s : samples_) {
        if (!seen.insert(s.graph.get()).second) continue;
        for (CodeFactsGraph::Index a : s.graph->non_external())
            for (Op op : kNumericOps) out[op].hi = std::max(out[op].hi, compute_metric(op, *s.graph, a));
    }
    return out;
}

Dataset Dataset::subset(const std::vector<std::size_t>& indices) const {
    Dataset d;
    d.roles_ = roles_;
    d.offset_ = offset_;
    d.width_ = width_;
    d.samples_.reserve(indices.size());
    d.features_.reserve(indices.size() * width_);
    for (std::size_t i : indices) {
        if (i >= samples_.size()) throw ContractError("subset index out of range");
        d.samples_.push_back(samples_[i]);
        d.features_.insert(d.features_.end(), features_.begin() + static_cast<std::ptrdiff_t>(i * width_),
                           features_.begin() + static_cast<std::ptrdiff_t>((i + 1) * width_));
    }
    return d;
}

} // namespace dpd
