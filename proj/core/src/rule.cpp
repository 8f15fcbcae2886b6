#include "dpd/rule.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "dpd/errors.hpp"

namespace dpd {

const char* to_string(Comparator c) {
    switch (c) {
    case Comparator::Lt: return "<";
    case Comparator::Gt: return ">";
    case Comparator::Le: return "<=";
    case Comparator::Ge: return ">=";
    case Comparator::Eq: return "=";
    case Comparator::Ne: return "!=";
    }
    return "?";
}

std::optional<Comparator> parse_comparator(std::string_view s) {
    if (s == "<") return Comparator::Lt;
    if (s == ">") return Comparator::Gt;
    if (s == "<=" || s == "≤") return Comparator::Le;
    if (s == ">=" || s == "≥") return Comparator::Ge;
    if (s == "=" || s == "==") return Comparator::Eq;
    if (s == "!=" || s == "≠") return Comparator::Ne;
    return std::nullopt;
}

Comparator inverse(Comparator c) {
    switch (c) {
    case Comparator::Lt: return Comparator::Ge;
    case Comparator::Ge: return Comparator::Lt;
    case Comparator::Gt: return Comparator::Le;
    case Comparator::Le: return Comparator::Gt;
    case Comparator::Eq: return Comparator::Ne;
    case Comparator::Ne: return Comparator::Eq;
    }
    return c;
}

bool is_numeric(Comparator c) { return c != Comparator::Eq && c != Comparator::Ne; }

bool compare(Comparator c, std::int64_t lhs, std::int64_t rhs) {
    switch (c) {
    case Comparator::Lt: return lhs < rhs;
    case Comparator::Gt: return lhs > rhs;
    case Comparator::Le: return lhs <= rhs;
    case Comparator::Ge: return lhs >= rhs;
    case Comparator::Eq: return lhs == rhs;
    case Comparator::Ne: return lhs != rhs;
    }
    return false;
}

const char* to_string(Consequent c) { return c == Consequent::APattern ? "aPattern" : "notAPattern"; }

std::optional<Consequent> parse_consequent(std::string_view s) {
    if (s == "aPattern") return Consequent::APattern;
    if (s == "notAPattern") return Consequent::NotAPattern;
    return std::nullopt;
}

Consequent flip(Consequent c) {
    return c == Consequent::APattern ? Consequent::NotAPattern : Consequent::APattern;
}

bool agrees(Consequent c, Label label) {
    return (c == Consequent::APattern) == (label == Label::Positive);
}

bool canonical_less(const Comparison& a, const Comparison& b) {
    std::string_view na = op_name(a.op), nb = op_name(b.op);
    if (na != nb) return na < nb;
    if (a.roles != b.roles) return a.roles < b.roles;
    if (a.comparator != b.comparator) return a.comparator < b.comparator;
    return a.value < b.value;
}

std::vector<Comparison> normalized(const std::vector<Comparison>& antecedent) {
    std::vector<Comparison> out = antecedent;
    std::sort(out.begin(), out.end(), canonical_less);
    return out;
}

bool same_rule(const Rule& a, const Rule& b) {
    return a.consequent == b.consequent && a.antecedent.size() == b.antecedent.size() &&
           normalized(a.antecedent) == normalized(b.antecedent);
}

bool antecedent_subset(const Rule& a, const Rule& b) {
    if (a.antecedent.size() > b.antecedent.size()) return false;
    auto na = normalized(a.antecedent), nb = normalized(b.antecedent);
    return std::includes(nb.begin(), nb.end(), na.begin(), na.end(), canonical_less);
}

namespace {

const std::string& role_name(const std::vector<std::string>& roles, std::uint8_t i) {
    if (i >= roles.size()) throw ContractError("role index " + std::to_string(i) + " out of range");
    return roles[i];
}

std::string value_text(const Comparison& c) {
    if (is_numeric(c.op)) return std::to_string(c.value);
    return value_name(static_cast<CatValue>(c.value));
}

} // namespace

std::string render(const Comparison& c, const std::vector<std::string>& roles) {
    std::string s = op_name(c.op);
    s += '(';
    for (std::size_t i = 0; i < c.roles.size(); ++i) {
        if (i) s += ',';
        s += role_name(roles, c.roles[i]);
    }
    s += ") ";
    s += to_string(c.comparator);
    s += ' ';
    s += value_text(c);
    return s;
}

std::string render(const Rule& r, const std::vector<std::string>& roles) {
    std::string s = "if ";
    for (std::size_t i = 0; i < r.antecedent.size(); ++i) {
        if (i) s += " and ";
        s += render(r.antecedent[i], roles);
    }
    s += " then ";
    s += to_string(r.consequent);
    return s;
}

std::string render_listing(const Rule& r, const std::vector<std::string>& roles) {
    std::string s = "if\n";
    for (std::size_t i = 0; i < r.antecedent.size(); ++i) {
        s += i ? "   and " : "   ";
        s += render(r.antecedent[i], roles);
        s += '\n';
    }
    s += "then\n   ";
    s += to_string(r.consequent);
    s += '\n';
    return s;
}

std::string canonical_text(const Rule& r, const std::vector<std::string>& roles) {
    Rule n = r;
    n.antecedent = normalized(r.antecedent);
    return render(n, roles);
}

namespace {

class RuleParser {
public:
    RuleParser(std::string_view text, const std::vector<std::string>& roles) : s_(text), roles_(roles) {}

    Rule parse() {
        Rule rule;
        expect_word("if");
        do {
            rule.antecedent.push_back(comparison());
        } while (accept_word("and"));
        expect_word("then");
        std::size_t at = skip();
        std::string word = identifier();
        auto consequent = parse_consequent(word);
        if (!consequent) fail(at, "expected aPattern or notAPattern, got '" + word + "'");
        rule.consequent = *consequent;
        if (skip() != s_.size()) fail(pos_, "trailing text");
        return rule;
    }

private:
    [[noreturn]] void fail(std::size_t at, const std::string& what) const {
        throw ContractError("rule text, offset " + std::to_string(at) + ": " + what);
    }

    std::size_t skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        return pos_;
    }

    static bool word_char(char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$' || c == '.';
    }

    std::string identifier() {
        skip();
        std::size_t start = pos_;
        while (pos_ < s_.size() && word_char(s_[pos_])) ++pos_;
        return std::string(s_.substr(start, pos_ - start));
    }

    bool accept_word(std::string_view w) {
        std::size_t save = pos_;
        if (identifier() == w) return true;
        pos_ = save;
        return false;
    }

    void expect_word(std::string_view w) {
        std::size_t at = skip();
        if (!accept_word(w)) fail(at, "expected '" + std::string(w) + "'");
    }

    void expect_char(char c) {
        std::size_t at = skip();
        if (pos_ >= s_.size() || s_[pos_] != c) fail(at, std::string("expected '") + c + "'");
        ++pos_;
    }

    Comparator comparator() {
        std::size_t at = skip();
        static constexpr std::string_view kForms[] = {"<=", ">=", "!=", "==", "≤", "≥", "≠", "<", ">", "="};
        for (std::string_view f : kForms) {
            if (s_.substr(pos_, f.size()) == f) {
                pos_ += f.size();
                return *parse_comparator(f);
            }
        }
        fail(at, "expected a comparator");
    }

    Comparison comparison() {
        Comparison c;
        std::size_t at = skip();
        std::string name = identifier();
        auto op = parse_op(name);
        if (!op) fail(at, "unknown operator '" + name + "'");
        c.op = *op;
        expect_char('(');
        for (std::size_t i = 0; i < arity(c.op); ++i) {
            if (i) expect_char(',');
            std::size_t rat = skip();
            std::string role = identifier();
            auto it = std::find(roles_.begin(), roles_.end(), role);
            if (it == roles_.end()) fail(rat, "unknown role '" + role + "'");
            c.roles.push_back(static_cast<std::uint8_t>(it - roles_.begin()));
        }
        expect_char(')');
        std::size_t cat = skip();
        c.comparator = comparator();
        if (is_numeric(c.op) != is_numeric(c.comparator))
            fail(cat, std::string("comparator not allowed for ") + op_name(c.op));
        std::size_t vat = skip();
        if (is_numeric(c.op)) {
            std::size_t start = pos_;
            if (pos_ < s_.size() && s_[pos_] == '-') ++pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            std::int64_t v = 0;
            auto [p, ec] = std::from_chars(s_.data() + start, s_.data() + pos_, v);
            if (ec != std::errc{} || p != s_.data() + pos_) fail(vat, "expected an integer constant");
            c.value = v;
        } else {
            std::string word = identifier();
            auto v = parse_value(word);
            if (!v || !in_domain(c.op, *v))
                fail(vat, "value '" + word + "' not in the domain of " + op_name(c.op));
            c.value = static_cast<std::int64_t>(*v);
        }
        return c;
    }

    std::string_view s_;
    const std::vector<std::string>& roles_;
    std::size_t pos_ = 0;
};

} // namespace

Rule parse_rule(std::string_view text, const std::vector<std::string>& roles) {
    return RuleParser(text, roles).parse();
}

bool holds_feature(const Comparison& c, std::int32_t feature) {
    if (feature == kUndefinedFeature) return false;
    return compare(c.comparator, feature, c.value);
}

bool holds(const Comparison& c, const CodeFactsGraph& graph,
           std::span<const CodeFactsGraph::Index> roleArtifacts) {
    std::vector<CodeFactsGraph::Index> args;
    args.reserve(c.roles.size());
    for (std::uint8_t r : c.roles) {
        if (r >= roleArtifacts.size()) throw ContractError("comparison role index out of range");
        args.push_back(roleArtifacts[r]);
    }
    if (is_numeric(c.op) && graph.at(args[0]).isExternal()) return false;
    return holds_feature(c, eval_op(c.op, graph, args));
}

std::vector<CodeFactsGraph::Index> bind_roles(const Candidate& candidate, const CodeFactsGraph& graph,
                                              const std::vector<std::string>& roles) {
    std::vector<CodeFactsGraph::Index> out;
    out.reserve(roles.size());
    for (const auto& role : roles) {
        auto it = candidate.roleMap.find(role);
        if (it == candidate.roleMap.end()) throw ContractError("candidate has no artifact for role '" + role + "'");
        out.push_back(graph.index_of(it->second));
    }
    return out;
}

bool matches(const Rule& rule, const Candidate& candidate, const CodeFactsGraph& graph,
             const std::vector<std::string>& roles) {
    auto bound = bind_roles(candidate, graph, roles);
    return std::all_of(rule.antecedent.begin(), rule.antecedent.end(),
                       [&](const Comparison& c) { return holds(c, graph, bound); });
}

} // namespace dpd
