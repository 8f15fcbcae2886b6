#include "dpd/classifier.hpp"

#include <algorithm>
#include <cctype>
#include <nlohmann/json.hpp>
#include <numeric>

#include "dpd/errors.hpp"
#include "io_util.hpp"

namespace dpd {

using json = nlohmann::json;

namespace {

// Sign of p1/q1 - p2/q2 for non-negative fractions (q may be 0 meaning 0).
int compare_fraction(std::size_t p1, std::size_t q1, std::size_t p2, std::size_t q2) {
    if (q1 == 0) p1 = 0, q1 = 1;
    if (q2 == 0) p2 = 0, q2 = 1;
    unsigned __int128 l = static_cast<unsigned __int128>(p1) * q2;
    unsigned __int128 r = static_cast<unsigned __int128>(p2) * q1;
    return l < r ? -1 : l > r ? 1 : 0;
}

// Negative when a precedes b, ignoring the text tie-break.
int compare_metrics(const Rule& a, const Rule& b) {
    int c = compare_fraction(a.stats.correct, a.stats.matched, b.stats.correct, b.stats.matched);
    if (c) return -c;
    c = compare_fraction(a.stats.correct, a.stats.total, b.stats.correct, b.stats.total);
    if (c) return -c;
    if (a.antecedent.size() != b.antecedent.size()) return a.antecedent.size() < b.antecedent.size() ? -1 : 1;
    return 0;
}

} // namespace

bool precedes(const Rule& a, const Rule& b, const std::vector<std::string>& roles) {
    int c = compare_metrics(a, b);
    if (c) return c < 0;
    return canonical_text(a, roles) < canonical_text(b, roles);
}

void sort_rules(std::vector<Rule>& rules, const std::vector<std::string>& roles) {
    std::vector<std::string> keys;
    keys.reserve(rules.size());
    for (const auto& r : rules) keys.push_back(canonical_text(r, roles));
    std::vector<std::size_t> order(rules.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        int c = compare_metrics(rules[x], rules[y]);
        if (c) return c < 0;
        if (keys[x] != keys[y]) return keys[x] < keys[y];
        return x < y;
    });
    std::vector<Rule> sorted;
    sorted.reserve(rules.size());
    for (std::size_t i : order) sorted.push_back(std::move(rules[i]));
    rules = std::move(sorted);
}

std::vector<Rule> prune_database_coverage(std::vector<Rule> rules, const Dataset& data, int threshold) {
    if (threshold < 1) throw ConfigError("coverage threshold must be at least 1");
    sort_rules(rules, data.roles());
    std::vector<Rule> kept;
    std::vector<int> coverage(data.size(), 0);
    std::vector<bool> active(data.size(), true);
    std::size_t remaining = data.size();
    std::vector<std::size_t> covered;
    for (auto& rule : rules) {
        bool marked = false;
        covered.clear();
        for (std::size_t i = 0; i < data.size(); ++i) {
            if (!active[i] || !data.matches(rule, i)) continue;
            covered.push_back(i);
            if (agrees(rule.consequent, data.label(i))) marked = true;
        }
        if (marked) {
            kept.push_back(rule);
            for (std::size_t i : covered) {
                if (++coverage[i] >= threshold) {
                    active[i] = false;
                    --remaining;
                }
            }
        }
        if (remaining == 0) break;
    }
    return kept;
}

const char* to_string(Strategy s) {
    switch (s) {
    case Strategy::MAXL: return "MAXL";
    case Strategy::DFML: return "DFML";
    case Strategy::DFML_CHI2: return "DFML_CHI2";
    case Strategy::DFML_LAP: return "DFML_LAP";
    }
    return "DFML_CHI2";
}

std::optional<Strategy> parse_strategy(std::string_view s) {
    std::string up;
    for (char c : s) up += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (up == "MAXL") return Strategy::MAXL;
    if (up == "DFML") return Strategy::DFML;
    if (up == "DFML_CHI2" || up == "DFML_X2" || up == "DFML_CHI") return Strategy::DFML_CHI2;
    if (up == "DFML_LAP" || up == "DFML_LAPLACE") return Strategy::DFML_LAP;
    return std::nullopt;
}

RuleScores rule_scores(const RuleStats& st) {
    RuleScores s;
    const double a = static_cast<double>(st.matched), j = static_cast<double>(st.correct),
                 c = static_cast<double>(st.classCount), n = static_cast<double>(st.total);
    s.laplace = (j + 1.0) / (a + 2.0);
    if (st.matched == 0 || st.matched == st.total || st.classCount == 0 || st.classCount == st.total) return s;
    const double e = 1.0 / (a * c) + 1.0 / (a * (n - c)) + 1.0 / ((n - a) * c) + 1.0 / ((n - a) * (n - c));
    const double dev = j - a * c / n;
    const double top = std::min(a, c) - a * c / n;
    s.chi2 = dev * dev * n * e;
    s.maxChi2 = top * top * n * e;
    // Negatively correlated rules fall outside the maxChi2 bound and carry no weight.
    if (dev > 0 && s.maxChi2 > 0) s.weightedChi2 = s.chi2 * s.chi2 / s.maxChi2;
    return s;
}

DetectionModel build_model(std::string pattern, std::vector<std::string> roles, std::vector<Rule> rules,
                           Strategy strategy, int lapK, int coverageThreshold, std::size_t trainingSize) {
    if (lapK < 1) throw ConfigError("lapK must be at least 1");
    DetectionModel m;
    m.pattern = std::move(pattern);
    m.roles = std::move(roles);
    sort_rules(rules, m.roles);
    m.rules = std::move(rules);
    for (const auto& r : m.rules) m.scores.push_back(rule_scores(r.stats));
    m.strategy = strategy;
    m.lapK = lapK;
    m.coverageThreshold = coverageThreshold;
    m.trainingSize = trainingSize;
    return m;
}

Verdict decide(const DetectionModel& model, const std::vector<std::size_t>& covering) {
    Verdict v;
    v.label = model.defaultLabel;
    if (covering.empty()) return v;
    const std::size_t top = covering.front();
    if (model.strategy == Strategy::MAXL) {
        v.label = model.rules[top].consequent;
        v.explanation = {top};
        return v;
    }
    std::vector<std::size_t> part[2];
    for (std::size_t i : covering) part[static_cast<std::size_t>(model.rules[i].consequent)].push_back(i);
    double score[2] = {0, 0};
    for (int p = 0; p < 2; ++p) {
        auto& rs = part[p];
        switch (model.strategy) {
        case Strategy::DFML: score[p] = static_cast<double>(rs.size()); break;
        case Strategy::DFML_CHI2:
            for (std::size_t i : rs) score[p] += model.scores[i].weightedChi2;
            break;
        case Strategy::DFML_LAP: {
            if (rs.size() > static_cast<std::size_t>(model.lapK)) rs.resize(static_cast<std::size_t>(model.lapK));
            double sum = 0;
            for (std::size_t i : rs) sum += model.scores[i].laplace;
            score[p] = rs.empty() ? 0.0 : sum / static_cast<double>(rs.size());
            break;
        }
        case Strategy::MAXL: break;
        }
    }
    int winner;
    if (part[0].empty()) winner = 1;
    else if (part[1].empty()) winner = 0;
    else if (score[0] != score[1]) winner = score[0] > score[1] ? 0 : 1;
    else {
        v.label = model.rules[top].consequent;
        v.explanation = {top};
        return v;
    }
    v.label = static_cast<Consequent>(winner);
    v.explanation = part[winner];
    return v;
}

Verdict classify(const DetectionModel& model, const Candidate& candidate, const CodeFactsGraph& graph) {
    std::vector<std::size_t> covering;
    for (std::size_t i = 0; i < model.rules.size(); ++i)
        if (matches(model.rules[i], candidate, graph, model.roles)) covering.push_back(i);
    return decide(model, covering);
}

Verdict classify(const DetectionModel& model, const Dataset& data, std::size_t sample) {
    if (data.roles() != model.roles) throw ContractError("dataset roles differ from the model's");
    std::vector<std::size_t> covering;
    for (std::size_t i = 0; i < model.rules.size(); ++i)
        if (data.matches(model.rules[i], sample)) covering.push_back(i);
    return decide(model, covering);
}

std::string model_to_json(const DetectionModel& m) {
    json j;
    j["version"] = 1;
    j["pattern"] = m.pattern;
    j["roles"] = m.roles;
    j["strategy"] = to_string(m.strategy);
    j["lapK"] = m.lapK;
    j["coverageThreshold"] = m.coverageThreshold;
    j["trainingSize"] = m.trainingSize;
    j["defaultLabel"] = to_string(m.defaultLabel);
    j["rules"] = json::array();
    for (std::size_t i = 0; i < m.rules.size(); ++i) {
        const Rule& r = m.rules[i];
        json jr;
        jr["rule"] = render(r, m.roles);
        jr["matched"] = r.stats.matched;
        jr["correct"] = r.stats.correct;
        jr["classCount"] = r.stats.classCount;
        jr["support"] = r.support();
        jr["confidence"] = r.confidence();
        jr["chi2"] = m.scores[i].chi2;
        jr["maxChi2"] = m.scores[i].maxChi2;
        jr["weightedChi2"] = m.scores[i].weightedChi2;
        jr["laplace"] = m.scores[i].laplace;
        j["rules"].push_back(jr);
    }
    return j.dump(2) + "\n";
}

namespace {

[[noreturn]] void schema(const std::string& what) { throw ModelError(ModelErrc::SchemaViolation, "model: " + what); }

const json& member(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) schema(std::string("missing '") + key + "'");
    return j[key];
}

std::size_t count_field(const json& j, const char* key) {
    const json& v = member(j, key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
        schema(std::string("'") + key + "' must be a non-negative integer");
    return v.get<std::size_t>();
}

int int_field(const json& j, const char* key) {
    const json& v = member(j, key);
    if (!v.is_number_integer()) schema(std::string("'") + key + "' must be an integer");
    return v.get<int>();
}

std::string string_field(const json& j, const char* key) {
    const json& v = member(j, key);
    if (!v.is_string()) schema(std::string("'") + key + "' must be a string");
    return v.get<std::string>();
}

} // namespace

DetectionModel model_from_json(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ModelError(ModelErrc::Parse, std::string("model: ") + e.what());
    }
    if (!j.is_object()) schema("top level must be an object");
    const json& version = member(j, "version");
    if (!version.is_number_integer()) schema("'version' must be an integer");
    if (version.get<int>() != 1)
        throw ModelError(ModelErrc::UnsupportedVersion, "model version " + version.dump() + " is not supported");
    DetectionModel m;
    m.pattern = string_field(j, "pattern");
    const json& roles = member(j, "roles");
    if (!roles.is_array() || roles.empty()) schema("'roles' must be a non-empty array");
    for (const auto& r : roles) {
        if (!r.is_string()) schema("role names must be strings");
        m.roles.push_back(r.get<std::string>());
    }
    auto strategy = parse_strategy(string_field(j, "strategy"));
    if (!strategy) schema("unknown strategy");
    m.strategy = *strategy;
    m.lapK = int_field(j, "lapK");
    m.coverageThreshold = int_field(j, "coverageThreshold");
    if (m.lapK < 1 || m.coverageThreshold < 1) schema("lapK and coverageThreshold must be positive");
    m.trainingSize = count_field(j, "trainingSize");
    auto def = parse_consequent(string_field(j, "defaultLabel"));
    if (!def) schema("unknown defaultLabel");
    m.defaultLabel = *def;
    const json& rules = member(j, "rules");
    if (!rules.is_array()) schema("'rules' must be an array");
    for (const auto& jr : rules) {
        Rule r;
        try {
            r = parse_rule(string_field(jr, "rule"), m.roles);
        } catch (const ContractError& e) {
            schema(e.what());
        }
        r.stats.matched = count_field(jr, "matched");
        r.stats.correct = count_field(jr, "correct");
        r.stats.classCount = count_field(jr, "classCount");
        r.stats.total = m.trainingSize;
        if (r.stats.correct > r.stats.matched || r.stats.matched > r.stats.total ||
            r.stats.classCount > r.stats.total || r.stats.correct > r.stats.classCount)
            schema("inconsistent rule counts");
        m.rules.push_back(std::move(r));
        m.scores.push_back(rule_scores(m.rules.back().stats));
    }
    for (std::size_t i = 1; i < m.rules.size(); ++i)
        if (precedes(m.rules[i], m.rules[i - 1], m.roles)) schema("rules are not in precedence order");
    return m;
}

void save_model(const DetectionModel& model, const std::filesystem::path& path) {
    detail::write_text(path, model_to_json(model));
}

DetectionModel load_model(const std::filesystem::path& path) { return model_from_json(detail::read_text(path)); }

} // namespace dpd
