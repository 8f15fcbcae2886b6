#include "dpd_cli/run_config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "dpd/errors.hpp"

namespace dpd::cli {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    while (true) {
        auto pos = s.find(sep);
        out.push_back(trim(s.substr(0, pos)));
        if (pos == std::string_view::npos) break;
        s.remove_prefix(pos + 1);
    }
    return out;
}

[[noreturn]] void bad(std::string_view key, std::string_view value, const char* expected) {
    throw ConfigError("invalid value '" + std::string(value) + "' for '" + std::string(key) + "': expected " +
                      expected);
}

template <typename T>
T integer(std::string_view key, std::string_view v) {
    T out{};
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size() || v.empty()) bad(key, v, "an integer");
    return out;
}

double real(std::string_view key, std::string_view v) {
    double out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size() || v.empty()) bad(key, v, "a number");
    return out;
}

template <typename T, typename F>
std::vector<T> list(std::string_view v, F parse) {
    std::vector<T> out;
    for (auto item : split(v, ',')) out.push_back(parse(item));
    return out;
}

const std::vector<std::string> kKeys = {
    "popSize", "maxGen",   "extPopSize", "crossoverProb", "maxDerivations", "support", "confidence",
    "coverage", "strategy", "lapK",      "seed",          "threads",        "operators", "roles",
    "template", "folds",   "runs",       "range.<op>",
};

} // namespace

std::vector<std::string> config_keys() { return kKeys; }

void RunConfig::set(std::string_view key, std::string_view value) {
    value = trim(value);
    if (key == "popSize") {
        evolution.popSize = integer<std::size_t>(key, value);
    } else if (key == "maxGen") {
        evolution.maxGen = integer<std::size_t>(key, value);
    } else if (key == "extPopSize") {
        evolution.extPopSize = integer<std::size_t>(key, value);
    } else if (key == "crossoverProb") {
        evolution.crossoverProb = real(key, value);
    } else if (key == "maxDerivations") {
        evolution.maxDerivations = integer<int>(key, value);
    } else if (key == "support") {
        supports = list<double>(value, [&](std::string_view s) { return real(key, s); });
    } else if (key == "confidence") {
        confidences = list<double>(value, [&](std::string_view s) { return real(key, s); });
    } else if (key == "coverage") {
        coverages = list<int>(value, [&](std::string_view s) { return integer<int>(key, s); });
    } else if (key == "strategy") {
        strategies = list<Strategy>(value, [&](std::string_view s) {
            auto st = parse_strategy(s);
            if (!st) bad(key, s, "MAXL, DFML, DFML_CHI2 or DFML_LAP");
            return *st;
        });
    } else if (key == "lapK") {
        lapK = integer<int>(key, value);
    } else if (key == "seed") {
        evolution.seed = integer<std::uint64_t>(key, value);
    } else if (key == "threads") {
        evolution.threads = integer<unsigned>(key, value);
    } else if (key == "operators") {
        if (value == "all") {
            ops.clear();
        } else {
            ops = list<Op>(value, [&](std::string_view s) {
                auto op = parse_op(s);
                if (!op) bad(key, s, "an operator name");
                return *op;
            });
        }
    } else if (key == "roles") {
        roles.clear();
        for (auto r : split(value, ',')) roles.emplace_back(r);
    } else if (key == "template") {
        templatePath = std::string(value);
    } else if (key == "folds") {
        folds = integer<std::size_t>(key, value);
    } else if (key == "runs") {
        runs = integer<std::size_t>(key, value);
    } else if (key.substr(0, 6) == "range.") {
        auto op = parse_op(key.substr(6));
        if (!op || !is_numeric(*op)) throw ConfigError("unknown numeric operator in '" + std::string(key) + "'");
        auto parts = split(value, ',');
        if (parts.size() != 2) bad(key, value, "'lo,hi'");
        constRanges[*op] = {integer<std::int64_t>(key, parts[0]), integer<std::int64_t>(key, parts[1])};
    } else {
        throw ConfigError("unknown configuration key '" + std::string(key) + "'");
    }
}

TrainConfig RunConfig::train_config() const {
    auto single = [](std::size_t n, const char* key) {
        if (n != 1) throw ConfigError(std::string("'") + key + "' must hold exactly one value for training");
    };
    single(supports.size(), "support");
    single(confidences.size(), "confidence");
    single(strategies.size(), "strategy");
    single(coverages.size(), "coverage");
    TrainConfig tc;
    tc.evolution = evolution;
    tc.evolution.supportThreshold = supports[0];
    tc.evolution.confidenceThreshold = confidences[0];
    tc.ops = ops;
    tc.constRanges = constRanges;
    tc.coverageThreshold = coverages[0];
    tc.strategy = strategies[0];
    tc.lapK = lapK;
    tc.validate();
    return tc;
}

XvalConfig RunConfig::xval_config() const {
    XvalConfig xc;
    xc.base.evolution = evolution;
    xc.base.ops = ops;
    xc.base.constRanges = constRanges;
    xc.base.lapK = lapK;
    xc.base.strategy = strategies.front();
    xc.base.coverageThreshold = coverages.front();
    xc.supports = supports;
    xc.confidences = confidences;
    xc.strategies = strategies;
    xc.coverages = coverages;
    xc.folds = folds;
    xc.runs = runs;
    xc.seed = evolution.seed;
    xc.threads = evolution.threads;
    for (double s : supports) {
        xc.base.evolution.supportThreshold = s;
        xc.base.validate();
    }
    for (double c : confidences) {
        xc.base.evolution.confidenceThreshold = c;
        xc.base.validate();
    }
    return xc;
}

void apply_config_text(RunConfig& config, std::string_view text) {
    std::size_t lineNo = 0;
    for (auto line : split(text, '\n')) {
        ++lineNo;
        auto hash = line.find('#');
        if (hash != std::string_view::npos) line = trim(line.substr(0, hash));
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("config line " + std::to_string(lineNo) + ": expected 'key = value'");
        try {
            config.set(trim(line.substr(0, eq)), line.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError("config line " + std::to_string(lineNo) + ": " + e.what());
        }
    }
}

void apply_config_file(RunConfig& config, const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    apply_config_text(config, buf.str());
}

void apply_assignment(RunConfig& config, std::string_view assignment) {
    auto eq = assignment.find('=');
    if (eq == std::string_view::npos) throw ConfigError("--set expects key=value, got '" + std::string(assignment) + "'");
    config.set(trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

} // namespace dpd::cli
