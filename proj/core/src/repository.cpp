#include "dpd/repository.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <set>

#include "dpd/errors.hpp"
#include "io_util.hpp"
#include "parallel.hpp"

namespace dpd {

using json = nlohmann::json;

void LabeledRepository::validate() const {
    if (samples.empty()) throw ContractError("repository has no samples");
    if (roles.empty()) throw ContractError("repository declares no roles");
    for (const auto& s : samples) {
        auto it = projects.find(s.project);
        if (it == projects.end() || !it->second) throw ContractError("sample refers to unknown project '" + s.project + "'");
        if (s.candidate.roleMap.size() != roles.size()) throw ContractError("sample role map does not match the roles");
        bind_roles(s.candidate, *it->second, roles);
    }
}

std::vector<Label> LabeledRepository::labels() const {
    std::vector<Label> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(s.label);
    return out;
}

Dataset LabeledRepository::dataset() const {
    std::vector<std::size_t> all(samples.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return dataset(all);
}

Dataset LabeledRepository::dataset(const std::vector<std::size_t>& indices,
                                   const std::function<void(std::size_t)>& onAccess) const {
    std::vector<Sample> out;
    out.reserve(indices.size());
    for (std::size_t i : indices) {
        if (i >= samples.size()) throw ContractError("sample index out of range");
        if (onAccess) onAccess(i);
        const RepoSample& s = samples[i];
        auto it = projects.find(s.project);
        if (it == projects.end()) throw ContractError("sample refers to unknown project '" + s.project + "'");
        out.push_back({s.candidate, s.label, it->second});
    }
    return Dataset(roles, std::move(out));
}

namespace {

[[noreturn]] void schema(const std::string& what) {
    throw ModelError(ModelErrc::SchemaViolation, "repository: " + what);
}

const json& member(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) schema(std::string("missing '") + key + "'");
    return j[key];
}

std::string str(const json& j, const char* key) {
    const json& v = member(j, key);
    if (!v.is_string()) schema(std::string("'") + key + "' must be a string");
    return v.get<std::string>();
}

} // namespace

LabeledRepository repository_from_json(std::string_view text, const std::filesystem::path& baseDir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ModelError(ModelErrc::Parse, std::string("repository: ") + e.what());
    }
    if (!j.is_object()) schema("top level must be an object");
    const json& version = member(j, "version");
    if (!version.is_number_integer()) schema("'version' must be an integer");
    if (version.get<int>() != 1) throw ModelError(ModelErrc::UnsupportedVersion, "unsupported repository version");
    LabeledRepository repo;
    repo.pattern = str(j, "pattern");
    const json& roles = member(j, "roles");
    if (!roles.is_array()) schema("'roles' must be an array");
    for (const auto& r : roles) {
        if (!r.is_string()) schema("role names must be strings");
        repo.roles.push_back(r.get<std::string>());
    }
    const json& projects = member(j, "projects");
    if (!projects.is_array()) schema("'projects' must be an array");
    for (const auto& p : projects) {
        std::string id = str(p, "id");
        const json& facts = member(p, "facts");
        std::shared_ptr<const CodeFactsGraph> graph;
        if (facts.is_string()) {
            std::filesystem::path fp = facts.get<std::string>();
            if (fp.is_relative()) fp = baseDir / fp;
            graph = std::make_shared<const CodeFactsGraph>(load_facts(fp));
            repo.factsPaths[id] = facts.get<std::string>();
        } else if (facts.is_object()) {
            graph = std::make_shared<const CodeFactsGraph>(facts_from_json(facts.dump()));
        } else {
            schema("'facts' must be a path or an object");
        }
        if (!repo.projects.emplace(id, std::move(graph)).second) schema("duplicate project '" + id + "'");
    }
    const json& samples = member(j, "samples");
    if (!samples.is_array()) schema("'samples' must be an array");
    for (const auto& s : samples) {
        RepoSample rs;
        rs.project = str(s, "project");
        auto label = parse_label(str(s, "label"));
        if (!label) schema("unknown label");
        rs.label = *label;
        rs.candidate.pattern = repo.pattern;
        const json& map = member(s, "roles");
        if (!map.is_object()) schema("sample 'roles' must be an object");
        for (const auto& role : repo.roles) rs.candidate.roleMap[role] = str(map, role.c_str());
        if (map.size() != repo.roles.size()) schema("sample maps roles outside the declared list");
        repo.samples.push_back(std::move(rs));
    }
    try {
        repo.validate();
    } catch (const ContractError& e) {
        schema(e.what());
    }
    return repo;
}

std::string repository_to_json(const LabeledRepository& repo) {
    json j;
    j["version"] = 1;
    j["pattern"] = repo.pattern;
    j["roles"] = repo.roles;
    j["projects"] = json::array();
    for (const auto& [id, graph] : repo.projects) {
        json p;
        p["id"] = id;
        auto it = repo.factsPaths.find(id);
        if (it != repo.factsPaths.end()) p["facts"] = it->second;
        else p["facts"] = json::parse(facts_to_json(*graph));
        j["projects"].push_back(p);
    }
    j["samples"] = json::array();
    for (const auto& s : repo.samples) {
        json m = json::object();
        for (const auto& [role, id] : s.candidate.roleMap) m[role] = id;
        j["samples"].push_back({{"project", s.project}, {"label", to_string(s.label)}, {"roles", m}});
    }
    return j.dump(2) + "\n";
}

LabeledRepository load_repository(const std::filesystem::path& path) {
    return repository_from_json(detail::read_text(path), path.parent_path());
}

void save_repository(const LabeledRepository& repo, const std::filesystem::path& path) {
    detail::write_text(path, repository_to_json(repo));
}

Metrics Metrics::from(const Confusion& c) {
    Metrics m;
    m.counts = c;
    auto ratio = [](std::size_t num, std::size_t den, bool& undefined) {
        if (den == 0) {
            undefined = true;
            return 0.0;
        }
        return static_cast<double>(num) / static_cast<double>(den);
    };
    m.accuracy = ratio(c.tp + c.tn, c.total(), m.accuracyUndefined);
    m.precision = ratio(c.tp, c.tp + c.fp, m.precisionUndefined);
    m.recall = ratio(c.tp, c.tp + c.fn, m.recallUndefined);
    m.specificity = ratio(c.tn, c.tn + c.fp, m.specificityUndefined);
    if (m.precision + m.recall > 0) {
        m.f1 = 2 * m.precision * m.recall / (m.precision + m.recall);
    } else {
        m.f1Undefined = true;
    }
    return m;
}

Metrics evaluate(const DetectionModel& model, const Dataset& test) {
    Confusion c;
    for (std::size_t i = 0; i < test.size(); ++i) {
        bool predicted = classify(model, test, i).label == Consequent::APattern;
        bool actual = test.label(i) == Label::Positive;
        if (predicted && actual) ++c.tp;
        else if (predicted) ++c.fp;
        else if (actual) ++c.fn;
        else ++c.tn;
    }
    return Metrics::from(c);
}

void TrainConfig::validate() const {
    evolution.validate();
    if (coverageThreshold < 1) throw ConfigError("coverage threshold must be at least 1");
    if (lapK < 1) throw ConfigError("lapK must be at least 1");
}

Grammar training_grammar(const Dataset& data, const TrainConfig& config) {
    GrammarConfig gc;
    gc.roles = data.roles();
    gc.ops = config.ops.empty() ? all_ops() : config.ops;
    gc.constRanges = data.observed_ranges();
    for (const auto& [op, range] : config.constRanges) gc.constRanges[op] = range;
    return Grammar(gc);
}

std::vector<Rule> pruned_rules(const std::vector<Rule>& archive, const Dataset& data, int coverageThreshold) {
    return prune_database_coverage(archive, data, coverageThreshold);
}

TrainResult train(const Dataset& data, const std::string& pattern, const TrainConfig& config) {
    config.validate();
    Grammar g = training_grammar(data, config);
    EvolutionResult evo = run_g3p4dpd(config.evolution, g, data);
    TrainResult out;
    out.archiveSize = evo.archive.size();
    out.warnings = evo.warnings;
    auto rules = pruned_rules(evo.rules(), data, config.coverageThreshold);
    out.model = build_model(pattern, data.roles(), std::move(rules), config.strategy, config.lapK,
                            config.coverageThreshold, data.size());
    if (out.model.empty()) out.warnings.push_back("no rule passed the thresholds; the model detects nothing");
    return out;
}

TrainResult train(const LabeledRepository& repo, const TrainConfig& config) {
    return train(repo.dataset(), repo.pattern, config);
}

TrainResult train_on_indices(const LabeledRepository& repo, const std::vector<std::size_t>& indices,
                             const TrainConfig& config, const std::function<void(std::size_t)>& onAccess) {
    return train(repo.dataset(indices, onAccess), repo.pattern, config);
}

FoldPlan stratified_kfold(const std::vector<Label>& labels, std::size_t k, std::uint64_t seed) {
    if (k < 2) throw ConfigError("cross-validation needs at least 2 folds");
    if (k > labels.size()) throw ConfigError("more folds than samples");
    FoldPlan plan;
    plan.folds.resize(k);
    Rng rng(seed);
    std::size_t next = 0;
    for (Label cls : {Label::Positive, Label::Negative}) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == cls) idx.push_back(i);
        if (!idx.empty() && idx.size() < k)
            plan.warnings.push_back(std::string("only ") + std::to_string(idx.size()) + " " + to_string(cls) +
                                    " samples for " + std::to_string(k) + " folds; some folds will lack that class");
        for (std::size_t i = idx.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(rng.below(i));
            std::swap(idx[i - 1], idx[j]);
        }
        for (std::size_t i = 0; i < idx.size(); ++i) plan.folds[(next + i) % k].test.push_back(idx[i]);
        next = (next + idx.size()) % k;
    }
    for (std::size_t f = 0; f < k; ++f) {
        auto& fold = plan.folds[f];
        std::sort(fold.test.begin(), fold.test.end());
        std::vector<bool> inTest(labels.size(), false);
        for (std::size_t i : fold.test) inTest[i] = true;
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (!inTest[i]) fold.train.push_back(i);
    }
    return plan;
}

Summary summarize(const std::vector<double>& values) {
    Summary s;
    if (values.empty()) return s;
    double sum = 0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    if (values.size() > 1) {
        double sq = 0;
        for (double v : values) sq += (v - s.mean) * (v - s.mean);
        s.std = std::sqrt(sq / static_cast<double>(values.size() - 1));
    }
    return s;
}

XvalReport cross_validate(const Dataset& data, const std::string& pattern, const XvalConfig& config) {
    config.base.validate();
    if (config.runs < 1) throw ConfigError("runs must be at least 1");
    if (config.supports.empty() || config.confidences.empty() || config.strategies.empty() || config.coverages.empty())
        throw ConfigError("empty parameter grid");
    for (int c : config.coverages)
        if (c < 1) throw ConfigError("coverage threshold must be at least 1");

    XvalReport report;
    report.pattern = pattern;
    report.folds = config.folds;
    report.runs = config.runs;
    report.seed = config.seed;

    std::vector<Label> labels;
    for (std::size_t i = 0; i < data.size(); ++i) labels.push_back(data.label(i));
    std::vector<FoldPlan> plans;
    for (std::size_t r = 0; r < config.runs; ++r) {
        plans.push_back(stratified_kfold(labels, config.folds, derive_seed(config.seed, r)));
        if (r == 0)
            for (const auto& w : plans.back().warnings) report.warnings.push_back(w);
    }

    struct Job {
        std::size_t s, c, run, fold;
    };
    std::vector<Job> jobs;
    for (std::size_t s = 0; s < config.supports.size(); ++s)
        for (std::size_t c = 0; c < config.confidences.size(); ++c)
            for (std::size_t r = 0; r < config.runs; ++r)
                for (std::size_t f = 0; f < config.folds; ++f) jobs.push_back({s, c, r, f});

    const std::size_t variants = config.coverages.size() * config.strategies.size();
    std::vector<std::vector<Metrics>> results(jobs.size());
    std::vector<std::vector<bool>> empties(jobs.size());
    detail::parallel_for(jobs.size(), config.threads, [&](std::size_t ji) {
        const Job& job = jobs[ji];
        const Fold& fold = plans[job.run].folds[job.fold];
        Dataset trainSet = data.subset(fold.train);
        Dataset testSet = data.subset(fold.test);
        TrainConfig tc = config.base;
        tc.evolution.supportThreshold = config.supports[job.s];
        tc.evolution.confidenceThreshold = config.confidences[job.c];
        tc.evolution.seed = derive_seed(config.seed, job.run, job.fold);
        tc.evolution.threads = 1;
        Grammar g = training_grammar(trainSet, tc);
        auto archive = run_g3p4dpd(tc.evolution, g, trainSet).rules();
        for (int coverage : config.coverages) {
            auto rules = pruned_rules(archive, trainSet, coverage);
            for (Strategy st : config.strategies) {
                auto model = build_model(pattern, trainSet.roles(), rules, st, tc.lapK, coverage, trainSet.size());
                results[ji].push_back(evaluate(model, testSet));
                empties[ji].push_back(model.empty());
            }
        }
    });

    for (std::size_t s = 0; s < config.supports.size(); ++s) {
        for (std::size_t c = 0; c < config.confidences.size(); ++c) {
            for (std::size_t v = 0; v < variants; ++v) {
                XvalCell cell;
                cell.support = config.supports[s];
                cell.confidence = config.confidences[c];
                cell.coverage = config.coverages[v / config.strategies.size()];
                cell.strategy = config.strategies[v % config.strategies.size()];
                std::vector<double> acc, prec, rec, spec, f1;
                for (std::size_t ji = 0; ji < jobs.size(); ++ji) {
                    if (jobs[ji].s != s || jobs[ji].c != c) continue;
                    const Metrics& m = results[ji][v];
                    acc.push_back(m.accuracy);
                    prec.push_back(m.precision);
                    rec.push_back(m.recall);
                    spec.push_back(m.specificity);
                    f1.push_back(m.f1);
                    if (empties[ji][v]) ++cell.emptyModels;
                }
                cell.accuracy = summarize(acc);
                cell.precision = summarize(prec);
                cell.recall = summarize(rec);
                cell.specificity = summarize(spec);
                cell.f1 = summarize(f1);
                report.cells.push_back(cell);
            }
        }
    }
    return report;
}

XvalReport cross_validate(const LabeledRepository& repo, const XvalConfig& config) {
    repo.validate();
    return cross_validate(repo.dataset(), repo.pattern, config);
}

std::string XvalReport::to_json() const {
    json j;
    j["version"] = 1;
    j["pattern"] = pattern;
    j["folds"] = folds;
    j["runs"] = runs;
    j["seed"] = seed;
    j["warnings"] = warnings;
    j["cells"] = json::array();
    auto summary = [](const Summary& s) { return json{{"mean", s.mean}, {"std", s.std}}; };
    for (const auto& c : cells) {
        json jc;
        jc["support"] = c.support;
        jc["confidence"] = c.confidence;
        jc["strategy"] = to_string(c.strategy);
        jc["coverage"] = c.coverage;
        jc["emptyModels"] = c.emptyModels;
        jc["metrics"] = {{"accuracy", summary(c.accuracy)},     {"precision", summary(c.precision)},
                         {"recall", summary(c.recall)},         {"specificity", summary(c.specificity)},
                         {"f1", summary(c.f1)}};
        j["cells"].push_back(jc);
    }
    return j.dump(2) + "\n";
}

} // namespace dpd
