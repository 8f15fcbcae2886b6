#include "dpd_cli/cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "dpd/candidates.hpp"
#include "dpd/errors.hpp"
#include "dpd/java_extractor.hpp"
#include "dpd/repository.hpp"
#include "dpd_cli/run_config.hpp"

#ifndef DPD_TEMPLATE_DIR
#define DPD_TEMPLATE_DIR ""
#endif

namespace dpd::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw ConfigError("failed writing '" + path.string() + "'");
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

struct Common {
    std::string config;
    std::vector<std::string> sets;
    unsigned threads = 0;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config, "key = value configuration file");
    cmd->add_option("--set", c.sets, "Override one configuration key (key=value)");
    cmd->add_option("--threads", c.threads, "Worker threads (results do not depend on it)");
}

RunConfig load_run_config(const Common& c) {
    RunConfig rc;
    if (!c.config.empty()) apply_config_file(rc, c.config);
    for (const auto& s : c.sets) apply_assignment(rc, s);
    if (c.threads) rc.evolution.threads = c.threads;
    return rc;
}

struct ExtractArgs {
    std::string src, out, report, containers;
};

int cmd_extract(const ExtractArgs& a, std::ostream& out, std::ostream& err) {
    auto containers = a.containers.empty() ? default_container_types() : split_list(a.containers);
    ExtractionResult r;
    try {
        r = extract_facts(a.src, containers);
    } catch (const ExtractError& e) {
        err << "error: " << e.what() << "\n";
        return kConfigError;
    }
    if (r.report.filesParsed == 0) {
        err << "error: no Java source files found under '" << a.src << "'\n";
        return kConfigError;
    }
    save_facts(r.graph, a.out);
    if (!a.report.empty()) write_file(a.report, r.report.to_json());
    out << "parsed " << r.report.filesParsed << " files, " << r.graph.non_external().size() << " artifacts\n";
    for (const auto& s : r.report.filesSkipped) err << "skipped " << s.path << ": " << s.reason << "\n";
    return r.report.filesSkipped.empty() ? kOk : kPartial;
}

struct CandidatesArgs {
    std::string facts, pattern, templ, out, positives, negativesOut, repoOut, project;
    std::size_t negativesPerPositive = 3;
    std::uint64_t seed = 1;
};

fs::path template_dir() {
    if (const char* env = std::getenv("DPD_TEMPLATE_DIR"); env && *env) return env;
    return DPD_TEMPLATE_DIR;
}

RoleTemplate find_template(const CandidatesArgs& a, const RunConfig& rc) {
    fs::path path = !a.templ.empty() ? fs::path(a.templ) : fs::path(rc.templatePath);
    if (path.empty()) {
        if (a.pattern.empty()) throw ConfigError("either --pattern or --template is required");
        path = template_dir() / (a.pattern + ".json");
        if (!fs::exists(path)) throw ConfigError("no template for pattern '" + a.pattern + "'");
    }
    if (!fs::exists(path)) throw ConfigError("template '" + path.string() + "' not found");
    RoleTemplate t = load_template(path);
    if (!a.pattern.empty() && t.pattern != a.pattern)
        throw ConfigError("template describes '" + t.pattern + "', not '" + a.pattern + "'");
    return t;
}

int cmd_candidates(const CandidatesArgs& a, const RunConfig& rc, std::ostream& out, std::ostream&) {
    auto graph = std::make_shared<const CodeFactsGraph>(load_facts(a.facts));
    RoleTemplate t = find_template(a, rc);
    auto cands = filter_candidates(generate_candidates(*graph, t), t, *graph);
    save_candidates({t.pattern, t.roles, cands}, a.out);
    out << cands.size() << " " << t.pattern << " candidates\n";
    if (a.positives.empty()) return kOk;

    CandidateList pos = load_candidates(a.positives);
    if (pos.pattern != t.pattern || pos.roles != t.roles)
        throw ConfigError("positives file does not match the " + t.pattern + " template");
    for (const auto& c : pos.candidates) bind_roles(c, *graph, t.roles);
    Rng rng(a.seed);
    auto negs = generate_negatives(pos.candidates, *graph, t, a.negativesPerPositive, rng);
    fs::path negPath = a.negativesOut;
    if (negPath.empty()) negPath = fs::path(a.out).replace_extension(".negatives.json");
    save_candidates({t.pattern, t.roles, negs}, negPath);
    out << negs.size() << " negatives from " << pos.candidates.size() << " positives\n";

    if (!a.repoOut.empty()) {
        LabeledRepository repo;
        repo.pattern = t.pattern;
        repo.roles = t.roles;
        std::string project = a.project.empty() ? fs::path(a.facts).stem().string() : a.project;
        repo.projects[project] = graph;
        fs::path base = fs::path(a.repoOut).parent_path();
        repo.factsPaths[project] = fs::proximate(a.facts, base.empty() ? fs::path(".") : base).generic_string();
        for (const auto& c : pos.candidates) repo.samples.push_back({c, Label::Positive, project});
        for (const auto& c : negs) repo.samples.push_back({c, Label::Negative, project});
        save_repository(repo, a.repoOut);
    }
    return kOk;
}

struct TrainArgs {
    std::string repo, out;
    std::optional<std::uint64_t> seed;
};

void check_roles(const RunConfig& rc, const LabeledRepository& repo) {
    if (!rc.roles.empty() && rc.roles != repo.roles)
        throw ConfigError("configured roles do not match the repository's roles");
}

int cmd_train(const TrainArgs& a, RunConfig rc, std::ostream& out, std::ostream& err) {
    if (a.seed) rc.evolution.seed = *a.seed;
    TrainConfig tc = rc.train_config();
    LabeledRepository repo = load_repository(a.repo);
    check_roles(rc, repo);
    Dataset data = repo.dataset();
    TrainResult r = train(data, repo.pattern, tc);
    save_model(r.model, a.out);
    for (const auto& w : r.warnings) err << "warning: " << w << "\n";
    Metrics m = evaluate(r.model, data);
    out << repo.pattern << ": " << r.archiveSize << " archived rules, " << r.model.rules.size()
        << " after pruning\n";
    out << "training TP=" << m.counts.tp << " FP=" << m.counts.fp << " TN=" << m.counts.tn << " FN=" << m.counts.fn
        << " F1=" << m.f1 << "\n";
    return r.model.empty() ? kPartial : kOk;
}

struct DetectArgs {
    std::string model, facts, candidates, out;
};

int cmd_detect(const DetectArgs& a, std::ostream& out, std::ostream& err) {
    DetectionModel model = load_model(a.model);
    CodeFactsGraph graph = load_facts(a.facts);
    CandidateList list = load_candidates(a.candidates);
    if (list.pattern != model.pattern || list.roles != model.roles)
        throw ConfigError("candidates are for '" + list.pattern + "' but the model detects '" + model.pattern + "'");
    json report;
    report["version"] = 1;
    report["pattern"] = model.pattern;
    report["strategy"] = to_string(model.strategy);
    report["emptyModel"] = model.empty();
    report["results"] = json::array();
    std::size_t positives = 0;
    for (const auto& c : list.candidates) {
        Verdict v = classify(model, c, graph);
        if (v.label == Consequent::APattern) ++positives;
        json roles = json::object();
        for (const auto& [role, id] : c.roleMap) roles[role] = id;
        json why = json::array();
        for (std::size_t i : v.explanation) why.push_back(render(model.rules[i], model.roles));
        report["results"].push_back({{"roles", roles}, {"verdict", to_string(v.label)}, {"explanation", why}});
    }
    write_file(a.out, report.dump(2) + "\n");
    out << positives << " of " << list.candidates.size() << " candidates classified as " << model.pattern << "\n";
    if (model.empty()) {
        err << "warning: the model has no rules; every candidate is reported as notAPattern\n";
        return kEmptyModel;
    }
    return kOk;
}

struct XvalArgs {
    std::string repo, out;
    std::optional<std::size_t> folds, runs;
    std::optional<std::uint64_t> seed;
};

int cmd_xval(const XvalArgs& a, RunConfig rc, std::ostream& out, std::ostream& err) {
    if (a.seed) rc.evolution.seed = *a.seed;
    if (a.folds) rc.folds = *a.folds;
    if (a.runs) rc.runs = *a.runs;
    XvalConfig xc = rc.xval_config();
    LabeledRepository repo = load_repository(a.repo);
    check_roles(rc, repo);
    XvalReport report = cross_validate(repo, xc);
    write_file(a.out, report.to_json());
    for (const auto& w : report.warnings) err << "warning: " << w << "\n";
    for (const auto& c : report.cells) {
        out << to_string(c.strategy) << " S=" << c.support << " C=" << c.confidence << " cov=" << c.coverage
            << "  F1 " << c.f1.mean << " +- " << c.f1.std << "  acc " << c.accuracy.mean << "\n";
    }
    return kOk;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Design pattern detection with evolved class association rules", "dpd"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "dpd 0.1.0");

    Common common;
    ExtractArgs ex;
    auto* extract = app.add_subcommand("extract", "Extract code facts from Java sources");
    extract->add_option("--src", ex.src, "Source root")->required();
    extract->add_option("--out", ex.out, "Facts file to write")->required();
    extract->add_option("--containers", ex.containers, "Comma-separated container types");
    extract->add_option("--report", ex.report, "Write the extraction report (JSON)");
    add_common(extract, common);

    CandidatesArgs ca;
    auto* candidates = app.add_subcommand("candidates", "Enumerate role assignments for a pattern");
    candidates->add_option("--facts", ca.facts, "Facts file")->required();
    candidates->add_option("--pattern", ca.pattern, "Pattern name");
    candidates->add_option("--template", ca.templ, "Role template file");
    candidates->add_option("--out", ca.out, "Candidate list to write")->required();
    candidates->add_option("--positives", ca.positives, "Known positive candidates");
    candidates->add_option("--negatives-per-positive", ca.negativesPerPositive, "Negatives per positive")
        ->check(CLI::PositiveNumber);
    candidates->add_option("--negatives-out", ca.negativesOut, "Where generated negatives go");
    candidates->add_option("--repo-out", ca.repoOut, "Also write a labelled repository");
    candidates->add_option("--project", ca.project, "Project id used in --repo-out");
    candidates->add_option("--seed", ca.seed, "Seed for negative sampling");
    add_common(candidates, common);

    TrainArgs tr;
    auto* trainCmd = app.add_subcommand("train", "Learn a detection model from a labelled repository");
    trainCmd->add_option("--repo", tr.repo, "Repository file")->required();
    trainCmd->add_option("--out", tr.out, "Model file to write")->required();
    trainCmd->add_option("--seed", tr.seed, "Random seed");
    add_common(trainCmd, common);

    DetectArgs de;
    auto* detect = app.add_subcommand("detect", "Classify candidates with a trained model");
    detect->add_option("--model", de.model, "Model file")->required();
    detect->add_option("--facts", de.facts, "Facts file")->required();
    detect->add_option("--candidates", de.candidates, "Candidate list")->required();
    detect->add_option("--out", de.out, "Report file to write")->required();
    add_common(detect, common);

    XvalArgs xv;
    auto* xval = app.add_subcommand("xval", "Stratified cross-validation over a parameter grid");
    xval->add_option("--repo", xv.repo, "Repository file")->required();
    xval->add_option("--out", xv.out, "Report file to write")->required();
    xval->add_option("--folds", xv.folds, "Number of folds");
    xval->add_option("--runs", xv.runs, "Independent runs");
    xval->add_option("--seed", xv.seed, "Master seed");
    add_common(xval, common);

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            app.exit(e, out, err);
            return kOk;
        }
        app.exit(e, out, err);
        const CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
        err << sub->help();
        return kConfigError;
    }

    try {
        RunConfig rc = load_run_config(common);
        if (extract->parsed()) return cmd_extract(ex, out, err);
        if (candidates->parsed()) return cmd_candidates(ca, rc, out, err);
        if (trainCmd->parsed()) return cmd_train(tr, rc, out, err);
        if (detect->parsed()) return cmd_detect(de, out, err);
        if (xval->parsed()) return cmd_xval(xv, rc, out, err);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kConfigError;
    }
    return kConfigError;
}

} // namespace dpd::cli
