// One PASS/FAIL line per acceptance criterion; exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>

#include "dpd/candidates.hpp"
#include "dpd/classifier.hpp"
#include "dpd/evolution.hpp"
#include "dpd/java_extractor.hpp"
#include "dpd/operators.hpp"
#include "dpd/repository.hpp"
#include "dpd_cli/cli.hpp"
#include "support.hpp"
#include "tables.hpp"

using namespace dpd;
using namespace dpd::testing;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void fail(Outcome& o, const std::string& why) {
    if (o.pass) o.detail = why;
    o.pass = false;
}

const std::vector<std::string> kAdapterRoles{"adapter", "adaptee", "target"};
const std::vector<std::string> kSingleton{"singleton"};

Grammar default_grammar(const std::vector<std::string>& roles, const Dataset* d = nullptr) {
    GrammarConfig gc;
    gc.roles = roles;
    gc.ops = all_ops();
    if (d) gc.constRanges = d->observed_ranges();
    return Grammar(gc);
}

Outcome support_confidence_oracle() {
    Outcome o;
    auto t0 = Clock::now();
    Rng rng(1001);
    Grammar g = default_grammar(kAdapterRoles);
    for (int trial = 0; trial < 500 && o.pass; ++trial) {
        auto graph = std::make_shared<const CodeFactsGraph>(random_graph(rng, 3 + rng.below(10)));
        Dataset d = random_dataset(rng, kAdapterRoles, 1 + rng.below(40), graph);
        Rule r = to_rule(random_rule_tree(g, 25, rng), g);
        RuleStats st = d.stats(r);
        OracleCounts oc = oracle_counts(r, d.samples(), kAdapterRoles);
        double supp = static_cast<double>(oc.correct) / static_cast<double>(oc.total);
        double conf = oc.matched ? static_cast<double>(oc.correct) / static_cast<double>(oc.matched) : 0.0;
        if (std::abs(st.support() - supp) > 1e-12 || std::abs(st.confidence() - conf) > 1e-12 ||
            st.matched != oc.matched || st.correct != oc.correct)
            fail(o, "trial " + std::to_string(trial) + ": " + render(r, kAdapterRoles));
    }
    double secs = seconds_since(t0);
    if (secs >= 5) fail(o, "took " + std::to_string(secs) + " s");
    if (o.pass) o.detail = "500 pairs, " + std::to_string(secs) + " s";
    return o;
}

Outcome pruning_oracle() {
    Outcome o;
    auto t0 = Clock::now();
    Rng rng(2002);
    Grammar g = default_grammar(kAdapterRoles);
    for (int trial = 0; trial < 50 && o.pass; ++trial) {
        auto graph = std::make_shared<const CodeFactsGraph>(random_graph(rng, 3 + rng.below(10)));
        Dataset d = random_dataset(rng, kAdapterRoles, 1 + rng.below(40), graph);
        std::vector<Rule> rules;
        std::size_t n = 1 + rng.below(30);
        for (std::size_t k = 0; k < n; ++k) {
            Rule r = to_rule(random_rule_tree(g, 25, rng), g);
            r.stats = d.stats(r);
            rules.push_back(r);
        }
        int threshold = 1 + static_cast<int>(rng.below(4));
        sort_rules(rules, kAdapterRoles);
        auto got = prune_database_coverage(rules, d, threshold);
        auto want = oracle_prune(rules, d.samples(), kAdapterRoles, threshold);
        bool same = got.size() == want.size();
        for (std::size_t i = 0; same && i < got.size(); ++i)
            same = canonical_text(got[i], kAdapterRoles) == canonical_text(rules[want[i]], kAdapterRoles) &&
                   got[i].consequent == rules[want[i]].consequent;
        if (!same) fail(o, "instance " + std::to_string(trial) + " differs");
    }
    double secs = seconds_since(t0);
    if (secs >= 5) fail(o, "took " + std::to_string(secs) + " s");
    if (o.pass) o.detail = "50 instances, " + std::to_string(secs) + " s";
    return o;
}

Outcome grammar_sweep() {
    Outcome o;
    Rng rng(3003);
    auto graph = std::make_shared<const CodeFactsGraph>(random_graph(rng, 20));
    Dataset d = random_dataset(rng, kAdapterRoles, 100, graph);
    Grammar g = default_grammar(kAdapterRoles, &d);
    EvolutionConfig cfg;
    std::size_t checked = 0, violations = 0, generations = 0;
    run_g3p4dpd(cfg, g, d, [&](std::size_t, const std::vector<Individual>& pop, const std::vector<Individual>& arch) {
        ++generations;
        for (const auto* set : {&pop, &arch})
            for (const auto& ind : *set) {
                ++checked;
                if (!conforms(ind.genotype, g, cfg.maxDerivations) || derivation_count(ind.genotype, g) > 25)
                    ++violations;
            }
    });
    if (generations != cfg.maxGen + 1) fail(o, "observed " + std::to_string(generations) + " generations");
    if (violations) fail(o, std::to_string(violations) + " violations");
    if (o.pass) o.detail = std::to_string(checked) + " trees over " + std::to_string(generations) + " generations";
    return o;
}

Outcome candidate_oracle() {
    Outcome o;
    Rng rng(4004);
    RoleTemplate adapter = load_template(template_path("Adapter"));
    RoleTemplate composite = load_template(template_path("Composite"));
    std::size_t total = 0;
    for (int trial = 0; trial < 20; ++trial) {
        CodeFactsGraph g = random_graph(rng, 1 + rng.below(12));
        for (const RoleTemplate* t : {&adapter, &composite}) {
            auto got = generate_candidates(g, *t);
            auto want = oracle_candidates(g, *t);
            total += got.size();
            bool same = got.size() == want.size();
            for (std::size_t i = 0; same && i < got.size(); ++i) same = got[i].key() == want[i].key();
            if (!same) fail(o, t->pattern + " graph " + std::to_string(trial));
        }
    }
    if (o.pass) o.detail = "40 enumerations, " + std::to_string(total) + " candidates";
    return o;
}

Outcome figure_nine() {
    Outcome o;
    const std::string text1 = "if\n   ctorVisibility(singleton) != public\n   and aggregation(singleton,singleton) != notLinked\n"
                              "   and DIT(singleton) < 2\nthen\n   aPattern\n";
    const std::string text2 = "if\n   ctorVisibility(singleton) = public\n   and controlledExcept(singleton) = false\n"
                              "   and controlledInit(singleton) = false\nthen\n   notAPattern\n";
    Rule r1 = parse_rule(text1, kSingleton), r2 = parse_rule(text2, kSingleton);
    if (render_listing(r1, kSingleton) != text1) fail(o, "rule 1 renders differently");
    if (render_listing(r2, kSingleton) != text2) fail(o, "rule 2 renders differently");
    auto canonical = extract_facts(fixture_dir("java/singleton_canonical"), default_container_types()).graph;
    auto registry = extract_facts(fixture_dir("java/public_ctor"), default_container_types()).graph;
    Candidate s{"Singleton", {{"singleton", "demo.Singleton"}}};
    Candidate p{"Singleton", {{"singleton", "demo.Registry"}}};
    bool a = matches(r1, s, canonical, kSingleton), b = matches(r2, s, canonical, kSingleton);
    bool c = matches(r1, p, registry, kSingleton), d = matches(r2, p, registry, kSingleton);
    if (!a || b) fail(o, "canonical Singleton gives (" + std::to_string(a) + "," + std::to_string(b) + ")");
    if (c || !d) fail(o, "public-constructor fixture gives (" + std::to_string(c) + "," + std::to_string(d) + ")");
    if (o.pass) o.detail = "(true,false) and (false,true); listings exact";
    return o;
}

Outcome synthetic_end_to_end() {
    Outcome o;
    auto t0 = Clock::now();
    std::vector<double> f1s;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        LabeledRepository repo = singleton_corpus(30, 60, 500 + seed);
        XvalConfig x;
        x.folds = 10;
        x.runs = 1;
        x.seed = seed;
        XvalReport r = cross_validate(repo, x);
        f1s.push_back(r.cells.at(0).f1.mean);
    }
    double mean = std::accumulate(f1s.begin(), f1s.end(), 0.0) / static_cast<double>(f1s.size());
    double secs = seconds_since(t0);
    std::ostringstream s;
    s << "mean F1 " << mean << " over 5 seeds, " << secs << " s";
    o.detail = s.str();
    if (mean < 0.90) fail(o, s.str());
    if (secs >= 600) fail(o, s.str());
    return o;
}

Outcome runtime_bound() {
    Outcome o;
    Rng rng(7007);
    auto graph = std::make_shared<const CodeFactsGraph>(random_graph(rng, 30));
    Dataset d = random_dataset(rng, kAdapterRoles, 100, graph);
    Grammar g = default_grammar(kAdapterRoles, &d);
    auto t0 = Clock::now();
    auto res = run_g3p4dpd(EvolutionConfig{}, g, d);
    double secs = seconds_since(t0);
    std::ostringstream s;
    s << secs << " s for 100 samples at defaults, archive " << res.archive.size();
    o.detail = s.str();
    if (secs > 90) fail(o, s.str());
    return o;
}

// Highest-precedence rule among `idx`, compared with exact cross products.
std::size_t best_by_hand(const DetectionModel& m, const std::vector<std::size_t>& idx) {
    auto better = [&](const Rule& a, const Rule& b) {
        unsigned long long ca = a.stats.correct * (b.stats.matched ? b.stats.matched : 1),
                           cb = b.stats.correct * (a.stats.matched ? a.stats.matched : 1);
        if (!a.stats.matched) ca = 0;
        if (!b.stats.matched) cb = 0;
        if (ca != cb) return ca > cb;
        unsigned long long sa = a.stats.correct * b.stats.total, sb = b.stats.correct * a.stats.total;
        if (sa != sb) return sa > sb;
        if (a.antecedent.size() != b.antecedent.size()) return a.antecedent.size() < b.antecedent.size();
        return canonical_text(a, m.roles) < canonical_text(b, m.roles);
    };
    std::size_t best = idx[0];
    for (std::size_t i : idx)
        if (better(m.rules[i], m.rules[best])) best = i;
    return best;
}

Outcome strategy_properties() {
    Outcome o;
    Rng rng(8008);
    Grammar g = default_grammar(kSingleton);
    for (int trial = 0; trial < 200 && o.pass; ++trial) {
        std::vector<Rule> rules;
        std::size_t n = 1 + rng.below(12);
        for (std::size_t k = 0; k < n; ++k) {
            Rule r = to_rule(random_rule_tree(g, 25, rng), g);
            std::size_t total = 20 + rng.below(20), a = rng.below(total + 1), c = rng.below(total + 1);
            std::size_t lo = a + c > total ? a + c - total : 0;
            r.stats = {a, lo + rng.below(std::min(a, c) - lo + 1), c, total};
            rules.push_back(r);
        }
        DetectionModel m = build_model("Singleton", kSingleton, rules, Strategy::MAXL, 5, 1, 40);
        std::vector<std::size_t> cov;
        for (std::size_t i = 0; i < m.rules.size(); ++i)
            if (rng.chance(0.6)) cov.push_back(i);
        if (cov.empty()) cov.push_back(rng.below(m.rules.size()));
        std::size_t top = best_by_hand(m, cov);
        if (decide(m, cov).label != m.rules[top].consequent) fail(o, "MAXL trial " + std::to_string(trial));
        m.strategy = Strategy::DFML;
        std::size_t pos = 0, neg = 0;
        for (std::size_t i : cov) (m.rules[i].consequent == Consequent::APattern ? pos : neg)++;
        Consequent want = pos > neg ? Consequent::APattern : neg > pos ? Consequent::NotAPattern : m.rules[top].consequent;
        if (decide(m, cov).label != want) fail(o, "DFML trial " + std::to_string(trial));
    }

    auto rule = [](const char* text, RuleStats st) {
        Rule r = parse_rule(text, kSingleton);
        r.stats = st;
        return r;
    };
    auto verdict = [](std::vector<Rule> rules, Strategy s, int lapK = 5) {
        DetectionModel m = build_model("Singleton", kSingleton, std::move(rules), s, lapK, 1, 0);
        std::vector<std::size_t> all(m.rules.size());
        std::iota(all.begin(), all.end(), 0);
        return decide(m, all).label;
    };
    // Fixture A: |D|=8, 4 positives; weighted sums 4.8 + 0 against 8/3 + 0.0593.
    std::vector<Rule> a{rule("if isFinal(singleton) = true then aPattern", {3, 3, 4, 8}),
                        rule("if NOM(singleton) < 2 then aPattern", {4, 2, 4, 8}),
                        rule("if DIT(singleton) > 2 then notAPattern", {2, 2, 4, 8}),
                        rule("if NOC(singleton) > 0 then notAPattern", {5, 3, 4, 8})};
    if (verdict(a, Strategy::DFML_CHI2) != Consequent::APattern) fail(o, "chi2 fixture A");
    // Fixture B: |D|=10, 5 per class; chi2 2.5 vs 20/3, Laplace 3/4 vs 6/8 ties to the top rule.
    std::vector<Rule> b{rule("if isFinal(singleton) = true then aPattern", {2, 2, 5, 10}),
                        rule("if NOM(singleton) < 2 then notAPattern", {6, 5, 5, 10})};
    if (verdict(b, Strategy::DFML_CHI2) != Consequent::NotAPattern) fail(o, "chi2 fixture B");
    if (verdict(b, Strategy::DFML_LAP) != Consequent::APattern) fail(o, "Laplace fixture B");
    // Fixture C: Laplace 0.9, 0.5, 0.5 against 0.8, 0.8; top-1 vs top-5 means.
    std::vector<Rule> c{rule("if isFinal(singleton) = true then aPattern", {8, 8, 10, 20}),
                        rule("if NOM(singleton) < 2 then aPattern", {8, 4, 10, 20}),
                        rule("if DIT(singleton) < 2 then aPattern", {8, 4, 10, 20}),
                        rule("if NOC(singleton) < 1 then notAPattern", {3, 3, 10, 20}),
                        rule("if NOC(singleton) < 2 then notAPattern", {3, 3, 10, 20})};
    if (verdict(c, Strategy::DFML_LAP, 1) != Consequent::APattern) fail(o, "Laplace fixture C, k=1");
    if (verdict(c, Strategy::DFML_LAP, 5) != Consequent::NotAPattern) fail(o, "Laplace fixture C, k=5");
    if (o.pass) o.detail = "200 random models, 3 hand-built fixtures";
    return o;
}

int cli(std::vector<std::string> args) {
    args.insert(args.begin(), "dpd");
    std::ostringstream out, err;
    return cli::run_cli(args, out, err);
}

bool cli_pipeline(const fs::path& dir, unsigned threads) {
    auto ids = write_singleton_project(dir / "src", 10, 9);
    CandidateList pos{"Singleton", kSingleton, {}};
    for (const auto& id : ids) pos.candidates.push_back({"Singleton", {{"singleton", id}}});
    save_candidates(pos, dir / "positives.json");
    std::string t = std::to_string(threads);
    auto p = [&](const char* f) { return (dir / f).string(); };
    return cli({"extract", "--src", p("src"), "--out", p("facts.json"), "--threads", t}) == 0 &&
           cli({"candidates", "--facts", p("facts.json"), "--pattern", "Singleton", "--out", p("candidates.json"),
                "--positives", p("positives.json"), "--repo-out", p("repo.json"), "--seed", "5"}) == 0 &&
           cli({"train", "--repo", p("repo.json"), "--out", p("model.json"), "--seed", "11", "--threads", t,
                "--set", "maxGen=60"}) == 0 &&
           cli({"detect", "--model", p("model.json"), "--facts", p("facts.json"), "--candidates", p("candidates.json"),
                "--out", p("report.json"), "--threads", t}) == 0;
}

Outcome determinism() {
    Outcome o;
    std::vector<fs::path> dirs{scratch_dir("acc_t1a"), scratch_dir("acc_t1b"), scratch_dir("acc_t8")};
    unsigned threads[] = {1, 1, 8};
    for (std::size_t i = 0; i < dirs.size(); ++i)
        if (!cli_pipeline(dirs[i], threads[i])) fail(o, "pipeline failed in " + dirs[i].string());
    if (!o.pass) return o;
    for (const char* f : {"facts.json", "candidates.json", "candidates.negatives.json", "repo.json", "model.json",
                          "report.json"})
        for (std::size_t i = 1; i < dirs.size(); ++i)
            if (read_file(dirs[0] / f) != read_file(dirs[i] / f)) fail(o, std::string(f) + " differs");
    if (o.pass) o.detail = "6 output files identical across 3 runs (1, 1, 8 threads)";
    return o;
}

Outcome metric_fixtures() {
    Outcome o;
    auto hierarchy = extract_facts(fixture_dir("java/hierarchy6"), default_container_types()).graph;
    for (const auto& row : kHierarchyMetrics) {
        std::int64_t got[4] = {compute_metric(Op::NOM, hierarchy, row.id), compute_metric(Op::NOC, hierarchy, row.id),
                               compute_metric(Op::DIT, hierarchy, row.id), compute_metric(Op::RFC, hierarchy, row.id)};
        std::int64_t want[4] = {row.nom, row.noc, row.dit, row.rfc};
        for (int k = 0; k < 4; ++k)
            if (got[k] != want[k]) fail(o, std::string(row.id) + " metric " + std::to_string(k));
    }
    auto zoo = extract_facts(fixture_dir("java/microstructures"), default_container_types()).graph;
    std::set<Op> ops;
    for (const auto& c : kOperatorTable) {
        ops.insert(c.op);
        if (eval_categorical(c.op, zoo, c.args) != c.expected) fail(o, std::string(op_name(c.op)) + " on " + c.args[0]);
    }
    if (o.pass)
        o.detail = std::to_string(std::size(kHierarchyMetrics)) + " classes x 4 metrics, " +
                   std::to_string(std::size(kOperatorTable)) + " operator cases over " + std::to_string(ops.size()) +
                   " operators";
    return o;
}

} // namespace

int main() {
    std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"support/confidence oracle", support_confidence_oracle},
        {"database coverage oracle", pruning_oracle},
        {"grammar validity sweep", grammar_sweep},
        {"candidate oracle", candidate_oracle},
        {"sample Singleton rules", figure_nine},
        {"synthetic end-to-end F1", synthetic_end_to_end},
        {"runtime bound", runtime_bound},
        {"strategy properties", strategy_properties},
        {"CLI determinism", determinism},
        {"metric and operator fixtures", metric_fixtures},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        failed += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << " " << (i + 1) << " " << criteria[i].first << ": " << o.detail
                  << std::endl;
    }
    return failed ? 1 : 0;
}
