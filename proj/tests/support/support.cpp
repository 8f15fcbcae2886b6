#include "support.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "dpd/operators.hpp"

#ifndef DPD_FIXTURE_DIR
#error "DPD_FIXTURE_DIR must be defined"
#endif
#ifndef DPD_TEMPLATE_DIR
#error "DPD_TEMPLATE_DIR must be defined"
#endif

namespace dpd::testing {

namespace fs = std::filesystem;
using Index = CodeFactsGraph::Index;

fs::path fixture_dir(const std::string& name) { return fs::path(DPD_FIXTURE_DIR) / name; }

fs::path template_path(const std::string& pattern) { return fs::path(DPD_TEMPLATE_DIR) / (pattern + ".json"); }

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

fs::path scratch_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / ("dpd_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

bool oracle_holds(const Comparison& c, const CodeFactsGraph& g, const std::vector<Index>& args) {
    if (is_numeric(c.op)) {
        if (g.at(args[0]).isExternal()) return false;
        std::int64_t v = compute_metric(c.op, g, args[0]);
        switch (c.comparator) {
        case Comparator::Lt: return v < c.value;
        case Comparator::Gt: return v > c.value;
        case Comparator::Le: return v <= c.value;
        case Comparator::Ge: return v >= c.value;
        case Comparator::Eq: return v == c.value;
        case Comparator::Ne: return v != c.value;
        }
        return false;
    }
    CatValue v = eval_categorical(c.op, g, std::span<const Index>(args.data(), args.size()));
    bool equal = static_cast<std::int64_t>(v) == c.value;
    return c.comparator == Comparator::Eq ? equal : !equal;
}

bool oracle_matches(const Rule& r, const Sample& s, const std::vector<std::string>& roles) {
    for (const auto& c : r.antecedent) {
        std::vector<Index> args;
        for (auto role : c.roles) args.push_back(s.graph->index_of(s.candidate.roleMap.at(roles[role])));
        if (!oracle_holds(c, *s.graph, args)) return false;
    }
    return true;
}

namespace {

bool label_agrees(Consequent c, Label l) {
    return (c == Consequent::APattern) == (l == Label::Positive);
}

} // namespace

OracleCounts oracle_counts(const Rule& r, const std::vector<Sample>& samples, const std::vector<std::string>& roles) {
    OracleCounts out;
    out.total = samples.size();
    for (const auto& s : samples) {
        if (!oracle_matches(r, s, roles)) continue;
        ++out.matched;
        if (label_agrees(r.consequent, s.label)) ++out.correct;
    }
    return out;
}

std::vector<std::size_t> oracle_prune(const std::vector<Rule>& sorted, const std::vector<Sample>& samples,
                                      const std::vector<std::string>& roles, int threshold) {
    std::vector<std::size_t> ruleSet;
    std::vector<std::size_t> repo(samples.size());
    for (std::size_t i = 0; i < repo.size(); ++i) repo[i] = i;
    std::vector<int> covered(samples.size(), 0);
    for (std::size_t r = 0; r < sorted.size(); ++r) {
        bool marked = false;
        std::vector<std::size_t> covSamples;
        for (std::size_t s : repo) {
            if (oracle_matches(sorted[r], samples[s], roles)) {
                covSamples.push_back(s);
                if (label_agrees(sorted[r].consequent, samples[s].label)) marked = true;
            }
        }
        if (marked) {
            ruleSet.push_back(r);
            for (std::size_t s : covSamples) ++covered[s];
            std::vector<std::size_t> left;
            for (std::size_t s : repo)
                if (covered[s] < threshold) left.push_back(s);
            repo = left;
        }
        if (repo.empty()) break;
    }
    return ruleSet;
}

namespace {

bool supertype_of(const CodeFactsGraph& g, const Artifact& from, const ArtifactId& to) {
    std::vector<ArtifactId> stack(from.extends);
    stack.insert(stack.end(), from.implements.begin(), from.implements.end());
    std::set<ArtifactId> seen;
    while (!stack.empty()) {
        ArtifactId cur = stack.back();
        stack.pop_back();
        if (cur == to) return true;
        if (!seen.insert(cur).second) continue;
        const Artifact& a = g.artifact(cur);
        stack.insert(stack.end(), a.extends.begin(), a.extends.end());
        stack.insert(stack.end(), a.implements.begin(), a.implements.end());
    }
    return false;
}

bool raw_edge(const CodeFactsGraph& g, EdgeKind kind, const Artifact& a, const Artifact& b) {
    switch (kind) {
    case EdgeKind::InheritsOrImplements: return supertype_of(g, a, b.id);
    case EdgeKind::Invokes:
        for (const auto& m : a.methods)
            for (const auto& inv : m.invocations)
                if (inv.target == b.id) return true;
        return false;
    case EdgeKind::Creates:
        for (const auto& m : a.methods)
            for (const auto& ins : m.instantiations)
                if (ins.target == b.id) return true;
        return false;
    case EdgeKind::HasFieldOf:
        for (const auto& f : a.fields)
            if (f.declaredType == b.id || (f.elementType && *f.elementType == b.id)) return true;
        return false;
    case EdgeKind::Any:
        return raw_edge(g, EdgeKind::InheritsOrImplements, a, b) || raw_edge(g, EdgeKind::Invokes, a, b) ||
               raw_edge(g, EdgeKind::Creates, a, b) || raw_edge(g, EdgeKind::HasFieldOf, a, b);
    }
    return false;
}

} // namespace

std::vector<Candidate> oracle_candidates(const CodeFactsGraph& g, const RoleTemplate& t) {
    std::vector<const Artifact*> pool;
    for (const auto& a : g.artifacts())
        if (!a.isExternal()) pool.push_back(&a);
    const std::size_t k = t.roles.size();
    std::vector<Candidate> out;
    if (pool.empty()) return out;
    std::vector<std::size_t> pick(k, 0);
    while (true) {
        bool ok = true;
        if (!t.allowSharedArtifacts) {
            std::set<std::size_t> distinct(pick.begin(), pick.end());
            ok = distinct.size() == k;
        }
        for (std::size_t e = 0; ok && e < t.edges.size(); ++e) {
            const auto& edge = t.edges[e];
            const Artifact& a = *pool[pick[t.role_index(edge.from)]];
            const Artifact& b = *pool[pick[t.role_index(edge.to)]];
            ok = raw_edge(g, edge.kind, a, b);
        }
        if (ok) {
            Candidate c;
            c.pattern = t.pattern;
            for (std::size_t r = 0; r < k; ++r) c.roleMap[t.roles[r]] = pool[pick[r]]->id;
            out.push_back(c);
        }
        std::size_t pos = 0;
        while (pos < k && ++pick[pos] == pool.size()) pick[pos++] = 0;
        if (pos == k) break;
    }
    std::sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) { return a.key() < b.key(); });
    return out;
}

Counts oracle_confusion(const std::vector<bool>& predicted, const std::vector<bool>& actual) {
    Counts c;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (predicted[i] && actual[i]) ++c.tp;
        if (predicted[i] && !actual[i]) ++c.fp;
        if (!predicted[i] && !actual[i]) ++c.tn;
        if (!predicted[i] && actual[i]) ++c.fn;
    }
    return c;
}

namespace {

Visibility random_visibility(Rng& rng) { return static_cast<Visibility>(rng.below(4)); }

} // namespace

CodeFactsGraph random_graph(Rng& rng, std::size_t n) {
    std::vector<Artifact> arts;
    std::vector<ArtifactId> externals{"ext.E0", "ext.E1", "java.util.List"};
    for (const auto& e : externals) {
        Artifact a;
        a.id = e;
        a.kind = ArtifactKind::External;
        arts.push_back(a);
    }
    std::vector<ArtifactId> ids;
    for (std::size_t i = 0; i < n; ++i) ids.push_back("p.T" + std::to_string(i));
    std::vector<ArtifactKind> kinds(n);
    for (std::size_t i = 0; i < n; ++i) {
        double u = rng.uniform();
        kinds[i] = u < 0.2 ? ArtifactKind::Intface
                 : u < 0.35 ? ArtifactKind::AbsClass
                 : u < 0.42 ? ArtifactKind::Enum
                            : ArtifactKind::Class;
    }
    auto any_type = [&]() -> ArtifactId {
        std::size_t j = rng.below(n + 2);
        return j < n ? ids[j] : externals[j - n];
    };
    for (std::size_t i = 0; i < n; ++i) {
        Artifact a;
        a.id = ids[i];
        a.kind = kinds[i];
        a.isFinal = a.kind == ArtifactKind::Class && rng.chance(0.2);
        std::vector<std::size_t> lowerClasses, interfaces, lowerInterfaces;
        for (std::size_t j = 0; j < n; ++j) {
            bool cls = kinds[j] == ArtifactKind::Class || kinds[j] == ArtifactKind::AbsClass;
            if (j < i && cls) lowerClasses.push_back(j);
            if (kinds[j] == ArtifactKind::Intface) {
                interfaces.push_back(j);
                if (j < i) lowerInterfaces.push_back(j);
            }
        }
        if (a.kind == ArtifactKind::Intface) {
            for (std::size_t j : lowerInterfaces)
                if (rng.chance(0.3)) a.extends.push_back(ids[j]);
        } else {
            if (a.kind != ArtifactKind::Enum && !lowerClasses.empty() && rng.chance(0.6))
                a.extends.push_back(ids[lowerClasses[rng.below(lowerClasses.size())]]);
            else if (a.kind != ArtifactKind::Enum && rng.chance(0.1))
                a.extends.push_back("ext.E0");
            for (std::size_t j : interfaces)
                if (rng.chance(0.25)) a.implements.push_back(ids[j]);
        }
        std::size_t nf = rng.below(4);
        for (std::size_t f = 0; f < nf; ++f) {
            FieldFact fld;
            fld.name = "f" + std::to_string(f);
            if (rng.chance(0.2)) {
                fld.declaredType = "java.util.List";
                fld.elementType = any_type();
            } else {
                fld.declaredType = rng.chance(0.15) ? a.id : any_type();
            }
            fld.visibility = random_visibility(rng);
            fld.isStatic = rng.chance(0.3);
            fld.initializedWithNew = rng.chance(0.4);
            a.fields.push_back(fld);
        }
        std::size_t nm = rng.below(5);
        for (std::size_t m = 0; m < nm; ++m) {
            MethodFact mf;
            mf.name = "m" + std::to_string(m);
            std::size_t params = rng.below(2);
            mf.signature = mf.name + "(";
            for (std::size_t p = 0; p < params; ++p) {
                ArtifactId t = any_type();
                mf.paramTypes.push_back(t);
                mf.signature += (p ? "," : "") + t;
            }
            mf.signature += ")";
            mf.visibility = random_visibility(rng);
            mf.isStatic = rng.chance(0.2);
            if (rng.chance(0.6)) mf.returnType = any_type();
            std::size_t ni = rng.below(4);
            for (std::size_t k = 0; k < ni; ++k)
                mf.invocations.push_back({rng.chance(0.2) ? a.id : any_type(), "m" + std::to_string(rng.below(4)) + "()"});
            std::size_t nc = rng.below(3);
            for (std::size_t k = 0; k < nc; ++k)
                mf.instantiations.push_back({rng.chance(0.3) ? a.id : any_type(), static_cast<Guard>(rng.below(3))});
            mf.usesStaticFlagGuard = rng.chance(0.2);
            a.methods.push_back(mf);
        }
        if (a.kind != ArtifactKind::Intface && rng.chance(0.7)) {
            MethodFact ctor;
            ctor.name = a.id.substr(2);
            ctor.signature = ctor.name + "()";
            ctor.isConstructor = true;
            ctor.visibility = random_visibility(rng);
            if (rng.chance(0.3)) ctor.instantiations.push_back({any_type(), Guard::None});
            a.methods.push_back(ctor);
        }
        arts.push_back(a);
    }
    return CodeFactsGraph(std::move(arts));
}

Dataset random_dataset(Rng& rng, const std::vector<std::string>& roles, std::size_t count,
                       std::shared_ptr<const CodeFactsGraph> graph) {
    auto pool = graph->non_external();
    std::vector<Sample> samples;
    for (std::size_t i = 0; i < count; ++i) {
        Sample s;
        s.graph = graph;
        s.label = rng.chance(0.4) ? Label::Positive : Label::Negative;
        s.candidate.pattern = "Random";
        for (const auto& r : roles) s.candidate.roleMap[r] = graph->at(pool[rng.below(pool.size())]).id;
        samples.push_back(std::move(s));
    }
    return Dataset(roles, std::move(samples));
}

LabeledRepository singleton_corpus(std::size_t positives, std::size_t negatives, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Artifact> arts;
    for (const char* e : {"ext.Log", "ext.Conn"}) {
        Artifact a;
        a.id = e;
        a.kind = ArtifactKind::External;
        arts.push_back(a);
    }
    std::vector<ArtifactId> bases;
    for (int b = 0; b < 3; ++b) {
        Artifact a;
        a.id = "corpus.Base" + std::to_string(b);
        a.kind = b == 0 ? ArtifactKind::AbsClass : ArtifactKind::Class;
        MethodFact m;
        m.name = "run";
        m.signature = "run()";
        m.visibility = Visibility::Public;
        a.methods.push_back(m);
        arts.push_back(a);
        bases.push_back(a.id);
    }
    Artifact iface;
    iface.id = "corpus.Service";
    iface.kind = ArtifactKind::Intface;
    arts.push_back(iface);

    std::vector<std::pair<ArtifactId, Label>> labelled;
    const std::size_t total = positives + negatives;
    for (std::size_t i = 0; i < total; ++i) {
        bool positive = i < positives;
        Artifact a;
        a.id = "corpus.C" + std::to_string(i);
        a.kind = ArtifactKind::Class;
        a.isFinal = rng.chance(0.3);
        if (rng.chance(0.35)) a.extends.push_back(bases[rng.below(bases.size())]);
        if (rng.chance(0.4)) a.implements.push_back(iface.id);

        bool privateCtor, selfField;
        if (positive) {
            privateCtor = selfField = true;
        } else {
            switch (rng.below(3)) {
            case 0: privateCtor = false; selfField = true; break;
            case 1: privateCtor = true; selfField = false; break;
            default: privateCtor = false; selfField = false; break;
            }
        }
        bool lazy = rng.chance(0.5);
        MethodFact ctor;
        ctor.name = a.id.substr(7);
        ctor.signature = ctor.name + "()";
        ctor.isConstructor = true;
        ctor.visibility = privateCtor ? Visibility::Private : Visibility::Public;
        a.methods.push_back(ctor);
        if (selfField) {
            FieldFact f;
            f.name = "instance";
            f.declaredType = a.id;
            f.visibility = Visibility::Private;
            f.isStatic = true;
            f.initializedWithNew = !lazy;
            a.fields.push_back(f);
            MethodFact get;
            get.name = "getInstance";
            get.signature = "getInstance()";
            get.visibility = Visibility::Public;
            get.isStatic = true;
            get.returnType = a.id;
            if (lazy) {
                get.instantiations.push_back({a.id, Guard::Conditional});
            } else {
                MethodFact init;
                init.name = "<clinit>";
                init.signature = "<clinit>()";
                init.isStatic = true;
                init.instantiations.push_back({a.id, Guard::None});
                a.methods.push_back(init);
            }
            a.methods.push_back(get);
        } else {
            // Same accessor shape without the stored instance.
            MethodFact create;
            create.name = "create";
            create.signature = "create()";
            create.visibility = Visibility::Public;
            create.isStatic = true;
            create.returnType = a.id;
            create.instantiations.push_back({a.id, rng.chance(0.5) ? Guard::Conditional : Guard::None});
            a.methods.push_back(create);
        }
        if (!selfField && rng.chance(0.5)) {
            FieldFact f;
            f.name = "shared";
            f.declaredType = "ext.Conn";
            f.visibility = Visibility::Private;
            f.isStatic = true;
            f.initializedWithNew = rng.chance(0.5);
            a.fields.push_back(f);
        }
        std::size_t extra = rng.below(5);
        for (std::size_t m = 0; m < extra; ++m) {
            MethodFact mf;
            mf.name = "op" + std::to_string(m);
            mf.signature = mf.name + "()";
            mf.visibility = static_cast<Visibility>(rng.below(4));
            if (rng.chance(0.5)) mf.invocations.push_back({"ext.Log", "info(?)"});
            if (rng.chance(0.3)) mf.instantiations.push_back({"ext.Conn", Guard::None});
            a.methods.push_back(mf);
        }
        if (rng.chance(0.4)) {
            FieldFact f;
            f.name = "conn";
            f.declaredType = "ext.Conn";
            f.visibility = static_cast<Visibility>(rng.below(4));
            a.fields.push_back(f);
        }
        labelled.emplace_back(a.id, positive ? Label::Positive : Label::Negative);
        arts.push_back(a);
    }
    LabeledRepository repo;
    repo.pattern = "Singleton";
    repo.roles = {"singleton"};
    repo.projects["corpus"] = std::make_shared<const CodeFactsGraph>(std::move(arts));
    for (const auto& [id, label] : labelled) {
        RepoSample s;
        s.project = "corpus";
        s.label = label;
        s.candidate.pattern = "Singleton";
        s.candidate.roleMap["singleton"] = id;
        repo.samples.push_back(s);
    }
    return repo;
}

std::vector<std::string> write_singleton_project(const fs::path& dir, std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    fs::create_directories(dir / "app");
    std::vector<std::string> singletons;
    auto emit = [&](const std::string& name, const std::string& body) {
        std::ofstream(dir / "app" / (name + ".java")) << "package app;\n\nimport java.util.List;\n\n" << body;
    };
    emit("Log", "public class Log {\n    public void info(String s) {}\n}\n");
    for (std::size_t i = 0; i < n; ++i) {
        std::string s = "S" + std::to_string(i);
        std::string noise = rng.chance(0.5) ? "    private Log log = new Log();\n" : "";
        if (rng.chance(0.5)) {
            emit(s, "public class " + s + " {\n    private static final " + s + " INSTANCE = new " + s + "();\n" + noise +
                        "    private " + s + "() {}\n    public static " + s + " get() { return INSTANCE; }\n}\n");
        } else {
            emit(s, "public class " + s + " {\n    private static " + s + " inst;\n" + noise + "    private " + s +
                        "() {}\n    public static " + s + " get() {\n        if (inst == null) inst = new " + s +
                        "();\n        return inst;\n    }\n}\n");
        }
        singletons.push_back("app." + s);

        std::string p = "P" + std::to_string(i);
        emit(p, "public class " + p + " {\n    private Log log;\n" + noise + "    public " + p +
                    "(Log log) { this.log = log; }\n    public void run() { log.info(\"x\"); }\n}\n");
        std::string u = "U" + std::to_string(i);
        emit(u, "public class " + u + " {\n    private " + u + "() {}\n    public static int twice(int x) { return 2 * x; }\n}\n");
        std::string r = "R" + std::to_string(i);
        emit(r, "public class " + r + " {\n    public static " + r + " shared = new " + r + "();\n    public " + r +
                    "() {}\n    public static " + r + " create() { return new " + r + "(); }\n}\n");
    }
    return singletons;
}

} // namespace dpd::testing
