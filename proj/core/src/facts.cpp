#include "dpd/facts.hpp"

#include <algorithm>
#include <set>

#include "dpd/errors.hpp"

namespace dpd {

const char* to_string(FactsErrc code) {
    switch (code) {
    case FactsErrc::Io: return "io";
    case FactsErrc::MalformedJson: return "malformed-json";
    case FactsErrc::SchemaViolation: return "schema-violation";
    case FactsErrc::UnsupportedVersion: return "unsupported-version";
    case FactsErrc::DuplicateArtifact: return "duplicate-artifact";
    case FactsErrc::InvalidArtifact: return "invalid-artifact";
    case FactsErrc::DanglingReference: return "dangling-reference";
    case FactsErrc::SupertypeCycle: return "supertype-cycle";
    }
    return "unknown";
}

const char* to_string(ArtifactKind kind) {
    switch (kind) {
    case ArtifactKind::Class: return "class";
    case ArtifactKind::AbsClass: return "absclass";
    case ArtifactKind::Intface: return "intface";
    case ArtifactKind::Enum: return "enum";
    case ArtifactKind::External: return "external";
    }
    return "class";
}

const char* to_string(Visibility v) {
    switch (v) {
    case Visibility::Private: return "private";
    case Visibility::Protected: return "protected";
    case Visibility::Package: return "package";
    case Visibility::Public: return "public";
    }
    return "package";
}

const char* to_string(Guard g) {
    switch (g) {
    case Guard::None: return "none";
    case Guard::Conditional: return "conditional";
    case Guard::ExceptionGuarded: return "exceptionguarded";
    }
    return "none";
}

std::optional<ArtifactKind> parse_artifact_kind(std::string_view s) {
    for (auto k : {ArtifactKind::Class, ArtifactKind::AbsClass, ArtifactKind::Intface,
                   ArtifactKind::Enum, ArtifactKind::External}) {
        if (s == to_string(k)) {
            return k;
        }
    }
    return std::nullopt;
}

std::optional<Visibility> parse_visibility(std::string_view s) {
    for (auto v : {Visibility::Private, Visibility::Protected, Visibility::Package,
                   Visibility::Public}) {
        if (s == to_string(v)) {
            return v;
        }
    }
    return std::nullopt;
}

std::optional<Guard> parse_guard(std::string_view s) {
    for (auto g : {Guard::None, Guard::Conditional, Guard::ExceptionGuarded}) {
        if (s == to_string(g)) {
            return g;
        }
    }
    return std::nullopt;
}

void canonicalize(std::vector<Artifact>& artifacts) {
    for (auto& a : artifacts) {
        std::sort(a.fields.begin(), a.fields.end(),
                  [](const FieldFact& x, const FieldFact& y) { return x.name < y.name; });
        std::sort(a.methods.begin(), a.methods.end(),
                  [](const MethodFact& x, const MethodFact& y) { return x.signature < y.signature; });
        for (auto& m : a.methods) {
            std::sort(m.invocations.begin(), m.invocations.end());
            m.invocations.erase(std::unique(m.invocations.begin(), m.invocations.end()),
                                m.invocations.end());
            std::sort(m.instantiations.begin(), m.instantiations.end());
            m.instantiations.erase(std::unique(m.instantiations.begin(), m.instantiations.end()),
                                   m.instantiations.end());
        }
    }
    std::sort(artifacts.begin(), artifacts.end(),
              [](const Artifact& x, const Artifact& y) { return x.id < y.id; });
}

namespace {

[[noreturn]] void invalid(const Artifact& a, const std::string& what) {
    throw FactsError(FactsErrc::InvalidArtifact, "artifact '" + a.id + "': " + what, {a.id});
}

void check_shape(const Artifact& a) {
    if (a.id.empty()) {
        throw FactsError(FactsErrc::InvalidArtifact, "artifact with empty id");
    }
    if ((a.kind == ArtifactKind::Class || a.kind == ArtifactKind::AbsClass) && a.extends.size() > 1) {
        invalid(a, "a class may extend at most one type");
    }
    if (a.kind == ArtifactKind::Intface && !a.implements.empty()) {
        invalid(a, "an interface cannot implement types");
    }
    if (a.isExternal() && (!a.fields.empty() || !a.methods.empty())) {
        invalid(a, "external artifacts carry no members");
    }
    std::set<std::string_view> signatures;
    for (const auto& m : a.methods) {
        if (m.isConstructor && m.returnType) {
            invalid(a, "constructor '" + m.signature + "' has a return type");
        }
        if (!signatures.insert(m.signature).second) {
            invalid(a, "duplicate method signature '" + m.signature + "'");
        }
    }
}

template <typename F>
void for_each_reference(const Artifact& a, F&& f) {
    for (const auto& s : a.extends) f(s);
    for (const auto& s : a.implements) f(s);
    for (const auto& fld : a.fields) {
        f(fld.declaredType);
        if (fld.elementType) f(*fld.elementType);
    }
    for (const auto& m : a.methods) {
        if (m.returnType) f(*m.returnType);
        for (const auto& p : m.paramTypes) f(p);
        for (const auto& inv : m.invocations) f(inv.target);
        for (const auto& ins : m.instantiations) f(ins.target);
    }
}

} // namespace

CodeFactsGraph::CodeFactsGraph(std::vector<Artifact> artifacts) : artifacts_(std::move(artifacts)) {
    canonicalize(artifacts_);
    const std::size_t n = artifacts_.size();
    byId_.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        check_shape(artifacts_[i]);
        if (!byId_.emplace(artifacts_[i].id, static_cast<Index>(i)).second) {
            throw FactsError(FactsErrc::DuplicateArtifact,
                             "duplicate artifact id '" + artifacts_[i].id + "'", {artifacts_[i].id});
        }
    }
    for (const auto& a : artifacts_) {
        for_each_reference(a, [&](const ArtifactId& ref) {
            if (!byId_.count(ref)) {
                throw FactsError(FactsErrc::DanglingReference,
                                 "artifact '" + a.id + "' references unknown artifact '" + ref + "'",
                                 {ref});
            }
        });
    }

    supers_.assign(n, {});
    children_.assign(n, {});
    invoked_.assign(n, {});
    for (std::size_t i = 0; i < n; ++i) {
        const auto& a = artifacts_[i];
        for (const auto& s : a.extends) {
            const Index p = byId_.at(s);
            supers_[i].push_back(p);
            children_[p].push_back(static_cast<Index>(i));
        }
        for (const auto& s : a.implements) {
            supers_[i].push_back(byId_.at(s));
        }
        for (const auto& m : a.methods) {
            for (const auto& inv : m.invocations) {
                invoked_[i].push_back(byId_.at(inv.target));
            }
        }
        std::sort(invoked_[i].begin(), invoked_[i].end());
        invoked_[i].erase(std::unique(invoked_[i].begin(), invoked_[i].end()), invoked_[i].end());
    }
    for (auto& c : children_) {
        std::sort(c.begin(), c.end());
        c.erase(std::unique(c.begin(), c.end()), c.end());
    }

    // Cycle detection over the supertype relation (iterative DFS, colors).
    std::vector<int> color(n, 0);
    std::vector<Index> path;
    for (Index root = 0; root < n; ++root) {
        if (color[root] != 0) continue;
        std::vector<std::pair<Index, std::size_t>> stack{{root, 0}};
        color[root] = 1;
        path.assign(1, root);
        while (!stack.empty()) {
            auto& [node, next] = stack.back();
            if (next < supers_[node].size()) {
                const Index s = supers_[node][next++];
                if (color[s] == 1) {
                    auto it = std::find(path.begin(), path.end(), s);
                    std::vector<std::string> members;
                    for (; it != path.end(); ++it) members.push_back(artifacts_[*it].id);
                    std::sort(members.begin(), members.end());
                    std::string list;
                    for (const auto& m : members) list += (list.empty() ? "" : ", ") + m;
                    throw FactsError(FactsErrc::SupertypeCycle, "supertype cycle among {" + list + "}",
                                     std::move(members));
                }
                if (color[s] == 0) {
                    color[s] = 1;
                    stack.emplace_back(s, 0);
                    path.push_back(s);
                }
            } else {
                color[node] = 2;
                stack.pop_back();
                path.pop_back();
            }
        }
    }

    ancestors_.assign(n, {});
    std::vector<char> done(n, 0);
    // Post-order accumulation; the relation is acyclic so recursion depth is
    // bounded by the hierarchy height.
    auto visit = [&](auto&& self, Index i) -> void {
        if (done[i]) return;
        std::vector<Index> acc;
        for (Index s : supers_[i]) {
            self(self, s);
            acc.push_back(s);
            acc.insert(acc.end(), ancestors_[s].begin(), ancestors_[s].end());
        }
        std::sort(acc.begin(), acc.end());
        acc.erase(std::unique(acc.begin(), acc.end()), acc.end());
        ancestors_[i] = std::move(acc);
        done[i] = 1;
    };
    for (Index i = 0; i < n; ++i) visit(visit, i);
}

CodeFactsGraph::Index CodeFactsGraph::find(std::string_view id) const {
    auto it = byId_.find(std::string(id));
    return it == byId_.end() ? npos : it->second;
}

CodeFactsGraph::Index CodeFactsGraph::index_of(std::string_view id) const {
    const Index i = find(id);
    if (i == npos) {
        throw ContractError("unknown artifact '" + std::string(id) + "'");
    }
    return i;
}

bool CodeFactsGraph::is_proper_subtype(Index sub, Index super) const {
    const auto& anc = ancestors_[sub];
    return std::binary_search(anc.begin(), anc.end(), super);
}

std::vector<CodeFactsGraph::Index> CodeFactsGraph::non_external() const {
    std::vector<Index> out;
    for (Index i = 0; i < artifacts_.size(); ++i) {
        if (!artifacts_[i].isExternal()) out.push_back(i);
    }
    return out;
}

} // namespace dpd
