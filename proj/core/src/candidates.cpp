#include "dpd/candidates.hpp"

#include <algorithm>
#include <nlohmann/json.hpp>
#include <set>
#include <unordered_set>

#include "dpd/errors.hpp"
#include "io_util.hpp"

namespace dpd {

using Index = CodeFactsGraph::Index;
using json = nlohmann::json;

const char* to_string(Label label) { return label == Label::Positive ? "positive" : "negative"; }

std::optional<Label> parse_label(std::string_view s) {
    if (s == "positive" || s == "aPattern") return Label::Positive;
    if (s == "negative" || s == "notAPattern") return Label::Negative;
    return std::nullopt;
}

std::string Candidate::key() const {
    json j = json::object();
    for (const auto& [role, id] : roleMap) j[role] = id;
    return j.dump();
}

const char* to_string(EdgeKind k) {
    switch (k) {
    case EdgeKind::InheritsOrImplements: return "inheritsOrImplements";
    case EdgeKind::Invokes: return "invokes";
    case EdgeKind::Creates: return "creates";
    case EdgeKind::HasFieldOf: return "hasFieldOf";
    case EdgeKind::Any: return "any";
    }
    return "any";
}

std::optional<EdgeKind> parse_edge_kind(std::string_view s) {
    for (EdgeKind k : {EdgeKind::InheritsOrImplements, EdgeKind::Invokes, EdgeKind::Creates, EdgeKind::HasFieldOf,
                       EdgeKind::Any})
        if (s == to_string(k)) return k;
    return std::nullopt;
}

std::size_t RoleTemplate::role_index(std::string_view role) const {
    auto it = std::find(roles.begin(), roles.end(), role);
    if (it == roles.end()) throw ContractError("template " + pattern + " has no role '" + std::string(role) + "'");
    return static_cast<std::size_t>(it - roles.begin());
}

void RoleTemplate::validate() const {
    if (roles.empty()) throw ContractError("template " + pattern + " declares no roles");
    if (roles.size() > 64) throw ContractError("template " + pattern + " declares too many roles");
    std::set<std::string> seen;
    for (const auto& r : roles)
        if (r.empty() || !seen.insert(r).second) throw ContractError("template " + pattern + ": bad or repeated role");
    for (const auto& e : edges) {
        role_index(e.from);
        role_index(e.to);
    }
    for (const auto& c : constraints) {
        if (c.roles.size() != arity(c.op)) throw ContractError("template " + pattern + ": constraint arity mismatch");
        for (auto r : c.roles)
            if (r >= roles.size()) throw ContractError("template " + pattern + ": constraint role out of range");
        if (is_numeric(c.op) != is_numeric(c.comparator))
            throw ContractError("template " + pattern + ": comparator does not fit operator");
        if (!is_numeric(c.op) && !in_domain(c.op, static_cast<CatValue>(c.value)))
            throw ContractError("template " + pattern + ": constraint value outside domain");
    }
    for (const auto& group : symmetricRoles)
        for (const auto& r : group) role_index(r);
}

namespace {

[[noreturn]] void schema(const std::string& what) { throw ModelError(ModelErrc::SchemaViolation, what); }

json parse_json(std::string_view text, const char* what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ModelError(ModelErrc::Parse, std::string(what) + ": " + e.what());
    }
}

std::string string_field(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key) || !j[key].is_string())
        schema(std::string("missing string field '") + key + "'");
    return j[key].get<std::string>();
}

std::vector<std::string> string_list(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_array()) schema(std::string("missing array field '") + key + "'");
    std::vector<std::string> out;
    for (const auto& v : j[key]) {
        if (!v.is_string()) schema(std::string("non-string entry in '") + key + "'");
        out.push_back(v.get<std::string>());
    }
    return out;
}

Comparison constraint_from_json(const json& j, const RoleTemplate& t) {
    if (!j.is_object()) schema("constraint must be an object");
    Comparison c;
    std::string opName = string_field(j, "op");
    auto op = parse_op(opName);
    if (!op) throw ContractError("template " + t.pattern + ": unknown operator '" + opName + "'");
    c.op = *op;
    std::vector<std::string> roles;
    if (j.contains("role")) roles.push_back(string_field(j, "role"));
    else roles = string_list(j, "roles");
    for (const auto& r : roles) c.roles.push_back(static_cast<std::uint8_t>(t.role_index(r)));
    std::string cmp = j.contains("comparator") ? string_field(j, "comparator") : "=";
    auto comparator = parse_comparator(cmp);
    if (!comparator) throw ContractError("template " + t.pattern + ": unknown comparator '" + cmp + "'");
    c.comparator = *comparator;
    if (!j.contains("value")) schema("constraint without value");
    if (is_numeric(c.op)) {
        if (!j["value"].is_number_integer()) schema("numeric constraint needs an integer value");
        c.value = j["value"].get<std::int64_t>();
    } else {
        const json& v = j["value"];
        std::string text = v.is_boolean() ? (v.get<bool>() ? "true" : "false") : v.is_string() ? v.get<std::string>() : "";
        auto value = parse_value(text);
        if (!value) throw ContractError("template " + t.pattern + ": unknown value '" + text + "'");
        c.value = static_cast<std::int64_t>(*value);
    }
    return c;
}

// Sorted per-artifact neighbour lists for each concrete edge kind, both
// directions, restricted to non-external artifacts.
struct Relations {
    static constexpr std::size_t kKinds = 5;
    std::vector<std::vector<Index>> out[kKinds];
    std::vector<std::vector<Index>> in[kKinds];

    explicit Relations(const CodeFactsGraph& g) {
        std::size_t n = g.size();
        for (std::size_t k = 0; k < kKinds; ++k) {
            out[k].assign(n, {});
            in[k].assign(n, {});
        }
        auto add = [&](std::size_t k, Index a, Index b) {
            if (b == CodeFactsGraph::npos || g.at(b).isExternal()) return;
            out[k][a].push_back(b);
            out[4][a].push_back(b);
        };
        for (Index a = 0; a < n; ++a) {
            const Artifact& art = g.at(a);
            if (art.isExternal()) continue;
            for (Index b : g.all_supertypes(a)) add(0, a, b);
            for (Index b : g.invoked_artifacts(a)) add(1, a, b);
            for (const auto& m : art.methods)
                for (const auto& i : m.instantiations) add(2, a, g.find(i.target));
            for (const auto& f : art.fields) {
                add(3, a, g.find(f.declaredType));
                if (f.elementType) add(3, a, g.find(*f.elementType));
            }
        }
        for (std::size_t k = 0; k < kKinds; ++k) {
            for (Index a = 0; a < n; ++a) {
                auto& v = out[k][a];
                std::sort(v.begin(), v.end());
                v.erase(std::unique(v.begin(), v.end()), v.end());
                for (Index b : v) in[k][b].push_back(a);
            }
        }
    }

    bool holds(EdgeKind k, Index a, Index b) const {
        const auto& v = out[static_cast<std::size_t>(k)][a];
        return std::binary_search(v.begin(), v.end(), b);
    }
};

struct Edge {
    std::size_t from;
    std::size_t to;
    EdgeKind kind;
};

std::vector<Edge> resolved_edges(const RoleTemplate& t) {
    std::vector<Edge> out;
    for (const auto& e : t.edges) out.push_back({t.role_index(e.from), t.role_index(e.to), e.kind});
    return out;
}

class Matcher {
public:
    Matcher(const CodeFactsGraph& g, const RoleTemplate& t) : g_(g), t_(t), rel_(g), edges_(resolved_edges(t)) {
        const std::size_t r = t.roles.size();
        inDomain_.assign(r, std::vector<bool>(g.size(), false));
        domain_.assign(r, {});
        for (std::size_t role = 0; role < r; ++role) {
            for (Index a : g.non_external()) {
                bool ok = true;
                for (const auto& e : edges_) {
                    auto k = static_cast<std::size_t>(e.kind);
                    if (e.from == role && rel_.out[k][a].empty()) ok = false;
                    if (e.to == role && rel_.in[k][a].empty()) ok = false;
                }
                if (ok) {
                    domain_[role].push_back(a);
                    inDomain_[role][a] = true;
                }
            }
        }
        order_roles();
        assigned_.assign(r, CodeFactsGraph::npos);
    }

    std::vector<Candidate> run() {
        search(0);
        std::sort(found_.begin(), found_.end(),
                  [](const Candidate& a, const Candidate& b) { return a.key() < b.key(); });
        found_.erase(std::unique(found_.begin(), found_.end()), found_.end());
        return std::move(found_);
    }

private:
    void order_roles() {
        const std::size_t r = t_.roles.size();
        std::vector<bool> placed(r, false);
        for (std::size_t step = 0; step < r; ++step) {
            std::size_t best = r;
            int bestLinks = -1;
            for (std::size_t role = 0; role < r; ++role) {
                if (placed[role]) continue;
                int links = 0;
                for (const auto& e : edges_)
                    if ((e.from == role && placed[e.to]) || (e.to == role && placed[e.from])) ++links;
                if (best == r || links > bestLinks ||
                    (links == bestLinks && domain_[role].size() < domain_[best].size())) {
                    best = role;
                    bestLinks = links;
                }
            }
            placed[best] = true;
            order_.push_back(best);
        }
    }

    bool consistent(std::size_t role, Index a) const {
        if (!inDomain_[role][a]) return false;
        if (!t_.allowSharedArtifacts) {
            for (std::size_t other = 0; other < assigned_.size(); ++other)
                if (other != role && assigned_[other] == a) return false;
        }
        for (const auto& e : edges_) {
            if (e.from == role && e.to == role) {
                if (!rel_.holds(e.kind, a, a)) return false;
            } else if (e.from == role && assigned_[e.to] != CodeFactsGraph::npos) {
                if (!rel_.holds(e.kind, a, assigned_[e.to])) return false;
            } else if (e.to == role && assigned_[e.from] != CodeFactsGraph::npos) {
                if (!rel_.holds(e.kind, assigned_[e.from], a)) return false;
            }
        }
        return true;
    }

    const std::vector<Index>& options(std::size_t role) const {
        const std::vector<Index>* best = &domain_[role];
        for (const auto& e : edges_) {
            auto k = static_cast<std::size_t>(e.kind);
            const std::vector<Index>* v = nullptr;
            if (e.to == role && e.from != role && assigned_[e.from] != CodeFactsGraph::npos)
                v = &rel_.out[k][assigned_[e.from]];
            else if (e.from == role && e.to != role && assigned_[e.to] != CodeFactsGraph::npos)
                v = &rel_.in[k][assigned_[e.to]];
            if (v && v->size() < best->size()) best = v;
        }
        return *best;
    }

    void search(std::size_t depth) {
        if (depth == order_.size()) {
            Candidate c;
            c.pattern = t_.pattern;
            for (std::size_t role = 0; role < t_.roles.size(); ++role)
                c.roleMap[t_.roles[role]] = g_.at(assigned_[role]).id;
            found_.push_back(std::move(c));
            return;
        }
        std::size_t role = order_[depth];
        for (Index a : options(role)) {
            if (!consistent(role, a)) continue;
            assigned_[role] = a;
            search(depth + 1);
            assigned_[role] = CodeFactsGraph::npos;
        }
    }

    const CodeFactsGraph& g_;
    const RoleTemplate& t_;
    Relations rel_;
    std::vector<Edge> edges_;
    std::vector<std::vector<Index>> domain_;
    std::vector<std::vector<bool>> inDomain_;
    std::vector<std::size_t> order_;
    std::vector<Index> assigned_;
    std::vector<Candidate> found_;
};

bool fields_hold(const Artifact& a, const ArtifactId& target) {
    return std::any_of(a.fields.begin(), a.fields.end(), [&](const FieldFact& f) {
        return f.declaredType == target || (f.elementType && *f.elementType == target);
    });
}

bool creates(const Artifact& a, const ArtifactId& target) {
    return std::any_of(a.methods.begin(), a.methods.end(), [&](const MethodFact& m) {
        return std::any_of(m.instantiations.begin(), m.instantiations.end(),
                           [&](const Instantiation& i) { return i.target == target; });
    });
}

std::vector<Index> bound_of(const Candidate& c, const CodeFactsGraph& g, const RoleTemplate& t) {
    return bind_roles(c, g, t.roles);
}

bool structurally_valid(const std::vector<Index>& bound, const CodeFactsGraph& g, const RoleTemplate& t,
                        const std::vector<Edge>& edges) {
    for (Index a : bound)
        if (g.at(a).isExternal()) return false;
    if (!t.allowSharedArtifacts) {
        for (std::size_t i = 0; i < bound.size(); ++i)
            for (std::size_t j = i + 1; j < bound.size(); ++j)
                if (bound[i] == bound[j]) return false;
    }
    for (const auto& e : edges)
        if (!edge_holds(g, e.kind, bound[e.from], bound[e.to])) return false;
    return true;
}

} // namespace

bool edge_holds(const CodeFactsGraph& g, EdgeKind kind, Index from, Index to) {
    const Artifact& a = g.at(from);
    const Artifact& b = g.at(to);
    switch (kind) {
    case EdgeKind::InheritsOrImplements: return g.is_proper_subtype(from, to);
    case EdgeKind::Invokes: {
        const auto& v = g.invoked_artifacts(from);
        return std::binary_search(v.begin(), v.end(), to);
    }
    case EdgeKind::Creates: return creates(a, b.id);
    case EdgeKind::HasFieldOf: return fields_hold(a, b.id);
    case EdgeKind::Any:
        return edge_holds(g, EdgeKind::InheritsOrImplements, from, to) || edge_holds(g, EdgeKind::Invokes, from, to) ||
               edge_holds(g, EdgeKind::Creates, from, to) || edge_holds(g, EdgeKind::HasFieldOf, from, to);
    }
    return false;
}

RoleTemplate template_from_json(std::string_view text) {
    json j = parse_json(text, "template");
    if (!j.is_object()) schema("template must be a JSON object");
    RoleTemplate t;
    t.pattern = string_field(j, "pattern");
    t.roles = string_list(j, "roles");
    if (j.contains("edges")) {
        if (!j["edges"].is_array()) schema("'edges' must be an array");
        for (const auto& e : j["edges"]) {
            TemplateEdge edge;
            edge.from = string_field(e, "from");
            edge.to = string_field(e, "to");
            std::string kind = string_field(e, "kind");
            auto k = parse_edge_kind(kind);
            if (!k) throw ContractError("template " + t.pattern + ": unknown edge kind '" + kind + "'");
            edge.kind = *k;
            t.edges.push_back(std::move(edge));
        }
    }
    if (t.roles.empty()) throw ContractError("template " + t.pattern + " declares no roles");
    if (j.contains("constraints")) {
        if (!j["constraints"].is_array()) schema("'constraints' must be an array");
        for (const auto& c : j["constraints"]) t.constraints.push_back(constraint_from_json(c, t));
    }
    if (j.contains("allowSharedArtifacts")) {
        if (!j["allowSharedArtifacts"].is_boolean()) schema("'allowSharedArtifacts' must be a boolean");
        t.allowSharedArtifacts = j["allowSharedArtifacts"].get<bool>();
    }
    if (j.contains("symmetricRoles")) {
        if (!j["symmetricRoles"].is_array()) schema("'symmetricRoles' must be an array");
        for (const auto& g : j["symmetricRoles"]) {
            json wrapper = {{"g", g}};
            t.symmetricRoles.push_back(string_list(wrapper, "g"));
        }
    }
    t.validate();
    return t;
}

RoleTemplate load_template(const std::filesystem::path& path) { return template_from_json(detail::read_text(path)); }

std::string template_to_json(const RoleTemplate& t) {
    json j;
    j["pattern"] = t.pattern;
    j["roles"] = t.roles;
    j["edges"] = json::array();
    for (const auto& e : t.edges) j["edges"].push_back({{"from", e.from}, {"to", e.to}, {"kind", to_string(e.kind)}});
    j["constraints"] = json::array();
    for (const auto& c : t.constraints) {
        json jc;
        jc["op"] = op_name(c.op);
        std::vector<std::string> roles;
        for (auto r : c.roles) roles.push_back(t.roles.at(r));
        jc["roles"] = roles;
        jc["comparator"] = to_string(c.comparator);
        if (is_numeric(c.op)) jc["value"] = c.value;
        else jc["value"] = value_name(static_cast<CatValue>(c.value));
        j["constraints"].push_back(jc);
    }
    j["allowSharedArtifacts"] = t.allowSharedArtifacts;
    j["symmetricRoles"] = t.symmetricRoles;
    return j.dump(2) + "\n";
}

std::vector<Candidate> generate_candidates(const CodeFactsGraph& graph, const RoleTemplate& t) {
    t.validate();
    return Matcher(graph, t).run();
}

std::vector<Candidate> filter_candidates(const std::vector<Candidate>& candidates, const RoleTemplate& t,
                                         const CodeFactsGraph& graph) {
    std::vector<std::vector<std::size_t>> groups;
    for (const auto& g : t.symmetricRoles) {
        std::vector<std::size_t> idx;
        for (const auto& r : g) idx.push_back(t.role_index(r));
        groups.push_back(std::move(idx));
    }
    std::vector<Candidate> out;
    std::unordered_set<std::string> seen;
    for (const Candidate& c : candidates) {
        auto bound = bound_of(c, graph, t);
        bool ok = std::all_of(t.constraints.begin(), t.constraints.end(),
                              [&](const Comparison& k) { return holds(k, graph, bound); });
        if (!ok) continue;
        if (!groups.empty()) {
            std::vector<Index> canon = bound;
            for (const auto& g : groups) {
                std::vector<Index> vals;
                for (auto i : g) vals.push_back(canon[i]);
                std::sort(vals.begin(), vals.end());
                std::vector<std::size_t> slots = g;
                std::sort(slots.begin(), slots.end());
                for (std::size_t i = 0; i < slots.size(); ++i) canon[slots[i]] = vals[i];
            }
            std::string key;
            for (Index a : canon) key += std::to_string(a) + ",";
            if (!seen.insert(key).second) continue;
        }
        out.push_back(c);
    }
    return out;
}

std::vector<Candidate> generate_negatives(const std::vector<Candidate>& positives, const CodeFactsGraph& graph,
                                          const RoleTemplate& t, std::size_t maxPerPositive, Rng& rng) {
    if (maxPerPositive < 1) throw ContractError("maxPerPositive must be at least 1");
    t.validate();
    auto edges = resolved_edges(t);
    std::unordered_set<std::string> taken;
    for (const auto& p : positives) taken.insert(p.key());
    auto artifacts = graph.non_external();
    std::vector<Candidate> out;
    for (const auto& p : positives) {
        auto bound = bound_of(p, graph, t);
        std::vector<Candidate> options;
        std::unordered_set<std::string> local;
        for (std::size_t role = 0; role < t.roles.size(); ++role) {
            for (Index x : artifacts) {
                if (x == bound[role]) continue;
                auto swapped = bound;
                swapped[role] = x;
                if (!structurally_valid(swapped, graph, t, edges)) continue;
                Candidate c = p;
                c.pattern = t.pattern;
                c.roleMap[t.roles[role]] = graph.at(x).id;
                std::string key = c.key();
                if (taken.count(key) || !local.insert(key).second) continue;
                options.push_back(std::move(c));
            }
        }
        std::size_t k = std::min(maxPerPositive, options.size());
        for (std::size_t i = 0; i < k; ++i) {
            std::size_t j = i + static_cast<std::size_t>(rng.below(options.size() - i));
            std::swap(options[i], options[j]);
            taken.insert(options[i].key());
            out.push_back(options[i]);
        }
    }
    return out;
}

std::string candidates_to_json(const CandidateList& list) {
    json j;
    j["version"] = 1;
    j["pattern"] = list.pattern;
    j["roles"] = list.roles;
    j["candidates"] = json::array();
    for (const auto& c : list.candidates) {
        json m = json::object();
        for (const auto& [role, id] : c.roleMap) m[role] = id;
        j["candidates"].push_back(m);
    }
    return j.dump(2) + "\n";
}

CandidateList candidates_from_json(std::string_view text) {
    json j = parse_json(text, "candidate list");
    if (!j.is_object()) schema("candidate list must be a JSON object");
    if (!j.contains("version") || !j["version"].is_number_integer()) schema("missing version");
    if (j["version"].get<int>() != 1)
        throw ModelError(ModelErrc::UnsupportedVersion, "unsupported candidate list version");
    CandidateList list;
    list.pattern = string_field(j, "pattern");
    list.roles = string_list(j, "roles");
    if (!j.contains("candidates") || !j["candidates"].is_array()) schema("missing 'candidates' array");
    for (const auto& m : j["candidates"]) {
        if (!m.is_object()) schema("candidate must be an object");
        Candidate c;
        c.pattern = list.pattern;
        for (const auto& role : list.roles) c.roleMap[role] = string_field(m, role.c_str());
        if (m.size() != list.roles.size()) schema("candidate has roles outside the declared list");
        list.candidates.push_back(std::move(c));
    }
    return list;
}

void save_candidates(const CandidateList& list, const std::filesystem::path& path) {
    detail::write_text(path, candidates_to_json(list));
}

CandidateList load_candidates(const std::filesystem::path& path) { return candidates_from_json(detail::read_text(path)); }

} // namespace dpd
