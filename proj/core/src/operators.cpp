#include "dpd/operators.hpp"

#include <algorithm>
#include <set>

#include "dpd/errors.hpp"

namespace dpd {

namespace {

using Index = CodeFactsGraph::Index;

struct OpInfo {
    Op op;
    const char* name;
    std::size_t arity;
    Domain domain;
};

// Numeric ops carry a placeholder domain; it is never consulted for them.
constexpr std::array<OpInfo, kOpCount> kOps{{
    {Op::NOM, "NOM", 1, Domain::Bool},
    {Op::NOC, "NOC", 1, Domain::Bool},
    {Op::DIT, "DIT", 1, Domain::Bool},
    {Op::RFC, "RFC", 1, Domain::Bool},
    {Op::IsFinal, "isFinal", 1, Domain::Bool},
    {Op::IsSubclass, "isSubclass", 1, Domain::Bool},
    {Op::ControlledInit, "controlledInit", 1, Domain::Bool},
    {Op::ControlledExcept, "controlledExcept", 1, Domain::Bool},
    {Op::Conglomeration, "conglomeration", 1, Domain::Bool},
    {Op::Returns, "returns", 2, Domain::Bool},
    {Op::Receives, "receives", 2, Domain::Bool},
    {Op::CreateObj, "createObj", 2, Domain::Bool},
    {Op::Delegates, "delegates", 2, Domain::Bool},
    {Op::SameElem, "sameElem", 2, Domain::Bool},
    {Op::TypeOf, "typeOf", 1, Domain::TypeOf},
    {Op::LinkMethod, "linkMethod", 2, Domain::LinkMethod},
    {Op::LinkArtefact, "linkArtefact", 2, Domain::LinkArtefact},
    {Op::CtorVisibility, "ctorVisibility", 1, Domain::CtorVisibility},
    {Op::Aggregation, "aggregation", 2, Domain::Aggregation},
    {Op::AdapterMethod, "adapterMethod", 3, Domain::AdapterMethod},
    {Op::RedirectInFamily, "redirectInFamily", 1, Domain::SameInterface},
    {Op::SameInterfaceInstance, "sameInterfaceInstance", 2, Domain::SameInterface},
    {Op::SameInterfaceContainer, "sameInterfaceContainer", 2, Domain::Bool},
    {Op::StaticField, "staticField", 1, Domain::Bool},
    {Op::StaticFlag, "staticFlag", 1, Domain::Bool},
}};

const OpInfo& info(Op op) { return kOps[static_cast<std::size_t>(op)]; }

constexpr std::array<const char*, 29> kValueNames{
    "true",          "false",           "class",       "absClass",        "intface",
    "enum",          "directOver",      "indirOver",   "directImpl",      "indirImpl",
    "notLinked",     "directInherit",   "indirInherit", "private",        "protected",
    "package",       "public",          "private_init", "private_noInit", "protected_init",
    "protected_noInit", "package_init", "package_noInit", "public_init",  "public_noInit",
    "decl",          "inhr",            "single",      "multi",
};

CatValue bool_value(bool b) { return b ? CatValue::True : CatValue::False; }

bool plain_method(const MethodFact& m) { return !m.isConstructor && !m.isSynthetic(); }

// Method name and arity from "name(T1,T2)"; '?' marks unresolved parameter
// types of library calls.
std::pair<std::string_view, std::size_t> shape_of(std::string_view sig) {
    const auto open = sig.find('(');
    const std::string_view name = sig.substr(0, open);
    if (open == std::string_view::npos) return {name, 0};
    const std::string_view params = sig.substr(open + 1, sig.size() - open - 2);
    if (params.empty()) return {name, 0};
    return {name, static_cast<std::size_t>(std::count(params.begin(), params.end(), ',')) + 1};
}

bool same_shape(std::string_view a, std::string_view b) {
    if (a == b) return true;
    if (a.find('?') == std::string_view::npos && b.find('?') == std::string_view::npos) return false;
    return shape_of(a) == shape_of(b);
}

bool contains(const std::vector<ArtifactId>& v, const ArtifactId& id) {
    return std::find(v.begin(), v.end(), id) != v.end();
}

std::set<std::string> overridable_signatures(const Artifact& a) {
    std::set<std::string> out;
    for (const auto& m : a.methods) {
        if (plain_method(m) && !m.isStatic) out.insert(m.signature);
    }
    return out;
}

// Extends-chain DIT. `asInterface` selects the interface convention (no
// implicit root); externals terminate the chain.
std::int64_t dit_of(const CodeFactsGraph& g, Index i, bool asInterface) {
    const Artifact& a = g.at(i);
    if (a.isExternal()) return asInterface ? 0 : 1;
    if (a.extends.empty()) return asInterface ? 0 : 1;
    std::int64_t best = 0;
    for (const auto& p : a.extends) {
        best = std::max(best, dit_of(g, g.index_of(p), asInterface));
    }
    return best + 1;
}

bool reachable_by_extends(const CodeFactsGraph& g, Index from, Index to) {
    std::vector<Index> frontier{from};
    std::set<Index> seen;
    while (!frontier.empty()) {
        const Index cur = frontier.back();
        frontier.pop_back();
        for (const auto& p : g.at(cur).extends) {
            const Index pi = g.index_of(p);
            if (pi == to) return true;
            if (seen.insert(pi).second) frontier.push_back(pi);
        }
    }
    return false;
}

CatValue link_method(const CodeFactsGraph& g, Index r1, Index r2) {
    if (r1 == r2 || !g.is_proper_subtype(r1, r2)) return CatValue::NotLinked;
    const Artifact& a = g.at(r1);
    const Artifact& b = g.at(r2);
    if (b.isExternal()) return CatValue::NotLinked;
    const auto targetSigs = overridable_signatures(b);
    const bool linked = std::any_of(a.methods.begin(), a.methods.end(), [&](const MethodFact& m) {
        return plain_method(m) && !m.isStatic && targetSigs.count(m.signature) > 0;
    });
    if (!linked) return CatValue::NotLinked;
    if (b.kind == ArtifactKind::Intface) {
        const bool direct = contains(a.implements, b.id) ||
                            (a.kind == ArtifactKind::Intface && contains(a.extends, b.id));
        return direct ? CatValue::DirectImpl : CatValue::IndirImpl;
    }
    return contains(a.extends, b.id) ? CatValue::DirectOver : CatValue::IndirOver;
}

CatValue link_artefact(const CodeFactsGraph& g, Index r1, Index r2) {
    if (r1 == r2) return CatValue::NotLinked;
    const Artifact& a = g.at(r1);
    const ArtifactId& target = g.at(r2).id;
    if (contains(a.extends, target)) return CatValue::DirectInherit;
    if (contains(a.implements, target)) return CatValue::DirectImpl;
    if (!g.is_proper_subtype(r1, r2)) return CatValue::NotLinked;
    return reachable_by_extends(g, r1, r2) ? CatValue::IndirInherit : CatValue::IndirImpl;
}

CatValue ctor_visibility(const Artifact& a) {
    std::optional<Visibility> best;
    for (const auto& m : a.methods) {
        if (!m.isConstructor) continue;
        if (!best || openness(m.visibility) > openness(*best)) best = m.visibility;
    }
    if (!best) {
        // Implicit constructor: enums are always private, everything else
        // is treated as public.
        best = a.kind == ArtifactKind::Enum ? Visibility::Private : Visibility::Public;
    }
    switch (*best) {
    case Visibility::Private: return CatValue::Private;
    case Visibility::Protected: return CatValue::Protected;
    case Visibility::Package: return CatValue::Package;
    case Visibility::Public: return CatValue::Public;
    }
    return CatValue::Public;
}

CatValue aggregation(const CodeFactsGraph& g, Index r1, Index r2) {
    const Artifact& a = g.at(r1);
    const ArtifactId& target = g.at(r2).id;
    std::optional<Visibility> vis;
    bool init = false;
    for (const auto& f : a.fields) {
        if (f.declaredType != target) continue;
        if (!vis || openness(f.visibility) > openness(*vis)) {
            vis = f.visibility;
            init = f.initializedWithNew;
        } else if (f.visibility == *vis) {
            init = init || f.initializedWithNew;
        }
    }
    if (!vis) return CatValue::NotLinked;
    static constexpr std::array<std::array<CatValue, 2>, 4> table{{
        {CatValue::PrivateInit, CatValue::PrivateNoInit},
        {CatValue::ProtectedInit, CatValue::ProtectedNoInit},
        {CatValue::PackageInit, CatValue::PackageNoInit},
        {CatValue::PublicInit, CatValue::PublicNoInit},
    }};
    return table[static_cast<std::size_t>(*vis)][init ? 0 : 1];
}

bool invokes(const MethodFact& m, const ArtifactId& target) {
    return std::any_of(m.invocations.begin(), m.invocations.end(),
                       [&](const Invocation& i) { return i.target == target; });
}

CatValue adapter_method(const CodeFactsGraph& g, Index r1, Index r2, Index r3) {
    const Artifact& target = g.at(r3);
    if (target.isExternal() || !g.is_proper_subtype(r1, r3)) return CatValue::NotLinked;
    const auto targetSigs = overridable_signatures(target);
    const Artifact& adapter = g.at(r1);
    const ArtifactId& adaptee = g.at(r2).id;
    for (const auto& m : adapter.methods) {
        if (plain_method(m) && targetSigs.count(m.signature) && invokes(m, adaptee)) {
            return CatValue::Decl;
        }
    }
    const auto own = overridable_signatures(adapter);
    for (Index s : g.all_supertypes(r1)) {
        if (s == r3) continue;
        for (const auto& m : g.at(s).methods) {
            if (plain_method(m) && targetSigs.count(m.signature) && !own.count(m.signature) &&
                invokes(m, adaptee)) {
                return CatValue::Inhr;
            }
        }
    }
    return CatValue::NotLinked;
}

CatValue count_value(std::size_t n) {
    if (n == 0) return CatValue::NotLinked;
    return n == 1 ? CatValue::Single : CatValue::Multi;
}

CatValue redirect_in_family(const CodeFactsGraph& g, Index r1) {
    std::size_t count = 0;
    for (const auto& m : g.at(r1).methods) {
        if (!plain_method(m)) continue;
        for (const auto& inv : m.invocations) {
            const Index t = g.find(inv.target);
            if (g.is_proper_subtype(r1, t) && same_shape(inv.signature, m.signature)) ++count;
        }
    }
    return count_value(count);
}

// r2 together with everything r2 extends or implements.
std::vector<Index> family_of(const CodeFactsGraph& g, Index r2) {
    std::vector<Index> fam = g.all_supertypes(r2);
    fam.push_back(r2);
    std::sort(fam.begin(), fam.end());
    return fam;
}

CatValue same_interface_instance(const CodeFactsGraph& g, Index r1, Index r2) {
    if (!g.is_proper_subtype(r1, r2)) return CatValue::NotLinked;
    const auto fam = family_of(g, r2);
    std::size_t n = 0;
    for (const auto& f : g.at(r1).fields) {
        if (f.elementType) continue;
        if (std::binary_search(fam.begin(), fam.end(), g.find(f.declaredType))) ++n;
    }
    return count_value(n);
}

bool same_interface_container(const CodeFactsGraph& g, Index r1, Index r2) {
    if (!g.is_proper_subtype(r1, r2)) return false;
    const auto fam = family_of(g, r2);
    return std::any_of(g.at(r1).fields.begin(), g.at(r1).fields.end(), [&](const FieldFact& f) {
        return f.elementType && std::binary_search(fam.begin(), fam.end(), g.find(*f.elementType));
    });
}

bool conglomeration(const Artifact& a) {
    for (const auto& m : a.methods) {
        std::set<std::string_view> callees;
        for (const auto& inv : m.invocations) {
            if (inv.target == a.id && inv.signature != m.signature) callees.insert(inv.signature);
        }
        if (callees.size() >= 2) return true;
    }
    return false;
}

bool is_boolean_type(std::string_view t) {
    return t == "boolean" || t == "Boolean" || t == "java.lang.Boolean";
}

void check_args(Op op, std::size_t n) {
    if (n != arity(op)) {
        throw ContractError(std::string("operator ") + op_name(op) + " expects " +
                            std::to_string(arity(op)) + " argument(s), got " + std::to_string(n));
    }
}

} // namespace

std::vector<Op> all_ops() {
    std::vector<Op> out;
    for (const auto& i : kOps) out.push_back(i.op);
    return out;
}

std::vector<Op> categorical_ops() {
    std::vector<Op> out;
    for (const auto& i : kOps) {
        if (!is_numeric(i.op)) out.push_back(i.op);
    }
    return out;
}

const char* op_name(Op op) { return info(op).name; }

std::optional<Op> parse_op(std::string_view name) {
    for (const auto& i : kOps) {
        if (name == i.name) return i.op;
    }
    if (name == "delegate") return Op::Delegates;
    if (name == "returned") return Op::Returns;
    if (name == "received") return Op::Receives;
    if (name == "controlledExcep") return Op::ControlledExcept;
    return std::nullopt;
}

std::size_t arity(Op op) { return info(op).arity; }

Domain domain_of(Op op) {
    if (is_numeric(op)) throw ContractError(std::string(op_name(op)) + " is numeric");
    return info(op).domain;
}

const std::vector<CatValue>& domain_values(Domain d) {
    using V = CatValue;
    static const std::vector<CatValue> kBool{V::True, V::False};
    static const std::vector<CatValue> kTypeOf{V::Class, V::AbsClass, V::Intface, V::Enum};
    static const std::vector<CatValue> kLinkMethod{V::DirectOver, V::IndirOver, V::DirectImpl,
                                                   V::IndirImpl, V::NotLinked};
    static const std::vector<CatValue> kLinkArtefact{V::DirectInherit, V::IndirInherit, V::DirectImpl,
                                                     V::IndirImpl, V::NotLinked};
    static const std::vector<CatValue> kCtor{V::Private, V::Protected, V::Package, V::Public};
    static const std::vector<CatValue> kAggregation{
        V::PrivateInit, V::PrivateNoInit, V::ProtectedInit, V::ProtectedNoInit, V::PackageInit,
        V::PackageNoInit, V::PublicInit, V::PublicNoInit, V::NotLinked};
    static const std::vector<CatValue> kAdapter{V::Decl, V::Inhr, V::NotLinked};
    static const std::vector<CatValue> kSameInterface{V::Single, V::Multi, V::NotLinked};
    switch (d) {
    case Domain::Bool: return kBool;
    case Domain::TypeOf: return kTypeOf;
    case Domain::LinkMethod: return kLinkMethod;
    case Domain::LinkArtefact: return kLinkArtefact;
    case Domain::CtorVisibility: return kCtor;
    case Domain::Aggregation: return kAggregation;
    case Domain::AdapterMethod: return kAdapter;
    case Domain::SameInterface: return kSameInterface;
    }
    return kBool;
}

const char* domain_symbol(Domain d) {
    switch (d) {
    case Domain::Bool: return "<boolValue>";
    case Domain::TypeOf: return "<typeOfValue>";
    case Domain::LinkMethod: return "<linkMethodValue>";
    case Domain::LinkArtefact: return "<linkArtefactValue>";
    case Domain::CtorVisibility: return "<ctorVisibilityValue>";
    case Domain::Aggregation: return "<aggregationValue>";
    case Domain::AdapterMethod: return "<adapterMethodValue>";
    case Domain::SameInterface: return "<sameInterfaceValue>";
    }
    return "<boolValue>";
}

const char* value_name(CatValue v) { return kValueNames[static_cast<std::size_t>(v)]; }

std::optional<CatValue> parse_value(std::string_view name) {
    for (std::size_t i = 0; i < kValueNames.size(); ++i) {
        if (name == kValueNames[i]) return static_cast<CatValue>(i);
    }
    return std::nullopt;
}

bool in_domain(Op op, CatValue v) {
    const auto& values = domain_values(domain_of(op));
    return std::find(values.begin(), values.end(), v) != values.end();
}

std::int64_t compute_metric(Op metric, const CodeFactsGraph& g, Index i) {
    if (!is_numeric(metric)) {
        throw ContractError(std::string(op_name(metric)) + " is not a metric");
    }
    const Artifact& a = g.at(i);
    if (a.isExternal()) {
        throw ContractError(std::string(op_name(metric)) + " is undefined for external artifact '" +
                            a.id + "'");
    }
    switch (metric) {
    case Op::NOM:
        return std::count_if(a.methods.begin(), a.methods.end(), plain_method);
    case Op::NOC:
        return static_cast<std::int64_t>(g.extends_children(i).size());
    case Op::DIT:
        return dit_of(g, i, a.kind == ArtifactKind::Intface);
    case Op::RFC: {
        std::set<std::pair<std::string_view, std::string_view>> response;
        for (const auto& m : a.methods) {
            if (plain_method(m)) response.emplace(a.id, m.signature);
        }
        for (const auto& m : a.methods) {
            for (const auto& inv : m.invocations) response.emplace(inv.target, inv.signature);
        }
        return static_cast<std::int64_t>(response.size());
    }
    default:
        break;
    }
    return 0;
}

std::int64_t compute_metric(Op metric, const CodeFactsGraph& graph, std::string_view artifact) {
    return compute_metric(metric, graph, graph.index_of(artifact));
}

CatValue eval_categorical(Op op, const CodeFactsGraph& g, std::span<const Index> args) {
    if (is_numeric(op)) {
        throw ContractError(std::string(op_name(op)) + " is not a categorical operator");
    }
    check_args(op, args.size());
    for (Index i : args) {
        if (i >= g.size()) throw ContractError("artifact index out of range");
    }
    const Artifact& a = g.at(args[0]);
    switch (op) {
    case Op::IsFinal:
        return bool_value(a.isFinal);
    case Op::IsSubclass:
        return bool_value(!a.extends.empty());
    case Op::ControlledInit:
    case Op::ControlledExcept: {
        const Guard wanted = op == Op::ControlledInit ? Guard::Conditional : Guard::ExceptionGuarded;
        for (const auto& m : a.methods) {
            if (op == Op::ControlledExcept && !m.usesStaticFlagGuard) continue;
            for (const auto& ins : m.instantiations) {
                if (ins.target == a.id && ins.guard == wanted) return CatValue::True;
            }
        }
        return CatValue::False;
    }
    case Op::Conglomeration:
        return bool_value(conglomeration(a));
    case Op::Returns: {
        const ArtifactId& t = g.at(args[1]).id;
        return bool_value(std::any_of(a.methods.begin(), a.methods.end(), [&](const MethodFact& m) {
            return !m.isConstructor && m.returnType && *m.returnType == t;
        }));
    }
    case Op::Receives: {
        // A method of the second argument receives a value of the first
        // argument's type.
        const Artifact& owner = g.at(args[1]);
        return bool_value(std::any_of(owner.methods.begin(), owner.methods.end(), [&](const MethodFact& m) {
            return !m.isSynthetic() && contains(m.paramTypes, a.id);
        }));
    }
    case Op::CreateObj: {
        const ArtifactId& t = g.at(args[1]).id;
        return bool_value(std::any_of(a.methods.begin(), a.methods.end(), [&](const MethodFact& m) {
            return std::any_of(m.instantiations.begin(), m.instantiations.end(),
                               [&](const Instantiation& i) { return i.target == t; });
        }));
    }
    case Op::Delegates: {
        const auto& inv = g.invoked_artifacts(args[0]);
        return bool_value(std::binary_search(inv.begin(), inv.end(), args[1]));
    }
    case Op::SameElem:
        return bool_value(args[0] == args[1]);
    case Op::TypeOf:
        switch (a.kind) {
        case ArtifactKind::AbsClass: return CatValue::AbsClass;
        case ArtifactKind::Intface: return CatValue::Intface;
        case ArtifactKind::Enum: return CatValue::Enum;
        default: return CatValue::Class;
        }
    case Op::LinkMethod:
        return link_method(g, args[0], args[1]);
    case Op::LinkArtefact:
        return link_artefact(g, args[0], args[1]);
    case Op::CtorVisibility:
        return ctor_visibility(a);
    case Op::Aggregation:
        return aggregation(g, args[0], args[1]);
    case Op::AdapterMethod:
        return adapter_method(g, args[0], args[1], args[2]);
    case Op::RedirectInFamily:
        return redirect_in_family(g, args[0]);
    case Op::SameInterfaceInstance:
        return same_interface_instance(g, args[0], args[1]);
    case Op::SameInterfaceContainer:
        return bool_value(same_interface_container(g, args[0], args[1]));
    case Op::StaticField:
        return bool_value(std::any_of(a.fields.begin(), a.fields.end(), [&](const FieldFact& f) {
            return f.isStatic && f.declaredType == a.id;
        }));
    case Op::StaticFlag:
        return bool_value(std::any_of(a.fields.begin(), a.fields.end(), [&](const FieldFact& f) {
            return f.isStatic && is_boolean_type(f.declaredType);
        }));
    default:
        break;
    }
    throw ContractError("unhandled operator");
}

CatValue eval_categorical(Op op, const CodeFactsGraph& g, const std::vector<ArtifactId>& args) {
    check_args(op, args.size());
    std::array<Index, 3> idx{};
    for (std::size_t i = 0; i < args.size(); ++i) idx[i] = g.index_of(args[i]);
    return eval_categorical(op, g, std::span<const Index>(idx.data(), args.size()));
}

std::int32_t eval_op(Op op, const CodeFactsGraph& g, std::span<const Index> args) {
    if (is_numeric(op)) {
        check_args(op, args.size());
        return static_cast<std::int32_t>(compute_metric(op, g, args[0]));
    }
    return static_cast<std::int32_t>(eval_categorical(op, g, args));
}

std::vector<std::string> default_container_types() {
    return {std::string(kArrayMarker), "List", "Set", "Map", "Collection", "Vector"};
}

} // namespace dpd
