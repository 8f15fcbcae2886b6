#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dpd/facts.hpp"

namespace dpd {

// Every operator the rule grammar can mention: four CK metrics followed by
// the categorical design-microstructure operators.
enum class Op : std::uint8_t {
    NOM,
    NOC,
    DIT,
    RFC,
    IsFinal,
    IsSubclass,
    ControlledInit,
    ControlledExcept,
    Conglomeration,
    Returns,
    Receives,
    CreateObj,
    Delegates,
    SameElem,
    TypeOf,
    LinkMethod,
    LinkArtefact,
    CtorVisibility,
    Aggregation,
    AdapterMethod,
    RedirectInFamily,
    SameInterfaceInstance,
    SameInterfaceContainer,
    StaticField,
    StaticFlag,
};

inline constexpr std::size_t kOpCount = 25;
inline constexpr std::array<Op, 4> kNumericOps{Op::NOM, Op::NOC, Op::DIT, Op::RFC};

constexpr bool is_numeric(Op op) { return op <= Op::RFC; }

std::vector<Op> all_ops();
std::vector<Op> categorical_ops();

// Values returned by categorical operators.
enum class CatValue : std::uint8_t {
    True,
    False,
    Class,
    AbsClass,
    Intface,
    Enum,
    DirectOver,
    IndirOver,
    DirectImpl,
    IndirImpl,
    NotLinked,
    DirectInherit,
    IndirInherit,
    Private,
    Protected,
    Package,
    Public,
    PrivateInit,
    PrivateNoInit,
    ProtectedInit,
    ProtectedNoInit,
    PackageInit,
    PackageNoInit,
    PublicInit,
    PublicNoInit,
    Decl,
    Inhr,
    Single,
    Multi,
};

// Named value domains; one grammar nonterminal per domain.
enum class Domain : std::uint8_t {
    Bool,
    TypeOf,
    LinkMethod,
    LinkArtefact,
    CtorVisibility,
    Aggregation,
    AdapterMethod,
    SameInterface,
};

const char* op_name(Op op);
// Accepts the canonical names plus spelling variants used in rule listings
// ("delegate", "returned", "received").
std::optional<Op> parse_op(std::string_view name);
std::size_t arity(Op op);
Domain domain_of(Op op);
const std::vector<CatValue>& domain_values(Domain d);
// Grammar nonterminal name for the domain, e.g. "<typeOfValue>".
const char* domain_symbol(Domain d);

const char* value_name(CatValue v);
std::optional<CatValue> parse_value(std::string_view name);
bool in_domain(Op op, CatValue v);

// Operator evaluation over a code-facts graph. Pure; thread-safe.
std::int64_t compute_metric(Op metric, const CodeFactsGraph& graph, CodeFactsGraph::Index artifact);
std::int64_t compute_metric(Op metric, const CodeFactsGraph& graph, std::string_view artifact);

CatValue eval_categorical(Op op, const CodeFactsGraph& graph,
                          std::span<const CodeFactsGraph::Index> args);
CatValue eval_categorical(Op op, const CodeFactsGraph& graph, const std::vector<ArtifactId>& args);

// Single entry point returning the metric value or the categorical value's
// ordinal. Used by the precomputed feature tables.
std::int32_t eval_op(Op op, const CodeFactsGraph& graph, std::span<const CodeFactsGraph::Index> args);

// Default container types for sameInterfaceContainer (matched on the simple
// name of the declared type).
std::vector<std::string> default_container_types();

} // namespace dpd
