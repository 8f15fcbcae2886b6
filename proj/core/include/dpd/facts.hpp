#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace dpd {

// Fully-qualified type name. Unique within a graph.
using ArtifactId = std::string;

// Pseudo type used as `declaredType` of array fields.
inline constexpr std::string_view kArrayMarker = "[]";

enum class ArtifactKind { Class, AbsClass, Intface, Enum, External };
enum class Visibility { Private, Protected, Package, Public };
enum class Guard { None, Conditional, ExceptionGuarded };

const char* to_string(ArtifactKind kind);
const char* to_string(Visibility v);
const char* to_string(Guard g);
std::optional<ArtifactKind> parse_artifact_kind(std::string_view s);
std::optional<Visibility> parse_visibility(std::string_view s);
std::optional<Guard> parse_guard(std::string_view s);

// Rank used to find the "least restrictive" visibility.
constexpr int openness(Visibility v) { return static_cast<int>(v); }

struct FieldFact {
    std::string name;
    ArtifactId declaredType;
    std::optional<ArtifactId> elementType;
    Visibility visibility = Visibility::Package;
    bool isStatic = false;
    bool initializedWithNew = false;

    bool operator==(const FieldFact&) const = default;
};

struct Invocation {
    ArtifactId target;
    std::string signature;

    auto operator<=>(const Invocation&) const = default;
};

struct Instantiation {
    ArtifactId target;
    Guard guard = Guard::None;

    auto operator<=>(const Instantiation&) const = default;
};

struct MethodFact {
    std::string name;
    std::string signature;
    bool isConstructor = false;
    Visibility visibility = Visibility::Package;
    bool isStatic = false;
    std::optional<ArtifactId> returnType;
    std::vector<ArtifactId> paramTypes;
    std::vector<Invocation> invocations;
    std::vector<Instantiation> instantiations;
    bool usesStaticFlagGuard = false;

    // Methods synthesized by the extractor to hold field-initializer and
    // initializer-block facts ("<clinit>", "<init>"). Not counted by NOM.
    bool isSynthetic() const { return !name.empty() && name.front() == '<'; }

    bool operator==(const MethodFact&) const = default;
};

struct Artifact {
    ArtifactId id;
    ArtifactKind kind = ArtifactKind::Class;
    bool isFinal = false;
    std::vector<ArtifactId> extends;
    std::vector<ArtifactId> implements;
    std::vector<FieldFact> fields;
    std::vector<MethodFact> methods;

    bool isExternal() const { return kind == ArtifactKind::External; }
    bool operator==(const Artifact&) const = default;
};

// Sorts artifacts by id and their members by name / signature. Invocation
// and instantiation lists are sorted and deduplicated.
void canonicalize(std::vector<Artifact>& artifacts);

// Immutable, validated graph of code artifacts with precomputed subtype and
// invocation indexes. Safe for concurrent readers.
class CodeFactsGraph {
public:
    using Index = std::uint32_t;
    static constexpr Index npos = static_cast<Index>(-1);

    CodeFactsGraph() = default;

    // Validates referential integrity, kind invariants and acyclicity.
    // Throws FactsError.
    explicit CodeFactsGraph(std::vector<Artifact> artifacts);

    std::size_t size() const { return artifacts_.size(); }
    const std::vector<Artifact>& artifacts() const { return artifacts_; }
    const Artifact& at(Index i) const { return artifacts_[i]; }

    Index find(std::string_view id) const;
    bool contains(std::string_view id) const { return find(id) != npos; }
    // Throws ContractError when the id is unknown.
    Index index_of(std::string_view id) const;
    const Artifact& artifact(std::string_view id) const { return artifacts_[index_of(id)]; }

    // Direct supertypes (extends then implements), in declaration order.
    const std::vector<Index>& direct_supertypes(Index i) const { return supers_[i]; }
    // Artifacts whose `extends` lists i.
    const std::vector<Index>& extends_children(Index i) const { return children_[i]; }
    // Transitive proper supertypes, sorted.
    const std::vector<Index>& all_supertypes(Index i) const { return ancestors_[i]; }
    bool is_proper_subtype(Index sub, Index super) const;

    // Distinct invocation targets of all methods of i, sorted.
    const std::vector<Index>& invoked_artifacts(Index i) const { return invoked_[i]; }

    std::vector<Index> non_external() const;

private:
    std::vector<Artifact> artifacts_;
    std::unordered_map<std::string, Index> byId_;
    std::vector<std::vector<Index>> supers_;
    std::vector<std::vector<Index>> children_;
    std::vector<std::vector<Index>> ancestors_;
    std::vector<std::vector<Index>> invoked_;
};

// Facts file I/O. Canonical form: {"version":1,"artifacts":[...]} with keys
// sorted, artifacts sorted by id and two-space indentation.
std::string facts_to_json(const CodeFactsGraph& graph);
CodeFactsGraph facts_from_json(std::string_view text);
void save_facts(const CodeFactsGraph& graph, const std::filesystem::path& path);
CodeFactsGraph load_facts(const std::filesystem::path& path);

} // namespace dpd
