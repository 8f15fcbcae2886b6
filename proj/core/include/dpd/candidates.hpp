#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "dpd/candidate.hpp"
#include "dpd/facts.hpp"
#include "dpd/rng.hpp"
#include "dpd/rule.hpp"

namespace dpd {

enum class EdgeKind : std::uint8_t { InheritsOrImplements, Invokes, Creates, HasFieldOf, Any };

const char* to_string(EdgeKind k);
std::optional<EdgeKind> parse_edge_kind(std::string_view s);

struct TemplateEdge {
    std::string from;
    std::string to;
    EdgeKind kind = EdgeKind::Any;
};

// Structural skeleton of a pattern plus cheap pre-filters.
struct RoleTemplate {
    std::string pattern;
    std::vector<std::string> roles;
    std::vector<TemplateEdge> edges;
    // Comparisons over role indices, e.g. ctorVisibility(singleton) != public.
    std::vector<Comparison> constraints;
    // Whether two roles may be played by the same artifact.
    bool allowSharedArtifacts = false;
    // Groups of interchangeable roles; candidates that only permute a group
    // are reported once.
    std::vector<std::vector<std::string>> symmetricRoles;

    std::size_t role_index(std::string_view role) const;
    // Roles non-empty and unique, edges and constraints reference declared
    // roles. Throws ContractError.
    void validate() const;
};

// Throws ContractError for unknown edge kinds, operators, roles or values;
// ModelError for unreadable or malformed JSON.
RoleTemplate template_from_json(std::string_view text);
RoleTemplate load_template(const std::filesystem::path& path);
std::string template_to_json(const RoleTemplate& t);

// Whether `from` relates to `to` under the edge kind:
//   inheritsOrImplements  proper (transitive) supertype
//   invokes               some method of `from` calls a method of `to`
//   creates               some method of `from` instantiates `to`
//   hasFieldOf            a field of `from` is declared as (or holds) `to`
bool edge_holds(const CodeFactsGraph& g, EdgeKind kind, CodeFactsGraph::Index from, CodeFactsGraph::Index to);

// Every role assignment over non-external artifacts satisfying all edges,
// sorted by Candidate::key() without duplicates.
std::vector<Candidate> generate_candidates(const CodeFactsGraph& graph, const RoleTemplate& t);

// Drops candidates failing a constraint, then symmetric duplicates; keeps
// the input order otherwise.
std::vector<Candidate> filter_candidates(const std::vector<Candidate>& candidates, const RoleTemplate& t,
                                         const CodeFactsGraph& graph);

// Up to maxPerPositive structurally plausible negatives per positive, each
// obtained by replacing exactly one role's artifact.
std::vector<Candidate> generate_negatives(const std::vector<Candidate>& positives, const CodeFactsGraph& graph,
                                          const RoleTemplate& t, std::size_t maxPerPositive, Rng& rng);

// Candidate list files: {"version":1,"pattern":..,"roles":[..],"candidates":[{role:id,..},..]}.
struct CandidateList {
    std::string pattern;
    std::vector<std::string> roles;
    std::vector<Candidate> candidates;
};

std::string candidates_to_json(const CandidateList& list);
CandidateList candidates_from_json(std::string_view text);
void save_candidates(const CandidateList& list, const std::filesystem::path& path);
CandidateList load_candidates(const std::filesystem::path& path);

} // namespace dpd
