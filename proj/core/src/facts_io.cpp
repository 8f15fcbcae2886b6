#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dpd/errors.hpp"
#include "dpd/facts.hpp"

namespace dpd {

using nlohmann::json;

namespace {

[[noreturn]] void schema(const std::string& where, const std::string& what) {
    throw FactsError(FactsErrc::SchemaViolation, where + ": " + what, {where});
}

const json& member(const json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        schema(where, std::string("missing key '") + key + "'");
    }
    return *it;
}

std::string get_string(const json& obj, const char* key, const std::string& where) {
    const json& v = member(obj, key, where);
    if (!v.is_string()) schema(where, std::string("'") + key + "' must be a string");
    return v.get<std::string>();
}

bool get_bool(const json& obj, const char* key, const std::string& where) {
    const json& v = member(obj, key, where);
    if (!v.is_boolean()) schema(where, std::string("'") + key + "' must be a boolean");
    return v.get<bool>();
}

std::optional<std::string> get_optional_string(const json& obj, const char* key,
                                               const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) schema(where, std::string("'") + key + "' must be a string or null");
    return it->get<std::string>();
}

const json& get_array(const json& obj, const char* key, const std::string& where) {
    const json& v = member(obj, key, where);
    if (!v.is_array()) schema(where, std::string("'") + key + "' must be an array");
    return v;
}

std::vector<std::string> get_string_list(const json& obj, const char* key, const std::string& where) {
    std::vector<std::string> out;
    for (const auto& v : get_array(obj, key, where)) {
        if (!v.is_string()) schema(where, std::string("'") + key + "' must hold strings");
        out.push_back(v.get<std::string>());
    }
    return out;
}

Visibility get_visibility(const json& obj, const std::string& where) {
    auto v = parse_visibility(get_string(obj, "visibility", where));
    if (!v) schema(where, "unknown visibility");
    return *v;
}

json optional_json(const std::optional<std::string>& v) {
    return v ? json(*v) : json(nullptr);
}

json to_json(const Artifact& a) {
    json fields = json::array();
    for (const auto& f : a.fields) {
        fields.push_back({{"name", f.name},
                          {"declaredType", f.declaredType},
                          {"elementType", optional_json(f.elementType)},
                          {"visibility", to_string(f.visibility)},
                          {"isStatic", f.isStatic},
                          {"initializedWithNew", f.initializedWithNew}});
    }
    json methods = json::array();
    for (const auto& m : a.methods) {
        json inv = json::array();
        for (const auto& i : m.invocations) {
            inv.push_back({{"target", i.target}, {"signature", i.signature}});
        }
        json ins = json::array();
        for (const auto& i : m.instantiations) {
            ins.push_back({{"target", i.target}, {"guard", to_string(i.guard)}});
        }
        methods.push_back({{"name", m.name},
                           {"signature", m.signature},
                           {"isConstructor", m.isConstructor},
                           {"visibility", to_string(m.visibility)},
                           {"isStatic", m.isStatic},
                           {"returnType", optional_json(m.returnType)},
                           {"paramTypes", m.paramTypes},
                           {"invocations", std::move(inv)},
                           {"instantiations", std::move(ins)},
                           {"usesStaticFlagGuard", m.usesStaticFlagGuard}});
    }
    return {{"id", a.id},
            {"kind", to_string(a.kind)},
            {"isFinal", a.isFinal},
            {"extends", a.extends},
            {"implements", a.implements},
            {"fields", std::move(fields)},
            {"methods", std::move(methods)}};
}

Artifact artifact_from_json(const json& j, std::size_t position) {
    if (!j.is_object()) schema("artifacts[" + std::to_string(position) + "]", "must be an object");
    Artifact a;
    a.id = get_string(j, "id", "artifacts[" + std::to_string(position) + "]");
    const std::string& where = a.id;
    auto kind = parse_artifact_kind(get_string(j, "kind", where));
    if (!kind) schema(where, "unknown kind");
    a.kind = *kind;
    a.isFinal = get_bool(j, "isFinal", where);
    a.extends = get_string_list(j, "extends", where);
    a.implements = get_string_list(j, "implements", where);
    for (const auto& f : get_array(j, "fields", where)) {
        if (!f.is_object()) schema(where, "field must be an object");
        FieldFact fact;
        fact.name = get_string(f, "name", where);
        const std::string fw = where + "." + fact.name;
        fact.declaredType = get_string(f, "declaredType", fw);
        fact.elementType = get_optional_string(f, "elementType", fw);
        fact.visibility = get_visibility(f, fw);
        fact.isStatic = get_bool(f, "isStatic", fw);
        fact.initializedWithNew = get_bool(f, "initializedWithNew", fw);
        a.fields.push_back(std::move(fact));
    }
    for (const auto& m : get_array(j, "methods", where)) {
        if (!m.is_object()) schema(where, "method must be an object");
        MethodFact fact;
        fact.signature = get_string(m, "signature", where);
        const std::string mw = where + "#" + fact.signature;
        fact.name = get_string(m, "name", mw);
        fact.isConstructor = get_bool(m, "isConstructor", mw);
        fact.visibility = get_visibility(m, mw);
        fact.isStatic = get_bool(m, "isStatic", mw);
        fact.returnType = get_optional_string(m, "returnType", mw);
        fact.paramTypes = get_string_list(m, "paramTypes", mw);
        for (const auto& i : get_array(m, "invocations", mw)) {
            if (!i.is_object()) schema(mw, "invocation must be an object");
            fact.invocations.push_back({get_string(i, "target", mw), get_string(i, "signature", mw)});
        }
        for (const auto& i : get_array(m, "instantiations", mw)) {
            if (!i.is_object()) schema(mw, "instantiation must be an object");
            auto guard = parse_guard(get_string(i, "guard", mw));
            if (!guard) schema(mw, "unknown guard");
            fact.instantiations.push_back({get_string(i, "target", mw), *guard});
        }
        fact.usesStaticFlagGuard = get_bool(m, "usesStaticFlagGuard", mw);
        a.methods.push_back(std::move(fact));
    }
    return a;
}

} // namespace

std::string facts_to_json(const CodeFactsGraph& graph) {
    json arts = json::array();
    for (const auto& a : graph.artifacts()) {
        arts.push_back(to_json(a));
    }
    json doc = {{"version", 1}, {"artifacts", std::move(arts)}};
    return doc.dump(2) + "\n";
}

CodeFactsGraph facts_from_json(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw FactsError(FactsErrc::MalformedJson, std::string("malformed facts JSON: ") + e.what());
    }
    if (!doc.is_object()) schema("<root>", "must be an object");
    const json& version = member(doc, "version", "<root>");
    if (!version.is_number_integer()) schema("<root>", "'version' must be an integer");
    if (version.get<int>() != 1) {
        throw FactsError(FactsErrc::UnsupportedVersion,
                         "unsupported facts version " + version.dump());
    }
    std::vector<Artifact> artifacts;
    std::size_t position = 0;
    for (const auto& a : get_array(doc, "artifacts", "<root>")) {
        artifacts.push_back(artifact_from_json(a, position++));
    }
    return CodeFactsGraph(std::move(artifacts));
}

void save_facts(const CodeFactsGraph& graph, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw FactsError(FactsErrc::Io, "cannot write '" + path.string() + "'");
    }
    out << facts_to_json(graph);
}

CodeFactsGraph load_facts(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw FactsError(FactsErrc::Io, "cannot read '" + path.string() + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return facts_from_json(buf.str());
}

} // namespace dpd
