#include "dpd/java_extractor.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "dpd/errors.hpp"
#include "java_syntax.hpp"

namespace dpd {

std::string ExtractionReport::to_json() const {
    nlohmann::json skipped = nlohmann::json::array();
    for (const auto& s : filesSkipped) skipped.push_back({{"path", s.path}, {"reason", s.reason}});
    nlohmann::json doc = {{"files_parsed", filesParsed}, {"files_skipped", std::move(skipped)}};
    return doc.dump(2) + "\n";
}

namespace {

using namespace java;

const std::string kObject = "Object";

bool is_boolean(const std::optional<ArtifactId>& id) {
    return id && (*id == "boolean" || *id == "Boolean" || *id == "java.lang.Boolean");
}

std::string simple_name(const std::string& id) {
    const auto dot = id.rfind('.');
    return dot == std::string::npos ? id : id.substr(dot + 1);
}

std::string signature_part(const TypeRef& t, bool qualified) {
    std::string s = qualified ? t.text() : t.simple();
    for (int i = 0; i < t.dims; ++i) s += "[]";
    return s;
}

struct FieldInfo {
    const FieldDecl* decl = nullptr;
    TypeVal type;
};

struct MethodInfo {
    const MethodDecl* decl = nullptr;
    std::string signature;
    TypeVal ret;
    std::vector<ArtifactId> params;
};

struct TypeInfo {
    const FileUnit* file = nullptr;
    int local = -1;
    const TypeDecl& decl() const { return file->types[static_cast<std::size_t>(local)]; }
    std::vector<ArtifactId> supers;  // extends then implements
    std::vector<FieldInfo> fields;
    std::vector<MethodInfo> methods;
};

struct Context {
    const FileUnit* file = nullptr;
    int type = -1;
    const MethodDecl* method = nullptr;
};

class Extractor {
public:
    explicit Extractor(const std::vector<std::string>& containers) : containers_(containers) {}

    bool known(const std::string& id) const { return types_.count(id) > 0; }
    const TypeInfo& info(const std::string& id) const { return types_.at(id); }
    TypeInfo& info(const std::string& id) { return types_.at(id); }

    std::string external(const std::string& name) {
        externals_.insert(name);
        return name;
    }

    // Registers all declared types of a parsed file. Returns the first
    // conflicting id, if any (the file is then rejected as a whole).
    std::optional<std::string> add_file(const FileUnit& unit) {
        for (const auto& d : unit.types) {
            if (known(d.id)) return d.id;
        }
        for (std::size_t i = 0; i < unit.types.size(); ++i) {
            TypeInfo ti;
            ti.file = &unit;
            ti.local = static_cast<int>(i);
            types_.emplace(unit.types[i].id, std::move(ti));
        }
        files_.push_back(&unit);
        return std::nullopt;
    }

    std::optional<std::string> resolve_simple(const Context& ctx, const std::string& name) const;
    ArtifactId resolve_id(const Context& ctx, const TypeRef& t);
    TypeVal resolve(const Context& ctx, const TypeRef& t);

    void resolve_headers();
    std::vector<Artifact> analyze(ExtractionReport& report);

    struct Found {
        const TypeInfo* owner = nullptr;
        const MethodInfo* method = nullptr;
    };
    Found lookup_method(const std::string& typeId, const std::string& name,
                        const std::vector<Val>& args) const;
    const FieldInfo* lookup_field(const std::string& typeId, const std::string& name,
                                  std::string* owner = nullptr) const;
    std::optional<std::string> external_ancestor(const std::string& typeId) const;

    std::vector<std::string> bfs_supertypes(const std::string& typeId) const;

private:
    const TypeParam* type_param(const Context& ctx, const std::string& name) const;

    std::vector<std::string> containers_;
    std::map<std::string, TypeInfo> types_;
    std::vector<const FileUnit*> files_;
    std::set<std::string> externals_;
};

std::optional<std::string> Extractor::resolve_simple(const Context& ctx, const std::string& name) const {
    const FileUnit& f = *ctx.file;
    for (int i = ctx.type; i >= 0; i = f.types[static_cast<std::size_t>(i)].outer) {
        const TypeDecl& d = f.types[static_cast<std::size_t>(i)];
        if (d.simpleName == name) return d.id;
        for (int n : d.nested) {
            if (f.types[static_cast<std::size_t>(n)].simpleName == name) {
                return f.types[static_cast<std::size_t>(n)].id;
            }
        }
    }
    for (const auto& imp : f.singleImports) {
        if (simple_name(imp) == name) return imp;
    }
    const std::string local = f.package.empty() ? name : f.package + "." + name;
    if (known(local)) return local;
    for (const auto& w : f.wildcardImports) {
        if (known(w + "." + name)) return w + "." + name;
    }
    if (known(name)) return name;
    return std::nullopt;
}

const TypeParam* Extractor::type_param(const Context& ctx, const std::string& name) const {
    if (ctx.method) {
        for (const auto& tp : ctx.method->typeParams) {
            if (tp.name == name) return &tp;
        }
    }
    const FileUnit& f = *ctx.file;
    for (int i = ctx.type; i >= 0; i = f.types[static_cast<std::size_t>(i)].outer) {
        for (const auto& tp : f.types[static_cast<std::size_t>(i)].typeParams) {
            if (tp.name == name) return &tp;
        }
    }
    return nullptr;
}

ArtifactId Extractor::resolve_id(const Context& ctx, const TypeRef& t) {
    if (t.primitive) return external(t.parts.front());
    if (t.parts.size() == 1) {
        if (const TypeParam* tp = type_param(ctx, t.parts.front())) {
            if (!tp->bound) return external(kObject);
            // Bounds may mention the variable itself (T extends Comparable<T>);
            // only the raw bound name matters here.
            TypeRef bound = *tp->bound;
            bound.args.clear();
            bound.dims = 0;
            if (bound.parts.size() == 1 && bound.parts.front() == tp->name) return external(kObject);
            return resolve_id(ctx, bound);
        }
    }
    if (auto head = resolve_simple(ctx, t.parts.front())) {
        std::string id = *head;
        bool ok = true;
        for (std::size_t i = 1; i < t.parts.size() && ok; ++i) {
            const std::string next = id + "." + t.parts[i];
            if (known(next) || !known(id)) {
                id = next;
            } else {
                ok = false;
            }
        }
        if (ok) return known(id) ? id : external(id);
    }
    const std::string text = t.text();
    if (known(text)) return text;
    return external(text);
}

TypeVal Extractor::resolve(const Context& ctx, const TypeRef& t) {
    if (t.dims > 0) {
        TypeRef base = t;
        base.dims = 0;
        return TypeVal{external(std::string(kArrayMarker)), resolve_id(ctx, base)};
    }
    TypeVal tv{resolve_id(ctx, t), std::nullopt};
    const bool container =
        std::find(containers_.begin(), containers_.end(), t.simple()) != containers_.end();
    if (container && !t.args.empty()) tv.elem = resolve_id(ctx, t.args.back());
    return tv;
}

void Extractor::resolve_headers() {
    for (auto& [id, ti] : types_) {
        const TypeDecl& d = ti.decl();
        Context ctx{ti.file, ti.local, nullptr};
        for (const auto& e : d.extends) {
            TypeRef raw = e;
            raw.args.clear();
            ti.supers.push_back(resolve_id(ctx, raw));
        }
        for (const auto& e : d.implements) {
            TypeRef raw = e;
            raw.args.clear();
            ti.supers.push_back(resolve_id(ctx, raw));
        }
        for (const auto& f : d.fields) ti.fields.push_back({&f, resolve(ctx, f.type)});
        std::set<std::string> seen;
        for (const auto& m : d.methods) {
            Context mctx{ti.file, ti.local, &m};
            MethodInfo mi;
            mi.decl = &m;
            std::string params;
            for (const auto& p : m.params) {
                if (!params.empty()) params += ",";
                params += signature_part(p.type, false);
                TypeVal tv = resolve(mctx, p.type);
                mi.params.push_back(p.type.dims > 0 ? *tv.elem : *tv.id);
            }
            mi.signature = m.name + "(" + params + ")";
            if (!seen.insert(mi.signature).second) {
                // Same simple parameter names from different packages.
                params.clear();
                for (const auto& p : m.params) {
                    if (!params.empty()) params += ",";
                    params += signature_part(p.type, true);
                }
                mi.signature = m.name + "(" + params + ")";
                if (!seen.insert(mi.signature).second) continue;
            }
            if (m.ret) mi.ret = resolve(mctx, *m.ret);
            ti.methods.push_back(std::move(mi));
        }
    }
}

std::vector<std::string> Extractor::bfs_supertypes(const std::string& typeId) const {
    std::vector<std::string> order;
    std::set<std::string> seen{typeId};
    std::deque<std::string> queue{typeId};
    while (!queue.empty()) {
        const std::string cur = queue.front();
        queue.pop_front();
        order.push_back(cur);
        auto it = types_.find(cur);
        if (it == types_.end()) continue;
        for (const auto& s : it->second.supers) {
            if (seen.insert(s).second) queue.push_back(s);
        }
    }
    return order;
}

Extractor::Found Extractor::lookup_method(const std::string& typeId, const std::string& name,
                                          const std::vector<Val>& args) const {
    const std::size_t n = args.size();
    for (const auto& t : bfs_supertypes(typeId)) {
        auto it = types_.find(t);
        if (it == types_.end()) continue;
        const MethodInfo* best = nullptr;
        std::tuple<int, int> bestScore{-1, -1};
        for (const auto& m : it->second.methods) {
            if (m.decl->ctor || m.decl->name != name) continue;
            const std::size_t k = m.params.size();
            const bool exact = k == n;
            if (!exact && !(m.decl->varargs && n + 1 >= k)) continue;
            int matches = 0;
            for (std::size_t i = 0; i < std::min(n, k); ++i) {
                if (args[i].type.id && *args[i].type.id == m.params[i]) ++matches;
            }
            const std::tuple<int, int> score{exact ? 1 : 0, matches};
            if (!best || score > bestScore ||
                (score == bestScore && m.signature < best->signature)) {
                best = &m;
                bestScore = score;
            }
        }
        if (best) return {&it->second, best};
    }
    return {};
}

const FieldInfo* Extractor::lookup_field(const std::string& typeId, const std::string& name,
                                         std::string* owner) const {
    for (const auto& t : bfs_supertypes(typeId)) {
        auto it = types_.find(t);
        if (it == types_.end()) continue;
        for (const auto& f : it->second.fields) {
            if (f.decl->name == name) {
                if (owner) *owner = t;
                return &f;
            }
        }
    }
    return nullptr;
}

std::optional<std::string> Extractor::external_ancestor(const std::string& typeId) const {
    for (const auto& t : bfs_supertypes(typeId)) {
        if (t != typeId && !known(t)) return t;
    }
    return std::nullopt;
}

std::string wildcard_signature(const std::string& name, std::size_t arity) {
    std::string s = name + "(";
    for (std::size_t i = 0; i < arity; ++i) s += i ? ",?" : "?";
    return s + ")";
}

bool capitalized(const std::string& s) {
    return !s.empty() && std::isupper(static_cast<unsigned char>(s.front()));
}

// Semantic analysis of one method body (or synthetic initializer method).
class MethodSema final : public Sema {
public:
    MethodSema(Extractor& ex, Context ctx, MethodFact& out, bool ctorOrInit,
               std::set<const FieldDecl*>& initNew)
        : ex_(ex), ctx_(ctx), self_(ctx.file->types[static_cast<std::size_t>(ctx.type)].id),
          out_(out), ctorOrInit_(ctorOrInit), initNew_(initNew) {
        scopes_.emplace_back();
    }

    Val name(const std::string& ident) override {
        for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
            auto f = it->find(ident);
            if (f != it->end()) return value(f->second);
        }
        // Fields: own hierarchy first, then enclosing types.
        const FileUnit& file = *ctx_.file;
        for (int i = ctx_.type; i >= 0; i = file.types[static_cast<std::size_t>(i)].outer) {
            std::string owner;
            if (const FieldInfo* f = ex_.lookup_field(file.types[static_cast<std::size_t>(i)].id, ident, &owner)) {
                return field_value(*f, owner);
            }
        }
        if (auto id = ex_.resolve_simple(ctx_, ident)) {
            if (!ex_.known(*id)) ex_.external(*id);
            return type_name(*id);
        }
        if (capitalized(ident)) return type_name(ex_.external(ident));
        Val v;
        v.kind = Val::Kind::Package;
        v.qualified = ident;
        return v;
    }

    Val this_ref(const std::string* qualifier) override {
        return value(TypeVal{qualifier && !qualifier->empty() ? *qualifier : self_, std::nullopt});
    }

    Val super_ref() override {
        const auto& supers = ex_.info(self_).supers;
        const TypeDecl& d = ex_.info(self_).decl();
        Val v = value(TypeVal{d.extends.empty() || supers.empty() ? ex_.external(kObject) : supers.front(),
                              std::nullopt});
        v.isSuper = true;
        return v;
    }

    Val member(const Val& recv, const std::string& name) override {
        switch (recv.kind) {
        case Val::Kind::Value:
        case Val::Kind::TypeName: {
            if (!recv.type.id || !ex_.known(*recv.type.id)) return {};
            std::string owner;
            if (const FieldInfo* f = ex_.lookup_field(*recv.type.id, name, &owner)) {
                return field_value(*f, owner);
            }
            if (recv.kind == Val::Kind::TypeName && ex_.known(*recv.type.id + "." + name)) {
                return type_name(*recv.type.id + "." + name);
            }
            return {};
        }
        case Val::Kind::Package: {
            const std::string q = recv.qualified + "." + name;
            if (ex_.known(q)) return type_name(q);
            if (capitalized(name)) return type_name(ex_.external(q));
            Val v;
            v.kind = Val::Kind::Package;
            v.qualified = q;
            return v;
        }
        case Val::Kind::Unknown:
            break;
        }
        return {};
    }

    Val call(const Val* recv, const std::string& name, const std::vector<Val>& args) override {
        if (!recv) {
            const FileUnit& file = *ctx_.file;
            for (int i = ctx_.type; i >= 0; i = file.types[static_cast<std::size_t>(i)].outer) {
                const auto& id = file.types[static_cast<std::size_t>(i)].id;
                auto found = ex_.lookup_method(id, name, args);
                if (found.method) return record(found);
            }
            for (int i = ctx_.type; i >= 0; i = file.types[static_cast<std::size_t>(i)].outer) {
                if (auto ext = ex_.external_ancestor(file.types[static_cast<std::size_t>(i)].id)) {
                    invoke(*ext, wildcard_signature(name, args.size()));
                    return {};
                }
            }
            return {};
        }
        if (recv->kind != Val::Kind::Value && recv->kind != Val::Kind::TypeName) return {};
        if (!recv->type.id) return {};
        const std::string& id = *recv->type.id;
        if (id == kArrayMarker) return {};
        if (ex_.known(id)) {
            auto found = ex_.lookup_method(id, name, args);
            if (found.method) return record(found);
            const auto ext = ex_.external_ancestor(id);
            invoke(ext ? *ext : ex_.external(kObject), wildcard_signature(name, args.size()));
            return {};
        }
        if (!is_primitive(id)) invoke(ex_.external(id), wildcard_signature(name, args.size()));
        return {};
    }

    Val create(const TypeRef& type, bool array) override {
        if (array) {
            TypeRef arr = type;
            if (arr.dims == 0) arr.dims = 1;
            return value(ex_.resolve(ctx_, arr));
        }
        TypeRef raw = type;
        TypeVal tv = ex_.resolve(ctx_, raw);
        out_.instantiations.push_back({*tv.id, guards_.empty() ? Guard::None : guards_.back()});
        return value(tv);
    }

    Val string_literal() override {
        auto id = ex_.resolve_simple(ctx_, "String");
        return value(TypeVal{id && ex_.known(*id) ? *id : ex_.external("String"), std::nullopt});
    }

    void declare(const std::string& name, const TypeVal& type) override { scopes_.back()[name] = type; }

    TypeVal resolve(const TypeRef& type) override { return ex_.resolve(ctx_, type); }

    void assign_new(const Val& lhs) override {
        if (ctorOrInit_ && lhs.ownField) initNew_.insert(lhs.ownField);
    }

    void push_scope() override { scopes_.emplace_back(); }
    void pop_scope() override { scopes_.pop_back(); }
    void push_guard(Guard g) override { guards_.push_back(g); }
    void pop_guard() override { guards_.pop_back(); }
    void enter_condition() override { ++condition_; }
    void leave_condition() override { --condition_; }

private:
    static Val value(const TypeVal& tv) {
        Val v;
        v.kind = tv.id ? Val::Kind::Value : Val::Kind::Unknown;
        v.type = tv;
        return v;
    }

    static Val type_name(const std::string& id) {
        Val v;
        v.kind = Val::Kind::TypeName;
        v.type.id = id;
        v.qualified = id;
        return v;
    }

    Val field_value(const FieldInfo& f, const std::string& owner) {
        Val v = value(f.type);
        if (owner == self_) {
            v.ownField = f.decl;
            if (condition_ > 0 && f.decl->isStatic && is_boolean(f.type.id)) out_.usesStaticFlagGuard = true;
        }
        return v;
    }

    void invoke(const std::string& target, std::string signature) {
        out_.invocations.push_back({target, std::move(signature)});
    }

    Val record(const Extractor::Found& found) {
        invoke(found.owner->decl().id, found.method->signature);
        return value(found.method->ret);
    }

    Extractor& ex_;
    Context ctx_;
    std::string self_;
    MethodFact& out_;
    bool ctorOrInit_;
    std::set<const FieldDecl*>& initNew_;
    std::vector<std::unordered_map<std::string, TypeVal>> scopes_;
    std::vector<Guard> guards_;
    int condition_ = 0;
};

std::vector<Artifact> Extractor::analyze(ExtractionReport& report) {
    std::vector<Artifact> out;
    for (auto& [id, ti] : types_) {
        const TypeDecl& d = ti.decl();
        const FileUnit& file = *ti.file;
        Artifact a;
        a.id = id;
        a.kind = d.kind;
        a.isFinal = d.isFinal;
        const std::size_t nExt = d.extends.size();
        a.extends.assign(ti.supers.begin(), ti.supers.begin() + static_cast<std::ptrdiff_t>(nExt));
        a.implements.assign(ti.supers.begin() + static_cast<std::ptrdiff_t>(nExt), ti.supers.end());

        std::set<const FieldDecl*> initNew;
        for (const auto& f : d.fields) {
            if (f.has_init() && file.tokens[f.initBegin].text == "new") initNew.insert(&f);
        }

        auto run = [&](MethodFact& fact, const MethodDecl* decl, bool ctorOrInit, auto&& body) {
            Context ctx{&file, ti.local, decl};
            MethodSema sema(*this, ctx, fact, ctorOrInit, initNew);
            if (decl) {
                for (const auto& p : decl->params) sema.declare(p.name, resolve(ctx, p.type));
            }
            try {
                body(sema);
            } catch (const ParseError& e) {
                fact.invocations.clear();
                fact.instantiations.clear();
                fact.usesStaticFlagGuard = false;
                report.degradedMethods.push_back(id + "#" + fact.signature + ": " + e.what());
            }
        };

        for (const auto& mi : ti.methods) {
            const MethodDecl& m = *mi.decl;
            MethodFact fact;
            fact.name = m.name;
            fact.signature = mi.signature;
            fact.isConstructor = m.ctor;
            fact.visibility = m.vis;
            fact.isStatic = m.isStatic;
            if (m.ret) fact.returnType = mi.ret.elem && m.ret->dims > 0 ? mi.ret.elem : mi.ret.id;
            fact.paramTypes = mi.params;
            if (m.has_body()) {
                run(fact, &m, m.ctor, [&](MethodSema& s) {
                    BodyParser bp(file.tokens, m.bodyBegin, &s);
                    bp.block();
                });
            }
            a.methods.push_back(std::move(fact));
        }

        // Field initializers and initializer blocks go to synthetic methods.
        for (const bool isStatic : {true, false}) {
            MethodFact fact;
            fact.name = isStatic ? "<clinit>" : "<init>";
            fact.signature = fact.name + "()";
            fact.visibility = Visibility::Private;
            fact.isStatic = isStatic;
            for (const auto& f : d.fields) {
                if (f.isStatic != isStatic || !f.has_init()) continue;
                run(fact, nullptr, true, [&](MethodSema& s) {
                    BodyParser bp(file.tokens, f.initBegin, &s);
                    bp.variable_initializer();
                });
            }
            for (const auto& b : d.inits) {
                if (b.isStatic != isStatic) continue;
                run(fact, nullptr, true, [&](MethodSema& s) {
                    BodyParser bp(file.tokens, b.begin, &s);
                    bp.block();
                });
            }
            if (!fact.invocations.empty() || !fact.instantiations.empty() || fact.usesStaticFlagGuard) {
                a.methods.push_back(std::move(fact));
            }
        }

        for (const auto& f : ti.fields) {
            FieldFact fact;
            fact.name = f.decl->name;
            fact.declaredType = *f.type.id;
            fact.elementType = f.type.elem;
            fact.visibility = f.decl->vis;
            fact.isStatic = f.decl->isStatic;
            fact.initializedWithNew = f.decl->enumConstant || initNew.count(f.decl) > 0;
            a.fields.push_back(std::move(fact));
        }
        out.push_back(std::move(a));
    }
    for (const auto& e : externals_) {
        if (known(e)) continue;
        Artifact a;
        a.id = e;
        a.kind = ArtifactKind::External;
        out.push_back(std::move(a));
    }
    return out;
}

} // namespace

ExtractionResult extract_sources(std::vector<SourceFile> files, const std::vector<std::string>& containerTypes) {
    std::sort(files.begin(), files.end(),
              [](const SourceFile& a, const SourceFile& b) { return a.path < b.path; });
    ExtractionReport report;
    std::deque<FileUnit> units;
    Extractor ex(containerTypes);
    for (auto& f : files) {
        FileUnit unit;
        unit.path = f.path;
        try {
            unit.tokens = lex(f.text);
            parse_declarations(unit);
        } catch (const ParseError& e) {
            report.filesSkipped.push_back({f.path, e.what()});
            continue;
        }
        units.push_back(std::move(unit));
        if (auto dup = ex.add_file(units.back())) {
            report.filesSkipped.push_back({f.path, "duplicate type '" + *dup + "'"});
            units.pop_back();
            continue;
        }
        ++report.filesParsed;
    }
    if (!files.empty() && report.filesParsed == 0) {
        std::string why = report.filesSkipped.front().path + ": " + report.filesSkipped.front().reason;
        throw ExtractError(ExtractErrc::NoParsableFiles,
                           "none of " + std::to_string(files.size()) + " source files could be parsed (" +
                               why + ")");
    }
    ex.resolve_headers();
    auto artifacts = ex.analyze(report);
    return {CodeFactsGraph(std::move(artifacts)), std::move(report)};
}

ExtractionResult extract_facts(const std::filesystem::path& sourceRoot,
                               const std::vector<std::string>& containerTypes) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (!fs::is_directory(sourceRoot, ec)) {
        throw ExtractError(ExtractErrc::MissingSourceRoot,
                           "source root '" + sourceRoot.string() + "' does not exist or is not a directory");
    }
    std::vector<SourceFile> files;
    for (const auto& entry : fs::recursive_directory_iterator(sourceRoot)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".java") continue;
        std::ifstream in(entry.path(), std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        files.push_back({fs::relative(entry.path(), sourceRoot).generic_string(), buf.str()});
    }
    return extract_sources(std::move(files), containerTypes);
}

} // namespace dpd
