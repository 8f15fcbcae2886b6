#include <algorithm>
#include <array>

#include "java_syntax.hpp"

namespace dpd::java {

std::string TypeRef::text() const {
    std::string out;
    for (const auto& p : parts) {
        if (!out.empty()) out += '.';
        out += p;
    }
    return out;
}

namespace {

bool tok_is(const std::vector<Token>& t, std::size_t i, std::string_view text) {
    if (i >= t.size()) return false;
    return (t[i].kind == Tok::Ident || t[i].kind == Tok::Punct) && t[i].text == text;
}

bool tok_ident(const std::vector<Token>& t, std::size_t i) {
    return i < t.size() && t[i].kind == Tok::Ident && !is_reserved(t[i].text);
}

std::size_t skip_balanced(const std::vector<Token>& t, std::size_t open) {
    int depth = 0;
    for (std::size_t i = open; i < t.size(); ++i) {
        const auto& s = t[i].text;
        if (t[i].kind != Tok::Punct) continue;
        if (s == "(" || s == "[" || s == "{") ++depth;
        if (s == ")" || s == "]" || s == "}") {
            if (--depth == 0) return i;
        }
    }
    throw ParseError("unbalanced brackets", t.empty() ? 0 : t.back().line);
}

std::size_t skip_annotation(const std::vector<Token>& t, std::size_t p) {
    // p at '@'
    ++p;
    if (!tok_ident(t, p)) return p;
    ++p;
    while (tok_is(t, p, ".") && tok_ident(t, p + 1)) p += 2;
    if (tok_is(t, p, "(")) p = skip_balanced(t, p) + 1;
    return p;
}

} // namespace

std::optional<std::vector<TypeRef>> parse_type_args(const std::vector<Token>& t, std::size_t& pos) {
    std::size_t p = pos;
    if (!tok_is(t, p, "<")) return std::nullopt;
    ++p;
    std::vector<TypeRef> args;
    if (tok_is(t, p, ">")) {
        pos = p + 1;
        return args;
    }
    while (true) {
        while (tok_is(t, p, "@")) p = skip_annotation(t, p);
        if (tok_is(t, p, "?")) {
            ++p;
            TypeRef object{{"Object"}, {}, 0, false};
            if (tok_is(t, p, "extends")) {
                ++p;
                auto bound = parse_type(t, p);
                if (!bound) return std::nullopt;
                args.push_back(*bound);
            } else if (tok_is(t, p, "super")) {
                ++p;
                if (!parse_type(t, p)) return std::nullopt;
                args.push_back(object);
            } else {
                args.push_back(object);
            }
        } else {
            auto arg = parse_type(t, p);
            if (!arg) return std::nullopt;
            args.push_back(*arg);
        }
        if (tok_is(t, p, ",")) {
            ++p;
            continue;
        }
        if (tok_is(t, p, ">")) {
            pos = p + 1;
            return args;
        }
        return std::nullopt;
    }
}

std::optional<TypeRef> parse_type(const std::vector<Token>& t, std::size_t& pos) {
    std::size_t p = pos;
    while (tok_is(t, p, "@") && !tok_is(t, p + 1, "interface")) p = skip_annotation(t, p);
    TypeRef ty;
    if (p < t.size() && t[p].kind == Tok::Ident && is_primitive(t[p].text)) {
        ty.parts.push_back(t[p++].text);
        ty.primitive = true;
    } else if (tok_ident(t, p)) {
        ty.parts.push_back(t[p++].text);
        if (tok_is(t, p, "<")) {
            auto args = parse_type_args(t, p);
            if (!args) return std::nullopt;
            ty.args = std::move(*args);
        }
        while (tok_is(t, p, ".") && tok_ident(t, p + 1)) {
            ty.parts.push_back(t[p + 1].text);
            p += 2;
            ty.args.clear();
            if (tok_is(t, p, "<")) {
                auto args = parse_type_args(t, p);
                if (!args) return std::nullopt;
                ty.args = std::move(*args);
            }
        }
    } else {
        return std::nullopt;
    }
    while (tok_is(t, p, "[") && tok_is(t, p + 1, "]")) {
        ++ty.dims;
        p += 2;
    }
    pos = p;
    return ty;
}

// ---------------------------------------------------------------------------
// Declarations

namespace {

struct Modifiers {
    std::optional<Visibility> vis;
    bool isStatic = false;
    bool isAbstract = false;
    bool isFinal = false;
};

class DeclParser {
public:
    explicit DeclParser(FileUnit& u) : u_(u), t_(u.tokens) {}

    void run() {
        skip_annotations();
        if (at("package")) {
            ++p_;
            u_.package = qualified_name();
            expect(";");
        }
        while (at("import")) {
            ++p_;
            const bool isStatic = at("static");
            if (isStatic) ++p_;
            std::string name = qualified_name();
            bool wildcard = false;
            if (at(".") && at("*", 1)) {
                p_ += 2;
                wildcard = true;
            }
            expect(";");
            if (isStatic) continue;
            (wildcard ? u_.wildcardImports : u_.singleImports).push_back(std::move(name));
        }
        while (t_[p_].kind != Tok::End) {
            if (at(";")) {
                ++p_;
                continue;
            }
            type_declaration(-1, modifiers());
        }
    }

private:
    bool at(std::string_view s, std::size_t k = 0) const { return tok_is(t_, p_ + k, s); }

    [[noreturn]] void fail(const std::string& what) const {
        const Token& tk = t_[std::min(p_, t_.size() - 1)];
        throw ParseError(what + " near '" + tk.text + "'", tk.line);
    }

    void expect(std::string_view s) {
        if (!at(s)) fail("expected '" + std::string(s) + "'");
        ++p_;
    }

    std::string ident() {
        if (!tok_ident(t_, p_)) fail("expected identifier");
        return t_[p_++].text;
    }

    std::string qualified_name() {
        std::string out = ident();
        while (at(".") && tok_ident(t_, p_ + 1)) {
            out += "." + t_[p_ + 1].text;
            p_ += 2;
        }
        return out;
    }

    TypeRef type() {
        auto ty = parse_type(t_, p_);
        if (!ty) fail("expected type");
        return *ty;
    }

    void skip_annotations() {
        while (at("@") && !at("interface", 1)) p_ = skip_annotation(t_, p_);
    }

    Modifiers modifiers() {
        Modifiers m;
        while (true) {
            if (at("@") && !at("interface", 1)) {
                p_ = skip_annotation(t_, p_);
            } else if (at("public")) {
                m.vis = Visibility::Public, ++p_;
            } else if (at("protected")) {
                m.vis = Visibility::Protected, ++p_;
            } else if (at("private")) {
                m.vis = Visibility::Private, ++p_;
            } else if (at("static")) {
                m.isStatic = true, ++p_;
            } else if (at("abstract")) {
                m.isAbstract = true, ++p_;
            } else if (at("final")) {
                m.isFinal = true, ++p_;
            } else if (at("native") || at("synchronized") || at("transient") || at("volatile") ||
                       at("strictfp") || at("default") || (at("sealed") && tok_ident(t_, p_ + 1))) {
                ++p_;
            } else if (at("non") && at("-", 1) && at("sealed", 2)) {
                p_ += 3;
            } else {
                return m;
            }
        }
    }

    bool at_type_keyword() const {
        return at("class") || at("interface") || at("enum") || (at("@") && at("interface", 1)) ||
               (at("record") && tok_ident(t_, p_ + 1) && (at("(", 2) || at("<", 2)));
    }

    std::vector<TypeParam> type_params() {
        std::vector<TypeParam> out;
        if (!at("<")) return out;
        ++p_;
        while (true) {
            skip_annotations();
            TypeParam tp;
            tp.name = ident();
            if (at("extends")) {
                ++p_;
                tp.bound = type();
                while (at("&")) {
                    ++p_;
                    type();
                }
            }
            out.push_back(std::move(tp));
            if (at(",")) {
                ++p_;
                continue;
            }
            expect(">");
            return out;
        }
    }

    std::vector<TypeRef> type_list() {
        std::vector<TypeRef> out{type()};
        while (at(",")) {
            ++p_;
            out.push_back(type());
        }
        return out;
    }

    void type_declaration(int outer, const Modifiers& mods) {
        TypeDecl d;
        bool isInterface = false, isEnum = false, isRecord = false;
        if (at("class")) {
            d.kind = mods.isAbstract ? ArtifactKind::AbsClass : ArtifactKind::Class;
        } else if (at("interface")) {
            d.kind = ArtifactKind::Intface;
            isInterface = true;
        } else if (at("@") && at("interface", 1)) {
            ++p_;
            d.kind = ArtifactKind::Intface;
            isInterface = true;
        } else if (at("enum")) {
            d.kind = ArtifactKind::Enum;
            isEnum = true;
        } else if (at("record")) {
            d.kind = ArtifactKind::Class;
            isRecord = true;
        } else {
            fail("expected type declaration");
        }
        ++p_;
        d.simpleName = ident();
        d.isFinal = mods.isFinal || isEnum || isRecord;
        d.outer = outer;
        if (outer >= 0) {
            d.id = u_.types[static_cast<std::size_t>(outer)].id + "." + d.simpleName;
        } else {
            d.id = u_.package.empty() ? d.simpleName : u_.package + "." + d.simpleName;
        }
        d.typeParams = type_params();
        if (isRecord) {
            expect("(");
            while (!at(")")) {
                modifiers();
                FieldDecl f;
                f.type = type();
                if (at("...")) {
                    ++p_;
                    ++f.type.dims;
                }
                f.name = ident();
                f.vis = Visibility::Private;
                d.fields.push_back(std::move(f));
                if (at(",")) ++p_;
                else break;
            }
            expect(")");
        }
        if (at("extends")) {
            ++p_;
            d.extends = isInterface ? type_list() : std::vector<TypeRef>{type()};
        }
        if (at("implements")) {
            ++p_;
            d.implements = type_list();
        }
        if (at("permits")) {
            ++p_;
            type_list();
        }
        const int self = static_cast<int>(u_.types.size());
        u_.types.push_back(std::move(d));
        if (outer >= 0) u_.types[static_cast<std::size_t>(outer)].nested.push_back(self);
        body(self, isInterface, isEnum);
    }

    TypeDecl& decl(int i) { return u_.types[static_cast<std::size_t>(i)]; }

    void enum_constants(int self) {
        while (!at(";") && !at("}")) {
            skip_annotations();
            FieldDecl f;
            f.name = ident();
            f.type.parts = {decl(self).simpleName};
            f.vis = Visibility::Public;
            f.isStatic = true;
            f.enumConstant = true;
            if (at("(")) p_ = skip_balanced(t_, p_) + 1;
            if (at("{")) p_ = skip_balanced(t_, p_) + 1;
            decl(self).fields.push_back(std::move(f));
            if (at(",")) ++p_;
            else break;
        }
        if (at(";")) ++p_;
    }

    void body(int self, bool isInterface, bool isEnum) {
        expect("{");
        if (isEnum) enum_constants(self);
        while (!at("}")) {
            if (t_[p_].kind == Tok::End) fail("unexpected end of file");
            if (at(";")) {
                ++p_;
                continue;
            }
            if (at("{") || (at("static") && at("{", 1))) {
                InitBlock b;
                b.isStatic = at("static");
                if (b.isStatic) ++p_;
                b.begin = p_;
                p_ = skip_balanced(t_, p_) + 1;
                b.end = p_;
                decl(self).inits.push_back(b);
                continue;
            }
            const Modifiers mods = modifiers();
            if (at_type_keyword()) {
                type_declaration(self, mods);
                continue;
            }
            member(self, mods, isInterface, isEnum);
        }
        expect("}");
    }

    void member(int self, const Modifiers& mods, bool isInterface, bool isEnum) {
        const int line = t_[p_].line;
        auto typeParams = type_params();
        const bool isCtor = tok_ident(t_, p_) && t_[p_].text == decl(self).simpleName && at("(", 1);
        // Compact record constructor: `Name {`.
        if (tok_ident(t_, p_) && t_[p_].text == decl(self).simpleName && at("{", 1)) {
            ++p_;
            MethodDecl m;
            m.name = decl(self).simpleName;
            m.ctor = true;
            m.vis = mods.vis.value_or(Visibility::Package);
            m.line = line;
            m.bodyBegin = p_;
            p_ = skip_balanced(t_, p_) + 1;
            m.bodyEnd = p_;
            decl(self).methods.push_back(std::move(m));
            return;
        }
        MethodDecl m;
        m.line = line;
        m.typeParams = std::move(typeParams);
        if (isCtor) {
            m.name = ident();
            m.ctor = true;
        } else {
            TypeRef ty = type();
            const std::string name = ident();
            if (!at("(")) {
                field_declarators(self, mods, isInterface, std::move(ty), name);
                return;
            }
            m.name = name;
            if (!(ty.primitive && ty.parts.front() == "void" && ty.dims == 0)) m.ret = std::move(ty);
        }
        const Visibility defaultVis =
            isInterface ? Visibility::Public : (isEnum && m.ctor ? Visibility::Private : Visibility::Package);
        m.vis = mods.vis.value_or(defaultVis);
        m.isStatic = mods.isStatic;
        expect("(");
        while (!at(")")) {
            modifiers();
            ParamDecl pd;
            pd.type = type();
            if (at("...")) {
                ++p_;
                ++pd.type.dims;
                m.varargs = true;
            }
            if (at("this")) {
                // receiver parameter
                ++p_;
                if (at(",")) ++p_;
                continue;
            }
            if (tok_ident(t_, p_) && at(".", 1) && at("this", 2)) {
                p_ += 3;
                if (at(",")) ++p_;
                continue;
            }
            pd.name = ident();
            while (at("[") && at("]", 1)) {
                p_ += 2;
                ++pd.type.dims;
            }
            m.params.push_back(std::move(pd));
            if (at(",")) ++p_;
            else break;
        }
        expect(")");
        while (at("[") && at("]", 1)) {
            p_ += 2;
            if (m.ret) ++m.ret->dims;
        }
        if (at("throws")) {
            ++p_;
            type_list();
        }
        if (at("default")) {
            ++p_;
            BodyParser bp(t_, p_, nullptr);
            bp.variable_initializer();
            p_ = bp.pos();
            expect(";");
        } else if (at("{")) {
            m.bodyBegin = p_;
            p_ = skip_balanced(t_, p_) + 1;
            m.bodyEnd = p_;
        } else {
            expect(";");
        }
        decl(self).methods.push_back(std::move(m));
    }

    void field_declarators(int self, const Modifiers& mods, bool isInterface, TypeRef ty, std::string name) {
        while (true) {
            FieldDecl f;
            f.name = std::move(name);
            f.type = ty;
            while (at("[") && at("]", 1)) {
                p_ += 2;
                ++f.type.dims;
            }
            f.vis = mods.vis.value_or(isInterface ? Visibility::Public : Visibility::Package);
            f.isStatic = mods.isStatic || isInterface;
            if (at("=")) {
                ++p_;
                f.initBegin = p_;
                BodyParser bp(t_, p_, nullptr);
                bp.variable_initializer();
                p_ = bp.pos();
                f.initEnd = p_;
            }
            decl(self).fields.push_back(std::move(f));
            if (!at(",")) break;
            ++p_;
            name = ident();
        }
        expect(";");
    }

    FileUnit& u_;
    const std::vector<Token>& t_;
    std::size_t p_ = 0;
};

} // namespace

void parse_declarations(FileUnit& unit) {
    DeclParser(unit).run();
}

// ---------------------------------------------------------------------------
// Bodies

namespace {

constexpr std::array<std::string_view, 26> kBinaryOps{
    "+",  "-",  "*",  "/",  "%",  "&",  "|",  "^",  "&&", "||", "==", "!=", "<",
    ">",  "<=", "<<", "=",  "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=",
};

bool is_assignment(std::string_view op) {
    return op == "=" || (op.size() >= 2 && op.back() == '=' && op != "==" && op != "!=" && op != "<=");
}

} // namespace

const Token& BodyParser::peek(std::size_t k) const {
    return t_[std::min(pos_ + k, t_.size() - 1)];
}

bool BodyParser::at(std::string_view text, std::size_t k) const { return tok_is(t_, pos_ + k, text); }

bool BodyParser::at_ident(std::size_t k) const { return tok_ident(t_, pos_ + k); }

const Token& BodyParser::take() {
    const Token& tk = peek();
    if (tk.kind == Tok::End) fail("unexpected end of input");
    ++pos_;
    return tk;
}

void BodyParser::fail(const std::string& what) const {
    throw ParseError(what + " near '" + peek().text + "'", peek().line);
}

void BodyParser::expect(std::string_view text) {
    if (!at(text)) fail("expected '" + std::string(text) + "'");
    ++pos_;
}

std::string BodyParser::ident() {
    if (!at_ident()) fail("expected identifier");
    return take().text;
}

std::size_t BodyParser::match_close(std::size_t open) const { return skip_balanced(t_, open); }

void BodyParser::skip_annotations() {
    while (at("@") && !at("interface", 1)) pos_ = skip_annotation(t_, pos_);
}

void BodyParser::skip_modifiers() {
    while (true) {
        if (at("@") && !at("interface", 1)) {
            skip_annotations();
        } else if (at("final") || at("abstract") || at("strictfp") ||
                   (at("static") && !at("{", 1)) || (at("sealed") && at_ident(1))) {
            ++pos_;
        } else if (at("non") && at("-", 1) && at("sealed", 2)) {
            pos_ += 3;
        } else {
            return;
        }
    }
}

void BodyParser::block() {
    expect("{");
    if (sema_) sema_->push_scope();
    while (!at("}")) {
        if (peek().kind == Tok::End) fail("unexpected end of block");
        statement();
    }
    ++pos_;
    if (sema_) sema_->pop_scope();
}

void BodyParser::condition() {
    expect("(");
    if (sema_) sema_->enter_condition();
    expression();
    if (sema_) sema_->leave_condition();
    expect(")");
}

void BodyParser::skip_local_type() {
    skip_modifiers();
    while (!at("{")) {
        if (peek().kind == Tok::End) fail("unterminated local type");
        if (at("(")) {
            pos_ = match_close(pos_) + 1;
        } else {
            ++pos_;
        }
    }
    pos_ = match_close(pos_) + 1;
}

void BodyParser::statement() {
    struct GuardScope {
        Sema* s;
        GuardScope(Sema* sema, Guard g) : s(sema) {
            if (s) s->push_guard(g);
        }
        ~GuardScope() {
            if (s) s->pop_guard();
        }
    };

    if (at("{")) return block();
    if (at(";")) {
        ++pos_;
        return;
    }
    if (at("if")) {
        ++pos_;
        GuardScope g(sema_, Guard::Conditional);
        condition();
        statement();
        if (at("else")) {
            ++pos_;
            statement();
        }
        return;
    }
    if (at("while")) {
        ++pos_;
        GuardScope g(sema_, Guard::Conditional);
        condition();
        statement();
        return;
    }
    if (at("do")) {
        ++pos_;
        {
            GuardScope g(sema_, Guard::Conditional);
            statement();
            expect("while");
            condition();
        }
        expect(";");
        return;
    }
    if (at("for")) {
        ++pos_;
        expect("(");
        if (sema_) sema_->push_scope();
        const std::size_t save = pos_;
        skip_modifiers();
        auto ty = parse_type(t_, pos_);
        if (ty && at_ident() && at(":", 1)) {
            const std::string name = ident();
            ++pos_;
            Val iter = expression();
            if (sema_) {
                TypeVal tv;
                if (ty->parts.size() == 1 && ty->parts[0] == "var" && ty->args.empty()) {
                    if (iter.type.elem) tv.id = iter.type.elem;
                } else {
                    tv = sema_->resolve(*ty);
                }
                sema_->declare(name, tv);
            }
        } else {
            pos_ = save;
            if (!at(";") && !try_local_declaration(false)) {
                expression();
                while (at(",")) {
                    ++pos_;
                    expression();
                }
            }
            expect(";");
            if (!at(";")) expression();
            expect(";");
            while (!at(")")) {
                expression();
                if (at(",")) ++pos_;
                else break;
            }
        }
        expect(")");
        statement();
        if (sema_) sema_->pop_scope();
        return;
    }
    if (at("try")) {
        ++pos_;
        {
            GuardScope g(sema_, Guard::ExceptionGuarded);
            if (sema_) sema_->push_scope();
            if (at("(")) {
                ++pos_;
                while (!at(")")) {
                    if (!try_local_declaration(false)) expression();
                    if (at(";")) ++pos_;
                    else break;
                }
                expect(")");
            }
            block();
            if (sema_) sema_->pop_scope();
        }
        while (at("catch")) {
            ++pos_;
            expect("(");
            if (sema_) sema_->push_scope();
            skip_modifiers();
            auto first = parse_type(t_, pos_);
            if (!first) fail("expected exception type");
            while (at("|")) {
                ++pos_;
                if (!parse_type(t_, pos_)) fail("expected exception type");
            }
            const std::string name = ident();
            if (sema_) sema_->declare(name, sema_->resolve(*first));
            expect(")");
            {
                GuardScope g(sema_, Guard::ExceptionGuarded);
                block();
            }
            if (sema_) sema_->pop_scope();
        }
        if (at("finally")) {
            ++pos_;
            block();
        }
        return;
    }
    if (at("switch")) {
        ++pos_;
        expect("(");
        expression();
        expect(")");
        switch_body();
        return;
    }
    if (at("return")) {
        ++pos_;
        if (!at(";")) expression();
        expect(";");
        return;
    }
    if (at("throw")) {
        ++pos_;
        expression();
        expect(";");
        return;
    }
    if (at("break") || at("continue")) {
        ++pos_;
        if (at_ident()) ++pos_;
        expect(";");
        return;
    }
    if (at("synchronized") && at("(", 1)) {
        ++pos_;
        expect("(");
        expression();
        expect(")");
        block();
        return;
    }
    if (at("assert")) {
        ++pos_;
        expression();
        if (at(":")) {
            ++pos_;
            expression();
        }
        expect(";");
        return;
    }
    if (at("yield") && !at("=", 1) && !at("(", 1) && !at(".", 1) && !at("[", 1) && !at("++", 1) &&
        !at("--", 1) && !at(";", 1)) {
        ++pos_;
        expression();
        expect(";");
        return;
    }
    if (at_ident() && at(":", 1)) {
        pos_ += 2;
        statement();
        return;
    }
    {
        const std::size_t save = pos_;
        skip_modifiers();
        if (at("class") || at("interface") || at("enum") || (at("@") && at("interface", 1)) ||
            (at("record") && at_ident(1) && (at("(", 2) || at("<", 2)))) {
            skip_local_type();
            return;
        }
        pos_ = save;
    }
    if (try_local_declaration(true)) return;
    expression();
    expect(";");
}

bool BodyParser::try_local_declaration(bool requireTerminator) {
    const std::size_t save = pos_;
    skip_modifiers();
    auto ty = parse_type(t_, pos_);
    if (!ty || !at_ident() ||
        !(at("=", 1) || at(";", 1) || at(",", 1) || at("[", 1) || at(":", 1))) {
        pos_ = save;
        return false;
    }
    const bool isVar = ty->parts.size() == 1 && ty->parts[0] == "var" && ty->args.empty() && ty->dims == 0;
    TypeVal tv;
    if (sema_ && !isVar) tv = sema_->resolve(*ty);
    declarators(tv, isVar);
    if (requireTerminator) expect(";");
    return true;
}

void BodyParser::declarators(const TypeVal& type, bool isVar) {
    while (true) {
        const std::string name = ident();
        TypeVal tv = type;
        while (at("[") && at("]", 1)) {
            pos_ += 2;
            if (tv.id && *tv.id != kArrayMarker) tv = TypeVal{std::string(kArrayMarker), tv.id};
        }
        if (at("=")) {
            ++pos_;
            if (at("{")) {
                array_initializer();
            } else {
                Val v = expression();
                if (isVar) tv = v.type;
            }
        }
        if (sema_) sema_->declare(name, tv);
        if (!at(",")) return;
        ++pos_;
    }
}

void BodyParser::skip_case_label() {
    ++pos_;  // case / default
    int depth = 0;
    while (true) {
        const Token& tk = peek();
        if (tk.kind == Tok::End) fail("unterminated case label");
        if (tk.kind == Tok::Punct) {
            if (tk.text == "(" || tk.text == "[" || tk.text == "{") ++depth;
            if (tk.text == ")" || tk.text == "]" || tk.text == "}") --depth;
            if (depth == 0 && (tk.text == ":" || tk.text == "->")) return;
        }
        ++pos_;
    }
}

void BodyParser::switch_body() {
    expect("{");
    if (sema_) sema_->push_scope();
    while (!at("}")) {
        if (peek().kind == Tok::End) fail("unterminated switch");
        if (at("case") || at("default")) {
            skip_case_label();
            if (at("->")) {
                ++pos_;
                if (at("{")) {
                    block();
                } else if (at("throw")) {
                    statement();
                } else {
                    expression();
                    expect(";");
                }
            } else {
                expect(":");
            }
            continue;
        }
        statement();
    }
    ++pos_;
    if (sema_) sema_->pop_scope();
}

void BodyParser::variable_initializer() {
    if (at("{")) {
        array_initializer();
    } else {
        expression();
    }
}

void BodyParser::array_initializer() {
    expect("{");
    while (!at("}")) {
        variable_initializer();
        if (at(",")) ++pos_;
        else break;
    }
    expect("}");
}

bool BodyParser::lambda_ahead() const {
    if (at_ident() && at("->", 1)) return true;
    if (!at("(")) return false;
    const std::size_t close = match_close(pos_);
    return tok_is(t_, close + 1, "->");
}

void BodyParser::lambda() {
    if (sema_) sema_->push_scope();
    if (at_ident()) {
        const std::string name = ident();
        if (sema_) sema_->declare(name, {});
    } else {
        expect("(");
        while (!at(")")) {
            skip_modifiers();
            if (at_ident() && (at(",", 1) || at(")", 1))) {
                const std::string name = ident();
                if (sema_) sema_->declare(name, {});
            } else {
                auto ty = parse_type(t_, pos_);
                if (!ty) fail("expected lambda parameter");
                if (at("...")) ++pos_;
                const std::string name = ident();
                if (sema_) sema_->declare(name, sema_->resolve(*ty));
            }
            if (at(",")) ++pos_;
            else break;
        }
        expect(")");
    }
    expect("->");
    if (at("{")) {
        block();
    } else {
        expression();
    }
    if (sema_) sema_->pop_scope();
}

Val BodyParser::expression() {
    if (lambda_ahead()) {
        lambda();
        return {};
    }
    Val v = unary();
    bool single = true;
    while (true) {
        if (at("?")) {
            ++pos_;
            expression();
            expect(":");
            expression();
            return {};
        }
        if (at("instanceof")) {
            ++pos_;
            if (at("final")) ++pos_;
            auto ty = parse_type(t_, pos_);
            if (!ty) fail("expected type after instanceof");
            if (at("(")) {
                pos_ = match_close(pos_) + 1;
            } else if (at_ident()) {
                const std::string name = ident();
                if (sema_) sema_->declare(name, sema_->resolve(*ty));
            }
            single = false;
            continue;
        }
        const Token& tk = peek();
        if (tk.kind != Tok::Punct ||
            std::find(kBinaryOps.begin(), kBinaryOps.end(), tk.text) == kBinaryOps.end()) {
            break;
        }
        std::string op = take().text;
        if (op == ">") {
            while (at(">")) op += take().text;
            if (at("=")) op += take().text;
        }
        if (is_assignment(op)) {
            if (op == "=" && at("new") && sema_) sema_->assign_new(v);
            Val r = expression();
            return single && op == "=" ? r : Val{};
        }
        unary();
        single = false;
    }
    return single ? v : Val{};
}

bool BodyParser::cast_ahead(std::size_t& typeEnd) const {
    std::size_t p = pos_ + 1;
    auto ty = parse_type(t_, p);
    if (!ty) return false;
    while (tok_is(t_, p, "&")) {
        ++p;
        if (!parse_type(t_, p)) return false;
    }
    if (!tok_is(t_, p, ")")) return false;
    typeEnd = p;
    if (ty->primitive) return true;
    const Token& next = t_[std::min(p + 1, t_.size() - 1)];
    switch (next.kind) {
    case Tok::Number:
    case Tok::String:
    case Tok::Char:
        return true;
    case Tok::Ident:
        return next.text != "instanceof";
    case Tok::Punct:
        return next.text == "(" || next.text == "!" || next.text == "~";
    default:
        return false;
    }
}

Val BodyParser::unary() {
    if (at("+") || at("-") || at("!") || at("~") || at("++") || at("--")) {
        ++pos_;
        unary();
        return {};
    }
    std::size_t typeEnd = 0;
    if (at("(") && cast_ahead(typeEnd)) {
        ++pos_;
        auto ty = parse_type(t_, pos_);
        pos_ = typeEnd + 1;
        unary();
        if (!sema_) return {};
        Val v;
        v.kind = Val::Kind::Value;
        v.type = sema_->resolve(*ty);
        return v;
    }
    return postfix(primary());
}

Val BodyParser::primary() {
    const Token& tk = peek();
    switch (tk.kind) {
    case Tok::Number:
    case Tok::Char:
        ++pos_;
        return {};
    case Tok::String:
        ++pos_;
        return sema_ ? sema_->string_literal() : Val{};
    case Tok::End:
        fail("unexpected end of expression");
    default:
        break;
    }
    if (at("(")) {
        ++pos_;
        Val v = expression();
        expect(")");
        v.ownField = nullptr;
        return v;
    }
    if (at("this")) {
        ++pos_;
        if (at("(")) {
            arguments();
            return {};
        }
        return sema_ ? sema_->this_ref(nullptr) : Val{};
    }
    if (at("super")) {
        ++pos_;
        if (at("(")) {
            arguments();
            return {};
        }
        return sema_ ? sema_->super_ref() : Val{};
    }
    if (at("new")) return creation();
    if (at("switch")) {
        ++pos_;
        expect("(");
        expression();
        expect(")");
        switch_body();
        return {};
    }
    if (at("true") || at("false") || at("null")) {
        ++pos_;
        return {};
    }
    if (tk.kind == Tok::Ident && is_primitive(tk.text)) {
        parse_type(t_, pos_);
        expect(".");
        expect("class");
        return {};
    }
    if (at_ident()) {
        if (at("(", 1)) {
            const std::string name = ident();
            auto args = arguments();
            return sema_ ? sema_->call(nullptr, name, args) : Val{};
        }
        if (at("[", 1) && at("]", 2)) {
            // Foo[].class or Foo[]::new
            if (!parse_type(t_, pos_)) fail("expected type");
            return {};
        }
        const std::string name = ident();
        return sema_ ? sema_->name(name) : Val{};
    }
    fail("unexpected token in expression");
}

Val BodyParser::postfix(Val v) {
    while (true) {
        if (at(".")) {
            ++pos_;
            if (at("<")) {
                if (!parse_type_args(t_, pos_)) fail("bad type arguments");
            }
            if (at("new")) {
                v = creation();
                continue;
            }
            if (at("this")) {
                ++pos_;
                v = sema_ ? sema_->this_ref(&v.qualified) : Val{};
                continue;
            }
            if (at("class")) {
                ++pos_;
                v = {};
                continue;
            }
            if (at("super")) {
                ++pos_;
                v = sema_ ? sema_->super_ref() : Val{};
                continue;
            }
            const std::string name = ident();
            if (at("(")) {
                auto args = arguments();
                v = sema_ ? sema_->call(&v, name, args) : Val{};
            } else {
                v = sema_ ? sema_->member(v, name) : Val{};
            }
        } else if (at("[")) {
            ++pos_;
            expression();
            expect("]");
            Val e;
            if (v.type.elem) {
                e.kind = Val::Kind::Value;
                e.type.id = v.type.elem;
            }
            v = e;
        } else if (at("++") || at("--")) {
            ++pos_;
            v = {};
        } else if (at("::")) {
            ++pos_;
            if (at("<") && !parse_type_args(t_, pos_)) fail("bad type arguments");
            if (at("new")) {
                ++pos_;
            } else {
                ident();
            }
            v = {};
        } else {
            return v;
        }
    }
}

Val BodyParser::creation() {
    expect("new");
    skip_annotations();
    if (at("<") && !parse_type_args(t_, pos_)) fail("bad type arguments");
    auto ty = parse_type(t_, pos_);
    if (!ty) fail("expected type after new");
    if (ty->dims > 0 || at("[")) {
        while (at("[")) {
            ++pos_;
            if (!at("]")) expression();
            expect("]");
        }
        if (at("{")) array_initializer();
        return sema_ ? sema_->create(*ty, true) : Val{};
    }
    auto args = arguments();
    Val v = sema_ ? sema_->create(*ty, false) : Val{};
    if (at("{")) pos_ = match_close(pos_) + 1;
    return v;
}

std::vector<Val> BodyParser::arguments() {
    expect("(");
    std::vector<Val> out;
    while (!at(")")) {
        out.push_back(expression());
        if (at(",")) ++pos_;
        else break;
    }
    expect(")");
    return out;
}

} // namespace dpd::java
