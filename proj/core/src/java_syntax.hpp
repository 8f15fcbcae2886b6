#pragma once

// Internal to the Java extractor: lexer, declaration model and a tolerant
// recursive-descent parser for the supported language subset.

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dpd/facts.hpp"

namespace dpd::java {

enum class Tok { Ident, Number, String, Char, Punct, End };

struct Token {
    Tok kind = Tok::End;
    std::string text;
    int line = 0;
};

struct ParseError : std::runtime_error {
    ParseError(const std::string& what, int line)
        : std::runtime_error("line " + std::to_string(line) + ": " + what) {}
};

// Throws ParseError on unterminated literals or comments. `>` is always a
// single token so nested generic closers need no splitting.
std::vector<Token> lex(std::string_view src);

bool is_reserved(std::string_view word);
bool is_primitive(std::string_view word);

struct TypeRef {
    std::vector<std::string> parts;
    std::vector<TypeRef> args;
    int dims = 0;
    bool primitive = false;

    std::string text() const;
    const std::string& simple() const { return parts.back(); }
};

struct TypeParam {
    std::string name;
    std::optional<TypeRef> bound;
};

struct FieldDecl {
    std::string name;
    TypeRef type;
    Visibility vis = Visibility::Package;
    bool isStatic = false;
    bool enumConstant = false;
    // Token range of the initializer expression; empty when absent.
    std::size_t initBegin = 0;
    std::size_t initEnd = 0;

    bool has_init() const { return initEnd > initBegin; }
};

struct ParamDecl {
    TypeRef type;
    std::string name;
};

struct MethodDecl {
    std::string name;
    bool ctor = false;
    Visibility vis = Visibility::Package;
    bool isStatic = false;
    std::optional<TypeRef> ret;
    std::vector<ParamDecl> params;
    bool varargs = false;
    std::vector<TypeParam> typeParams;
    // Token range of the body including braces; empty for abstract methods.
    std::size_t bodyBegin = 0;
    std::size_t bodyEnd = 0;
    int line = 0;

    bool has_body() const { return bodyEnd > bodyBegin; }
};

struct InitBlock {
    bool isStatic = false;
    std::size_t begin = 0;
    std::size_t end = 0;
};

struct TypeDecl {
    std::string simpleName;
    std::string id;
    ArtifactKind kind = ArtifactKind::Class;
    bool isFinal = false;
    std::vector<TypeRef> extends;
    std::vector<TypeRef> implements;
    std::vector<TypeParam> typeParams;
    std::vector<FieldDecl> fields;
    std::vector<MethodDecl> methods;
    std::vector<InitBlock> inits;
    int outer = -1;
    std::vector<int> nested;
};

struct FileUnit {
    std::string path;
    std::string package;
    std::vector<std::string> singleImports;
    std::vector<std::string> wildcardImports;
    std::vector<Token> tokens;
    std::vector<TypeDecl> types;
};

// Parses package, imports and every (nested) type declaration. Bodies and
// initializers are recorded as token ranges. Throws ParseError.
void parse_declarations(FileUnit& unit);

// Static type of an expression as far as the analyzer can tell.
struct TypeVal {
    std::optional<ArtifactId> id;
    std::optional<ArtifactId> elem;
};

struct Val {
    enum class Kind { Unknown, Value, TypeName, Package };
    Kind kind = Kind::Unknown;
    TypeVal type;
    // Package/qualified prefix for Kind::Package.
    std::string qualified;
    bool isSuper = false;
    // Set when the value names a field of the analyzed class.
    const FieldDecl* ownField = nullptr;
};

// Semantic callbacks driven by the body parser.
class Sema {
public:
    virtual ~Sema() = default;
    virtual Val name(const std::string& ident) = 0;
    // qualifier: the resolved id of `Outer` in `Outer.this`.
    virtual Val this_ref(const std::string* qualifier) = 0;
    virtual Val super_ref() = 0;
    virtual Val member(const Val& recv, const std::string& name) = 0;
    // recv == nullptr for unqualified calls.
    virtual Val call(const Val* recv, const std::string& name, const std::vector<Val>& args) = 0;
    virtual Val create(const TypeRef& type, bool array) = 0;
    virtual Val string_literal() = 0;
    virtual void declare(const std::string& name, const TypeVal& type) = 0;
    virtual TypeVal resolve(const TypeRef& type) = 0;
    virtual void assign_new(const Val& lhs) = 0;
    virtual void push_scope() = 0;
    virtual void pop_scope() = 0;
    virtual void push_guard(Guard g) = 0;
    virtual void pop_guard() = 0;
    virtual void enter_condition() = 0;
    virtual void leave_condition() = 0;
};

// Statement and expression parser over a token range. With a null Sema it
// only recognizes structure (used to find initializer extents).
class BodyParser {
public:
    BodyParser(const std::vector<Token>& toks, std::size_t pos, Sema* sema)
        : t_(toks), pos_(pos), sema_(sema) {}

    std::size_t pos() const { return pos_; }

    void block();
    Val expression();
    void variable_initializer();
    void array_initializer();

private:
    const Token& peek(std::size_t k = 0) const;
    bool at(std::string_view text, std::size_t k = 0) const;
    bool at_ident(std::size_t k = 0) const;
    const Token& take();
    void expect(std::string_view text);
    std::string ident();
    [[noreturn]] void fail(const std::string& what) const;

    void statement();
    bool try_local_declaration(bool requireTerminator);
    void declarators(const TypeVal& type, bool isVar);
    void skip_local_type();
    void switch_body();
    void skip_case_label();

    Val unary();
    Val postfix(Val v);
    Val primary();
    Val creation();
    std::vector<Val> arguments();
    bool lambda_ahead() const;
    void lambda();
    bool cast_ahead(std::size_t& typeEnd) const;
    void condition();

    void skip_annotations();
    void skip_modifiers();
    std::size_t match_close(std::size_t open) const;

    const std::vector<Token>& t_;
    std::size_t pos_;
    Sema* sema_;
};

// Type grammar helpers shared by both parsers. On failure they return
// std::nullopt and leave `pos` untouched.
std::optional<TypeRef> parse_type(const std::vector<Token>& toks, std::size_t& pos);
std::optional<std::vector<TypeRef>> parse_type_args(const std::vector<Token>& toks, std::size_t& pos);

} // namespace dpd::java
