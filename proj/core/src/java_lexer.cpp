#include <algorithm>
#include <array>
#include <cctype>

#include "java_syntax.hpp"

namespace dpd::java {

namespace {

constexpr std::array<std::string_view, 50> kReserved{
    "abstract", "assert",     "boolean",   "break",     "byte",     "case",       "catch",
    "char",     "class",      "const",     "continue",  "default",  "do",         "double",
    "else",     "enum",       "extends",   "final",     "finally",  "float",      "for",
    "goto",     "if",         "implements", "import",   "instanceof", "int",      "interface",
    "long",     "native",     "new",       "package",   "private",  "protected",  "public",
    "return",   "short",      "static",    "strictfp",  "super",    "switch",     "synchronized",
    "this",     "throw",      "throws",    "transient", "try",      "void",       "volatile",
    "while",
};

constexpr std::array<std::string_view, 9> kPrimitives{"boolean", "byte", "char",  "short", "int",
                                                      "long",    "float", "double", "void"};

// Longest first so that prefix matching picks the longest operator.
constexpr std::array<std::string_view, 20> kMultiPunct{
    "<<=", "...", "->", "::", "==", "!=", "&&", "||", "++", "--", "<=", "<<",
    "+=",  "-=",  "*=", "/=", "%=", "&=", "|=", "^=",
};

bool ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c == '$' || c >= 0x80; }
bool ident_part(unsigned char c) { return ident_start(c) || std::isdigit(c); }

} // namespace

bool is_reserved(std::string_view word) {
    return std::find(kReserved.begin(), kReserved.end(), word) != kReserved.end() || word == "true" ||
           word == "false" || word == "null";
}

bool is_primitive(std::string_view word) {
    return std::find(kPrimitives.begin(), kPrimitives.end(), word) != kPrimitives.end();
}

std::vector<Token> lex(std::string_view src) {
    std::vector<Token> out;
    std::size_t i = 0;
    int line = 1;
    const std::size_t n = src.size();
    auto push = [&](Tok kind, std::size_t begin, std::size_t end, int at) {
        out.push_back({kind, std::string(src.substr(begin, end - begin)), at});
    };
    while (i < n) {
        const unsigned char c = static_cast<unsigned char>(src[i]);
        if (c == '\n') {
            ++line;
            ++i;
        } else if (std::isspace(c)) {
            ++i;
        } else if (src.compare(i, 2, "//") == 0) {
            while (i < n && src[i] != '\n') ++i;
        } else if (src.compare(i, 2, "/*") == 0) {
            const std::size_t end = src.find("*/", i + 2);
            if (end == std::string_view::npos) throw ParseError("unterminated comment", line);
            line += static_cast<int>(std::count(src.begin() + i, src.begin() + end, '\n'));
            i = end + 2;
        } else if (ident_start(c)) {
            const std::size_t b = i;
            while (i < n && ident_part(static_cast<unsigned char>(src[i]))) ++i;
            push(Tok::Ident, b, i, line);
        } else if (std::isdigit(c) || (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
            const std::size_t b = i;
            while (i < n) {
                const unsigned char d = static_cast<unsigned char>(src[i]);
                if (std::isalnum(d) || d == '_' || d == '.') {
                    ++i;
                } else if ((d == '+' || d == '-') && i > b &&
                           std::string_view("eEpP").find(src[i - 1]) != std::string_view::npos &&
                           !(src[b] == '0' && i > b + 1 && (src[b + 1] == 'x' || src[b + 1] == 'X') &&
                             (src[i - 1] == 'e' || src[i - 1] == 'E'))) {
                    ++i;
                } else {
                    break;
                }
            }
            push(Tok::Number, b, i, line);
        } else if (src.compare(i, 3, "\"\"\"") == 0) {
            const int at = line;
            const std::size_t b = i;
            i += 3;
            while (true) {
                if (i >= n) throw ParseError("unterminated text block", at);
                if (src[i] == '\\') {
                    i += 2;
                    continue;
                }
                if (src.compare(i, 3, "\"\"\"") == 0) break;
                if (src[i] == '\n') ++line;
                ++i;
            }
            i += 3;
            push(Tok::String, b, i, at);
        } else if (c == '"' || c == '\'') {
            const std::size_t b = i++;
            while (i < n && src[i] != static_cast<char>(c)) {
                if (src[i] == '\n') throw ParseError("unterminated literal", line);
                i += src[i] == '\\' ? 2 : 1;
            }
            if (i >= n) throw ParseError("unterminated literal", line);
            ++i;
            push(c == '"' ? Tok::String : Tok::Char, b, i, line);
        } else {
            std::size_t len = 1;
            for (auto p : kMultiPunct) {
                if (src.compare(i, p.size(), p) == 0) {
                    len = p.size();
                    break;
                }
            }
            push(Tok::Punct, i, i + len, line);
            i += len;
        }
    }
    out.push_back({Tok::End, "", line});
    return out;
}

} // namespace dpd::java
