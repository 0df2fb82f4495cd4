#include "rustmap/c_model.hpp"

#include "rustmap/subprocess.hpp"
#include "rustmap/text.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <set>

namespace fs = std::filesystem;

namespace rustmap {

namespace {

const std::set<std::string> kKeywords = {
    "if",     "else",   "while",    "for",      "do",     "switch",   "case",
    "default", "break",  "continue", "return",   "goto",   "sizeof",   "typedef",
    "extern", "static", "const",    "volatile", "register", "inline", "struct",
    "union",  "enum",   "signed",   "unsigned", "short",  "long",     "int",
    "char",   "float",  "double",   "void",     "_Bool",  "bool",     "restrict",
};

const std::set<std::string> kScalarTypeWords = {
    "signed", "unsigned", "short", "long", "int", "char", "float", "double", "_Bool", "bool",
};

bool is_keyword(const std::string &s) { return kKeywords.count(s) > 0; }

size_t skip_balanced_tokens(const std::vector<Token> &toks, size_t i, const char *open,
                            const char *close) {
    // i points at the opening token; returns index one past the matching close.
    int depth = 0;
    for (; i < toks.size(); ++i) {
        if (toks[i].is(open)) ++depth;
        else if (toks[i].is(close)) {
            if (--depth == 0) return i + 1;
        }
    }
    return i;
}

} // namespace

// ---------------------------------------------------------------------------
// Small accessors
// ---------------------------------------------------------------------------

const char *to_string(DirectiveClass c) {
    switch (c) {
    case DirectiveClass::SystemInclude: return "system_include";
    case DirectiveClass::ProjectInclude: return "project_include";
    case DirectiveClass::NumericMacro: return "numeric_macro";
    case DirectiveClass::ComplexMacro: return "complex_macro";
    case DirectiveClass::Conditional: return "conditional";
    case DirectiveClass::Other: return "other";
    }
    return "other";
}

const char *to_string(MacroClass c) {
    switch (c) {
    case MacroClass::Numeric: return "numeric";
    case MacroClass::Complex: return "complex";
    case MacroClass::Unhandled: return "unhandled";
    }
    return "unhandled";
}

std::string CFile::stem() const {
    fs::path p(path);
    return p.stem().string();
}

const CFunction *CFile::find_function(const std::string &name) const {
    for (const auto &f : functions)
        if (f.name == name) return &f;
    return nullptr;
}

const CFile *CProject::file_of_function(const std::string &name) const {
    for (const auto &f : files)
        if (f.find_function(name)) return &f;
    return nullptr;
}

const CFunction *CProject::find_function(const std::string &name) const {
    for (const auto &f : files)
        if (const CFunction *fn = f.find_function(name)) return fn;
    return nullptr;
}

const StructDef *CProject::find_struct(const std::string &name) const {
    for (const auto &f : files)
        for (const auto &s : f.structs)
            if (s.name == name) return &s;
    return nullptr;
}

const MacroDef *CProject::find_macro(const std::string &name) const {
    for (const auto &m : macros)
        if (m.name == name) return &m;
    return nullptr;
}

// ---------------------------------------------------------------------------
// Directive classification
// ---------------------------------------------------------------------------

namespace {

struct DefineParts {
    std::string name;
    bool function_like = false;
    bool variadic = false;
    std::vector<std::string> params;
    std::string body;
};

// `rest` is the text following the "define" keyword.
std::optional<DefineParts> parse_define(const std::string &rest) {
    DefineParts dp;
    size_t p = 0;
    while (p < rest.size() && std::isspace(static_cast<unsigned char>(rest[p]))) ++p;
    if (p >= rest.size() || !is_ident_start(rest[p])) return std::nullopt;
    size_t b = p;
    while (p < rest.size() && is_ident_char(rest[p])) ++p;
    dp.name = rest.substr(b, p - b);
    // '(' immediately after the name (no whitespace) means function-like.
    if (p < rest.size() && rest[p] == '(') {
        dp.function_like = true;
        ++p;
        std::string cur;
        int depth = 1;
        for (; p < rest.size() && depth > 0; ++p) {
            char c = rest[p];
            if (c == '(') ++depth;
            if (c == ')') {
                if (--depth == 0) break;
            }
            if (c == ',' && depth == 1) {
                std::string t = trim(cur);
                if (!t.empty()) dp.params.push_back(t);
                cur.clear();
            } else {
                cur.push_back(c);
            }
        }
        std::string t = trim(cur);
        if (!t.empty()) dp.params.push_back(t);
        if (p < rest.size() && rest[p] == ')') ++p;
        for (auto &prm : dp.params)
            if (prm == "..." || ends_with(prm, "...")) dp.variadic = true;
    }
    dp.body = trim(rest.substr(std::min(p, rest.size())));
    return dp;
}

// True when the body is a single numeric token, optionally parenthesized.
bool is_single_numeric_token(const std::string &body) {
    std::string s = trim(body);
    while (s.size() >= 2 && s.front() == '(' && s.back() == ')') {
        // Only strip when the parens actually match each other.
        int depth = 0;
        bool wraps = true;
        for (size_t i = 0; i < s.size(); ++i) {
            if (s[i] == '(') ++depth;
            else if (s[i] == ')') {
                --depth;
                if (depth == 0 && i + 1 != s.size()) {
                    wraps = false;
                    break;
                }
            }
        }
        if (!wraps) break;
        s = trim(s.substr(1, s.size() - 2));
    }
    auto toks = tokenize_c(s, false);
    return toks.size() == 1 && toks[0].kind == TokKind::Number;
}

} // namespace

Directive classify_directive(const std::string &raw) {
    Directive d;
    d.raw = raw;
    std::string s = trim(raw);
    if (s.empty() || s[0] != '#') {
        d.diagnostic = "not a preprocessor directive";
        return d;
    }
    size_t p = 1;
    while (p < s.size() && std::isspace(static_cast<unsigned char>(s[p]))) ++p;
    if (p >= s.size()) {
        d.diagnostic = "bare '#'";
        return d;
    }
    if (!is_ident_start(s[p])) {
        // "# 5 file.c" line markers and other oddities
        d.diagnostic = "malformed directive name";
        return d;
    }
    size_t b = p;
    while (p < s.size() && is_ident_char(s[p])) ++p;
    std::string name = s.substr(b, p - b);
    std::string rest = p < s.size() ? s.substr(p) : std::string();

    if (name == "include" || name == "include_next") {
        std::string t = trim(rest);
        if (t.size() >= 2 && t.front() == '<' && t.find('>') != std::string::npos) {
            d.klass = DirectiveClass::SystemInclude;
            d.include_target = t.substr(1, t.find('>') - 1);
        } else if (t.size() >= 2 && t.front() == '"' && t.rfind('"') > 0) {
            d.klass = DirectiveClass::ProjectInclude;
            d.include_target = t.substr(1, t.rfind('"') - 1);
        } else {
            d.diagnostic = "malformed include target";
        }
        return d;
    }
    if (name == "if" || name == "ifdef" || name == "ifndef" || name == "elif") {
        d.klass = DirectiveClass::Conditional;
        return d;
    }
    if (name == "define") {
        auto dp = parse_define(rest);
        if (!dp) {
            d.diagnostic = "malformed define";
            return d;
        }
        if (!dp->function_like && is_single_numeric_token(dp->body)) {
            d.klass = DirectiveClass::NumericMacro;
            return d;
        }
        auto body_toks = tokenize_c(dp->body, false);
        if (dp->function_like || body_toks.size() >= 2) {
            d.klass = DirectiveClass::ComplexMacro;
            return d;
        }
        // Empty or single non-numeric token: flag macros and aliases.
        return d;
    }
    // #undef/#pragma/#else/#endif/#error/#line and friends
    return d;
}

// ---------------------------------------------------------------------------
// Numeric literal typing
// ---------------------------------------------------------------------------

const char *c_type_for(NumTag t) {
    switch (t) {
    case NumTag::I32: return "int";
    case NumTag::I64: return "long long";
    case NumTag::U32: return "unsigned int";
    case NumTag::U64: return "unsigned long long";
    case NumTag::F32: return "float";
    case NumTag::F64: return "double";
    }
    return "int";
}

const char *rust_type_for(NumTag t) {
    switch (t) {
    case NumTag::I32: return "i32";
    case NumTag::I64: return "i64";
    case NumTag::U32: return "u32";
    case NumTag::U64: return "u64";
    case NumTag::F32: return "f32";
    case NumTag::F64: return "f64";
    }
    return "i32";
}

namespace {

std::string strip_outer_parens(std::string s) {
    s = trim(s);
    while (s.size() >= 2 && s.front() == '(' && s.back() == ')') {
        int depth = 0;
        bool wraps = true;
        for (size_t i = 0; i < s.size(); ++i) {
            if (s[i] == '(') ++depth;
            else if (s[i] == ')') {
                if (--depth == 0 && i + 1 != s.size()) {
                    wraps = false;
                    break;
                }
            }
        }
        if (!wraps) break;
        s = trim(s.substr(1, s.size() - 2));
    }
    return s;
}

} // namespace

std::optional<NumTag> infer_numeric_const_type(const std::string &literal) {
    std::string s = strip_outer_parens(literal);
    if (s.empty()) return std::nullopt;
    auto toks = tokenize_c(s, false);
    if (toks.size() != 1 || toks[0].kind != TokKind::Number) return std::nullopt;

    bool is_hexish = s.size() > 1 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X');
    bool is_float = false;
    if (!is_hexish) {
        // A dot or an exponent marks a floating constant (1.5, 2e10, 1.5e-3).
        if (s.find('.') != std::string::npos) is_float = true;
        size_t epos = s.find_first_of("eE");
        if (epos != std::string::npos && epos > 0) is_float = true;
    } else if (s.find('.') != std::string::npos || s.find('p') != std::string::npos ||
               s.find('P') != std::string::npos) {
        is_float = true; // hex float
    }

    if (is_float) {
        char suffix = s.back();
        if (suffix == 'f' || suffix == 'F') return NumTag::F32;
        return NumTag::F64;
    }

    // Integer: strip suffix letters.
    std::string digits = s;
    bool has_u = false;
    while (!digits.empty()) {
        char c = digits.back();
        if (c == 'u' || c == 'U') {
            has_u = true;
            digits.pop_back();
        } else if (c == 'l' || c == 'L') {
            digits.pop_back();
        } else {
            break;
        }
    }
    if (digits.empty()) return std::nullopt;

    errno = 0;
    char *endp = nullptr;
    unsigned long long v = std::strtoull(digits.c_str(), &endp, 0);
    if (errno != 0 || endp == nullptr || *endp != '\0') return std::nullopt;

    const bool decimal = !(digits.size() > 1 && digits[0] == '0');
    if (has_u) return v <= UINT32_MAX ? NumTag::U32 : NumTag::U64;
    if (v <= INT32_MAX) return NumTag::I32;
    if (!decimal && v <= UINT32_MAX) return NumTag::U32; // hex/octal beyond signed range
    if (v <= INT64_MAX) return NumTag::I64;
    return NumTag::U64;
}

// ---------------------------------------------------------------------------
// File parsing
// ---------------------------------------------------------------------------

namespace {

struct TopLevelParser {
    CFile &f;
    const std::vector<Token> toks;

    explicit TopLevelParser(CFile &file) : f(file), toks(tokenize_c(file.text)) {}

    void run() {
        size_t i = 0;
        const size_t n = toks.size();
        while (i < n) {
            const Token &t = toks[i];
            if (t.is(";")) {
                ++i;
                continue;
            }
            if (t.is("typedef")) {
                i = parse_typedef(i);
                continue;
            }
            if ((t.is("struct") || t.is("union")) && i + 2 < n && toks[i + 1].is_ident() &&
                toks[i + 2].is("{")) {
                i = parse_struct_def(toks[i + 1].text, t.is("union"), i + 2);
                continue;
            }
            if (t.is("enum")) {
                i = consume_to_semi(i);
                continue;
            }
            i = parse_declaration(i);
        }
    }

    // typedef [struct|union [tag]] { fields } Name, ...;
    size_t parse_typedef(size_t i) {
        size_t start = i;
        ++i;
        const size_t n = toks.size();
        bool aggregate = i < n && (toks[i].is("struct") || toks[i].is("union"));
        bool is_union = aggregate && toks[i].is("union");
        std::string tag;
        size_t body_open = SIZE_MAX;
        if (aggregate) {
            ++i;
            if (i < n && toks[i].is_ident() && !is_keyword(toks[i].text)) {
                tag = toks[i].text;
                ++i;
            }
            if (i < n && toks[i].is("{")) body_open = i;
        }
        if (body_open == SIZE_MAX) return consume_to_semi(start);

        size_t body_close = skip_balanced_tokens(toks, body_open, "{", "}");
        // First identifier declarator after the closing brace names the type.
        std::string name = tag;
        for (size_t j = body_close; j < n && !toks[j].is(";"); ++j) {
            if (toks[j].is_ident() && !is_keyword(toks[j].text)) {
                name = toks[j].text;
                break;
            }
        }
        if (!name.empty()) record_struct(name, is_union, body_open + 1, body_close - 1);
        size_t j = body_close;
        while (j < n && !toks[j].is(";")) ++j;
        return j < n ? j + 1 : j;
    }

    // struct Tag { fields } [declarators];
    size_t parse_struct_def(const std::string &tag, bool is_union, size_t brace) {
        size_t body_close = skip_balanced_tokens(toks, brace, "{", "}");
        record_struct(tag, is_union, brace + 1, body_close - 1);
        size_t j = body_close;
        // Optional variable declarators of this aggregate type.
        while (j < toks.size() && !toks[j].is(";")) ++j;
        return j < toks.size() ? j + 1 : j;
    }

    // Consumes a declaration through its terminating ';', braces balanced.
    size_t consume_to_semi(size_t i) {
        const size_t n = toks.size();
        while (i < n) {
            if (toks[i].is("{")) {
                i = skip_balanced_tokens(toks, i, "{", "}");
                continue;
            }
            if (toks[i].is(";")) return i + 1;
            ++i;
        }
        return n;
    }

    void record_struct(const std::string &name, bool is_union, size_t first, size_t last) {
        StructDef sd;
        sd.name = name;
        sd.file = f.path;
        sd.is_union = is_union;
        // Fields: declaration runs separated by ';'. Nested aggregates are
        // skipped rather than recursed into.
        size_t i = first;
        while (i < last) {
            if (toks[i].is("{")) {
                i = skip_balanced_tokens(toks, i, "{", "}");
                continue;
            }
            size_t run_begin = i;
            while (i < last && !toks[i].is(";")) {
                if (toks[i].is("{")) {
                    i = skip_balanced_tokens(toks, i, "{", "}");
                    continue;
                }
                ++i;
            }
            parse_field_run(sd, run_begin, i);
            if (i < last) ++i; // ';'
        }
        f.structs.push_back(std::move(sd));
    }

    void parse_field_run(StructDef &sd, size_t first, size_t last) {
        if (first >= last) return;
        // Base type: leading keywords/identifiers until the declarator part.
        // The last identifier before a stop token (',', '[', ':', run end) is
        // the field name, everything before it is the type.
        std::vector<std::string> type_words;
        size_t i = first;
        while (i < last) {
            const Token &t = toks[i];
            if (t.is("*") || t.is(",") || t.is("[") || t.is(":")) break;
            if (t.is_ident()) {
                if (i + 1 >= last || toks[i + 1].is(",") || toks[i + 1].is("[") ||
                    toks[i + 1].is(":"))
                    break; // t is the declarator name
                type_words.push_back(t.text);
                ++i;
                continue;
            }
            ++i;
        }
        if (type_words.empty()) return;

        std::string base = join(type_words, " ");
        // Parse declarators.
        int pdepth = 0;
        StructField cur;
        cur.type = base;
        auto flush = [&]() {
            if (!cur.name.empty()) sd.fields.push_back(cur);
            cur = StructField{};
            cur.type = base;
            pdepth = 0;
        };
        for (; i < last; ++i) {
            const Token &t = toks[i];
            if (t.is("*")) {
                ++pdepth;
            } else if (t.is(",")) {
                flush();
            } else if (t.is("[")) {
                size_t close = i;
                while (close < last && !toks[close].is("]")) ++close;
                cur.array_suffix = "[";
                for (size_t k = i + 1; k < close; ++k) cur.array_suffix += toks[k].text;
                cur.array_suffix += "]";
                i = close;
            } else if (t.is(":")) {
                // bitfield width: skip
                ++i;
            } else if (t.is_ident() && !is_keyword(t.text)) {
                cur.name = t.text;
                cur.pointer_depth = pdepth;
            }
        }
        flush();
    }

    // A declaration that is either a function definition or global variables.
    size_t parse_declaration(size_t i) {
        const size_t n = toks.size();
        size_t start = i;
        int paren = 0;
        bool saw_eq = false;
        size_t name_pos = SIZE_MAX, lparen_pos = SIZE_MAX;

        while (i < n) {
            const Token &t = toks[i];
            if (t.is("(")) {
                if (paren == 0 && !saw_eq && lparen_pos == SIZE_MAX && i > start &&
                    toks[i - 1].is_ident() && !is_keyword(toks[i - 1].text)) {
                    lparen_pos = i;
                    name_pos = i - 1;
                }
                ++paren;
            } else if (t.is(")")) {
                --paren;
            } else if (t.is("=") && paren == 0) {
                saw_eq = true;
            } else if (t.is("{") && paren == 0) {
                if (saw_eq) {
                    i = skip_balanced_tokens(toks, i, "{", "}");
                    continue;
                }
                if (lparen_pos != SIZE_MAX) {
                    return record_function(start, name_pos, i);
                }
                // Unexpected brace: skip it and bail out of this declaration.
                f.parse_errors.push_back("unexpected '{' at line " + std::to_string(t.line));
                return skip_balanced_tokens(toks, i, "{", "}");
            } else if (t.is(";") && paren == 0) {
                parse_globals(start, i);
                return i + 1;
            }
            ++i;
        }
        return n;
    }

    size_t record_function(size_t start, size_t name_pos, size_t brace) {
        CFunction fn;
        fn.name = toks[name_pos].text;
        fn.decl_begin = toks[start].begin;
        fn.line = toks[start].line;
        fn.signature = f.text.substr(toks[start].begin, toks[brace - 1].end - toks[start].begin);
        for (size_t k = start; k < name_pos; ++k)
            if (toks[k].is("static")) fn.is_static = true;
        size_t close = skip_balanced_tokens(toks, brace, "{", "}");
        fn.body_begin = toks[brace].end;
        fn.body_end = close > brace + 1 ? toks[close - 1].begin : fn.body_begin;
        fn.decl_end = close > brace ? toks[close - 1].end : toks[brace].end;
        f.functions.push_back(std::move(fn));
        return close;
    }

    // Global variable declaration(s) in the token range [first, last).
    void parse_globals(size_t first, size_t last) {
        if (first >= last) return;
        bool is_static = false, is_const = false, is_extern = false;
        size_t i = first;
        while (i < last &&
               (toks[i].is("static") || toks[i].is("const") || toks[i].is("extern") ||
                toks[i].is("volatile") || toks[i].is("register") || toks[i].is("inline"))) {
            if (toks[i].is("static")) is_static = true;
            if (toks[i].is("const")) is_const = true;
            if (toks[i].is("extern")) is_extern = true;
            ++i;
        }
        if (is_extern) return; // declaration, not a definition
        if (i >= last) return;

        // A parenthesized declarator indicates a function pointer or a
        // prototype. Prototypes (ident '(' …) with no '=' are skipped.
        bool has_paren = false, has_eq = false;
        for (size_t k = i; k < last; ++k) {
            if (toks[k].is("(")) has_paren = true;
            if (toks[k].is("=")) has_eq = true;
        }

        // Base type words.
        std::vector<std::string> type_words;
        while (i < last) {
            const Token &t = toks[i];
            if (!t.is_ident()) break;
            if (t.is("struct") || t.is("union") || t.is("enum")) {
                type_words.push_back(t.text);
                ++i;
                if (i < last && toks[i].is_ident()) {
                    type_words.push_back(toks[i].text);
                    ++i;
                }
                continue;
            }
            if (kScalarTypeWords.count(t.text)) {
                type_words.push_back(t.text);
                ++i;
                continue;
            }
            if (is_keyword(t.text)) {
                ++i; // stray qualifier between type words
                continue;
            }
            // Typedef name can be the base type only as the first word.
            if (type_words.empty()) {
                type_words.push_back(t.text);
                ++i;
                continue;
            }
            break; // declarator begins
        }
        if (type_words.empty()) return;

        if (has_paren && !has_eq) {
            // Could be a prototype `int f(void);` or a function-pointer
            // variable `int (*fp)(void);`. Only the latter is a global.
            bool fn_ptr = false;
            for (size_t k = first; k + 1 < last; ++k)
                if (toks[k].is("(") && toks[k + 1].is("*")) fn_ptr = true;
            if (!fn_ptr) return;
            // Record the pointer variable, non-primitive by definition.
            for (size_t k = first; k + 2 < last; ++k) {
                if (toks[k].is("(") && toks[k + 1].is("*") && toks[k + 2].is_ident()) {
                    GlobalDecl g;
                    g.name = toks[k + 2].text;
                    g.c_type = join(type_words, " ") + " (*)()";
                    g.file = f.path;
                    g.is_static = is_static;
                    g.is_const = is_const;
                    g.line = toks[first].line;
                    f.globals.push_back(std::move(g));
                    return;
                }
            }
            return;
        }

        bool base_primitive = true;
        for (const auto &w : type_words)
            if (!kScalarTypeWords.count(w)) base_primitive = false;

        // Declarators separated by top-level commas.
        int pdepth = 0;
        std::string name, array_suffix, init;
        int paren = 0;
        auto flush = [&](size_t line) {
            if (!name.empty()) {
                GlobalDecl g;
                g.name = name;
                g.c_type = join(type_words, " ");
                for (int k = 0; k < pdepth; ++k) g.c_type += "*";
                if (!array_suffix.empty()) g.c_type += array_suffix;
                g.is_primitive = base_primitive && pdepth == 0 && array_suffix.empty();
                g.initializer = trim(init);
                g.file = f.path;
                g.is_static = is_static;
                g.is_const = is_const;
                g.line = line;
                f.globals.push_back(std::move(g));
            }
            name.clear();
            array_suffix.clear();
            init.clear();
            pdepth = 0;
        };
        bool in_init = false;
        int line = toks[first].line;
        for (; i < last; ++i) {
            const Token &t = toks[i];
            if (in_init) {
                if (t.is("(") || t.is("[") || t.is("{")) ++paren;
                else if (t.is(")") || t.is("]") || t.is("}")) --paren;
                if (t.is(",") && paren == 0) {
                    flush(line);
                    in_init = false;
                    line = t.line;
                } else {
                    if (!init.empty()) init += " ";
                    init += t.text;
                }
                continue;
            }
            if (t.is("*")) {
                ++pdepth;
            } else if (t.is("=")) {
                in_init = true;
            } else if (t.is(",")) {
                flush(line);
                line = t.line;
            } else if (t.is("[")) {
                size_t close = i;
                int d = 0;
                for (; close < last; ++close) {
                    if (toks[close].is("[")) ++d;
                    else if (toks[close].is("]") && --d == 0) break;
                }
                array_suffix = "[";
                for (size_t k = i + 1; k < close && k < last; ++k)
                    array_suffix += toks[k].text;
                array_suffix += "]";
                i = close;
            } else if (t.is_ident() && !is_keyword(t.text)) {
                name = t.text;
            }
        }
        flush(line);
    }
};

} // namespace

CFile parse_c_file(const std::string &path, FileKind kind, std::string text) {
    CFile f;
    f.path = path;
    f.kind = kind;
    f.text = std::move(text);

    for (const RawDirective &rd : extract_directives(f.text)) {
        Directive d = classify_directive(rd.text);
        d.begin = rd.begin;
        d.end = rd.end;
        d.line = rd.line;
        f.directives.push_back(std::move(d));
    }

    TopLevelParser parser(f);
    parser.run();
    return f;
}

// ---------------------------------------------------------------------------
// Project scan
// ---------------------------------------------------------------------------

namespace {

// Returns the text after the "define" keyword, or nullopt when the raw
// directive is not a #define at all.
std::optional<std::string> define_rest(const std::string &raw) {
    std::string s = trim(raw);
    if (s.empty() || s[0] != '#') return std::nullopt;
    size_t p = 1;
    while (p < s.size() && std::isspace(static_cast<unsigned char>(s[p]))) ++p;
    if (s.compare(p, 6, "define") != 0) return std::nullopt;
    p += 6;
    if (p < s.size() && is_ident_char(s[p])) return std::nullopt; // e.g. "defined"
    return s.substr(p);
}

MacroDef make_macro_def(const CFile &f, const Directive &d) {
    MacroDef m;
    auto rest = define_rest(d.raw);
    auto dp = parse_define(*rest);
    m.name = dp->name;
    m.parameters = dp->params;
    m.function_like = dp->function_like;
    m.variadic = dp->variadic;
    m.replacement = dp->body;
    m.file = f.path;
    m.line = d.line;
    m.def_begin = d.begin;
    m.def_end = d.end;
    switch (d.klass) {
    case DirectiveClass::NumericMacro: m.classification = MacroClass::Numeric; break;
    case DirectiveClass::ComplexMacro: m.classification = MacroClass::Complex; break;
    default:
        m.classification = MacroClass::Unhandled;
        m.demotion_reason = m.replacement.empty() ? "empty replacement" : "single-token alias";
        break;
    }
    if (m.classification == MacroClass::Complex) {
        std::string reason = complex_macro_demotion_reason(m);
        if (!reason.empty()) {
            m.classification = MacroClass::Unhandled;
            m.demotion_reason = reason;
        }
    }
    return m;
}

void collect_usage_sites(CProject &proj) {
    for (auto &m : proj.macros) {
        for (const auto &f : proj.files) {
            auto toks = tokenize_c(f.text);
            for (size_t i = 0; i < toks.size(); ++i) {
                if (!toks[i].is_ident() || toks[i].text != m.name) continue;
                MacroUse u;
                u.file = f.path;
                u.begin = toks[i].begin;
                if (m.function_like) {
                    if (i + 1 >= toks.size() || !toks[i + 1].is("(")) continue;
                    size_t close = skip_balanced_tokens(toks, i + 1, "(", ")");
                    u.end = close > i + 1 ? toks[close - 1].end : toks[i].end;
                } else {
                    u.end = toks[i].end;
                }
                m.usage_sites.push_back(std::move(u));
            }
        }
    }
}

} // namespace

CProject scan_project(const std::string &root, const std::string &entry_function) {
    if (!fs::exists(root) || !fs::is_directory(root))
        throw Error("project root does not exist: " + root);

    std::vector<fs::path> paths;
    for (const auto &e : fs::recursive_directory_iterator(root)) {
        if (!e.is_regular_file()) continue;
        auto ext = e.path().extension().string();
        if (ext == ".c" || ext == ".h") paths.push_back(e.path());
    }
    std::sort(paths.begin(), paths.end());
    if (paths.empty()) throw Error("no C sources under " + root);

    CProject proj;
    proj.root = root;
    proj.entry_function = entry_function;

    for (const auto &p : paths) {
        std::string rel = fs::relative(p, root).string();
        FileKind kind = p.extension() == ".h" ? FileKind::Header : FileKind::Source;
        try {
            proj.files.push_back(parse_c_file(rel, kind, read_file(p.string())));
        } catch (const std::exception &e) {
            proj.diagnostics.push_back(rel + ": " + e.what());
        }
    }

    for (const auto &f : proj.files)
        for (const auto &d : f.directives) {
            auto rest = define_rest(d.raw);
            if (rest && parse_define(*rest)) proj.macros.push_back(make_macro_def(f, d));
        }

    collect_usage_sites(proj);

    int entry_defs = 0;
    for (const auto &f : proj.files)
        if (f.find_function(entry_function)) ++entry_defs;
    if (entry_defs == 0)
        proj.diagnostics.push_back("entry function '" + entry_function + "' not found");
    else if (entry_defs > 1)
        proj.diagnostics.push_back("entry function '" + entry_function +
                                   "' defined in multiple files");
    return proj;
}

// ---------------------------------------------------------------------------
// Macro rewriting
// ---------------------------------------------------------------------------

std::optional<NumericRewrite> rewrite_numeric_macro(MacroDef &m) {
    if (m.classification != MacroClass::Numeric)
        throw Error("rewrite_numeric_macro: '" + m.name + "' is not numeric");
    std::string lit = strip_outer_parens(m.replacement);
    auto tag = infer_numeric_const_type(lit);
    if (!tag) {
        m.classification = MacroClass::Unhandled;
        m.demotion_reason = "numeric type inference failed";
        return std::nullopt;
    }
    // Rust has no U/L suffixes; the const type carries the width.
    std::string rust_lit = lit;
    while (!rust_lit.empty() && (rust_lit.back() == 'u' || rust_lit.back() == 'U' ||
                                 rust_lit.back() == 'l' || rust_lit.back() == 'L'))
        rust_lit.pop_back();
    if (*tag == NumTag::F32 && !rust_lit.empty() &&
        (rust_lit.back() == 'f' || rust_lit.back() == 'F'))
        rust_lit.pop_back();

    NumericRewrite r;
    r.c_const_decl = std::string("const ") + c_type_for(*tag) + " " + m.name + "=" + lit + ";";
    r.rust_const_decl = "const " + m.name + ": " + rust_type_for(*tag) + "=" + rust_lit + ";";
    return r;
}

std::string complex_macro_demotion_reason(const MacroDef &m) {
    if (m.variadic) return "variadic parameters";
    auto toks = tokenize_c(m.replacement, false);
    if (toks.empty()) return "empty replacement";
    int paren = 0, brace = 0, bracket = 0;
    for (const auto &t : toks) {
        if (t.is("goto")) return "contains goto";
        if (t.is("#") || t.is("##")) return "token pasting or stringizing";
        if (t.is("(")) ++paren;
        if (t.is(")")) --paren;
        if (t.is("{")) ++brace;
        if (t.is("}")) --brace;
        if (t.is("[")) ++bracket;
        if (t.is("]")) --bracket;
    }
    if (paren != 0 || brace != 0 || bracket != 0)
        return "syntactically incomplete body";
    return {};
}

namespace {

// Splits the arguments of a macro invocation text `name(a, b)`.
std::vector<std::string> split_invocation_args(const std::string &invocation) {
    size_t open = invocation.find('(');
    if (open == std::string::npos) return {};
    size_t close = invocation.rfind(')');
    if (close == std::string::npos || close <= open) return {};
    std::string inner = invocation.substr(open + 1, close - open - 1);
    std::vector<std::string> args;
    std::string cur;
    int depth = 0;
    for (char c : inner) {
        if (c == '(' || c == '[' || c == '{') ++depth;
        if (c == ')' || c == ']' || c == '}') --depth;
        if (c == ',' && depth == 0) {
            args.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    std::string t = trim(cur);
    if (!t.empty() || !args.empty()) args.push_back(t);
    return args;
}

// True when the argument is a plain lvalue chain (ident, member access,
// indexing) that can take a leading '&' without parentheses.
bool is_simple_lvalue(const std::string &arg) {
    auto toks = tokenize_c(arg, false);
    if (toks.empty()) return false;
    for (const auto &t : toks) {
        if (t.is_ident() || t.is(".") || t.is("->") || t.is("[") || t.is("]") ||
            t.kind == TokKind::Number)
            continue;
        return false;
    }
    return toks[0].is_ident();
}

} // namespace

FunctionRewrite rewrite_complex_macro(MacroDef &m, const std::vector<std::string> &usage_contexts,
                                      TranslationOracle &oracle, const CProject *project) {
    FunctionRewrite fr;
    if (m.classification != MacroClass::Complex)
        throw Error("rewrite_complex_macro: '" + m.name + "' is not complex");
    if (usage_contexts.empty())
        throw Error("rewrite_complex_macro: usage contexts required for '" + m.name + "'");

    std::string reason = complex_macro_demotion_reason(m);
    if (!reason.empty()) {
        m.classification = MacroClass::Unhandled;
        m.demotion_reason = reason;
        fr.demoted = true;
        fr.demotion_reason = reason;
        return fr;
    }

    std::string macro_text = "#define " + m.name;
    if (m.function_like) macro_text += "(" + join(m.parameters, ", ") + ")";
    macro_text += " " + m.replacement;

    CFile parsed_fn;
    PhaseHooks hooks;
    hooks.build = [&](int, const std::string &followup) {
        std::string prompt =
            "Rewrite the following C macro as a C function with the same name, "
            "preserving its exact behavior. Infer the parameter types from the "
            "functions that use the macro, shown below as context. If the macro "
            "modifies any of its arguments, take those parameters as pointers and "
            "dereference them inside the function. Reply with only the C function "
            "definition in a fenced code block.\n\nMacro definition:\n```c\n" +
            macro_text + "\n```\n\nFunctions using the macro:\n```c\n";
        for (const auto &ctx : usage_contexts) {
            prompt += ctx;
            if (!ends_with(ctx, "\n")) prompt += "\n";
        }
        prompt += "```\n";
        if (!followup.empty()) prompt += "\n" + followup;
        return prompt;
    };
    hooks.validate = [&](const std::string &code) -> std::string {
        parsed_fn = parse_c_file("<oracle>", FileKind::Source, code);
        const CFunction *fn = parsed_fn.find_function(m.name);
        if (!fn) return "response does not define a C function named " + m.name;
        if (m.function_like) {
            auto args = split_invocation_args(fn->signature.substr(fn->signature.find(m.name)));
            bool takes_void = args.size() == 1 && trim(args[0]) == "void";
            size_t arity = takes_void ? 0 : args.size();
            if (arity != m.parameters.size())
                return "function arity " + std::to_string(arity) + " does not match macro arity " +
                       std::to_string(m.parameters.size());
        }
        return {};
    };

    SessionOutcome outcome = run_with_retries("macro_rewrite", m.name, hooks, oracle, 3);
    fr.session = outcome.session;
    if (!outcome.success) {
        m.classification = MacroClass::Unhandled;
        m.demotion_reason = "oracle did not produce a usable function rewrite";
        fr.demoted = true;
        fr.demotion_reason = m.demotion_reason;
        return fr;
    }

    const CFunction *fn = parsed_fn.find_function(m.name);
    fr.c_function_def = fn->full_text(parsed_fn.text);

    // Which parameters became pointers?
    std::vector<bool> pointer_param;
    {
        auto params = split_invocation_args(fn->signature.substr(fn->signature.find(m.name)));
        if (params.size() == 1 && trim(params[0]) == "void") params.clear();
        for (const auto &p : params) pointer_param.push_back(p.find('*') != std::string::npos);
    }

    for (const MacroUse &u : m.usage_sites) {
        SiteEdit e;
        e.file = u.file;
        e.begin = u.begin;
        e.end = u.end;
        if (!m.function_like) {
            e.replacement = m.name + "()";
            fr.edits.push_back(std::move(e));
            continue;
        }
        if (!project) throw Error("rewrite_complex_macro: project required for call-site edits");
        const CFile *file = nullptr;
        for (const auto &pf : project->files)
            if (pf.path == u.file) file = &pf;
        if (!file) continue;
        std::string invocation = file->text.substr(u.begin, u.end - u.begin);
        auto args = split_invocation_args(invocation);
        if (args.size() != m.parameters.size()) {
            m.classification = MacroClass::Unhandled;
            m.demotion_reason = "call-site arity mismatch at " + u.file;
            fr.demoted = true;
            fr.demotion_reason = m.demotion_reason;
            fr.edits.clear();
            return fr;
        }
        std::string call = m.name + "(";
        for (size_t j = 0; j < args.size(); ++j) {
            if (j) call += ", ";
            if (j < pointer_param.size() && pointer_param[j])
                call += is_simple_lvalue(args[j]) ? "&" + args[j] : "&(" + args[j] + ")";
            else
                call += args[j];
        }
        call += ")";
        e.replacement = std::move(call);
        fr.edits.push_back(std::move(e));
    }
    return fr;
}

// ---------------------------------------------------------------------------
// Fallback preprocessing
// ---------------------------------------------------------------------------

std::string preprocess_text(const std::string &text, const PreprocessConfig &cfg) {
    // Shield include lines behind pragmas that survive the preprocessor.
    auto dirs = extract_directives(text);
    std::string masked;
    std::vector<std::string> kept;
    size_t pos = 0;
    for (const auto &rd : dirs) {
        Directive d = classify_directive(rd.text);
        if (d.klass == DirectiveClass::SystemInclude || d.klass == DirectiveClass::ProjectInclude) {
            masked += text.substr(pos, rd.begin - pos);
            masked += "#pragma rustmap_keep " + std::to_string(kept.size());
            kept.push_back(text.substr(rd.begin, rd.end - rd.begin));
            pos = rd.end;
        }
    }
    masked += text.substr(pos);

    std::vector<std::string> argv = split_command(cfg.command);
    for (const auto &def : cfg.defines) argv.push_back("-D" + def);
    argv.push_back("-");

    RunResult rr = run_command(argv, {.stdin_data = masked});
    if (rr.exit_code != 0)
        throw Error("preprocessor failed (exit " + std::to_string(rr.exit_code) + "): " + rr.err);

    std::string out;
    for (const auto &line : split_lines(rr.out)) {
        std::string t = trim(line);
        if (starts_with(t, "#pragma rustmap_keep ")) {
            size_t idx = std::stoul(t.substr(21));
            out += idx < kept.size() ? kept[idx] : line;
            out += "\n";
        } else {
            out += line;
            out += "\n";
        }
    }
    return out;
}

std::string preprocess_fallback(const CFile &file, const PreprocessConfig &cfg) {
    return preprocess_text(file.text, cfg);
}

} // namespace rustmap
