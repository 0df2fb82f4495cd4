#include "rustmap/c_lexer.hpp"

#include "rustmap/text.hpp"

#include <algorithm>
#include <cctype>

namespace rustmap {

namespace {

// Longest-match punctuators; three-char ones first.
const char *kPunct3[] = {"<<=", ">>=", "..."};
const char *kPunct2[] = {"->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=",
                         "&&", "||", "+=", "-=", "*=", "/=", "%=", "&=", "^=",
                         "|=", "##", "::"};

bool at_line_start(std::string_view src, size_t i) {
    while (i > 0) {
        char c = src[i - 1];
        if (c == '\n') return true;
        if (c != ' ' && c != '\t') return false;
        --i;
    }
    return true;
}

} // namespace

std::vector<Token> tokenize_c(std::string_view src, bool skip_directives) {
    std::vector<Token> toks;
    size_t i = 0;
    int line = 1;
    const size_t n = src.size();

    auto advance_line = [&](char c) {
        if (c == '\n') ++line;
    };

    while (i < n) {
        char c = src[i];
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            advance_line(c);
            ++i;
            continue;
        }
        // Comments
        if (c == '/' && i + 1 < n && src[i + 1] == '/') {
            while (i < n && src[i] != '\n') ++i;
            continue;
        }
        if (c == '/' && i + 1 < n && src[i + 1] == '*') {
            i += 2;
            while (i + 1 < n && !(src[i] == '*' && src[i + 1] == '/')) {
                advance_line(src[i]);
                ++i;
            }
            i = std::min(n, i + 2);
            continue;
        }
        // Directive line
        if (c == '#' && skip_directives && at_line_start(src, i)) {
            while (i < n) {
                if (src[i] == '\\' && i + 1 < n && src[i + 1] == '\n') {
                    ++line;
                    i += 2;
                    continue;
                }
                if (src[i] == '\n') break;
                ++i;
            }
            continue;
        }

        Token t;
        t.begin = i;
        t.line = line;

        if (is_ident_start(c)) {
            size_t b = i;
            while (i < n && is_ident_char(src[i])) ++i;
            t.kind = TokKind::Ident;
            t.text = std::string(src.substr(b, i - b));
        } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                   (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
            size_t b = i;
            // pp-number: digits, dots, ident chars, exponent signs
            while (i < n) {
                char d = src[i];
                if (is_ident_char(d) || d == '.') {
                    ++i;
                } else if ((d == '+' || d == '-') && i > b &&
                           (src[i - 1] == 'e' || src[i - 1] == 'E' || src[i - 1] == 'p' ||
                            src[i - 1] == 'P')) {
                    ++i;
                } else {
                    break;
                }
            }
            t.kind = TokKind::Number;
            t.text = std::string(src.substr(b, i - b));
        } else if (c == '"' || c == '\'') {
            char quote = c;
            size_t b = i;
            ++i;
            while (i < n && src[i] != quote) {
                if (src[i] == '\\' && i + 1 < n) {
                    ++i;
                } else {
                    advance_line(src[i]);
                }
                ++i;
            }
            i = std::min(n, i + 1);
            t.kind = quote == '"' ? TokKind::String : TokKind::CharLit;
            t.text = std::string(src.substr(b, i - b));
        } else {
            size_t b = i;
            std::string_view rest = src.substr(i);
            size_t len = 1;
            for (const char *p : kPunct3)
                if (starts_with(rest, p)) {
                    len = 3;
                    break;
                }
            if (len == 1)
                for (const char *p : kPunct2)
                    if (starts_with(rest, p)) {
                        len = 2;
                        break;
                    }
            i += len;
            t.kind = TokKind::Punct;
            t.text = std::string(src.substr(b, len));
        }
        t.end = i;
        toks.push_back(std::move(t));
    }
    return toks;
}

std::vector<RawDirective> extract_directives(std::string_view src) {
    std::vector<RawDirective> out;
    size_t i = 0;
    int line = 1;
    const size_t n = src.size();
    bool in_block_comment = false;

    while (i < n) {
        // Examine one physical line at a time.
        size_t line_begin = i;
        size_t j = i;
        while (j < n && src[j] != '\n') ++j;

        if (!in_block_comment) {
            size_t k = line_begin;
            while (k < j && (src[k] == ' ' || src[k] == '\t')) ++k;
            if (k < j && src[k] == '#') {
                RawDirective d;
                d.begin = line_begin;
                d.line = line;
                std::string text;
                size_t p = k;
                while (p < n) {
                    if (src[p] == '\\' && p + 1 < n && src[p + 1] == '\n') {
                        text += ' ';
                        p += 2;
                        ++line;
                        continue;
                    }
                    if (src[p] == '\n') break;
                    text += src[p];
                    ++p;
                }
                d.end = p;
                d.text = trim_right(text);
                out.push_back(std::move(d));
                ++line;
                i = p < n ? p + 1 : n;
                continue;
            }
        }

        // Track block comments so a '#' inside one is not a directive.
        for (size_t k = line_begin; k < j; ++k) {
            if (in_block_comment) {
                if (src[k] == '*' && k + 1 < j && src[k + 1] == '/') {
                    in_block_comment = false;
                    ++k;
                }
            } else if (src[k] == '/' && k + 1 < j && src[k + 1] == '/') {
                break;
            } else if (src[k] == '/' && k + 1 < j && src[k + 1] == '*') {
                in_block_comment = true;
                ++k;
            } else if (src[k] == '"' || src[k] == '\'') {
                char q = src[k];
                ++k;
                while (k < j && src[k] != q) {
                    if (src[k] == '\\') ++k;
                    ++k;
                }
            }
        }
        ++line;
        i = j < n ? j + 1 : n;
    }
    return out;
}

size_t token_at_or_after(const std::vector<Token> &toks, size_t offset) {
    auto it = std::lower_bound(toks.begin(), toks.end(), offset,
                               [](const Token &t, size_t off) { return t.begin < off; });
    return static_cast<size_t>(it - toks.begin());
}

} // namespace rustmap
