#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace rustmap {

enum class TokKind { Ident, Number, String, CharLit, Punct };

struct Token {
    TokKind kind;
    std::string text;
    size_t begin = 0; // byte offset into the source
    size_t end = 0;   // one past the last byte
    int line = 1;

    bool is(std::string_view s) const { return text == s; }
    bool is_ident() const { return kind == TokKind::Ident; }
};

// Tokenizes C-like source. Comments and whitespace are skipped; preprocessor
// directive lines (including '\' continuations) are skipped when
// `skip_directives` is set, which is what all structural passes want.
std::vector<Token> tokenize_c(std::string_view src, bool skip_directives = true);

// A raw preprocessor directive: logical line(s) starting with '#'.
struct RawDirective {
    std::string text; // continuation backslashes folded into spaces
    size_t begin = 0; // span in the original source, including continuations
    size_t end = 0;   // up to but not including the final newline
    int line = 1;
};

std::vector<RawDirective> extract_directives(std::string_view src);

// Index of the first token with begin >= offset.
size_t token_at_or_after(const std::vector<Token> &toks, size_t offset);

} // namespace rustmap
