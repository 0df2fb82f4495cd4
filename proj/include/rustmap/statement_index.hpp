#pragma once

#include "rustmap/c_lexer.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace rustmap {

enum class StmtKind {
    Simple,
    Block,
    If,
    While,
    DoWhile,
    For,
    Switch,
    CaseGroup,
    Goto,
    Label,
    Return,
    Break,
    Continue,
};

struct Stmt {
    StmtKind kind = StmtKind::Simple;
    size_t begin = 0; // byte span in the original text, terminator included
    size_t end = 0;
    size_t tok_begin = 0; // token range in StatementIndex::tokens
    size_t tok_end = 0;
    int line = 1;
    std::vector<Stmt> children;      // then/else, loop body, switch groups, …
    std::vector<std::string> labels; // CaseGroup: label texts; "default" included
    std::string name;                // Goto target or Label name
    bool has_else = false;           // If: children = {then, else?}
};

// Statement-level index of one brace-delimited body. Token offsets are
// relative to the text that was indexed (callers index a whole file or a
// function body slice and keep track of the base offset themselves).
struct StatementIndex {
    std::vector<Token> tokens;
    std::vector<Stmt> statements;

    // Statements in textual order, compound statements flattened away so
    // each entry is an executable leaf or a compound head.
    std::vector<const Stmt *> flat() const;
    // Top-level statements only (no descent).
    size_t top_level_count() const { return statements.size(); }
};

// Indexes the statements of `body`, which must be the text between (and
// excluding) a function's outer braces.
StatementIndex index_statements(std::string_view body);

// 1 + number of decision points (if, loop, case arm, &&, ||, ternary) in
// the token range [first, last).
int cyclomatic_complexity(const std::vector<Token> &toks, size_t first, size_t last);
int cyclomatic_complexity(std::string_view fragment);

// True when the statement list cannot fall off its end: the last statement
// (recursively) is a break/return/goto/continue. Conservative: loops and
// switches never terminate, an If terminates only when both branches do.
bool list_terminates(const std::vector<Stmt> &stmts);

} // namespace rustmap
