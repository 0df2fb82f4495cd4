#include "rustmap/statement_index.hpp"

#include <functional>

namespace rustmap {

namespace {

class StmtParser {
  public:
    explicit StmtParser(const std::vector<Token> &toks) : toks_(toks) {}

    std::vector<Stmt> parse_list(size_t stop_at_rbrace_depth = 0) {
        std::vector<Stmt> out;
        while (!at_end() && !cur().is("}")) out.push_back(parse_stmt());
        (void)stop_at_rbrace_depth;
        return out;
    }

  private:
    const std::vector<Token> &toks_;
    size_t pos_ = 0;

    bool at_end() const { return pos_ >= toks_.size(); }
    const Token &cur() const { return toks_[pos_]; }
    const Token &peek(size_t k) const { return toks_[pos_ + k]; }
    bool has(size_t k) const { return pos_ + k < toks_.size(); }

    void begin_stmt(Stmt &s) {
        s.tok_begin = pos_;
        s.begin = cur().begin;
        s.line = cur().line;
    }
    void end_stmt(Stmt &s) {
        s.tok_end = pos_;
        s.end = pos_ > 0 ? toks_[pos_ - 1].end : s.begin;
    }

    void skip_balanced(const char *open, const char *close) {
        if (at_end() || !cur().is(open)) return;
        int depth = 0;
        while (!at_end()) {
            if (cur().is(open)) ++depth;
            else if (cur().is(close)) {
                --depth;
                if (depth == 0) {
                    ++pos_;
                    return;
                }
            }
            ++pos_;
        }
    }

    // Consume through the terminating ';' at paren/bracket depth 0.
    void consume_simple_tail() {
        int paren = 0;
        while (!at_end()) {
            const Token &t = cur();
            if (t.is("(") || t.is("[")) ++paren;
            else if (t.is(")") || t.is("]")) --paren;
            else if (t.is(";") && paren <= 0) {
                ++pos_;
                return;
            } else if (t.is("{")) {
                // Brace initializer inside a simple statement.
                skip_balanced("{", "}");
                continue;
            } else if (t.is("}")) {
                return; // unterminated: let the caller see the brace
            }
            ++pos_;
        }
    }

    Stmt parse_stmt() {
        Stmt s;
        begin_stmt(s);
        const Token &t = cur();

        if (t.is("{")) {
            s.kind = StmtKind::Block;
            ++pos_;
            s.children = parse_list();
            if (!at_end() && cur().is("}")) ++pos_;
            end_stmt(s);
            return s;
        }
        if (t.is("if")) {
            s.kind = StmtKind::If;
            ++pos_;
            skip_balanced("(", ")");
            s.children.push_back(parse_stmt());
            if (!at_end() && cur().is("else")) {
                ++pos_;
                s.has_else = true;
                s.children.push_back(parse_stmt());
            }
            end_stmt(s);
            return s;
        }
        if (t.is("while")) {
            s.kind = StmtKind::While;
            ++pos_;
            skip_balanced("(", ")");
            s.children.push_back(parse_stmt());
            end_stmt(s);
            return s;
        }
        if (t.is("do")) {
            s.kind = StmtKind::DoWhile;
            ++pos_;
            s.children.push_back(parse_stmt());
            if (!at_end() && cur().is("while")) {
                ++pos_;
                skip_balanced("(", ")");
            }
            if (!at_end() && cur().is(";")) ++pos_;
            end_stmt(s);
            return s;
        }
        if (t.is("for")) {
            s.kind = StmtKind::For;
            ++pos_;
            skip_balanced("(", ")");
            s.children.push_back(parse_stmt());
            end_stmt(s);
            return s;
        }
        if (t.is("switch")) {
            s.kind = StmtKind::Switch;
            ++pos_;
            skip_balanced("(", ")");
            if (!at_end() && cur().is("{")) {
                ++pos_;
                parse_case_groups(s);
                if (!at_end() && cur().is("}")) ++pos_;
            }
            end_stmt(s);
            return s;
        }
        if (t.is("goto")) {
            s.kind = StmtKind::Goto;
            ++pos_;
            if (!at_end() && cur().is_ident()) {
                s.name = cur().text;
                ++pos_;
            }
            if (!at_end() && cur().is(";")) ++pos_;
            end_stmt(s);
            return s;
        }
        if (t.is("return")) {
            s.kind = StmtKind::Return;
            ++pos_;
            consume_simple_tail();
            end_stmt(s);
            return s;
        }
        if (t.is("break") || t.is("continue")) {
            s.kind = t.is("break") ? StmtKind::Break : StmtKind::Continue;
            ++pos_;
            if (!at_end() && cur().is(";")) ++pos_;
            end_stmt(s);
            return s;
        }
        // Plain label: IDENT ':' not followed by ':' (and not a case label,
        // which is handled in parse_case_groups).
        if (t.is_ident() && has(1) && peek(1).is(":")) {
            s.kind = StmtKind::Label;
            s.name = t.text;
            pos_ += 2;
            end_stmt(s);
            return s;
        }

        s.kind = StmtKind::Simple;
        consume_simple_tail();
        end_stmt(s);
        return s;
    }

    void parse_case_groups(Stmt &sw) {
        while (!at_end() && !cur().is("}")) {
            if (cur().is("case") || cur().is("default")) {
                Stmt g;
                begin_stmt(g);
                g.kind = StmtKind::CaseGroup;
                // Collect consecutive labels.
                while (!at_end() && (cur().is("case") || cur().is("default"))) {
                    if (cur().is("default")) {
                        g.labels.emplace_back("default");
                        ++pos_;
                    } else {
                        ++pos_; // 'case'
                        std::string label;
                        while (!at_end() && !cur().is(":")) {
                            if (!label.empty()) label += ' ';
                            label += cur().text;
                            ++pos_;
                        }
                        g.labels.push_back(label);
                    }
                    if (!at_end() && cur().is(":")) ++pos_;
                }
                // Body: statements until the next label or the closing brace.
                while (!at_end() && !cur().is("}") && !cur().is("case") && !cur().is("default"))
                    g.children.push_back(parse_stmt());
                end_stmt(g);
                sw.children.push_back(std::move(g));
            } else {
                // Statement before any label; attach to an unlabeled group.
                Stmt g;
                begin_stmt(g);
                g.kind = StmtKind::CaseGroup;
                while (!at_end() && !cur().is("}") && !cur().is("case") && !cur().is("default"))
                    g.children.push_back(parse_stmt());
                end_stmt(g);
                sw.children.push_back(std::move(g));
            }
        }
    }
};

void flatten_into(const std::vector<Stmt> &stmts, std::vector<const Stmt *> &out) {
    for (const Stmt &s : stmts) {
        out.push_back(&s);
        flatten_into(s.children, out);
    }
}

bool stmt_terminates(const Stmt &s) {
    switch (s.kind) {
    case StmtKind::Break:
    case StmtKind::Continue:
    case StmtKind::Goto:
    case StmtKind::Return:
        return true;
    case StmtKind::Block:
        return list_terminates(s.children);
    case StmtKind::If:
        return s.has_else && s.children.size() == 2 && stmt_terminates(s.children[0]) &&
               stmt_terminates(s.children[1]);
    default:
        return false;
    }
}

} // namespace

std::vector<const Stmt *> StatementIndex::flat() const {
    std::vector<const Stmt *> out;
    flatten_into(statements, out);
    return out;
}

StatementIndex index_statements(std::string_view body) {
    StatementIndex idx;
    idx.tokens = tokenize_c(body);
    StmtParser p(idx.tokens);
    idx.statements = p.parse_list();
    return idx;
}

int cyclomatic_complexity(const std::vector<Token> &toks, size_t first, size_t last) {
    int decisions = 0;
    for (size_t i = first; i < last && i < toks.size(); ++i) {
        const Token &t = toks[i];
        if (t.is("if") || t.is("while") || t.is("for") || t.is("case") || t.is("&&") ||
            t.is("||") || t.is("?"))
            ++decisions;
    }
    return 1 + decisions;
}

int cyclomatic_complexity(std::string_view fragment) {
    auto toks = tokenize_c(fragment);
    return cyclomatic_complexity(toks, 0, toks.size());
}

bool list_terminates(const std::vector<Stmt> &stmts) {
    if (stmts.empty()) return false;
    // A trailing label does not execute anything; look at the last real one.
    for (auto it = stmts.rbegin(); it != stmts.rend(); ++it) {
        if (it->kind == StmtKind::Label) continue;
        return stmt_terminates(*it);
    }
    return false;
}

} // namespace rustmap
