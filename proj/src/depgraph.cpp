#include "rustmap/depgraph.hpp"

#include "rustmap/errors.hpp"
#include "rustmap/oracle.hpp"
#include "rustmap/text.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

namespace rustmap {

// ---------------------------------------------------------------------------
// CallGraph basics
// ---------------------------------------------------------------------------

void CallGraph::add_edge(const std::string &caller, const std::string &callee,
                         EdgeOrigin origin) {
    nodes.insert(caller);
    nodes.insert(callee);
    EdgeInfo &info = edges[{caller, callee}];
    if (origin == EdgeOrigin::Static) info.from_static = true;
    else {
        info.from_dynamic = true;
        executed.insert(caller);
        executed.insert(callee);
    }
}

bool CallGraph::has_edge(const std::string &caller, const std::string &callee) const {
    return edges.count({caller, callee}) > 0;
}

std::vector<std::string> CallGraph::callees(const std::string &caller) const {
    std::vector<std::string> out;
    for (const auto &[e, info] : edges)
        if (e.first == caller) out.push_back(e.second);
    return out;
}

// ---------------------------------------------------------------------------
// cflow-style parser
// ---------------------------------------------------------------------------

CallGraph parse_static_callgraph(const std::string &text, int indent_step) {
    if (indent_step <= 0) indent_step = 4;
    CallGraph g;
    std::vector<std::string> stack; // stack[level] = node name
    int lineno = 0;
    for (const auto &line : split_lines(text)) {
        ++lineno;
        if (trim(line).empty()) continue;
        int indent = indent_width(line, indent_step);
        if (indent % indent_step != 0)
            throw Error("inconsistent indentation at line " + std::to_string(lineno));
        int level = indent / indent_step;

        std::string t = trim(line);
        size_t paren = t.find("()");
        if (paren == std::string::npos || paren == 0)
            throw Error("unrecognized call tree entry at line " + std::to_string(lineno));
        std::string name = t.substr(0, paren);
        if (!is_identifier(name))
            throw Error("bad function name '" + name + "' at line " + std::to_string(lineno));

        if (level > static_cast<int>(stack.size()))
            throw Error("indentation jumps a level at line " + std::to_string(lineno));
        stack.resize(static_cast<size_t>(level));
        if (level > 0) g.add_edge(stack[level - 1], name, EdgeOrigin::Static);
        else g.add_node(name);
        stack.push_back(name);
    }
    return g;
}

// ---------------------------------------------------------------------------
// gprof-style parser
// ---------------------------------------------------------------------------

namespace {

bool is_dashed_separator(const std::string &line) {
    std::string t = trim(line);
    return t.size() >= 10 && t.find_first_not_of('-') == std::string::npos;
}

// Strips " <cycle N>" annotations and a trailing " [n]" index.
std::string gprof_name_from(const std::string &tail) {
    std::string t = trim(tail);
    size_t cyc = t.find("<cycle");
    if (cyc != std::string::npos) t = trim(t.substr(0, cyc));
    if (!t.empty() && t.back() == ']') {
        size_t open = t.rfind('[');
        if (open != std::string::npos) t = trim(t.substr(0, open));
    }
    return t;
}

// For caller/callee lines the name is everything after the numeric columns.
std::string gprof_entry_name(const std::string &line) {
    // Tokens: floats / fractions like "3/3" first, then the name.
    std::istringstream ss(line);
    std::string tok, name;
    std::vector<std::string> toks;
    while (ss >> tok) toks.push_back(tok);
    size_t i = 0;
    while (i < toks.size()) {
        const std::string &s = toks[i];
        bool numeric = !s.empty() && (std::isdigit(static_cast<unsigned char>(s[0])) ||
                                      s[0] == '.' || s[0] == '-');
        if (!numeric) break;
        ++i;
    }
    for (; i < toks.size(); ++i) {
        if (!name.empty()) name += ' ';
        name += toks[i];
    }
    return gprof_name_from(name);
}

} // namespace

CallGraph parse_dynamic_callgraph(const std::string &text) {
    CallGraph g;
    auto lines = split_lines(text);

    // Locate the call graph section: the "index % time" header or the first
    // primary line of the form "[n] ...".
    size_t cg_begin = lines.size();
    for (size_t i = 0; i < lines.size(); ++i) {
        std::string t = trim(lines[i]);
        if (starts_with(t, "index %") || starts_with(t, "index  %")) {
            cg_begin = i + 1;
            break;
        }
    }
    if (cg_begin == lines.size())
        throw Error("gprof report has no call-graph section");

    // Flat profile section (before the call graph): mark names executed.
    bool in_flat = false;
    for (size_t i = 0; i < cg_begin; ++i) {
        std::string t = trim(lines[i]);
        if (starts_with(t, "Flat profile")) {
            in_flat = true;
            continue;
        }
        if (!in_flat || t.empty()) continue;
        if (starts_with(t, "Call graph")) break;
        // Data rows start with a percentage.
        if (std::isdigit(static_cast<unsigned char>(t[0]))) {
            size_t sp = t.find_last_of(" \t");
            if (sp != std::string::npos) {
                std::string name = t.substr(sp + 1);
                if (is_identifier(name)) {
                    g.add_node(name);
                    g.executed.insert(name);
                }
            }
        }
    }

    // Entry blocks are separated by dashed lines.
    std::vector<std::vector<std::string>> blocks(1);
    for (size_t i = cg_begin; i < lines.size(); ++i) {
        if (is_dashed_separator(lines[i])) {
            if (!blocks.back().empty()) blocks.emplace_back();
            continue;
        }
        std::string t = trim(lines[i]);
        if (t.empty()) continue;
        if (starts_with(t, "This table") || starts_with(t, "Index by function")) break;
        blocks.back().push_back(lines[i]);
    }

    for (const auto &block : blocks) {
        // Primary line starts with "[n]".
        size_t primary = block.size();
        for (size_t i = 0; i < block.size(); ++i) {
            if (starts_with(trim(block[i]), "[")) {
                primary = i;
                break;
            }
        }
        if (primary == block.size()) continue;
        std::string pline = trim(block[primary]);
        size_t close = pline.find(']');
        if (close == std::string::npos) continue;
        std::string name = gprof_entry_name(pline.substr(close + 1));
        if (name.empty() || name == "<spontaneous>") continue;
        g.add_node(name);
        g.executed.insert(name);

        for (size_t i = 0; i < block.size(); ++i) {
            if (i == primary) continue;
            std::string t = trim(block[i]);
            if (t.empty() || t == "<spontaneous>") continue;
            std::string other = gprof_entry_name(t);
            if (other.empty() || !is_identifier(other)) continue;
            if (i < primary)
                g.add_edge(other, name, EdgeOrigin::Dynamic); // caller above
            else
                g.add_edge(name, other, EdgeOrigin::Dynamic); // callee below
        }
    }
    return g;
}

// ---------------------------------------------------------------------------
// Neutral edge list
// ---------------------------------------------------------------------------

CallGraph parse_edge_list(const std::string &text) {
    CallGraph g;
    int lineno = 0;
    for (const auto &raw : split_lines(text)) {
        ++lineno;
        std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;

        EdgeOrigin origin = EdgeOrigin::Static;
        bool executed_mark = false;
        size_t br = line.find('[');
        if (br != std::string::npos) {
            std::string tag = to_lower(trim(line.substr(br + 1, line.find(']') - br - 1)));
            if (tag == "dynamic") origin = EdgeOrigin::Dynamic;
            else if (tag == "executed") executed_mark = true;
            else if (tag != "static")
                throw Error("bad origin tag '" + tag + "' at line " + std::to_string(lineno));
            line = trim(line.substr(0, br));
        }

        size_t arrow = line.find("->");
        if (arrow == std::string::npos) {
            if (!is_identifier(line))
                throw Error("bad node name at line " + std::to_string(lineno));
            g.add_node(line);
            if (executed_mark || origin == EdgeOrigin::Dynamic) g.executed.insert(line);
            continue;
        }
        std::string caller = trim(line.substr(0, arrow));
        std::string callee = trim(line.substr(arrow + 2));
        if (!is_identifier(caller) || !is_identifier(callee))
            throw Error("bad edge at line " + std::to_string(lineno));
        g.add_edge(caller, callee, origin);
    }
    return g;
}

CallGraph merge_graphs(const CallGraph &static_g, const CallGraph &dynamic_g) {
    CallGraph g;
    g.nodes = static_g.nodes;
    g.nodes.insert(dynamic_g.nodes.begin(), dynamic_g.nodes.end());
    g.edges = static_g.edges;
    for (const auto &[e, info] : dynamic_g.edges) {
        CallGraph::EdgeInfo &dst = g.edges[e];
        dst.from_static = dst.from_static || info.from_static;
        dst.from_dynamic = dst.from_dynamic || info.from_dynamic;
    }
    g.executed = dynamic_g.executed;
    return g;
}

// ---------------------------------------------------------------------------
// Tarjan SCC (iterative)
// ---------------------------------------------------------------------------

std::vector<std::vector<std::string>> scc_decompose(const CallGraph &g) {
    std::vector<std::string> names(g.nodes.begin(), g.nodes.end());
    std::map<std::string, int> id;
    for (size_t i = 0; i < names.size(); ++i) id[names[i]] = static_cast<int>(i);

    std::vector<std::vector<int>> adj(names.size());
    for (const auto &[e, info] : g.edges) adj[id[e.first]].push_back(id[e.second]);
    for (auto &v : adj) std::sort(v.begin(), v.end());

    const int n = static_cast<int>(names.size());
    std::vector<int> index(n, -1), low(n, 0);
    std::vector<bool> on_stack(n, false);
    std::vector<int> stack;
    int counter = 0;
    std::vector<std::vector<std::string>> sccs;

    struct Frame {
        int v;
        size_t child = 0;
    };

    for (int root = 0; root < n; ++root) {
        if (index[root] != -1) continue;
        std::vector<Frame> frames{{root}};
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = true;

        while (!frames.empty()) {
            Frame &f = frames.back();
            if (f.child < adj[f.v].size()) {
                int w = adj[f.v][f.child++];
                if (index[w] == -1) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    frames.push_back({w});
                } else if (on_stack[w]) {
                    low[f.v] = std::min(low[f.v], index[w]);
                }
            } else {
                if (low[f.v] == index[f.v]) {
                    std::vector<std::string> scc;
                    int w;
                    do {
                        w = stack.back();
                        stack.pop_back();
                        on_stack[w] = false;
                        scc.push_back(names[w]);
                    } while (w != f.v);
                    std::sort(scc.begin(), scc.end());
                    sccs.push_back(std::move(scc));
                }
                int v = f.v;
                frames.pop_back();
                if (!frames.empty()) low[frames.back().v] = std::min(low[frames.back().v], low[v]);
            }
        }
    }
    return sccs;
}

// ---------------------------------------------------------------------------
// Translation order
// ---------------------------------------------------------------------------

std::string TranslationUnit::name() const {
    std::string base = is_scc() ? "scc_" + std::to_string(id) + "_" + members.front()
                                : members.front();
    if (chunk_index > 0)
        base += "_part" + std::to_string(chunk_index) + "of" + std::to_string(chunk_count);
    return base;
}

const TranslationUnit *TranslationPlan::unit_for(const std::string &fn) const {
    auto it = unit_of.find(fn);
    if (it == unit_of.end()) return nullptr;
    for (const auto &u : units)
        if (u.id == it->second) return &u;
    return nullptr;
}

std::string TranslationPlan::listing() const {
    std::ostringstream ss;
    for (const auto &u : units) {
        ss << u.id << ". {" << join(u.members, ", ") << "}";
        if (u.executed) ss << "  [executed]";
        if (u.optional) ss << "  [optional]";
        ss << "\n";
    }
    return ss.str();
}

TranslationPlan translation_order(const CallGraph &g, const std::string &entry) {
    if (!g.nodes.count(entry)) throw Error("entry function '" + entry + "' not in call graph");

    auto sccs = scc_decompose(g);
    std::map<std::string, int> comp_of;
    for (size_t c = 0; c < sccs.size(); ++c)
        for (const auto &m : sccs[c]) comp_of[m] = static_cast<int>(c);

    const int nc = static_cast<int>(sccs.size());
    std::vector<bool> comp_executed(nc, false);
    for (int c = 0; c < nc; ++c)
        for (const auto &m : sccs[c])
            if (g.executed.count(m)) comp_executed[c] = true;

    std::vector<std::set<int>> children(nc);
    for (const auto &[e, info] : g.edges) {
        int a = comp_of[e.first], b = comp_of[e.second];
        if (a != b) children[a].insert(b);
    }

    // Sibling order: executed first, then lexicographic by smallest member.
    auto ordered = [&](const std::set<int> &cs) {
        std::vector<int> v(cs.begin(), cs.end());
        std::sort(v.begin(), v.end(), [&](int a, int b) {
            if (comp_executed[a] != comp_executed[b]) return bool(comp_executed[a]);
            return bool(sccs[a].front() < sccs[b].front());
        });
        return v;
    };

    TranslationPlan plan;
    std::vector<bool> visited(nc, false);

    auto dfs = [&](int root) {
        struct Frame {
            int c;
            std::vector<int> kids;
            size_t next = 0;
        };
        std::vector<Frame> st;
        if (visited[root]) return;
        visited[root] = true;
        st.push_back({root, ordered(children[root])});
        while (!st.empty()) {
            Frame &f = st.back();
            if (f.next < f.kids.size()) {
                int k = f.kids[f.next++];
                if (!visited[k]) {
                    visited[k] = true;
                    st.push_back({k, ordered(children[k])});
                }
            } else {
                TranslationUnit u;
                u.id = static_cast<int>(plan.units.size()) + 1;
                u.members = sccs[f.c];
                u.executed = comp_executed[f.c];
                u.optional = !u.executed;
                for (const auto &m : u.members) plan.unit_of[m] = u.id;
                plan.units.push_back(std::move(u));
                st.pop_back();
            }
        }
    };

    dfs(comp_of[entry]);

    // Unreachable components, same discipline.
    std::set<int> remaining;
    for (int c = 0; c < nc; ++c)
        if (!visited[c]) remaining.insert(c);
    for (int c : ordered(remaining)) dfs(c);

    return plan;
}

// ---------------------------------------------------------------------------
// Unit splitting
// ---------------------------------------------------------------------------

size_t unit_size_tokens(const TranslationUnit &u, const CProject &project,
                        double chars_per_token) {
    if (!u.text.empty()) return estimate_tokens(u.text, chars_per_token);
    size_t total = 0;
    for (const auto &m : u.members) {
        const CFile *f = project.file_of_function(m);
        if (!f) continue;
        total += estimate_tokens(f->find_function(m)->full_text(f->text), chars_per_token);
    }
    return total;
}

namespace {

// Boundary offsets (relative to the body) after each statement. Statements
// that alone exceed the limit contribute their inner boundaries too, so a
// function that is one giant loop still splits at valid places.
void collect_bounds(const std::vector<Stmt> &stmts, size_t limit, double cpt,
                    std::vector<size_t> &out) {
    for (const Stmt &s : stmts) {
        size_t est = static_cast<size_t>(
            std::ceil(static_cast<double>(s.end - s.begin) / (cpt > 0 ? cpt : 4.0)));
        if (est > limit && !s.children.empty()) collect_bounds(s.children, limit, cpt, out);
        out.push_back(s.end);
    }
}

// Greedy chunking of one function at statement boundaries.
std::vector<TranslationUnit> chunk_function(const TranslationUnit &u, const std::string &fname,
                                            size_t limit, const CProject &project,
                                            double cpt) {
    const CFile *f = project.file_of_function(fname);
    if (!f) throw Error("split_unit: function '" + fname + "' not found in project");
    const CFunction *fn = f->find_function(fname);

    std::string body = fn->body_text(f->text);
    StatementIndex idx = index_statements(body);
    std::string full = fn->full_text(f->text);
    size_t header_len = fn->body_begin - fn->decl_begin;

    std::vector<size_t> rel_bounds;
    collect_bounds(idx.statements, limit, cpt, rel_bounds);
    std::vector<size_t> bounds{0};
    for (size_t r : rel_bounds) bounds.push_back(header_len + r);
    bounds.push_back(full.size());
    std::sort(bounds.begin(), bounds.end());
    bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());

    std::vector<std::string> chunks;
    size_t start = 0;
    size_t b = 1;
    while (start < full.size() && b < bounds.size()) {
        if (estimate_tokens(full.substr(start, bounds[b] - start), cpt) > limit)
            throw Error("split_unit: atomic statement in '" + fname +
                        "' exceeds the token limit");
        size_t j = b;
        while (j + 1 < bounds.size() &&
               estimate_tokens(full.substr(start, bounds[j + 1] - start), cpt) <= limit)
            ++j;
        chunks.push_back(full.substr(start, bounds[j] - start));
        start = bounds[j];
        b = j + 1;
    }
    if (start < full.size()) chunks.push_back(full.substr(start));

    std::vector<TranslationUnit> out;
    for (size_t k = 0; k < chunks.size(); ++k) {
        TranslationUnit c;
        c.id = u.id;
        c.members = {fname};
        c.executed = u.executed;
        c.optional = u.optional;
        c.parent = u.name();
        c.chunk_index = static_cast<int>(k) + 1;
        c.chunk_count = static_cast<int>(chunks.size());
        c.text = chunks[k];
        c.estimated_size = estimate_tokens(chunks[k], cpt);
        out.push_back(std::move(c));
    }
    return out;
}

} // namespace

std::vector<TranslationUnit> split_unit(const TranslationUnit &u, size_t limit_tokens,
                                        const CProject &project, double chars_per_token) {
    if (limit_tokens == 0) throw Error("split_unit: zero token limit");
    if (unit_size_tokens(u, project, chars_per_token) <= limit_tokens) return {u}; // identity

    if (u.members.size() > 1) {
        // One sub-unit per function; cross-references within the SCC are
        // declared as known dependencies during prompting.
        std::vector<TranslationUnit> out;
        for (const auto &m : u.members) {
            TranslationUnit sub;
            sub.id = u.id;
            sub.members = {m};
            sub.executed = u.executed;
            sub.optional = u.optional;
            sub.parent = u.name();
            sub.estimated_size = unit_size_tokens(sub, project, chars_per_token);
            if (sub.estimated_size > limit_tokens) {
                auto chunks = chunk_function(sub, m, limit_tokens, project, chars_per_token);
                out.insert(out.end(), chunks.begin(), chunks.end());
            } else {
                out.push_back(std::move(sub));
            }
        }
        return out;
    }
    return chunk_function(u, u.members.front(), limit_tokens, project, chars_per_token);
}

} // namespace rustmap
