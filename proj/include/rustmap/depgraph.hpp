#pragma once

#include "rustmap/c_model.hpp"

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace rustmap {

// ---------------------------------------------------------------------------
// Call graphs
// ---------------------------------------------------------------------------

enum class EdgeOrigin { Static, Dynamic };

struct CallGraph {
    struct EdgeInfo {
        bool from_static = false;
        bool from_dynamic = false;
    };

    std::set<std::string> nodes;
    std::map<std::pair<std::string, std::string>, EdgeInfo> edges;
    std::set<std::string> executed;

    void add_node(const std::string &n) { nodes.insert(n); }
    void add_edge(const std::string &caller, const std::string &callee, EdgeOrigin origin);
    bool has_edge(const std::string &caller, const std::string &callee) const;
    std::vector<std::string> callees(const std::string &caller) const; // sorted
};

// cflow-style indentation tree: one "name() …" per line, children indented
// one step further. Throws Error with the line number on inconsistent
// indentation.
CallGraph parse_static_callgraph(const std::string &text, int indent_step = 4);

// gprof-style report: flat profile (optional) plus the call graph section.
// Throws Error when the call-graph section is missing entirely. Every
// function mentioned is marked executed.
CallGraph parse_dynamic_callgraph(const std::string &text);

// Neutral test format: `caller -> callee [static|dynamic]` one per line,
// `name [dynamic]` marks a lone executed node, '#' starts a comment.
CallGraph parse_edge_list(const std::string &text);

// Union of nodes/edges with origin flags unioned; the executed set comes
// from the dynamic graph. Commutative and idempotent on node/edge sets.
CallGraph merge_graphs(const CallGraph &static_g, const CallGraph &dynamic_g);

// ---------------------------------------------------------------------------
// SCC condensation and translation order
// ---------------------------------------------------------------------------

// Tarjan's algorithm, iterative. Each SCC's members are sorted; the list is
// in completion order (callees before callers).
std::vector<std::vector<std::string>> scc_decompose(const CallGraph &g);

struct TranslationUnit {
    int id = 0;                       // 1-based position in the plan
    std::vector<std::string> members; // one SCC, sorted
    bool executed = false;            // any member executed under the tests
    bool optional = false;            // not needed for a runnable program
    size_t estimated_size = 0;        // tokens; filled in once texts are known
    // Split metadata: set when this unit is a chunk of a larger one.
    std::string parent;
    int chunk_index = 0; // 1-based among siblings; 0 when not a chunk
    int chunk_count = 0;
    std::string text; // chunk text (split units only)

    std::string name() const;
    bool is_scc() const { return members.size() > 1; }
};

struct TranslationPlan {
    std::vector<TranslationUnit> units;
    std::map<std::string, int> unit_of; // function -> unit id

    const TranslationUnit *unit_for(const std::string &fn) const;
    std::string listing() const; // human-readable ordered listing
};

// Post-order DFS over the SCC condensation from `entry`; executed components
// are visited before non-executed siblings, ties broken lexicographically by
// smallest member name. Unreachable components follow under the same
// discipline. Throws Error when entry is not in the graph.
TranslationPlan translation_order(const CallGraph &g, const std::string &entry);

// ---------------------------------------------------------------------------
// Unit splitting
// ---------------------------------------------------------------------------

// Splits an over-budget unit. Multi-function SCCs split per function first;
// a single over-budget function is chunked at top-level statement
// boundaries. Concatenating the chunk texts reproduces the original function
// text byte-for-byte. Throws Error when an atomic statement alone exceeds
// the limit.
std::vector<TranslationUnit> split_unit(const TranslationUnit &u, size_t limit_tokens,
                                        const CProject &project,
                                        double chars_per_token = 4.0);

// Token estimate for a function's full text.
size_t unit_size_tokens(const TranslationUnit &u, const CProject &project,
                        double chars_per_token = 4.0);

} // namespace rustmap
