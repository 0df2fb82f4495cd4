#include "rustmap/depgraph.hpp"

#include "support.hpp"

#include <doctest.h>

#include <random>
#include <set>

using namespace rustmap;
using testsupport::TempDir;

namespace {

// Brute-force mutual-reachability partition: the independent oracle for SCC
// checks. Two nodes share a class iff each reaches the other.
std::set<std::set<std::string>> reachability_partition(const CallGraph &g) {
    std::vector<std::string> names(g.nodes.begin(), g.nodes.end());
    const size_t n = names.size();
    std::map<std::string, size_t> id;
    for (size_t i = 0; i < n; ++i) id[names[i]] = i;

    std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
    for (size_t i = 0; i < n; ++i) reach[i][i] = true;
    for (const auto &[e, info] : g.edges) reach[id[e.first]][id[e.second]] = true;
    for (size_t k = 0; k < n; ++k)
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < n; ++j)
                if (reach[i][k] && reach[k][j]) reach[i][j] = true;

    std::set<std::set<std::string>> classes;
    for (size_t i = 0; i < n; ++i) {
        std::set<std::string> cls;
        for (size_t j = 0; j < n; ++j)
            if (reach[i][j] && reach[j][i]) cls.insert(names[j]);
        classes.insert(std::move(cls));
    }
    return classes;
}

std::set<std::set<std::string>> as_partition(const std::vector<std::vector<std::string>> &sccs) {
    std::set<std::set<std::string>> out;
    for (const auto &s : sccs) out.insert(std::set<std::string>(s.begin(), s.end()));
    return out;
}

CallGraph random_graph(std::mt19937 &rng, int max_nodes = 12) {
    std::uniform_int_distribution<int> nd(1, max_nodes);
    int n = nd(rng);
    std::vector<std::string> names;
    for (int i = 0; i < n; ++i) names.push_back(std::string(1, static_cast<char>('a' + i)));
    CallGraph g;
    for (const auto &nm : names) g.add_node(nm);
    std::uniform_real_distribution<double> p(0.0, 1.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (p(rng) < 0.25)
                g.add_edge(names[static_cast<size_t>(i)], names[static_cast<size_t>(j)],
                           p(rng) < 0.3 ? EdgeOrigin::Dynamic : EdgeOrigin::Static);
    return g;
}

// The Fig.-3-shaped graph: A->B; B->C,E,F; C<->D; D->G.
CallGraph fig3_graph() {
    return parse_edge_list("A -> B [static]\n"
                           "B -> C [static]\n"
                           "B -> E [static]\n"
                           "B -> F [static]\n"
                           "C -> D [static]\n"
                           "D -> C [static]\n"
                           "D -> G [static]\n");
}

std::vector<std::vector<std::string>> plan_members(const TranslationPlan &p) {
    std::vector<std::vector<std::string>> out;
    for (const auto &u : p.units) out.push_back(u.members);
    return out;
}

} // namespace

TEST_SUITE("depgraph") {

TEST_CASE("parse_static_callgraph: smallest tree") {
    CallGraph g = parse_static_callgraph("main()\n    helper()\n");
    CHECK(g.nodes == std::set<std::string>{"helper", "main"});
    CHECK(g.has_edge("main", "helper"));
    CHECK(g.edges.size() == 1);
}

TEST_CASE("parse_static_callgraph: cflow-style entries with signatures") {
    std::string text =
        "main() <int main (int argc, char **argv) at bzip2.c:200>:\n"
        "    compressStream() <void compressStream (void) at bzip2.c:80>:\n"
        "        BZ2_bzCompressInit() <int BZ2_bzCompressInit (int) at bzlib.c:10>\n"
        "    BZ2_decompress() <int BZ2_decompress (void) at decompress.c:30>:\n"
        "        BZ2_hbCreateDecodeTables() <void BZ2_hbCreateDecodeTables (void) at huffman.c:5>\n";
    CallGraph g = parse_static_callgraph(text);
    CHECK(g.has_edge("BZ2_decompress", "BZ2_hbCreateDecodeTables"));
    CHECK(g.has_edge("main", "compressStream"));
    CHECK(g.nodes.size() == 5);
}

TEST_CASE("parse_static_callgraph: repeated subtree references deduplicate") {
    std::string text = "main()\n"
                       "    helper()\n"
                       "    other()\n"
                       "        helper()\n";
    CallGraph g = parse_static_callgraph(text);
    CHECK(g.nodes.size() == 3); // set semantics
    CHECK(g.has_edge("main", "helper"));
    CHECK(g.has_edge("other", "helper"));
}

TEST_CASE("parse_static_callgraph: inconsistent indentation reports the line") {
    CHECK_THROWS_WITH_AS(parse_static_callgraph("main()\n   helper()\n"),
                         doctest::Contains("line 2"), Error);
    CHECK_THROWS_WITH_AS(parse_static_callgraph("main()\n        helper()\n"),
                         doctest::Contains("line 2"), Error);
}

TEST_CASE("parse_dynamic_callgraph: hand-built report") {
    std::string text =
        "Flat profile:\n"
        "\n"
        "  %   cumulative   self              self     total\n"
        " time   seconds   seconds    calls  Ts/call  Ts/call  name\n"
        "100.00      0.01     0.01        1     0.01     0.01  compress\n"
        "\n"
        "index % time    self  children    called     name\n"
        "                0.00    0.01       1/1           main [1]\n"
        "[2]    100.0    0.00    0.01       1         compress [2]\n"
        "-----------------------------------------------\n"
        "                                                 <spontaneous>\n"
        "[1]    100.0    0.00    0.01                 main [1]\n"
        "                0.00    0.01       1/1           compress [2]\n"
        "-----------------------------------------------\n";
    CallGraph g = parse_dynamic_callgraph(text);
    CHECK(g.has_edge("main", "compress"));
    CHECK(g.executed.count("main"));
    CHECK(g.executed.count("compress"));
    auto it = g.edges.find({"main", "compress"});
    REQUIRE(it != g.edges.end());
    CHECK(it->second.from_dynamic);
}

TEST_CASE("parse_dynamic_callgraph: empty profile yields just main") {
    std::string text =
        "index % time    self  children    called     name\n"
        "                                                 <spontaneous>\n"
        "[1]    100.0    0.00    0.00                 main [1]\n"
        "-----------------------------------------------\n";
    CallGraph g = parse_dynamic_callgraph(text);
    CHECK(g.nodes == std::set<std::string>{"main"});
    CHECK(g.edges.empty());
    CHECK(g.executed.count("main"));
}

TEST_CASE("parse_dynamic_callgraph: flat-profile-only function is executed, no edges") {
    std::string text =
        "Flat profile:\n"
        "\n"
        " time   seconds   seconds    calls  name\n"
        "100.00      0.01     0.01        1  helper\n"
        "\n"
        "index % time    self  children    called     name\n"
        "[1]    100.0    0.00    0.00                 main [1]\n"
        "-----------------------------------------------\n";
    CallGraph g = parse_dynamic_callgraph(text);
    CHECK(g.nodes.count("helper"));
    CHECK(g.executed.count("helper"));
    for (const auto &[e, info] : g.edges) {
        CHECK(e.first != "helper");
        CHECK(e.second != "helper");
    }
}

TEST_CASE("parse_dynamic_callgraph: missing call-graph section is an error") {
    CHECK_THROWS_AS(parse_dynamic_callgraph("Flat profile:\n no call graph here\n"), Error);
}

TEST_CASE("merge_graphs: dynamic subset of static") {
    CallGraph s = parse_edge_list("main -> helper [static]\nmain -> unused [static]\n");
    CallGraph d = parse_edge_list("main -> helper [dynamic]\n");
    CallGraph m = merge_graphs(s, d);
    CHECK(m.nodes == s.nodes);
    CHECK(m.edges.size() == s.edges.size());
    CHECK(m.executed == std::set<std::string>{"helper", "main"});
    auto info = m.edges.at({"main", "helper"});
    CHECK(info.from_static);
    CHECK(info.from_dynamic);
}

TEST_CASE("merge_graphs: dynamic-only indirect call survives the merge") {
    // A function-pointer call the static analyzer cannot see.
    CallGraph s = parse_edge_list("main -> dispatch [static]\n");
    CallGraph d = parse_edge_list("dispatch -> handler_a [dynamic]\n");
    CallGraph m = merge_graphs(s, d);
    CHECK(m.has_edge("dispatch", "handler_a"));
    CHECK(m.edges.at({"dispatch", "handler_a"}).from_dynamic);
    CHECK(!m.edges.at({"dispatch", "handler_a"}).from_static);
}

TEST_CASE("merge_graphs: disjoint graphs union; commutative and idempotent") {
    CallGraph a = parse_edge_list("x -> y [static]\n");
    CallGraph b = parse_edge_list("p -> q [dynamic]\n");
    CallGraph m = merge_graphs(a, b);
    CHECK(m.nodes.size() == 4);
    CHECK(m.edges.size() == 2);

    CallGraph ba = merge_graphs(b, a);
    CHECK(ba.nodes == m.nodes);
    std::set<std::pair<std::string, std::string>> e1, e2;
    for (const auto &[e, i] : m.edges) e1.insert(e);
    for (const auto &[e, i] : ba.edges) e2.insert(e);
    CHECK(e1 == e2);

    CallGraph mm = merge_graphs(m, m);
    CHECK(mm.nodes == m.nodes);
    CHECK(mm.edges.size() == m.edges.size());
}

TEST_CASE("scc_decompose: mutual recursion forms one component") {
    CallGraph g = parse_edge_list("C -> D [static]\nD -> C [static]\n");
    auto sccs = scc_decompose(g);
    REQUIRE(sccs.size() == 1);
    CHECK(sccs[0] == std::vector<std::string>{"C", "D"});
}

TEST_CASE("scc_decompose: acyclic graph gives singletons") {
    CallGraph g = parse_edge_list("a -> b [static]\nb -> c [static]\na -> c [static]\n");
    CHECK(scc_decompose(g).size() == 3);
}

TEST_CASE("scc_decompose: 3-cycle matches the brute-force oracle") {
    CallGraph g = parse_edge_list("A -> B [static]\nB -> C [static]\nC -> A [static]\n");
    auto sccs = scc_decompose(g);
    REQUIRE(sccs.size() == 1);
    CHECK(sccs[0].size() == 3);
    CHECK(as_partition(sccs) == reachability_partition(g));
}

TEST_CASE("scc_decompose: random graphs vs mutual-reachability oracle") {
    std::mt19937 rng(20240901);
    for (int trial = 0; trial < 300; ++trial) {
        CallGraph g = random_graph(rng);
        CHECK(as_partition(scc_decompose(g)) == reachability_partition(g));
    }
}

TEST_CASE("translation_order: Fig.-3-shaped graph, exact unit order") {
    TranslationPlan p = translation_order(fig3_graph(), "A");
    std::vector<std::vector<std::string>> expect = {{"G"}, {"C", "D"}, {"E"}, {"F"}, {"B"}, {"A"}};
    CHECK(plan_members(p) == expect);
    CHECK(p.units[1].id == 2); // {C, D} is the 2nd unit to be translated
    CHECK(p.unit_of.at("C") == 2);
    CHECK(p.unit_of.at("D") == 2);
}

TEST_CASE("translation_order: single node") {
    CallGraph g;
    g.add_node("main");
    g.executed.insert("main");
    TranslationPlan p = translation_order(g, "main");
    REQUIRE(p.units.size() == 1);
    CHECK(p.units[0].members == std::vector<std::string>{"main"});
    CHECK(p.units[0].executed);
}

TEST_CASE("translation_order: absent entry is an error") {
    CallGraph g;
    g.add_node("main");
    CHECK_THROWS_AS(translation_order(g, "nosuch"), Error);
}

TEST_CASE("translation_order: executed siblings are visited first") {
    CallGraph g = parse_edge_list("main -> alpha [static]\n"
                                  "main -> zeta [dynamic]\n"
                                  "main [dynamic]\n");
    TranslationPlan p = translation_order(g, "main");
    // zeta is executed, alpha is not: zeta's unit comes first despite names.
    REQUIRE(p.units.size() == 3);
    CHECK(p.units[0].members == std::vector<std::string>{"zeta"});
    CHECK(p.units[0].executed);
    CHECK(p.units[1].members == std::vector<std::string>{"alpha"});
    CHECK(p.units[1].optional);
}

TEST_CASE("translation_order: unreachable components appended afterward") {
    CallGraph g = parse_edge_list("main -> a [static]\n"
                                  "orphan -> b [static]\n");
    TranslationPlan p = translation_order(g, "main");
    REQUIRE(p.units.size() == 4);
    CHECK(p.units[0].members == std::vector<std::string>{"a"});
    CHECK(p.units[1].members == std::vector<std::string>{"main"});
    // orphan subtree follows, callees first.
    CHECK(p.units[2].members == std::vector<std::string>{"b"});
    CHECK(p.units[3].members == std::vector<std::string>{"orphan"});
}

TEST_CASE("translation_order: callee-before-caller on random graphs") {
    std::mt19937 rng(987654);
    for (int trial = 0; trial < 1000; ++trial) {
        CallGraph g = random_graph(rng);
        std::string entry = *g.nodes.begin();
        TranslationPlan p = translation_order(g, entry);
        for (const auto &[e, info] : g.edges) {
            int cu = p.unit_of.at(e.first), du = p.unit_of.at(e.second);
            if (cu != du) CHECK(du < cu); // callee first
        }
    }
}

TEST_CASE("translation_order: deterministic across runs") {
    std::mt19937 rng(5150);
    for (int trial = 0; trial < 50; ++trial) {
        CallGraph g = random_graph(rng);
        std::string entry = *g.nodes.begin();
        TranslationPlan p1 = translation_order(g, entry);
        TranslationPlan p2 = translation_order(g, entry);
        CHECK(plan_members(p1) == plan_members(p2));
        CHECK(p1.listing() == p2.listing());
    }
}

TEST_CASE("split_unit: unit within the limit is returned unchanged") {
    TempDir td("split_id");
    td.write("f.c", "int tiny(void) { return 1; }\nint main(void) { return tiny(); }\n");
    auto proj = scan_project(td.path());
    TranslationUnit u;
    u.id = 1;
    u.members = {"tiny"};
    auto out = split_unit(u, 1000, proj);
    REQUIRE(out.size() == 1);
    CHECK(out[0].members == std::vector<std::string>{"tiny"});
    CHECK(out[0].chunk_index == 0);
}

TEST_CASE("split_unit: oversized function splits at the while boundary") {
    std::string body_pre, body_post;
    for (int i = 0; i < 12; ++i)
        body_pre += "    x = x + " + std::to_string(i) + ";\n";
    for (int i = 0; i < 12; ++i)
        body_post += "    x = x - " + std::to_string(i) + ";\n";
    std::string fn = "int work(int x)\n{\n" + body_pre +
                     "    while (x > 0) {\n        x--;\n    }\n" + body_post +
                     "    return x;\n}\n";
    TempDir td("split_while");
    td.write("w.c", fn + "int main(void) { return work(9); }\n");
    auto proj = scan_project(td.path());

    TranslationUnit u;
    u.id = 1;
    u.members = {"work"};
    size_t full_tokens = unit_size_tokens(u, proj);
    size_t limit = full_tokens / 2 + 8;
    auto out = split_unit(u, limit, proj);
    REQUIRE(out.size() >= 2);
    std::string concat;
    for (const auto &c : out) {
        CHECK(c.estimated_size <= limit);
        concat += c.text;
    }
    const CFile *f = proj.file_of_function("work");
    CHECK(concat == f->find_function("work")->full_text(f->text));
}

TEST_CASE("split_unit: chunk concatenation is byte-exact for many limits") {
    std::string fn = "int gen(int a)\n{\n";
    for (int i = 0; i < 30; ++i) {
        if (i % 7 == 0) fn += "    if (a > " + std::to_string(i) + ") { a -= 1; }\n";
        else fn += "    a += " + std::to_string(i * 3) + ";\n";
    }
    fn += "    return a;\n}\n";
    TempDir td("split_prop");
    td.write("g.c", fn + "int main(void) { return gen(1); }\n");
    auto proj = scan_project(td.path());
    const CFile *f = proj.file_of_function("gen");
    std::string original = f->find_function("gen")->full_text(f->text);

    TranslationUnit u;
    u.id = 1;
    u.members = {"gen"};
    for (size_t limit : {20u, 35u, 50u, 80u, 200u}) {
        auto out = split_unit(u, limit, proj);
        std::string concat;
        for (const auto &c : out) concat += c.chunk_index > 0 ? c.text : original;
        CHECK(concat == original);
        if (out.size() > 1)
            for (const auto &c : out) CHECK(c.estimated_size <= limit);
    }
}

TEST_CASE("split_unit: two-function SCC splits into per-function sub-units") {
    TempDir td("split_scc");
    td.write("r.c", "int pong(int n);\n"
                    "int ping(int n) { if (n <= 0) return 0; return pong(n - 1); }\n"
                    "int pong(int n) { if (n <= 0) return 1; return ping(n - 1); }\n"
                    "int main(void) { return ping(4); }\n");
    auto proj = scan_project(td.path());
    TranslationUnit u;
    u.id = 7;
    u.members = {"ping", "pong"};
    size_t each = unit_size_tokens(TranslationUnit{.members = {"ping"}}, proj);
    size_t limit = each + 6; // each fits alone, both together exceed
    auto out = split_unit(u, limit, proj);
    REQUIRE(out.size() == 2);
    CHECK(out[0].members == std::vector<std::string>{"ping"});
    CHECK(out[1].members == std::vector<std::string>{"pong"});
    CHECK(out[0].parent == u.name());
}

TEST_CASE("split_unit: atomic statement beyond the limit is an error") {
    TempDir td("split_atomic");
    std::string fn = "int big(void)\n{\n    return 1 + 2 + 3 + 4 + 5 + 6 + 7 + 8 + 9 + 10"
                     " + 11 + 12 + 13 + 14 + 15 + 16 + 17 + 18 + 19 + 20;\n}\n";
    td.write("a.c", fn + "int main(void) { return big(); }\n");
    auto proj = scan_project(td.path());
    TranslationUnit u;
    u.id = 1;
    u.members = {"big"};
    CHECK_THROWS_WITH_AS(split_unit(u, 4, proj), doctest::Contains("atomic"), Error);
}

} // TEST_SUITE
