#include "rustmap/c_model.hpp"
#include "rustmap/subprocess.hpp"
#include "rustmap/text.hpp"

#include "support.hpp"

#include <doctest.h>

#include <set>

using namespace rustmap;
using testsupport::TempDir;

namespace {

// Token texts of a source string, for expand-and-compare checks.
std::vector<std::string> token_texts(const std::string &src) {
    std::vector<std::string> out;
    for (const auto &t : tokenize_c(src)) out.push_back(t.text);
    return out;
}

bool cc_accepts(const std::string &code) {
    TempDir td("cccheck");
    td.write("probe.c", code);
    auto rr = run_command({"cc", "-fsyntax-only", td.sub("probe.c")});
    return rr.exit_code == 0;
}

} // namespace

TEST_SUITE("c_model") {

TEST_CASE("classify_directive: includes, defines, conditionals") {
    CHECK(classify_directive("#include <stdlib.h>").klass == DirectiveClass::SystemInclude);
    CHECK(classify_directive("#include <stdlib.h>").include_target == "stdlib.h");
    CHECK(classify_directive("#include \"bzlib.h\"").klass == DirectiveClass::ProjectInclude);
    CHECK(classify_directive("#define BZ_RUNB 1").klass == DirectiveClass::NumericMacro);
    CHECK(classify_directive("#define BZ_M_IDLE 1").klass == DirectiveClass::NumericMacro);
    CHECK(classify_directive("#define HALF (16)").klass == DirectiveClass::NumericMacro);
    CHECK(classify_directive("#define MAX(a,b) ((a)>(b)?(a):(b))").klass ==
          DirectiveClass::ComplexMacro);
    CHECK(classify_directive("#define TWO (1+1)").klass == DirectiveClass::ComplexMacro);
    CHECK(classify_directive("#ifdef _WIN32").klass == DirectiveClass::Conditional);
    CHECK(classify_directive("#ifndef GUARD_H").klass == DirectiveClass::Conditional);
    CHECK(classify_directive("#if defined(FOO)").klass == DirectiveClass::Conditional);
    CHECK(classify_directive("#elif FOO > 2").klass == DirectiveClass::Conditional);
    CHECK(classify_directive("#endif").klass == DirectiveClass::Other);
    CHECK(classify_directive("#pragma once").klass == DirectiveClass::Other);
    CHECK(classify_directive("#define FLAG").klass == DirectiveClass::Other);
    CHECK(classify_directive("#define ALIAS other_name").klass == DirectiveClass::Other);
}

TEST_CASE("classify_directive: malformed input lands in Other with a diagnostic") {
    Directive d = classify_directive("#");
    CHECK(d.klass == DirectiveClass::Other);
    CHECK(!d.diagnostic.empty());
    d = classify_directive("# 5 \"x.c\"");
    CHECK(d.klass == DirectiveClass::Other);
    CHECK(!d.diagnostic.empty());
    d = classify_directive("#include oops");
    CHECK(d.klass == DirectiveClass::Other);
    CHECK(!d.diagnostic.empty());
}

TEST_CASE("classify_directive: stable under whitespace normalization") {
    const char *variants[] = {
        "#define BZ_RUNB 1",
        "#  define   BZ_RUNB   1",
        "\t#\tdefine\tBZ_RUNB\t1",
    };
    for (const char *v : variants)
        CHECK(classify_directive(v).klass == DirectiveClass::NumericMacro);

    const char *inc[] = {"#include <stdlib.h>", "#  include   <stdlib.h>"};
    for (const char *v : inc)
        CHECK(classify_directive(v).klass == DirectiveClass::SystemInclude);
}

TEST_CASE("infer_numeric_const_type follows the narrowest-tag rules") {
    CHECK(infer_numeric_const_type("1") == NumTag::I32);
    CHECK(infer_numeric_const_type("0") == NumTag::I32);
    CHECK(infer_numeric_const_type("(42)") == NumTag::I32);
    // 4294967295 > 2^31-1 and <= 2^32-1
    CHECK(infer_numeric_const_type("0xFFFFFFFF") == NumTag::U32);
    CHECK(infer_numeric_const_type("0x7FFFFFFF") == NumTag::I32);
    CHECK(infer_numeric_const_type("2.5") == NumTag::F64);
    CHECK(infer_numeric_const_type("1e3") == NumTag::F64);
    CHECK(infer_numeric_const_type("1.5f") == NumTag::F32);
    CHECK(infer_numeric_const_type("5000000000") == NumTag::I64);
    CHECK(infer_numeric_const_type("123U") == NumTag::U32);
    CHECK(!infer_numeric_const_type("abc").has_value());
    CHECK(!infer_numeric_const_type("1 + 2").has_value());
}

TEST_CASE("rewrite_numeric_macro emits paired C and Rust consts") {
    MacroDef m;
    m.name = "BZ_RUNB";
    m.replacement = "1";
    m.classification = MacroClass::Numeric;
    auto r = rewrite_numeric_macro(m);
    REQUIRE(r.has_value());
    CHECK(r->c_const_decl == "const int BZ_RUNB=1;");
    CHECK(r->rust_const_decl == "const BZ_RUNB: i32=1;");

    MacroDef idle;
    idle.name = "BZ_M_IDLE";
    idle.replacement = "1";
    idle.classification = MacroClass::Numeric;
    auto r2 = rewrite_numeric_macro(idle);
    REQUIRE(r2.has_value());
    CHECK(r2->c_const_decl == "const int BZ_M_IDLE=1;");
    CHECK(r2->rust_const_decl == "const BZ_M_IDLE: i32=1;");

    MacroDef fl;
    fl.name = "SCALE";
    fl.replacement = "2.5";
    fl.classification = MacroClass::Numeric;
    auto r3 = rewrite_numeric_macro(fl);
    REQUIRE(r3.has_value());
    CHECK(r3->c_const_decl == "const double SCALE=2.5;");
    CHECK(r3->rust_const_decl == "const SCALE: f64=2.5;");
    // the emitted C declaration must itself compile
    CHECK(cc_accepts(r3->c_const_decl + "\n"));
}

TEST_CASE("scan_project: six bzip2-named sources are all found") {
    auto proj = scan_project(testsupport::fixture_path("bzip2_names"));
    int sources = 0;
    for (const auto &f : proj.files)
        if (f.kind == FileKind::Source) ++sources;
    CHECK(sources == 6);
    std::set<std::string> stems;
    for (const auto &f : proj.files) stems.insert(f.stem());
    CHECK(stems.count("blocksort"));
    CHECK(stems.count("huffman"));
}

TEST_CASE("scan_project: empty directory is an error") {
    TempDir td("empty");
    CHECK_THROWS_WITH_AS(scan_project(td.path()), doctest::Contains("no C sources"), Error);
}

TEST_CASE("scan_project: header defining a function is parsed like source") {
    TempDir td("hdr");
    td.write("util.h", "static int twice(int x)\n"
                       "{\n"
                       "    return x * 2;\n"
                       "}\n");
    td.write("main.c", "#include \"util.h\"\nint main(void) { return twice(2); }\n");
    auto proj = scan_project(td.path());
    const CFile *hdr = nullptr;
    for (const auto &f : proj.files)
        if (f.kind == FileKind::Header) hdr = &f;
    REQUIRE(hdr != nullptr);
    REQUIRE(hdr->functions.size() == 1);
    CHECK(hdr->functions[0].name == "twice");
    CHECK(hdr->functions[0].is_static);
}

TEST_CASE("scan_project: globals, structs and qualifiers") {
    TempDir td("globals");
    td.write("g.c",
             "typedef unsigned int UInt32;\n"
             "typedef struct {\n"
             "    UInt32* arr2;\n"
             "    unsigned char* block;\n"
             "    int nblock;\n"
             "} EState;\n"
             "int numFileNames, numFilesProcessed;\n"
             "static double ratio = 0.5;\n"
             "const double PI = 3.14;\n"
             "char *name;\n"
             "int table[16];\n"
             "extern int elsewhere;\n"
             "int main(void) { return 0; }\n");
    auto proj = scan_project(td.path());
    REQUIRE(proj.files.size() == 1);
    const CFile &f = proj.files[0];

    REQUIRE(f.structs.size() == 1);
    CHECK(f.structs[0].name == "EState");
    REQUIRE(f.structs[0].fields.size() == 3);
    CHECK(f.structs[0].fields[0].name == "arr2");
    CHECK(f.structs[0].fields[0].pointer_depth == 1);
    CHECK(f.structs[0].fields[0].type == "UInt32");
    CHECK(f.structs[0].fields[2].name == "nblock");
    CHECK(f.structs[0].fields[2].pointer_depth == 0);

    REQUIRE(f.globals.size() == 6);
    CHECK(f.globals[0].name == "numFileNames");
    CHECK(f.globals[0].is_primitive);
    CHECK(f.globals[1].name == "numFilesProcessed");
    CHECK(f.globals[2].name == "ratio");
    CHECK(f.globals[2].is_static);
    CHECK(f.globals[2].initializer == "0.5");
    CHECK(f.globals[3].name == "PI");
    CHECK(f.globals[3].is_const);
    CHECK(f.globals[3].is_primitive);
    CHECK(f.globals[4].name == "name");
    CHECK(!f.globals[4].is_primitive); // pointer
    CHECK(f.globals[5].name == "table");
    CHECK(!f.globals[5].is_primitive); // array

    REQUIRE(f.functions.size() == 1);
    CHECK(f.functions[0].name == "main");
}

TEST_CASE("scan_project: macro table and usage sites") {
    TempDir td("macros");
    td.write("m.c", "#define BZ_RUNB 1\n"
                    "#define fswap(zz1, zz2) { int zztmp = zz1; zz1 = zz2; zz2 = zztmp; }\n"
                    "#define RETURN(rrr) { retVal = rrr; goto save_state; }\n"
                    "int use(int a, int b) {\n"
                    "    fswap(a, b);\n"
                    "    return a + BZ_RUNB;\n"
                    "}\n"
                    "int main(void) { return use(1, 2) - BZ_RUNB; }\n");
    auto proj = scan_project(td.path());
    REQUIRE(proj.macros.size() == 3);

    const MacroDef *runb = proj.find_macro("BZ_RUNB");
    REQUIRE(runb);
    CHECK(runb->classification == MacroClass::Numeric);
    CHECK(runb->usage_sites.size() == 2);

    const MacroDef *fswap = proj.find_macro("fswap");
    REQUIRE(fswap);
    CHECK(fswap->classification == MacroClass::Complex);
    CHECK(fswap->function_like);
    REQUIRE(fswap->parameters.size() == 2);
    CHECK(fswap->usage_sites.size() == 1);

    // goto in the body demotes at scan time
    const MacroDef *ret = proj.find_macro("RETURN");
    REQUIRE(ret);
    CHECK(ret->classification == MacroClass::Unhandled);
    CHECK(ret->demotion_reason == "contains goto");
}

TEST_CASE("rewrite_complex_macro: fswap becomes a function, call sites take addresses") {
    TempDir td("fswap");
    td.write("sort.c",
             "typedef unsigned int UInt32;\n"
             "typedef int Int32;\n"
             "#define fswap(zz1, zz2) { UInt32 zztmp = zz1; zz1 = zz2; zz2 = zztmp; }\n"
             "static void fallbackQSort3(UInt32* fmap, UInt32* eclass, Int32 loSt, Int32 hiSt)\n"
             "{\n"
             "    Int32 unLo = loSt, ltLo = hiSt;\n"
             "    int n = 0;\n"
             "    if (n == 0) {\n"
             "        fswap(fmap[unLo], fmap[ltLo]);\n"
             "        ltLo++; unLo++;\n"
             "    }\n"
             "    (void)eclass;\n"
             "}\n"
             "int main(void) { return 0; }\n");
    auto proj = scan_project(td.path());
    MacroDef *m = nullptr;
    for (auto &mm : proj.macros)
        if (mm.name == "fswap") m = &mm;
    REQUIRE(m);

    FunctionOracle oracle([](const std::string &, const std::string &) {
        return std::string("Here is the function:\n```c\n"
                           "static void fswap(UInt32* zz1, UInt32* zz2) {\n"
                           "    UInt32 zztmp = *zz1;\n"
                           "    *zz1 = *zz2;\n"
                           "    *zz2 = zztmp;\n"
                           "}\n```\n");
    });

    std::vector<std::string> contexts;
    contexts.push_back(proj.files[0].functions[0].full_text(proj.files[0].text));
    FunctionRewrite fr = rewrite_complex_macro(*m, contexts, oracle, &proj);
    REQUIRE(!fr.demoted);
    CHECK(fr.c_function_def.find("static void fswap(UInt32* zz1, UInt32* zz2)") !=
          std::string::npos);
    REQUIRE(fr.edits.size() == 1);
    CHECK(fr.edits[0].replacement == "fswap(&fmap[unLo], &fmap[ltLo])");
}

TEST_CASE("rewrite_complex_macro: goto body is demoted, not sent to the oracle") {
    MacroDef m;
    m.name = "RETURN";
    m.function_like = true;
    m.parameters = {"rrr"};
    m.replacement = "{ retVal = rrr; goto save_state_and_return; }";
    m.classification = MacroClass::Complex;
    bool called = false;
    FunctionOracle oracle([&](const std::string &, const std::string &) {
        called = true;
        return std::string();
    });
    FunctionRewrite fr = rewrite_complex_macro(m, {"void f(void) {}"}, oracle, nullptr);
    CHECK(fr.demoted);
    CHECK(fr.demotion_reason == "contains goto");
    CHECK(m.classification == MacroClass::Unhandled);
    CHECK(!called);
}

TEST_CASE("build_working_copy: parameterless expression macro runs with value 2") {
    TempDir td("two");
    td.write("two.c", "#include <stdio.h>\n"
                      "#define TWO (1+1)\n"
                      "int main(void) {\n"
                      "    int x = TWO;\n"
                      "    printf(\"%d\\n\", x);\n"
                      "    return 0;\n"
                      "}\n");
    auto proj = scan_project(td.path());
    FunctionOracle oracle([](const std::string &, const std::string &) {
        return std::string("```c\nstatic int TWO(void) { return (1+1); }\n```\n");
    });
    TempDir out("two_out");
    PreprocessConfig pp;
    pp.command = "cc -E -P -x c";
    auto wc = build_working_copy(proj, out.path(), &oracle, pp);
    CHECK(wc.demoted.empty());

    std::string rewritten = read_file(out.sub("two.c"));
    CHECK(rewritten.find("static int TWO(void)") != std::string::npos);
    CHECK(rewritten.find("TWO()") != std::string::npos);

    auto cc = run_command({"cc", out.sub("two.c"), "-o", out.sub("two")});
    REQUIRE(cc.exit_code == 0);
    auto run = run_command({out.sub("two")});
    CHECK(run.out == "2\n");
}

TEST_CASE("preprocess_fallback: conditional branch removed, includes survive") {
    TempDir td("pp");
    std::string src = "#include <stdio.h>\n"
                      "#ifdef _WIN32\n"
                      "int windows_only(void) { return 1; }\n"
                      "#endif\n"
                      "int always(void) { return 2; }\n";
    CFile f = parse_c_file("pp.c", FileKind::Source, src);
    PreprocessConfig cfg;
    cfg.command = "cc -E -P -x c";
    std::string out = preprocess_fallback(f, cfg);
    CHECK(out.find("windows_only") == std::string::npos);
    CHECK(out.find("always") != std::string::npos);
    CHECK(out.find("#include <stdio.h>") != std::string::npos);
}

TEST_CASE("preprocess_fallback: no directives leaves tokens unchanged") {
    std::string src = "int add(int a, int b) { return a + b; }\n";
    CFile f = parse_c_file("t.c", FileKind::Source, src);
    PreprocessConfig cfg;
    cfg.command = "cc -E -P -x c";
    CHECK(token_texts(preprocess_fallback(f, cfg)) == token_texts(src));
}

TEST_CASE("preprocess_fallback: rewritten const survives preprocessing") {
    // BZ_RUNB was already rewritten to a const in the working copy; the
    // fallback pass must not lose the identifier.
    std::string src = "const int BZ_RUNB=1;\n"
                      "#ifdef NEVER\n"
                      "int gone(void);\n"
                      "#endif\n"
                      "int use(void) { return BZ_RUNB; }\n";
    CFile f = parse_c_file("t.c", FileKind::Source, src);
    PreprocessConfig cfg;
    cfg.command = "cc -E -P -x c";
    std::string out = preprocess_fallback(f, cfg);
    CHECK(out.find("BZ_RUNB") != std::string::npos);
    CHECK(out.find("gone") == std::string::npos);
}

TEST_CASE("numeric rewrite property: const substitution equals macro expansion") {
    // Substituting the const's value back at each usage site must give the
    // same token stream as letting the preprocessor expand the macro.
    std::string src = "#define LIMIT 16\n"
                      "#define SCALE 2\n"
                      "int clamp(int v) {\n"
                      "    if (v > LIMIT) return LIMIT * SCALE;\n"
                      "    return v * SCALE;\n"
                      "}\n";
    TempDir td("subst");
    td.write("s.c", src);
    auto proj = scan_project(td.path());

    PreprocessConfig cfg;
    cfg.command = "cc -E -P -x c";
    std::string expanded = preprocess_text(src, cfg);

    TempDir out("subst_out");
    auto wc = build_working_copy(proj, out.path(), nullptr, cfg);
    REQUIRE(wc.demoted.empty());
    std::string rewritten = read_file(out.sub("s.c"));

    // Drop the inserted const declarations, then substitute values by name.
    std::vector<std::string> kept_lines;
    for (const auto &line : rustmap::split_lines(rewritten)) {
        if (starts_with(trim(line), "const int LIMIT") || starts_with(trim(line), "const int SCALE"))
            continue;
        kept_lines.push_back(line);
    }
    std::string substituted = join(kept_lines, "\n");
    substituted = replace_all(substituted, "LIMIT", "16");
    substituted = replace_all(substituted, "SCALE", "2");
    CHECK(token_texts(substituted) == token_texts(expanded));
}

TEST_CASE("demotion is monotone: a case-label numeric macro stays a macro") {
    TempDir td("caselabel");
    td.write("c.c", "#include <stdio.h>\n"
                    "#define MODE_A 1\n"
                    "#define MODE_B 2\n"
                    "int pick(int m) {\n"
                    "    switch (m) {\n"
                    "    case MODE_A: return 10;\n"
                    "    case MODE_B: return 20;\n"
                    "    default: return 0;\n"
                    "    }\n"
                    "}\n"
                    "int main(void) { printf(\"%d\\n\", pick(MODE_A)); return 0; }\n");
    auto proj = scan_project(td.path());
    TempDir out("caselabel_out");
    PreprocessConfig cfg;
    cfg.command = "cc -E -P -x c";
    auto wc = build_working_copy(proj, out.path(), nullptr, cfg);
    // Both macros are used as case labels: rewritten consts would not compile.
    CHECK(wc.demoted.size() == 2);
    std::string rewritten = read_file(out.sub("c.c"));
    CHECK(rewritten.find("const int MODE_A") == std::string::npos);
    // The fallback pass expanded them instead.
    CHECK(rewritten.find("case 1") != std::string::npos);

    auto cc = run_command({"cc", out.sub("c.c"), "-o", out.sub("c")});
    REQUIRE(cc.exit_code == 0);
    auto run = run_command({out.sub("c")});
    CHECK(run.out == "10\n");
}

TEST_CASE("statement index: shapes, spans and terminators") {
    std::string body = "int x = 0;\n"
                       "if (x > 0) { x = 1; } else x = 2;\n"
                       "while (x < 10) x++;\n"
                       "switch (x) {\n"
                       "case 1:\n"
                       "case 2: x = 3; break;\n"
                       "case 4: x = 5;\n"
                       "case 6: x = 7; break;\n"
                       "default: break;\n"
                       "}\n"
                       "lab: x = 8;\n"
                       "goto lab;\n"
                       "return x;\n";
    StatementIndex idx = index_statements(body);
    REQUIRE(idx.statements.size() == 8);
    CHECK(idx.statements[0].kind == StmtKind::Simple);
    CHECK(idx.statements[1].kind == StmtKind::If);
    CHECK(idx.statements[1].has_else);
    CHECK(idx.statements[2].kind == StmtKind::While);
    CHECK(idx.statements[3].kind == StmtKind::Switch);
    CHECK(idx.statements[4].kind == StmtKind::Label);
    CHECK(idx.statements[5].kind == StmtKind::Simple); // x = 8;
    CHECK(idx.statements[6].kind == StmtKind::Goto);
    CHECK(idx.statements[6].name == "lab");
    CHECK(idx.statements[7].kind == StmtKind::Return);

    const Stmt &sw = idx.statements[3];
    REQUIRE(sw.children.size() == 4);
    CHECK(sw.children[0].labels == std::vector<std::string>{"1", "2"});
    CHECK(list_terminates(sw.children[0].children)); // ends in break
    CHECK(!list_terminates(sw.children[1].children)); // falls through
}

TEST_CASE("cyclomatic_complexity counts decision points") {
    CHECK(cyclomatic_complexity("x = 1; y = 2;") == 1);
    CHECK(cyclomatic_complexity("if (a) x = 1;") == 2);
    CHECK(cyclomatic_complexity("if (a && b) { while (c) {} }") == 4);
}

} // TEST_SUITE
