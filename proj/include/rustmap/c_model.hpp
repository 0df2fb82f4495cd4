#pragma once

#include "rustmap/c_lexer.hpp"
#include "rustmap/oracle.hpp"
#include "rustmap/statement_index.hpp"

#include <optional>
#include <string>
#include <vector>

namespace rustmap {

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

enum class DirectiveClass {
    SystemInclude,
    ProjectInclude,
    NumericMacro,
    ComplexMacro,
    Conditional,
    Other,
};

const char *to_string(DirectiveClass c);

struct Directive {
    std::string raw;
    DirectiveClass klass = DirectiveClass::Other;
    std::string diagnostic;     // set for malformed directives
    std::string include_target; // includes only
    size_t begin = 0;           // span in the owning file
    size_t end = 0;
    int line = 1;
};

enum class MacroClass { Numeric, Complex, Unhandled };

const char *to_string(MacroClass c);

struct MacroUse {
    std::string file;
    size_t begin = 0; // invocation span: name through closing paren for
    size_t end = 0;   // function-like macros, just the name otherwise
};

struct MacroDef {
    std::string name;
    std::vector<std::string> parameters; // empty for object-like
    bool function_like = false;
    bool variadic = false;
    std::string replacement;
    MacroClass classification = MacroClass::Unhandled;
    std::string demotion_reason;
    std::vector<MacroUse> usage_sites;
    std::string file;
    int line = 1;
    size_t def_begin = 0; // span of the #define directive
    size_t def_end = 0;
};

struct GlobalDecl {
    std::string name;
    std::string c_type;             // type text, '*' included for pointers
    bool is_primitive = false;      // integer/float/char/bool scalar only
    std::string initializer;        // empty when absent
    std::string file;               // defining file (root-relative)
    bool is_const = false;
    bool is_static = false;
    int line = 1;
};

struct StructField {
    std::string type; // element type without pointer stars
    std::string name;
    int pointer_depth = 0;
    std::string array_suffix; // "[256]" etc., empty otherwise
};

struct StructDef {
    std::string name;
    std::vector<StructField> fields;
    std::string file;
    bool is_union = false;
};

struct CFunction {
    std::string name;
    std::string signature;  // text from declaration start through ')'
    size_t body_begin = 0;  // inside the braces (exclusive)
    size_t body_end = 0;
    size_t decl_begin = 0;  // whole definition, braces included
    size_t decl_end = 0;
    bool is_static = false;
    int line = 1;

    std::string body_text(const std::string &file_text) const {
        return file_text.substr(body_begin, body_end - body_begin);
    }
    std::string full_text(const std::string &file_text) const {
        return file_text.substr(decl_begin, decl_end - decl_begin);
    }
};

enum class FileKind { Source, Header };

struct CFile {
    std::string path; // relative to the project root
    FileKind kind = FileKind::Source;
    std::string text;
    std::vector<CFunction> functions;
    std::vector<GlobalDecl> globals;
    std::vector<Directive> directives;
    std::vector<StructDef> structs;
    std::vector<std::string> parse_errors;

    std::string stem() const;
    const CFunction *find_function(const std::string &name) const;
};

struct CProject {
    std::string root;
    std::vector<CFile> files;
    std::string entry_function = "main";
    std::vector<MacroDef> macros;
    std::vector<std::string> diagnostics; // per-file scan problems

    const CFile *file_of_function(const std::string &name) const;
    const CFunction *find_function(const std::string &name) const;
    const StructDef *find_struct(const std::string &name) const;
    const MacroDef *find_macro(const std::string &name) const;
};

// ---------------------------------------------------------------------------
// Scanning & classification
// ---------------------------------------------------------------------------

// Parses every .c/.h under root. Unparseable files are reported in
// CFile::parse_errors / CProject::diagnostics and the scan continues.
// Throws Error when root has no C sources at all.
CProject scan_project(const std::string &root, const std::string &entry_function = "main");

// Parses a single file body; exposed for tests and working-copy rebuilds.
CFile parse_c_file(const std::string &path, FileKind kind, std::string text);

// Total over '#'-prefixed lines; malformed input lands in Other with a
// diagnostic. Stable under whitespace normalization.
Directive classify_directive(const std::string &raw);

enum class NumTag { I32, I64, U32, U64, F32, F64 };

const char *c_type_for(NumTag t);
const char *rust_type_for(NumTag t);

// Narrowest conventional type for a single C numeric literal.
std::optional<NumTag> infer_numeric_const_type(const std::string &literal);

// ---------------------------------------------------------------------------
// Macro refactoring
// ---------------------------------------------------------------------------

struct NumericRewrite {
    std::string c_const_decl;    // const int BZ_RUNB=1;
    std::string rust_const_decl; // const BZ_RUNB: i32=1;
};

// Requires m.classification == Numeric; failure to infer a type demotes the
// macro (returns nullopt and records the reason on `m`).
std::optional<NumericRewrite> rewrite_numeric_macro(MacroDef &m);

struct SiteEdit {
    std::string file;
    size_t begin = 0;
    size_t end = 0;
    std::string replacement;
};

struct FunctionRewrite {
    std::string c_function_def;
    std::vector<SiteEdit> edits;
    bool demoted = false;
    std::string demotion_reason;
    TranslationSession session; // oracle exchanges, for the transcript trail
};

// Asks the oracle to rewrite a complex macro as a C function with the same
// name and computes per-site call edits (address-of inserted for pointer
// parameters). Macros with goto, token pasting, variadics or non-parsing
// bodies are demoted without consulting the oracle. `project` supplies the
// file texts used to slice call-site arguments for function-like macros.
FunctionRewrite rewrite_complex_macro(MacroDef &m,
                                      const std::vector<std::string> &usage_contexts,
                                      TranslationOracle &oracle, const CProject *project);

// Immediate demotion triggers that need no oracle round-trip; returns the
// reason or empty when the macro is eligible for function rewriting.
std::string complex_macro_demotion_reason(const MacroDef &m);

// ---------------------------------------------------------------------------
// Fallback preprocessing
// ---------------------------------------------------------------------------

struct PreprocessConfig {
    std::string command = "cc -E -P"; // reads stdin, writes stdout
    std::vector<std::string> defines; // -D values, no leading -D
};

// Expands/removes directives the pipeline does not handle while preserving
// include lines and previously rewritten consts/functions. Throws Error with
// captured stderr on preprocessor failure.
std::string preprocess_fallback(const CFile &file, const PreprocessConfig &cfg);
std::string preprocess_text(const std::string &text, const PreprocessConfig &cfg);

// ---------------------------------------------------------------------------
// Working copy (macro pipeline)
// ---------------------------------------------------------------------------

struct WorkingCopyResult {
    std::string dir;                        // mirror tree of rewritten files
    std::vector<std::string> demoted;       // macros demoted along the way
    std::vector<std::string> diagnostics;
    std::vector<std::string> rust_consts;   // numeric macro consts for Rust
    std::vector<TranslationSession> sessions;
};

// Applies numeric and complex macro rewrites to a working copy of the C tree
// under `outdir` (the original tree is never mutated), then runs fallback
// preprocessing per file. A macro whose rewrite breaks compilation of any
// file is demoted and re-expanded instead.
WorkingCopyResult build_working_copy(CProject &project, const std::string &outdir,
                                     TranslationOracle *oracle, const PreprocessConfig &pp,
                                     const std::string &cc_command = "cc");

} // namespace rustmap
