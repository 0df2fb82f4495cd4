#pragma once

#include "rustmap/c_model.hpp"
#include "rustmap/depgraph.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rustmap {

// ---------------------------------------------------------------------------
// Scaffold plan
// ---------------------------------------------------------------------------

enum class MappingKind { FunctionFile, GlobalsFile, HeaderFile };

struct Mapping {
    std::string c_entity;             // function name, or C file path for bundles
    MappingKind kind = MappingKind::FunctionFile;
    std::string rust_path;            // relative to the crate root, e.g. src/x/f.rs
    std::string module_path;          // e.g. crate::blocksort::BZ2_blockSort
    std::vector<std::string> members; // functions living in this file
    int unit_id = 0;                  // FunctionFile: owning translation unit
};

struct Manifest {
    std::string name;
    std::string edition = "2021";
    // dependency name -> version requirement
    std::vector<std::pair<std::string, std::string>> dependencies;
};

struct ScaffoldPlan {
    Manifest manifest;
    std::vector<Mapping> mappings;
    std::string entry_function;
    std::string entry_module; // module path of the entry`s mapping

    const Mapping *for_function(const std::string &fn) const;
    const Mapping *for_rust_path(const std::string &rust_path) const;
};

// Maps every C entity to a unique Rust file. Multi-function SCC units share
// one scc_<n>_<name>.rs file in the directory of the representative's C
// file. Throws Error listing collisions when sanitized paths collide.
ScaffoldPlan plan_scaffold(const CProject &project, const TranslationPlan &plan,
                           const std::string &crate_name = "");

// Identifier-safe stem: C identifier characters pass through, anything else
// becomes '_'.
std::string sanitize_stem(const std::string &stem);

// ---------------------------------------------------------------------------
// Emission
// ---------------------------------------------------------------------------

// Creates the manifest and directory tree under outdir. Unfilled function
// files hold a compile-neutral stub behind the `unfilled-units` feature, so
// a freshly scaffolded project builds with zero translated content.
void emit_scaffold(const ScaffoldPlan &plan, const std::string &outdir);

// Stub text for a not-yet-translated unit file.
std::string stub_text(const Mapping &m);

// ---------------------------------------------------------------------------
// Import wiring
// ---------------------------------------------------------------------------

enum class ImportKind { ModuleDecl, UseStatement };

struct ImportEdit {
    std::string target_file; // rust path the statement belongs in
    ImportKind kind = ImportKind::UseStatement;
    std::string path_text;   // full statement text, e.g. "use crate::x::f::f;"
};

// One UseStatement per cross-file callee of the functions in `fn_file`;
// callees merged into the same file get no import. Unmapped callees are
// skipped with a diagnostic.
std::vector<ImportEdit> wire_dependencies(const std::string &fn_file, const CallGraph &g,
                                          const ScaffoldPlan &plan,
                                          std::vector<std::string> *diagnostics = nullptr);

// Project-include directives in headers become module references between
// header modules (`mod`/`use` pair: the ModuleDecl lands in headers/mod.rs,
// the UseStatement in the including header's file).
std::vector<ImportEdit> wire_header_includes(const CProject &project,
                                             const ScaffoldPlan &plan);

// ---------------------------------------------------------------------------
// Merge
// ---------------------------------------------------------------------------

using CompileCheckFn = std::function<std::optional<std::string>(const std::string &dir)>;

struct MergeResult {
    std::string dir;       // merged tree location
    bool compiled = false;
    std::vector<std::string> renamed;     // "module::name -> name_2" entries
    std::vector<std::string> diagnostics;
};

// Consolidates per-function files into one module per original C file and
// rewrites imports accordingly. The merged tree is written next to the
// scaffold; on a failed compile check the merged tree is discarded and the
// unmerged scaffold is kept. Duplicate file-local (static) functions are
// renamed with a disambiguating suffix; other duplicate symbols abort the
// merge naming both origins.
MergeResult merge_translated_units(const ScaffoldPlan &plan, const CProject &project,
                                   const std::string &scaffold_dir,
                                   const std::string &merged_dir,
                                   const CompileCheckFn &compile_check);

} // namespace rustmap
