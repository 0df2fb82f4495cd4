#pragma once

#include <string>
#include <vector>

namespace rustmap {

// One compiler diagnostic, normalized across rustc/cc output forms.
struct Diagnostic {
    std::string file;
    int line = 0;
    int column = 0;
    std::string code;  // e.g. "E0308"; empty when the compiler gave none
    std::string message;
    std::string rendered; // full text as printed by the compiler
};

std::string format_diagnostic(const Diagnostic &d);

// Sorted by (file, line, column) — the order fix prompts present them in.
void sort_diagnostics(std::vector<Diagnostic> &diags);

} // namespace rustmap
