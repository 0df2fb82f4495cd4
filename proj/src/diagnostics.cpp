#include "rustmap/diagnostics.hpp"

#include <algorithm>
#include <sstream>

namespace rustmap {

std::string format_diagnostic(const Diagnostic &d) {
    std::ostringstream ss;
    if (!d.file.empty()) {
        ss << d.file << ":" << d.line;
        if (d.column > 0) ss << ":" << d.column;
        ss << ": ";
    }
    ss << "error";
    if (!d.code.empty()) ss << "[" << d.code << "]";
    ss << ": " << d.message;
    return ss.str();
}

void sort_diagnostics(std::vector<Diagnostic> &diags) {
    std::stable_sort(diags.begin(), diags.end(), [](const Diagnostic &a, const Diagnostic &b) {
        if (a.file != b.file) return a.file < b.file;
        if (a.line != b.line) return a.line < b.line;
        return a.column < b.column;
    });
}

} // namespace rustmap
