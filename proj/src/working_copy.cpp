#include "rustmap/c_model.hpp"
#include "rustmap/subprocess.hpp"
#include "rustmap/text.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <set>

namespace fs = std::filesystem;

namespace rustmap {

namespace {

struct MacroPlan {
    std::vector<SiteEdit> edits; // includes the #define replacement
    std::string rust_const;      // numeric macros only
    bool numeric = false;
};

// Applies edits to the original text, rightmost first.
std::string apply_edits(const std::string &original, std::vector<SiteEdit> edits) {
    std::sort(edits.begin(), edits.end(),
              [](const SiteEdit &a, const SiteEdit &b) { return a.begin > b.begin; });
    std::string text = original;
    for (const auto &e : edits)
        text = text.substr(0, e.begin) + e.replacement + text.substr(e.end);
    return text;
}

// True when the usage site with this span is a case label operand.
bool used_as_case_label(const std::vector<Token> &toks, size_t begin) {
    size_t i = token_at_or_after(toks, begin);
    return i > 0 && i < toks.size() && toks[i].begin == begin && toks[i - 1].is("case");
}

void write_tree(const std::string &outdir, const std::map<std::string, std::string> &texts) {
    for (const auto &[rel, text] : texts) {
        fs::path p = fs::path(outdir) / rel;
        fs::create_directories(p.parent_path());
        write_file(p.string(), text);
    }
}

} // namespace

WorkingCopyResult build_working_copy(CProject &project, const std::string &outdir,
                                     TranslationOracle *oracle, const PreprocessConfig &pp,
                                     const std::string &cc_command) {
    WorkingCopyResult res;
    res.dir = outdir;
    fs::create_directories(outdir);

    std::map<std::string, std::vector<Token>> original_tokens;
    for (const auto &f : project.files) original_tokens[f.path] = tokenize_c(f.text);

    // Plan rewrites per macro. Demotions here keep the original #define so
    // fallback preprocessing expands the macro instead (never both).
    std::vector<std::string> order; // deterministic demotion order
    std::map<std::string, MacroPlan> plans;

    auto demote = [&](MacroDef &m, const std::string &reason) {
        m.classification = MacroClass::Unhandled;
        m.demotion_reason = reason;
        res.demoted.push_back(m.name);
        res.diagnostics.push_back("macro " + m.name + " demoted: " + reason);
    };

    for (auto &m : project.macros) {
        if (m.classification == MacroClass::Numeric) {
            bool case_label = false;
            for (const auto &u : m.usage_sites)
                if (used_as_case_label(original_tokens[u.file], u.begin)) case_label = true;
            if (case_label) {
                // const int is not a C constant expression; keep the macro.
                demote(m, "used as a case label");
                continue;
            }
            auto nr = rewrite_numeric_macro(m);
            if (!nr) {
                res.demoted.push_back(m.name);
                res.diagnostics.push_back("macro " + m.name + " demoted: " + m.demotion_reason);
                continue;
            }
            MacroPlan p;
            p.numeric = true;
            p.rust_const = nr->rust_const_decl;
            p.edits.push_back({m.file, m.def_begin, m.def_end, nr->c_const_decl});
            plans[m.name] = std::move(p);
            order.push_back(m.name);
        } else if (m.classification == MacroClass::Complex) {
            if (m.usage_sites.empty()) {
                demote(m, "no usage sites for argument type inference");
                continue;
            }
            if (!oracle) {
                demote(m, "no translation oracle configured");
                continue;
            }
            // Contexts: the functions whose bodies contain usage sites.
            std::vector<std::string> contexts;
            std::set<const CFunction *> seen;
            for (const auto &u : m.usage_sites) {
                for (const auto &f : project.files) {
                    if (f.path != u.file) continue;
                    for (const auto &fn : f.functions) {
                        if (u.begin >= fn.body_begin && u.begin < fn.body_end &&
                            seen.insert(&fn).second)
                            contexts.push_back(fn.full_text(f.text));
                    }
                }
            }
            if (contexts.empty()) {
                demote(m, "usage sites outside any function body");
                continue;
            }
            FunctionRewrite frw = rewrite_complex_macro(m, contexts, *oracle, &project);
            res.sessions.push_back(frw.session);
            if (frw.demoted) {
                res.demoted.push_back(m.name);
                res.diagnostics.push_back("macro " + m.name + " demoted: " + frw.demotion_reason);
                continue;
            }
            MacroPlan p;
            p.edits.push_back({m.file, m.def_begin, m.def_end, frw.c_function_def});
            for (auto &e : frw.edits) p.edits.push_back(e);
            plans[m.name] = std::move(p);
            order.push_back(m.name);
        } else if (!m.demotion_reason.empty()) {
            res.diagnostics.push_back("macro " + m.name + " unhandled: " + m.demotion_reason);
        }
    }

    // Nested invocations: an edit contained in another macro's edit would be
    // clobbered by the outer replacement. Demote the inner macro; the
    // preprocessor expands it inside the rewritten call arguments.
    {
        std::set<std::string> dropped;
        for (const auto &inner : order) {
            for (const auto &outer : order) {
                if (inner == outer || dropped.count(inner) || dropped.count(outer)) continue;
                for (const auto &ei : plans[inner].edits)
                    for (const auto &eo : plans[outer].edits)
                        if (ei.file == eo.file && ei.begin >= eo.begin && ei.end <= eo.end &&
                            !(ei.begin == eo.begin && ei.end == eo.end))
                            dropped.insert(inner);
            }
        }
        for (const auto &name : dropped) {
            for (auto &m : project.macros)
                if (m.name == name) demote(m, "invocation nested inside another rewrite");
            plans.erase(name);
            order.erase(std::remove(order.begin(), order.end(), name), order.end());
        }
    }

    auto render = [&](const std::set<std::string> &accepted) {
        std::map<std::string, std::vector<SiteEdit>> per_file;
        for (const auto &name : order)
            if (accepted.count(name))
                for (const auto &e : plans[name].edits) per_file[e.file].push_back(e);
        std::map<std::string, std::string> texts;
        for (const auto &f : project.files) {
            auto it = per_file.find(f.path);
            texts[f.path] = it == per_file.end() ? f.text : apply_edits(f.text, it->second);
        }
        return texts;
    };

    auto syntax_ok = [&](const std::string &rel) {
        std::vector<std::string> argv = split_command(cc_command);
        argv.insert(argv.end(), {"-fsyntax-only", "-I.", rel});
        RunOptions opts;
        opts.cwd = outdir;
        return run_command(argv, opts).exit_code == 0;
    };

    // Baseline: files that do not compile untouched are exempt from the gate.
    std::set<std::string> accepted;
    for (const auto &name : order) accepted.insert(name);

    std::map<std::string, std::string> texts = render({});
    write_tree(outdir, texts);
    std::set<std::string> baseline_ok;
    for (const auto &f : project.files)
        if (f.kind == FileKind::Source && syntax_ok(f.path)) baseline_ok.insert(f.path);

    // Gate loop: demote macros one at a time until every baseline-good file
    // still compiles with the rewrites applied.
    for (size_t iter = 0; iter <= plans.size() + 1; ++iter) {
        texts = render(accepted);
        write_tree(outdir, texts);
        std::string failing;
        for (const auto &f : project.files) {
            if (f.kind != FileKind::Source || !baseline_ok.count(f.path)) continue;
            if (!syntax_ok(f.path)) {
                failing = f.path;
                break;
            }
        }
        if (failing.empty()) break;
        // Demote the first (in plan order) accepted macro touching the file.
        std::string victim;
        for (const auto &name : order) {
            if (!accepted.count(name)) continue;
            for (const auto &e : plans[name].edits)
                if (e.file == failing) {
                    victim = name;
                    break;
                }
            if (!victim.empty()) break;
        }
        if (victim.empty()) {
            res.diagnostics.push_back("working copy of " + failing +
                                      " fails to compile but no rewrite touches it");
            break;
        }
        accepted.erase(victim);
        for (auto &m : project.macros)
            if (m.name == victim)
                demote(m, "rewrite broke compilation of " + failing +
                               " (possible cross-file type conflict)");
    }

    for (const auto &name : order)
        if (accepted.count(name) && plans[name].numeric)
            res.rust_consts.push_back(plans[name].rust_const);

    // Fallback preprocessing on the rewritten texts, then the final tree.
    for (auto &[rel, text] : texts) {
        try {
            text = preprocess_text(text, pp);
        } catch (const Error &e) {
            res.diagnostics.push_back(rel + ": " + e.what());
        }
    }
    write_tree(outdir, texts);
    return res;
}

} // namespace rustmap
