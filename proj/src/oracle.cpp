#include "rustmap/oracle.hpp"

#include "rustmap/digest.hpp"
#include "rustmap/text.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <set>
#include <sstream>

namespace fs = std::filesystem;

namespace rustmap {

size_t estimate_tokens(std::string_view text, double chars_per_token) {
    if (chars_per_token <= 0) chars_per_token = 4.0;
    return static_cast<size_t>(std::ceil(static_cast<double>(text.size()) / chars_per_token));
}

// ---------------------------------------------------------------------------
// Transcript store
// ---------------------------------------------------------------------------

namespace {

constexpr const char *kTranscriptMagic = "RUSTMAP-TRANSCRIPT 1";

std::string now_iso8601() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string render_record(const TranscriptRecord &r) {
    std::ostringstream ss;
    ss << kTranscriptMagic << "\n"
       << "digest: " << r.digest << "\n"
       << "prompt-bytes: " << r.prompt.size() << "\n"
       << "response-bytes: " << r.response.size() << "\n"
       << "timestamp: " << r.timestamp << "\n\n"
       << r.prompt << "\n"
       << r.response << "\n";
    return ss.str();
}

TranscriptRecord parse_record(const std::string &text, const std::string &path) {
    TranscriptRecord r;
    size_t pos = 0;
    auto next_line = [&]() -> std::string {
        size_t nl = text.find('\n', pos);
        if (nl == std::string::npos) throw Error("truncated transcript record: " + path);
        std::string line = text.substr(pos, nl - pos);
        pos = nl + 1;
        return line;
    };
    if (next_line() != kTranscriptMagic)
        throw Error("not a transcript record: " + path);
    size_t prompt_bytes = 0, response_bytes = 0;
    while (true) {
        std::string line = next_line();
        if (line.empty()) break;
        size_t colon = line.find(": ");
        if (colon == std::string::npos) throw Error("bad transcript header in " + path);
        std::string key = line.substr(0, colon), val = line.substr(colon + 2);
        if (key == "digest") r.digest = val;
        else if (key == "prompt-bytes") prompt_bytes = std::stoull(val);
        else if (key == "response-bytes") response_bytes = std::stoull(val);
        else if (key == "timestamp") r.timestamp = val;
    }
    if (pos + prompt_bytes > text.size()) throw Error("truncated prompt in " + path);
    r.prompt = text.substr(pos, prompt_bytes);
    pos += prompt_bytes + 1; // trailing newline
    if (pos + response_bytes > text.size()) throw Error("truncated response in " + path);
    r.response = text.substr(pos, response_bytes);
    if (r.digest != sha256_hex(r.prompt))
        throw Error("transcript digest mismatch in " + path);
    return r;
}

} // namespace

TranscriptStore::TranscriptStore(std::string dir, bool create) : dir_(std::move(dir)) {
    if (create) fs::create_directories(dir_);
    if (fs::exists(dir_)) load();
    else if (!create)
        throw EnvError("transcript directory does not exist: " + dir_);
}

void TranscriptStore::load() {
    std::vector<std::string> names;
    for (const auto &e : fs::directory_iterator(dir_)) {
        if (e.is_regular_file()) names.push_back(e.path().filename().string());
    }
    std::sort(names.begin(), names.end());
    for (const auto &name : names) {
        TranscriptRecord r = parse_record(read_file((fs::path(dir_) / name).string()),
                                          name);
        by_digest_.emplace(r.digest, records_.size());
        records_.push_back(std::move(r));
    }
}

void TranscriptStore::append(const std::string &prompt, const std::string &response) {
    std::lock_guard<std::mutex> lk(mu_);
    TranscriptRecord r;
    r.digest = sha256_hex(prompt);
    r.prompt = prompt;
    r.response = response;
    r.timestamp = now_iso8601();
    char name[64];
    std::snprintf(name, sizeof name, "%04zu_%.12s", records_.size() + 1, r.digest.c_str());
    write_file((fs::path(dir_) / name).string(), render_record(r));
    by_digest_.emplace(r.digest, records_.size());
    records_.push_back(std::move(r));
}

std::optional<std::string> TranscriptStore::find_response(const std::string &prompt) const {
    std::lock_guard<std::mutex> lk(mu_);
    auto it = by_digest_.find(sha256_hex(prompt));
    if (it == by_digest_.end()) return std::nullopt;
    const TranscriptRecord &r = records_[it->second];
    if (r.prompt != prompt)
        throw Error("transcript digest collision with differing prompts in " + dir_);
    return r.response;
}

size_t TranscriptStore::size() const {
    std::lock_guard<std::mutex> lk(mu_);
    return records_.size();
}

std::vector<TranscriptRecord> TranscriptStore::records() const {
    std::lock_guard<std::mutex> lk(mu_);
    return records_;
}

// ---------------------------------------------------------------------------
// Replay / recording oracles
// ---------------------------------------------------------------------------

std::string ReplayOracle::submit(const std::string &prompt, const std::string &ctx) {
    auto hit = store_->find_response(prompt);
    if (!hit)
        throw OracleUnavailable("no recorded response for prompt digest " +
                                sha256_hex(prompt).substr(0, 12) + " (unit " + ctx + ")");
    return *hit;
}

std::string RecordingOracle::submit(const std::string &prompt, const std::string &ctx) {
    std::string response = inner_->submit(prompt, ctx);
    store_->append(prompt, response);
    return response;
}

// ---------------------------------------------------------------------------
// Prompt construction
// ---------------------------------------------------------------------------

const std::string &translation_prompt_template() {
    static const std::string tmpl =
        "Please take on the role of an expert developer familiar with the Rust and C "
        "and C++ programming languages.\n"
        "\n"
        "Convert the given code to idiomatic Rust, keeping its functionality. Use "
        "minimal unsafe traits and follow the requirements below. Don't translate "
        "unknown variables or functions, and avoid assumptions. If the C code "
        "references other vital functions or structures, ask me first and wait for my "
        "provided input. (ASK ME first)\n"
        "\n"
        "1. If a variable inside the function is modified, add the mut specifier.\n"
        "2. Distinguish between mutable and immutable references by storing "
        "intermediate values.\n"
        "3. If necessary, add lifetime annotations.\n"
        "4. Add clear comments for all numeric types and pay attention to type "
        "conversions, especially between usize and others.\n"
        "5. Be cautious of potential out-of-bound errors in the C code.\n"
        "6. Use the Rust standard library as much as possible.\n"
        "7. When performing arithmetic operations, be mindful of potential overflow "
        "or underflow.\n";
    return tmpl;
}

std::string build_translation_prompt(const TranslationPromptInputs &in, size_t max_tokens,
                                     double chars_per_token) {
    if (trim(in.unit_code).empty()) throw Error("empty translation unit");

    std::string prompt = translation_prompt_template();
    for (const auto &aug : in.augmentations) {
        prompt += "\n";
        prompt += aug;
        if (!ends_with(aug, "\n")) prompt += "\n";
    }
    if (!in.globals_context.empty()) {
        prompt += "\n";
        prompt += in.globals_context;
        if (!ends_with(in.globals_context, "\n")) prompt += "\n";
    }
    for (const auto &dep : in.deps_context) {
        prompt += "\nFor reference, this dependency is already defined:\n```c\n";
        prompt += dep;
        if (!ends_with(dep, "\n")) prompt += "\n";
        prompt += "```\n";
    }
    prompt += "\nHere is the C code to be translated:\n```c\n";
    prompt += in.unit_code;
    if (!ends_with(in.unit_code, "\n")) prompt += "\n";
    prompt += "```\n";

    size_t est = estimate_tokens(prompt, chars_per_token);
    if (max_tokens > 0 && est > max_tokens) throw OverBudgetError(est, max_tokens);
    return prompt;
}

std::string build_compile_fix_prompt(const std::string &rust_code,
                                     std::vector<Diagnostic> diagnostics,
                                     const std::string &original_c) {
    if (diagnostics.empty())
        throw Error("build_compile_fix_prompt requires at least one diagnostic");
    sort_diagnostics(diagnostics);

    std::string prompt =
        "The following Rust code, translated from the C code below, fails to "
        "compile. Fix the Rust code so that it compiles, keeping its functionality "
        "identical to the C code. Reply with the complete fixed Rust code.\n";
    prompt += "\nCompiler error messages:\n```\n";
    for (const auto &d : diagnostics) {
        prompt += d.rendered.empty() ? format_diagnostic(d) : d.rendered;
        if (prompt.back() != '\n') prompt += '\n';
    }
    prompt += "```\n\nBuggy Rust code:\n```rust\n";
    prompt += rust_code;
    if (!ends_with(rust_code, "\n")) prompt += "\n";
    prompt += "```\n\nOriginal C code:\n```c\n";
    prompt += original_c;
    if (!ends_with(original_c, "\n")) prompt += "\n";
    prompt += "```\n";
    return prompt;
}

std::string build_state_fix_prompt(const std::string &c_fragment, const std::string &c_before,
                                   const std::string &c_after, const std::string &rust_fragment,
                                   const std::string &rust_before) {
    auto indent_block = [](const std::string &text) {
        std::string out;
        for (const auto &line : split_lines(text)) {
            out += "    ";
            out += line;
            out += "\n";
        }
        return out;
    };

    std::string prompt;
    prompt += "// C code fragment with its before- and after-states:\n{\n";
    prompt += indent_block(c_before);
    prompt += indent_block(c_fragment);
    prompt += indent_block(c_after);
    prompt += "}\n\n// Rust code generation:\n{\n";
    prompt += indent_block(rust_before);
    prompt += indent_block(rust_fragment);
    prompt += "    /** please fix the Rust code fragment here to have\n"
              "        consistent states as the C code above\n"
              "      */\n"
              "}\n";
    prompt += "\nFollow the same requirements as for translation:\n\n";
    prompt += translation_prompt_template();
    return prompt;
}

// ---------------------------------------------------------------------------
// Response classification
// ---------------------------------------------------------------------------

namespace {

// Returns spans of fenced code blocks (content between ``` fences).
std::vector<std::string> fenced_blocks(const std::string &text) {
    std::vector<std::string> blocks;
    size_t pos = 0;
    while (true) {
        size_t open = text.find("```", pos);
        if (open == std::string::npos) break;
        size_t lang_end = text.find('\n', open + 3);
        if (lang_end == std::string::npos) break;
        size_t close = text.find("```", lang_end + 1);
        if (close == std::string::npos) break;
        blocks.push_back(text.substr(lang_end + 1, close - lang_end - 1));
        pos = close + 3;
    }
    return blocks;
}

const char *kAskKeywords[] = {"struct", "union", "enum",  "type",
                              "fn",     "function", "macro", "variable"};

} // namespace

ResponseClass classify_response(const std::string &response) {
    ResponseClass rc;
    auto blocks = fenced_blocks(response);
    if (!blocks.empty()) {
        rc.kind = ResponseClass::Accepted;
        rc.code = blocks.back(); // models often restate input first
        return rc;
    }

    if (response.find('?') != std::string::npos) {
        std::set<std::string> names;
        // `quoted` identifiers
        size_t pos = 0;
        while (true) {
            size_t open = response.find('`', pos);
            if (open == std::string::npos) break;
            size_t close = response.find('`', open + 1);
            if (close == std::string::npos) break;
            std::string inner = response.substr(open + 1, close - open - 1);
            if (is_identifier(inner)) names.insert(inner);
            pos = close + 1;
        }
        // "struct Foo", "function bar", ...
        std::vector<std::string> words;
        std::string cur;
        for (char c : response) {
            if (is_ident_char(c)) {
                cur.push_back(c);
            } else {
                if (!cur.empty()) words.push_back(cur);
                cur.clear();
            }
        }
        if (!cur.empty()) words.push_back(cur);
        for (size_t i = 0; i + 1 < words.size(); ++i) {
            for (const char *kw : kAskKeywords) {
                if (words[i] == kw && is_identifier(words[i + 1]) &&
                    words[i + 1] != "is" && words[i + 1] != "the") {
                    names.insert(words[i + 1]);
                }
            }
        }
        if (!names.empty()) {
            rc.kind = ResponseClass::AskDependency;
            rc.names.assign(names.begin(), names.end());
            return rc;
        }
    }

    rc.kind = ResponseClass::Refusal;
    return rc;
}

std::string resolve_dependency(const std::vector<std::string> &names,
                               const DependencyResolver &lookup, DependencyPolicy policy,
                               std::vector<std::string> *diagnostics) {
    if (names.empty()) return {};
    std::string out;
    for (const auto &name : names) {
        switch (policy) {
        case DependencyPolicy::Ask: {
            std::optional<std::string> def = lookup ? lookup(name) : std::nullopt;
            if (def) {
                out += "Definition of " + name + ":\n```c\n" + *def;
                if (!ends_with(*def, "\n")) out += "\n";
                out += "```\n";
            } else {
                if (diagnostics)
                    diagnostics->push_back("dependency '" + name +
                                           "' not found in project; instructing placeholder");
                out += "The definition of " + name +
                       " is not available. Emit a typed no-op placeholder for it and "
                       "continue the translation.\n";
            }
            break;
        }
        case DependencyPolicy::Ignore:
            out += "Ignore the unknown dependency " + name +
                   " and proceed with the translation without it.\n";
            break;
        case DependencyPolicy::Placeholder:
            out += "Emit a typed no-op placeholder for " + name +
                   " and continue the translation.\n";
            break;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Retry loop
// ---------------------------------------------------------------------------

const char *to_string(AttemptOutcome o) {
    switch (o) {
    case AttemptOutcome::Accepted: return "accepted";
    case AttemptOutcome::CompileFailed: return "compile_failed";
    case AttemptOutcome::StateMismatch: return "state_mismatch";
    case AttemptOutcome::Refused: return "refused";
    case AttemptOutcome::AskedDependency: return "asked_dependency";
    }
    return "unknown";
}

SessionOutcome run_with_retries(const std::string &phase, const std::string &unit_name,
                                const PhaseHooks &hooks, TranslationOracle &oracle,
                                int budget) {
    if (budget < 1) throw Error("retry budget must be >= 1");

    SessionOutcome out;
    out.session.unit_name = unit_name;
    out.session.phase = phase;
    out.session.retry_budget = budget;

    std::string followup;
    for (int attempt = 1; attempt <= budget; ++attempt) {
        Attempt a;
        a.prompt = hooks.build(attempt, followup);
        followup.clear();

        try {
            a.response = oracle.submit(a.prompt, unit_name + "/" + phase);
        } catch (const OracleUnavailable &e) {
            a.outcome = AttemptOutcome::Refused;
            a.detail = e.what();
            out.session.attempts.push_back(std::move(a));
            continue;
        }

        ResponseClass rc = classify_response(a.response);
        switch (rc.kind) {
        case ResponseClass::AskDependency: {
            a.outcome = AttemptOutcome::AskedDependency;
            a.detail = "asked for: " + join(rc.names, ", ");
            followup = resolve_dependency(rc.names, hooks.resolve, hooks.policy);
            break;
        }
        case ResponseClass::Refusal:
            a.outcome = AttemptOutcome::Refused;
            a.detail = "no code and no dependency question in response";
            break;
        case ResponseClass::Accepted: {
            std::string failure = hooks.validate ? hooks.validate(rc.code) : std::string();
            if (failure.empty()) {
                a.outcome = AttemptOutcome::Accepted;
                out.session.attempts.push_back(std::move(a));
                out.success = true;
                out.final_code = rc.code;
                return out;
            }
            a.outcome = hooks.validate_failure;
            a.detail = failure;
            followup = failure;
            break;
        }
        }
        out.session.attempts.push_back(std::move(a));
    }
    return out;
}

} // namespace rustmap
