#pragma once

#include "rustmap/diagnostics.hpp"
#include "rustmap/errors.hpp"

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace rustmap {

// ---------------------------------------------------------------------------
// Oracle interface
// ---------------------------------------------------------------------------

// Anything that maps a translation prompt to candidate target code: a live
// chat endpoint, a recorded transcript, or a scripted test double.
class TranslationOracle {
  public:
    virtual ~TranslationOracle() = default;

    // session_context names the unit/phase; implementations may ignore it.
    virtual std::string submit(const std::string &prompt, const std::string &session_context) = 0;

    // Max input budget, in estimated tokens.
    virtual size_t max_input_tokens() const { return 16000; }
};

size_t estimate_tokens(std::string_view text, double chars_per_token = 4.0);

// ---------------------------------------------------------------------------
// Transcript store: one directory per session, one record file per exchange,
// filenames NNNN_<digest-prefix>. Append-only; prompt and response verbatim.
// ---------------------------------------------------------------------------

struct TranscriptRecord {
    std::string digest; // sha256 of the prompt
    std::string prompt;
    std::string response;
    std::string timestamp;
};

class TranscriptStore {
  public:
    // Opens (and creates, when `create` is set) the session directory and
    // loads any existing records.
    explicit TranscriptStore(std::string dir, bool create = true);

    void append(const std::string &prompt, const std::string &response);

    // Replay lookup. On a digest hit the stored prompt is compared to the
    // queried prompt in full; a mismatch is a store corruption error.
    std::optional<std::string> find_response(const std::string &prompt) const;

    size_t size() const;
    const std::string &dir() const { return dir_; }
    std::vector<TranscriptRecord> records() const;

  private:
    std::string dir_;
    mutable std::mutex mu_;
    std::vector<TranscriptRecord> records_;
    std::map<std::string, size_t> by_digest_;

    void load();
};

// ---------------------------------------------------------------------------
// Oracle implementations
// ---------------------------------------------------------------------------

// Replays recorded responses; unknown prompts raise OracleUnavailable.
class ReplayOracle : public TranslationOracle {
  public:
    explicit ReplayOracle(std::shared_ptr<TranscriptStore> store, size_t budget = 16000)
        : store_(std::move(store)), budget_(budget) {}
    std::string submit(const std::string &prompt, const std::string &ctx) override;
    size_t max_input_tokens() const override { return budget_; }

  private:
    std::shared_ptr<TranscriptStore> store_;
    size_t budget_;
};

// Wraps another oracle and records every exchange.
class RecordingOracle : public TranslationOracle {
  public:
    RecordingOracle(std::shared_ptr<TranslationOracle> inner,
                    std::shared_ptr<TranscriptStore> store)
        : inner_(std::move(inner)), store_(std::move(store)) {}
    std::string submit(const std::string &prompt, const std::string &ctx) override;
    size_t max_input_tokens() const override { return inner_->max_input_tokens(); }

  private:
    std::shared_ptr<TranslationOracle> inner_;
    std::shared_ptr<TranscriptStore> store_;
};

// Callback-backed oracle for tests and fixture generation.
class FunctionOracle : public TranslationOracle {
  public:
    using Fn = std::function<std::string(const std::string &prompt, const std::string &ctx)>;
    explicit FunctionOracle(Fn fn, size_t budget = 16000) : fn_(std::move(fn)), budget_(budget) {}
    std::string submit(const std::string &prompt, const std::string &ctx) override {
        return fn_(prompt, ctx);
    }
    size_t max_input_tokens() const override { return budget_; }

  private:
    Fn fn_;
    size_t budget_;
};

// Chat-completion-style HTTPS client. Thin adapter; everything else in the
// pipeline stays deterministic.
struct LiveOracleConfig {
    std::string base_url;   // e.g. https://api.example.com
    std::string path = "/v1/chat/completions";
    std::string model;
    std::string api_key;
    double timeout_secs = 120;
    size_t max_input_tokens = 16000;
};

std::shared_ptr<TranslationOracle> make_live_oracle(const LiveOracleConfig &cfg);

// ---------------------------------------------------------------------------
// Prompt construction
// ---------------------------------------------------------------------------

// The fixed translation template: expert-role preamble, seven numbered
// requirements, ask-me-first clause.
const std::string &translation_prompt_template();

struct TranslationPromptInputs {
    std::string unit_code;
    std::vector<std::string> deps_context;   // dependency definitions already resolved
    std::vector<std::string> augmentations;  // idiom-specific instructions
    std::string globals_context;             // accessor contract for globals
};

// Throws OverBudgetError when the assembled prompt exceeds `max_tokens`.
std::string build_translation_prompt(const TranslationPromptInputs &in, size_t max_tokens,
                                     double chars_per_token = 4.0);

// diagnostics must be nonempty; they are ordered by file:line in the prompt.
std::string build_compile_fix_prompt(const std::string &rust_code,
                                     std::vector<Diagnostic> diagnostics,
                                     const std::string &original_c);

std::string build_state_fix_prompt(const std::string &c_fragment, const std::string &c_before,
                                   const std::string &c_after, const std::string &rust_fragment,
                                   const std::string &rust_before);

// ---------------------------------------------------------------------------
// Response classification & dependency protocol
// ---------------------------------------------------------------------------

struct ResponseClass {
    enum Kind { Accepted, AskDependency, Refusal } kind = Refusal;
    std::string code;               // last fenced block when Accepted
    std::vector<std::string> names; // requested dependencies, sorted unique
};

ResponseClass classify_response(const std::string &response);

enum class DependencyPolicy { Ask, Ignore, Placeholder };

using DependencyResolver =
    std::function<std::optional<std::string>(const std::string &name)>;

// Produces the follow-up context handed to the next attempt. With Ask policy
// unresolvable names fall back to the Placeholder instruction and a
// diagnostic is recorded.
std::string resolve_dependency(const std::vector<std::string> &names,
                               const DependencyResolver &lookup, DependencyPolicy policy,
                               std::vector<std::string> *diagnostics = nullptr);

// ---------------------------------------------------------------------------
// Retry loop
// ---------------------------------------------------------------------------

enum class AttemptOutcome { Accepted, CompileFailed, StateMismatch, Refused, AskedDependency };

const char *to_string(AttemptOutcome o);

struct Attempt {
    std::string prompt;
    std::string response;
    AttemptOutcome outcome = AttemptOutcome::Refused;
    std::string detail;
};

struct TranslationSession {
    std::string unit_name;
    std::string phase; // translate | compile_fix | state_fix | macro_rewrite
    std::vector<Attempt> attempts;
    int retry_budget = 3;

    bool accepted() const {
        return !attempts.empty() && attempts.back().outcome == AttemptOutcome::Accepted;
    }
};

struct PhaseHooks {
    // Builds the prompt for one attempt. `followup` carries dependency
    // resolutions from a previous AskDependency round (empty otherwise).
    std::function<std::string(int attempt, const std::string &followup)> build;
    // Empty string = valid; anything else is the failure detail recorded on
    // the attempt and appended to the next attempt's context.
    std::function<std::string(const std::string &code)> validate;
    DependencyResolver resolve;
    DependencyPolicy policy = DependencyPolicy::Ask;
    // Outcome recorded when validate fails (CompileFailed or StateMismatch).
    AttemptOutcome validate_failure = AttemptOutcome::CompileFailed;
};

struct SessionOutcome {
    TranslationSession session;
    bool success = false;
    std::string final_code;
};

// Loops build -> submit -> classify -> validate, stopping on acceptance or
// budget exhaustion. Recording of exchanges is the oracle's concern: wrap
// the live client in a RecordingOracle so every submission lands in the
// transcript store exactly once.
SessionOutcome run_with_retries(const std::string &phase, const std::string &unit_name,
                                const PhaseHooks &hooks, TranslationOracle &oracle,
                                int budget = 3);

} // namespace rustmap
