// Thin chat-completion adapter. Isolated in its own TU so the HTTP and TLS
// machinery stays out of the deterministic pipeline.

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "rustmap/oracle.hpp"

#include <nlohmann/json.hpp>

namespace rustmap {

namespace {

class LiveOracle : public TranslationOracle {
  public:
    explicit LiveOracle(LiveOracleConfig cfg) : cfg_(std::move(cfg)) {
        if (cfg_.base_url.empty()) throw EnvError("live oracle: base URL not configured");
        if (cfg_.api_key.empty()) throw EnvError("live oracle: API key not set");
    }

    std::string submit(const std::string &prompt, const std::string &ctx) override {
        nlohmann::json body = {
            {"model", cfg_.model},
            {"messages", {{{"role", "user"}, {"content", prompt}}}},
        };

        httplib::Client client(cfg_.base_url);
        client.set_connection_timeout(static_cast<time_t>(cfg_.timeout_secs), 0);
        client.set_read_timeout(static_cast<time_t>(cfg_.timeout_secs), 0);
        client.set_bearer_token_auth(cfg_.api_key);

        auto res = client.Post(cfg_.path, body.dump(), "application/json");
        if (!res)
            throw OracleUnavailable("live oracle unreachable for " + ctx + ": " +
                                    httplib::to_string(res.error()));
        if (res->status != 200)
            throw OracleUnavailable("live oracle returned HTTP " +
                                    std::to_string(res->status) + ": " + res->body);

        auto json = nlohmann::json::parse(res->body, nullptr, false);
        if (json.is_discarded() || !json.contains("choices") || json["choices"].empty())
            throw OracleUnavailable("live oracle returned malformed body");
        return json["choices"][0]["message"]["content"].get<std::string>();
    }

    size_t max_input_tokens() const override { return cfg_.max_input_tokens; }

  private:
    LiveOracleConfig cfg_;
};

} // namespace

std::shared_ptr<TranslationOracle> make_live_oracle(const LiveOracleConfig &cfg) {
    return std::make_shared<LiveOracle>(cfg);
}

} // namespace rustmap
