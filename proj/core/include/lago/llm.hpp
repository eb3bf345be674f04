#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace lago::llm {

struct Message {
    std::string role;  // "system" or "user"
    std::string content;

    bool operator==(const Message&) const = default;
};

/// `tag` is the stable replay key: "{iteration}/{component}/{operator-or-role}/{ordinal}".
struct ChatRequest {
    std::vector<Message> messages;
    double temperature = 1.0;
    std::optional<std::string> reasoning_effort;
    std::string model;
    std::string tag;
};

enum class Backend { live, replay };

struct TokenUsage {
    long prompt = 0;
    long completion = 0;

    TokenUsage& operator+=(const TokenUsage& o) {
        prompt += o.prompt;
        completion += o.completion;
        return *this;
    }
};

struct ChatResponse {
    std::string content;
    TokenUsage usage;
    double latency_s = 0.0;
    Backend backend = Backend::live;
};

nlohmann::json to_json(const ChatRequest& req);
ChatRequest request_from_json(const nlohmann::json& doc);
/// OpenAI-compatible chat-completions request body.
nlohmann::json wire_body(const ChatRequest& req);

struct HttpResult {
    int status = 0;  // 0: transport failure
    std::string body;
    std::string error;
};

/// POST transport; swapped for a scripted mock in tests.
class Transport {
public:
    virtual ~Transport() = default;
    virtual HttpResult post(const std::string& path, const std::string& body,
                            const std::map<std::string, std::string>& headers) = 0;
};

/// cpp-httplib transport against `base_url` (scheme://host[:port]).
std::unique_ptr<Transport> make_http_transport(const std::string& scheme_host_port,
                                               std::chrono::seconds timeout = std::chrono::seconds(600));

class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    virtual ChatResponse complete(const ChatRequest& req) = 0;
};

struct LiveConfig {
    std::string base_url = "https://api.openai.com/v1";
    std::string api_key;
    std::string model;

    /// Reads LAGO_API_KEY (or OPENAI_API_KEY), LAGO_BASE_URL, LAGO_MODEL.
    /// Returns nullopt when no API key is set.
    static std::optional<LiveConfig> from_env();
};

using Sleeper = std::function<void(std::chrono::duration<double>)>;

/// POSTs to {base_url}/chat/completions. Transport failures, 5xx and 429 are
/// retried after 1 s, 4 s and 16 s; then GatewayError.
class LiveBackend : public ChatBackend {
public:
    LiveBackend(LiveConfig cfg, std::unique_ptr<Transport> transport, Sleeper sleeper = {});
    explicit LiveBackend(LiveConfig cfg);

    ChatResponse complete(const ChatRequest& req) override;

    static constexpr double kBackoffSeconds[] = {1.0, 4.0, 16.0};

private:
    LiveConfig cfg_;
    std::string path_prefix_;
    std::unique_ptr<Transport> transport_;
    Sleeper sleep_;
};

struct LogEntry {
    ChatRequest request;
    ChatResponse response;
};

/// Append-only `llm_log.jsonl`: one {"tag","request","response"} document per line.
class CallLog {
public:
    explicit CallLog(std::string path);

    void append(const ChatRequest& req, const ChatResponse& resp);
    const std::string& path() const noexcept { return path_; }

    /// Reconstructs the tag -> entry map. Throws ParseError with the line number
    /// on a corrupt or truncated line.
    static std::map<std::string, LogEntry> load(const std::string& path);

private:
    std::string path_;
    std::mutex mutex_;
};

/// Returns recorded responses verbatim by request tag.
class ReplayBackend : public ChatBackend {
public:
    explicit ReplayBackend(std::map<std::string, LogEntry> entries) : entries_(std::move(entries)) {}
    static std::unique_ptr<ReplayBackend> from_log(const std::string& path);

    /// Throws ReplayMissError naming the tag when nothing was recorded for it.
    ChatResponse complete(const ChatRequest& req) override;
    std::size_t size() const noexcept { return entries_.size(); }

private:
    std::map<std::string, LogEntry> entries_;
};

/// Front door used by the analyst and generator: stamps model settings onto
/// requests, records every exchange, and enforces the completion-token ceiling.
class Gateway {
public:
    struct Settings {
        std::string model;
        double temperature = 1.0;
        std::optional<std::string> reasoning_effort = "medium";
        long completion_token_ceiling = 5'000'000;
    };

    Gateway(std::unique_ptr<ChatBackend> backend, Settings settings, std::unique_ptr<CallLog> recorder = nullptr);

    /// Throws BudgetExhaustedError once the ceiling has been reached, UsageError
    /// for a repeated tag, and whatever the backend throws.
    ChatResponse complete(const std::string& tag, std::vector<Message> messages);

    TokenUsage usage() const;
    void add_prior_usage(const TokenUsage& u);

private:
    std::unique_ptr<ChatBackend> backend_;
    Settings settings_;
    std::unique_ptr<CallLog> recorder_;
    mutable std::mutex mutex_;
    TokenUsage usage_;
    std::set<std::string> seen_tags_;
};

}  // namespace lago::llm
