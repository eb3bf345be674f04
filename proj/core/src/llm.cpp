#include "lago/llm.hpp"

#include <cstdlib>
#include <fstream>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "lago/error.hpp"

namespace lago::llm {

namespace {

std::string backend_name(Backend b) { return b == Backend::live ? "live" : "replay"; }

nlohmann::json response_to_json(const ChatResponse& r) {
    return {{"content", r.content},
            {"usage", {{"prompt", r.usage.prompt}, {"completion", r.usage.completion}}},
            {"latency_s", r.latency_s},
            {"backend", backend_name(r.backend)}};
}

ChatResponse response_from_json(const nlohmann::json& j) {
    ChatResponse r;
    j.at("content").get_to(r.content);
    if (j.contains("usage")) {
        r.usage.prompt = j["usage"].value("prompt", 0L);
        r.usage.completion = j["usage"].value("completion", 0L);
    }
    r.latency_s = j.value("latency_s", 0.0);
    r.backend = j.value("backend", std::string("live")) == "replay" ? Backend::replay : Backend::live;
    return r;
}

bool retryable(const HttpResult& r) { return r.status == 0 || r.status == 429 || r.status >= 500; }

class HttplibTransport : public Transport {
public:
    HttplibTransport(const std::string& scheme_host_port, std::chrono::seconds timeout)
        : client_(scheme_host_port) {
        client_.set_read_timeout(timeout);
        client_.set_write_timeout(timeout);
        client_.set_connection_timeout(std::chrono::seconds(30));
    }

    HttpResult post(const std::string& path, const std::string& body,
                    const std::map<std::string, std::string>& headers) override {
        httplib::Headers h;
        for (const auto& [k, v] : headers) h.emplace(k, v);
        auto res = client_.Post(path, h, body, "application/json");
        if (!res) return {0, {}, httplib::to_string(res.error())};
        return {res->status, res->body, {}};
    }

private:
    httplib::Client client_;
};

}  // namespace

nlohmann::json to_json(const ChatRequest& req) {
    nlohmann::json messages = nlohmann::json::array();
    for (const auto& m : req.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
    nlohmann::json j = {{"messages", std::move(messages)},
                        {"temperature", req.temperature},
                        {"model", req.model},
                        {"tag", req.tag}};
    if (req.reasoning_effort) j["reasoning_effort"] = *req.reasoning_effort;
    return j;
}

ChatRequest request_from_json(const nlohmann::json& doc) {
    ChatRequest r;
    for (const auto& m : doc.at("messages")) r.messages.push_back({m.at("role"), m.at("content")});
    r.temperature = doc.value("temperature", 1.0);
    if (doc.contains("reasoning_effort")) r.reasoning_effort = doc["reasoning_effort"].get<std::string>();
    r.model = doc.value("model", std::string{});
    r.tag = doc.value("tag", std::string{});
    return r;
}

nlohmann::json wire_body(const ChatRequest& req) {
    nlohmann::json body = to_json(req);
    body.erase("tag");
    return body;
}

std::unique_ptr<Transport> make_http_transport(const std::string& scheme_host_port, std::chrono::seconds timeout) {
    return std::make_unique<HttplibTransport>(scheme_host_port, timeout);
}

std::optional<LiveConfig> LiveConfig::from_env() {
    auto env = [](const char* name) -> std::string {
        const char* v = std::getenv(name);
        return v ? v : "";
    };
    LiveConfig cfg;
    cfg.api_key = env("LAGO_API_KEY");
    if (cfg.api_key.empty()) cfg.api_key = env("OPENAI_API_KEY");
    if (cfg.api_key.empty()) return std::nullopt;
    if (auto url = env("LAGO_BASE_URL"); !url.empty()) cfg.base_url = url;
    cfg.model = env("LAGO_MODEL");
    return cfg;
}

namespace {

// "https://host:port/v1/" -> ("https://host:port", "/v1")
std::pair<std::string, std::string> split_base_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    const auto path_start = url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    std::string origin = url.substr(0, path_start);
    std::string prefix = path_start == std::string::npos ? "" : url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {origin, prefix};
}

}  // namespace

LiveBackend::LiveBackend(LiveConfig cfg, std::unique_ptr<Transport> transport, Sleeper sleeper)
    : cfg_(std::move(cfg)), transport_(std::move(transport)), sleep_(std::move(sleeper)) {
    path_prefix_ = split_base_url(cfg_.base_url).second;
    if (!sleep_) sleep_ = [](std::chrono::duration<double> d) { std::this_thread::sleep_for(d); };
}

LiveBackend::LiveBackend(LiveConfig cfg)
    : LiveBackend(cfg, make_http_transport(split_base_url(cfg.base_url).first)) {}

ChatResponse LiveBackend::complete(const ChatRequest& req) {
    nlohmann::json body = wire_body(req);
    if (body["model"].get<std::string>().empty()) body["model"] = cfg_.model;
    const std::map<std::string, std::string> headers = {{"Authorization", "Bearer " + cfg_.api_key}};
    const std::string path = path_prefix_ + "/chat/completions";

    const auto start = std::chrono::steady_clock::now();
    HttpResult res;
    for (std::size_t attempt = 0;; ++attempt) {
        res = transport_->post(path, body.dump(), headers);
        if (!retryable(res) || attempt == std::size(kBackoffSeconds)) break;
        sleep_(std::chrono::duration<double>(kBackoffSeconds[attempt]));
    }
    if (res.status != 200) {
        std::string detail = res.status == 0 ? res.error : "HTTP " + std::to_string(res.status) + ": " + res.body.substr(0, 500);
        throw GatewayError("chat completion '" + req.tag + "' failed: " + detail);
    }

    ChatResponse out;
    out.backend = Backend::live;
    out.latency_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    try {
        const auto doc = nlohmann::json::parse(res.body);
        const auto& content = doc.at("choices").at(0).at("message").at("content");
        out.content = content.is_string() ? content.get<std::string>() : std::string{};
        if (doc.contains("usage") && doc["usage"].is_object()) {
            out.usage.prompt = doc["usage"].value("prompt_tokens", 0L);
            out.usage.completion = doc["usage"].value("completion_tokens", 0L);
        }
    } catch (const nlohmann::json::exception& e) {
        throw GatewayError("chat completion '" + req.tag + "': unexpected response body: " + e.what());
    }
    return out;
}

CallLog::CallLog(std::string path) : path_(std::move(path)) {}

void CallLog::append(const ChatRequest& req, const ChatResponse& resp) {
    const nlohmann::json line = {{"tag", req.tag}, {"request", to_json(req)}, {"response", response_to_json(resp)}};
    std::lock_guard lock(mutex_);
    std::ofstream out(path_, std::ios::app);
    if (!out) throw ConfigError("cannot append to LLM log " + path_);
    out << line.dump() << '\n';
    out.flush();
}

std::map<std::string, LogEntry> CallLog::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open LLM log " + path);
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::map<std::string, LogEntry> entries;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < data.size()) {
        ++line_no;
        const auto nl = data.find('\n', pos);
        if (nl == std::string::npos)
            throw ParseError("truncated final line in " + path + " (no newline)", line_no);
        const std::string line = data.substr(pos, nl - pos);
        pos = nl + 1;
        if (line.empty()) continue;
        try {
            const auto doc = nlohmann::json::parse(line);
            LogEntry e{request_from_json(doc.at("request")), response_from_json(doc.at("response"))};
            const auto tag = doc.at("tag").get<std::string>();
            e.request.tag = tag;
            entries[tag] = std::move(e);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("corrupt LLM log entry in " + path + ": " + e.what(), line_no);
        }
    }
    return entries;
}

std::unique_ptr<ReplayBackend> ReplayBackend::from_log(const std::string& path) {
    return std::make_unique<ReplayBackend>(CallLog::load(path));
}

ChatResponse ReplayBackend::complete(const ChatRequest& req) {
    auto it = entries_.find(req.tag);
    if (it == entries_.end()) throw ReplayMissError(req.tag);
    ChatResponse r = it->second.response;
    r.backend = Backend::replay;
    return r;
}

Gateway::Gateway(std::unique_ptr<ChatBackend> backend, Settings settings, std::unique_ptr<CallLog> recorder)
    : backend_(std::move(backend)), settings_(std::move(settings)), recorder_(std::move(recorder)) {}

ChatResponse Gateway::complete(const std::string& tag, std::vector<Message> messages) {
    if (messages.empty()) throw UsageError("chat request without messages");
    {
        std::lock_guard lock(mutex_);
        if (usage_.completion >= settings_.completion_token_ceiling)
            throw BudgetExhaustedError("completion-token ceiling of " +
                                       std::to_string(settings_.completion_token_ceiling) + " reached");
        if (!seen_tags_.insert(tag).second) throw UsageError("duplicate request tag '" + tag + "'");
    }
    ChatRequest req;
    req.messages = std::move(messages);
    req.temperature = settings_.temperature;
    req.reasoning_effort = settings_.reasoning_effort;
    req.model = settings_.model;
    req.tag = tag;

    ChatResponse resp = backend_->complete(req);
    if (recorder_) recorder_->append(req, resp);
    std::lock_guard lock(mutex_);
    usage_ += resp.usage;
    return resp;
}

TokenUsage Gateway::usage() const {
    std::lock_guard lock(mutex_);
    return usage_;
}

void Gateway::add_prior_usage(const TokenUsage& u) {
    std::lock_guard lock(mutex_);
    usage_ += u;
}

}  // namespace lago::llm
