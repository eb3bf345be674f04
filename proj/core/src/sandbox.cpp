#include "lago/sandbox.hpp"

#include <cmath>

#include "lago/error.hpp"

namespace lago::sandbox {

namespace {

Outcome outcome_from_kind(const std::string& kind) {
    if (kind == "load") return Outcome::load_error;
    if (kind == "runtime") return Outcome::runtime_error;
    if (kind == "timeout") return Outcome::timeout;
    throw ProtocolError("unknown error kind '" + kind + "'");
}

const nlohmann::json& require_status(const nlohmann::json& doc) {
    if (!doc.is_object() || !doc.contains("status") || !doc["status"].is_string())
        throw ProtocolError("response without a status field");
    const auto& s = doc["status"];
    if (s != "ok" && s != "error") throw ProtocolError("unknown status " + s.dump());
    return s;
}

}  // namespace

std::string_view to_string(Outcome o) noexcept {
    switch (o) {
        case Outcome::ok: return "ok";
        case Outcome::load_error: return "load";
        case Outcome::runtime_error: return "runtime";
        case Outcome::timeout: return "timeout";
        case Outcome::crash: return "crash";
    }
    return "?";
}

nlohmann::json encode(const EvaluateRequest& req) {
    return {{"op", "evaluate"},
            {"env", std::string(to_string(req.env))},
            {"instance", req.instance},
            {"cons_code", req.cons_code},
            {"ref_code", req.ref_code},
            {"budget", {{"iterations", req.iterations}, {"time_limit_s", req.time_limit_s}}},
            {"seed", req.seed}};
}

EvaluateReply decode_evaluate(const nlohmann::json& doc) {
    EvaluateReply r;
    try {
        if (require_status(doc) == "error") {
            r.outcome = outcome_from_kind(doc.at("kind").get<std::string>());
            r.traceback = doc.value("traceback", std::string{});
            return r;
        }
        r.outcome = Outcome::ok;
        r.solution = doc.at("solution");
        if (!r.solution.is_object()) throw ProtocolError("solution is not an object");
        r.advisory_cost = doc.value("cost", 0.0);
        r.advisory_violations = doc.value("violations", 0);
        r.iterations_done = doc.value("iterations_done", 0);
        if (doc.contains("log")) r.log = doc["log"];
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw ProtocolError(std::string("malformed evaluate response: ") + e.what());
    }
}

nlohmann::json encode_features(const std::string& feature_code, const nlohmann::json& instance,
                               const nlohmann::json& solution) {
    return {{"op", "features"}, {"feature_code", feature_code}, {"instance", instance}, {"solution", solution}};
}

FeaturesReply decode_features(const nlohmann::json& doc) {
    FeaturesReply r;
    try {
        if (require_status(doc) == "error") {
            r.outcome = doc.contains("kind") ? outcome_from_kind(doc["kind"].get<std::string>())
                                             : Outcome::load_error;
            r.traceback = doc.value("traceback", std::string{});
            return r;
        }
        r.outcome = Outcome::ok;
        r.names = doc.at("names").get<std::vector<std::string>>();
        const auto& values = doc.at("values");
        if (!values.is_array() || values.size() != r.names.size())
            throw ProtocolError("features response: values/names length mismatch");
        for (const auto& v : values) {
            if (v.is_number()) {
                const double d = v.get<double>();
                r.values.push_back(std::isfinite(d) ? std::optional<double>(d) : std::nullopt);
            } else {
                r.values.push_back(std::nullopt);
            }
        }
        if (doc.contains("errors"))
            for (const auto& [name, tb] : doc["errors"].items())
                r.errors[name] = tb.is_string() ? tb.get<std::string>() : tb.dump();
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw ProtocolError(std::string("malformed features response: ") + e.what());
    }
}

Client::Client(std::vector<std::string> command, std::string expected_version)
    : command_(std::move(command)), expected_version_(std::move(expected_version)) {
    if (command_.empty()) throw ConfigError("empty sandbox harness command");
}

void Client::ensure_started() {
    if (proc_ && proc_->running()) return;
    proc_ = std::make_unique<Subprocess>(command_);
    handshake();
}

std::string Client::stderr_tail() const {
    constexpr std::size_t kTail = 2000;
    return last_stderr_.size() > kTail ? last_stderr_.substr(last_stderr_.size() - kTail) : last_stderr_;
}

Client::Exchange Client::round_trip(const nlohmann::json& request, double timeout_s) {
    if (!proc_->write_line(request.dump())) {
        last_stderr_ = proc_->stderr_text();
        proc_.reset();
        return {Subprocess::ReadStatus::eof, {}};
    }
    auto res = proc_->read_line(std::chrono::duration<double>(timeout_s));
    if (res.status != Subprocess::ReadStatus::line) {
        proc_->kill();
        last_stderr_ = proc_->stderr_text();
        proc_.reset();
        return {res.status, {}};
    }
    try {
        return {res.status, nlohmann::json::parse(res.line)};
    } catch (const nlohmann::json::parse_error& e) {
        proc_.reset();
        throw ProtocolError(std::string("harness sent a non-JSON line: ") + e.what());
    }
}

nlohmann::json Client::handshake(double timeout_s) {
    if (!proc_) proc_ = std::make_unique<Subprocess>(command_);
    const auto ex = round_trip({{"op", "handshake"}, {"version", expected_version_}}, timeout_s);
    if (ex.status != Subprocess::ReadStatus::line)
        throw ProtocolError("harness did not answer the handshake: " + stderr_tail());
    const auto& reply = ex.reply;
    if (!reply.is_object() || !reply.contains("version") || !reply["version"].is_string())
        throw ProtocolError("handshake reply without a version");
    const auto version = reply["version"].get<std::string>();
    if (version != expected_version_) {
        shutdown();
        throw ProtocolError("harness speaks protocol version " + version + ", expected " +
                            expected_version_);
    }
    return reply;
}

EvaluateReply Client::evaluate(const EvaluateRequest& req) {
    ensure_started();
    const auto ex = round_trip(encode(req), req.time_limit_s + kGraceSeconds);
    if (ex.status == Subprocess::ReadStatus::line) return decode_evaluate(ex.reply);
    EvaluateReply r;
    if (ex.status == Subprocess::ReadStatus::timeout) {
        r.outcome = Outcome::timeout;
        r.killed = true;
        r.traceback = "harness exceeded the time limit of " + std::to_string(req.time_limit_s) +
                      " s and was killed";
    } else {
        r.outcome = Outcome::crash;
        r.traceback = "harness exited unexpectedly\n" + stderr_tail();
    }
    return r;
}

FeaturesReply Client::features(const std::string& feature_code, const nlohmann::json& instance,
                               const nlohmann::json& solution, double timeout_s) {
    ensure_started();
    const auto ex = round_trip(encode_features(feature_code, instance, solution), timeout_s);
    if (ex.status == Subprocess::ReadStatus::line) return decode_features(ex.reply);
    FeaturesReply r;
    r.outcome = ex.status == Subprocess::ReadStatus::timeout ? Outcome::timeout : Outcome::crash;
    r.traceback = ex.status == Subprocess::ReadStatus::timeout
                      ? "feature evaluation exceeded " + std::to_string(timeout_s) + " s"
                      : "harness exited unexpectedly\n" + stderr_tail();
    return r;
}

void Client::shutdown() { proc_.reset(); }

}  // namespace lago::sandbox
