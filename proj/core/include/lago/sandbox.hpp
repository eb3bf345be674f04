#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lago/environment.hpp"
#include "lago/process.hpp"

// Client side of the line-delimited JSON protocol spoken with the sandbox
// harness (one request line, one response line, strictly alternating).
namespace lago::sandbox {

inline constexpr const char* kProtocolVersion = "1";

/// Extra wall-clock time the orchestrator grants beyond a budget before killing the harness.
inline constexpr double kGraceSeconds = 1.0;

struct EvaluateRequest {
    EnvKind env = EnvKind::pdptw;
    nlohmann::json instance;
    std::string cons_code;
    std::string ref_code;
    int iterations = 200;
    double time_limit_s = 10.0;
    std::uint64_t seed = 0;
};

enum class Outcome {
    ok,
    load_error,     // harness could not load the code
    runtime_error,  // heuristic raised
    timeout,        // harness-reported or orchestrator-enforced deadline
    crash,          // harness exited or closed stdout mid-request
};

std::string_view to_string(Outcome o) noexcept;

struct EvaluateReply {
    Outcome outcome = Outcome::crash;
    nlohmann::json solution;  // set when outcome == ok
    double advisory_cost = 0.0;
    int advisory_violations = 0;
    int iterations_done = 0;
    nlohmann::json log = nlohmann::json::array();
    std::string traceback;
    /// The orchestrator killed the harness after the deadline plus grace.
    bool killed = false;
};

struct FeaturesReply {
    Outcome outcome = Outcome::crash;
    std::vector<std::string> names;
    std::vector<std::optional<double>> values;  // null for errored or non-finite functions
    std::map<std::string, std::string> errors;  // function name -> traceback
    std::string traceback;                      // whole-call failure
};

nlohmann::json encode(const EvaluateRequest& req);
EvaluateReply decode_evaluate(const nlohmann::json& doc);
nlohmann::json encode_features(const std::string& feature_code, const nlohmann::json& instance,
                               const nlohmann::json& solution);
FeaturesReply decode_features(const nlohmann::json& doc);

/// One harness subprocess. Spawned lazily with a version handshake; killed and
/// respawned on the next call after a timeout or crash. Not thread-safe: each
/// concurrent evaluation owns its own client.
class Client {
public:
    explicit Client(std::vector<std::string> command, std::string expected_version = kProtocolVersion);

    /// Sends a handshake and returns the reply. Throws ProtocolError on a
    /// version mismatch or malformed reply.
    nlohmann::json handshake(double timeout_s = 10.0);

    EvaluateReply evaluate(const EvaluateRequest& req);
    FeaturesReply features(const std::string& feature_code, const nlohmann::json& instance,
                           const nlohmann::json& solution, double timeout_s);

    void shutdown();

private:
    struct Exchange {
        Subprocess::ReadStatus status;
        nlohmann::json reply;
    };

    void ensure_started();
    Exchange round_trip(const nlohmann::json& request, double timeout_s);
    std::string stderr_tail() const;

    std::vector<std::string> command_;
    std::string expected_version_;
    std::unique_ptr<Subprocess> proc_;
    std::string last_stderr_;
};

}  // namespace lago::sandbox
