#pragma once

#include <sys/types.h>

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lago {

/// A child process in its own process group, spoken to over line-delimited
/// stdin/stdout. stderr is captured into a bounded buffer. Destruction kills
/// the whole group and reaps the child.
class Subprocess {
public:
    explicit Subprocess(const std::vector<std::string>& argv);
    ~Subprocess();

    Subprocess(const Subprocess&) = delete;
    Subprocess& operator=(const Subprocess&) = delete;
    Subprocess(Subprocess&& o) noexcept;
    Subprocess& operator=(Subprocess&& o) noexcept;

    /// Writes `line` plus a newline. Returns false if the child closed its stdin.
    bool write_line(std::string_view line);

    enum class ReadStatus { line, timeout, eof };
    struct ReadResult {
        ReadStatus status;
        std::string line;
    };

    /// Waits up to `timeout` for one complete line on stdout.
    ReadResult read_line(std::chrono::duration<double> timeout);

    /// SIGKILL to the process group, then reap.
    void kill();
    bool running();
    pid_t pid() const noexcept { return pid_; }
    const std::string& stderr_text() const noexcept { return stderr_buf_; }

private:
    void close_fds() noexcept;
    void pump_stderr();

    pid_t pid_ = -1;
    int in_fd_ = -1;   // child's stdin
    int out_fd_ = -1;  // child's stdout
    int err_fd_ = -1;  // child's stderr
    bool reaped_ = false;
    std::string out_buf_;
    std::string stderr_buf_;
};

}  // namespace lago
