#include "lago/process.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <mutex>

#include "lago/error.hpp"

namespace lago {

namespace {

constexpr std::size_t kStderrCap = 64 * 1024;

void ignore_sigpipe_once() {
    static std::once_flag flag;
    std::call_once(flag, [] { ::signal(SIGPIPE, SIG_IGN); });
}

void make_pipe(int fds[2]) {
    if (::pipe2(fds, O_CLOEXEC) != 0) throw Error(std::string("pipe2: ") + std::strerror(errno));
}

}  // namespace

Subprocess::Subprocess(const std::vector<std::string>& argv) {
    if (argv.empty()) throw UsageError("empty subprocess command");
    ignore_sigpipe_once();

    std::vector<char*> cargv;
    for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
    cargv.push_back(nullptr);

    int in[2], out[2], err[2];
    make_pipe(in);
    make_pipe(out);
    make_pipe(err);

    pid_ = ::fork();
    if (pid_ < 0) throw Error(std::string("fork: ") + std::strerror(errno));
    if (pid_ == 0) {
        ::setpgid(0, 0);
        ::dup2(in[0], STDIN_FILENO);
        ::dup2(out[1], STDOUT_FILENO);
        ::dup2(err[1], STDERR_FILENO);
        ::execvp(cargv[0], cargv.data());
        const char msg[] = "exec failed\n";
        [[maybe_unused]] auto n = ::write(STDERR_FILENO, msg, sizeof msg - 1);
        ::_exit(127);
    }
    ::setpgid(pid_, pid_);  // race-free regardless of which side runs first
    ::close(in[0]);
    ::close(out[1]);
    ::close(err[1]);
    in_fd_ = in[1];
    out_fd_ = out[0];
    err_fd_ = err[0];
    ::fcntl(out_fd_, F_SETFL, O_NONBLOCK);
    ::fcntl(err_fd_, F_SETFL, O_NONBLOCK);
}

Subprocess::~Subprocess() { kill(); }

Subprocess::Subprocess(Subprocess&& o) noexcept
    : pid_(std::exchange(o.pid_, -1)),
      in_fd_(std::exchange(o.in_fd_, -1)),
      out_fd_(std::exchange(o.out_fd_, -1)),
      err_fd_(std::exchange(o.err_fd_, -1)),
      reaped_(std::exchange(o.reaped_, true)),
      out_buf_(std::move(o.out_buf_)),
      stderr_buf_(std::move(o.stderr_buf_)) {}

Subprocess& Subprocess::operator=(Subprocess&& o) noexcept {
    if (this != &o) {
        kill();
        pid_ = std::exchange(o.pid_, -1);
        in_fd_ = std::exchange(o.in_fd_, -1);
        out_fd_ = std::exchange(o.out_fd_, -1);
        err_fd_ = std::exchange(o.err_fd_, -1);
        reaped_ = std::exchange(o.reaped_, true);
        out_buf_ = std::move(o.out_buf_);
        stderr_buf_ = std::move(o.stderr_buf_);
    }
    return *this;
}

bool Subprocess::write_line(std::string_view line) {
    if (in_fd_ < 0) return false;
    std::string data(line);
    data.push_back('\n');
    std::size_t off = 0;
    while (off < data.size()) {
        const ssize_t n = ::write(in_fd_, data.data() + off, data.size() - off);
        if (n < 0) {
            if (errno == EINTR) continue;
            return false;
        }
        off += static_cast<std::size_t>(n);
    }
    return true;
}

void Subprocess::pump_stderr() {
    if (err_fd_ < 0) return;
    char buf[4096];
    for (;;) {
        const ssize_t n = ::read(err_fd_, buf, sizeof buf);
        if (n > 0) {
            if (stderr_buf_.size() < kStderrCap)
                stderr_buf_.append(buf, std::min<std::size_t>(static_cast<std::size_t>(n),
                                                              kStderrCap - stderr_buf_.size()));
            continue;
        }
        if (n == 0) {
            ::close(err_fd_);
            err_fd_ = -1;
        }
        return;
    }
}

Subprocess::ReadResult Subprocess::read_line(std::chrono::duration<double> timeout) {
    using Clock = std::chrono::steady_clock;
    const auto deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(timeout);
    for (;;) {
        if (auto nl = out_buf_.find('\n'); nl != std::string::npos) {
            std::string line = out_buf_.substr(0, nl);
            out_buf_.erase(0, nl + 1);
            return {ReadStatus::line, std::move(line)};
        }
        if (out_fd_ < 0) return {ReadStatus::eof, {}};

        const auto remaining =
            std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
        if (remaining <= 0) return {ReadStatus::timeout, {}};

        pollfd fds[2] = {{out_fd_, POLLIN, 0}, {err_fd_, POLLIN, 0}};
        const int nfds = err_fd_ >= 0 ? 2 : 1;
        const int rc = ::poll(fds, static_cast<nfds_t>(nfds), static_cast<int>(std::min<long long>(remaining, 1000)));
        if (rc < 0) {
            if (errno == EINTR) continue;
            throw Error(std::string("poll: ") + std::strerror(errno));
        }
        if (nfds == 2 && fds[1].revents) pump_stderr();
        if (fds[0].revents) {
            char buf[65536];
            const ssize_t n = ::read(out_fd_, buf, sizeof buf);
            if (n > 0) {
                out_buf_.append(buf, static_cast<std::size_t>(n));
            } else if (n == 0 || (errno != EAGAIN && errno != EINTR)) {
                ::close(out_fd_);
                out_fd_ = -1;
                pump_stderr();
            }
        }
    }
}

bool Subprocess::running() {
    if (pid_ <= 0 || reaped_) return false;
    int status = 0;
    const pid_t r = ::waitpid(pid_, &status, WNOHANG);
    if (r == pid_) {
        reaped_ = true;
        return false;
    }
    return true;
}

void Subprocess::kill() {
    if (pid_ > 0 && !reaped_) {
        ::killpg(pid_, SIGKILL);
        ::kill(pid_, SIGKILL);
        int status = 0;
        while (::waitpid(pid_, &status, 0) < 0 && errno == EINTR) {
        }
        reaped_ = true;
    } else if (pid_ > 0) {
        ::killpg(pid_, SIGKILL);  // descendants may outlive a reaped leader
    }
    close_fds();
}

void Subprocess::close_fds() noexcept {
    for (int* fd : {&in_fd_, &out_fd_, &err_fd_}) {
        if (*fd >= 0) ::close(*fd);
        *fd = -1;
    }
}

}  // namespace lago
