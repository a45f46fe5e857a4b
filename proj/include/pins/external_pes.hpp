#pragma once

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include "pins/errors.hpp"

namespace pins {

// Line-protocol client for an external PES program speaking over its
// standard streams:
//
//   client -> child   HELLO <fn>
//   child  -> client  OK                      (or ERR <msg>)
//   client -> child   EVAL <n>
//                     <n lines of fn space-separated floats, %.17g>
//   child  -> client  OK                      (or ERR <msg>)
//                     <n lines, one energy per line, hartree>
//
// One request in flight per process; spawn one evaluator per walker to
// parallelise. Any protocol violation, child exit, or timeout raises
// ExternalPesError with the offending context.
class ExternalEvaluator {
public:
    ExternalEvaluator(std::string command, int fn, double timeout_s = default_timeout_s())
        : command_(std::move(command)), fn_(fn), timeout_s_(timeout_s)
    {
        if (fn_ < 1) throw InvalidInput("ExternalEvaluator: fn must be >= 1");
        spawn();
        handshake();
    }

    ~ExternalEvaluator() { shutdown(); }

    ExternalEvaluator(const ExternalEvaluator&) = delete;
    ExternalEvaluator& operator=(const ExternalEvaluator&) = delete;

    static double default_timeout_s()
    {
        if (const char* env = std::getenv("PINS_EXTERNAL_PES_TIMEOUT_S")) {
            const double t = std::atof(env);
            if (t > 0.0) return t;
        }
        return 30.0;
    }

    int fn() const { return fn_; }

    double evaluate(const double* x)
    {
        const double* batch[1] = {x};
        double e;
        evaluate_batch(batch, 1, &e);
        return e;
    }

    // points[i] is a pointer to fn coordinates; energies receives n values.
    void evaluate_batch(const double* const* points, int n, double* energies)
    {
        if (n < 0) throw InvalidInput("evaluate_batch: negative batch size");
        std::string req = "EVAL " + std::to_string(n) + "\n";
        char num[32];
        for (int i = 0; i < n; ++i) {
            for (int d = 0; d < fn_; ++d) {
                std::snprintf(num, sizeof num, "%.17g", points[i][d]);
                if (d) req += ' ';
                req += num;
            }
            req += '\n';
        }
        write_all(req);
        expect_ok("EVAL");
        for (int i = 0; i < n; ++i) {
            const std::string line = read_line();
            const char* begin = line.c_str();
            char* end = nullptr;
            const double e = std::strtod(begin, &end);
            if (end == begin) fail("malformed energy line: \"" + line + "\"");
            energies[i] = e;
        }
    }

    std::vector<double> evaluate_batch(const std::vector<std::vector<double>>& points)
    {
        std::vector<const double*> ptrs(points.size());
        for (size_t i = 0; i < points.size(); ++i) {
            if (static_cast<int>(points[i].size()) != fn_)
                throw InvalidInput("evaluate_batch: point dimension != fn");
            ptrs[i] = points[i].data();
        }
        std::vector<double> out(points.size());
        evaluate_batch(ptrs.data(), static_cast<int>(points.size()), out.data());
        return out;
    }

private:
    void spawn()
    {
        int to_child[2], from_child[2];
        if (pipe(to_child) != 0 || pipe(from_child) != 0)
            throw ExternalPesError("pipe() failed: " + std::string(std::strerror(errno)));
        pid_ = fork();
        if (pid_ < 0) throw ExternalPesError("fork() failed");
        if (pid_ == 0) {
            dup2(to_child[0], STDIN_FILENO);
            dup2(from_child[1], STDOUT_FILENO);
            close(to_child[0]);
            close(to_child[1]);
            close(from_child[0]);
            close(from_child[1]);
            execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
            _exit(127);
        }
        close(to_child[0]);
        close(from_child[1]);
        write_fd_ = to_child[1];
        read_fd_ = from_child[0];
        signal(SIGPIPE, SIG_IGN);
    }

    void handshake()
    {
        write_all("HELLO " + std::to_string(fn_) + "\n");
        expect_ok("HELLO");
    }

    void shutdown()
    {
        if (write_fd_ >= 0) close(write_fd_);
        if (read_fd_ >= 0) close(read_fd_);
        write_fd_ = read_fd_ = -1;
        if (pid_ > 0) {
            kill(pid_, SIGTERM);
            int status;
            if (waitpid(pid_, &status, WNOHANG) == 0) {
                usleep(20000);
                if (waitpid(pid_, &status, WNOHANG) == 0) {
                    kill(pid_, SIGKILL);
                    waitpid(pid_, &status, 0);
                }
            }
            pid_ = -1;
        }
    }

    [[noreturn]] void fail(const std::string& what)
    {
        shutdown();
        throw ExternalPesError("external PES \"" + command_ + "\": " + what);
    }

    void write_all(const std::string& data)
    {
        size_t off = 0;
        while (off < data.size()) {
            const ssize_t n = ::write(write_fd_, data.data() + off, data.size() - off);
            if (n < 0) {
                if (errno == EINTR) continue;
                fail("write failed (" + std::string(std::strerror(errno)) + ")");
            }
            off += static_cast<size_t>(n);
        }
    }

    void expect_ok(const char* phase)
    {
        const std::string line = read_line();
        if (line == "OK") return;
        if (line.rfind("ERR", 0) == 0)
            fail(std::string(phase) + " rejected: " + line);
        fail(std::string(phase) + ": expected OK, got \"" + line + "\"");
    }

    std::string read_line()
    {
        for (;;) {
            const auto nl = buffer_.find('\n');
            if (nl != std::string::npos) {
                std::string line = buffer_.substr(0, nl);
                buffer_.erase(0, nl + 1);
                if (!line.empty() && line.back() == '\r') line.pop_back();
                return line;
            }
            struct pollfd pfd = {read_fd_, POLLIN, 0};
            const int pr = poll(&pfd, 1, static_cast<int>(timeout_s_ * 1000.0));
            if (pr == 0) fail("timeout waiting for response");
            if (pr < 0) {
                if (errno == EINTR) continue;
                fail("poll failed");
            }
            char chunk[4096];
            const ssize_t n = ::read(read_fd_, chunk, sizeof chunk);
            if (n == 0) fail("process closed its output (exited?)");
            if (n < 0) {
                if (errno == EINTR) continue;
                fail("read failed (" + std::string(std::strerror(errno)) + ")");
            }
            buffer_.append(chunk, static_cast<size_t>(n));
        }
    }

    std::string command_;
    int fn_;
    double timeout_s_;
    pid_t pid_ = -1;
    int write_fd_ = -1;
    int read_fd_ = -1;
    std::string buffer_;
};

}  // namespace pins
