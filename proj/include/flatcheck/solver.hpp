#pragma once

#include "flatcheck/qpa.hpp"
#include "flatcheck/smtlib.hpp"

#include <atomic>
#include <cerrno>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

namespace flatcheck {

enum class Status { Sat, Unsat, Unknown };

inline const char* status_name(Status s) {
    switch (s) {
        case Status::Sat: return "sat";
        case Status::Unsat: return "unsat";
        case Status::Unknown: return "unknown";
    }
    return "?";
}

struct SolverVerdict {
    Status status = Status::Unknown;
    Model model;                 // Sat only
    std::string reason;          // Unknown: timeout | solver-reported | crash | cancelled | spawn | invalid-model
    std::string diagnostics;
    std::vector<std::string> warnings;
    double seconds = 0;
};

// Solver command; the script file path is appended as last argument.
struct SolverConfig {
    std::vector<std::string> command;
    double timeout_seconds = 60;
    const std::atomic<bool>* cancel = nullptr;
};

inline std::vector<std::string> split_command(const std::string& cmd) {
    std::vector<std::string> out;
    std::istringstream is(cmd);
    std::string w;
    while (is >> w) out.push_back(w);
    return out;
}

// FLATCHECK_SOLVER overrides the default `z3`.
inline std::vector<std::string> default_solver_command() {
    if (const char* env = std::getenv("FLATCHECK_SOLVER"); env && *env) return split_command(env);
    return {"z3"};
}

namespace detail {

struct ProcessResult {
    bool spawned = false;
    bool timed_out = false;
    bool cancelled = false;
    int exit_status = -1;
    std::string out, err;
};

inline ProcessResult run_process(const std::vector<std::string>& argv, double timeout, const std::atomic<bool>* cancel) {
    ProcessResult r;
    int out_pipe[2], err_pipe[2], exec_pipe[2];
    if (pipe(out_pipe) != 0) return r;
    if (pipe(err_pipe) != 0) {
        close(out_pipe[0]);
        close(out_pipe[1]);
        return r;
    }
    if (pipe(exec_pipe) != 0) {
        for (int fd : {out_pipe[0], out_pipe[1], err_pipe[0], err_pipe[1]}) close(fd);
        return r;
    }
    fcntl(exec_pipe[1], F_SETFD, FD_CLOEXEC);
    pid_t pid = fork();
    if (pid < 0) {
        for (int fd : {out_pipe[0], out_pipe[1], err_pipe[0], err_pipe[1], exec_pipe[0], exec_pipe[1]}) close(fd);
        return r;
    }
    if (pid == 0) {
        setpgid(0, 0);
        int devnull = open("/dev/null", O_RDONLY);
        if (devnull >= 0) dup2(devnull, 0);
        dup2(out_pipe[1], 1);
        dup2(err_pipe[1], 2);
        close(out_pipe[0]);
        close(err_pipe[0]);
        close(exec_pipe[0]);
        std::vector<char*> args;
        for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
        args.push_back(nullptr);
        execvp(args[0], args.data());
        int e = errno;
        ssize_t ignored = write(exec_pipe[1], &e, sizeof e);
        (void)ignored;
        _exit(127);
    }
    close(out_pipe[1]);
    close(err_pipe[1]);
    close(exec_pipe[1]);
    int exec_errno = 0;
    ssize_t got = read(exec_pipe[0], &exec_errno, sizeof exec_errno);
    close(exec_pipe[0]);
    if (got == static_cast<ssize_t>(sizeof exec_errno)) {
        close(out_pipe[0]);
        close(err_pipe[0]);
        waitpid(pid, nullptr, 0);
        r.err = std::string("cannot start '") + argv[0] + "': " + std::strerror(exec_errno);
        return r;
    }
    r.spawned = true;
    auto start = std::chrono::steady_clock::now();
    pollfd fds[2] = {{out_pipe[0], POLLIN, 0}, {err_pipe[0], POLLIN, 0}};
    bool open_fd[2] = {true, true};
    char buf[65536];
    auto kill_child = [&] {
        kill(-pid, SIGKILL);
        kill(pid, SIGKILL);
    };
    while (open_fd[0] || open_fd[1]) {
        double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (elapsed >= timeout) {
            r.timed_out = true;
            kill_child();
            break;
        }
        if (cancel && cancel->load()) {
            r.cancelled = true;
            kill_child();
            break;
        }
        int wait_ms = static_cast<int>(std::min(100.0, (timeout - elapsed) * 1000.0)) + 1;
        int k = poll(fds, 2, wait_ms);
        if (k < 0 && errno != EINTR) break;
        for (int f = 0; f < 2; ++f) {
            if (!open_fd[f] || !(fds[f].revents & (POLLIN | POLLHUP | POLLERR))) continue;
            ssize_t m = read(fds[f].fd, buf, sizeof buf);
            if (m <= 0) {
                open_fd[f] = false;
                fds[f].fd = -1;
            } else {
                (f == 0 ? r.out : r.err).append(buf, static_cast<std::size_t>(m));
            }
        }
    }
    close(out_pipe[0]);
    close(err_pipe[0]);
    int status = 0;
    waitpid(pid, &status, 0);
    if (WIFEXITED(status)) r.exit_status = WEXITSTATUS(status);
    return r;
}

inline std::filesystem::path temp_script_path() {
    static std::atomic<unsigned long> counter{0};
    std::random_device rd;
    auto name = "flatcheck-" + std::to_string(getpid()) + "-" + std::to_string(counter++) + "-" + std::to_string(rd()) + ".smt2";
    return std::filesystem::temp_directory_path() / name;
}

}  // namespace detail

// Runs the solver on the script; a Sat model is re-checked against every
// assertion with the built-in evaluator before it is returned.
inline SolverVerdict check(const QpaScript& script, const SolverConfig& cfg) {
    SolverVerdict v;
    auto start = std::chrono::steady_clock::now();
    auto finish = [&] {
        v.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return v;
    };
    if (cfg.timeout_seconds <= 0) {
        v.reason = "timeout";
        return finish();
    }
    std::vector<std::string> argv = cfg.command.empty() ? default_solver_command() : cfg.command;
    auto path = detail::temp_script_path();
    {
        std::ofstream f(path);
        if (!f) {
            v.reason = "spawn";
            v.diagnostics = "cannot write " + path.string();
            return finish();
        }
        emit_smtlib(f, script);
    }
    argv.push_back(path.string());
    auto r = detail::run_process(argv, cfg.timeout_seconds, cfg.cancel);
    std::error_code ec;
    std::filesystem::remove(path, ec);
    if (!r.spawned) {
        v.reason = "spawn";
        v.diagnostics = r.err;
        return finish();
    }
    if (r.cancelled) {
        v.reason = "cancelled";
        return finish();
    }
    if (r.timed_out) {
        v.reason = "timeout";
        return finish();
    }
    std::istringstream is(r.out);
    std::string first;
    while (std::getline(is, first)) {
        auto b = first.find_first_not_of(" \t\r");
        if (b != std::string::npos) {
            first = first.substr(b);
            while (!first.empty() && std::isspace(static_cast<unsigned char>(first.back()))) first.pop_back();
            break;
        }
    }
    if (first == "unsat") {
        v.status = Status::Unsat;
        return finish();
    }
    if (first == "sat") {
        std::string rest((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
        try {
            auto pm = parse_model(rest, script);
            v.warnings = std::move(pm.warnings);
            auto bad = violated(script, pm.model);
            if (!bad.empty()) {
                v.reason = "invalid-model";
                v.diagnostics = "model violates " + bad.front();
                return finish();
            }
            v.status = Status::Sat;
            v.model = std::move(pm.model);
        } catch (const Error& e) {
            v.reason = "crash";
            v.diagnostics = std::string("malformed solver output: ") + e.what();
        }
        return finish();
    }
    v.reason = first == "unknown" ? "solver-reported" : "crash";
    v.diagnostics = r.out.substr(0, 2000) + r.err.substr(0, 2000);
    return finish();
}

}  // namespace flatcheck
