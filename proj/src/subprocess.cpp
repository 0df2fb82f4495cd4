#include "rustmap/subprocess.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <stdexcept>

namespace rustmap {

namespace {

void set_cloexec(int fd) { fcntl(fd, F_SETFD, FD_CLOEXEC); }

[[noreturn]] void child_exec(const std::vector<std::string> &argv, const RunOptions &opts,
                             int in_fd, int out_fd, int err_fd) {
    if (opts.cwd && chdir(opts.cwd->c_str()) != 0) _exit(127);
    dup2(in_fd, 0);
    dup2(out_fd, 1);
    dup2(err_fd, 2);
    std::vector<char *> cargv;
    cargv.reserve(argv.size() + 1);
    for (const auto &a : argv) cargv.push_back(const_cast<char *>(a.c_str()));
    cargv.push_back(nullptr);
    execvp(cargv[0], cargv.data());
    _exit(127);
}

} // namespace

RunResult run_command(const std::vector<std::string> &argv, const RunOptions &opts) {
    if (argv.empty()) throw std::runtime_error("run_command: empty argv");

    int in_pipe[2], out_pipe[2], err_pipe[2];
    if (pipe(in_pipe) || pipe(out_pipe) || pipe(err_pipe))
        throw std::runtime_error("run_command: pipe() failed");

    pid_t pid = fork();
    if (pid < 0) throw std::runtime_error("run_command: fork() failed");
    if (pid == 0) {
        close(in_pipe[1]);
        close(out_pipe[0]);
        close(err_pipe[0]);
        child_exec(argv, opts, in_pipe[0], out_pipe[1], err_pipe[1]);
    }

    close(in_pipe[0]);
    close(out_pipe[1]);
    close(err_pipe[1]);
    set_cloexec(in_pipe[1]);
    set_cloexec(out_pipe[0]);
    set_cloexec(err_pipe[0]);

    std::string stdin_data = opts.stdin_data.value_or("");
    size_t stdin_off = 0;
    if (stdin_data.empty()) {
        close(in_pipe[1]);
        in_pipe[1] = -1;
    }

    RunResult res;
    auto deadline = std::chrono::steady_clock::now() +
                    std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                        std::chrono::duration<double>(opts.timeout_secs));
    bool limited = opts.timeout_secs > 0;

    int open_reads = 2;
    while (open_reads > 0 || in_pipe[1] >= 0) {
        struct pollfd fds[3];
        int nfds = 0;
        int out_idx = -1, err_idx = -1, in_idx = -1;
        if (out_pipe[0] >= 0) {
            out_idx = nfds;
            fds[nfds++] = {out_pipe[0], POLLIN, 0};
        }
        if (err_pipe[0] >= 0) {
            err_idx = nfds;
            fds[nfds++] = {err_pipe[0], POLLIN, 0};
        }
        if (in_pipe[1] >= 0) {
            in_idx = nfds;
            fds[nfds++] = {in_pipe[1], POLLOUT, 0};
        }

        int wait_ms = 200;
        if (limited) {
            auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
                            deadline - std::chrono::steady_clock::now())
                            .count();
            if (left <= 0) {
                res.timed_out = true;
                kill(pid, SIGKILL);
                break;
            }
            wait_ms = static_cast<int>(std::min<long long>(left, 200));
        }

        int rc = poll(fds, static_cast<nfds_t>(nfds), wait_ms);
        if (rc < 0) {
            if (errno == EINTR) continue;
            break;
        }

        char buf[8192];
        auto drain = [&](int idx, int &fd, std::string &sink) {
            if (idx < 0 || !(fds[idx].revents & (POLLIN | POLLHUP))) return;
            ssize_t n = read(fd, buf, sizeof buf);
            if (n > 0) {
                sink.append(buf, static_cast<size_t>(n));
            } else if (n == 0 || (n < 0 && errno != EAGAIN && errno != EINTR)) {
                close(fd);
                fd = -1;
                --open_reads;
            }
        };
        drain(out_idx, out_pipe[0], res.out);
        drain(err_idx, err_pipe[0], res.err);

        if (in_idx >= 0 && (fds[in_idx].revents & (POLLOUT | POLLERR | POLLHUP))) {
            if (fds[in_idx].revents & (POLLERR | POLLHUP)) {
                close(in_pipe[1]);
                in_pipe[1] = -1;
            } else {
                ssize_t n = write(in_pipe[1], stdin_data.data() + stdin_off,
                                  stdin_data.size() - stdin_off);
                if (n > 0) stdin_off += static_cast<size_t>(n);
                if (n < 0 && errno != EAGAIN && errno != EINTR) stdin_off = stdin_data.size();
                if (stdin_off >= stdin_data.size()) {
                    close(in_pipe[1]);
                    in_pipe[1] = -1;
                }
            }
        }
    }

    if (out_pipe[0] >= 0) close(out_pipe[0]);
    if (err_pipe[0] >= 0) close(err_pipe[0]);
    if (in_pipe[1] >= 0) close(in_pipe[1]);

    int status = 0;
    waitpid(pid, &status, 0);
    if (WIFEXITED(status))
        res.exit_code = WEXITSTATUS(status);
    else if (WIFSIGNALED(status))
        res.exit_code = -WTERMSIG(status);
    return res;
}

std::vector<std::string> split_command(const std::string &cmd) {
    std::vector<std::string> out;
    std::string cur;
    bool in_quote = false;
    for (char c : cmd) {
        if (c == '"') {
            in_quote = !in_quote;
            continue;
        }
        if (!in_quote && (c == ' ' || c == '\t')) {
            if (!cur.empty()) {
                out.push_back(cur);
                cur.clear();
            }
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

} // namespace rustmap
