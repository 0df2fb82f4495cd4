#pragma once

#include <optional>
#include <string>
#include <vector>

namespace rustmap {

struct RunResult {
    int exit_code = -1;     // -signal when killed by a signal
    bool timed_out = false;
    std::string out;
    std::string err;

    bool ok() const { return !timed_out && exit_code == 0; }
};

struct RunOptions {
    std::optional<std::string> stdin_data;
    std::optional<std::string> cwd;
    // 0 means no limit.
    double timeout_secs = 0;
};

// Runs argv[0] with the given arguments and captures stdout/stderr.
// Throws std::runtime_error if the process cannot be spawned at all.
RunResult run_command(const std::vector<std::string> &argv, const RunOptions &opts = {});

// Splits a command string on whitespace (no shell quoting rules beyond
// double quotes). Used for configurable commands like `cc -E`.
std::vector<std::string> split_command(const std::string &cmd);

} // namespace rustmap
