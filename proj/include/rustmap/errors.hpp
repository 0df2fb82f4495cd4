#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rustmap {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Environment problems (missing toolchain, unreadable config) — CLI exit 2.
struct EnvError : Error {
    using Error::Error;
};

// A prompt would exceed the oracle's input budget; callers split the unit.
struct OverBudgetError : Error {
    size_t estimated;
    size_t budget;
    OverBudgetError(size_t est, size_t bud)
        : Error("prompt of ~" + std::to_string(est) + " tokens exceeds oracle budget of " +
                std::to_string(bud)),
          estimated(est), budget(bud) {}
};

// The oracle could not serve the request (replay miss, transport failure).
struct OracleUnavailable : Error {
    using Error::Error;
};

} // namespace rustmap
