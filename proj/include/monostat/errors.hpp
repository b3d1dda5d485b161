#pragma once

#include <stdexcept>
#include <string>

namespace monostat {

// Invalid or inconsistent input (bad JSON, malformed graph, infeasible
// parameters).  The CLI maps this to exit code 2.
struct input_error : std::runtime_error {
    explicit input_error(const std::string& what) : std::runtime_error(what) {}
};

// A request exceeds a documented size budget (exhaustive enumeration too
// large, eigensolve too big, ...).  The CLI maps this to exit code 3.
struct budget_error : std::runtime_error {
    explicit budget_error(const std::string& what) : std::runtime_error(what) {}
};

inline void require_input(bool ok, const std::string& what) {
    if (!ok) throw input_error(what);
}

inline void require_budget(bool ok, const std::string& what) {
    if (!ok) throw budget_error(what);
}

}  // namespace monostat
