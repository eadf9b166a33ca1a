#pragma once

#include <stdexcept>
#include <string>

namespace alignrr {

// Precondition violations on operation inputs.
struct invalid_input : std::invalid_argument {
    explicit invalid_input(const std::string& what) : std::invalid_argument(what) {}
};

// No positive root exists for the scoring-normalization equation.
struct no_root_error : std::runtime_error {
    explicit no_root_error(const std::string& what) : std::runtime_error(what) {}
};

// A model or profile column carries no usable probability mass.
struct degenerate_error : std::runtime_error {
    explicit degenerate_error(const std::string& what) : std::runtime_error(what) {}
};

// Demonstration sampling exhausted its budget with too few successes.
struct generation_failure : std::runtime_error {
    explicit generation_failure(const std::string& what) : std::runtime_error(what) {}
};

struct io_error : std::runtime_error {
    explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace alignrr
