#pragma once

#include <stdexcept>
#include <string>

namespace labelaudit {

// Exit codes used by the CLI: 2 bad arguments, 3 format/validation,
// 4 numeric failure, 5 undefined metric.
struct ArgumentError : std::invalid_argument {
    explicit ArgumentError(const std::string& msg) : std::invalid_argument(msg) {}
    static constexpr int exit_code = 2;
};

struct FormatError : std::runtime_error {
    explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
    static constexpr int exit_code = 3;
};

struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
    static constexpr int exit_code = 4;
};

struct MetricError : std::runtime_error {
    explicit MetricError(const std::string& msg) : std::runtime_error(msg) {}
    static constexpr int exit_code = 5;
};

} // namespace labelaudit
