#pragma once

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>

namespace irnn {

enum class ErrorCode {
    invalid_argument,
    dimension_mismatch,
    singular_system,
    not_converged,
    diverged,
    io,
    parse,
    unsupported_version,
};

/// Library-wide exception. `index` carries the offending pivot, iteration,
/// sample or line number when the failure has one.
class Error : public std::runtime_error {
public:
    static constexpr std::size_t no_index = std::numeric_limits<std::size_t>::max();

    Error(ErrorCode code, const std::string& message, std::size_t index = no_index)
        : std::runtime_error(message), code_(code), index_(index) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }
    [[nodiscard]] std::size_t index() const noexcept { return index_; }
    [[nodiscard]] bool has_index() const noexcept { return index_ != no_index; }

private:
    ErrorCode code_;
    std::size_t index_;
};

}  // namespace irnn
