#ifndef TORFP_ERRORS_HPP
#define TORFP_ERRORS_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace torfp {

// Error taxonomy. Every error carries a stable machine-readable code of the
// form "module/kind" next to the human-readable message; the CLI maps codes
// to structured JSON on stderr and a nonzero exit.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

// Invalid argument or precondition violation at an API boundary.
class InvalidArgument : public Error {
public:
    InvalidArgument(const std::string& code, const std::string& message)
        : Error(code, message) {}
};

// Numerical breakdown: a pivot that must stay positive collapsed to zero or
// below, or a reciprocal/rsqrt left the representable range. Signals loss of
// positive definiteness or an exhausted fraction budget, never a wrong digit.
class BreakdownError : public Error {
public:
    BreakdownError(const std::string& code, const std::string& message,
                   std::size_t pivot_row = SIZE_MAX, std::uint64_t subset_mask = 0)
        : Error(code, message), pivot_row_(pivot_row), subset_mask_(subset_mask) {}

    // Row index of the offending pivot, SIZE_MAX when not applicable.
    std::size_t pivot_row() const noexcept { return pivot_row_; }
    // Subset mask being evaluated when the breakdown happened, 0 when unknown.
    std::uint64_t subset_mask() const noexcept { return subset_mask_; }

    void set_subset_mask(std::uint64_t m) noexcept { subset_mask_ = m; }

private:
    std::size_t pivot_row_;
    std::uint64_t subset_mask_;
};

// Structured parse failure for file formats; position is a byte offset for
// binary inputs and a 1-based line number for text inputs.
class ParseError : public Error {
public:
    ParseError(const std::string& code, const std::string& message, std::uint64_t position)
        : Error(code, message), position_(position) {}

    std::uint64_t position() const noexcept { return position_; }

private:
    std::uint64_t position_;
};

// Requested precision cannot be provided (bit budget exceeds 256, or a forced
// width leaves no fraction bits).
class PrecisionError : public Error {
public:
    PrecisionError(const std::string& code, const std::string& message)
        : Error(code, message) {}
};

// Search exceeded its state or memory budget.
class ResourceError : public Error {
public:
    ResourceError(const std::string& code, const std::string& message)
        : Error(code, message) {}
};

} // namespace torfp

#endif
