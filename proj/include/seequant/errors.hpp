#pragma once

#include <stdexcept>
#include <string>

namespace seequant {

/// Inconsistent or out-of-contract inputs (dimension mismatches, bad ranges).
class InvalidInput : public std::invalid_argument {
public:
    explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

/// Malformed external data (PGM headers, containers, CSV/JSON inputs).
/// Carries the byte offset where parsing failed when one is known.
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& what, std::size_t byte_offset = npos)
        : std::runtime_error(byte_offset == npos
                                 ? what
                                 : what + " (byte offset " + std::to_string(byte_offset) + ")"),
          offset_(byte_offset) {}

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    std::size_t byte_offset() const noexcept { return offset_; }

private:
    std::size_t offset_ = npos;
};

/// The request is well-formed but exceeds a hard cap (exhaustive search
/// sizes, permutation counts, recursion depth). Distinct from InvalidInput
/// so callers can map it to a dedicated exit code.
class Refusal : public std::runtime_error {
public:
    explicit Refusal(const std::string& what) : std::runtime_error(what) {}
};

} // namespace seequant
