#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace finsent {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input (file formats, configuration, CLI values).
class ParseError : public Error {
public:
    using Error::Error;
};

/// A caller or a plug-in broke an interface contract.
class ContractError : public Error {
public:
    using Error::Error;
};

/// Numerical failure that the caller can fix by changing parameters.
class NumericError : public Error {
public:
    using Error::Error;
};

/// A per-record problem that does not abort the enclosing operation.
struct Diagnostic {
    std::size_t line = 0;  // 1-based; 0 when not tied to a line
    std::string message;

    [[nodiscard]] std::string to_string() const;
};

enum class SentimentLabel { positive = 0, negative = 1, neutral = 2 };

inline constexpr std::array<SentimentLabel, 3> kAllLabels{
    SentimentLabel::positive, SentimentLabel::negative, SentimentLabel::neutral};

[[nodiscard]] constexpr std::size_t index_of(SentimentLabel l) noexcept {
    return static_cast<std::size_t>(l);
}

[[nodiscard]] std::string_view to_string(SentimentLabel l) noexcept;

/// Exact (case-insensitive, whitespace-trimmed) label name lookup.
[[nodiscard]] std::optional<SentimentLabel> label_from_string(std::string_view s);

// Small string helpers shared across modules.
[[nodiscard]] std::string_view trim(std::string_view s) noexcept;
[[nodiscard]] std::string to_lower(std::string_view s);
[[nodiscard]] std::string to_upper(std::string_view s);
[[nodiscard]] std::vector<std::string> split(std::string_view s, char sep);

/// Shortest round-trip decimal representation of a double.
[[nodiscard]] std::string format_double(double v);

/// Fixed-point formatting, e.g. format_fixed(7.634, 2) == "7.63".
[[nodiscard]] std::string format_fixed(double v, int decimals);

/// Lowercase hex SHA-256 digest of the given bytes.
[[nodiscard]] std::string sha256_hex(std::string_view bytes);

}  // namespace finsent
