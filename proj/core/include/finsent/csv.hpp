#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace finsent::csv {

using Row = std::vector<std::string>;

/// RFC 4180 reader: quoted fields may contain separators, doubled quotes
/// and line breaks. CRLF and LF are both accepted as record terminators.
class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    /// Reads the next record; returns false at end of input.
    bool next(Row& row);

    /// 1-based physical line on which the last returned record started.
    [[nodiscard]] std::size_t record_line() const noexcept { return record_line_; }

private:
    std::istream& in_;
    std::size_t line_ = 1;
    std::size_t record_line_ = 0;
};

/// Header lookup helper: column index by case-insensitive name.
class Header {
public:
    Header() = default;
    explicit Header(Row names);

    [[nodiscard]] std::optional<std::size_t> find(std::string_view name) const;
    [[nodiscard]] std::size_t require(std::string_view name) const;  // throws ParseError
    [[nodiscard]] const Row& names() const noexcept { return names_; }

private:
    Row names_;
};

[[nodiscard]] std::string escape(std::string_view field);
void write_row(std::ostream& out, const Row& row);

}  // namespace finsent::csv
