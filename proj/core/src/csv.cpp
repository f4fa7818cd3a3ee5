#include "finsent/csv.hpp"

#include "finsent/common.hpp"

namespace finsent::csv {

bool Reader::next(Row& row) {
    row.clear();
    if (in_.peek() == std::char_traits<char>::eof()) return false;

    record_line_ = line_;
    std::string field;
    bool quoted = false;
    bool field_was_quoted = false;

    while (true) {
        const int ic = in_.get();
        if (ic == std::char_traits<char>::eof()) {
            if (quoted) throw ParseError("line " + std::to_string(record_line_) + ": unterminated quoted field");
            row.push_back(std::move(field));
            return true;
        }
        const char c = static_cast<char>(ic);
        if (quoted) {
            if (c == '"') {
                if (in_.peek() == '"') {
                    in_.get();
                    field.push_back('"');
                } else {
                    quoted = false;
                }
            } else {
                if (c == '\n') ++line_;
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
            case '"':
                if (field.empty() && !field_was_quoted) {
                    quoted = true;
                    field_was_quoted = true;
                } else {
                    field.push_back(c);
                }
                break;
            case ',':
                row.push_back(std::move(field));
                field.clear();
                field_was_quoted = false;
                break;
            case '\r':
                if (in_.peek() == '\n') in_.get();
                [[fallthrough]];
            case '\n':
                ++line_;
                row.push_back(std::move(field));
                return true;
            default:
                field.push_back(c);
        }
    }
}

Header::Header(Row names) : names_(std::move(names)) {
    for (auto& n : names_) n = to_lower(trim(n));
    // Tolerate a UTF-8 byte-order mark on the first column.
    if (!names_.empty() && names_.front().rfind("\xef\xbb\xbf", 0) == 0) names_.front().erase(0, 3);
}

std::optional<std::size_t> Header::find(std::string_view name) const {
    const std::string key = to_lower(name);
    for (std::size_t i = 0; i < names_.size(); ++i) {
        if (names_[i] == key) return i;
    }
    return std::nullopt;
}

std::size_t Header::require(std::string_view name) const {
    if (auto idx = find(name)) return *idx;
    throw ParseError("missing required CSV column '" + std::string(name) + "'");
}

std::string escape(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

void write_row(std::ostream& out, const Row& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i != 0) out << ',';
        out << escape(row[i]);
    }
    out << '\n';
}

}  // namespace finsent::csv
