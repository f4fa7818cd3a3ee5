#include "finsent/common.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace finsent {

std::string Diagnostic::to_string() const {
    if (line == 0) return message;
    return "line " + std::to_string(line) + ": " + message;
}

std::string_view to_string(SentimentLabel l) noexcept {
    switch (l) {
        case SentimentLabel::positive: return "positive";
        case SentimentLabel::negative: return "negative";
        case SentimentLabel::neutral: return "neutral";
    }
    return "neutral";
}

std::optional<SentimentLabel> label_from_string(std::string_view s) {
    const std::string lowered = to_lower(trim(s));
    for (auto l : kAllLabels) {
        if (lowered == to_string(l)) return l;
    }
    return std::nullopt;
}

std::string_view trim(std::string_view s) noexcept {
    constexpr std::string_view ws = " \t\r\n\f\v";
    const auto first = s.find_first_not_of(ws);
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(ws);
    return s.substr(first, last - first + 1);
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string to_upper(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return out;
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.emplace_back(s.substr(start, pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::string format_double(double v) {
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc{}) return std::to_string(v);
    return std::string(buf.data(), ptr);
}

std::string format_fixed(double v, int decimals) {
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                                         std::chars_format::fixed, decimals);
    if (ec != std::errc{}) return std::to_string(v);
    std::string out(buf.data(), ptr);
    // "-0.00" reads badly in a report table.
    if (!out.empty() && out.front() == '-' &&
        out.find_first_not_of("-0.") == std::string::npos) {
        out.erase(0, 1);
    }
    return out;
}

std::string sha256_hex(std::string_view bytes) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
        throw Error("sha256 digest failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(kHex[md[i] >> 4]);
        out.push_back(kHex[md[i] & 0x0f]);
    }
    return out;
}

}  // namespace finsent
