#include "finsent/civil_time.hpp"

#include "finsent/common.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>

namespace finsent {

namespace chr = std::chrono;

namespace {

class Cursor {
public:
    explicit Cursor(std::string_view s) : s_(s) {}

    [[nodiscard]] bool done() const { return pos_ >= s_.size(); }
    [[nodiscard]] char peek() const { return done() ? '\0' : s_[pos_]; }
    char take() { return done() ? '\0' : s_[pos_++]; }
    bool accept(char c) {
        if (peek() != c) return false;
        ++pos_;
        return true;
    }

    // Reads exactly n decimal digits.
    int digits(std::size_t n, std::string_view what) {
        int value = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const char c = take();
            if (!std::isdigit(static_cast<unsigned char>(c))) {
                throw ParseError("expected " + std::string(what) + " in '" + std::string(s_) + "'");
            }
            value = value * 10 + (c - '0');
        }
        return value;
    }

    // Reads 1..max_len decimal digits.
    int number(std::size_t max_len, std::string_view what) {
        int value = 0;
        std::size_t n = 0;
        while (n < max_len && std::isdigit(static_cast<unsigned char>(peek()))) {
            value = value * 10 + (take() - '0');
            ++n;
        }
        if (n == 0) throw ParseError("expected " + std::string(what) + " in '" + std::string(s_) + "'");
        return value;
    }

    [[nodiscard]] std::string_view source() const { return s_; }

private:
    std::string_view s_;
    std::size_t pos_ = 0;
};

Date make_date(int y, int m, int d, std::string_view src) {
    const chr::year_month_day ymd{chr::year{y}, chr::month{static_cast<unsigned>(m)},
                                  chr::day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) throw ParseError("invalid calendar date '" + std::string(src) + "'");
    return Date{ymd};
}

// [+|-]hh[:mm[:ss]]
chr::seconds parse_hms(Cursor& c) {
    int sign = 1;
    if (c.accept('-')) {
        sign = -1;
    } else {
        c.accept('+');
    }
    const int h = c.number(3, "hours");
    int m = 0;
    int s = 0;
    if (c.accept(':')) {
        m = c.number(2, "minutes");
        if (c.accept(':')) s = c.number(2, "seconds");
    }
    return chr::seconds{sign * (h * 3600 + m * 60 + s)};
}

std::string parse_zone_abbrev(Cursor& c) {
    std::string out;
    if (c.accept('<')) {
        while (!c.done() && c.peek() != '>') out.push_back(c.take());
        if (!c.accept('>')) throw ParseError("unterminated <...> in TZ rule '" + std::string(c.source()) + "'");
    } else {
        while (std::isalpha(static_cast<unsigned char>(c.peek()))) out.push_back(c.take());
    }
    if (out.size() < 3) throw ParseError("bad zone abbreviation in TZ rule '" + std::string(c.source()) + "'");
    return out;
}

std::string read_tzif_footer(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return {};
    const std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    if (bytes.size() < 6 || bytes.compare(0, 4, "TZif") != 0 || bytes.back() != '\n') return {};
    const auto start = bytes.rfind('\n', bytes.size() - 2);
    if (start == std::string::npos) return {};
    return bytes.substr(start + 1, bytes.size() - start - 2);
}

}  // namespace

Date parse_date(std::string_view s) {
    const auto t = trim(s);
    Cursor c(t);
    const int y = c.digits(4, "year");
    if (!c.accept('-')) throw ParseError("expected YYYY-MM-DD, got '" + std::string(s) + "'");
    const int m = c.digits(2, "month");
    if (!c.accept('-')) throw ParseError("expected YYYY-MM-DD, got '" + std::string(s) + "'");
    const int d = c.digits(2, "day");
    if (!c.done()) throw ParseError("trailing characters in date '" + std::string(s) + "'");
    return make_date(y, m, d, s);
}

std::string format_date(Date d) {
    const chr::year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

Instant parse_rfc3339(std::string_view s) {
    const auto t = trim(s);
    Cursor c(t);
    const int y = c.digits(4, "year");
    if (!c.accept('-')) throw ParseError("bad RFC 3339 timestamp '" + std::string(s) + "'");
    const int mo = c.digits(2, "month");
    if (!c.accept('-')) throw ParseError("bad RFC 3339 timestamp '" + std::string(s) + "'");
    const int d = c.digits(2, "day");
    if (!(c.accept('T') || c.accept('t') || c.accept(' '))) {
        throw ParseError("bad RFC 3339 timestamp '" + std::string(s) + "'");
    }
    const int hh = c.digits(2, "hour");
    if (!c.accept(':')) throw ParseError("bad RFC 3339 timestamp '" + std::string(s) + "'");
    const int mm = c.digits(2, "minute");
    if (!c.accept(':')) throw ParseError("bad RFC 3339 timestamp '" + std::string(s) + "'");
    const int ss = c.digits(2, "second");
    if (hh > 23 || mm > 59 || ss > 60) throw ParseError("time out of range in '" + std::string(s) + "'");
    if (c.accept('.')) {
        if (!std::isdigit(static_cast<unsigned char>(c.peek()))) {
            throw ParseError("bad fractional seconds in '" + std::string(s) + "'");
        }
        while (std::isdigit(static_cast<unsigned char>(c.peek()))) c.take();
    }
    chr::seconds offset{0};
    if (c.accept('Z') || c.accept('z')) {
    } else if (c.peek() == '+' || c.peek() == '-') {
        const int sign = c.take() == '-' ? -1 : 1;
        const int oh = c.digits(2, "offset hours");
        if (!c.accept(':')) throw ParseError("bad UTC offset in '" + std::string(s) + "'");
        const int om = c.digits(2, "offset minutes");
        offset = chr::seconds{sign * (oh * 3600 + om * 60)};
    } else {
        throw ParseError("missing UTC offset in '" + std::string(s) + "'");
    }
    if (!c.done()) throw ParseError("trailing characters in timestamp '" + std::string(s) + "'");
    const Date day = make_date(y, mo, d, s);
    return Instant{day} + chr::hours{hh} + chr::minutes{mm} + chr::seconds{ss} - offset;
}

std::string format_rfc3339(Instant t) {
    const Date day = chr::floor<chr::days>(t);
    const chr::hh_mm_ss hms{t - day};
    char buf[16];
    std::snprintf(buf, sizeof buf, "T%02d:%02d:%02dZ", static_cast<int>(hms.hours().count()),
                  static_cast<int>(hms.minutes().count()), static_cast<int>(hms.seconds().count()));
    return format_date(day) + buf;
}

TimeZone TimeZone::from_name(std::string_view name) {
    const auto n = trim(name);
    if (n.empty() || n == "UTC" || n == "Etc/UTC" || n == "Z") return utc();

    const bool looks_like_path = n.find("..") == std::string_view::npos &&
                                 n.find_first_of(",<") == std::string_view::npos;
    if (looks_like_path) {
        const char* env_dir = std::getenv("TZDIR");
        const std::filesystem::path dir = env_dir != nullptr ? env_dir : "/usr/share/zoneinfo";
        const std::string footer = read_tzif_footer(dir / std::string(n));
        if (!footer.empty()) {
            TimeZone tz = from_posix(footer);
            tz.name_ = std::string(n);
            return tz;
        }
    }
    // The default exchange zone keeps working on hosts without zoneinfo.
    if (n == "US/Eastern" || n == "America/New_York") {
        TimeZone tz = from_posix("EST5EDT,M3.2.0,M11.1.0");
        tz.name_ = std::string(n);
        return tz;
    }
    return from_posix(n);
}

TimeZone TimeZone::from_posix(std::string_view rule) {
    Cursor c(trim(rule));
    TimeZone tz;
    tz.name_ = std::string(trim(rule));
    parse_zone_abbrev(c);
    tz.std_offset_ = -parse_hms(c);  // POSIX offsets count hours west of UTC
    if (c.done()) return tz;

    parse_zone_abbrev(c);
    tz.has_dst_ = true;
    tz.dst_offset_ = tz.std_offset_ + chr::hours{1};
    if (!c.done() && c.peek() != ',') tz.dst_offset_ = -parse_hms(c);

    auto parse_transition = [&](Transition& tr) {
        if (!c.accept('M')) {
            throw ParseError("only Mm.w.d transition rules are supported: '" + std::string(rule) + "'");
        }
        tr.month = static_cast<unsigned>(c.number(2, "month"));
        if (!c.accept('.')) throw ParseError("bad transition rule in '" + std::string(rule) + "'");
        tr.week = static_cast<unsigned>(c.number(1, "week"));
        if (!c.accept('.')) throw ParseError("bad transition rule in '" + std::string(rule) + "'");
        tr.weekday = static_cast<unsigned>(c.number(1, "weekday"));
        if (tr.month < 1 || tr.month > 12 || tr.week < 1 || tr.week > 5 || tr.weekday > 6) {
            throw ParseError("transition rule out of range in '" + std::string(rule) + "'");
        }
        tr.time = chr::hours{2};
        if (c.accept('/')) tr.time = parse_hms(c);
    };

    if (c.done()) {
        // No explicit rule: the POSIX default is the US rule.
        tz.dst_start_ = {3, 2, 0, chr::hours{2}};
        tz.dst_end_ = {11, 1, 0, chr::hours{2}};
        return tz;
    }
    if (!c.accept(',')) throw ParseError("bad TZ rule '" + std::string(rule) + "'");
    parse_transition(tz.dst_start_);
    if (!c.accept(',')) throw ParseError("bad TZ rule '" + std::string(rule) + "'");
    parse_transition(tz.dst_end_);
    if (!c.done()) throw ParseError("trailing characters in TZ rule '" + std::string(rule) + "'");
    return tz;
}

Instant TimeZone::transition_utc(int year, const Transition& tr, chr::seconds offset_before) {
    const chr::weekday wd{tr.weekday};
    Date day;
    if (tr.week == 5) {
        day = Date{chr::year_month_weekday_last{chr::year{year}, chr::month{tr.month}, chr::weekday_last{wd}}};
    } else {
        day = Date{chr::year_month_weekday{chr::year{year}, chr::month{tr.month}, wd[tr.week]}};
    }
    return Instant{day} + tr.time - offset_before;
}

chr::seconds TimeZone::utc_offset(Instant t) const {
    if (!has_dst_) return std_offset_;
    const int year = static_cast<int>(chr::year_month_day{chr::floor<chr::days>(t + std_offset_)}.year());
    const Instant start = transition_utc(year, dst_start_, std_offset_);
    const Instant end = transition_utc(year, dst_end_, dst_offset_);
    const bool in_dst = start < end ? (t >= start && t < end) : (t >= start || t < end);
    return in_dst ? dst_offset_ : std_offset_;
}

Date TimeZone::local_date(Instant t) const {
    return chr::floor<chr::days>(t + utc_offset(t));
}

}  // namespace finsent
