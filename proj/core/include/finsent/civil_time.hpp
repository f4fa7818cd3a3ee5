#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace finsent {

using Instant = std::chrono::sys_seconds;
using Date = std::chrono::sys_days;

/// Parses "YYYY-MM-DD". Throws ParseError on malformed or impossible dates.
[[nodiscard]] Date parse_date(std::string_view s);
[[nodiscard]] std::string format_date(Date d);

/// Parses an RFC 3339 timestamp ("2021-01-28T14:03:00Z", "...+01:00",
/// optional fractional seconds, which are truncated). Result is UTC.
[[nodiscard]] Instant parse_rfc3339(std::string_view s);
/// Formats as "YYYY-MM-DDTHH:MM:SSZ".
[[nodiscard]] std::string format_rfc3339(Instant t);

/// A POSIX-TZ style zone: standard offset plus an optional DST rule of the
/// "Mm.w.d[/time]" form. Enough to bucket instants into exchange-local dates.
///
/// Construct with from_name(), which accepts "UTC", an IANA zone name
/// resolved through the system zoneinfo directory (the rule footer of the
/// TZif file), or a raw POSIX TZ string such as "EST5EDT,M3.2.0,M11.1.0".
class TimeZone {
public:
    TimeZone() = default;  // UTC

    [[nodiscard]] static TimeZone utc() { return {}; }
    [[nodiscard]] static TimeZone from_name(std::string_view name);
    [[nodiscard]] static TimeZone from_posix(std::string_view rule);

    /// Offset east of UTC in effect at instant t.
    [[nodiscard]] std::chrono::seconds utc_offset(Instant t) const;
    [[nodiscard]] Date local_date(Instant t) const;
    [[nodiscard]] const std::string& name() const noexcept { return name_; }

private:
    struct Transition {
        unsigned month = 0;    // 1..12
        unsigned week = 0;     // 1..5, 5 = last
        unsigned weekday = 0;  // 0 = Sunday
        std::chrono::seconds time{7200};
    };

    [[nodiscard]] static Instant transition_utc(int year, const Transition& tr,
                                                std::chrono::seconds offset_before);

    std::string name_ = "UTC";
    std::chrono::seconds std_offset_{0};
    std::chrono::seconds dst_offset_{0};
    bool has_dst_ = false;
    Transition dst_start_{};
    Transition dst_end_{};
};

}  // namespace finsent
