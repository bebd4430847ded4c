#include "mdaudit/timeutil.hpp"

#include <cctype>
#include <cstdio>
#include <regex>

#include "mdaudit/error.hpp"

namespace mdaudit {

using namespace std::chrono;

std::string to_string(Granularity g) {
    switch (g) {
        case Granularity::day: return "day";
        case Granularity::month: return "month";
        case Granularity::year: return "year";
    }
    return "day";
}

Granularity granularity_from_string(std::string_view s) {
    if (s == "day") return Granularity::day;
    if (s == "month") return Granularity::month;
    if (s == "year") return Granularity::year;
    throw ConfigError("unknown granularity '" + std::string(s) + "'");
}

static std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

PartialDate parse_partial_date(std::string_view text) {
    static const std::regex re(R"(^(\d{4})(?:-(\d{2})(?:-(\d{2})(?:[T ].*)?)?)?$)");
    std::string s(trim(text));
    std::smatch m;
    if (!std::regex_match(s, m, re)) throw ParseError("unparseable date '" + s + "'");
    int y = std::stoi(m[1]);
    unsigned mo = m[2].matched ? static_cast<unsigned>(std::stoi(m[2])) : 1;
    unsigned d = m[3].matched ? static_cast<unsigned>(std::stoi(m[3])) : 1;
    year_month_day ymd{year{y}, month{mo}, day{d}};
    if (!ymd.ok()) throw ParseError("invalid calendar date '" + s + "'");
    PartialDate out;
    out.day = sys_days{ymd};
    out.granularity = m[3].matched ? Granularity::day
                      : m[2].matched ? Granularity::month
                                     : Granularity::year;
    return out;
}

std::string format_day(Day d) {
    year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

Day parse_day(std::string_view text) {
    auto p = parse_partial_date(text);
    if (p.granularity != Granularity::day) throw ParseError("expected YYYY-MM-DD, got '" + std::string(text) + "'");
    return p.day;
}

std::string format_timestamp(Timestamp t) {
    auto d = floor<days>(t);
    hh_mm_ss hms{t - d};
    char buf[32];
    year_month_day ymd{d};
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                  static_cast<int>(hms.seconds().count()));
    return buf;
}

Timestamp parse_timestamp(std::string_view text) {
    static const std::regex re(
        R"(^(\d{4})-(\d{2})-(\d{2})(?:[T ](\d{2}):(\d{2})(?::(\d{2})(?:\.\d+)?)?(Z|[+-]\d{2}:?\d{2})?)?$)");
    std::string s(trim(text));
    std::smatch m;
    if (!std::regex_match(s, m, re)) throw ParseError("unparseable timestamp '" + s + "'");
    year_month_day ymd{year{std::stoi(m[1])}, month{static_cast<unsigned>(std::stoi(m[2]))},
                       day{static_cast<unsigned>(std::stoi(m[3]))}};
    if (!ymd.ok()) throw ParseError("invalid calendar date '" + s + "'");
    Timestamp t = sys_days{ymd};
    if (m[4].matched) t += hours{std::stoi(m[4])} + minutes{std::stoi(m[5])};
    if (m[6].matched) t += seconds{std::stoi(m[6])};
    if (m[7].matched && m[7].str() != "Z") {
        std::string z = m[7].str();
        int sign = z[0] == '-' ? -1 : 1;
        std::string digits;
        for (char c : z)
            if (std::isdigit(static_cast<unsigned char>(c))) digits += c;
        int off = std::stoi(digits.substr(0, 2)) * 60 + std::stoi(digits.substr(2, 2));
        t -= minutes{sign * off};
    }
    return t;
}

Timestamp now_seconds() { return floor<seconds>(system_clock::now()); }

}  // namespace mdaudit
