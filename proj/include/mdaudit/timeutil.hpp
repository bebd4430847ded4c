#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "mdaudit/types.hpp"

namespace mdaudit {

enum class Granularity { day = 0, month = 1, year = 2 };

std::string to_string(Granularity g);
Granularity granularity_from_string(std::string_view s);

struct PartialDate {
    Day day;
    Granularity granularity = Granularity::day;
};

// Accepts YYYY, YYYY-MM, YYYY-MM-DD and date-times with a T or space
// separator. Missing parts become 01. Throws ParseError.
PartialDate parse_partial_date(std::string_view text);

std::string format_day(Day d);
Day parse_day(std::string_view text);

std::string format_timestamp(Timestamp t);
Timestamp parse_timestamp(std::string_view text);
Timestamp now_seconds();

}  // namespace mdaudit
