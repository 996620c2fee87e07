#ifndef BEHAVIOR_EPI_CALENDAR_HPP
#define BEHAVIOR_EPI_CALENDAR_HPP

#include <chrono>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>

namespace behavior_epi {

/**
 * @brief Day-offset calendar anchored at the simulation epoch (2020-02-29 = day 0).
 */
namespace calendar {

using std::chrono::year_month_day;

inline constexpr year_month_day kEpoch{std::chrono::year{2020}, std::chrono::month{2}, std::chrono::day{29}};

inline int day_index(const year_month_day& date)
{
    if (!date.ok()) {
        throw std::invalid_argument("invalid calendar date");
    }
    return static_cast<int>((std::chrono::sys_days{date} - std::chrono::sys_days{kEpoch}).count());
}

inline year_month_day date_of(int day)
{
    return year_month_day{std::chrono::sys_days{kEpoch} + std::chrono::days{day}};
}

inline year_month_day make_date(int y, unsigned m, unsigned d)
{
    year_month_day date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!date.ok()) {
        throw std::invalid_argument("invalid calendar date");
    }
    return date;
}

inline int day_index(int y, unsigned m, unsigned d)
{
    return day_index(make_date(y, m, d));
}

inline std::string iso(const year_month_day& date)
{
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(date.year()), static_cast<unsigned>(date.month()),
                  static_cast<unsigned>(date.day()));
    return buf;
}

inline std::string iso_of_day(int day)
{
    return iso(date_of(day));
}

/// Parses `YYYY-MM-DD` or `MM/DD/YYYY` (optionally followed by a time part, which is ignored).
inline year_month_day parse_date(std::string_view text)
{
    while (!text.empty() && (text.front() == ' ' || text.front() == '"')) text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '"' || text.back() == '\r')) text.remove_suffix(1);
    const std::string s(text.substr(0, text.find_first_of(" T")));
    int y = 0;
    unsigned m = 0, d = 0;
    char tail = 0;
    if (std::sscanf(s.c_str(), "%4d-%2u-%2u%c", &y, &m, &d, &tail) == 3) {
        return make_date(y, m, d);
    }
    if (std::sscanf(s.c_str(), "%2u/%2u/%4d%c", &m, &d, &y, &tail) == 3) {
        return make_date(y, m, d);
    }
    throw std::invalid_argument("unparseable date '" + std::string(text) + "'");
}

inline int parse_day(std::string_view text)
{
    return day_index(parse_date(text));
}

// Calendar of the New York City study.
inline const int kPhase1Start = day_index(2020, 3, 14);
inline const int kPhase2Start = day_index(2020, 4, 5);
inline const int kPhase3Start = day_index(2020, 5, 28);
inline const int kPhase4Start = day_index(2020, 8, 25);
inline const int kFitEnd = day_index(2020, 7, 28);
inline const int kValidationStart = day_index(2020, 7, 29);
inline const int kValidationEnd = day_index(2021, 3, 25);
inline const int kSnapshotSpring = day_index(2020, 4, 20);
inline const int kSnapshotWinter = day_index(2021, 2, 21);

} // namespace calendar
} // namespace behavior_epi

#endif // BEHAVIOR_EPI_CALENDAR_HPP
