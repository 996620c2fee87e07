#ifndef BEHAVIOR_EPI_SERIES_HPP
#define BEHAVIOR_EPI_SERIES_HPP

#include "behavior_epi/calendar.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace behavior_epi {

/**
 * @brief Contiguous daily hospitalization counts with their trailing 7-day mean.
 */
struct HospitalizationSeries {
    int first_day = 0;               ///< day index (since epoch) of the first entry
    std::vector<double> raw;         ///< persons/day
    std::vector<double> avg7;        ///< NaN for the first 6 entries

    std::size_t size() const
    {
        return raw.size();
    }

    int last_day() const
    {
        return first_day + static_cast<int>(raw.size()) - 1;
    }

    bool has_avg(int day) const
    {
        const long k = day - first_day;
        return k >= 0 && k < static_cast<long>(avg7.size()) && !std::isnan(avg7[static_cast<std::size_t>(k)]);
    }

    double avg(int day) const
    {
        if (!has_avg(day)) throw std::out_of_range("no 7-day average on day " + std::to_string(day));
        return avg7[static_cast<std::size_t>(day - first_day)];
    }

    /// (day, avg7) pairs with a defined average inside [start, end].
    std::vector<std::pair<int, double>> targets(int start, int end) const
    {
        std::vector<std::pair<int, double>> out;
        for (int d = std::max(start, first_day); d <= std::min(end, last_day()); ++d) {
            if (has_avg(d)) out.emplace_back(d, avg(d));
        }
        return out;
    }
};

/// Trailing 7-day mean (current day and the previous six); the first six values are NaN.
inline std::vector<double> trailing_average7(const std::vector<double>& v)
{
    std::vector<double> out(v.size(), std::numeric_limits<double>::quiet_NaN());
    double window = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        window += v[i];
        if (i >= 7) window -= v[i - 7];
        if (i >= 6) out[i] = window / 7.0;
    }
    return out;
}

inline HospitalizationSeries make_series(int first_day, std::vector<double> raw)
{
    for (double x : raw) {
        if (!(x >= 0.0)) throw std::invalid_argument("hospitalization counts must be non-negative");
    }
    HospitalizationSeries s;
    s.first_day = first_day;
    s.avg7 = trailing_average7(raw);
    s.raw = std::move(raw);
    return s;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (char c : line) {
        if (c == '"') {
            quoted = !quoted;
        }
        else if (c == ',' && !quoted) {
            out.push_back(cur);
            cur.clear();
        }
        else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

inline std::string trim(std::string s)
{
    const auto b = s.find_first_not_of(" \t\xEF\xBB\xBF");
    const auto e = s.find_last_not_of(" \t");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

} // namespace detail

/**
 * @brief Parses a CSV stream with a header row into a gap-checked daily series.
 * @throws std::invalid_argument on unparseable rows, duplicate or missing days, or negative counts.
 */
inline HospitalizationSeries parse_series(std::istream& in, const std::string& date_column = "date_of_interest",
                                          const std::string& count_column = "HOSPITALIZED_COUNT")
{
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("series: empty input");
    const auto header = detail::split_csv_line(line);
    int date_col = -1, count_col = -1;
    for (std::size_t i = 0; i < header.size(); ++i) {
        const auto h = detail::trim(header[i]);
        if (h == date_column) date_col = static_cast<int>(i);
        if (h == count_column) count_col = static_cast<int>(i);
    }
    if (date_col < 0 || count_col < 0) {
        throw std::invalid_argument("series: header lacks column '" + (date_col < 0 ? date_column : count_column) + "'");
    }
    std::map<int, double> rows;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        const auto cells = detail::split_csv_line(line);
        if (static_cast<int>(cells.size()) <= std::max(date_col, count_col)) {
            throw std::invalid_argument("series: line " + std::to_string(line_no) + " has too few columns");
        }
        int day = 0;
        double value = 0.0;
        try {
            day = calendar::parse_day(detail::trim(cells[date_col]));
            std::size_t used = 0;
            const auto text = detail::trim(cells[count_col]);
            value = std::stod(text, &used);
            if (used != text.size()) throw std::invalid_argument("trailing characters");
        }
        catch (const std::exception& e) {
            throw std::invalid_argument("series: unparseable line " + std::to_string(line_no) + ": " + e.what());
        }
        if (value < 0.0) throw std::invalid_argument("series: negative count on line " + std::to_string(line_no));
        if (!rows.emplace(day, value).second) {
            throw std::invalid_argument("series: duplicate date " + calendar::iso_of_day(day));
        }
    }
    if (rows.empty()) throw std::invalid_argument("series: no data rows");
    std::vector<double> raw;
    std::string gaps;
    int expected = rows.begin()->first;
    for (const auto& [day, value] : rows) {
        for (int d = expected; d < day; ++d) gaps += (gaps.empty() ? "" : ", ") + calendar::iso_of_day(d);
        raw.push_back(value);
        expected = day + 1;
    }
    if (!gaps.empty()) throw std::invalid_argument("series: missing days " + gaps);
    return make_series(rows.begin()->first, std::move(raw));
}

inline HospitalizationSeries load_series(const std::string& path, const std::string& date_column = "date_of_interest",
                                         const std::string& count_column = "HOSPITALIZED_COUNT")
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open series file '" + path + "'");
    return parse_series(in, date_column, count_column);
}

} // namespace behavior_epi

#endif // BEHAVIOR_EPI_SERIES_HPP
