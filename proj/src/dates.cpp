#include "tailhedge/dates.hpp"

#include <array>
#include <charconv>
#include <cstdio>

#include "tailhedge/errors.hpp"

namespace tailhedge {

bool Date::valid(int y, int m, int d) {
    if (m < 1 || m > 12 || d < 1) return false;
    static constexpr std::array<int, 12> len{31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    int maxd = len[static_cast<std::size_t>(m - 1)];
    const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
    if (m == 2 && leap) maxd = 29;
    return d <= maxd;
}

namespace {
bool parse_int(std::string_view s, int& out) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && p == s.data() + s.size();
}
}  // namespace

std::optional<Date> Date::try_parse(std::string_view iso) {
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') return std::nullopt;
    int y = 0, m = 0, d = 0;
    if (!parse_int(iso.substr(0, 4), y) || !parse_int(iso.substr(5, 2), m) ||
        !parse_int(iso.substr(8, 2), d))
        return std::nullopt;
    if (!valid(y, m, d)) return std::nullopt;
    return Date{y, m, d};
}

Date Date::parse(std::string_view iso) {
    auto d = try_parse(iso);
    if (!d) throw DataError("invalid date '" + std::string(iso) + "', expected YYYY-MM-DD");
    return *d;
}

std::string Date::to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
    return buf;
}

// Civil-day conversions follow Howard Hinnant's algorithms.
std::int64_t Date::to_days() const {
    std::int64_t y = year;
    y -= month <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const auto yoe = static_cast<unsigned>(y - era * 400);
    const auto doy =
        static_cast<unsigned>((153 * (month + (month > 2 ? -3 : 9)) + 2) / 5 + day - 1);
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

Date Date::from_days(std::int64_t z) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const auto doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    return Date{static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

int Date::weekday() const {
    const std::int64_t z = to_days();
    return static_cast<int>(z >= -4 ? (z + 4) % 7 : (z + 5) % 7 + 6);
}

bool Date::is_weekday() const {
    const int w = weekday();
    return w != 0 && w != 6;
}

Date Date::next_weekday() const {
    Date d = from_days(to_days() + 1);
    while (!d.is_weekday()) d = from_days(d.to_days() + 1);
    return d;
}

std::vector<Date> weekday_sequence(Date start, std::size_t n) {
    std::vector<Date> out;
    out.reserve(n);
    Date d = start.is_weekday() ? start : start.next_weekday();
    while (out.size() < n) {
        out.push_back(d);
        d = d.next_weekday();
    }
    return out;
}

}  // namespace tailhedge
