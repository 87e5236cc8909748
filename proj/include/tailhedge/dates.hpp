#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tailhedge {

// Calendar date; ordering is lexicographic on (year, month, day).
struct Date {
    int year = 1970;
    int month = 1;
    int day = 1;

    auto operator<=>(const Date&) const = default;

    [[nodiscard]] static bool valid(int y, int m, int d);
    [[nodiscard]] static Date parse(std::string_view iso);  // strict YYYY-MM-DD, throws DataError
    [[nodiscard]] static std::optional<Date> try_parse(std::string_view iso);
    [[nodiscard]] std::string to_string() const;

    [[nodiscard]] std::int64_t to_days() const;  // days since 1970-01-01
    [[nodiscard]] static Date from_days(std::int64_t days);
    [[nodiscard]] int weekday() const;  // 0 = Sunday ... 6 = Saturday
    [[nodiscard]] bool is_weekday() const;
    [[nodiscard]] Date next_weekday() const;
};

// n consecutive weekdays starting at the first weekday >= start.
[[nodiscard]] std::vector<Date> weekday_sequence(Date start, std::size_t n);

}  // namespace tailhedge
