#include <charconv>
#include <cstdio>
#include <stdexcept>

#include "zonectl/data.hpp"

namespace zonectl::data {

using namespace std::chrono;

char mode_code(Mode m) { return m == Mode::heating ? 'H' : 'C'; }

std::string format_timestamp(Timestamp t) {
    const auto day = floor<days>(t);
    const year_month_day ymd{day};
    const hh_mm_ss hms{t - day};
    char buf[64];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02ldZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<long>(hms.hours().count()), static_cast<long>(hms.minutes().count()),
                  static_cast<long>(hms.seconds().count()));
    return buf;
}

namespace {

bool read_int(std::string_view text, std::size_t pos, std::size_t len, int& out) {
    if (pos + len > text.size()) return false;
    const char* first = text.data() + pos;
    const char* last = first + len;
    for (const char* p = first; p != last; ++p) {
        if (*p < '0' || *p > '9') return false;
    }
    return std::from_chars(first, last, out).ec == std::errc{};
}

}  // namespace

Timestamp parse_timestamp(std::string_view text) {
    // YYYY-MM-DDTHH:MM:SS[Z]
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    const bool shape_ok = (text.size() == 19 || (text.size() == 20 && text[19] == 'Z')) &&
                          text[4] == '-' && text[7] == '-' && (text[10] == 'T' || text[10] == ' ') &&
                          text[13] == ':' && text[16] == ':';
    if (!shape_ok || !read_int(text, 0, 4, y) || !read_int(text, 5, 2, mo) ||
        !read_int(text, 8, 2, d) || !read_int(text, 11, 2, h) || !read_int(text, 14, 2, mi) ||
        !read_int(text, 17, 2, s)) {
        throw std::invalid_argument("malformed timestamp '" + std::string(text) + "'");
    }
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || h > 23 || mi > 59 || s > 59) {
        throw std::invalid_argument("timestamp out of range '" + std::string(text) + "'");
    }
    return sys_days{ymd} + hours{h} + minutes{mi} + seconds{s};
}

CalendarInfo calendar(Timestamp t) {
    const auto day = floor<days>(t);
    const year_month_day ymd{day};
    const auto jan1 = sys_days{ymd.year() / January / 1};
    CalendarInfo info;
    info.month = static_cast<int>(static_cast<unsigned>(ymd.month()));
    info.day_of_year = static_cast<int>((day - jan1).count());
    info.day_of_week = static_cast<int>(weekday{day}.iso_encoding()) - 1;
    info.hour_of_day = static_cast<double>((t - day).count()) / 3600.0;
    return info;
}

Mode season_of(Timestamp t) {
    const int m = calendar(t).month;
    return (m >= 5 && m <= 9) ? Mode::cooling : Mode::heating;
}

}  // namespace zonectl::data
