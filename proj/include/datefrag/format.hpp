// Date serialisation patterns and the 21-entry format catalogue.
//
// A pattern is an ordered list of fields and literal delimiters, written in
// a compact notation: "MM/DD/YYYY", "MonthName D, YYYY", "YYYYDDMM", ...
// Field tokens (longest match wins while compiling a pattern string):
//
//   YYYY       four-digit zero-padded year
//   YY         two-digit year (renders year mod 100; parses into 2000..2099)
//   MM / M     zero-padded / minimal month number
//   DD / D     zero-padded / minimal day number
//   MonthName  full English month name
//   Dth        minimal day number with ordinal suffix ("1st", "22nd", ...)
//   DOY        three-digit day of year (ordinal date; not in the default
//              catalogue)
//
// Delimiters are single characters from the set  / - . <space> ,
#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "datefrag/calendar.hpp"
#include "datefrag/error.hpp"

namespace datefrag {

enum class FieldKind { Year4, Year2, Month2, Month1, Day2, Day1, MonthName, DayOrdinal, DayOfYear };

struct PatternItem {
    bool is_field = true;
    FieldKind field = FieldKind::Year4;
    char delimiter = 0;
};

struct ByteSpan {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t size() const { return end - begin; }
    bool operator==(const ByteSpan&) const = default;
};

// Byte layout of one rendered (or parsed) date string: where the year,
// month and day components sit and where the delimiters are. For ordinal
// (day-of-year) patterns there is no month component.
struct DateComponents {
    ByteSpan year_span;
    std::optional<ByteSpan> month_span;
    ByteSpan day_span;
    std::vector<ByteSpan> delimiter_spans;
};

inline constexpr std::array<std::string_view, 12> kMonthNames = {
    "January", "February", "March",     "April",   "May",      "June",
    "July",    "August",   "September", "October", "November", "December"};

inline std::string ordinal_suffix(int day) {
    if (day % 100 >= 11 && day % 100 <= 13) return "th";
    switch (day % 10) {
        case 1: return "st";
        case 2: return "nd";
        case 3: return "rd";
        default: return "th";
    }
}

inline bool is_delimiter_char(char c) {
    return c == '/' || c == '-' || c == '.' || c == ' ' || c == ',';
}

namespace detail {

struct FieldToken {
    std::string_view text;
    FieldKind kind;
};

// Longest first so the compiler prefers "YYYY" over "YY", "Dth" over "D".
inline constexpr std::array<FieldToken, 9> kFieldTokens = {{
    {"MonthName", FieldKind::MonthName},
    {"YYYY", FieldKind::Year4},
    {"DOY", FieldKind::DayOfYear},
    {"Dth", FieldKind::DayOrdinal},
    {"YY", FieldKind::Year2},
    {"MM", FieldKind::Month2},
    {"DD", FieldKind::Day2},
    {"M", FieldKind::Month1},
    {"D", FieldKind::Day1},
}};

inline bool is_year_kind(FieldKind k) { return k == FieldKind::Year4 || k == FieldKind::Year2; }
inline bool is_month_kind(FieldKind k) {
    return k == FieldKind::Month2 || k == FieldKind::Month1 || k == FieldKind::MonthName;
}
inline bool is_day_kind(FieldKind k) {
    return k == FieldKind::Day2 || k == FieldKind::Day1 || k == FieldKind::DayOrdinal;
}

} // namespace detail

class DateFormat {
  public:
    DateFormat() = default;

    // Compiles a pattern string. Throws MalformedDefinition for unknown
    // tokens or patterns that cannot pin down a full date.
    static DateFormat from_pattern(std::string id, std::string pattern) {
        DateFormat f;
        f.id_ = std::move(id);
        f.pattern_ = std::move(pattern);
        std::string_view rest = f.pattern_;
        std::size_t pos = 0;
        while (pos < rest.size()) {
            bool matched = false;
            for (const auto& tok : detail::kFieldTokens) {
                if (rest.substr(pos, tok.text.size()) == tok.text) {
                    f.items_.push_back({true, tok.kind, 0});
                    pos += tok.text.size();
                    matched = true;
                    break;
                }
            }
            if (matched) continue;
            if (is_delimiter_char(rest[pos])) {
                f.items_.push_back({false, FieldKind::Year4, rest[pos]});
                ++pos;
                continue;
            }
            throw Error(ErrorCode::MalformedDefinition,
                        "unrecognised pattern character '" + std::string(1, rest[pos]) + "' in '" +
                            f.pattern_ + "'");
        }
        f.check_fields();
        return f;
    }

    const std::string& id() const { return id_; }
    const std::string& pattern() const { return pattern_; }
    const std::vector<PatternItem>& items() const { return items_; }

    bool has_field(FieldKind k) const {
        return std::any_of(items_.begin(), items_.end(),
                           [&](const PatternItem& it) { return it.is_field && it.field == k; });
    }

    // A date round-trips through this format only if a two-digit year can
    // represent it; all other fields are lossless.
    bool renderable(const CalendarDate& d) const {
        if (has_field(FieldKind::Year2)) return d.year >= 2000 && d.year <= 2099;
        return true;
    }

    std::string render(const CalendarDate& d) const {
        DateComponents ignored;
        return render_impl(d, ignored);
    }

    std::string render(const CalendarDate& d, DateComponents& components_out) const {
        return render_impl(d, components_out);
    }

    DateComponents components_for(const CalendarDate& d) const {
        DateComponents c;
        render_impl(d, c);
        return c;
    }

    CalendarDate parse(std::string_view text) const {
        DateComponents ignored;
        return parse_impl(text, ignored);
    }

    CalendarDate parse(std::string_view text, DateComponents& components_out) const {
        return parse_impl(text, components_out);
    }

    DateComponents components_of(std::string_view text) const {
        DateComponents c;
        parse_impl(text, c);
        return c;
    }

    // The month<->day swapped reading of this pattern ("MM/DD/YYYY" ->
    // "DD/MM/YYYY"); the other valid interpretation of an all-numeric
    // rendering. Absent for patterns whose month or day is unambiguous
    // (MonthName, ordinal suffix, day-of-year).
    std::optional<DateFormat> swapped_reading() const {
        if (has_field(FieldKind::MonthName) || has_field(FieldKind::DayOrdinal) ||
            has_field(FieldKind::DayOfYear)) {
            return std::nullopt;
        }
        std::string swapped;
        for (const auto& it : items_) {
            if (!it.is_field) {
                swapped += it.delimiter;
                continue;
            }
            switch (it.field) {
                case FieldKind::Month2: swapped += "DD"; break;
                case FieldKind::Month1: swapped += "D"; break;
                case FieldKind::Day2: swapped += "MM"; break;
                case FieldKind::Day1: swapped += "M"; break;
                case FieldKind::Year4: swapped += "YYYY"; break;
                case FieldKind::Year2: swapped += "YY"; break;
                default: return std::nullopt;
            }
        }
        if (swapped == pattern_) return std::nullopt;
        return from_pattern(id_ + "~swapped", swapped);
    }

  private:
    void check_fields() const {
        int years = 0, months = 0, days = 0, doys = 0;
        for (const auto& it : items_) {
            if (!it.is_field) continue;
            years += detail::is_year_kind(it.field);
            months += detail::is_month_kind(it.field);
            days += detail::is_day_kind(it.field);
            doys += it.field == FieldKind::DayOfYear;
        }
        const bool ok = years == 1 && ((months == 1 && days == 1 && doys == 0) ||
                                       (months == 0 && days == 0 && doys == 1));
        if (!ok) {
            throw Error(ErrorCode::MalformedDefinition,
                        "pattern '" + pattern_ + "' must contain one year and either one "
                        "month and one day or one day-of-year field");
        }
    }

    static void pad_number(std::string& out, int value, int width) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%0*d", width, value);
        out += buf;
    }

    std::string render_impl(const CalendarDate& d, DateComponents& comps) const {
        comps = DateComponents{};
        std::string out;
        for (const auto& it : items_) {
            const std::size_t begin = out.size();
            if (!it.is_field) {
                out += it.delimiter;
                comps.delimiter_spans.push_back({begin, out.size()});
                continue;
            }
            switch (it.field) {
                case FieldKind::Year4: pad_number(out, d.year, 4); break;
                case FieldKind::Year2: pad_number(out, d.year % 100, 2); break;
                case FieldKind::Month2: pad_number(out, d.month, 2); break;
                case FieldKind::Month1: out += std::to_string(d.month); break;
                case FieldKind::Day2: pad_number(out, d.day, 2); break;
                case FieldKind::Day1: out += std::to_string(d.day); break;
                case FieldKind::MonthName: out += kMonthNames[d.month - 1]; break;
                case FieldKind::DayOrdinal:
                    out += std::to_string(d.day) + ordinal_suffix(d.day);
                    break;
                case FieldKind::DayOfYear:
                    pad_number(out, static_cast<int>(day_number(d) - day_number({d.year, 1, 1})) + 1, 3);
                    break;
            }
            const ByteSpan span{begin, out.size()};
            if (detail::is_year_kind(it.field)) comps.year_span = span;
            else if (detail::is_month_kind(it.field)) comps.month_span = span;
            else comps.day_span = span;
        }
        return out;
    }

    struct FieldValues {
        int year = -1;
        int month = -1;
        int day = -1;
        int doy = -1;
        bool year2 = false;
        DateComponents comps;
    };

    // Backtracking structural match; semantic validation happens afterwards
    // so "29/02/2023" reports InvalidCalendarDate rather than a mismatch.
    bool match_items(std::string_view text, std::size_t item_idx, std::size_t pos,
                     FieldValues& vals) const {
        if (item_idx == items_.size()) return pos == text.size();
        const auto& it = items_[item_idx];
        if (!it.is_field) {
            if (pos >= text.size() || text[pos] != it.delimiter) return false;
            vals.comps.delimiter_spans.push_back({pos, pos + 1});
            if (match_items(text, item_idx + 1, pos + 1, vals)) return true;
            vals.comps.delimiter_spans.pop_back();
            return false;
        }

        auto digits_at = [&](std::size_t p, std::size_t n) -> std::optional<int> {
            if (p + n > text.size()) return std::nullopt;
            int v = 0;
            for (std::size_t i = 0; i < n; ++i) {
                const char c = text[p + i];
                if (c < '0' || c > '9') return std::nullopt;
                v = v * 10 + (c - '0');
            }
            return v;
        };

        auto try_numeric = [&](std::size_t len, int FieldValues::* slot, bool minimal) -> bool {
            auto v = digits_at(pos, len);
            if (!v) return false;
            if (minimal && len > 1 && text[pos] == '0') return false; // minimal fields carry no leading zero
            const ByteSpan span{pos, pos + len};
            vals.*slot = *v;
            assign_span(it.field, span, vals.comps);
            if (match_items(text, item_idx + 1, pos + len, vals)) return true;
            vals.*slot = -1;
            return false;
        };

        switch (it.field) {
            case FieldKind::Year4:
                return try_numeric(4, &FieldValues::year, false);
            case FieldKind::Year2:
                vals.year2 = true;
                if (try_numeric(2, &FieldValues::year, false)) return true;
                vals.year2 = false;
                return false;
            case FieldKind::Month2:
                return try_numeric(2, &FieldValues::month, false);
            case FieldKind::Day2:
                return try_numeric(2, &FieldValues::day, false);
            case FieldKind::DayOfYear:
                return try_numeric(3, &FieldValues::doy, false);
            case FieldKind::Month1:
                return try_numeric(2, &FieldValues::month, true) ||
                       try_numeric(1, &FieldValues::month, true);
            case FieldKind::Day1:
                return try_numeric(2, &FieldValues::day, true) ||
                       try_numeric(1, &FieldValues::day, true);
            case FieldKind::MonthName:
                for (std::size_t m = 0; m < kMonthNames.size(); ++m) {
                    const auto& name = kMonthNames[m];
                    if (text.substr(pos, name.size()) != name) continue;
                    vals.month = static_cast<int>(m) + 1;
                    assign_span(it.field, {pos, pos + name.size()}, vals.comps);
                    if (match_items(text, item_idx + 1, pos + name.size(), vals)) return true;
                    vals.month = -1;
                }
                return false;
            case FieldKind::DayOrdinal:
                for (std::size_t len : {2u, 1u}) {
                    auto v = digits_at(pos, len);
                    if (!v || (len > 1 && text[pos] == '0')) continue;
                    const std::size_t sfx = pos + len;
                    if (sfx + 2 > text.size()) continue;
                    const std::string suffix(text.substr(sfx, 2));
                    if (suffix != "st" && suffix != "nd" && suffix != "rd" && suffix != "th") continue;
                    if (suffix != ordinal_suffix(*v)) continue;
                    vals.day = *v;
                    assign_span(it.field, {pos, sfx + 2}, vals.comps);
                    if (match_items(text, item_idx + 1, sfx + 2, vals)) return true;
                    vals.day = -1;
                }
                return false;
        }
        return false;
    }

    static void assign_span(FieldKind kind, ByteSpan span, DateComponents& comps) {
        if (detail::is_year_kind(kind)) comps.year_span = span;
        else if (detail::is_month_kind(kind)) comps.month_span = span;
        else comps.day_span = span;
    }

    CalendarDate parse_impl(std::string_view text, DateComponents& comps) const {
        FieldValues vals;
        if (!match_items(text, 0, 0, vals)) {
            throw Error(ErrorCode::PatternMismatch,
                        "'" + std::string(text) + "' does not match pattern '" + pattern_ + "'");
        }
        int year = vals.year2 ? 2000 + vals.year : vals.year;
        CalendarDate date;
        if (vals.doy >= 0) {
            const int limit = is_leap_year(year) ? 366 : 365;
            if (year < kMinYear || year > kMaxYear || vals.doy < 1 || vals.doy > limit) {
                throw Error(ErrorCode::InvalidCalendarDate,
                            "day-of-year " + std::to_string(vals.doy) + " in " + std::to_string(year));
            }
            date = date_from_day_number(day_number({year, 1, 1}) + vals.doy - 1);
        } else {
            date = make_date(year, vals.month, vals.day); // throws InvalidCalendarDate
        }
        comps = std::move(vals.comps);
        return date;
    }

    std::string id_;
    std::string pattern_;
    std::vector<PatternItem> items_;
};

// Free-function spellings of the two core operations.
inline CalendarDate parse_date(std::string_view text, const DateFormat& format) {
    return format.parse(text);
}
inline std::string render_date(const CalendarDate& date, const DateFormat& format) {
    return format.render(date);
}

// Every format that parses `text` into a valid date contributes one reading;
// duplicates collapse. Throws NoValidReading when nothing matches.
inline std::set<CalendarDate> ambiguous_readings(std::string_view text,
                                                 std::span<const DateFormat> candidate_formats) {
    if (candidate_formats.empty()) {
        throw std::invalid_argument("ambiguous_readings: candidate_formats must be non-empty");
    }
    std::set<CalendarDate> readings;
    for (const auto& f : candidate_formats) {
        try {
            readings.insert(f.parse(text));
        } catch (const Error&) {
            // not a reading under this format
        }
    }
    if (readings.empty()) {
        throw Error(ErrorCode::NoValidReading, "no candidate format parses '" + std::string(text) + "'");
    }
    return readings;
}

// ---------------------------------------------------------------------------
// Catalogue: the pinned 21-entry format table, 6/10/5 across the three task
// splits. Ids are unique; a handful of patterns recur across splits, which
// is why split-suffixed ids exist. Loadable from a tab-separated file
// (id<TAB>pattern<TAB>split, '#' comments).

enum class Task { Context, Switch, Arithmetic };

constexpr std::string_view to_string(Task t) {
    switch (t) {
        case Task::Context: return "context";
        case Task::Switch: return "switch";
        case Task::Arithmetic: return "arithmetic";
    }
    return "?";
}

inline Task task_from_string(std::string_view s) {
    if (s == "context") return Task::Context;
    if (s == "switch") return Task::Switch;
    if (s == "arithmetic") return Task::Arithmetic;
    throw Error(ErrorCode::MalformedLine, "unknown task '" + std::string(s) + "'");
}

struct CatalogueEntry {
    DateFormat format;
    Task task;
};

class FormatCatalogue {
  public:
    static FormatCatalogue default_catalogue() {
        static const struct {
            const char* id;
            const char* pattern;
            Task task;
        } rows[] = {
            {"mdy_slash", "MM/DD/YYYY", Task::Context},
            {"dmy_dash", "DD-MM-YYYY", Task::Context},
            {"ymd_dot", "YYYY.MM.DD", Task::Context},
            {"dmy_compact", "DDMMYYYY", Task::Context},
            {"mdy_compact", "MMDDYYYY", Task::Context},
            {"ymd_compact", "YYYYMMDD", Task::Context},
            {"ymd_slash", "YYYY/MM/DD", Task::Switch},
            {"dmy_slash", "DD/MM/YYYY", Task::Switch},
            {"ydm_compact", "YYYYDDMM", Task::Switch},
            {"month_dth_yyyy", "MonthName Dth YYYY", Task::Switch},
            {"month_d_yyyy", "MonthName D, YYYY", Task::Switch},
            {"month_dd_yyyy", "MonthName DD, YYYY", Task::Switch},
            {"d_m_yyyy_dot", "D.M.YYYY", Task::Switch},
            {"dd_mm_yyyy_dot", "DD.MM.YYYY", Task::Switch},
            {"dmy_dash_yy", "DD-MM-YY", Task::Switch},
            {"mdy_slash_yy", "MM/DD/YY", Task::Switch},
            {"m_d_yyyy_slash", "M/D/YYYY", Task::Arithmetic},
            {"dmy_slash_arith", "DD/MM/YYYY", Task::Arithmetic},
            {"ymd_dash", "YYYY-MM-DD", Task::Arithmetic},
            {"dmy_compact_arith", "DDMMYYYY", Task::Arithmetic},
            {"d_month_yyyy", "D MonthName YYYY", Task::Arithmetic},
        };
        FormatCatalogue cat;
        for (const auto& row : rows) {
            cat.entries_.push_back({DateFormat::from_pattern(row.id, row.pattern), row.task});
        }
        return cat;
    }

    static FormatCatalogue load(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw Error(ErrorCode::IoFailure, "cannot open catalogue '" + path.string() + "'");
        FormatCatalogue cat;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty() || line[0] == '#') continue;
            const auto tab1 = line.find('\t');
            const auto tab2 = tab1 == std::string::npos ? std::string::npos : line.find('\t', tab1 + 1);
            if (tab2 == std::string::npos) {
                throw Error(ErrorCode::MalformedLine,
                            path.string() + ":" + std::to_string(line_no) +
                                ": expected id<TAB>pattern<TAB>split");
            }
            const std::string id = line.substr(0, tab1);
            const std::string pattern = line.substr(tab1 + 1, tab2 - tab1 - 1);
            std::string split = line.substr(tab2 + 1);
            while (!split.empty() && (split.back() == '\r' || split.back() == ' ')) split.pop_back();
            if (cat.find(id) != nullptr) {
                throw Error(ErrorCode::MalformedLine,
                            path.string() + ":" + std::to_string(line_no) + ": duplicate id '" + id + "'");
            }
            cat.entries_.push_back({DateFormat::from_pattern(id, pattern), task_from_string(split)});
        }
        return cat;
    }

    void save(const std::filesystem::path& path) const {
        std::ofstream out(path);
        if (!out) throw Error(ErrorCode::IoFailure, "cannot write catalogue '" + path.string() + "'");
        out << "# id\tpattern\tsplit\n";
        for (const auto& e : entries_) {
            out << e.format.id() << '\t' << e.format.pattern() << '\t' << to_string(e.task) << '\n';
        }
    }

    const DateFormat* find(std::string_view id) const {
        for (const auto& e : entries_) {
            if (e.format.id() == id) return &e.format;
        }
        return nullptr;
    }

    const DateFormat& require(std::string_view id) const {
        const DateFormat* f = find(id);
        if (!f) throw Error(ErrorCode::MalformedDefinition, "unknown format id '" + std::string(id) + "'");
        return *f;
    }

    std::vector<DateFormat> for_task(Task t) const {
        std::vector<DateFormat> out;
        for (const auto& e : entries_) {
            if (e.task == t) out.push_back(e.format);
        }
        return out;
    }

    const std::vector<CatalogueEntry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }

  private:
    std::vector<CatalogueEntry> entries_;
};

} // namespace datefrag
