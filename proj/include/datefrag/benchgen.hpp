// Benchmark construction: expands seed records into the three task splits
// (context resolution, format switching, date arithmetic) with
// ambiguity-aware gold variant sets, plus JSONL I/O and a deterministic
// synthetic seed generator for offline runs.
//
// Benchmark JSONL fields, in order: id, task, format, question, context,
// gold (array), regime. The switch split stores its two formats as
// "<first>|<second>" in the format field.
#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "datefrag/calendar.hpp"
#include "datefrag/error.hpp"
#include "datefrag/format.hpp"

namespace datefrag {

inline constexpr std::string_view kDatePlaceholder = "{DATE}";

struct SeedRecord {
    Task task = Task::Context;
    std::string question_template; // contains {DATE} for context/arithmetic
    std::string context_passage;   // context task only
    CalendarDate base_date;
    // task-specific payload
    std::string answer;            // context: verbatim gold entity
    CalendarDate second_date;      // switch: the other date of the pair
    bool equivalent = false;       // switch
    std::int64_t offset_days = 0;  // arithmetic, nonzero

    bool operator==(const SeedRecord&) const = default;
};

struct BenchmarkExample {
    std::string id;
    Task task = Task::Context;
    std::string format_id;
    std::string question;
    std::string context;            // empty when absent
    std::vector<std::string> gold;  // sorted, deduplicated, non-empty
    Regime regime = Regime::Present;

    bool operator==(const BenchmarkExample&) const = default;
};

inline const std::vector<std::string>& yes_variants() {
    static const std::vector<std::string> v{"True", "Yes", "true", "yes"};
    return v;
}
inline const std::vector<std::string>& no_variants() {
    static const std::vector<std::string> v{"False", "No", "false", "no"};
    return v;
}

namespace detail {

inline std::string replace_all(std::string text, std::string_view needle, std::string_view value) {
    std::size_t pos = 0;
    while ((pos = text.find(needle, pos)) != std::string::npos) {
        text.replace(pos, needle.size(), value);
        pos += value.size();
    }
    return text;
}

inline std::string pad4(std::size_t n) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%04zu", n);
    return buf;
}

} // namespace detail

// All catalogue renderings of one date, deduplicated.
inline std::vector<std::string> gold_renderings(const CalendarDate& date,
                                                const FormatCatalogue& catalogue) {
    std::set<std::string> out;
    for (const auto& entry : catalogue.entries()) {
        if (entry.format.renderable(date)) out.insert(entry.format.render(date));
    }
    return {out.begin(), out.end()};
}

// Gold set for "offset days from <base rendered under render_fmt>": every
// plausible reading of the rendered string (the format itself plus its
// month/day-swapped twin) is shifted and rendered under the whole catalogue.
inline std::vector<std::string> arithmetic_gold(const DateFormat& render_fmt,
                                                const CalendarDate& base, std::int64_t offset,
                                                const FormatCatalogue& catalogue) {
    const std::string rendered = render_fmt.render(base);
    std::vector<DateFormat> candidates{render_fmt};
    if (auto swapped = render_fmt.swapped_reading()) candidates.push_back(std::move(*swapped));
    std::set<std::string> gold;
    for (const auto& reading : ambiguous_readings(rendered, candidates)) {
        const CalendarDate result = add_days(reading, offset);
        for (const auto& s : gold_renderings(result, catalogue)) gold.insert(s);
    }
    return {gold.begin(), gold.end()};
}

// ---------------------------------------------------------------------------
// Split builders. Each seed expands once per configured format (context,
// arithmetic) or once per format pairing (switch); ids are deterministic.

inline std::vector<BenchmarkExample> build_context_split(std::span<const SeedRecord> seeds,
                                                         const FormatCatalogue& catalogue) {
    const auto formats = catalogue.for_task(Task::Context);
    if (formats.empty()) throw std::invalid_argument("build_context_split: no context formats");
    std::vector<BenchmarkExample> out;
    out.reserve(seeds.size() * formats.size());
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        const auto& seed = seeds[i];
        if (seed.task != Task::Context) {
            throw std::invalid_argument("build_context_split: seed " + std::to_string(i) +
                                        " is not a context seed");
        }
        if (seed.question_template.find(kDatePlaceholder) == std::string::npos) {
            throw Error(ErrorCode::TemplateMissingPlaceholder,
                        "context seed " + std::to_string(i) + " lacks " + std::string(kDatePlaceholder));
        }
        if (seed.context_passage.empty()) {
            throw std::invalid_argument("build_context_split: seed " + std::to_string(i) +
                                        " carries no passage");
        }
        for (const auto& f : formats) {
            const std::string rendered = f.render(seed.base_date);
            BenchmarkExample ex;
            ex.id = "context-" + detail::pad4(i) + "-" + f.id();
            ex.task = Task::Context;
            ex.format_id = f.id();
            ex.question = detail::replace_all(seed.question_template, kDatePlaceholder, rendered);
            ex.context = detail::replace_all(seed.context_passage, kDatePlaceholder, rendered);
            ex.gold = {seed.answer};
            ex.regime = regime_of(seed.base_date, RegimeScheme::Eval);
            out.push_back(std::move(ex));
        }
    }
    return out;
}

inline std::vector<BenchmarkExample> build_switch_split(std::span<const SeedRecord> seeds,
                                                        const FormatCatalogue& catalogue,
                                                        double balance_tolerance = 0.05) {
    const auto formats = catalogue.for_task(Task::Switch);
    if (formats.size() < 2) {
        throw std::invalid_argument("build_switch_split: need at least two switch formats");
    }
    const std::size_t nf = formats.size();
    std::vector<BenchmarkExample> out;
    out.reserve(seeds.size() * nf);
    std::size_t positives = 0;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        const auto& seed = seeds[i];
        if (seed.task != Task::Switch) {
            throw std::invalid_argument("build_switch_split: seed " + std::to_string(i) +
                                        " is not a switch seed");
        }
        positives += seed.equivalent;
        const CalendarDate other = seed.equivalent ? seed.base_date : seed.second_date;
        for (std::size_t j = 0; j < nf; ++j) {
            // pairings rotate with the seed index so every seed sees a
            // different set of format pairs; first != second always
            const auto& fa = formats[j];
            const auto& fb = formats[(j + 1 + i % (nf - 1)) % nf];
            BenchmarkExample ex;
            ex.id = "switch-" + detail::pad4(i) + "-p" + std::to_string(j);
            ex.task = Task::Switch;
            ex.format_id = fa.id() + "|" + fb.id();
            ex.question = "Are " + fa.render(seed.base_date) + " and " + fb.render(other) +
                          " referring to the same date?";
            ex.gold = seed.equivalent ? yes_variants() : no_variants();
            ex.regime = regime_of(seed.base_date, RegimeScheme::Eval);
            out.push_back(std::move(ex));
        }
    }
    if (!seeds.empty()) {
        const double frac = static_cast<double>(positives) / static_cast<double>(seeds.size());
        if (std::abs(frac - 0.5) > balance_tolerance + 1e-12) {
            throw std::invalid_argument("build_switch_split: labels unbalanced (" +
                                        std::to_string(frac) + " positive)");
        }
    }
    return out;
}

inline std::vector<BenchmarkExample> build_arithmetic_split(std::span<const SeedRecord> seeds,
                                                            const FormatCatalogue& catalogue) {
    const auto formats = catalogue.for_task(Task::Arithmetic);
    if (formats.empty()) throw std::invalid_argument("build_arithmetic_split: no arithmetic formats");
    std::vector<BenchmarkExample> out;
    out.reserve(seeds.size() * formats.size());
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        const auto& seed = seeds[i];
        if (seed.task != Task::Arithmetic) {
            throw std::invalid_argument("build_arithmetic_split: seed " + std::to_string(i) +
                                        " is not an arithmetic seed");
        }
        if (seed.offset_days == 0) {
            throw std::invalid_argument("build_arithmetic_split: seed " + std::to_string(i) +
                                        " has zero offset");
        }
        if (seed.question_template.find(kDatePlaceholder) == std::string::npos) {
            throw Error(ErrorCode::TemplateMissingPlaceholder,
                        "arithmetic seed " + std::to_string(i) + " lacks " +
                            std::string(kDatePlaceholder));
        }
        for (const auto& f : formats) {
            BenchmarkExample ex;
            ex.id = "arith-" + detail::pad4(i) + "-" + f.id();
            ex.task = Task::Arithmetic;
            ex.format_id = f.id();
            ex.question =
                detail::replace_all(seed.question_template, kDatePlaceholder, f.render(seed.base_date));
            ex.gold = arithmetic_gold(f, seed.base_date, seed.offset_days, catalogue);
            ex.regime = regime_of(seed.base_date, RegimeScheme::Eval);
            out.push_back(std::move(ex));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// JSONL I/O

inline void write_jsonl(std::span<const BenchmarkExample> examples,
                        const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write '" + path.string() + "'");
    for (const auto& ex : examples) {
        nlohmann::ordered_json j;
        j["id"] = ex.id;
        j["task"] = to_string(ex.task);
        j["format"] = ex.format_id;
        j["question"] = ex.question;
        if (ex.context.empty()) j["context"] = nullptr;
        else j["context"] = ex.context;
        j["gold"] = ex.gold;
        j["regime"] = to_string(ex.regime);
        out << j.dump() << '\n';
    }
    if (!out) throw Error(ErrorCode::IoFailure, "short write to '" + path.string() + "'");
}

inline std::vector<BenchmarkExample> read_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open '" + path.string() + "'");
    std::vector<BenchmarkExample> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            BenchmarkExample ex;
            ex.id = j.at("id").get<std::string>();
            ex.task = task_from_string(j.at("task").get<std::string>());
            ex.format_id = j.at("format").get<std::string>();
            ex.question = j.at("question").get<std::string>();
            if (j.contains("context") && !j["context"].is_null()) {
                ex.context = j["context"].get<std::string>();
            }
            ex.gold = j.at("gold").get<std::vector<std::string>>();
            if (ex.gold.empty()) throw Error(ErrorCode::EmptyGold, "empty gold array");
            ex.regime = regime_from_string(j.at("regime").get<std::string>());
            out.push_back(std::move(ex));
        } catch (const Error& e) {
            throw Error(ErrorCode::MalformedLine,
                        path.string() + ": line " + std::to_string(line_no) + ": " + e.what());
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::MalformedLine,
                        path.string() + ": line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

// Seed files are JSONL as well; fields depend on the task:
//   context:    {"task","question","context","date","answer"}
//   switch:     {"task","date","date_b","equivalent"}
//   arithmetic: {"task","question","date","offset_days"}
inline std::vector<SeedRecord> read_seeds(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open '" + path.string() + "'");
    std::vector<SeedRecord> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            SeedRecord s;
            s.task = task_from_string(j.at("task").get<std::string>());
            s.base_date = date_from_iso(j.at("date").get<std::string>());
            switch (s.task) {
                case Task::Context:
                    s.question_template = j.at("question").get<std::string>();
                    s.context_passage = j.at("context").get<std::string>();
                    s.answer = j.at("answer").get<std::string>();
                    break;
                case Task::Switch:
                    s.equivalent = j.at("equivalent").get<bool>();
                    s.second_date = s.equivalent && !j.contains("date_b")
                                        ? s.base_date
                                        : date_from_iso(j.at("date_b").get<std::string>());
                    break;
                case Task::Arithmetic:
                    s.question_template = j.at("question").get<std::string>();
                    s.offset_days = j.at("offset_days").get<std::int64_t>();
                    if (s.offset_days == 0) {
                        throw Error(ErrorCode::MalformedLine, "offset_days must be nonzero");
                    }
                    break;
            }
            out.push_back(std::move(s));
        } catch (const Error& e) {
            throw Error(ErrorCode::MalformedLine,
                        path.string() + ": line " + std::to_string(line_no) + ": " + e.what());
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::MalformedLine,
                        path.string() + ": line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

inline void write_seeds(std::span<const SeedRecord> seeds, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write '" + path.string() + "'");
    for (const auto& s : seeds) {
        nlohmann::ordered_json j;
        j["task"] = to_string(s.task);
        switch (s.task) {
            case Task::Context:
                j["question"] = s.question_template;
                j["context"] = s.context_passage;
                j["date"] = iso_string(s.base_date);
                j["answer"] = s.answer;
                break;
            case Task::Switch:
                j["date"] = iso_string(s.base_date);
                j["date_b"] = iso_string(s.equivalent ? s.base_date : s.second_date);
                j["equivalent"] = s.equivalent;
                break;
            case Task::Arithmetic:
                j["question"] = s.question_template;
                j["date"] = iso_string(s.base_date);
                j["offset_days"] = s.offset_days;
                break;
        }
        out << j.dump() << '\n';
    }
}

// ---------------------------------------------------------------------------
// Deterministic synthetic seeds, enough to run the whole pipeline offline.

namespace detail {

// rng() % n is deterministic across standard libraries, unlike
// std::uniform_int_distribution
inline std::int64_t bounded(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

inline CalendarDate random_date(std::mt19937_64& rng, int year_lo, int year_hi) {
    const std::int64_t lo = day_number({year_lo, 1, 1});
    const std::int64_t hi = day_number({year_hi, 12, 31});
    return date_from_day_number(bounded(rng, lo, hi));
}

} // namespace detail

inline std::vector<SeedRecord> synthetic_seeds(Task task, std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(task) * 0x9e3779b97f4a7c15ULL);
    std::vector<SeedRecord> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        SeedRecord s;
        s.task = task;
        switch (task) {
            case Task::Context: {
                s.base_date = detail::random_date(rng, 1600, 2598);
                const std::string who = "Player-" + std::to_string(i);
                const std::string team = "Team-" + std::to_string(detail::bounded(rng, 100, 999));
                s.question_template = "Which team did " + who + " play for in {DATE}?";
                s.context_passage = who + " signed with " + team +
                                    " on {DATE} and spent the whole season there.";
                s.answer = team;
                break;
            }
            case Task::Switch: {
                s.base_date = detail::random_date(rng, 1600, 2598);
                s.equivalent = i % 2 == 0;
                if (s.equivalent) {
                    s.second_date = s.base_date;
                } else if (rng() % 2 == 0) {
                    // nudge the day, staying inside the month
                    const int room = days_in_month(s.base_date.year, s.base_date.month);
                    int day = s.base_date.day + static_cast<int>(detail::bounded(rng, 1, 3));
                    if (day > room) day = s.base_date.day - static_cast<int>(detail::bounded(rng, 1, 3));
                    s.second_date = make_date(s.base_date.year, s.base_date.month, std::max(day, 1));
                } else {
                    // swap to a different month that still fits the day
                    int month = 1 + static_cast<int>(detail::bounded(rng, 0, 11));
                    if (month == s.base_date.month) month = month % 12 + 1;
                    while (s.base_date.day > days_in_month(s.base_date.year, month)) {
                        month = month % 12 + 1;
                        if (month == s.base_date.month) month = month % 12 + 1;
                    }
                    s.second_date = make_date(s.base_date.year, month, s.base_date.day);
                }
                break;
            }
            case Task::Arithmetic: {
                if (i == 0) {
                    // canonical example: ten thousand days before 5/4/2025
                    s.base_date = CalendarDate{2025, 5, 4};
                    s.offset_days = -10000;
                    s.question_template = "What date is 10,000 days before {DATE}?";
                } else {
                    s.base_date = detail::random_date(rng, 1600, 2598);
                    const std::int64_t magnitude = detail::bounded(rng, 1, 20000);
                    const bool before = rng() % 2 == 0;
                    s.offset_days = before ? -magnitude : magnitude;
                    s.question_template = "What date is " + std::to_string(magnitude) + " days " +
                                          (before ? "before" : "after") + " {DATE}?";
                }
                break;
            }
        }
        out.push_back(std::move(s));
    }
    return out;
}

} // namespace datefrag
