#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <set>

#include "datefrag/benchgen.hpp"

using namespace datefrag;

namespace {

const FormatCatalogue& catalogue() {
    static const FormatCatalogue cat = FormatCatalogue::default_catalogue();
    return cat;
}

CalendarDate step_days(CalendarDate d, std::int64_t n) {
    while (n > 0) {
        if (++d.day > days_in_month(d.year, d.month)) {
            d.day = 1;
            if (++d.month > 12) {
                d.month = 1;
                ++d.year;
            }
        }
        --n;
    }
    while (n < 0) {
        if (--d.day < 1) {
            if (--d.month < 1) {
                d.month = 12;
                --d.year;
            }
            d.day = days_in_month(d.year, d.month);
        }
        ++n;
    }
    return d;
}

} // namespace

TEST_CASE("context split: one seed expands to one example per context format") {
    SeedRecord seed;
    seed.task = Task::Context;
    seed.question_template = "Which team did Omid Namazi play for in {DATE}?";
    seed.context_passage = "Omid Namazi joined the Maryland Bays on {DATE}.";
    seed.base_date = {1990, 6, 10};
    seed.answer = "Maryland Bays";

    const auto examples = build_context_split(std::vector<SeedRecord>{seed}, catalogue());
    REQUIRE(examples.size() == 6);
    std::set<std::string> ids;
    bool saw_mm_dd = false;
    for (const auto& ex : examples) {
        ids.insert(ex.id);
        CHECK(ex.gold == std::vector<std::string>{"Maryland Bays"});
        CHECK(ex.regime == Regime::Past);
        CHECK(ex.question.find("{DATE}") == std::string::npos);
        CHECK(ex.context.find("{DATE}") == std::string::npos);
        if (ex.question == "Which team did Omid Namazi play for in 06/10/1990?") saw_mm_dd = true;
    }
    CHECK(ids.size() == 6);
    CHECK(saw_mm_dd);
}

TEST_CASE("context split rejects bad seeds") {
    SeedRecord seed;
    seed.task = Task::Context;
    seed.question_template = "No placeholder here";
    seed.context_passage = "passage {DATE}";
    seed.base_date = {1990, 6, 10};
    seed.answer = "x";
    try {
        build_context_split(std::vector<SeedRecord>{seed}, catalogue());
        FAIL("expected TemplateMissingPlaceholder");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::TemplateMissingPlaceholder);
    }

    seed.question_template = "ok {DATE}";
    seed.context_passage.clear();
    CHECK_THROWS_AS(build_context_split(std::vector<SeedRecord>{seed}, catalogue()),
                    std::invalid_argument);
}

TEST_CASE("switch split: ten pairings per seed, distinct formats, yes/no golds") {
    std::vector<SeedRecord> seeds;
    SeedRecord yes;
    yes.task = Task::Switch;
    yes.base_date = {2025, 3, 14};
    yes.second_date = yes.base_date;
    yes.equivalent = true;
    SeedRecord no = yes;
    no.second_date = {2025, 3, 15};
    no.equivalent = false;
    seeds.push_back(yes);
    seeds.push_back(no);

    const auto examples = build_switch_split(seeds, catalogue());
    REQUIRE(examples.size() == 20);
    for (const auto& ex : examples) {
        const auto bar = ex.format_id.find('|');
        REQUIRE(bar != std::string::npos);
        CHECK(ex.format_id.substr(0, bar) != ex.format_id.substr(bar + 1));
        CHECK(ex.question.rfind("Are ", 0) == 0);
        CHECK(ex.question.find(" referring to the same date?") != std::string::npos);
    }
    CHECK(examples[0].gold == yes_variants());
    CHECK(examples[10].gold == no_variants());

    // the Table-style pairing YYYYDDMM vs ordinal month name appears for
    // some seed once the pair rotation covers it
    bool saw = false;
    for (const auto& ex : examples) {
        if (ex.question == "Are 20251403 and March 14th 2025 referring to the same date?") saw = true;
    }
    CHECK(saw);
}

TEST_CASE("switch split enforces label balance") {
    std::vector<SeedRecord> seeds;
    for (int i = 0; i < 10; ++i) {
        SeedRecord s;
        s.task = Task::Switch;
        s.base_date = {2000 + i, 1, 10};
        s.second_date = s.base_date;
        s.equivalent = true; // 100% positive
        seeds.push_back(s);
    }
    CHECK_THROWS_AS(build_switch_split(seeds, catalogue()), std::invalid_argument);
    CHECK_NOTHROW(build_switch_split(seeds, catalogue(), 0.5));
}

TEST_CASE("arithmetic split: gold covers both readings, matches the day oracle") {
    SeedRecord seed;
    seed.task = Task::Arithmetic;
    seed.question_template = "What date is 10,000 days before {DATE}?";
    seed.base_date = {2025, 5, 4};
    seed.offset_days = -10000;

    const auto examples = build_arithmetic_split(std::vector<SeedRecord>{seed}, catalogue());
    REQUIRE(examples.size() == 5);

    const BenchmarkExample* slash = nullptr;
    for (const auto& ex : examples) {
        if (ex.format_id == "m_d_yyyy_slash") slash = &ex;
    }
    REQUIRE(slash != nullptr);
    CHECK(slash->question == "What date is 10,000 days before 5/4/2025?");
    const std::set<std::string> gold(slash->gold.begin(), slash->gold.end());
    CHECK(gold.count("18 November 1997") == 1);
    CHECK(gold.count("17 December 1997") == 1);

    // oracle: every reading of the rendered base, stepped one day at a time
    const auto& fmt = catalogue().require("m_d_yyyy_slash");
    std::vector<DateFormat> readings{fmt, *fmt.swapped_reading()};
    std::set<std::string> expected;
    for (const auto& r : ambiguous_readings("5/4/2025", readings)) {
        const CalendarDate shifted = step_days(r, -10000);
        for (const auto& s : gold_renderings(shifted, catalogue())) expected.insert(s);
    }
    CHECK(gold == expected);
}

TEST_CASE("arithmetic split: unambiguous formats yield a single result set") {
    SeedRecord seed;
    seed.task = Task::Arithmetic;
    seed.question_template = "What date is 1 day after {DATE}?";
    seed.base_date = {2024, 2, 28};
    seed.offset_days = 1;
    const auto examples = build_arithmetic_split(std::vector<SeedRecord>{seed}, catalogue());
    for (const auto& ex : examples) {
        if (ex.format_id != "d_month_yyyy") continue;
        // "28 February 2024" has exactly one reading; gold = renderings of 2024-02-29
        const std::set<std::string> gold(ex.gold.begin(), ex.gold.end());
        const auto renders = gold_renderings({2024, 2, 29}, catalogue());
        CHECK(gold == std::set<std::string>(renders.begin(), renders.end()));
    }
}

TEST_CASE("arithmetic split rejects zero offsets") {
    SeedRecord seed;
    seed.task = Task::Arithmetic;
    seed.question_template = "What date is 0 days after {DATE}?";
    seed.base_date = {2024, 2, 28};
    seed.offset_days = 0;
    CHECK_THROWS_AS(build_arithmetic_split(std::vector<SeedRecord>{seed}, catalogue()),
                    std::invalid_argument);
}

TEST_CASE("gold variants parse back to the oracle's date set") {
    SeedRecord seed;
    seed.task = Task::Arithmetic;
    seed.question_template = "What date is 45 days after {DATE}?";
    seed.base_date = {1799, 2, 10};
    seed.offset_days = 45;
    const auto examples = build_arithmetic_split(std::vector<SeedRecord>{seed}, catalogue());
    for (const auto& ex : examples) {
        const auto& fmt = catalogue().require(ex.format_id);
        std::vector<DateFormat> readings{fmt};
        if (auto sw = fmt.swapped_reading()) readings.push_back(*sw);
        std::set<CalendarDate> oracle;
        for (const auto& r : ambiguous_readings(fmt.render(seed.base_date), readings)) {
            oracle.insert(step_days(r, 45));
        }
        // every gold string must parse (under some catalogue format) into
        // the oracle set, and every oracle date must appear
        std::set<CalendarDate> seen;
        for (const auto& g : ex.gold) {
            std::set<CalendarDate> parses;
            for (const auto& entry : catalogue().entries()) {
                try {
                    const CalendarDate d = entry.format.parse(g);
                    if (entry.format.renderable(d) && entry.format.render(d) == g) parses.insert(d);
                } catch (const Error&) {
                }
            }
            bool in_oracle = false;
            for (const auto& d : parses) {
                if (oracle.count(d)) {
                    in_oracle = true;
                    seen.insert(d);
                }
            }
            CHECK(in_oracle);
        }
        CHECK(seen == oracle);
    }
}

TEST_CASE("synthetic seeds are deterministic and sized") {
    const auto a = synthetic_seeds(Task::Switch, 150, 99);
    const auto b = synthetic_seeds(Task::Switch, 150, 99);
    CHECK(a == b);
    CHECK(a.size() == 150);
    const auto c = synthetic_seeds(Task::Switch, 150, 100);
    CHECK(a != c);

    std::size_t positives = 0;
    for (const auto& s : a) positives += s.equivalent;
    CHECK(positives == 75);
    for (const auto& s : a) {
        if (!s.equivalent) CHECK(s.second_date != s.base_date);
    }
}

TEST_CASE("total corpus size is 6500 from 500/150/400 seeds") {
    const auto ctx = build_context_split(synthetic_seeds(Task::Context, 500, 1), catalogue());
    const auto sw = build_switch_split(synthetic_seeds(Task::Switch, 150, 1), catalogue());
    const auto ar = build_arithmetic_split(synthetic_seeds(Task::Arithmetic, 400, 1), catalogue());
    CHECK(ctx.size() == 3000);
    CHECK(sw.size() == 1500);
    CHECK(ar.size() == 2000);
    CHECK(ctx.size() + sw.size() + ar.size() == 6500);

    std::set<std::string> ids;
    for (const auto& ex : ctx) ids.insert(ex.id);
    for (const auto& ex : sw) ids.insert(ex.id);
    for (const auto& ex : ar) ids.insert(ex.id);
    CHECK(ids.size() == 6500);
}

TEST_CASE("jsonl round trip") {
    const auto examples = build_arithmetic_split(synthetic_seeds(Task::Arithmetic, 5, 3), catalogue());
    const auto path = std::filesystem::temp_directory_path() / "datefrag_bench_test.jsonl";
    write_jsonl(examples, path);
    const auto loaded = read_jsonl(path);
    CHECK(loaded == examples);

    std::size_t lines = 0;
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) ++lines;
    CHECK(lines == examples.size());
    std::filesystem::remove(path);
}

TEST_CASE("malformed jsonl reports the line number") {
    const auto path = std::filesystem::temp_directory_path() / "datefrag_bad.jsonl";
    {
        const auto examples =
            build_arithmetic_split(synthetic_seeds(Task::Arithmetic, 2, 3), catalogue());
        std::vector<BenchmarkExample> six(examples.begin(), examples.begin() + 6);
        write_jsonl(six, path);
        std::ofstream out(path, std::ios::app);
        out << "{\"id\": broken\n";
    }
    try {
        read_jsonl(path);
        FAIL("expected MalformedLine");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MalformedLine);
        CHECK(std::string(e.what()).find("line 7") != std::string::npos);
    }
    std::filesystem::remove(path);
}

TEST_CASE("seed file round trip") {
    const auto path = std::filesystem::temp_directory_path() / "datefrag_seeds_test.jsonl";
    for (const Task t : {Task::Context, Task::Switch, Task::Arithmetic}) {
        const auto seeds = synthetic_seeds(t, 20, 5);
        write_seeds(seeds, path);
        CHECK(read_seeds(path) == seeds);
    }
    std::filesystem::remove(path);
}

TEST_CASE("shipped seed files drive all three splits") {
    const std::filesystem::path data_dir{DATEFRAG_DATA_DIR};
    const auto cat = FormatCatalogue::load(data_dir / "formats.tsv");
    REQUIRE(cat.size() == 21);

    const auto ctx_seeds = read_seeds(data_dir / "seeds/context_seeds.jsonl");
    const auto sw_seeds = read_seeds(data_dir / "seeds/switch_seeds.jsonl");
    const auto ar_seeds = read_seeds(data_dir / "seeds/arithmetic_seeds.jsonl");
    REQUIRE(ctx_seeds.size() == 20);
    REQUIRE(sw_seeds.size() == 20);
    REQUIRE(ar_seeds.size() == 20);

    CHECK(build_context_split(ctx_seeds, cat).size() == 120);
    const auto sw = build_switch_split(sw_seeds, cat);
    CHECK(sw.size() == 200);
    CHECK(sw[2].question == "Are 20251403 and March 14th 2025 referring to the same date?");
    CHECK(sw[2].gold == yes_variants());
    const auto ar = build_arithmetic_split(ar_seeds, cat);
    CHECK(ar.size() == 100);
    const std::set<std::string> gold(ar[0].gold.begin(), ar[0].gold.end());
    CHECK(gold.count("18 November 1997") == 1);
    CHECK(gold.count("17 December 1997") == 1);
}
