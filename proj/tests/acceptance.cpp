// Acceptance suite: every gate below must pass for a release. One line per
// criterion, wall-clock bounded, exits nonzero on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "datefrag/benchgen.hpp"
#include "datefrag/fragmentation.hpp"
#include "datefrag/judge.hpp"
#include "datefrag/nnls.hpp"
#include "datefrag/pathtrace.hpp"
#include "datefrag/probe.hpp"
#include "datefrag/stats.hpp"
#include "datefrag/tokeniser.hpp"

using namespace datefrag;

namespace {

struct Criterion {
    int number;
    std::string title;
    double time_limit_seconds;
    std::function<bool(std::string&)> run;
};

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

bool close(double a, double b, double tol) { return std::fabs(a - b) <= tol; }

// ---------------------------------------------------------------------------

bool criterion_exact_metric(std::string& detail) {
    const auto cat = FormatCatalogue::default_catalogue();
    const auto& fmt = cat.require("mdy_compact");
    const auto comps = fmt.components_of("10271606");
    const auto baseline = baseline_tokenise("10271606", comps);
    const auto model = BpeTokeniser(make_family_emulator(FamilyStyle::Chunk3)).tokenise("10271606");
    const auto breakdown = fragmentation_ratio(model, baseline, comps);
    if (!close(breakdown.f, 0.40, 1e-9)) {
        detail = "F(chunk3) = " + std::to_string(breakdown.f) + ", expected 0.40";
        return false;
    }

    std::mt19937_64 rng(1);
    const std::int64_t lo = day_number({1600, 1, 1});
    const std::int64_t hi = day_number({2599, 12, 31});
    for (int i = 0; i < 25; ++i) {
        const CalendarDate d =
            date_from_day_number(lo + static_cast<std::int64_t>(rng() % (hi - lo + 1)));
        for (const auto& entry : cat.entries()) {
            DateComponents c;
            const std::string text = entry.format.render(d, c);
            const auto rec = baseline_tokenise(text, c);
            if (fragmentation_ratio(rec, rec, c).f != 0.0) {
                detail = "baseline self-score nonzero for " + entry.format.id();
                return false;
            }
        }
    }
    detail = "F(chunk3 vs baseline) = 0.40 exactly; baseline self-score 0.00 on all 21 formats";
    return true;
}

bool criterion_ordering(std::string& detail) {
    const auto cat = FormatCatalogue::default_catalogue();
    const auto& fmt = cat.require("mdy_compact");
    const auto comps = fmt.components_of("10271606");
    const auto baseline = baseline_tokenise("10271606", comps);
    auto f_of = [&](FamilyStyle style) {
        const auto rec = BpeTokeniser(make_family_emulator(style)).tokenise("10271606");
        return fragmentation_ratio(rec, baseline, comps).f;
    };
    const double f_baseline = fragmentation_ratio(baseline, baseline, comps).f;
    const double f_chunk2 = f_of(FamilyStyle::Chunk2);
    const double f_chunk3 = f_of(FamilyStyle::Chunk3);
    const double f_single = f_of(FamilyStyle::SingleDigit);
    const double f_marker = f_of(FamilyStyle::SingleDigitWithMarker);
    std::ostringstream os;
    os.precision(4);
    os << std::fixed << f_baseline << " < " << f_chunk2 << " < " << f_chunk3 << " < " << f_single
       << " < " << f_marker;
    detail = os.str();
    return f_baseline < f_chunk2 && f_chunk2 < f_chunk3 && f_chunk3 < f_single &&
           f_single < f_marker;
}

bool criterion_benchmark(std::string& detail) {
    const auto cat = FormatCatalogue::default_catalogue();
    const auto ctx_seeds = synthetic_seeds(Task::Context, 500, 2024);
    const auto sw_seeds = synthetic_seeds(Task::Switch, 150, 2024);
    const auto ar_seeds = synthetic_seeds(Task::Arithmetic, 400, 2024);
    const auto ctx = build_context_split(ctx_seeds, cat);
    const auto sw = build_switch_split(sw_seeds, cat);
    const auto ar = build_arithmetic_split(ar_seeds, cat);
    if (ctx.size() != 3000 || sw.size() != 1500 || ar.size() != 2000) {
        detail = "split sizes " + std::to_string(ctx.size()) + "/" + std::to_string(sw.size()) +
                 "/" + std::to_string(ar.size());
        return false;
    }

    // every arithmetic gold set against the day-iteration oracle
    const auto arith_formats = cat.for_task(Task::Arithmetic);
    for (std::size_t i = 0; i < ar_seeds.size(); ++i) {
        for (std::size_t j = 0; j < arith_formats.size(); ++j) {
            const auto& ex = ar[i * arith_formats.size() + j];
            const auto& fmt = arith_formats[j];
            std::vector<DateFormat> candidates{fmt};
            if (auto sw_fmt = fmt.swapped_reading()) candidates.push_back(std::move(*sw_fmt));
            std::set<std::string> expected;
            for (const auto& reading :
                 ambiguous_readings(fmt.render(ar_seeds[i].base_date), candidates)) {
                const CalendarDate shifted = step_days(reading, ar_seeds[i].offset_days);
                for (const auto& entry : cat.entries()) {
                    if (entry.format.renderable(shifted)) expected.insert(entry.format.render(shifted));
                }
            }
            if (std::set<std::string>(ex.gold.begin(), ex.gold.end()) != expected) {
                detail = "gold mismatch at " + ex.id;
                return false;
            }
        }
    }

    // the canonical ambiguous example keeps both gold dates
    const auto& canonical = ar[0];
    const std::set<std::string> gold(canonical.gold.begin(), canonical.gold.end());
    if (canonical.question != "What date is 10,000 days before 5/4/2025?" ||
        !gold.count("18 November 1997") || !gold.count("17 December 1997")) {
        detail = "canonical example wrong: " + canonical.question;
        return false;
    }
    detail = "3000/1500/2000 examples (6500 total); 2000 gold sets match the day-iteration "
             "oracle; gold for '10,000 days before 5/4/2025' holds both variants";
    return true;
}

bool criterion_judge(std::string& detail) {
    std::vector<JudgeRequest> requests;
    ScriptedTransport transport("C");
    const char* letters = "AABC";
    for (int i = 0; i < 4; ++i) {
        const std::string id = "ex-" + std::to_string(i);
        requests.push_back(build_request(id, "q", {"gold"}, "p"));
        transport.script(id, 1, {200, std::string(1, letters[i])});
    }
    SubmitOptions options;
    options.backoff_base_ms = 0;
    const auto result = submit_batch(requests, transport, options);
    std::vector<GradeLetter> grades;
    for (const auto& o : result.outcomes) {
        if (!o.grade) {
            detail = "stub grading failed for " + o.example_id;
            return false;
        }
        grades.push_back(*o.grade);
    }
    const auto metrics = score_run(grades);
    if (!close(metrics.overall_accuracy, 0.50, 1e-4) ||
        !close(metrics.given_attempted_accuracy, 0.6667, 1e-4) || !close(metrics.f1, 0.5714, 1e-4)) {
        detail = "metrics " + std::to_string(metrics.overall_accuracy) + "/" +
                 std::to_string(metrics.given_attempted_accuracy) + "/" + std::to_string(metrics.f1);
        return false;
    }

    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 10000; ++trial) {
        const std::size_t n = 1 + rng() % 50;
        std::vector<GradeLetter> sample;
        std::size_t a = 0, b = 0;
        for (std::size_t i = 0; i < n; ++i) {
            switch (rng() % 3) {
                case 0: sample.push_back(GradeLetter::A); ++a; break;
                case 1: sample.push_back(GradeLetter::B); ++b; break;
                default: sample.push_back(GradeLetter::C); break;
            }
        }
        const auto m = score_run(sample);
        const double overall = static_cast<double>(a) / static_cast<double>(n);
        const double ga = a + b > 0 ? static_cast<double>(a) / static_cast<double>(a + b) : 0.0;
        const double f1 = overall > 0 && ga > 0 ? 2 * overall * ga / (overall + ga) : 0.0;
        if (!close(m.overall_accuracy, overall, 1e-12) ||
            !close(m.given_attempted_accuracy, ga, 1e-12) || !close(m.f1, f1, 1e-12)) {
            detail = "metric identity violated on trial " + std::to_string(trial);
            return false;
        }
    }
    detail = "stub run scored (0.50, 0.6667, 0.5714); identities held on 10,000 random multisets";
    return true;
}

bool criterion_tcp(std::string& detail) {
    const std::size_t layer_count = 36;
    const std::vector<std::size_t> planted{0, 4, 8, 15};
    int hits = 0, trials = 0;
    std::mt19937_64 seeder(99);
    for (const std::size_t layer : planted) {
        for (int t = 0; t < 25; ++t) {
            const auto bundle = synthetic_bundle(layer_count, 300, 12, layer, 5.0, seeder());
            const auto curve = layer_curve(bundle, 0.80);
            ++trials;
            hits += curve.tcp.has_value() && *curve.tcp == layer;
        }
    }
    detail = std::to_string(hits) + "/" + std::to_string(trials) +
             " planted compensation points detected at threshold 0.80";
    return hits == trials;
}

bool criterion_pathtrace(std::string& detail) {
    ActivationBundle b;
    b.prompt_tokens = {"Is", "25", "220", "031", "valid", "Answer"};
    b.concepts = {"031", "220", "25", "yes"};
    b.layers = 4;
    const std::size_t P = 6, C = 4;
    b.s.assign(b.layers * P * C, -4.0f);
    auto set_s = [&](std::size_t l, std::size_t p, std::size_t c, float v) {
        b.s[(l * P + p) * C + c] = v;
    };
    set_s(1, 1, 2, 2.0f); set_s(3, 1, 2, 1.0f);
    set_s(2, 2, 1, 2.0f); set_s(3, 2, 1, 1.0f);
    set_s(2, 3, 0, 2.0f); set_s(3, 3, 0, 1.0f);
    set_s(3, 4, 3, 2.0f);
    b.base_prob.assign(P * C, 0.5f);
    b.perturbed_prob.assign(P * C, 0.5f);
    auto plant = [&](std::size_t pos, std::size_t c, float base, float pert) {
        b.base_prob[pos * C + c] = base;
        b.perturbed_prob[pos * C + c] = pert;
    };
    plant(1, 1, 0.75f, 0.25f);
    plant(2, 0, 0.875f, 0.5f);
    plant(3, 3, 0.75f, 0.5f);

    const std::vector<std::size_t> planted{2, 1, 0, 3};
    const auto scored = score_path(planted, b);
    const double activation = 1.0 / (1.0 + 3.0 * std::exp(-6.0));
    const double causal = (0.5 * 0.5 + 0.75 * 0.375 + 1.0 * 0.25) / 2.25; // rho = 1
    const double total = 1.0 + 1.0 + causal - 0.1 + activation;
    if (!close(scored.s_order, 1.0, 1e-9) || !close(scored.s_act, 1.0, 1e-9) ||
        !close(scored.s_causal, causal, 1e-9) || !close(scored.s_gap, 0.1, 1e-9) ||
        !close(scored.s_final, activation, 1e-9) || !close(scored.total, total, 1e-9)) {
        detail = "component mismatch against the hand oracle";
        return false;
    }

    const auto best = best_path(b);
    if (best.concept_sequence != planted) {
        detail = "best path is not the planted ordering";
        return false;
    }

    auto flat = b;
    flat.perturbed_prob = flat.base_prob;
    const auto no_effect = score_path(planted, flat);
    if (no_effect.s_causal != 0.0) {
        detail = "S_causal nonzero with perturbed == base";
        return false;
    }
    auto faint = b;
    faint.base_prob.assign(faint.base_prob.size(), 0.5078125f);
    faint.perturbed_prob.assign(faint.perturbed_prob.size(), 0.5f);
    const auto weak = score_path(planted, faint);
    if (!close(weak.s_causal, 0.5 * 0.0078125, 1e-15)) {
        detail = "rho = 0 does not halve the causal mean exactly";
        return false;
    }
    detail = "all five components match the hand oracle to 1e-9; best path = planted order; "
             "rho = 0 halves the causal mean exactly";
    return true;
}

bool criterion_weights(std::string& detail) {
    auto planted_rows = [](std::size_t n, double sigma, std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> noise(0.0, sigma);
        std::vector<std::array<double, 4>> features;
        std::vector<double> targets;
        for (std::size_t i = 0; i < n; ++i) {
            features.push_back({static_cast<double>(rng() % 2), static_cast<double>(rng() % 2),
                                static_cast<double>(rng() % 8),
                                static_cast<double>(rng() % 1000) / 999.0});
        }
        std::array<double, 4> mean{}, sd{};
        for (const auto& r : features) {
            for (int c = 0; c < 4; ++c) mean[c] += r[c];
        }
        for (auto& m : mean) m /= static_cast<double>(n);
        for (const auto& r : features) {
            for (int c = 0; c < 4; ++c) sd[c] += (r[c] - mean[c]) * (r[c] - mean[c]);
        }
        for (auto& s : sd) s = std::sqrt(s / static_cast<double>(n));
        const std::array<double, 4> w{0.2, 0.2, 0.1, 0.5};
        for (const auto& r : features) {
            double y = 3.0;
            for (int c = 0; c < 4; ++c) y += w[c] * (r[c] - mean[c]) / sd[c];
            targets.push_back(y + (sigma > 0 ? noise(rng) : 0.0));
        }
        return std::make_pair(features, targets);
    };

    const auto [clean_x, clean_y] = planted_rows(200, 0.0, 5);
    const auto clean = learn_metric_weights(clean_x, clean_y);
    const std::array<double, 4> expected{0.2, 0.2, 0.1, 0.5};
    for (int c = 0; c < 4; ++c) {
        if (!close(clean.normalised[c], expected[c], 1e-6)) {
            detail = "noiseless recovery off at component " + std::to_string(c);
            return false;
        }
    }
    const auto [noisy_x, noisy_y] = planted_rows(200, 0.01, 6);
    const auto noisy = learn_metric_weights(noisy_x, noisy_y);
    for (int c = 0; c < 4; ++c) {
        if (!close(noisy.normalised[c], expected[c], 0.05)) {
            detail = "noisy recovery off at component " + std::to_string(c);
            return false;
        }
    }
    detail = "planted (0.2, 0.2, 0.1, 0.5) recovered: noiseless to 1e-6, sigma=0.01 within 0.05";
    return true;
}

bool criterion_stats(std::string& detail) {
    const std::vector<double> xs{1, 2, 3}, ys{2, 4, 7};
    if (!close(pearson(xs, xs), 1.0, 1e-9) || !close(pearson(xs, ys), 15.0 / std::sqrt(228.0), 1e-9)) {
        detail = "pearson fixture mismatch";
        return false;
    }
    const std::vector<double> monotone{1, 10, 100, 1000, 10000};
    const std::vector<double> base{1, 2, 3, 4, 5};
    if (!close(spearman(base, monotone), 1.0, 1e-12)) {
        detail = "spearman over monotone data != 1";
        return false;
    }

    std::mt19937_64 rng(12);
    std::normal_distribution<double> nd(0.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 3 + rng() % 20;
        std::vector<double> a(n), b(n), scaled(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = nd(rng);
            b[i] = nd(rng);
        }
        const double scale = 0.5 + static_cast<double>(rng() % 100) / 20.0;
        const double shift = nd(rng) * 5.0;
        for (std::size_t i = 0; i < n; ++i) scaled[i] = scale * a[i] + shift;
        if (!close(pearson(scaled, b), pearson(a, b), 1e-9) ||
            !close(spearman(scaled, b), spearman(a, b), 1e-9)) {
            detail = "affine invariance violated on trial " + std::to_string(trial);
            return false;
        }
    }
    detail = "closed-form fixtures to 1e-9; monotone spearman = 1.0; affine invariance on "
             "1,000 random series";
    return true;
}

bool criterion_calendar(std::string& detail) {
    // leap-rule oracle equivalence over 1600-2599
    for (int year = 1600; year <= 2599; ++year) {
        const bool by_count = day_number({year, 3, 1}) - day_number({year, 2, 1}) == 29;
        if (is_leap_year(year) != by_count) {
            detail = "leap oracle mismatch at " + std::to_string(year);
            return false;
        }
    }

    const auto cat = FormatCatalogue::default_catalogue();
    std::mt19937_64 rng(3141);
    const std::int64_t lo = day_number({1600, 1, 1});
    const std::int64_t hi = day_number({2599, 12, 31});
    auto random_date = [&]() {
        return date_from_day_number(lo + static_cast<std::int64_t>(rng() % (hi - lo + 1)));
    };

    // 10,000 render/parse round trips across random catalogue formats
    for (int i = 0; i < 10000; ++i) {
        const CalendarDate d = random_date();
        const auto& entry = cat.entries()[rng() % cat.size()];
        if (!entry.format.renderable(d)) continue;
        if (entry.format.parse(entry.format.render(d)) != d) {
            detail = "round trip failed for " + entry.format.id();
            return false;
        }
    }
    // 10,000 add/sub inverses up to five million days
    for (int i = 0; i < 10000; ++i) {
        const CalendarDate d = random_date();
        const std::int64_t n = static_cast<std::int64_t>(rng() % 10000001) - 5000000;
        const std::int64_t target = day_number(d) + n;
        if (target < day_number({1, 1, 1}) || target > day_number({9999, 12, 31})) continue;
        if (add_days(add_days(d, n), -n) != d) {
            detail = "add_days inverse failed";
            return false;
        }
    }
    // 10,000 iteration-oracle checks
    for (int i = 0; i < 10000; ++i) {
        const CalendarDate d = random_date();
        const std::int64_t n = static_cast<std::int64_t>(rng() % 40001) - 20000;
        if (add_days(d, n) != step_days(d, n)) {
            detail = "iteration oracle mismatch";
            return false;
        }
    }
    // 10,000 regime partition checks
    for (int i = 0; i < 10000; ++i) {
        const int year = 1 + static_cast<int>(rng() % 9999);
        for (const RegimeScheme scheme : {RegimeScheme::Eval, RegimeScheme::Probe}) {
            const Regime r = regime_of({year, 6, 15}, scheme);
            int count = 0;
            for (const Regime candidate :
                 {Regime::Past, Regime::NearPast, Regime::Present, Regime::Future}) {
                count += candidate == r;
            }
            if (count != 1) {
                detail = "regime bucketing not a partition at year " + std::to_string(year);
                return false;
            }
        }
    }
    detail = "leap oracle equivalent over 1600-2599; 10,000 cases each: round trip, "
             "add/sub inverse, iteration oracle, regime partition";
    return true;
}

} // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "exact metric reproduction", 1.0, criterion_exact_metric},
        {2, "fragmentation ordering across families", 1.0, criterion_ordering},
        {3, "benchmark cardinality and arithmetic gold oracle", 10.0, criterion_benchmark},
        {4, "judge metrics on the scripted stub", 5.0, criterion_judge},
        {5, "compensation-point detection on planted bundles", 60.0, criterion_tcp},
        {6, "path score components against the hand oracle", 1.0, criterion_pathtrace},
        {7, "non-negative weight learning recovery", 5.0, criterion_weights},
        {8, "correlation statistics", 30.0, criterion_stats},
        {9, "calendar and round-trip properties", 60.0, criterion_calendar},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        std::string detail;
        bool ok = false;
        try {
            ok = c.run(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (elapsed > c.time_limit_seconds) {
            ok = false;
            detail += " [exceeded " + std::to_string(c.time_limit_seconds) + "s]";
        }
        failures += !ok;
        std::printf("[%s] criterion %d: %s (%.2fs) - %s\n", ok ? "PASS" : "FAIL", c.number,
                    c.title.c_str(), elapsed, detail.c_str());
    }
    if (failures) std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
