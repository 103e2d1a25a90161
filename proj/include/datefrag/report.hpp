// Aggregate reporting: joins per-example fragmentation breakdowns with
// judge grades, groups by temporal regime or format, and emits mean-F /
// accuracy tables plus plot-ready scatter rows with a correlation attached.
#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "datefrag/calendar.hpp"
#include "datefrag/error.hpp"
#include "datefrag/fragmentation.hpp"
#include "datefrag/judge.hpp"
#include "datefrag/stats.hpp"

namespace datefrag {

struct BreakdownRow {
    std::string example_id;
    std::string date_text;
    std::string format_id;
    std::string tokeniser;
    Regime regime = Regime::Present;
    FragmentationBreakdown breakdown;
};

struct GradeRow {
    std::string example_id;
    std::string model;
    GradeLetter letter = GradeLetter::C;
};

// ---------------------------------------------------------------------------
// Row I/O. Breakdowns travel as TSV (one header line), grades as JSONL.

inline void write_breakdown_rows(std::span<const BreakdownRow> rows,
                                 const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write '" + path.string() + "'");
    out << "id\tdate\tformat\ttokeniser\tregime\tsplit\tdelim\tdiff\ttheta\tf\n";
    char buf[64];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%d\t%d\t%d\t%.9f\t%.9f", r.breakdown.split_indicator,
                      r.breakdown.delimiter_indicator, r.breakdown.token_count_diff,
                      r.breakdown.theta, r.breakdown.f);
        out << r.example_id << '\t' << r.date_text << '\t' << r.format_id << '\t' << r.tokeniser
            << '\t' << to_string(r.regime) << '\t' << buf << '\n';
    }
}

inline std::vector<BreakdownRow> read_breakdown_rows(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open '" + path.string() + "'");
    std::vector<BreakdownRow> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.rfind("id\t", 0) == 0) continue;
        std::vector<std::string> cols;
        std::stringstream ss(line);
        std::string col;
        while (std::getline(ss, col, '\t')) cols.push_back(col);
        if (cols.size() != 10) {
            throw Error(ErrorCode::MalformedLine,
                        path.string() + ": line " + std::to_string(line_no) + ": expected 10 columns");
        }
        try {
            BreakdownRow r;
            r.example_id = cols[0];
            r.date_text = cols[1];
            r.format_id = cols[2];
            r.tokeniser = cols[3];
            r.regime = regime_from_string(cols[4]);
            r.breakdown.split_indicator = std::stoi(cols[5]);
            r.breakdown.delimiter_indicator = std::stoi(cols[6]);
            r.breakdown.token_count_diff = std::stoi(cols[7]);
            r.breakdown.theta = std::stod(cols[8]);
            r.breakdown.f = std::stod(cols[9]);
            rows.push_back(std::move(r));
        } catch (const std::exception& e) {
            throw Error(ErrorCode::MalformedLine,
                        path.string() + ": line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return rows;
}

inline void write_grade_rows(std::span<const GradeRow> rows, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write '" + path.string() + "'");
    for (const auto& r : rows) {
        nlohmann::ordered_json j;
        j["id"] = r.example_id;
        j["model"] = r.model;
        j["letter"] = std::string(1, to_char(r.letter));
        out << j.dump() << '\n';
    }
}

inline std::vector<GradeRow> read_grade_rows(const std::filesystem::path& path,
                                             const std::string& default_model = "model") {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open '" + path.string() + "'");
    std::vector<GradeRow> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            GradeRow r;
            r.example_id = j.at("id").get<std::string>();
            r.model = j.value("model", default_model);
            r.letter = parse_grade(j.at("letter").get<std::string>());
            rows.push_back(std::move(r));
        } catch (const std::exception& e) {
            throw Error(ErrorCode::MalformedLine,
                        path.string() + ": line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Aggregation

enum class GroupBy { Regime, Format };

struct GroupCell {
    std::string model;
    std::string group;
    double mean_f = 0.0;
    double accuracy = 0.0;
    std::size_t n = 0;
};

struct AggregateReport {
    GroupBy grouping = GroupBy::Regime;
    std::vector<std::string> models;  // row order
    std::vector<std::string> groups;  // column order
    std::vector<GroupCell> cells;     // scatter rows, model-major
    std::map<std::string, double> model_avg_f;
    std::optional<double> pearson_r;
    std::optional<double> spearman_rho;
    std::string correlation_note;     // set when the correlation is undefined
};

// Inner join on (model == tokeniser, example id); every row must find its
// partner or the join is rejected.
inline AggregateReport aggregate_report(std::span<const BreakdownRow> breakdowns,
                                        std::span<const GradeRow> grades, GroupBy grouping) {
    if (breakdowns.empty() || grades.empty()) {
        throw Error(ErrorCode::JoinMismatch, "nothing to join");
    }
    std::map<std::pair<std::string, std::string>, GradeLetter> grade_by_key;
    for (const auto& g : grades) grade_by_key[{g.model, g.example_id}] = g.letter;

    struct Acc {
        double f_sum = 0.0;
        std::size_t hits = 0;
        std::size_t n = 0;
    };
    std::map<std::string, std::map<std::string, Acc>> table; // model -> group -> acc
    std::map<std::string, Acc> per_model;
    std::set<std::pair<std::string, std::string>> joined;

    for (const auto& row : breakdowns) {
        const auto key = std::make_pair(row.tokeniser, row.example_id);
        const auto it = grade_by_key.find(key);
        if (it == grade_by_key.end()) {
            throw Error(ErrorCode::JoinMismatch, "no grade for (model '" + row.tokeniser +
                                                     "', example '" + row.example_id + "')");
        }
        joined.insert(key);
        const std::string group =
            grouping == GroupBy::Regime ? std::string(to_string(row.regime)) : row.format_id;
        Acc& acc = table[row.tokeniser][group];
        acc.f_sum += row.breakdown.f;
        acc.hits += it->second == GradeLetter::A;
        ++acc.n;
        Acc& m = per_model[row.tokeniser];
        m.f_sum += row.breakdown.f;
        ++m.n;
    }
    for (const auto& [key, letter] : grade_by_key) {
        (void)letter;
        if (!joined.count(key)) {
            throw Error(ErrorCode::JoinMismatch, "no breakdown for (model '" + key.first +
                                                     "', example '" + key.second + "')");
        }
    }

    AggregateReport report;
    report.grouping = grouping;
    if (grouping == GroupBy::Regime) {
        for (const Regime r : {Regime::Past, Regime::NearPast, Regime::Present, Regime::Future}) {
            report.groups.emplace_back(to_string(r));
        }
    } else {
        std::set<std::string> groups;
        for (const auto& [model, by_group] : table) {
            (void)model;
            for (const auto& [g, acc] : by_group) {
                (void)acc;
                groups.insert(g);
            }
        }
        report.groups.assign(groups.begin(), groups.end());
    }

    std::vector<double> xs, ys;
    for (const auto& [model, by_group] : table) {
        report.models.push_back(model);
        report.model_avg_f[model] = per_model[model].f_sum / static_cast<double>(per_model[model].n);
        for (const auto& group : report.groups) {
            const auto it = by_group.find(group);
            if (it == by_group.end()) continue;
            const Acc& acc = it->second;
            GroupCell cell;
            cell.model = model;
            cell.group = group;
            cell.mean_f = acc.f_sum / static_cast<double>(acc.n);
            cell.accuracy = static_cast<double>(acc.hits) / static_cast<double>(acc.n);
            cell.n = acc.n;
            xs.push_back(cell.mean_f);
            ys.push_back(cell.accuracy);
            report.cells.push_back(std::move(cell));
        }
    }

    try {
        if (xs.size() < 2) throw Error(ErrorCode::ConstantSeries, "fewer than two groups");
        report.pearson_r = pearson(xs, ys);
        report.spearman_rho = spearman(xs, ys);
    } catch (const Error& e) {
        report.correlation_note = e.what();
    }
    return report;
}

// Mean-F table: one row per model, one column per group plus Avg.
inline std::string mean_f_table_tsv(const AggregateReport& report) {
    std::ostringstream out;
    out << "tokeniser";
    for (const auto& g : report.groups) out << '\t' << g;
    out << "\tavg\n";
    char buf[32];
    for (const auto& model : report.models) {
        out << model;
        for (const auto& g : report.groups) {
            const GroupCell* found = nullptr;
            for (const auto& c : report.cells) {
                if (c.model == model && c.group == g) {
                    found = &c;
                    break;
                }
            }
            if (found) {
                std::snprintf(buf, sizeof(buf), "%.4f", found->mean_f);
                out << '\t' << buf;
            } else {
                out << "\t-";
            }
        }
        std::snprintf(buf, sizeof(buf), "%.4f", report.model_avg_f.at(model));
        out << '\t' << buf << '\n';
    }
    return out.str();
}

// Scatter rows feeding a fragmentation-vs-accuracy plot.
inline std::string scatter_tsv(const AggregateReport& report) {
    std::ostringstream out;
    out << "model\tgroup\tmean_f\taccuracy\tn\n";
    char buf[64];
    for (const auto& c : report.cells) {
        std::snprintf(buf, sizeof(buf), "%.6f\t%.6f\t%zu", c.mean_f, c.accuracy, c.n);
        out << c.model << '\t' << c.group << '\t' << buf << '\n';
    }
    return out.str();
}

inline nlohmann::ordered_json report_to_json(const AggregateReport& report) {
    nlohmann::ordered_json j;
    j["grouping"] = report.grouping == GroupBy::Regime ? "regime" : "format";
    j["groups"] = report.groups;
    nlohmann::ordered_json cells = nlohmann::ordered_json::array();
    for (const auto& c : report.cells) {
        cells.push_back({{"model", c.model},
                         {"group", c.group},
                         {"mean_f", c.mean_f},
                         {"accuracy", c.accuracy},
                         {"n", c.n}});
    }
    j["cells"] = std::move(cells);
    nlohmann::ordered_json avg = nlohmann::ordered_json::object();
    for (const auto& [model, f] : report.model_avg_f) avg[model] = f;
    j["avg_f_per_model"] = std::move(avg);
    if (report.pearson_r) j["pearson_r"] = *report.pearson_r;
    if (report.spearman_rho) j["spearman_rho"] = *report.spearman_rho;
    if (!report.correlation_note.empty()) j["correlation_note"] = report.correlation_note;
    return j;
}

} // namespace datefrag
