// datefrag command line: tokenise, frag, gen, judge, probe, trace, report.
//
// Exit codes: 0 success, 1 validation error, 2 I/O error, 3 remote-service
// failure.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "datefrag/benchgen.hpp"
#include "datefrag/fragmentation.hpp"
#include "datefrag/judge.hpp"
#include "datefrag/nnls.hpp"
#include "datefrag/pathtrace.hpp"
#include "datefrag/probe.hpp"
#include "datefrag/report.hpp"
#include "datefrag/stats.hpp"
#include "datefrag/tokeniser.hpp"

namespace {

using namespace datefrag;

struct GlobalConfig {
    std::string catalogue_path;
    EndpointConfig judge_endpoint;
    SubmitOptions judge_submit;
    double probe_threshold = 0.80;
    PathScoreOptions trace;
    std::uint64_t seed = 0;
};

GlobalConfig load_config(const std::string& path) {
    GlobalConfig cfg;
    if (path.empty()) return cfg;
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open config '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::MalformedLine, path + ": " + e.what());
    }
    cfg.catalogue_path = j.value("catalogue", "");
    if (j.contains("judge")) {
        const auto& jj = j["judge"];
        cfg.judge_endpoint.url = jj.value("url", "");
        cfg.judge_endpoint.model = jj.value("model", "");
        cfg.judge_endpoint.credential_env = jj.value("credential_env", "JUDGE_API_KEY");
        cfg.judge_endpoint.temperature = jj.value("temperature", 0.0);
        cfg.judge_submit.max_attempts = jj.value("max_attempts", 5);
        cfg.judge_submit.concurrency = jj.value("concurrency", 8);
        cfg.judge_submit.backoff_base_ms = jj.value("backoff_base_ms", 500);
    }
    if (j.contains("probe")) cfg.probe_threshold = j["probe"].value("threshold", 0.80);
    if (j.contains("trace")) {
        const auto& jt = j["trace"];
        cfg.trace.weights.alpha = jt.value("alpha", 1.0);
        cfg.trace.weights.beta = jt.value("beta", 1.0);
        cfg.trace.weights.gamma = jt.value("gamma", 1.0);
        cfg.trace.weights.eta = jt.value("eta", 1.0);
        cfg.trace.weights.kappa = jt.value("kappa", 1.0);
        cfg.trace.tau = jt.value("tau", 0.2);
        cfg.trace.lambda = jt.value("lambda", 0.1);
        cfg.trace.eps_causal = jt.value("eps_causal", 0.01);
    }
    return cfg;
}

FormatCatalogue catalogue_for(const GlobalConfig& cfg) {
    if (cfg.catalogue_path.empty()) return FormatCatalogue::default_catalogue();
    return FormatCatalogue::load(cfg.catalogue_path);
}

// Registry of tokenisers usable by name: the rule-based baseline, the four
// family emulators, and any loaded definition files.
class TokeniserRegistry {
  public:
    explicit TokeniserRegistry(const std::vector<std::string>& definition_files) {
        for (const auto& file : definition_files) {
            auto def = load_tokeniser(file);
            const std::string name = def.name;
            loaded_.emplace(name, BpeTokeniser(std::move(def)));
        }
    }

    bool is_baseline(const std::string& name) const { return name == "baseline"; }

    const BpeTokeniser& get(const std::string& name) {
        const auto it = loaded_.find(name);
        if (it != loaded_.end()) return it->second;
        for (const FamilyStyle style : {FamilyStyle::SingleDigit, FamilyStyle::SingleDigitWithMarker,
                                        FamilyStyle::Chunk3, FamilyStyle::Chunk2}) {
            if (name == to_string(style)) {
                return loaded_.emplace(name, BpeTokeniser(make_family_emulator(style))).first->second;
            }
        }
        throw Error(ErrorCode::MalformedDefinition, "unknown tokeniser '" + name + "'");
    }

  private:
    std::map<std::string, BpeTokeniser> loaded_;
};

std::string join_tokens(const std::vector<std::string>& tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out += ' ';
        out += tokens[i];
    }
    return out;
}

std::ostream& open_out(std::ofstream& file, const std::string& path) {
    if (path.empty()) return std::cout;
    file.open(path);
    if (!file) throw Error(ErrorCode::IoFailure, "cannot write '" + path + "'");
    return file;
}

// ---------------------------------------------------------------------------

int cmd_tokenise(const GlobalConfig& cfg, const std::vector<std::string>& texts,
                 const std::string& tokeniser_name, const std::string& format_id,
                 const std::vector<std::string>& defs, const std::string& out_path) {
    const auto catalogue = catalogue_for(cfg);
    TokeniserRegistry registry(defs);
    std::ofstream file;
    std::ostream& out = open_out(file, out_path);
    out << "text\ttokeniser\ttokens\tcount\n";
    for (const auto& text : texts) {
        TokenisationRecord rec;
        if (registry.is_baseline(tokeniser_name)) {
            if (format_id.empty()) {
                throw Error(ErrorCode::SpanMismatch, "baseline tokenisation needs --format");
            }
            rec = baseline_tokenise(text, catalogue.require(format_id));
        } else {
            rec = registry.get(tokeniser_name).tokenise(text);
        }
        out << text << '\t' << tokeniser_name << '\t' << join_tokens(rec.tokens) << '\t'
            << rec.token_count << '\n';
    }
    return 0;
}

struct FragRow {
    std::string id, date, format_id, tokeniser;
};

std::vector<FragRow> read_frag_rows(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open '" + path + "'");
    std::vector<FragRow> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cols;
        std::stringstream ss(line);
        std::string col;
        while (std::getline(ss, col, '\t')) cols.push_back(col);
        FragRow row;
        if (cols.size() == 4) {
            row = {cols[0], cols[1], cols[2], cols[3]};
        } else if (cols.size() == 3) {
            row = {"row-" + std::to_string(line_no), cols[0], cols[1], cols[2]};
        } else {
            throw Error(ErrorCode::MalformedLine, path + ": line " + std::to_string(line_no) +
                                                      ": expected [id<TAB>]date<TAB>format<TAB>tokeniser");
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

// Ratings rows: split<TAB>delim<TAB>diff<TAB>theta<TAB>severity. Fits the
// metric weights to the severity column and prints them.
int cmd_learn_weights(const std::string& ratings_path) {
    std::ifstream in(ratings_path);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open '" + ratings_path + "'");
    std::vector<std::array<double, 4>> features;
    std::vector<double> targets;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::array<double, 4> row{};
        double rating = 0.0;
        if (!(ss >> row[0] >> row[1] >> row[2] >> row[3] >> rating)) {
            throw Error(ErrorCode::MalformedLine, ratings_path + ": line " +
                                                      std::to_string(line_no) +
                                                      ": expected split delim diff theta rating");
        }
        features.push_back(row);
        targets.push_back(rating);
    }
    const auto fit = learn_metric_weights(features, targets);
    std::printf("component\traw\tnormalised\n");
    const char* names[4] = {"split", "delimiter", "count_diff", "theta"};
    for (int c = 0; c < 4; ++c) {
        std::printf("%s\t%.6f\t%.6f\n", names[c], fit.raw[c], fit.normalised[c]);
    }
    std::printf("intercept\t%.6f\t-\n", fit.intercept);
    return 0;
}

int cmd_frag(const GlobalConfig& cfg, const std::string& rows_path,
             const std::vector<std::string>& defs, const std::string& out_path,
             const std::string& summary_path) {
    const auto catalogue = catalogue_for(cfg);
    TokeniserRegistry registry(defs);

    std::vector<BreakdownRow> breakdowns;
    for (const auto& row : read_frag_rows(rows_path)) {
        const DateFormat& format = catalogue.require(row.format_id);
        DateComponents comps;
        const CalendarDate date = format.parse(row.date, comps);
        const TokenisationRecord baseline = baseline_tokenise(row.date, comps);
        const TokenisationRecord model = registry.is_baseline(row.tokeniser)
                                             ? baseline
                                             : registry.get(row.tokeniser).tokenise(row.date);
        BreakdownRow out;
        out.example_id = row.id;
        out.date_text = row.date;
        out.format_id = row.format_id;
        out.tokeniser = row.tokeniser;
        out.regime = regime_of(date, RegimeScheme::Eval);
        out.breakdown = fragmentation_ratio(model, baseline, comps);
        breakdowns.push_back(std::move(out));
    }
    if (!out_path.empty()) write_breakdown_rows(breakdowns, out_path);

    // Table-2 shaped summary: mean F per tokeniser and regime, with an
    // overall average column.
    struct Acc {
        double sum = 0;
        std::size_t n = 0;
    };
    std::map<std::string, std::map<Regime, Acc>> table;
    std::map<std::string, Acc> avg;
    for (const auto& b : breakdowns) {
        auto& cell = table[b.tokeniser][b.regime];
        cell.sum += b.breakdown.f;
        ++cell.n;
        auto& a = avg[b.tokeniser];
        a.sum += b.breakdown.f;
        ++a.n;
    }
    std::ofstream file;
    std::ostream& out = open_out(file, summary_path);
    out << "tokeniser\tpast\tnear_past\tpresent\tfuture\tavg\n";
    char buf[32];
    for (const auto& [name, cells] : table) {
        out << name;
        for (const Regime r : {Regime::Past, Regime::NearPast, Regime::Present, Regime::Future}) {
            const auto it = cells.find(r);
            if (it == cells.end()) {
                out << "\t-";
            } else {
                std::snprintf(buf, sizeof(buf), "%.4f", it->second.sum / it->second.n);
                out << '\t' << buf;
            }
        }
        std::snprintf(buf, sizeof(buf), "%.4f", avg[name].sum / avg[name].n);
        out << '\t' << buf << '\n';
    }
    return 0;
}

int cmd_gen(const GlobalConfig& cfg, const std::string& task_name, const std::string& seeds_path,
            long synth_n, const std::string& out_path, const std::string& dump_seeds_path) {
    const auto catalogue = catalogue_for(cfg);
    const Task task = task_from_string(task_name);
    std::vector<SeedRecord> seeds;
    if (!seeds_path.empty()) {
        seeds = read_seeds(seeds_path);
    } else if (synth_n > 0) {
        seeds = synthetic_seeds(task, static_cast<std::size_t>(synth_n), cfg.seed);
    } else {
        throw Error(ErrorCode::IoFailure, "gen needs --seeds FILE or --synth N");
    }
    if (!dump_seeds_path.empty()) write_seeds(seeds, dump_seeds_path);

    std::vector<BenchmarkExample> examples;
    switch (task) {
        case Task::Context: examples = build_context_split(seeds, catalogue); break;
        case Task::Switch: examples = build_switch_split(seeds, catalogue); break;
        case Task::Arithmetic: examples = build_arithmetic_split(seeds, catalogue); break;
    }
    write_jsonl(examples, out_path);
    std::cerr << "wrote " << examples.size() << " examples to " << out_path << "\n";
    return 0;
}

int cmd_judge(const GlobalConfig& cfg, const std::string& bench_path, const std::string& pred_path,
              const std::string& grades_path, const std::string& metrics_path,
              const std::string& model_name, const std::string& mock_letter,
              const std::string& url_flag, const std::string& model_flag,
              const std::string& transcript_path) {
    const auto bench = read_jsonl(bench_path);
    std::map<std::string, const BenchmarkExample*> by_id;
    for (const auto& ex : bench) by_id[ex.id] = &ex;

    // predictions: JSONL {"id": ..., "prediction": ...}
    std::ifstream in(pred_path);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open '" + pred_path + "'");
    std::vector<JudgeRequest> requests;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            const std::string id = j.at("id").get<std::string>();
            const auto it = by_id.find(id);
            if (it == by_id.end()) {
                throw Error(ErrorCode::JoinMismatch, "prediction id '" + id + "' not in benchmark");
            }
            requests.push_back(build_request(*it->second, j.at("prediction").get<std::string>()));
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::MalformedLine,
                        pred_path + ": line " + std::to_string(line_no) + ": " + e.what());
        }
    }

    EndpointConfig endpoint = cfg.judge_endpoint;
    if (!url_flag.empty()) endpoint.url = url_flag;
    if (!model_flag.empty()) endpoint.model = model_flag;

    std::unique_ptr<JudgeTransport> transport;
    if (!mock_letter.empty()) {
        transport = std::make_unique<ScriptedTransport>(mock_letter);
    } else {
        if (endpoint.url.empty()) {
            throw Error(ErrorCode::NetworkFailure,
                        "no judge endpoint configured; pass --url or use --mock LETTER");
        }
        transport = std::make_unique<HttpTransport>(endpoint);
    }
    const BatchResult result = submit_batch(requests, *transport, cfg.judge_submit);

    std::vector<GradeRow> grade_rows;
    std::vector<GradeLetter> letters;
    std::ofstream grades_out(grades_path);
    if (!grades_out) throw Error(ErrorCode::IoFailure, "cannot write '" + grades_path + "'");
    for (const auto& o : result.outcomes) {
        nlohmann::ordered_json j;
        j["id"] = o.example_id;
        j["model"] = model_name;
        if (o.grade) {
            j["letter"] = std::string(1, to_char(*o.grade));
            j["meaning"] = std::string(to_string(meaning_of(*o.grade)));
            letters.push_back(*o.grade);
            grade_rows.push_back({o.example_id, model_name, *o.grade});
        } else {
            j["letter"] = nullptr;
            j["failure"] = o.failure;
        }
        j["attempts"] = o.attempts;
        grades_out << j.dump() << '\n';
    }

    nlohmann::ordered_json metrics;
    if (!letters.empty()) {
        const RunMetrics m = score_run(letters);
        metrics["overall_accuracy"] = m.overall_accuracy;
        metrics["given_attempted_accuracy"] = m.given_attempted_accuracy;
        metrics["f1"] = m.f1;
        metrics["counts"] = {{"A", m.count_a},
                             {"B", m.count_b},
                             {"C", m.count_c},
                             {"failed", result.outcomes.size() - letters.size()}};
    }
    // stratified by task and by regime
    auto stratified = [&](auto key_of) {
        std::map<std::string, std::vector<GradeLetter>> buckets;
        for (const auto& o : result.outcomes) {
            if (!o.grade) continue;
            buckets[key_of(*by_id.at(o.example_id))].push_back(*o.grade);
        }
        nlohmann::ordered_json out = nlohmann::ordered_json::object();
        for (const auto& [key, ls] : buckets) {
            const RunMetrics m = score_run(ls);
            out[key] = {{"overall_accuracy", m.overall_accuracy},
                        {"given_attempted_accuracy", m.given_attempted_accuracy},
                        {"f1", m.f1},
                        {"n", ls.size()}};
        }
        return out;
    };
    metrics["by_task"] =
        stratified([](const BenchmarkExample& ex) { return std::string(to_string(ex.task)); });
    metrics["by_regime"] =
        stratified([](const BenchmarkExample& ex) { return std::string(to_string(ex.regime)); });

    std::ofstream metrics_out(metrics_path);
    if (!metrics_out) throw Error(ErrorCode::IoFailure, "cannot write '" + metrics_path + "'");
    metrics_out << metrics.dump(2) << '\n';

    if (!transcript_path.empty()) {
        std::ofstream tout(transcript_path);
        if (!tout) throw Error(ErrorCode::IoFailure, "cannot write '" + transcript_path + "'");
        for (const auto& entry : result.transcript) {
            nlohmann::ordered_json j;
            j["id"] = entry.example_id;
            j["attempt"] = entry.attempt;
            j["status"] = entry.status;
            j["reply"] = entry.reply;
            tout << j.dump() << '\n';
        }
    }
    std::cerr << "judged " << letters.size() << "/" << result.outcomes.size() << " predictions\n";
    return 0;
}

int cmd_probe(const GlobalConfig& cfg, const std::string& bundle_path, double threshold,
              const std::string& out_path, bool make_pairs, int lo, int hi, long n,
              const std::string& pairs_out) {
    if (make_pairs) {
        const auto ds = build_probe_dataset(lo, hi, static_cast<std::size_t>(n), cfg.seed);
        write_probe_dataset(ds, pairs_out);
        std::cerr << "wrote " << ds.pairs.size() << " pairs to " << pairs_out << "\n";
        return 0;
    }
    if (bundle_path.empty()) throw Error(ErrorCode::IoFailure, "probe needs --bundle FILE");
    const auto bundle = load_embedding_bundle(bundle_path);
    ProbeOptions options;
    options.seed = cfg.seed;
    const LayerCurve curve = layer_curve(bundle, threshold, options);
    std::ofstream file;
    std::ostream& out = open_out(file, out_path);
    out << "# threshold\t" << threshold << "\n";
    out << "# tcp\t" << (curve.tcp ? std::to_string(*curve.tcp) : "none") << "\n";
    out << "layer\taccuracy\n";
    char buf[32];
    for (std::size_t l = 0; l < curve.accuracy.size(); ++l) {
        std::snprintf(buf, sizeof(buf), "%.6f", curve.accuracy[l]);
        out << l << '\t' << buf << '\n';
    }
    return 0;
}

int cmd_trace(const GlobalConfig& cfg, const std::string& bundle_path,
              const std::vector<double>& weights, double tau, double lambda, double eps,
              bool gap_linear, bool raw_logits, const std::string& paths_out,
              const std::string& anchors_out, const std::string& grid_out) {
    const auto bundle = load_activation_bundle(bundle_path);
    PathScoreOptions options = cfg.trace;
    if (!weights.empty()) {
        if (weights.size() != 5) {
            throw Error(ErrorCode::DimensionMismatch, "--weights needs 5 values: alpha,beta,gamma,eta,kappa");
        }
        options.weights = {weights[0], weights[1], weights[2], weights[3], weights[4]};
    }
    if (tau > 0) options.tau = tau;
    if (lambda >= 0) options.lambda = lambda;
    if (eps >= 0) options.eps_causal = eps;
    options.linear_gap = gap_linear;
    options.softmax_activation = !raw_logits;

    const auto best = best_path(bundle, options);
    std::ofstream pfile;
    std::ostream& pout = open_out(pfile, paths_out);
    pout << "path\ts_order\ts_act\ts_causal\ts_gap\ts_final\ttotal\tbest\n";
    char buf[160];
    for (const auto& candidate : enumerate_paths(bundle)) {
        const auto scored = score_path(candidate, bundle, options);
        std::string path_str;
        for (std::size_t i = 0; i < scored.concept_sequence.size(); ++i) {
            if (i) path_str += "->";
            path_str += bundle.concepts[scored.concept_sequence[i]];
        }
        std::snprintf(buf, sizeof(buf), "%.9f\t%.9f\t%.9f\t%.9f\t%.9f\t%.9f", scored.s_order,
                      scored.s_act, scored.s_causal, scored.s_gap, scored.s_final, scored.total);
        pout << path_str << '\t' << buf << '\t'
             << (scored.concept_sequence == best.concept_sequence ? 1 : 0) << '\n';
    }

    std::ofstream afile;
    std::ostream& aout = open_out(afile, anchors_out);
    aout << "concept\tlayer\tposition\tactivation\n";
    for (std::size_t c = 0; c < bundle.concept_count(); ++c) {
        const auto anchor = concept_anchors(bundle, c, options.softmax_activation);
        std::snprintf(buf, sizeof(buf), "%.9f", anchor.activation);
        aout << bundle.concepts[c] << '\t' << anchor.layer << '\t' << anchor.position << '\t' << buf
             << '\n';
    }

    // full layer x position grid per concept, for heat-map style plots
    if (!grid_out.empty()) {
        std::ofstream gfile;
        std::ostream& gout = open_out(gfile, grid_out);
        gout << "concept\tlayer\tposition\ts\tbase_prob\tperturbed_prob\n";
        for (std::size_t c = 0; c < bundle.concept_count(); ++c) {
            for (std::size_t l = 0; l < bundle.layers; ++l) {
                for (std::size_t p = 0; p < bundle.positions(); ++p) {
                    std::snprintf(buf, sizeof(buf), "%.9f\t%.9f\t%.9f", bundle.s_at(l, p, c),
                                  bundle.base_at(p, c), bundle.perturbed_at(p, c));
                    gout << bundle.concepts[c] << '\t' << l << '\t' << p << '\t' << buf << '\n';
                }
            }
        }
    }
    return 0;
}

int cmd_report(const std::string& frag_path, const std::string& grades_path,
               const std::string& model_default, const std::string& group_name,
               const std::string& out_prefix) {
    const auto breakdowns = read_breakdown_rows(frag_path);
    const auto grades = read_grade_rows(grades_path, model_default);
    const GroupBy grouping = group_name == "format" ? GroupBy::Format : GroupBy::Regime;
    const AggregateReport report = aggregate_report(breakdowns, grades, grouping);

    const std::string mean_f = mean_f_table_tsv(report);
    const std::string scatter = scatter_tsv(report);
    std::cout << mean_f << "\n" << scatter;
    if (report.pearson_r) std::cout << "pearson_r\t" << *report.pearson_r << "\n";
    if (report.spearman_rho) std::cout << "spearman_rho\t" << *report.spearman_rho << "\n";
    if (!report.correlation_note.empty()) std::cout << "note\t" << report.correlation_note << "\n";

    if (!out_prefix.empty()) {
        std::ofstream(out_prefix + ".mean_f.tsv") << mean_f;
        std::ofstream(out_prefix + ".scatter.tsv") << scatter;
        std::ofstream(out_prefix + ".report.json") << report_to_json(report).dump(2) << '\n';
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"date tokenisation fragmentation laboratory"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed = 0;
    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--seed", seed, "random seed")->default_val(0);

    // tokenise
    auto* tok = app.add_subcommand("tokenise", "tokenise date strings");
    std::vector<std::string> tok_texts;
    std::string tok_name = "baseline", tok_format, tok_out;
    std::vector<std::string> tok_defs;
    tok->add_option("--text", tok_texts, "date string(s)")->required();
    tok->add_option("--tokeniser", tok_name,
                    "baseline | single_digit | single_digit_with_marker | chunk2 | chunk3 | "
                    "name from --def");
    tok->add_option("--format", tok_format, "format id (baseline only)");
    tok->add_option("--def", tok_defs, "tokeniser definition file(s)");
    tok->add_option("--out", tok_out, "output TSV (default stdout)");

    // frag
    auto* frag = app.add_subcommand("frag", "fragmentation breakdowns for a batch of rows");
    std::string frag_rows, frag_out, frag_summary, frag_ratings;
    std::vector<std::string> frag_defs;
    frag->add_option("--rows", frag_rows, "TSV rows: [id<TAB>]date<TAB>format<TAB>tokeniser");
    frag->add_option("--def", frag_defs, "tokeniser definition file(s)");
    frag->add_option("--out", frag_out, "breakdown TSV output");
    frag->add_option("--summary", frag_summary, "mean-F summary TSV (default stdout)");
    frag->add_option("--learn-weights", frag_ratings,
                     "fit metric weights to a severity-rating TSV instead "
                     "(split delim diff theta rating)");

    // gen
    auto* gen = app.add_subcommand("gen", "generate a benchmark split");
    std::string gen_task, gen_seeds, gen_out, gen_dump;
    long gen_synth = 0;
    gen->add_option("--task", gen_task, "context | switch | arithmetic")->required();
    gen->add_option("--seeds", gen_seeds, "seed JSONL file");
    gen->add_option("--synth", gen_synth, "generate N synthetic seeds instead of --seeds");
    gen->add_option("--out", gen_out, "output benchmark JSONL")->required();
    gen->add_option("--dump-seeds", gen_dump, "also write the seeds used to this JSONL");

    // judge
    auto* judge = app.add_subcommand("judge", "grade predictions with the judge endpoint");
    std::string judge_bench, judge_pred, judge_grades, judge_metrics, judge_model = "model";
    std::string judge_mock, judge_url, judge_model_name;
    judge->add_option("--bench", judge_bench, "benchmark JSONL")->required();
    judge->add_option("--pred", judge_pred, "predictions JSONL: {id, prediction}")->required();
    judge->add_option("--out-grades", judge_grades, "grades JSONL output")->required();
    judge->add_option("--out-metrics", judge_metrics, "metrics JSON output")->required();
    judge->add_option("--model", judge_model, "model name stamped on grades");
    judge->add_option("--mock", judge_mock, "offline stub transport returning this letter");
    judge->add_option("--url", judge_url, "judge endpoint url");
    judge->add_option("--judge-model", judge_model_name, "judge model name");
    std::string judge_transcript;
    judge->add_option("--out-transcript", judge_transcript, "request/reply transcript JSONL");

    // probe
    auto* probe = app.add_subcommand("probe", "layer curve / probe dataset");
    std::string probe_bundle, probe_out, probe_pairs_out = "pairs.jsonl";
    double probe_threshold = -1.0;
    bool probe_make_pairs = false;
    int probe_lo = 1600, probe_hi = 2010;
    long probe_n = 1000;
    probe->add_option("--bundle", probe_bundle, "embedding bundle file");
    probe->add_option("--threshold", probe_threshold, "compensation-point threshold (default 0.8)");
    probe->add_option("--out", probe_out, "layer curve TSV (default stdout)");
    probe->add_flag("--make-pairs", probe_make_pairs, "build a probe date-pair dataset instead");
    probe->add_option("--lo", probe_lo, "first year (with --make-pairs)");
    probe->add_option("--hi", probe_hi, "last year (with --make-pairs)");
    probe->add_option("--n", probe_n, "pair count (with --make-pairs)");
    probe->add_option("--pairs-out", probe_pairs_out, "pairs JSONL output (with --make-pairs)");

    // trace
    auto* trace = app.add_subcommand("trace", "score reasoning paths over an activation bundle");
    std::string trace_bundle, trace_paths_out, trace_anchors_out;
    std::vector<double> trace_weights;
    double trace_tau = -1, trace_lambda = -1, trace_eps = -1;
    bool trace_gap_linear = false, trace_raw = false;
    trace->add_option("--bundle", trace_bundle, "activation bundle file")->required();
    trace->add_option("--weights", trace_weights, "alpha beta gamma eta kappa")->expected(5);
    trace->add_option("--tau", trace_tau, "activation saturation threshold");
    trace->add_option("--lambda", trace_lambda, "gap multiplier");
    trace->add_option("--eps-causal", trace_eps, "importance threshold for the coverage term");
    trace->add_flag("--gap-linear", trace_gap_linear, "use the linear 1 - lambda*gap form");
    trace->add_flag("--raw-logits", trace_raw, "use raw logits instead of softmax activations");
    trace->add_option("--paths-out", trace_paths_out, "scored path table TSV (default stdout)");
    trace->add_option("--anchors-out", trace_anchors_out, "anchor table TSV (default stdout)");
    std::string trace_grid_out;
    trace->add_option("--grid-out", trace_grid_out,
                      "full layer x position grid per concept (plot data)");

    // report
    auto* report = app.add_subcommand("report", "join breakdowns with grades and aggregate");
    std::string rep_frag, rep_grades, rep_model = "model", rep_group = "regime", rep_prefix;
    report->add_option("--frag", rep_frag, "breakdown TSV (from frag --out)")->required();
    report->add_option("--grades", rep_grades, "grades JSONL (from judge)")->required();
    report->add_option("--model", rep_model, "model name for grade rows lacking one");
    report->add_option("--group", rep_group, "regime | format");
    report->add_option("--out-prefix", rep_prefix, "write <prefix>.mean_f.tsv/.scatter.tsv/.report.json");

    CLI11_PARSE(app, argc, argv);

    try {
        GlobalConfig cfg = load_config(config_path);
        cfg.seed = seed;
        if (probe_threshold <= 0) probe_threshold = cfg.probe_threshold;

        if (tok->parsed()) {
            return cmd_tokenise(cfg, tok_texts, tok_name, tok_format, tok_defs, tok_out);
        }
        if (frag->parsed()) {
            if (!frag_ratings.empty()) return cmd_learn_weights(frag_ratings);
            if (frag_rows.empty()) {
                throw Error(ErrorCode::IoFailure, "frag needs --rows FILE or --learn-weights FILE");
            }
            return cmd_frag(cfg, frag_rows, frag_defs, frag_out, frag_summary);
        }
        if (gen->parsed()) {
            return cmd_gen(cfg, gen_task, gen_seeds, gen_synth, gen_out, gen_dump);
        }
        if (judge->parsed()) {
            return cmd_judge(cfg, judge_bench, judge_pred, judge_grades, judge_metrics, judge_model,
                             judge_mock, judge_url, judge_model_name, judge_transcript);
        }
        if (probe->parsed()) {
            return cmd_probe(cfg, probe_bundle, probe_threshold, probe_out, probe_make_pairs,
                             probe_lo, probe_hi, probe_n, probe_pairs_out);
        }
        if (trace->parsed()) {
            return cmd_trace(cfg, trace_bundle, trace_weights, trace_tau, trace_lambda, trace_eps,
                             trace_gap_linear, trace_raw, trace_paths_out, trace_anchors_out,
                             trace_grid_out);
        }
        if (report->parsed()) {
            return cmd_report(rep_frag, rep_grades, rep_model, rep_group, rep_prefix);
        }
    } catch (const datefrag::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        switch (e.category()) {
            case ErrorCategory::Validation: return 1;
            case ErrorCategory::Io: return 2;
            case ErrorCategory::Remote: return 3;
        }
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
