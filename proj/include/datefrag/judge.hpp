// LLM-as-judge client: grading prompt construction, strict single-letter
// grade parsing, run metrics, and batched submission with bounded
// concurrency and retry. The transport is an interface so the whole suite
// runs against a scripted stub; the HTTP implementation speaks the
// chat-completions wire format.
#pragma once

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "datefrag/benchgen.hpp"
#include "datefrag/error.hpp"

namespace datefrag {

enum class GradeLetter { A, B, C };
enum class GradeMeaning { Correct, Incorrect, NotAttempted };

constexpr GradeMeaning meaning_of(GradeLetter letter) {
    switch (letter) {
        case GradeLetter::A: return GradeMeaning::Correct;
        case GradeLetter::B: return GradeMeaning::Incorrect;
        case GradeLetter::C: return GradeMeaning::NotAttempted;
    }
    return GradeMeaning::NotAttempted;
}

constexpr char to_char(GradeLetter letter) {
    switch (letter) {
        case GradeLetter::A: return 'A';
        case GradeLetter::B: return 'B';
        case GradeLetter::C: return 'C';
    }
    return '?';
}

constexpr std::string_view to_string(GradeMeaning m) {
    switch (m) {
        case GradeMeaning::Correct: return "CORRECT";
        case GradeMeaning::Incorrect: return "INCORRECT";
        case GradeMeaning::NotAttempted: return "NOT_ATTEMPTED";
    }
    return "?";
}

struct JudgeRequest {
    std::string example_id;
    std::string question;
    std::vector<std::string> gold_variants;
    std::string predicted_answer;
    std::string prompt_text;
};

inline std::string join(std::span<const std::string> parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

// The grading instructions. The three payload fields appear verbatim at the
// bottom; the reply must be exactly one capital letter.
inline std::string grading_prompt(const std::string& question,
                                  std::span<const std::string> gold,
                                  const std::string& prediction) {
    std::string p;
    p += "You are grading one model prediction against a set of gold answers.\n\n";
    p += "You receive:\n";
    p += "- Question: the task prompt shown to the model\n";
    p += "- Gold target: all answers that are considered correct\n";
    p += "- Predicted answer: the model's response\n\n";
    p += "Return exactly one capital letter:\n";
    p += "A  CORRECT        the prediction fully contains one gold variant without contradiction\n";
    p += "B  INCORRECT      the prediction contradicts or misses required information\n";
    p += "C  NOT_ATTEMPTED  the prediction refuses, guesses, or answers irrelevantly\n\n";
    p += "General rules:\n";
    p += "1. Match on meaning; ignore capitalisation, punctuation and word order.\n";
    p += "2. If any statement contradicts the gold target, grade B.\n";
    p += "3. Hedging is fine when the correct information is present and nothing incorrect is added.\n";
    p += "4. Partial answers are B. Typos that preserve meaning are allowed.\n\n";
    p += "Date-task rules:\n";
    p += "- Ambiguous dates: the gold target lists every valid interpretation; accept any of them.\n";
    p += "- Date arithmetic: the prediction must match the day, month and year of a listed variant;\n";
    p += "  any textual format is allowed.\n";
    p += "- Format-switch questions: any synonym of Yes/True or No/False is acceptable.\n";
    p += "- Numeric answers must match the gold number to the last shown significant digit.\n\n";
    p += "Question: " + question + "\n";
    p += "Gold target: " + join(gold, "; ") + "\n";
    p += "Predicted answer: " + prediction + "\n\n";
    p += "Now grade. Return exactly one capital letter: A or B or C. "
         "No additional text or punctuation.\n";
    return p;
}

inline JudgeRequest build_request(const std::string& example_id, const std::string& question,
                                  std::vector<std::string> gold_variants, std::string prediction) {
    if (gold_variants.empty()) {
        throw Error(ErrorCode::EmptyGold, "example '" + example_id + "' has no gold variants");
    }
    JudgeRequest req;
    req.example_id = example_id;
    req.question = question;
    req.gold_variants = std::move(gold_variants);
    req.predicted_answer = std::move(prediction);
    req.prompt_text = grading_prompt(question, req.gold_variants, req.predicted_answer);
    return req;
}

inline JudgeRequest build_request(const BenchmarkExample& example, std::string prediction) {
    return build_request(example.id, example.question, example.gold, std::move(prediction));
}

// Strict parse: one letter, case-insensitive, surrounding whitespace only.
inline std::optional<GradeLetter> try_parse_grade(std::string_view reply) {
    std::size_t b = 0, e = reply.size();
    while (b < e && std::isspace(static_cast<unsigned char>(reply[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(reply[e - 1]))) --e;
    if (e - b != 1) return std::nullopt;
    switch (reply[b]) {
        case 'A': case 'a': return GradeLetter::A;
        case 'B': case 'b': return GradeLetter::B;
        case 'C': case 'c': return GradeLetter::C;
        default: return std::nullopt;
    }
}

inline GradeLetter parse_grade(std::string_view reply) {
    if (auto g = try_parse_grade(reply)) return *g;
    throw Error(ErrorCode::Unparseable, "reply is not a single grade letter: '" +
                                            std::string(reply.substr(0, 80)) + "'");
}

// ---------------------------------------------------------------------------
// Run metrics: overall = A/(A+B+C), given-attempted = A/(A+B), f1 = harmonic
// mean of the two (0 whenever either is 0).

struct RunMetrics {
    double overall_accuracy = 0.0;
    double given_attempted_accuracy = 0.0;
    double f1 = 0.0;
    std::size_t count_a = 0, count_b = 0, count_c = 0;
};

inline RunMetrics score_run(std::span<const GradeLetter> grades) {
    if (grades.empty()) throw Error(ErrorCode::EmptyRun, "no grades to score");
    RunMetrics m;
    for (const auto g : grades) {
        m.count_a += g == GradeLetter::A;
        m.count_b += g == GradeLetter::B;
        m.count_c += g == GradeLetter::C;
    }
    const double a = static_cast<double>(m.count_a);
    const double attempted = a + static_cast<double>(m.count_b);
    m.overall_accuracy = a / static_cast<double>(grades.size());
    m.given_attempted_accuracy = attempted > 0 ? a / attempted : 0.0;
    const double o = m.overall_accuracy, g = m.given_attempted_accuracy;
    m.f1 = (o > 0 && g > 0) ? 2.0 * o * g / (o + g) : 0.0;
    return m;
}

// ---------------------------------------------------------------------------
// Transport

struct TransportReply {
    int status = 0;       // HTTP-style status; 200 carries a model reply
    std::string content;  // reply text on 200, error text otherwise
};

class JudgeTransport {
  public:
    virtual ~JudgeTransport() = default;
    virtual TransportReply send(const JudgeRequest& request, int attempt) = 0;
};

// Scripted stub keyed by (example_id, attempt); deterministic under any
// thread interleaving.
class ScriptedTransport : public JudgeTransport {
  public:
    explicit ScriptedTransport(std::string default_reply = "A")
        : default_reply_(std::move(default_reply)) {}

    void script(const std::string& example_id, int attempt, TransportReply reply) {
        scripts_[{example_id, attempt}] = std::move(reply);
    }

    TransportReply send(const JudgeRequest& request, int attempt) override {
        ++calls_;
        const auto it = scripts_.find({request.example_id, attempt});
        if (it != scripts_.end()) return it->second;
        return {200, default_reply_};
    }

    int calls() const { return calls_.load(); }

  private:
    std::map<std::pair<std::string, int>, TransportReply> scripts_;
    std::string default_reply_;
    std::atomic<int> calls_{0};
};

struct EndpointConfig {
    std::string url;                              // e.g. https://host/v1/chat/completions
    std::string model;
    std::string credential_env = "JUDGE_API_KEY"; // bearer token variable
    double temperature = 0.0;
    int timeout_seconds = 60;
};

class HttpTransport : public JudgeTransport {
  public:
    explicit HttpTransport(EndpointConfig config) : config_(std::move(config)) {
        const auto scheme_end = config_.url.find("://");
        if (scheme_end == std::string::npos) {
            throw Error(ErrorCode::NetworkFailure, "endpoint url must start with http(s)://");
        }
        const auto path_begin = config_.url.find('/', scheme_end + 3);
        base_ = path_begin == std::string::npos ? config_.url : config_.url.substr(0, path_begin);
        path_ = path_begin == std::string::npos ? "/" : config_.url.substr(path_begin);
        const char* key = config_.credential_env.empty() ? nullptr
                                                         : std::getenv(config_.credential_env.c_str());
        if (key) bearer_ = key;
    }

    TransportReply send(const JudgeRequest& request, int) override {
        nlohmann::json body;
        body["model"] = config_.model;
        body["temperature"] = config_.temperature;
        body["messages"] = {{{"role", "user"}, {"content", request.prompt_text}}};

        httplib::Client client(base_);
        client.set_read_timeout(config_.timeout_seconds, 0);
        client.set_connection_timeout(config_.timeout_seconds, 0);
        httplib::Headers headers;
        if (!bearer_.empty()) headers.emplace("Authorization", "Bearer " + bearer_);

        const auto res = client.Post(path_, headers, body.dump(), "application/json");
        if (!res) throw Error(ErrorCode::NetworkFailure, "no response from " + base_);
        if (res->status != 200) return {res->status, res->body};
        try {
            const auto j = nlohmann::json::parse(res->body);
            return {200, j.at("choices").at(0).at("message").at("content").get<std::string>()};
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::NetworkFailure, std::string("malformed response body: ") + e.what());
        }
    }

  private:
    EndpointConfig config_;
    std::string base_, path_, bearer_;
};

// ---------------------------------------------------------------------------
// Batched submission

struct SubmitOptions {
    int max_attempts = 5;
    int concurrency = 8;
    int backoff_base_ms = 500;       // doubled every retry
    int reasks_on_unparseable = 1;   // extra asks when a 200 reply fails the strict parse
};

struct JudgeOutcome {
    std::string example_id;
    std::optional<GradeLetter> grade; // absent = failed after retries
    int attempts = 0;
    std::string failure;              // empty when graded
    std::string last_reply;
};

struct TranscriptEntry {
    std::size_t request_index = 0;
    std::string example_id;
    int attempt = 0;
    int status = 0;
    std::string reply;
};

struct BatchResult {
    std::vector<JudgeOutcome> outcomes;       // one per request, input order
    std::vector<TranscriptEntry> transcript;  // sorted by (request, attempt)
};

inline BatchResult submit_batch(std::span<const JudgeRequest> requests, JudgeTransport& transport,
                                const SubmitOptions& options = {}) {
    BatchResult result;
    result.outcomes.resize(requests.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> abort{false};
    std::mutex transcript_mutex;
    std::mutex auth_mutex;
    std::string auth_message;

    auto backoff = [&](int attempt) {
        if (options.backoff_base_ms <= 0) return;
        const auto delay = std::chrono::milliseconds(options.backoff_base_ms) * (1 << (attempt - 1));
        std::this_thread::sleep_for(delay);
    };

    auto grade_one = [&](std::size_t idx) {
        const JudgeRequest& req = requests[idx];
        JudgeOutcome out;
        out.example_id = req.example_id;
        int reasks_used = 0;
        for (int attempt = 1; attempt <= options.max_attempts + reasks_used; ++attempt) {
            if (abort.load()) return;
            out.attempts = attempt;
            TransportReply reply;
            try {
                reply = transport.send(req, attempt);
            } catch (const Error& e) {
                {
                    std::lock_guard lk(transcript_mutex);
                    result.transcript.push_back({idx, req.example_id, attempt, 0, e.what()});
                }
                out.failure = e.what();
                backoff(attempt);
                continue;
            }
            {
                std::lock_guard lk(transcript_mutex);
                result.transcript.push_back({idx, req.example_id, attempt, reply.status, reply.content});
            }
            out.last_reply = reply.content;
            if (reply.status == 200) {
                if (auto grade = try_parse_grade(reply.content)) {
                    out.grade = *grade;
                    out.failure.clear();
                    result.outcomes[idx] = std::move(out);
                    return;
                }
                out.failure = "Unparseable: '" + reply.content.substr(0, 80) + "'";
                if (reasks_used < options.reasks_on_unparseable) {
                    ++reasks_used; // one immediate re-ask, no backoff
                    continue;
                }
                break;
            }
            if (reply.status == 401 || reply.status == 403) {
                {
                    std::lock_guard lk(auth_mutex);
                    if (auth_message.empty()) {
                        auth_message = "status " + std::to_string(reply.status) + " for example '" +
                                       req.example_id + "'";
                    }
                }
                abort.store(true);
                return;
            }
            out.failure = (reply.status == 429 ? "RateLimited" : "NetworkFailure") + std::string(": status ") +
                          std::to_string(reply.status);
            backoff(attempt);
        }
        result.outcomes[idx] = std::move(out);
    };

    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(std::max(options.concurrency, 1)), requests.size());
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            while (!abort.load()) {
                const std::size_t idx = next.fetch_add(1);
                if (idx >= requests.size()) break;
                grade_one(idx);
            }
        });
    }
    for (auto& t : pool) t.join();

    if (!auth_message.empty()) {
        throw Error(ErrorCode::AuthFailure, auth_message);
    }
    std::sort(result.transcript.begin(), result.transcript.end(),
              [](const TranscriptEntry& a, const TranscriptEntry& b) {
                  return a.request_index != b.request_index ? a.request_index < b.request_index
                                                            : a.attempt < b.attempt;
              });
    return result;
}

} // namespace datefrag
