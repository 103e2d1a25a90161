// Merge-rule (BPE) tokenisation over date strings, the rule-based baseline
// splitter, and the synthetic family emulators.
//
// Merge semantics: within each pre-tokenised unit, repeatedly find the
// adjacent pair with the lowest merge index and fuse its leftmost
// occurrence. Pre-tokenisation is minimal: an optional digit-run chunker
// (digit runs split left-to-right into fixed-width pieces with a shorter
// tail) and an optional prepended marker token carrying an empty byte span.
#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "datefrag/error.hpp"
#include "datefrag/format.hpp"

namespace datefrag {

struct TokeniserDefinition {
    std::string name;
    bool byte_level = false;
    std::string prepend_marker;                              // empty = none
    int digit_chunk = 0;                                     // 0 = off, else 2 or 3
    std::unordered_map<std::string, int> vocab;
    std::vector<std::pair<std::string, std::string>> merges; // priority = list order
};

struct TokenisationRecord {
    std::string source;
    std::vector<std::string> tokens;
    std::vector<ByteSpan> offsets; // marker tokens carry {0,0}
    std::size_t token_count = 0;
    std::string reconstructed;     // tokens concatenated, markers stripped
};

inline void validate_definition(const TokeniserDefinition& def) {
    if (def.digit_chunk != 0 && def.digit_chunk != 2 && def.digit_chunk != 3) {
        throw Error(ErrorCode::MalformedDefinition,
                    "digit_chunk must be 0, 2 or 3 (got " + std::to_string(def.digit_chunk) + ")");
    }
    for (const auto& [left, right] : def.merges) {
        if (!def.vocab.count(left + right)) {
            throw Error(ErrorCode::MergeNotInVocab,
                        "merge ('" + left + "','" + right + "') produces '" + left + right +
                            "' which is not in vocab");
        }
    }
}

inline TokeniserDefinition parse_tokeniser_json(const nlohmann::json& j, const std::string& origin) {
    TokeniserDefinition def;
    try {
        def.name = j.at("name").get<std::string>();
        def.byte_level = j.value("byte_level", false);
        if (j.contains("prepend_marker") && !j["prepend_marker"].is_null()) {
            def.prepend_marker = j["prepend_marker"].get<std::string>();
        }
        def.digit_chunk = j.value("digit_chunk", 0);
        for (const auto& [token, id] : j.at("vocab").items()) {
            def.vocab.emplace(token, id.get<int>());
        }
        for (const auto& pair : j.at("merges")) {
            if (!pair.is_array() || pair.size() != 2) {
                throw Error(ErrorCode::MalformedDefinition, origin + ": merge entries must be pairs");
            }
            def.merges.emplace_back(pair[0].get<std::string>(), pair[1].get<std::string>());
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::MalformedDefinition, origin + ": " + e.what());
    }
    validate_definition(def);
    return def;
}

inline TokeniserDefinition load_tokeniser(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open tokeniser '" + path.string() + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::MalformedDefinition, path.string() + ": " + e.what());
    }
    return parse_tokeniser_json(j, path.string());
}

inline void save_tokeniser(const TokeniserDefinition& def, const std::filesystem::path& path) {
    nlohmann::ordered_json j;
    j["name"] = def.name;
    j["byte_level"] = def.byte_level;
    if (def.prepend_marker.empty()) j["prepend_marker"] = nullptr;
    else j["prepend_marker"] = def.prepend_marker;
    j["digit_chunk"] = def.digit_chunk;
    nlohmann::ordered_json vocab = nlohmann::ordered_json::object();
    for (const auto& [token, id] : def.vocab) vocab[token] = id;
    j["vocab"] = std::move(vocab);
    nlohmann::ordered_json merges = nlohmann::ordered_json::array();
    for (const auto& [l, r] : def.merges) merges.push_back({l, r});
    j["merges"] = std::move(merges);
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write tokeniser '" + path.string() + "'");
    out << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------

class BpeTokeniser {
  public:
    explicit BpeTokeniser(TokeniserDefinition def) : def_(std::move(def)) {
        validate_definition(def_);
        ranks_.reserve(def_.merges.size());
        for (std::size_t i = 0; i < def_.merges.size(); ++i) {
            const auto& [l, r] = def_.merges[i];
            ranks_.emplace(l + '\x01' + r, i); // first occurrence keeps priority
        }
    }

    const TokeniserDefinition& definition() const { return def_; }

    TokenisationRecord tokenise(std::string_view text) const {
        if (text.empty()) throw std::invalid_argument("tokenise: text must be non-empty");

        std::vector<RawPiece> out;
        if (!def_.prepend_marker.empty()) out.push_back({def_.prepend_marker, 0, 0});

        for (const auto& [begin, end] : units_of(text)) {
            std::vector<RawPiece> pieces = base_symbols(text, begin, end);
            merge(pieces);
            out.insert(out.end(), std::make_move_iterator(pieces.begin()),
                       std::make_move_iterator(pieces.end()));
        }

        TokenisationRecord rec;
        rec.source = std::string(text);
        for (const auto& p : out) {
            rec.tokens.push_back(p.sym);
            rec.offsets.push_back({p.begin, p.end});
            if (p.end > p.begin) rec.reconstructed += p.sym;
        }
        rec.token_count = rec.tokens.size();
        return rec;
    }

  private:
    struct RawPiece {
        std::string sym;
        std::size_t begin, end;
    };

    std::vector<std::pair<std::size_t, std::size_t>> units_of(std::string_view text) const {
        std::vector<std::pair<std::size_t, std::size_t>> units;
        if (def_.digit_chunk <= 0) {
            units.emplace_back(0, text.size());
            return units;
        }
        const std::size_t w = static_cast<std::size_t>(def_.digit_chunk);
        std::size_t i = 0;
        while (i < text.size()) {
            if (std::isdigit(static_cast<unsigned char>(text[i]))) {
                std::size_t j = i;
                while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
                for (std::size_t k = i; k < j; k += w) units.emplace_back(k, std::min(k + w, j));
                i = j;
            } else {
                std::size_t j = i;
                while (j < text.size() && !std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
                units.emplace_back(i, j);
                i = j;
            }
        }
        return units;
    }

    std::vector<RawPiece> base_symbols(std::string_view text, std::size_t begin, std::size_t end) const {
        std::vector<RawPiece> pieces;
        std::size_t i = begin;
        while (i < end) {
            // one UTF-8 code point
            const unsigned char lead = static_cast<unsigned char>(text[i]);
            std::size_t n = lead < 0x80 ? 1 : lead < 0xE0 ? 2 : lead < 0xF0 ? 3 : 4;
            n = std::min(n, end - i);
            std::string sym(text.substr(i, n));
            if (!def_.vocab.count(sym)) {
                if (!def_.byte_level) {
                    throw Error(ErrorCode::UnknownSymbol,
                                "symbol '" + sym + "' not in vocab and byte_level is off");
                }
                for (std::size_t b = 0; b < n; ++b) {
                    pieces.push_back({std::string(1, text[i + b]), i + b, i + b + 1});
                }
            } else {
                pieces.push_back({std::move(sym), i, i + n});
            }
            i += n;
        }
        return pieces;
    }

    void merge(std::vector<RawPiece>& pieces) const {
        if (ranks_.empty()) return;
        while (pieces.size() > 1) {
            std::size_t best_rank = std::numeric_limits<std::size_t>::max();
            std::size_t best_pos = 0;
            for (std::size_t i = 0; i + 1 < pieces.size(); ++i) {
                const auto it = ranks_.find(pieces[i].sym + '\x01' + pieces[i + 1].sym);
                if (it != ranks_.end() && it->second < best_rank) {
                    best_rank = it->second;
                    best_pos = i;
                }
            }
            if (best_rank == std::numeric_limits<std::size_t>::max()) break;
            pieces[best_pos].sym += pieces[best_pos + 1].sym;
            pieces[best_pos].end = pieces[best_pos + 1].end;
            pieces.erase(pieces.begin() + static_cast<std::ptrdiff_t>(best_pos) + 1);
        }
    }

    TokeniserDefinition def_;
    std::unordered_map<std::string, std::size_t> ranks_;
};

inline TokenisationRecord tokenise(const TokeniserDefinition& def, std::string_view text) {
    return BpeTokeniser(def).tokenise(text);
}

// ---------------------------------------------------------------------------
// Rule-based baseline: emits exactly the year/month/day substrings plus each
// delimiter as its own token, in source order.

inline TokenisationRecord baseline_tokenise(std::string_view text, const DateComponents& comps) {
    std::vector<ByteSpan> spans;
    spans.push_back(comps.year_span);
    if (comps.month_span) spans.push_back(*comps.month_span);
    spans.push_back(comps.day_span);
    spans.insert(spans.end(), comps.delimiter_spans.begin(), comps.delimiter_spans.end());
    std::sort(spans.begin(), spans.end(),
              [](const ByteSpan& a, const ByteSpan& b) { return a.begin < b.begin; });

    std::size_t cursor = 0;
    for (const auto& s : spans) {
        if (s.begin != cursor || s.end < s.begin || s.end > text.size() || s.size() == 0) {
            throw Error(ErrorCode::SpanMismatch,
                        "component spans do not tile '" + std::string(text) + "'");
        }
        cursor = s.end;
    }
    if (cursor != text.size()) {
        throw Error(ErrorCode::SpanMismatch, "component spans do not cover '" + std::string(text) + "'");
    }

    TokenisationRecord rec;
    rec.source = std::string(text);
    for (const auto& s : spans) {
        rec.tokens.emplace_back(text.substr(s.begin, s.size()));
        rec.offsets.push_back(s);
        rec.reconstructed += rec.tokens.back();
    }
    rec.token_count = rec.tokens.size();
    return rec;
}

inline TokenisationRecord baseline_tokenise(std::string_view text, const DateFormat& format) {
    return baseline_tokenise(text, format.components_of(text));
}

// ---------------------------------------------------------------------------
// Family emulators: the four digit-segmentation behaviours observed across
// production tokeniser families, reproduced without any external vocab
// downloads.

enum class FamilyStyle { SingleDigit, SingleDigitWithMarker, Chunk3, Chunk2 };

constexpr std::string_view to_string(FamilyStyle s) {
    switch (s) {
        case FamilyStyle::SingleDigit: return "single_digit";
        case FamilyStyle::SingleDigitWithMarker: return "single_digit_with_marker";
        case FamilyStyle::Chunk3: return "chunk3";
        case FamilyStyle::Chunk2: return "chunk2";
    }
    return "?";
}

inline FamilyStyle family_from_string(std::string_view s) {
    if (s == "single_digit") return FamilyStyle::SingleDigit;
    if (s == "single_digit_with_marker") return FamilyStyle::SingleDigitWithMarker;
    if (s == "chunk3") return FamilyStyle::Chunk3;
    if (s == "chunk2") return FamilyStyle::Chunk2;
    throw Error(ErrorCode::MalformedDefinition, "unknown family '" + std::string(s) + "'");
}

inline TokeniserDefinition make_family_emulator(FamilyStyle style) {
    TokeniserDefinition def;
    def.name = std::string(to_string(style));
    def.byte_level = true;

    auto add_digit_tokens = [&](int max_len) {
        int id = static_cast<int>(def.vocab.size());
        std::vector<std::string> prev;
        for (char c = '0'; c <= '9'; ++c) {
            def.vocab.emplace(std::string(1, c), id++);
            prev.emplace_back(1, c);
        }
        std::vector<std::string> ones = prev;
        for (int len = 2; len <= max_len; ++len) {
            std::vector<std::string> cur;
            for (const auto& p : prev) {
                for (const auto& d : ones) {
                    cur.push_back(p + d);
                    def.vocab.emplace(cur.back(), id++);
                }
            }
            prev = std::move(cur);
        }
    };
    auto add_pair_merges = [&](int left_len, int right_len) {
        for (const auto& [tok, ignored] : std::map<std::string, int>(def.vocab.begin(), def.vocab.end())) {
            (void)ignored;
            if (tok.size() != static_cast<std::size_t>(left_len + right_len)) continue;
            def.merges.emplace_back(tok.substr(0, static_cast<std::size_t>(left_len)),
                                    tok.substr(static_cast<std::size_t>(left_len)));
        }
    };

    switch (style) {
        case FamilyStyle::SingleDigit:
            break;
        case FamilyStyle::SingleDigitWithMarker:
            def.prepend_marker = "_";
            def.vocab.emplace("_", 0);
            break;
        case FamilyStyle::Chunk2:
            def.digit_chunk = 2;
            add_digit_tokens(2);
            add_pair_merges(1, 1);
            break;
        case FamilyStyle::Chunk3:
            def.digit_chunk = 3;
            add_digit_tokens(3);
            add_pair_merges(1, 1);
            add_pair_merges(2, 1);
            add_pair_merges(1, 2);
            break;
    }
    validate_definition(def);
    return def;
}

} // namespace datefrag
