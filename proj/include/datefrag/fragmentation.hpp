// The date fragmentation ratio F and its ingredients: sub-token count
// vectors, the cosine divergence theta, and the two structural indicators.
//
//   F = clamp( 0.10 * split + 0.10 * delimiter + 0.05 * (N - N_b) + 0.30 * theta, 0, 1 )
//
// where N and N_b are the model and baseline token counts and theta is one
// minus the cosine similarity between the two bags of sub-token strings.
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "datefrag/error.hpp"
#include "datefrag/format.hpp"
#include "datefrag/tokeniser.hpp"

namespace datefrag {

inline constexpr double kSplitPenalty = 0.10;
inline constexpr double kDelimiterPenalty = 0.10;
inline constexpr double kCountPenalty = 0.05;
inline constexpr double kThetaPenalty = 0.30;

struct CountVector {
    std::map<std::string, int> counts;
};

inline CountVector count_vector(const TokenisationRecord& rec) {
    CountVector v;
    for (const auto& t : rec.tokens) ++v.counts[t];
    return v;
}

// 1 - cosine similarity over the union key basis; in [0,1] because counts
// are non-negative.
inline double divergence_theta(const CountVector& t, const CountVector& b) {
    if (t.counts.empty() || b.counts.empty()) {
        throw Error(ErrorCode::EmptyVector, "count vectors must be non-empty");
    }
    if (t.counts == b.counts) return 0.0; // cosine of a vector with itself
    double dot = 0.0, norm_t = 0.0, norm_b = 0.0;
    for (const auto& [key, n] : t.counts) {
        norm_t += static_cast<double>(n) * n;
        const auto it = b.counts.find(key);
        if (it != b.counts.end()) dot += static_cast<double>(n) * it->second;
    }
    for (const auto& [key, n] : b.counts) norm_b += static_cast<double>(n) * n;
    const double theta = 1.0 - dot / (std::sqrt(norm_t) * std::sqrt(norm_b));
    return std::clamp(theta, 0.0, 1.0);
}

// A component survives tokenisation only if some token's byte span equals
// the component span exactly; a boundary through it or a merge with outside
// bytes both count as a split.
inline int split_indicator(const TokenisationRecord& rec, const DateComponents& comps) {
    auto intact = [&](const ByteSpan& span) {
        for (const auto& off : rec.offsets) {
            if (off == span) return true;
        }
        return false;
    };
    if (!intact(comps.year_span)) return 1;
    if (comps.month_span && !intact(*comps.month_span)) return 1;
    if (!intact(comps.day_span)) return 1;
    return 0;
}

// 1 when any delimiter byte is fused into a token that also carries
// non-delimiter bytes; 0 when the format has no delimiters.
inline int delimiter_indicator(const TokenisationRecord& rec, const DateComponents& comps) {
    if (comps.delimiter_spans.empty()) return 0;
    auto is_delimiter_byte = [&](std::size_t pos) {
        for (const auto& d : comps.delimiter_spans) {
            if (pos >= d.begin && pos < d.end) return true;
        }
        return false;
    };
    for (const auto& d : comps.delimiter_spans) {
        for (const auto& off : rec.offsets) {
            if (off.begin <= d.begin && d.end <= off.end) {
                for (std::size_t pos = off.begin; pos < off.end; ++pos) {
                    if (!is_delimiter_byte(pos)) return 1;
                }
            }
        }
    }
    return 0;
}

struct FragmentationBreakdown {
    int split_indicator = 0;
    int delimiter_indicator = 0;
    int token_count_diff = 0; // N - N_b
    double theta = 0.0;
    double f = 0.0;
};

inline double fragmentation_score(int split, int delim, int count_diff, double theta) {
    const double raw = kSplitPenalty * split + kDelimiterPenalty * delim +
                       kCountPenalty * count_diff + kThetaPenalty * theta;
    return std::clamp(raw, 0.0, 1.0);
}

inline FragmentationBreakdown fragmentation_ratio(const TokenisationRecord& model_rec,
                                                  const TokenisationRecord& baseline_rec,
                                                  const DateComponents& comps) {
    if (model_rec.source != baseline_rec.source) {
        throw Error(ErrorCode::SourceMismatch, "records describe '" + model_rec.source + "' vs '" +
                                                   baseline_rec.source + "'");
    }
    FragmentationBreakdown out;
    out.split_indicator = split_indicator(model_rec, comps);
    out.delimiter_indicator = delimiter_indicator(model_rec, comps);
    out.token_count_diff =
        static_cast<int>(model_rec.token_count) - static_cast<int>(baseline_rec.token_count);
    out.theta = divergence_theta(count_vector(model_rec), count_vector(baseline_rec));
    out.f = fragmentation_score(out.split_indicator, out.delimiter_indicator, out.token_count_diff,
                                out.theta);
    return out;
}

} // namespace datefrag
