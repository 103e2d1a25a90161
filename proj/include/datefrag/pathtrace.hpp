// Causal attention-hop analysis over exported activation data: concept
// anchors from layerwise logit projections, perturbation-based token
// importance, candidate path enumeration and the five-component path score
//
//   total = alpha*S_order + beta*S_act + gamma*S_causal - eta*S_gap + kappa*S_final
//
// Activation bundle file layout:
//   line 1: JSON header {"magic":"DFAB1","layers":L,
//                        "prompt_tokens":[...P...],"concepts":[...C...]}\n
//   then three float32 little-endian tensors back to back:
//     s              L*P*C   (layer, position, concept_idx) concept logits
//     base_prob      P*C     final-layer concept probability per position
//     perturbed_prob P*C     same, after replacing the token at the position
// The last concept is the decision token.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "datefrag/detail/binio.hpp"
#include "datefrag/error.hpp"

namespace datefrag {

struct ActivationBundle {
    std::vector<std::string> prompt_tokens;      // P
    std::vector<std::string> concepts;           // C; concepts.back() decides
    std::size_t layers = 0;                      // L
    std::vector<float> s;                        // L*P*C logits
    std::vector<float> base_prob;                // P*C
    std::vector<float> perturbed_prob;           // P*C

    std::size_t positions() const { return prompt_tokens.size(); }
    std::size_t concept_count() const { return concepts.size(); }
    std::size_t fragment_count() const { return concepts.size() - 1; }

    double s_at(std::size_t layer, std::size_t pos, std::size_t concept_idx) const {
        return s[(layer * positions() + pos) * concept_count() + concept_idx];
    }
    double base_at(std::size_t pos, std::size_t concept_idx) const {
        return base_prob[pos * concept_count() + concept_idx];
    }
    double perturbed_at(std::size_t pos, std::size_t concept_idx) const {
        return perturbed_prob[pos * concept_count() + concept_idx];
    }
};

inline void validate_bundle(const ActivationBundle& b) {
    const std::size_t p = b.positions(), c = b.concept_count();
    if (p == 0 || b.layers == 0) {
        throw Error(ErrorCode::DimensionMismatch, "bundle needs at least one layer and one token");
    }
    if (c < 1) {
        throw Error(ErrorCode::DimensionMismatch, "decision concept missing (no concepts)");
    }
    if (b.s.size() != b.layers * p * c) {
        throw Error(ErrorCode::DimensionMismatch, "logit tensor size != layers*positions*concepts");
    }
    if (b.base_prob.size() != p * c || b.perturbed_prob.size() != p * c) {
        throw Error(ErrorCode::DimensionMismatch, "probability tensor size != positions*concepts");
    }
    for (const float v : b.s) {
        if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteValue, "non-finite logit");
    }
    auto check_prob = [](std::span<const float> t, const char* what) {
        for (const float v : t) {
            if (!std::isfinite(v) || v < 0.0f || v > 1.0f) {
                throw Error(ErrorCode::NonFiniteValue,
                            std::string(what) + " outside [0,1]: " + std::to_string(v));
            }
        }
    };
    check_prob(b.base_prob, "base probability");
    check_prob(b.perturbed_prob, "perturbed probability");
}

inline void save_activation_bundle(const ActivationBundle& b, const std::filesystem::path& path) {
    validate_bundle(b);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write '" + path.string() + "'");
    nlohmann::ordered_json header;
    header["magic"] = "DFAB1";
    header["layers"] = b.layers;
    header["prompt_tokens"] = b.prompt_tokens;
    header["concepts"] = b.concepts;
    out << header.dump() << '\n';
    detail::write_f32le(out, b.s);
    detail::write_f32le(out, b.base_prob);
    detail::write_f32le(out, b.perturbed_prob);
    if (!out) throw Error(ErrorCode::IoFailure, "short write to '" + path.string() + "'");
}

inline ActivationBundle load_activation_bundle(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open '" + path.string() + "'");
    std::string header_line;
    if (!std::getline(in, header_line)) {
        throw Error(ErrorCode::MalformedLine, path.string() + ": missing header line");
    }
    ActivationBundle b;
    try {
        const auto j = nlohmann::json::parse(header_line);
        if (j.value("magic", "") != std::string("DFAB1")) {
            throw Error(ErrorCode::MalformedLine, "bad magic, expected DFAB1");
        }
        b.layers = j.at("layers").get<std::size_t>();
        b.prompt_tokens = j.at("prompt_tokens").get<std::vector<std::string>>();
        b.concepts = j.at("concepts").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::MalformedLine, path.string() + ": " + e.what());
    }
    const std::size_t pc = b.positions() * b.concept_count();
    b.s.resize(b.layers * pc);
    b.base_prob.resize(pc);
    b.perturbed_prob.resize(pc);
    if (!detail::read_f32le(in, b.s) || !detail::read_f32le(in, b.base_prob) ||
        !detail::read_f32le(in, b.perturbed_prob)) {
        throw Error(ErrorCode::DimensionMismatch, path.string() + ": tensors truncated");
    }
    validate_bundle(b);
    return b;
}

// ---------------------------------------------------------------------------
// Anchors and importance

struct ConceptAnchor {
    std::size_t layer = 0;     // argmax over layers of the per-layer max logit
    std::size_t position = 0;  // argmax over positions at the final layer
    double activation = 0.0;   // softmax over concepts at the global-max cell
};

// Ties break toward the first index throughout.
inline ConceptAnchor concept_anchors(const ActivationBundle& b, std::size_t concept_idx,
                                     bool softmax_activation = true) {
    const std::size_t p_count = b.positions();
    ConceptAnchor anchor;

    double best_final = -std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < p_count; ++p) {
        const double v = b.s_at(b.layers - 1, p, concept_idx);
        if (v > best_final) {
            best_final = v;
            anchor.position = p;
        }
    }

    double best_global = -std::numeric_limits<double>::infinity();
    std::size_t best_pos_at_layer = 0;
    for (std::size_t l = 0; l < b.layers; ++l) {
        for (std::size_t p = 0; p < p_count; ++p) {
            const double v = b.s_at(l, p, concept_idx);
            if (v > best_global) {
                best_global = v;
                anchor.layer = l;
                best_pos_at_layer = p;
            }
        }
    }

    if (!softmax_activation) {
        anchor.activation = best_global;
        return anchor;
    }
    double denom = 0.0;
    for (std::size_t c = 0; c < b.concept_count(); ++c) {
        denom += std::exp(b.s_at(anchor.layer, best_pos_at_layer, c) - best_global);
    }
    anchor.activation = 1.0 / denom;
    return anchor;
}

struct TokenImportance {
    std::size_t positions = 0, concepts = 0;
    std::vector<double> values; // concept-major

    double at(std::size_t concept_idx, std::size_t position) const {
        return values[concept_idx * positions + position];
    }
};

// I[c][p] = base - perturbed at the final layer; sign preserved, magnitudes
// feed the causal term.
inline TokenImportance token_importance(const ActivationBundle& b) {
    TokenImportance imp;
    imp.positions = b.positions();
    imp.concepts = b.concept_count();
    imp.values.resize(imp.positions * imp.concepts);
    for (std::size_t c = 0; c < imp.concepts; ++c) {
        for (std::size_t p = 0; p < imp.positions; ++p) {
            imp.values[c * imp.positions + p] = b.base_at(p, c) - b.perturbed_at(p, c);
        }
    }
    return imp;
}

// ---------------------------------------------------------------------------
// Path enumeration and scoring

inline constexpr std::size_t kMaxFragments = 6;

// All permutations of the fragment concepts, each followed by the decision
// concept, in lexicographic order of the concept strings.
inline std::vector<std::vector<std::size_t>> enumerate_paths(const ActivationBundle& b) {
    const std::size_t fragments = b.fragment_count();
    if (fragments < 1) {
        throw std::invalid_argument("enumerate_paths: need at least one fragment concept");
    }
    if (fragments > kMaxFragments) {
        throw Error(ErrorCode::TooManyConcepts,
                    std::to_string(fragments) + " fragments exceed the limit of " +
                        std::to_string(kMaxFragments));
    }
    std::vector<std::size_t> idx(fragments);
    std::iota(idx.begin(), idx.end(), 0);
    auto lex_less = [&](std::size_t a, std::size_t c) {
        return b.concepts[a] != b.concepts[c] ? b.concepts[a] < b.concepts[c] : a < c;
    };
    std::sort(idx.begin(), idx.end(), lex_less);

    std::vector<std::vector<std::size_t>> paths;
    do {
        std::vector<std::size_t> path = idx;
        path.push_back(b.concept_count() - 1);
        paths.push_back(std::move(path));
    } while (std::next_permutation(idx.begin(), idx.end(), lex_less));
    return paths;
}

struct PathWeights {
    double alpha = 1.0, beta = 1.0, gamma = 1.0, eta = 1.0, kappa = 1.0;
};

struct PathScoreOptions {
    PathWeights weights;
    double tau = 0.2;         // activation saturation threshold
    double lambda = 0.1;      // gap multiplier
    double eps_causal = 0.01; // |I| above this counts as an observed link
    bool linear_gap = false;  // true: S_gap = 1 - lambda*mean_gap (literal form)
    bool softmax_activation = true;
};

struct ReasoningPath {
    std::vector<std::size_t> concept_sequence;
    std::vector<ConceptAnchor> anchors;
    double s_order = 0.0;
    double s_act = 0.0;
    double s_causal = 0.0;
    double s_gap = 0.0;
    double s_final = 0.0;
    double total = 0.0;
};

inline ReasoningPath score_path(std::span<const std::size_t> path, const ActivationBundle& b,
                                const PathScoreOptions& options = {}) {
    const std::size_t k = path.size();
    if (k < 2) throw std::invalid_argument("score_path: path needs a fragment and the decision");

    ReasoningPath out;
    out.concept_sequence.assign(path.begin(), path.end());
    out.anchors.reserve(k);
    for (const std::size_t c : path) {
        out.anchors.push_back(concept_anchors(b, c, options.softmax_activation));
    }

    // ordering: positions first, layers second
    bool pos_sorted = true, layer_sorted = true;
    for (std::size_t i = 0; i + 1 < k; ++i) {
        pos_sorted &= out.anchors[i].position <= out.anchors[i + 1].position;
        layer_sorted &= out.anchors[i].layer <= out.anchors[i + 1].layer;
    }
    out.s_order = 0.7 * pos_sorted + 0.3 * layer_sorted;

    // activation strength, saturating at tau
    double act_sum = 0.0;
    for (const auto& a : out.anchors) act_sum += a.activation;
    out.s_act = std::min(act_sum / static_cast<double>(k) / options.tau, 1.0);

    // causal strength over consecutive links, later links upweighted
    const TokenImportance importance = token_importance(b);
    double weight_sum = 0.0, weighted_d = 0.0;
    std::size_t observed = 0;
    for (std::size_t i = 0; i + 1 < k; ++i) {
        const double w =
            k == 2 ? 1.0 : 0.5 + 0.5 * static_cast<double>(i) / static_cast<double>(k - 2);
        const double d = std::fabs(importance.at(path[i + 1], out.anchors[i].position));
        weight_sum += w;
        weighted_d += w * d;
        observed += d > options.eps_causal;
    }
    const double rho = static_cast<double>(observed) / static_cast<double>(k - 1);
    out.s_causal = (weighted_d / weight_sum) * (0.5 + 0.5 * rho);

    // gap penalty from mean positional jump
    double gap_sum = 0.0;
    for (std::size_t i = 0; i + 1 < k; ++i) {
        const auto lo = std::min(out.anchors[i].position, out.anchors[i + 1].position);
        const auto hi = std::max(out.anchors[i].position, out.anchors[i + 1].position);
        gap_sum += static_cast<double>(hi - lo);
    }
    const double mean_gap = gap_sum / static_cast<double>(k - 1);
    out.s_gap = options.linear_gap ? 1.0 - options.lambda * mean_gap
                                   : std::min(options.lambda * mean_gap, 1.0);

    out.s_final = out.anchors.back().activation;

    const auto& w = options.weights;
    out.total = w.alpha * out.s_order + w.beta * out.s_act + w.gamma * out.s_causal -
                w.eta * out.s_gap + w.kappa * out.s_final;
    return out;
}

// Argmax over every enumerated candidate; equal totals keep the
// lexicographically first sequence.
inline ReasoningPath best_path(const ActivationBundle& b, const PathScoreOptions& options = {}) {
    ReasoningPath best;
    bool first = true;
    for (const auto& candidate : enumerate_paths(b)) {
        ReasoningPath scored = score_path(candidate, b, options);
        if (first || scored.total > best.total) {
            best = std::move(scored);
            first = false;
        }
    }
    return best;
}

} // namespace datefrag
