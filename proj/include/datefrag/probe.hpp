// Layerwise probing: synthetic date-pair datasets, logistic probes trained
// per layer on exported embeddings, the layer accuracy curve and the
// tokenisation compensation point (first layer at or above threshold).
//
// Embedding bundle file layout:
//   line 1: JSON header {"magic":"DFEB1","layers":L,"examples":E,"dim":D,
//                        "labels":[0/1 x E]}\n
//   then L*E*D float32 little-endian values in layer-major order
//   (layer, example, dim).
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "datefrag/calendar.hpp"
#include "datefrag/detail/binio.hpp"
#include "datefrag/error.hpp"
#include "datefrag/format.hpp"

namespace datefrag {

// ---------------------------------------------------------------------------
// Probe dataset: balanced YES/NO date pairs, YES pairs rendered under two
// distinct formats (default: compact year-first vs slashed day-first).

struct ProbePair {
    std::string text_a;
    std::string text_b;
    bool label_yes = false;
};

struct ProbeDataset {
    std::vector<ProbePair> pairs;
    int year_lo = 0, year_hi = 0;
    std::string format_a, format_b;
};

inline ProbeDataset build_probe_dataset(int year_lo, int year_hi, std::size_t n, std::uint64_t seed,
                                        const DateFormat& format_a = DateFormat::from_pattern("compact", "YYYYMMDD"),
                                        const DateFormat& format_b = DateFormat::from_pattern("slashed", "DD/MM/YYYY")) {
    if (year_lo > year_hi) throw std::invalid_argument("build_probe_dataset: empty year range");
    if (n == 0 || n % 2 != 0) throw std::invalid_argument("build_probe_dataset: n must be even");
    if (format_a.pattern() == format_b.pattern()) {
        throw std::invalid_argument("build_probe_dataset: formats must be distinct");
    }

    std::mt19937_64 rng(seed);
    const std::int64_t lo = day_number({year_lo, 1, 1});
    const std::int64_t hi = day_number({year_hi, 12, 31});
    auto random_day = [&]() {
        return static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(hi - lo + 1)) + lo;
    };

    ProbeDataset ds;
    ds.year_lo = year_lo;
    ds.year_hi = year_hi;
    ds.format_a = format_a.pattern();
    ds.format_b = format_b.pattern();
    ds.pairs.reserve(n);
    for (std::size_t i = 0; i < n / 2; ++i) {
        const CalendarDate d = date_from_day_number(random_day());
        ds.pairs.push_back({format_a.render(d), format_b.render(d), true});

        std::int64_t other = random_day();
        while (other == day_number(d)) other = random_day();
        ds.pairs.push_back(
            {format_a.render(d), format_b.render(date_from_day_number(other)), false});
    }
    std::shuffle(ds.pairs.begin(), ds.pairs.end(), rng);
    return ds;
}

inline void write_probe_dataset(const ProbeDataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write '" + path.string() + "'");
    for (const auto& p : ds.pairs) {
        nlohmann::ordered_json j;
        j["a"] = p.text_a;
        j["b"] = p.text_b;
        j["label"] = p.label_yes ? "YES" : "NO";
        out << j.dump() << '\n';
    }
}

// ---------------------------------------------------------------------------
// Embedding bundles

struct EmbeddingBundle {
    std::size_t layers = 0, examples = 0, dim = 0;
    std::vector<float> tensor;  // layer-major
    std::vector<int> labels;    // 0/1 per example

    std::span<const float> layer(std::size_t l) const {
        return {tensor.data() + l * examples * dim, examples * dim};
    }
};

inline void validate_bundle(const EmbeddingBundle& b) {
    if (b.labels.size() != b.examples) {
        throw Error(ErrorCode::DimensionMismatch, "labels length != example count");
    }
    if (b.tensor.size() != b.layers * b.examples * b.dim) {
        throw Error(ErrorCode::DimensionMismatch, "tensor size != layers*examples*dim");
    }
    for (const int l : b.labels) {
        if (l != 0 && l != 1) throw Error(ErrorCode::DimensionMismatch, "labels must be 0/1");
    }
    for (const float v : b.tensor) {
        if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteValue, "non-finite embedding value");
    }
}

inline void save_embedding_bundle(const EmbeddingBundle& b, const std::filesystem::path& path) {
    validate_bundle(b);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write '" + path.string() + "'");
    nlohmann::ordered_json header;
    header["magic"] = "DFEB1";
    header["layers"] = b.layers;
    header["examples"] = b.examples;
    header["dim"] = b.dim;
    header["labels"] = b.labels;
    out << header.dump() << '\n';
    detail::write_f32le(out, b.tensor);
    if (!out) throw Error(ErrorCode::IoFailure, "short write to '" + path.string() + "'");
}

inline EmbeddingBundle load_embedding_bundle(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open '" + path.string() + "'");
    std::string header_line;
    if (!std::getline(in, header_line)) {
        throw Error(ErrorCode::MalformedLine, path.string() + ": missing header line");
    }
    EmbeddingBundle b;
    try {
        const auto j = nlohmann::json::parse(header_line);
        if (j.value("magic", "") != std::string("DFEB1")) {
            throw Error(ErrorCode::MalformedLine, "bad magic, expected DFEB1");
        }
        b.layers = j.at("layers").get<std::size_t>();
        b.examples = j.at("examples").get<std::size_t>();
        b.dim = j.at("dim").get<std::size_t>();
        b.labels = j.at("labels").get<std::vector<int>>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::MalformedLine, path.string() + ": " + e.what());
    }
    b.tensor.resize(b.layers * b.examples * b.dim);
    if (!detail::read_f32le(in, b.tensor)) {
        throw Error(ErrorCode::DimensionMismatch, path.string() + ": tensor truncated");
    }
    validate_bundle(b);
    return b;
}

// ---------------------------------------------------------------------------
// Linear probe: logistic regression by full-batch gradient descent on
// standardised features, fixed seeded 80/20 split.

struct ProbeOptions {
    std::uint64_t seed = 0;
    double train_fraction = 0.8;
    double learning_rate = 1.0;
    int max_iterations = 300;
    double tolerance = 1e-6;
    double l2 = 1e-3;
};

struct ProbeResult {
    std::vector<double> weights;
    double bias = 0.0;
    double train_accuracy = 0.0;
    double heldout_accuracy = 0.0;
    int iterations = 0;
};

inline ProbeResult train_probe(std::span<const float> h, std::size_t examples, std::size_t dim,
                               std::span<const int> labels, const ProbeOptions& options = {}) {
    if (h.size() != examples * dim || labels.size() != examples) {
        throw std::invalid_argument("train_probe: dimension mismatch");
    }
    if (examples < 2) throw std::invalid_argument("train_probe: need at least 2 examples");
    bool saw0 = false, saw1 = false;
    for (const int l : labels) {
        saw0 |= l == 0;
        saw1 |= l == 1;
    }
    if (!saw0 || !saw1) throw Error(ErrorCode::SingleClass, "both classes must be present");

    std::vector<std::size_t> order(examples);
    for (std::size_t i = 0; i < examples; ++i) order[i] = i;
    std::mt19937_64 rng(options.seed);
    std::shuffle(order.begin(), order.end(), rng);
    std::size_t train_n = static_cast<std::size_t>(static_cast<double>(examples) * options.train_fraction);
    train_n = std::clamp<std::size_t>(train_n, 1, examples - 1);

    // standardise with training statistics
    std::vector<double> mean(dim, 0.0), scale(dim, 1.0);
    for (std::size_t i = 0; i < train_n; ++i) {
        const float* row = h.data() + order[i] * dim;
        for (std::size_t c = 0; c < dim; ++c) mean[c] += row[c];
    }
    for (auto& m : mean) m /= static_cast<double>(train_n);
    std::vector<double> var(dim, 0.0);
    for (std::size_t i = 0; i < train_n; ++i) {
        const float* row = h.data() + order[i] * dim;
        for (std::size_t c = 0; c < dim; ++c) {
            const double d = row[c] - mean[c];
            var[c] += d * d;
        }
    }
    scale = std::move(var);
    for (auto& s : scale) {
        s = std::sqrt(s / static_cast<double>(train_n));
        if (s < 1e-12) s = 1.0;
    }

    std::vector<double> w(dim, 0.0);
    double bias = 0.0;
    std::vector<double> grad(dim, 0.0);
    auto margin = [&](std::size_t example) {
        const float* row = h.data() + example * dim;
        double z = bias;
        for (std::size_t c = 0; c < dim; ++c) z += w[c] * (row[c] - mean[c]) / scale[c];
        return z;
    };

    int iter = 0;
    for (; iter < options.max_iterations; ++iter) {
        std::fill(grad.begin(), grad.end(), 0.0);
        double grad_bias = 0.0;
        for (std::size_t i = 0; i < train_n; ++i) {
            const std::size_t ex = order[i];
            const double p = 1.0 / (1.0 + std::exp(-margin(ex)));
            const double err = p - static_cast<double>(labels[ex]);
            const float* row = h.data() + ex * dim;
            for (std::size_t c = 0; c < dim; ++c) grad[c] += err * (row[c] - mean[c]) / scale[c];
            grad_bias += err;
        }
        double max_grad = std::fabs(grad_bias / static_cast<double>(train_n));
        for (std::size_t c = 0; c < dim; ++c) {
            grad[c] = grad[c] / static_cast<double>(train_n) + options.l2 * w[c];
            max_grad = std::max(max_grad, std::fabs(grad[c]));
        }
        if (max_grad < options.tolerance) break;
        for (std::size_t c = 0; c < dim; ++c) w[c] -= options.learning_rate * grad[c];
        bias -= options.learning_rate * grad_bias / static_cast<double>(train_n);
    }

    auto accuracy_over = [&](std::size_t begin, std::size_t end) {
        std::size_t hits = 0;
        for (std::size_t i = begin; i < end; ++i) {
            const std::size_t ex = order[i];
            hits += (margin(ex) > 0.0 ? 1 : 0) == labels[ex];
        }
        return static_cast<double>(hits) / static_cast<double>(end - begin);
    };

    ProbeResult out;
    out.bias = bias;
    out.iterations = iter;
    out.train_accuracy = accuracy_over(0, train_n);
    out.heldout_accuracy = accuracy_over(train_n, examples);
    out.weights = std::move(w);
    return out;
}

// ---------------------------------------------------------------------------
// Layer curve and the compensation point

struct LayerCurve {
    std::vector<double> accuracy;   // held-out accuracy per layer
    std::optional<std::size_t> tcp; // first layer at or above threshold
    double threshold = 0.80;
};

inline LayerCurve layer_curve(const EmbeddingBundle& bundle, double threshold = 0.80,
                              const ProbeOptions& options = {}) {
    validate_bundle(bundle);
    LayerCurve curve;
    curve.threshold = threshold;
    curve.accuracy.reserve(bundle.layers);
    for (std::size_t l = 0; l < bundle.layers; ++l) {
        const auto result =
            train_probe(bundle.layer(l), bundle.examples, bundle.dim, bundle.labels, options);
        curve.accuracy.push_back(result.heldout_accuracy);
        if (!curve.tcp && result.heldout_accuracy >= threshold) curve.tcp = l;
    }
    return curve;
}

// Synthetic embedding bundle with class separability planted from one layer
// upward: noise everywhere, plus a +-snr mean shift along a fixed direction
// for layers >= planted_layer. Used to validate compensation-point
// detection end to end.
inline EmbeddingBundle synthetic_bundle(std::size_t layers, std::size_t examples, std::size_t dim,
                                        std::size_t planted_layer, double snr, std::uint64_t seed) {
    EmbeddingBundle b;
    b.layers = layers;
    b.examples = examples;
    b.dim = dim;
    b.labels.resize(examples);
    for (std::size_t i = 0; i < examples; ++i) b.labels[i] = i % 2 == 0 ? 1 : 0;
    std::mt19937_64 rng(seed);
    std::shuffle(b.labels.begin(), b.labels.end(), rng);

    std::normal_distribution<double> noise(0.0, 1.0);
    const double shift = snr / std::sqrt(static_cast<double>(dim));
    b.tensor.resize(layers * examples * dim);
    for (std::size_t l = 0; l < layers; ++l) {
        for (std::size_t e = 0; e < examples; ++e) {
            const double sign = b.labels[e] == 1 ? 1.0 : -1.0;
            float* row = b.tensor.data() + (l * examples + e) * dim;
            for (std::size_t c = 0; c < dim; ++c) {
                double v = noise(rng);
                if (l >= planted_layer) v += sign * shift;
                row[c] = static_cast<float>(v);
            }
        }
    }
    return b;
}

} // namespace datefrag
