// Non-negative least squares (Lawson-Hanson active set) and the metric
// weight-learning fit: predict human severity ratings from the four
// fragmentation components under a non-negativity constraint.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "datefrag/error.hpp"

namespace datefrag {

namespace detail {

// Solve the small dense system M x = rhs by Gaussian elimination with
// partial pivoting. M is n x n row-major.
inline std::vector<double> solve_dense(std::vector<double> m, std::vector<double> rhs) {
    const std::size_t n = rhs.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::fabs(m[r * n + col]) > std::fabs(m[pivot * n + col])) pivot = r;
        }
        if (std::fabs(m[pivot * n + col]) < 1e-12) {
            throw Error(ErrorCode::DegenerateDesign, "singular normal equations");
        }
        if (pivot != col) {
            for (std::size_t c = 0; c < n; ++c) std::swap(m[col * n + c], m[pivot * n + c]);
            std::swap(rhs[col], rhs[pivot]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            const double factor = m[r * n + col] / m[col * n + col];
            for (std::size_t c = col; c < n; ++c) m[r * n + c] -= factor * m[col * n + c];
            rhs[r] -= factor * rhs[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t ri = n; ri-- > 0;) {
        double acc = rhs[ri];
        for (std::size_t c = ri + 1; c < n; ++c) acc -= m[ri * n + c] * x[c];
        x[ri] = acc / m[ri * n + ri];
    }
    return x;
}

} // namespace detail

// min ||A x - b||^2 subject to x >= 0. A is rows x cols, row-major.
inline std::vector<double> nnls(const std::vector<double>& a, std::size_t rows, std::size_t cols,
                                const std::vector<double>& b, double tol = 1e-10,
                                int max_iters = 200) {
    if (a.size() != rows * cols || b.size() != rows) {
        throw std::invalid_argument("nnls: dimension mismatch");
    }
    std::vector<double> x(cols, 0.0);
    std::vector<bool> passive(cols, false);

    auto gradient = [&]() {
        // w = A^T (b - A x)
        std::vector<double> resid(b);
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < cols; ++c) resid[r] -= a[r * cols + c] * x[c];
        }
        std::vector<double> w(cols, 0.0);
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < cols; ++c) w[c] += a[r * cols + c] * resid[r];
        }
        return w;
    };

    auto solve_passive = [&]() {
        std::vector<std::size_t> idx;
        for (std::size_t c = 0; c < cols; ++c) {
            if (passive[c]) idx.push_back(c);
        }
        const std::size_t k = idx.size();
        std::vector<double> ata(k * k, 0.0), atb(k, 0.0);
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t i = 0; i < k; ++i) {
                const double ai = a[r * cols + idx[i]];
                atb[i] += ai * b[r];
                for (std::size_t j = i; j < k; ++j) ata[i * k + j] += ai * a[r * cols + idx[j]];
            }
        }
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = 0; j < i; ++j) ata[i * k + j] = ata[j * k + i];
        }
        std::vector<double> z_small = detail::solve_dense(std::move(ata), std::move(atb));
        std::vector<double> z(cols, 0.0);
        for (std::size_t i = 0; i < k; ++i) z[idx[i]] = z_small[i];
        return z;
    };

    for (int iter = 0; iter < max_iters; ++iter) {
        const std::vector<double> w = gradient();
        std::size_t best = cols;
        double best_w = tol;
        for (std::size_t c = 0; c < cols; ++c) {
            if (!passive[c] && w[c] > best_w) {
                best_w = w[c];
                best = c;
            }
        }
        if (best == cols) break; // KKT satisfied
        passive[best] = true;

        while (true) {
            std::vector<double> z = solve_passive();
            bool feasible = true;
            for (std::size_t c = 0; c < cols; ++c) {
                if (passive[c] && z[c] <= 0.0) feasible = false;
            }
            if (feasible) {
                x = std::move(z);
                break;
            }
            double alpha = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < cols; ++c) {
                if (passive[c] && z[c] <= 0.0) alpha = std::min(alpha, x[c] / (x[c] - z[c]));
            }
            for (std::size_t c = 0; c < cols; ++c) {
                if (passive[c]) x[c] += alpha * (z[c] - x[c]);
            }
            for (std::size_t c = 0; c < cols; ++c) {
                if (passive[c] && x[c] <= tol) {
                    x[c] = 0.0;
                    passive[c] = false;
                }
            }
        }
    }
    return x;
}

// ---------------------------------------------------------------------------

struct MetricWeights {
    std::array<double, 4> raw{};        // coefficients on standardised features
    double intercept = 0.0;
    std::array<double, 4> normalised{}; // raw scaled to sum to 1
};

// Fit severity ~ w . x + intercept, w >= 0, on standardised features
// [split, delimiter, count_diff, theta]. Throws DegenerateDesign for a
// constant feature column.
inline MetricWeights learn_metric_weights(const std::vector<std::array<double, 4>>& features,
                                          const std::vector<double>& targets) {
    const std::size_t n = features.size();
    if (n != targets.size()) throw std::invalid_argument("learn_metric_weights: size mismatch");
    if (n < 5) throw std::invalid_argument("learn_metric_weights: need at least 5 rows");

    std::array<double, 4> mean{}, stddev{};
    for (const auto& row : features) {
        for (std::size_t c = 0; c < 4; ++c) mean[c] += row[c];
    }
    for (auto& m : mean) m /= static_cast<double>(n);
    for (const auto& row : features) {
        for (std::size_t c = 0; c < 4; ++c) stddev[c] += (row[c] - mean[c]) * (row[c] - mean[c]);
    }
    for (std::size_t c = 0; c < 4; ++c) {
        stddev[c] = std::sqrt(stddev[c] / static_cast<double>(n));
        if (stddev[c] < 1e-12) {
            throw Error(ErrorCode::DegenerateDesign,
                        "feature column " + std::to_string(c) + " is constant");
        }
    }

    const double target_mean =
        std::accumulate(targets.begin(), targets.end(), 0.0) / static_cast<double>(n);

    std::vector<double> a(n * 4);
    std::vector<double> b(n);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < 4; ++c) a[r * 4 + c] = (features[r][c] - mean[c]) / stddev[c];
        b[r] = targets[r] - target_mean;
    }

    const std::vector<double> w = nnls(a, n, 4, b);
    MetricWeights out;
    double sum = 0.0;
    for (std::size_t c = 0; c < 4; ++c) {
        out.raw[c] = w[c];
        sum += w[c];
    }
    // centred fit: the intercept is the target mean shifted back through the
    // standardisation (standardised features have zero mean)
    out.intercept = target_mean;
    if (sum > 0.0) {
        for (std::size_t c = 0; c < 4; ++c) out.normalised[c] = out.raw[c] / sum;
    }
    return out;
}

} // namespace datefrag
