#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace liqsim {

// Welford accumulator; add order is fixed by callers so results are
// reproducible regardless of thread count.
struct RunningStat {
    int64_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }

    double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
    double stddev() const { return std::sqrt(variance()); }
    double std_error() const { return n > 0 ? stddev() / std::sqrt(static_cast<double>(n)) : 0.0; }
};

// log(p[i*stride] / p[(i-1)*stride]) for i = 1..floor((len-1)/stride)
inline std::vector<double> log_returns(std::span<const double> prices, int64_t stride) {
    std::vector<double> out;
    if (stride < 1 || prices.size() < 2) return out;
    const size_t last = prices.size() - 1;
    out.reserve(last / static_cast<size_t>(stride));
    for (size_t i = static_cast<size_t>(stride); i <= last; i += static_cast<size_t>(stride))
        out.push_back(std::log(prices[i] / prices[i - static_cast<size_t>(stride)]));
    return out;
}

inline std::optional<double> sample_stddev(std::span<const double> xs) {
    if (xs.size() < 2) return std::nullopt;
    RunningStat st;
    for (const double x : xs) st.add(x);
    return st.stddev();
}

// Excess kurtosis from population moments; undefined for degenerate series.
inline std::optional<double> excess_kurtosis(std::span<const double> xs) {
    const size_t n = xs.size();
    if (n < 4) return std::nullopt;
    double mean = 0.0;
    for (const double x : xs) mean += x;
    mean /= static_cast<double>(n);
    double m2 = 0.0, m4 = 0.0;
    for (const double x : xs) {
        const double d = x - mean;
        const double d2 = d * d;
        m2 += d2;
        m4 += d2 * d2;
    }
    m2 /= static_cast<double>(n);
    m4 /= static_cast<double>(n);
    if (m2 <= 0.0) return std::nullopt;
    return m4 / (m2 * m2) - 3.0;
}

// Standard sample autocorrelation at the given lag.
inline std::optional<double> autocorrelation(std::span<const double> xs, int64_t lag) {
    const auto n = static_cast<int64_t>(xs.size());
    if (lag < 1 || n <= lag + 1) return std::nullopt;
    double mean = 0.0;
    for (const double x : xs) mean += x;
    mean /= static_cast<double>(n);
    double num = 0.0, den = 0.0;
    for (int64_t i = 0; i < n; ++i) {
        const double d = xs[static_cast<size_t>(i)] - mean;
        den += d * d;
        if (i + lag < n) num += d * (xs[static_cast<size_t>(i + lag)] - mean);
    }
    if (den <= 0.0) return std::nullopt;
    return num / den;
}

}  // namespace liqsim
