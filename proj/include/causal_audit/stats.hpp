#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "causal_audit/errors.hpp"

namespace causal_audit {

inline double mean(std::span<const double> x) {
    if (x.empty()) throw DomainError("mean of empty vector");
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

// Unbiased sample variance (n-1 denominator); requires n >= 2.
inline double sample_variance(std::span<const double> x) {
    if (x.size() < 2) throw DomainError("sample variance needs at least 2 values");
    const double m = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(x.size() - 1);
}

inline double sample_sd(std::span<const double> x) { return std::sqrt(sample_variance(x)); }

// Linear-interpolation quantile on a sorted copy (R type 7). p in [0, 1].
inline double quantile(std::vector<double> sorted_copy, double p) {
    if (sorted_copy.empty()) throw DomainError("quantile of empty vector");
    std::sort(sorted_copy.begin(), sorted_copy.end());
    if (p <= 0.0) return sorted_copy.front();
    if (p >= 1.0) return sorted_copy.back();
    const double h = p * (static_cast<double>(sorted_copy.size()) - 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted_copy.size() - 1);
    const double frac = h - static_cast<double>(lo);
    return sorted_copy[lo] + frac * (sorted_copy[hi] - sorted_copy[lo]);
}

inline double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

inline double sigmoid(double x) {
    if (x >= 0.0) {
        const double e = std::exp(-x);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

}  // namespace causal_audit
