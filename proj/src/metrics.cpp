#include "causal_audit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "causal_audit/errors.hpp"

namespace causal_audit {

void RankedList::validate() const {
    std::unordered_set<std::string> seen;
    seen.reserve(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (i > 0 && entries[i].score > entries[i - 1].score)
            throw DomainError("RankedList: scores must be non-increasing (position " +
                              std::to_string(i + 1) + ")");
        if (!seen.insert(entries[i].id).second)
            throw IntegrityError("RankedList: duplicate id '" + entries[i].id + "'");
    }
}

int RankedList::group_flag(std::size_t i, Attribute a) const {
    const RankedEntry& e = entries[i];
    switch (a) {
        case Attribute::race: return e.race;
        case Attribute::gender: return e.gender;
        case Attribute::country: return e.country;
    }
    return 0;
}

double ndcg(const RankedList& rl, std::optional<std::size_t> k) {
    if (rl.entries.empty()) throw DomainError("ndcg: empty list");
    const std::size_t cutoff = std::min(k.value_or(rl.entries.size()), rl.entries.size());
    if (cutoff == 0) throw DomainError("ndcg: cutoff must be positive");

    std::vector<double> gains;
    gains.reserve(rl.entries.size());
    for (const auto& e : rl.entries) gains.push_back(static_cast<double>(e.relevance));
    if (std::all_of(gains.begin(), gains.end(), [](double g) { return g == 0.0; }))
        throw DomainError("ndcg: undefined for all-zero relevance");

    auto dcg_at = [&](const std::vector<double>& g) {
        double dcg = 0.0;
        for (std::size_t i = 0; i < cutoff; ++i)
            dcg += g[i] / std::log2(static_cast<double>(i) + 2.0);
        return dcg;
    };
    const double dcg = dcg_at(gains);
    std::vector<double> ideal(gains);
    std::sort(ideal.begin(), ideal.end(), std::greater<>());
    const double idcg = dcg_at(ideal);
    return dcg / idcg;
}

double rank_gap(const RankedList& rl, Attribute group_flag) {
    double sum1 = 0, sum0 = 0;
    std::size_t n1 = 0, n0 = 0;
    for (std::size_t i = 0; i < rl.entries.size(); ++i) {
        const double position = static_cast<double>(i) + 1.0;
        if (rl.group_flag(i, group_flag)) {
            sum1 += position;
            ++n1;
        } else {
            sum0 += position;
            ++n0;
        }
    }
    if (n1 == 0 || n0 == 0)
        throw DomainError(std::string("rank_gap: group absent for '") +
                          attribute_name(group_flag) + "'");
    return sum1 / static_cast<double>(n1) - sum0 / static_cast<double>(n0);
}

double parity_gap(std::span<const double> predictions, std::span<const int> group_flag) {
    if (predictions.size() != group_flag.size()) throw ShapeError("parity_gap: length mismatch");
    double sum1 = 0, sum0 = 0;
    std::size_t n1 = 0, n0 = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (group_flag[i]) {
            sum1 += predictions[i];
            ++n1;
        } else {
            sum0 += predictions[i];
            ++n0;
        }
    }
    if (n1 == 0 || n0 == 0) throw DomainError("parity_gap: a group is empty");
    return std::abs(sum1 / static_cast<double>(n1) - sum0 / static_cast<double>(n0));
}

double pearson_r(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ShapeError("pearson_r: length mismatch");
    if (x.size() < 2) throw DomainError("pearson_r: need at least 2 observations");
    const auto n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw DomainError("pearson_r: zero variance");
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace causal_audit
