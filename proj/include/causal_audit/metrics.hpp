#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "causal_audit/data_model.hpp"

namespace causal_audit {

struct RankedEntry {
    std::string id;
    double score = 0.0;
    int relevance = 0;  // ordinal outcome rank used as the NDCG gain
    int race = 0;
    int gender = 0;
    int country = 0;
};

// A scored list in rank order (position 1 first).
struct RankedList {
    std::vector<RankedEntry> entries;

    // Scores non-increasing, ids unique.
    void validate() const;
    int group_flag(std::size_t i, Attribute a) const;
};

// NDCG with gain = raw relevance and discount log2(i + 1); k defaults to the
// full list length.
double ndcg(const RankedList& rl, std::optional<std::size_t> k = std::nullopt);

// Mean 1-based position of group-1 entries minus group-0 entries. Positive
// means group 1 sits lower (worse) in the list.
double rank_gap(const RankedList& rl, Attribute group_flag);

// |mean prediction of group 1 - mean prediction of group 0|.
double parity_gap(std::span<const double> predictions, std::span<const int> group_flag);

// Sample Pearson correlation.
double pearson_r(std::span<const double> x, std::span<const double> y);

}  // namespace causal_audit
