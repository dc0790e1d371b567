#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "causal_audit/data_model.hpp"

namespace causal_audit {

struct ClipBounds {
    double lo = 0.01;
    double hi = 0.99;
};

struct WeightOptions {
    bool stabilized = true;
    std::optional<ClipBounds> clip;  // propensity clipping, only when requested
};

struct WeightDiagnostics {
    double min_weight = 0.0;
    double max_weight = 0.0;
    double effective_sample_size = 0.0;  // (sum w)^2 / sum w^2
};

// Inverse-propensity weights aligned to dataset rows.
struct WeightSet {
    std::vector<double> weights;
    bool stabilized = false;
    std::optional<ClipBounds> clip_bounds;
    WeightDiagnostics diagnostics;
};

// Unstabilized: w = 1/e for treated, 1/(1-e) for control. Stabilized weights
// multiply by the empirical marginal share of the unit's own group.
WeightSet ipw_weights(std::span<const int> treatment, std::span<const double> scores,
                      const WeightOptions& opts = {});
WeightSet ipw_weights(const Dataset& ds, const TreatmentSpec& spec,
                      std::span<const double> scores, const WeightOptions& opts = {});

// Standardized mean difference (mean1 - mean0) / s_pooled. Group means are
// weighted when `weights` is given; the pooled SD always uses the unweighted
// group sample SDs so pre- and post-weighting values stay comparable.
double smd(std::span<const int> treatment, std::span<const double> covariate,
           const std::vector<double>* weights = nullptr);
double smd(const Dataset& ds, const TreatmentSpec& spec, Column covariate,
           const WeightSet* weights = nullptr);

struct BalanceRow {
    std::string covariate;
    double mean_treated_pre = 0.0;
    double mean_control_pre = 0.0;
    double smd_pre = 0.0;
    double mean_treated_post = 0.0;
    double mean_control_post = 0.0;
    double smd_post = 0.0;
};

struct BalanceReport {
    std::vector<BalanceRow> rows;
    double threshold = 0.1;

    // True iff every |smd_post| is below the threshold.
    bool balanced() const;

    nlohmann::json to_json() const;
    std::string to_text() const;
};

BalanceReport balance_report(const Dataset& ds, const TreatmentSpec& spec, const WeightSet& ws,
                             double threshold = 0.1);

}  // namespace causal_audit
