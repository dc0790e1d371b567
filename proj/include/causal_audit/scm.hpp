#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <json.hpp>

#include "causal_audit/data_model.hpp"

namespace causal_audit {

// Structural-causal-model generator configuration. The generator draws, per
// unit: demographics -> institutional prestige -> quality proxy -> latent
// acceptance score -> ordinal rank, and records both potential outcomes of
// the active treatment so estimators can be scored against the exact truth.
//
// Structural equations (C = prestige, Q = quality, T = active treatment):
//   T        ~ Bernoulli(base_rate)
//   C        ~ Bernoulli(sigmoid(prestige_base_logit + coef_conf_institution * T))
//   Q        = max(0, Normal(quality_mean + coef_conf_quality * C, quality_noise_sd))
//   latent   = latent_intercept + coef_quality_outcome * zq + coef_prestige_outcome * C
//              + tau terms + Normal(0, latent_noise_sd),   zq = (Q - quality_mean) / quality_noise_sd
//   outcome  = rank 1/2/3 by outcome_thresholds on the latent score
//
// The active treatment contributes (tau_active + tau_quality_slope * zq) * T
// plus tau_race_gender * race * gender when it involves race or gender; the
// inactive demographics enter as plain covariate noise with their own taus.
struct ScmConfig {
    std::size_t n_units = 0;
    std::uint64_t seed = 0;
    Attribute treatment = Attribute::race;  // which attribute gets potential-outcome bookkeeping

    // Treatment prevalences, each in (0, 1). Defaults follow the reference
    // corpus marginals (minority 19.7%, female 47.3%, Global South 25.3%).
    double base_rate_race = 0.197;
    double base_rate_gender = 0.473;
    double base_rate_country = 0.253;

    double coef_conf_institution = 0.0;  // active treatment -> prestige, log-odds
    double prestige_base_logit = -0.4;
    double coef_conf_quality = 7.0;  // prestige -> quality mean shift
    double quality_mean = 26.0;      // corpus h-index mean ~27.6 after the prestige shift
    double quality_noise_sd = 14.0;

    double latent_intercept = 0.0;
    double coef_quality_outcome = 0.8;   // per quality SD
    double coef_prestige_outcome = 0.4;
    double latent_noise_sd = 1.0;

    // Direct effects on the latent score.
    double tau_race = 0.0;
    double tau_gender = 0.0;
    double tau_country = 0.0;
    double tau_quality_slope = 0.0;  // heterogeneity of the active effect in zq
    double tau_race_gender = 0.0;    // race x gender interaction

    // Latent cut points for ranks 1 | 2 | 3, strictly ascending. Defaults
    // roughly reproduce the corpus rank distribution (14% / 25% / 61%).
    std::array<double, 2> outcome_thresholds = {-1.25, -0.2};

    // Throws ConfigError naming the first violated field.
    void validate() const;

    nlohmann::json to_json() const;
    static ScmConfig from_json(const nlohmann::json& j);
};

struct SyntheticUnit {
    PaperRecord record;
    int y_if_treated = 1;  // potential outcome under active treatment = 1
    int y_if_control = 1;  // potential outcome under active treatment = 0
};

// Deterministic for a fixed config (seed included). The observed outcome
// always equals the potential outcome matching the realized treatment.
std::vector<SyntheticUnit> generate(const ScmConfig& config);

// Ground-truth sample ATE: mean(y_if_treated - y_if_control).
double true_ate(const std::vector<SyntheticUnit>& units);

Dataset to_dataset(const std::vector<SyntheticUnit>& units);

}  // namespace causal_audit
