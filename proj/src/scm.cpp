#include "causal_audit/scm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "causal_audit/rng.hpp"
#include "causal_audit/stats.hpp"

namespace causal_audit {

namespace {

int rank_from_latent(double latent, const std::array<double, 2>& thresholds) {
    if (latent < thresholds[0]) return 1;
    if (latent < thresholds[1]) return 2;
    return 3;
}

std::string unit_id(std::size_t index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "p%07zu", index + 1);
    return buf;
}

}  // namespace

void ScmConfig::validate() const {
    auto fail = [](const std::string& field, const std::string& why) {
        throw ConfigError("invalid ScmConfig." + field + ": " + why);
    };
    if (n_units == 0) fail("n_units", "must be positive");
    auto check_rate = [&](double r, const char* field) {
        if (!(r > 0.0 && r < 1.0)) fail(field, "must be in open interval (0,1)");
    };
    check_rate(base_rate_race, "base_rate_race");
    check_rate(base_rate_gender, "base_rate_gender");
    check_rate(base_rate_country, "base_rate_country");
    if (!(quality_noise_sd > 0.0)) fail("quality_noise_sd", "must be > 0");
    if (!(latent_noise_sd > 0.0)) fail("latent_noise_sd", "must be > 0");
    if (!(outcome_thresholds[0] < outcome_thresholds[1]))
        fail("outcome_thresholds", "must be strictly ascending");
}

std::vector<SyntheticUnit> generate(const ScmConfig& config) {
    config.validate();
    Rng rng(config.seed);
    std::vector<SyntheticUnit> units;
    units.reserve(config.n_units);

    for (std::size_t i = 0; i < config.n_units; ++i) {
        SyntheticUnit u;
        PaperRecord& r = u.record;
        r.id = unit_id(i);
        r.race = rng.bernoulli(config.base_rate_race) ? 1 : 0;
        r.gender = rng.bernoulli(config.base_rate_gender) ? 1 : 0;
        r.country = rng.bernoulli(config.base_rate_country) ? 1 : 0;

        const int t = attribute_value(r, config.treatment);

        // Confounding path: the active treatment shifts prestige, prestige
        // shifts quality. Both are held fixed across the potential outcomes,
        // so the recorded truth is the direct effect of the treatment.
        const double prestige_p =
            sigmoid(config.prestige_base_logit + config.coef_conf_institution * t);
        const int prestige = rng.bernoulli(prestige_p) ? 1 : 0;
        r.prestige = static_cast<double>(prestige);

        const double q_raw = rng.normal(config.quality_mean + config.coef_conf_quality * prestige,
                                        config.quality_noise_sd);
        r.h_index = std::max(0.0, q_raw);
        const double zq = (r.h_index - config.quality_mean) / config.quality_noise_sd;

        const double noise = rng.normal(0.0, config.latent_noise_sd);

        // Latent score split into a base (everything not involving the active
        // treatment) plus the active-treatment contribution at T = 0 and 1.
        double base = config.latent_intercept + config.coef_quality_outcome * zq +
                      config.coef_prestige_outcome * prestige + noise;
        auto active_contribution = [&](int treated) {
            double tau = 0.0;
            switch (config.treatment) {
                case Attribute::race:
                    tau = config.tau_race + config.tau_quality_slope * zq;
                    return treated * (tau + config.tau_race_gender * r.gender);
                case Attribute::gender:
                    tau = config.tau_gender + config.tau_quality_slope * zq;
                    return treated * (tau + config.tau_race_gender * r.race);
                case Attribute::country:
                    tau = config.tau_country + config.tau_quality_slope * zq;
                    return treated * tau;
            }
            return 0.0;
        };
        switch (config.treatment) {
            case Attribute::race:
                base += config.tau_gender * r.gender + config.tau_country * r.country;
                break;
            case Attribute::gender:
                base += config.tau_race * r.race + config.tau_country * r.country;
                break;
            case Attribute::country:
                base += config.tau_race * r.race + config.tau_gender * r.gender +
                        config.tau_race_gender * r.race * r.gender;
                break;
        }

        u.y_if_treated = rank_from_latent(base + active_contribution(1), config.outcome_thresholds);
        u.y_if_control = rank_from_latent(base + active_contribution(0), config.outcome_thresholds);
        r.outcome = t ? u.y_if_treated : u.y_if_control;
        units.push_back(std::move(u));
    }
    return units;
}

double true_ate(const std::vector<SyntheticUnit>& units) {
    if (units.empty()) throw DomainError("true_ate: empty unit list");
    double s = 0.0;
    for (const auto& u : units) s += static_cast<double>(u.y_if_treated - u.y_if_control);
    return s / static_cast<double>(units.size());
}

Dataset to_dataset(const std::vector<SyntheticUnit>& units) {
    std::vector<PaperRecord> records;
    records.reserve(units.size());
    for (const auto& u : units) records.push_back(u.record);
    return Dataset::from_records(std::move(records), Provenance::synthetic);
}

nlohmann::json ScmConfig::to_json() const {
    return {{"n_units", n_units},
            {"seed", seed},
            {"treatment", attribute_name(treatment)},
            {"base_rate_race", base_rate_race},
            {"base_rate_gender", base_rate_gender},
            {"base_rate_country", base_rate_country},
            {"coef_conf_institution", coef_conf_institution},
            {"prestige_base_logit", prestige_base_logit},
            {"coef_conf_quality", coef_conf_quality},
            {"quality_mean", quality_mean},
            {"quality_noise_sd", quality_noise_sd},
            {"latent_intercept", latent_intercept},
            {"coef_quality_outcome", coef_quality_outcome},
            {"coef_prestige_outcome", coef_prestige_outcome},
            {"latent_noise_sd", latent_noise_sd},
            {"tau_race", tau_race},
            {"tau_gender", tau_gender},
            {"tau_country", tau_country},
            {"tau_quality_slope", tau_quality_slope},
            {"tau_race_gender", tau_race_gender},
            {"outcome_thresholds", {outcome_thresholds[0], outcome_thresholds[1]}}};
}

ScmConfig ScmConfig::from_json(const nlohmann::json& j) {
    ScmConfig c;
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("n_units", c.n_units);
    get("seed", c.seed);
    if (j.contains("treatment"))
        c.treatment = attribute_from_name(j.at("treatment").get<std::string>());
    get("base_rate_race", c.base_rate_race);
    get("base_rate_gender", c.base_rate_gender);
    get("base_rate_country", c.base_rate_country);
    get("coef_conf_institution", c.coef_conf_institution);
    get("prestige_base_logit", c.prestige_base_logit);
    get("coef_conf_quality", c.coef_conf_quality);
    get("quality_mean", c.quality_mean);
    get("quality_noise_sd", c.quality_noise_sd);
    get("latent_intercept", c.latent_intercept);
    get("coef_quality_outcome", c.coef_quality_outcome);
    get("coef_prestige_outcome", c.coef_prestige_outcome);
    get("latent_noise_sd", c.latent_noise_sd);
    get("tau_race", c.tau_race);
    get("tau_gender", c.tau_gender);
    get("tau_country", c.tau_country);
    get("tau_quality_slope", c.tau_quality_slope);
    get("tau_race_gender", c.tau_race_gender);
    if (j.contains("outcome_thresholds")) {
        const auto& t = j.at("outcome_thresholds");
        c.outcome_thresholds = {t.at(0).get<double>(), t.at(1).get<double>()};
    }
    c.validate();
    return c;
}

}  // namespace causal_audit
