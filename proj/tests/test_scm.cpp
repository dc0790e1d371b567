#include <doctest.h>

#include <cmath>
#include <string>

#include "causal_audit/estimators.hpp"
#include "causal_audit/scm.hpp"

using namespace causal_audit;

namespace {

SyntheticUnit unit_with_delta(int treated_rank, int control_rank, int index) {
    SyntheticUnit u;
    u.record.id = "u" + std::to_string(index);
    u.record.outcome = treated_rank;
    u.y_if_treated = treated_rank;
    u.y_if_control = control_rank;
    return u;
}

}  // namespace

TEST_CASE("zero direct effect gives exactly zero true ATE") {
    ScmConfig cfg;
    cfg.n_units = 2000;
    cfg.seed = 1;
    cfg.tau_race = 0.0;
    cfg.coef_conf_institution = -1.0;  // confounding alone must not create an effect
    const auto units = generate(cfg);
    for (const auto& u : units) CHECK(u.y_if_treated == u.y_if_control);
    CHECK(true_ate(units) == 0.0);
}

TEST_CASE("true_ate equals the potential-outcomes average") {
    ScmConfig cfg;
    cfg.n_units = 10000;
    cfg.seed = 42;
    cfg.tau_race = -0.6;
    const auto units = generate(cfg);
    double sum = 0.0;
    for (const auto& u : units) sum += u.y_if_treated - u.y_if_control;
    CHECK(true_ate(units) == doctest::Approx(sum / 10000.0).epsilon(1e-15));
    CHECK(true_ate(units) < -0.15);  // a strong negative latent effect must show up in ranks
}

TEST_CASE("fixed seed reproduces a byte-identical dataset") {
    ScmConfig cfg;
    cfg.n_units = 500;
    cfg.seed = 77;
    cfg.tau_race = -0.3;
    cfg.coef_conf_institution = -0.8;
    const std::string a = to_csv(to_dataset(generate(cfg)));
    const std::string b = to_csv(to_dataset(generate(cfg)));
    CHECK(a == b);
}

TEST_CASE("observed outcome is consistent with the realized treatment") {
    ScmConfig cfg;
    cfg.n_units = 3000;
    cfg.seed = 9;
    cfg.tau_gender = -0.5;
    cfg.treatment = Attribute::gender;
    for (const auto& u : generate(cfg)) {
        const int t = attribute_value(u.record, Attribute::gender);
        CHECK(u.record.outcome == (t ? u.y_if_treated : u.y_if_control));
    }
}

TEST_CASE("true_ate hand cases") {
    CHECK(true_ate({unit_with_delta(2, 2, 0), unit_with_delta(3, 3, 1)}) == 0.0);
    CHECK(true_ate({unit_with_delta(3, 2, 0), unit_with_delta(1, 2, 1)}) == 0.0);
    // Deltas {1, 1, 0, 2} average to 1.0.
    CHECK(true_ate({unit_with_delta(2, 1, 0), unit_with_delta(3, 2, 1), unit_with_delta(2, 2, 2),
                    unit_with_delta(3, 1, 3)}) == doctest::Approx(1.0));
}

TEST_CASE("true_ate of an empty list is a domain error") {
    CHECK_THROWS_AS(true_ate({}), DomainError);
}

TEST_CASE("invalid configs fail naming the field") {
    ScmConfig cfg;
    cfg.n_units = 0;
    try {
        generate(cfg);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("n_units") != std::string::npos);
    }

    cfg.n_units = 10;
    cfg.outcome_thresholds = {0.5, -0.5};
    try {
        generate(cfg);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("outcome_thresholds") != std::string::npos);
    }

    cfg.outcome_thresholds = {-0.5, 0.5};
    cfg.base_rate_race = 1.0;
    CHECK_THROWS_AS(generate(cfg), ConfigError);
    cfg.base_rate_race = 0.2;
    cfg.quality_noise_sd = 0.0;
    CHECK_THROWS_AS(generate(cfg), ConfigError);
}

TEST_CASE("confounding biases the naive contrast away from the truth") {
    ScmConfig cfg;
    cfg.n_units = 6000;
    cfg.seed = 1234;
    cfg.tau_race = -0.5;
    cfg.coef_conf_institution = -2.0;
    cfg.coef_conf_quality = 10.0;
    cfg.coef_prestige_outcome = 0.8;
    const auto units = generate(cfg);
    const Dataset ds = to_dataset(units);
    TreatmentSpec spec;
    spec.treatment = Attribute::race;
    spec.covariates = {Column::h_index, Column::prestige};
    const double naive = naive_difference(ds, spec);
    CHECK(std::abs(naive - true_ate(units)) > 0.1);
}

TEST_CASE("ScmConfig JSON round-trip") {
    ScmConfig cfg;
    cfg.n_units = 123;
    cfg.seed = 456;
    cfg.treatment = Attribute::country;
    cfg.tau_country = -0.7;
    cfg.tau_quality_slope = 0.2;
    cfg.outcome_thresholds = {-1.0, 0.3};
    const ScmConfig back = ScmConfig::from_json(cfg.to_json());
    CHECK(back.n_units == cfg.n_units);
    CHECK(back.seed == cfg.seed);
    CHECK(back.treatment == cfg.treatment);
    CHECK(back.tau_country == cfg.tau_country);
    CHECK(back.tau_quality_slope == cfg.tau_quality_slope);
    CHECK(back.outcome_thresholds[0] == cfg.outcome_thresholds[0]);
    CHECK(back.outcome_thresholds[1] == cfg.outcome_thresholds[1]);
}

TEST_CASE("marginals under defaults sit near the reference corpus") {
    ScmConfig cfg;
    cfg.n_units = 20000;
    cfg.seed = 31337;
    const Dataset ds = to_dataset(generate(cfg));
    const Summary s = summarize(ds);
    // Defaults are calibrated, not asserted tightly.
    CHECK(s.h_index.mean > 22.0);
    CHECK(s.h_index.mean < 33.0);
    CHECK(s.outcome.mean > 2.2);
    CHECK(s.outcome.mean < 2.7);
}
