#include <doctest.h>

#include <cmath>
#include <vector>

#include "causal_audit/propensity.hpp"
#include "causal_audit/rng.hpp"
#include "causal_audit/scm.hpp"
#include "causal_audit/weighting.hpp"

using namespace causal_audit;

TEST_CASE("symmetric case: all weights 1 under stabilization") {
    const std::vector<int> t = {1, 0, 1, 0};
    const std::vector<double> e = {0.5, 0.5, 0.5, 0.5};
    WeightOptions opts;
    opts.stabilized = true;
    const WeightSet ws = ipw_weights(t, e, opts);
    for (double w : ws.weights) CHECK(w == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(ws.diagnostics.effective_sample_size == doctest::Approx(4.0));
}

TEST_CASE("unstabilized treated weight is the reciprocal propensity") {
    WeightOptions opts;
    opts.stabilized = false;
    const WeightSet ws = ipw_weights(std::vector<int>{1, 0}, std::vector<double>{0.25, 0.5}, opts);
    CHECK(ws.weights[0] == doctest::Approx(4.0));
    CHECK(ws.weights[1] == doctest::Approx(2.0));
}

TEST_CASE("stabilized weight multiplies by the group share") {
    // Treated share 0.2 (1 of 5), treated unit with e = 0.25 -> 0.2 / 0.25.
    const std::vector<int> t = {1, 0, 0, 0, 0};
    const std::vector<double> e = {0.25, 0.3, 0.3, 0.3, 0.3};
    const WeightSet ws = ipw_weights(t, e, WeightOptions{});
    CHECK(ws.weights[0] == doctest::Approx(0.8).epsilon(1e-15));
}

TEST_CASE("a score of exactly 0 or 1 is a positivity violation") {
    const std::vector<int> t = {1, 0, 1};
    const std::vector<double> e = {1.0, 0.5, 0.25};
    try {
        ipw_weights(t, e, WeightOptions{});
        FAIL("expected PositivityError");
    } catch (const PositivityError& err) {
        REQUIRE(err.rows().size() == 1);
        CHECK(err.rows()[0] == 0);
    }
}

TEST_CASE("clipping rescues boundary scores when requested") {
    const std::vector<int> t = {1, 0};
    const std::vector<double> e = {1.0, 0.0};
    WeightOptions opts;
    opts.clip = ClipBounds{0.01, 0.99};
    const WeightSet ws = ipw_weights(t, e, opts);
    CHECK(ws.weights[0] > 0.0);
    CHECK(std::isfinite(ws.weights[1]));
}

TEST_CASE("weights are positive and finite; ESS at most n") {
    Rng rng(21);
    std::vector<int> t(200);
    std::vector<double> e(200);
    for (std::size_t i = 0; i < t.size(); ++i) {
        t[i] = rng.bernoulli(0.3);
        e[i] = 0.02 + 0.96 * rng.uniform01();
    }
    for (bool stab : {false, true}) {
        WeightOptions opts;
        opts.stabilized = stab;
        const WeightSet ws = ipw_weights(t, e, opts);
        for (double w : ws.weights) {
            CHECK(w > 0.0);
            CHECK(std::isfinite(w));
        }
        CHECK(ws.diagnostics.effective_sample_size > 0.0);
        CHECK(ws.diagnostics.effective_sample_size <= 200.0 + 1e-9);
    }
}

TEST_CASE("smd hand cases") {
    // Identical distributions -> 0.
    const std::vector<int> t = {1, 1, 1, 0, 0, 0};
    const std::vector<double> same = {1.0, 2.0, 3.0, 1.0, 2.0, 3.0};
    CHECK(smd(t, same) == doctest::Approx(0.0));

    // Group means 1 and 0, both sample SDs exactly 1 -> SMD 1.
    const std::vector<double> shifted = {0.0, 1.0, 2.0, -1.0, 0.0, 1.0};
    CHECK(smd(t, shifted) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("smd of a constant covariate is degenerate") {
    const std::vector<int> t = {1, 1, 0, 0};
    const std::vector<double> x = {2.0, 2.0, 2.0, 2.0};
    CHECK_THROWS_AS(smd(t, x), DomainError);
}

TEST_CASE("smd flips sign under group swap and survives affine rescaling") {
    Rng rng(77);
    for (int trial = 0; trial < 25; ++trial) {
        std::vector<int> t;
        std::vector<double> x;
        for (int i = 0; i < 60; ++i) {
            t.push_back(i < 25 ? 1 : 0);
            x.push_back(rng.normal(i < 25 ? 0.4 : 0.0, 1.0));
        }
        const double base = smd(t, x);

        std::vector<int> swapped(t);
        for (int& v : swapped) v = 1 - v;
        CHECK(smd(swapped, x) == doctest::Approx(-base).epsilon(1e-12));

        const double a = 0.1 + 5.0 * rng.uniform01();
        const double b = rng.normal(0.0, 10.0);
        std::vector<double> affine(x);
        for (double& v : affine) v = a * v + b;
        CHECK(smd(t, affine) == doctest::Approx(base).epsilon(1e-9));
    }
}

TEST_CASE("uniform weights leave the SMD unchanged") {
    ScmConfig cfg;
    cfg.n_units = 400;
    cfg.seed = 11;
    cfg.tau_race = -0.4;
    cfg.coef_conf_institution = -1.0;
    const Dataset ds = to_dataset(generate(cfg));
    TreatmentSpec spec;
    spec.treatment = Attribute::race;
    spec.covariates = {Column::h_index, Column::prestige};
    WeightSet uniform;
    uniform.weights.assign(ds.size(), 2.5);
    uniform.diagnostics = {2.5, 2.5, static_cast<double>(ds.size())};
    const BalanceReport report = balance_report(ds, spec, uniform);
    for (const auto& row : report.rows)
        CHECK(row.smd_post == doctest::Approx(row.smd_pre).epsilon(1e-12));
}

TEST_CASE("IPW from a converged fit balances a confounded dataset") {
    ScmConfig cfg;
    cfg.n_units = 5000;
    cfg.seed = 1001;
    cfg.tau_race = -0.5;
    cfg.coef_conf_institution = -1.8;
    cfg.coef_conf_quality = 9.0;
    const Dataset ds = to_dataset(generate(cfg));
    TreatmentSpec spec;
    spec.treatment = Attribute::race;
    spec.covariates = {Column::h_index, Column::prestige};
    const LogisticModel model = fit_logistic(ds, spec);
    const WeightSet ws = ipw_weights(ds, spec, propensity_scores(model, ds, spec));
    const BalanceReport report = balance_report(ds, spec, ws);
    REQUIRE(report.rows.size() == 2);
    bool any_imbalanced_pre = false;
    for (const auto& row : report.rows) {
        any_imbalanced_pre |= std::abs(row.smd_pre) > 0.1;
        CHECK(std::abs(row.smd_post) < 0.1);
    }
    CHECK(any_imbalanced_pre);
    CHECK(report.balanced());
}

TEST_CASE("empty covariate list yields a vacuously balanced report") {
    ScmConfig cfg;
    cfg.n_units = 50;
    cfg.seed = 3;
    const Dataset ds = to_dataset(generate(cfg));
    TreatmentSpec spec;
    spec.treatment = Attribute::race;
    WeightSet ws;
    ws.weights.assign(ds.size(), 1.0);
    const BalanceReport report = balance_report(ds, spec, ws);
    CHECK(report.rows.empty());
    CHECK(report.balanced());
}

TEST_CASE("balance report serializes with threshold and flag") {
    ScmConfig cfg;
    cfg.n_units = 300;
    cfg.seed = 8;
    const Dataset ds = to_dataset(generate(cfg));
    TreatmentSpec spec;
    spec.treatment = Attribute::race;
    spec.covariates = {Column::h_index};
    WeightSet ws;
    ws.weights.assign(ds.size(), 1.0);
    const BalanceReport report = balance_report(ds, spec, ws);
    const nlohmann::json j = report.to_json();
    CHECK(j.contains("rows"));
    CHECK(j.at("threshold").get<double>() == doctest::Approx(0.1));
    CHECK(j.contains("balanced"));
    CHECK(report.to_text().find("SMD") != std::string::npos);
}
