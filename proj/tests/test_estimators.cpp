#include <doctest.h>

#include <array>
#include <cmath>
#include <vector>

#include "causal_audit/estimators.hpp"
#include "causal_audit/rng.hpp"
#include "causal_audit/scm.hpp"

using namespace causal_audit;

namespace {

// 12-row OLS fixture.
constexpr std::array<int, 12> kT = {1, 0, 1, 0, 1, 0, 1, 0, 1, 0, 1, 0};
constexpr std::array<double, 12> kY = {3, 2, 2, 3, 1, 2, 3, 1, 2, 3, 1, 2};
constexpr std::array<double, 12> kX1 = {10, 12, 8, 20, 5, 15, 18, 7, 9, 22, 11, 14};
constexpr std::array<double, 12> kX2 = {1, 0, 0, 1, 0, 1, 1, 0, 1, 0, 0, 1};

// Normal-equations oracle with Gauss-Jordan elimination; independent of the
// library's Cholesky route.
double ols_oracle_treatment_coef() {
    const std::size_t n = kT.size(), k = 4;
    std::vector<double> xtx(k * k, 0.0), xty(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::array<double, 4> x = {1.0, static_cast<double>(kT[i]), kX1[i], kX2[i]};
        for (std::size_t a = 0; a < k; ++a) {
            xty[a] += x[a] * kY[i];
            for (std::size_t b = 0; b < k; ++b) xtx[a * k + b] += x[a] * x[b];
        }
    }
    std::vector<double> aug(k * (k + 1));
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = 0; b < k; ++b) aug[a * (k + 1) + b] = xtx[a * k + b];
        aug[a * (k + 1) + k] = xty[a];
    }
    for (std::size_t col = 0; col < k; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < k; ++r) {
            if (std::abs(aug[r * (k + 1) + col]) > std::abs(aug[pivot * (k + 1) + col])) pivot = r;
        }
        for (std::size_t c = 0; c <= k; ++c)
            std::swap(aug[col * (k + 1) + c], aug[pivot * (k + 1) + c]);
        const double d = aug[col * (k + 1) + col];
        for (std::size_t c = 0; c <= k; ++c) aug[col * (k + 1) + c] /= d;
        for (std::size_t r = 0; r < k; ++r) {
            if (r == col) continue;
            const double f = aug[r * (k + 1) + col];
            for (std::size_t c = 0; c <= k; ++c)
                aug[r * (k + 1) + c] -= f * aug[col * (k + 1) + c];
        }
    }
    return aug[1 * (k + 1) + k];
}

TreatmentSpec race_spec() {
    TreatmentSpec spec;
    spec.treatment = Attribute::race;
    spec.covariates = {Column::h_index, Column::prestige};
    return spec;
}

}  // namespace

TEST_CASE("ate_ipw hand cases") {
    CHECK(ate_ipw(std::vector<int>{1, 1, 0, 0}, std::vector<double>{2, 2, 2, 2},
                  std::vector<double>{1, 3, 2, 5}) == doctest::Approx(0.0));
    // Treated {(w=1,Y=3),(w=1,Y=1)}, control {(w=2,Y=2)} -> 2 - 2 = 0.
    CHECK(ate_ipw(std::vector<int>{1, 1, 0}, std::vector<double>{3, 1, 2},
                  std::vector<double>{1, 1, 2}) == doctest::Approx(0.0));
}

TEST_CASE("uniform weights reduce ate_ipw to the naive difference") {
    ScmConfig cfg;
    cfg.n_units = 800;
    cfg.seed = 4;
    cfg.tau_race = -0.5;
    const Dataset ds = to_dataset(generate(cfg));
    const TreatmentSpec spec = race_spec();
    WeightSet uniform;
    uniform.weights.assign(ds.size(), 1.0);
    CHECK(ate_ipw(ds, spec, uniform) ==
          doctest::Approx(naive_difference(ds, spec)).epsilon(1e-12));
}

TEST_CASE("ate_ipw invariances") {
    Rng rng(555);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 30 + rng.below(50);
        std::vector<int> t(n);
        std::vector<double> y(n), w(n);
        bool has1 = false, has0 = false;
        for (std::size_t i = 0; i < n; ++i) {
            t[i] = rng.bernoulli(0.4);
            has1 |= t[i] == 1;
            has0 |= t[i] == 0;
            y[i] = 1.0 + rng.below(3);
            w[i] = 0.2 + 3.0 * rng.uniform01();
        }
        if (!has1 || !has0) continue;
        const double base = ate_ipw(t, y, w);

        // Scaling every weight by a positive constant changes nothing.
        std::vector<double> w_scaled(w);
        for (double& v : w_scaled) v *= 17.5;
        CHECK(ate_ipw(t, y, w_scaled) == doctest::Approx(base).epsilon(1e-13));

        // Outcome shift and scale.
        std::vector<double> y_shift(y), y_scale(y);
        for (double& v : y_shift) v += 3.25;
        for (double& v : y_scale) v *= -2.0;
        CHECK(ate_ipw(t, y_shift, w) == doctest::Approx(base).epsilon(1e-10));
        CHECK(ate_ipw(t, y_scale, w) == doctest::Approx(-2.0 * base).epsilon(1e-10));

        // Swapping treatment labels negates the ATE.
        std::vector<int> t_swapped(t);
        for (int& v : t_swapped) v = 1 - v;
        CHECK(ate_ipw(t_swapped, y, w) == doctest::Approx(-base).epsilon(1e-12));
    }
}

TEST_CASE("stabilization leaves the Eq.-2 ATE bit-identical") {
    ScmConfig cfg;
    cfg.n_units = 2000;
    cfg.seed = 99;
    cfg.tau_race = -0.5;
    cfg.coef_conf_institution = -1.5;
    const Dataset ds = to_dataset(generate(cfg));
    const TreatmentSpec spec = race_spec();
    const LogisticModel m = fit_logistic(ds, spec);
    const std::vector<double> scores = propensity_scores(m, ds, spec);
    WeightOptions stab, raw;
    stab.stabilized = true;
    raw.stabilized = false;
    const double a = ate_ipw(ds, spec, ipw_weights(ds, spec, scores, stab));
    const double b = ate_ipw(ds, spec, ipw_weights(ds, spec, scores, raw));
    CHECK(std::abs(a - b) < 1e-12);
}

TEST_CASE("zero-weight group is a degenerate-group error") {
    CHECK_THROWS_AS(ate_ipw(std::vector<int>{1, 1}, std::vector<double>{1, 2},
                            std::vector<double>{1, 1}),
                    EstimationError);
}

TEST_CASE("ols with no covariates equals the raw group difference") {
    const std::vector<int> t = {1, 1, 0, 0, 0};
    const std::vector<double> y = {3, 2, 1, 2, 3};
    const double diff = (3.0 + 2.0) / 2.0 - (1.0 + 2.0 + 3.0) / 3.0;
    CHECK(ols_treatment_coefficient(t, y, {}, {}) == doctest::Approx(diff).epsilon(1e-12));
}

TEST_CASE("ols matches the normal-equations oracle to 1e-8") {
    const std::vector<int> t(kT.begin(), kT.end());
    const std::vector<double> y(kY.begin(), kY.end());
    const std::vector<std::vector<double>> cols = {{kX1.begin(), kX1.end()},
                                                   {kX2.begin(), kX2.end()}};
    const double fitted = ols_treatment_coefficient(t, y, cols, {"h_index", "prestige"});
    CHECK(std::abs(fitted - ols_oracle_treatment_coef()) < 1e-8);
}

TEST_CASE("rank deficiency names the dependent column") {
    const std::vector<int> t(kT.begin(), kT.end());
    const std::vector<double> y(kY.begin(), kY.end());
    std::vector<double> x1(kX1.begin(), kX1.end());
    std::vector<double> x1_copy(x1);  // exact duplicate column
    try {
        ols_treatment_coefficient(t, y, {x1, x1_copy}, {"h_index", "h_index_copy"});
        FAIL("expected CollinearityError");
    } catch (const CollinearityError& e) {
        CHECK(e.column() == "h_index_copy");
    }
}

TEST_CASE("regression adjustment recovers the truth under strong confounding") {
    ScmConfig cfg;
    cfg.n_units = 5000;
    cfg.seed = 2025;
    cfg.tau_race = -0.5;
    cfg.coef_conf_institution = -2.0;
    cfg.coef_conf_quality = 10.0;
    cfg.coef_prestige_outcome = 0.8;
    const auto units = generate(cfg);
    const Dataset ds = to_dataset(units);
    const double truth = true_ate(units);
    const TreatmentSpec spec = race_spec();
    CHECK(std::abs(ate_linear_regression(ds, spec) - truth) < 0.05);
    CHECK(std::abs(naive_difference(ds, spec) - truth) > 0.1);
}

TEST_CASE("all three estimators agree without confounding") {
    ScmConfig cfg;
    cfg.n_units = 10000;
    cfg.seed = 60;
    cfg.tau_race = -0.5;
    cfg.coef_conf_institution = 0.0;
    cfg.coef_conf_quality = 0.0;
    const Dataset ds = to_dataset(generate(cfg));
    const TreatmentSpec spec = race_spec();
    const LogisticModel m = fit_logistic(ds, spec);
    const double ipw = ate_ipw(ds, spec, ipw_weights(ds, spec, propensity_scores(m, ds, spec)));
    const double lr = ate_linear_regression(ds, spec);
    const double naive = naive_difference(ds, spec);
    CHECK(std::abs(ipw - lr) < 0.05);
    CHECK(std::abs(ipw - naive) < 0.05);
    CHECK(std::abs(lr - naive) < 0.05);
}

TEST_CASE("bootstrap of a constant estimator is a degenerate interval") {
    ScmConfig cfg;
    cfg.n_units = 100;
    cfg.seed = 17;
    const Dataset ds = to_dataset(generate(cfg));
    BootstrapOptions opts;
    opts.n_boot = 200;
    opts.seed = 5;
    const BootstrapResult r = bootstrap_ci([](const Dataset&) { return 3.25; }, ds, opts);
    CHECK(r.interval.low == doctest::Approx(3.25));
    CHECK(r.interval.high == doctest::Approx(3.25));
    CHECK(r.n_failed == 0);
}

TEST_CASE("bootstrap is deterministic in the seed") {
    ScmConfig cfg;
    cfg.n_units = 400;
    cfg.seed = 23;
    cfg.tau_race = -0.6;
    const Dataset ds = to_dataset(generate(cfg));
    BootstrapOptions opts;
    opts.n_boot = 250;
    opts.seed = 1234;
    const DatasetEstimator est = make_ipw_estimator(race_spec());
    const BootstrapResult a = bootstrap_ci(est, ds, opts);
    const BootstrapResult b = bootstrap_ci(est, ds, opts);
    CHECK(a.interval.low == b.interval.low);
    CHECK(a.interval.high == b.interval.high);

    opts.seed = 4321;
    const BootstrapResult c = bootstrap_ci(est, ds, opts);
    CHECK(c.interval.low != a.interval.low);
}

TEST_CASE("bootstrap rejects tiny n_boot and unstable estimators") {
    ScmConfig cfg;
    cfg.n_units = 50;
    cfg.seed = 2;
    const Dataset ds = to_dataset(generate(cfg));
    BootstrapOptions opts;
    opts.n_boot = 100;
    CHECK_THROWS_AS(bootstrap_ci([](const Dataset&) { return 0.0; }, ds, opts), ConfigError);

    opts.n_boot = 200;
    const DatasetEstimator failing = [](const Dataset&) -> double {
        throw DomainError("always fails");
    };
    CHECK_THROWS_AS(bootstrap_ci(failing, ds, opts), EstimationError);
}

TEST_CASE("bootstrap intervals shrink with sample size") {
    BootstrapOptions opts;
    opts.n_boot = 200;
    opts.seed = 777;
    const DatasetEstimator est = make_ipw_estimator(race_spec());
    double widths[2];
    int slot = 0;
    for (std::size_t n : {500u, 5000u}) {
        ScmConfig cfg;
        cfg.n_units = n;
        cfg.seed = 4242;
        cfg.tau_race = -0.5;
        cfg.coef_conf_institution = -1.0;
        const Dataset ds = to_dataset(generate(cfg));
        const BootstrapResult r = bootstrap_ci(est, ds, opts);
        widths[slot++] = r.interval.high - r.interval.low;
    }
    CHECK(widths[1] < widths[0]);
}

TEST_CASE("estimate_ate reports a CI that covers the point or flags it") {
    ScmConfig cfg;
    cfg.n_units = 600;
    cfg.seed = 3131;
    cfg.tau_race = -0.5;
    const Dataset ds = to_dataset(generate(cfg));
    BootstrapOptions opts;
    opts.n_boot = 200;
    opts.seed = 9;
    const CausalEstimate est = estimate_ate(ds, race_spec(), EstimationMethod::ipw, opts);
    REQUIRE(est.ci.has_value());
    if (!est.point_outside_ci) {
        CHECK(est.ci->low <= est.ate);
        CHECK(est.ate <= est.ci->high);
    }
    CHECK(est.n_treated + est.n_control == ds.size());
    const nlohmann::json j = est.to_json();
    CHECK(j.at("method") == "ipw");
    CHECK(j.at("sign_convention") == kSignConvention);
    CHECK(j.at("seed") == 9);
}

TEST_CASE("homogeneous outcomes give zero ATE in every stratum") {
    ScmConfig cfg;
    cfg.n_units = 1200;
    cfg.seed = 8;
    Dataset base = to_dataset(generate(cfg));
    std::vector<PaperRecord> records = base.records();
    for (auto& r : records) r.outcome = 2;
    const Dataset ds = Dataset::from_records(std::move(records), Provenance::synthetic);
    BootstrapOptions opts;
    opts.n_boot = 200;
    const auto strata = stratified_ate(ds, race_spec(), Column::h_index, 4, opts);
    REQUIRE(strata.size() == 4);
    for (const auto& s : strata) {
        REQUIRE(s.status == "ok");
        CHECK(s.estimate->ate == doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("quality-dependent effects concentrate in the lowest quartile") {
    ScmConfig cfg;
    cfg.n_units = 8000;
    cfg.seed = 515;
    cfg.tau_race = -0.45;
    cfg.tau_quality_slope = 0.45;  // low quality -> strongly negative effect
    const Dataset ds = to_dataset(generate(cfg));
    BootstrapOptions opts;
    opts.n_boot = 200;
    opts.seed = 77;
    const auto strata = stratified_ate(ds, race_spec(), Column::h_index, 4, opts);
    REQUIRE(strata.size() == 4);
    for (const auto& s : strata) REQUIRE(s.status == "ok");
    const double lowest = std::abs(strata[0].estimate->ate);
    for (std::size_t s = 1; s < strata.size(); ++s)
        CHECK(lowest > std::abs(strata[s].estimate->ate));
}

TEST_CASE("single stratum reproduces the full-sample IPW estimate") {
    ScmConfig cfg;
    cfg.n_units = 1500;
    cfg.seed = 61;
    cfg.tau_race = -0.5;
    cfg.coef_conf_institution = -1.2;
    const Dataset ds = to_dataset(generate(cfg));
    const TreatmentSpec spec = race_spec();
    BootstrapOptions opts;
    opts.n_boot = 200;
    const auto strata = stratified_ate(ds, spec, Column::h_index, 1, opts);
    REQUIRE(strata.size() == 1);
    REQUIRE(strata[0].status == "ok");
    const double full = make_ipw_estimator(spec)(ds);
    CHECK(strata[0].estimate->ate == doctest::Approx(full).epsilon(1e-12));
}

TEST_CASE("a stratum missing one group is flagged, the rest are returned") {
    // Treated units only in the upper half of the h-index range.
    std::vector<PaperRecord> records;
    Rng rng(404);
    for (int i = 0; i < 400; ++i) {
        PaperRecord r;
        r.id = "s" + std::to_string(i);
        r.h_index = static_cast<double>(i % 100);
        r.race = r.h_index >= 50.0 && rng.bernoulli(0.5) ? 1 : 0;
        r.prestige = rng.bernoulli(0.4);
        r.outcome = 1 + static_cast<int>(rng.below(3));
        records.push_back(r);
    }
    const Dataset ds = Dataset::from_records(std::move(records), Provenance::synthetic);
    BootstrapOptions opts;
    opts.n_boot = 200;
    TreatmentSpec spec;
    spec.treatment = Attribute::race;
    spec.covariates = {Column::prestige};
    const auto strata = stratified_ate(ds, spec, Column::h_index, 2, opts);
    REQUIRE(strata.size() == 2);
    CHECK(strata[0].status != "ok");
    CHECK(strata[1].status == "ok");
}

TEST_CASE("constant outcomes give zero intersectional ATEs") {
    ScmConfig cfg;
    cfg.n_units = 900;
    cfg.seed = 5;
    Dataset base = to_dataset(generate(cfg));
    std::vector<PaperRecord> records = base.records();
    for (auto& r : records) r.outcome = 3;
    const Dataset ds = Dataset::from_records(std::move(records), Provenance::synthetic);
    BootstrapOptions opts;
    opts.n_boot = 200;
    const auto rows = intersectional_ate(ds, Attribute::race, Attribute::gender,
                                         {Column::h_index, Column::prestige},
                                         EstimationMethod::ipw, opts);
    REQUIRE(rows.size() == 4);
    for (const auto& r : rows) {
        REQUIRE(r.status == "ok");
        CHECK(r.estimate->ate == doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("the configured most-disadvantaged cell is most negative in both methods") {
    ScmConfig cfg;
    cfg.n_units = 6000;
    cfg.seed = 2027;
    cfg.tau_race = -0.8;
    cfg.tau_gender = -0.1;
    cfg.tau_race_gender = 0.5;  // minority-male is the configured worst cell
    const Dataset ds = to_dataset(generate(cfg));
    BootstrapOptions opts;
    opts.n_boot = 200;
    for (EstimationMethod method :
         {EstimationMethod::ipw, EstimationMethod::linear_regression}) {
        const auto rows = intersectional_ate(ds, Attribute::race, Attribute::gender,
                                             {Column::h_index, Column::prestige}, method, opts);
        REQUIRE(rows.size() == 4);
        double worst = 1e9;
        std::string worst_label;
        for (const auto& r : rows) {
            REQUIRE(r.status == "ok");
            if (r.estimate->ate < worst) {
                worst = r.estimate->ate;
                worst_label = r.label;
            }
        }
        CHECK(worst_label == "Minority, Male");
    }
}

TEST_CASE("an empty subgroup is flagged inestimable") {
    std::vector<PaperRecord> records;
    Rng rng(31);
    for (int i = 0; i < 200; ++i) {
        PaperRecord r;
        r.id = "e" + std::to_string(i);
        r.race = rng.bernoulli(0.4);
        r.gender = r.race ? 0 : static_cast<int>(rng.bernoulli(0.5));  // no minority-female cell
        r.h_index = std::abs(rng.normal(25, 10));
        r.prestige = rng.bernoulli(0.5);
        r.outcome = 1 + static_cast<int>(rng.below(3));
        records.push_back(r);
    }
    const Dataset ds = Dataset::from_records(std::move(records), Provenance::synthetic);
    BootstrapOptions opts;
    opts.n_boot = 200;
    const auto rows = intersectional_ate(ds, Attribute::race, Attribute::gender,
                                         {Column::h_index, Column::prestige},
                                         EstimationMethod::linear_regression, opts);
    REQUIRE(rows.size() == 4);
    bool saw_inestimable = false;
    for (const auto& r : rows) {
        if (r.label == "Minority, Female") {
            CHECK(r.status != "ok");
            saw_inestimable = true;
        }
    }
    CHECK(saw_inestimable);
}
