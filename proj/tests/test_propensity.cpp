#include <doctest.h>

#include <array>
#include <cmath>
#include <vector>

#include "causal_audit/propensity.hpp"
#include "causal_audit/rng.hpp"
#include "causal_audit/stats.hpp"

using namespace causal_audit;

namespace {

// 20-row fixture with overlapping groups and a finite MLE.
constexpr std::array<int, 20> kT = {1, 0, 0, 1, 0, 1, 0, 0, 1, 0, 1, 0, 0, 1, 0, 0, 1, 0, 1, 0};
constexpr std::array<double, 20> kH = {5,  12, 30, 8,  25, 15, 40, 22, 10, 35,
                                       18, 28, 45, 7,  20, 33, 14, 26, 9,  38};
constexpr std::array<double, 20> kC = {0, 1, 1, 1, 0, 0, 1, 0, 1, 1, 0, 1, 1, 0, 0, 1, 1, 0, 0, 1};

std::vector<int> fixture_y() { return {kT.begin(), kT.end()}; }
std::vector<std::vector<double>> fixture_columns() {
    return {{kH.begin(), kH.end()}, {kC.begin(), kC.end()}};
}

// Independent IRLS oracle: raw covariates, plain Newton via Gauss-Jordan,
// no standardization or step control. Shares nothing with the library path.
std::vector<double> irls_oracle(const std::vector<int>& y,
                                const std::vector<std::vector<double>>& cols, int iters) {
    const std::size_t n = y.size();
    const std::size_t k = cols.size() + 1;
    std::vector<double> beta(k, 0.0);
    for (int it = 0; it < iters; ++it) {
        std::vector<double> g(k, 0.0);
        std::vector<double> h(k * k, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double eta = beta[0];
            for (std::size_t j = 1; j < k; ++j) eta += beta[j] * cols[j - 1][i];
            const double p = 1.0 / (1.0 + std::exp(-eta));
            const double w = p * (1.0 - p);
            std::vector<double> x(k, 1.0);
            for (std::size_t j = 1; j < k; ++j) x[j] = cols[j - 1][i];
            for (std::size_t a = 0; a < k; ++a) {
                g[a] += (y[i] - p) * x[a];
                for (std::size_t b = 0; b < k; ++b) h[a * k + b] += w * x[a] * x[b];
            }
        }
        // Gauss-Jordan solve of h d = g.
        std::vector<double> aug(k * (k + 1));
        for (std::size_t a = 0; a < k; ++a) {
            for (std::size_t b = 0; b < k; ++b) aug[a * (k + 1) + b] = h[a * k + b];
            aug[a * (k + 1) + k] = g[a];
        }
        for (std::size_t col = 0; col < k; ++col) {
            std::size_t pivot = col;
            for (std::size_t r = col + 1; r < k; ++r) {
                if (std::abs(aug[r * (k + 1) + col]) > std::abs(aug[pivot * (k + 1) + col]))
                    pivot = r;
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
        for (std::size_t a = 0; a < k; ++a) beta[a] += aug[a * (k + 1) + k];
    }
    return beta;
}

Dataset fixture_dataset() {
    std::vector<PaperRecord> records;
    for (std::size_t i = 0; i < kT.size(); ++i) {
        PaperRecord r;
        r.id = "f" + std::to_string(i);
        r.race = kT[i];
        r.h_index = kH[i];
        r.prestige = kC[i];
        r.outcome = 2;
        records.push_back(r);
    }
    return Dataset::from_records(std::move(records), Provenance::ingested);
}

TreatmentSpec fixture_spec() {
    TreatmentSpec spec;
    spec.treatment = Attribute::race;
    spec.covariates = {Column::h_index, Column::prestige};
    return spec;
}

}  // namespace

TEST_CASE("fit matches the independent IRLS oracle to 1e-6") {
    FitOptions opts;
    opts.tol = 1e-10;
    const LogisticModel m = fit_logistic(fixture_y(), fixture_columns(), {"h_index", "prestige"},
                                         opts);
    const std::vector<double> oracle = irls_oracle(fixture_y(), fixture_columns(), 50);
    CHECK(m.fit_meta.converged);
    CHECK(std::abs(m.intercept - oracle[0]) < 1e-6);
    CHECK(std::abs(m.coefficients[0] - oracle[1]) < 1e-6);
    CHECK(std::abs(m.coefficients[1] - oracle[2]) < 1e-6);
}

TEST_CASE("coin-flip treatment fits to near-zero coefficients") {
    Rng rng(606);
    std::vector<int> y(4000);
    std::vector<double> h(4000), c(4000);
    for (std::size_t i = 0; i < y.size(); ++i) {
        y[i] = rng.bernoulli(0.5);
        h[i] = std::max(0.0, rng.normal(26.0, 14.0));
        c[i] = rng.bernoulli(0.4);
    }
    const LogisticModel m = fit_logistic(y, {h, c}, {"h_index", "prestige"});
    CHECK(std::abs(m.intercept) < 0.1);
    CHECK(std::abs(m.coefficients[0]) < 0.1);
    CHECK(std::abs(m.coefficients[1]) < 0.1);
}

TEST_CASE("perfect separation raises the warning instead of diverging") {
    std::vector<int> y(kT.size());
    for (std::size_t i = 0; i < kH.size(); ++i) y[i] = kH[i] > 20.0 ? 1 : 0;
    const LogisticModel m = fit_logistic(y, fixture_columns(), {"h_index", "prestige"});
    CHECK(m.fit_meta.separation_warning);
    CHECK_FALSE(m.fit_meta.converged);
}

TEST_CASE("ridge tames the separated fit") {
    std::vector<int> y(kT.size());
    for (std::size_t i = 0; i < kH.size(); ++i) y[i] = kH[i] > 20.0 ? 1 : 0;
    FitOptions opts;
    opts.ridge = 1.0;
    const LogisticModel m = fit_logistic(y, fixture_columns(), {"h_index", "prestige"}, opts);
    CHECK(m.fit_meta.converged);
    CHECK_FALSE(m.fit_meta.separation_warning);
}

TEST_CASE("non-convergence carries the last iterate") {
    FitOptions opts;
    opts.max_iter = 1;
    opts.tol = 1e-14;
    try {
        fit_logistic(fixture_y(), fixture_columns(), {"h_index", "prestige"}, opts);
        FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
        CHECK(e.last_iterate().size() == 3);
        CHECK(e.gradient_norm() > 0.0);
    }
}

TEST_CASE("predict_propensity closed forms") {
    LogisticModel m;
    m.intercept = 0.0;
    m.coefficients = {0.0, 0.0};
    m.covariate_names = {"h_index", "prestige"};
    TreatmentSpec spec = fixture_spec();
    PaperRecord r;
    r.h_index = 12.0;
    r.prestige = 1.0;
    CHECK(predict_propensity(m, r, spec) == doctest::Approx(0.5));

    LogisticModel single;
    single.intercept = 0.0;
    single.coefficients = {1.0};
    single.covariate_names = {"h_index"};
    TreatmentSpec sspec;
    sspec.treatment = Attribute::race;
    sspec.covariates = {Column::h_index};
    PaperRecord r2;
    r2.h_index = 2.0;
    CHECK(predict_propensity(single, r2, sspec) ==
          doctest::Approx(1.0 / (1.0 + std::exp(-2.0))).epsilon(1e-12));
}

TEST_CASE("score is monotone in a positively weighted covariate") {
    LogisticModel m;
    m.intercept = -0.3;
    m.coefficients = {0.7};
    m.covariate_names = {"h_index"};
    TreatmentSpec spec;
    spec.treatment = Attribute::race;
    spec.covariates = {Column::h_index};
    double prev = 0.0;
    for (double h = 0.0; h < 5.0; h += 0.25) {
        PaperRecord r;
        r.h_index = h;
        const double p = predict_propensity(m, r, spec);
        CHECK(p > prev);
        prev = p;
    }
}

TEST_CASE("scores never reach exactly 0 or 1") {
    LogisticModel m;
    m.intercept = 0.0;
    m.coefficients = {100.0};
    m.covariate_names = {"h_index"};
    TreatmentSpec spec;
    spec.treatment = Attribute::race;
    spec.covariates = {Column::h_index};
    PaperRecord high, low;
    high.h_index = 100.0;
    low.h_index = 0.0;
    m.intercept = -5000.0;
    CHECK(predict_propensity(m, low, spec) > 0.0);
    m.intercept = 5000.0;
    CHECK(predict_propensity(m, high, spec) < 1.0);
}

TEST_CASE("covariate count mismatch is a shape error") {
    LogisticModel m;
    m.intercept = 0.0;
    m.coefficients = {1.0};
    m.covariate_names = {"h_index"};
    PaperRecord r;
    CHECK_THROWS_AS(predict_propensity(m, r, fixture_spec()), ShapeError);
}

TEST_CASE("score equations hold at the converged fit") {
    const Dataset ds = fixture_dataset();
    const TreatmentSpec spec = fixture_spec();
    FitOptions opts;
    opts.tol = 1e-10;
    const LogisticModel m = fit_logistic(ds, spec, opts);
    const std::vector<double> e = propensity_scores(m, ds, spec);
    double s0 = 0, s1 = 0, s2 = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const double r = kT[i] - e[i];
        s0 += r;
        s1 += r * kH[i];
        s2 += r * kC[i];
    }
    CHECK(std::abs(s0) < 1e-5);
    CHECK(std::abs(s1) < 1e-4);  // h_index column is on a ~40x larger scale
    CHECK(std::abs(s2) < 1e-5);
}

TEST_CASE("log-likelihood trace is non-decreasing up to evaluation noise") {
    const LogisticModel m = fit_logistic(fixture_y(), fixture_columns(), {"h_index", "prestige"});
    const auto& trace = m.fit_meta.log_likelihood_trace;
    REQUIRE(trace.size() >= 2);
    for (std::size_t i = 1; i < trace.size(); ++i)
        CHECK(trace[i] >= trace[i - 1] - 1e-9 * (std::abs(trace[i - 1]) + 1.0));
}

TEST_CASE("rescaling a covariate rescales its coefficient and nothing else") {
    Rng rng(99);
    for (double k : {0.1, 3.0, 250.0}) {
        auto cols = fixture_columns();
        const LogisticModel base =
            fit_logistic(fixture_y(), cols, {"h_index", "prestige"});
        auto scaled_cols = cols;
        for (double& v : scaled_cols[0]) v *= k;
        const LogisticModel scaled =
            fit_logistic(fixture_y(), scaled_cols, {"h_index", "prestige"});
        CHECK(scaled.coefficients[0] == doctest::Approx(base.coefficients[0] / k).epsilon(1e-6));
        CHECK(scaled.coefficients[1] == doctest::Approx(base.coefficients[1]).epsilon(1e-6));
        CHECK(scaled.intercept == doctest::Approx(base.intercept).epsilon(1e-6));
        // Propensities are unchanged at matched rows.
        for (int trial = 0; trial < 5; ++trial) {
            const std::size_t i = rng.below(kT.size());
            const double eta_base = base.linear_predictor({kH[i], kC[i]});
            const double eta_scaled = scaled.linear_predictor({kH[i] * k, kC[i]});
            CHECK(sigmoid(eta_base) == doctest::Approx(sigmoid(eta_scaled)).epsilon(1e-8));
        }
    }
}

TEST_CASE("empty covariate list is rejected for propensity fitting") {
    CHECK_THROWS_AS(fit_logistic(fixture_y(), {}, {}), ConfigError);
}

TEST_CASE("one-group data cannot be fit") {
    std::vector<int> y(10, 1);
    std::vector<double> x = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    CHECK_THROWS_AS(fit_logistic(y, {x}, {"x"}), DomainError);
}

TEST_CASE("LogisticModel JSON round-trip") {
    const LogisticModel m = fit_logistic(fixture_y(), fixture_columns(), {"h_index", "prestige"});
    const LogisticModel back = LogisticModel::from_json(m.to_json());
    CHECK(back.intercept == m.intercept);
    CHECK(back.coefficients == m.coefficients);
    CHECK(back.covariate_names == m.covariate_names);
    CHECK(back.fit_meta.converged == m.fit_meta.converged);
}
