#include "causal_audit/estimators.hpp"

#include <algorithm>
#include <cmath>

#include "causal_audit/linalg.hpp"
#include "causal_audit/parallel.hpp"
#include "causal_audit/rng.hpp"
#include "causal_audit/stats.hpp"

namespace causal_audit {

const char* method_name(EstimationMethod m) {
    return m == EstimationMethod::ipw ? "ipw" : "linear_regression";
}

double ate_ipw(std::span<const int> treatment, std::span<const double> outcome,
               std::span<const double> weights) {
    if (treatment.size() != outcome.size() || treatment.size() != weights.size())
        throw ShapeError("ate_ipw: length mismatch");
    double num1 = 0, den1 = 0, num0 = 0, den0 = 0;
    for (std::size_t i = 0; i < treatment.size(); ++i) {
        if (treatment[i]) {
            num1 += weights[i] * outcome[i];
            den1 += weights[i];
        } else {
            num0 += weights[i] * outcome[i];
            den0 += weights[i];
        }
    }
    if (den1 <= 0.0 || den0 <= 0.0)
        throw EstimationError("ate_ipw: a group has zero total weight");
    return num1 / den1 - num0 / den0;
}

double ate_ipw(const Dataset& ds, const TreatmentSpec& spec, const WeightSet& ws) {
    if (ws.weights.size() != ds.size())
        throw ShapeError("ate_ipw: weights not aligned to dataset rows");
    const std::vector<int> t = ds.treatment_vector(spec);
    const std::vector<double> y = ds.outcome_vector();
    return ate_ipw(t, y, ws.weights);
}

double ols_treatment_coefficient(std::span<const int> treatment, std::span<const double> outcome,
                                 const std::vector<std::vector<double>>& covariates,
                                 const std::vector<std::string>& names) {
    const std::size_t n = treatment.size();
    if (outcome.size() != n) throw ShapeError("ols: outcome length mismatch");
    const std::size_t k = 2 + covariates.size();  // intercept, treatment, covariates

    std::vector<std::string> column_labels = {"intercept", "treatment"};
    for (const auto& name : names) column_labels.push_back(name);

    // Column accessor for the implicit design matrix.
    auto x = [&](std::size_t i, std::size_t j) -> double {
        if (j == 0) return 1.0;
        if (j == 1) return static_cast<double>(treatment[i]);
        return covariates[j - 2][i];
    };

    std::vector<double> xtx(k * k, 0.0), xty(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t a = 0; a < k; ++a) {
            const double xa = x(i, a);
            xty[a] += xa * outcome[i];
            for (std::size_t b = 0; b <= a; ++b) xtx[a * k + b] += xa * x(i, b);
        }
    }
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = a + 1; b < k; ++b) xtx[a * k + b] = xtx[b * k + a];

    std::size_t dependent = 0;
    auto beta = solve_spd(xtx, k, xty, &dependent);
    if (!beta) {
        const std::string& col = column_labels[std::min(dependent, column_labels.size() - 1)];
        throw CollinearityError(
            "ols: design matrix is rank deficient; column '" + col +
                "' is linearly dependent on the preceding columns",
            col);
    }
    return (*beta)[1];
}

double ate_linear_regression(const Dataset& ds, const TreatmentSpec& spec) {
    spec.validate();
    ds.require_both_groups(spec);
    std::vector<std::string> names;
    for (Column c : spec.covariates) names.emplace_back(column_name(c));
    const std::vector<int> t = ds.treatment_vector(spec);
    const std::vector<double> y = ds.outcome_vector();
    return ols_treatment_coefficient(t, y, ds.covariate_columns(spec), names);
}

double naive_difference(const Dataset& ds, const TreatmentSpec& spec) {
    ds.require_both_groups(spec);
    const std::vector<int> t = ds.treatment_vector(spec);
    const std::vector<double> y = ds.outcome_vector();
    double s1 = 0, s0 = 0;
    std::size_t n1 = 0, n0 = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i]) {
            s1 += y[i];
            ++n1;
        } else {
            s0 += y[i];
            ++n0;
        }
    }
    return s1 / static_cast<double>(n1) - s0 / static_cast<double>(n0);
}

BootstrapResult bootstrap_ci(const DatasetEstimator& estimator, const Dataset& ds,
                             const BootstrapOptions& opts) {
    if (opts.n_boot < 200) throw ConfigError("bootstrap_ci: n_boot must be >= 200");
    if (!(opts.alpha > 0.0 && opts.alpha < 1.0))
        throw ConfigError("bootstrap_ci: alpha must be in (0,1)");
    if (ds.size() == 0) throw DomainError("bootstrap_ci: empty dataset");

    const std::size_t n = ds.size();
    const auto n_boot = static_cast<std::size_t>(opts.n_boot);
    std::vector<double> stats(n_boot, 0.0);
    std::vector<char> ok(n_boot, 0);
    const Rng root(opts.seed);

    parallel_for(n_boot, [&](std::size_t r) {
        Rng stream = root.child(r);
        std::vector<PaperRecord> resampled;
        resampled.reserve(n);
        for (std::size_t i = 0; i < n; ++i)
            resampled.push_back(ds.records()[stream.below(n)]);
        try {
            const Dataset boot =
                Dataset::from_records(std::move(resampled), ds.provenance(), false);
            stats[r] = estimator(boot);
            ok[r] = 1;
        } catch (const Error&) {
            ok[r] = 0;  // skipped and counted
        }
    });

    std::vector<double> kept;
    kept.reserve(n_boot);
    for (std::size_t r = 0; r < n_boot; ++r) {
        if (ok[r]) kept.push_back(stats[r]);
    }
    const int n_failed = static_cast<int>(n_boot - kept.size());
    if (static_cast<double>(n_failed) > 0.10 * static_cast<double>(n_boot))
        throw EstimationError("bootstrap_ci: unstable estimate, " + std::to_string(n_failed) +
                              " of " + std::to_string(n_boot) + " resamples failed");

    BootstrapResult result;
    result.n_used = static_cast<int>(kept.size());
    result.n_failed = n_failed;
    result.interval.low = quantile(kept, opts.alpha / 2.0);
    result.interval.high = quantile(kept, 1.0 - opts.alpha / 2.0);
    return result;
}

DatasetEstimator make_ipw_estimator(TreatmentSpec spec, FitOptions fit_opts,
                                    WeightOptions weight_opts) {
    spec.validate();
    return [spec, fit_opts, weight_opts](const Dataset& ds) {
        const LogisticModel model = fit_logistic(ds, spec, fit_opts);
        const std::vector<double> scores = propensity_scores(model, ds, spec);
        const WeightSet ws = ipw_weights(ds, spec, scores, weight_opts);
        return ate_ipw(ds, spec, ws);
    };
}

DatasetEstimator make_lr_estimator(TreatmentSpec spec) {
    spec.validate();
    return [spec](const Dataset& ds) { return ate_linear_regression(ds, spec); };
}

namespace {

CausalEstimate finish_estimate(double point, const Dataset& ds, const std::vector<int>& t,
                               EstimationMethod method, const DatasetEstimator& estimator,
                               const BootstrapOptions& opts) {
    CausalEstimate est;
    est.ate = point;
    est.method = method;
    est.alpha = opts.alpha;
    est.seed = opts.seed;
    est.n_treated = static_cast<std::size_t>(std::count(t.begin(), t.end(), 1));
    est.n_control = ds.size() - est.n_treated;
    const BootstrapResult boot = bootstrap_ci(estimator, ds, opts);
    est.ci = boot.interval;
    est.point_outside_ci = point < boot.interval.low || point > boot.interval.high;
    return est;
}

}  // namespace

CausalEstimate estimate_ate(const Dataset& ds, const TreatmentSpec& spec, EstimationMethod method,
                            const BootstrapOptions& opts, const FitOptions& fit_opts,
                            const WeightOptions& weight_opts) {
    const DatasetEstimator estimator = method == EstimationMethod::ipw
                                           ? make_ipw_estimator(spec, fit_opts, weight_opts)
                                           : make_lr_estimator(spec);
    const double point = estimator(ds);
    return finish_estimate(point, ds, ds.treatment_vector(spec), method, estimator, opts);
}

std::vector<StratumEstimate> stratified_ate(const Dataset& ds, const TreatmentSpec& spec,
                                            Column strat_var, int n_strata,
                                            const BootstrapOptions& opts,
                                            const FitOptions& fit_opts,
                                            const WeightOptions& weight_opts) {
    if (n_strata < 1) throw ConfigError("stratified_ate: n_strata must be >= 1");
    if (ds.size() == 0) throw DomainError("stratified_ate: empty dataset");
    const std::vector<double> values = ds.column_vector(strat_var);

    std::vector<double> cuts;  // upper boundaries of strata 0..K-2
    for (int kk = 1; kk < n_strata; ++kk)
        cuts.push_back(quantile(values, static_cast<double>(kk) / n_strata));

    // Boundary values go to the lower stratum: stratum k covers
    // (cut[k-1], cut[k]], with open ends at the extremes.
    auto stratum_of = [&](double x) {
        for (std::size_t kk = 0; kk < cuts.size(); ++kk) {
            if (x <= cuts[kk]) return static_cast<int>(kk);
        }
        return n_strata - 1;
    };

    std::vector<std::vector<PaperRecord>> buckets(static_cast<std::size_t>(n_strata));
    for (const auto& r : ds.records())
        buckets[static_cast<std::size_t>(stratum_of(column_value(r, strat_var)))].push_back(r);

    const double lo_all = *std::min_element(values.begin(), values.end());
    const double hi_all = *std::max_element(values.begin(), values.end());

    std::vector<StratumEstimate> result;
    for (int s = 0; s < n_strata; ++s) {
        StratumEstimate se;
        se.index = s;
        se.lower = s == 0 ? lo_all : cuts[static_cast<std::size_t>(s - 1)];
        se.upper = s == n_strata - 1 ? hi_all : cuts[static_cast<std::size_t>(s)];
        se.n = buckets[static_cast<std::size_t>(s)].size();
        try {
            const Dataset sub =
                Dataset::from_records(buckets[static_cast<std::size_t>(s)], ds.provenance());
            BootstrapOptions stratum_opts = opts;
            stratum_opts.seed = Rng::child_seed(opts.seed, static_cast<std::uint64_t>(s));
            se.estimate = estimate_ate(sub, spec, EstimationMethod::ipw, stratum_opts, fit_opts,
                                       weight_opts);
            se.status = "ok";
        } catch (const Error& e) {
            se.status = std::string("inestimable: ") + e.what();
        }
        result.push_back(std::move(se));
    }
    return result;
}

namespace {

DatasetEstimator make_cell_estimator(Attribute attr_a, Attribute attr_b, int value_a, int value_b,
                                     std::vector<Column> covariates, EstimationMethod method,
                                     FitOptions fit_opts, WeightOptions weight_opts) {
    return [=](const Dataset& ds) {
        const std::size_t n = ds.size();
        std::vector<int> t(n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto& r = ds.records()[i];
            t[i] = attribute_value(r, attr_a) == value_a && attribute_value(r, attr_b) == value_b
                       ? 1
                       : 0;
        }
        const std::size_t n1 = static_cast<std::size_t>(std::count(t.begin(), t.end(), 1));
        if (n1 == 0 || n1 == n) throw DomainError("intersectional: empty subgroup");
        const std::vector<double> y = ds.outcome_vector();
        std::vector<std::vector<double>> cols;
        std::vector<std::string> names;
        for (Column c : covariates) {
            cols.push_back(ds.column_vector(c));
            names.emplace_back(column_name(c));
        }
        if (method == EstimationMethod::linear_regression)
            return ols_treatment_coefficient(t, y, cols, names);
        const LogisticModel model = fit_logistic(t, cols, names, fit_opts);
        std::vector<double> scores(n);
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> xi(cols.size());
            for (std::size_t j = 0; j < cols.size(); ++j) xi[j] = cols[j][i];
            scores[i] = std::clamp(sigmoid(model.linear_predictor(xi)), 1e-12, 1.0 - 1e-12);
        }
        const WeightSet ws = ipw_weights(t, scores, weight_opts);
        return ate_ipw(t, y, ws.weights);
    };
}

}  // namespace

std::vector<SubgroupEstimate> intersectional_ate(const Dataset& ds, Attribute attr_a,
                                                 Attribute attr_b,
                                                 const std::vector<Column>& covariates,
                                                 EstimationMethod method,
                                                 const BootstrapOptions& opts,
                                                 const FitOptions& fit_opts,
                                                 const WeightOptions& weight_opts) {
    if (attr_a == attr_b) throw ConfigError("intersectional_ate: attributes must differ");
    for (Column c : covariates) {
        if (c == column_of(attr_a) || c == column_of(attr_b))
            throw ConfigError("intersectional_ate: subgroup attribute used as covariate");
    }
    std::vector<SubgroupEstimate> result;
    std::uint64_t cell_index = 0;
    for (int va : {0, 1}) {
        for (int vb : {0, 1}) {
            SubgroupEstimate sg;
            sg.value_a = va;
            sg.value_b = vb;
            sg.label =
                attribute_level_label(attr_a, va) + ", " + attribute_level_label(attr_b, vb);
            const DatasetEstimator estimator = make_cell_estimator(
                attr_a, attr_b, va, vb, covariates, method, fit_opts, weight_opts);
            try {
                const double point = estimator(ds);
                std::vector<int> t(ds.size());
                for (std::size_t i = 0; i < ds.size(); ++i) {
                    const auto& r = ds.records()[i];
                    t[i] = attribute_value(r, attr_a) == va && attribute_value(r, attr_b) == vb;
                }
                BootstrapOptions cell_opts = opts;
                cell_opts.seed = Rng::child_seed(opts.seed, cell_index);
                sg.estimate = finish_estimate(point, ds, t, method, estimator, cell_opts);
                sg.status = "ok";
            } catch (const Error& e) {
                sg.status = std::string("inestimable: ") + e.what();
            }
            result.push_back(std::move(sg));
            ++cell_index;
        }
    }
    return result;
}

nlohmann::json CausalEstimate::to_json() const {
    nlohmann::json j = {{"ate", ate},
                        {"alpha", alpha},
                        {"method", method_name(method)},
                        {"n_treated", n_treated},
                        {"n_control", n_control},
                        {"seed", seed},
                        {"sign_convention", kSignConvention},
                        {"point_outside_ci", point_outside_ci}};
    if (ci) {
        j["ci"] = {ci->low, ci->high};
    } else {
        j["ci"] = nullptr;
    }
    return j;
}

}  // namespace causal_audit
