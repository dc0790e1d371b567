#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "causal_audit/data_model.hpp"
#include "causal_audit/propensity.hpp"
#include "causal_audit/weighting.hpp"

namespace causal_audit {

enum class EstimationMethod { ipw, linear_regression };

const char* method_name(EstimationMethod m);

// Sign convention carried on every emitted estimate: treated minus control
// on the outcome-rank scale where higher is better, so a negative ATE means
// a causal disadvantage for the treated (disadvantaged-coded) group.
inline constexpr const char* kSignConvention = "treated_minus_control_higher_is_better";

struct Interval {
    double low = 0.0;
    double high = 0.0;
};

struct CausalEstimate {
    double ate = 0.0;
    std::optional<Interval> ci;  // percentile bootstrap interval when computed
    double alpha = 0.05;
    EstimationMethod method = EstimationMethod::ipw;
    std::size_t n_treated = 0;
    std::size_t n_control = 0;
    std::uint64_t seed = 0;
    // Percentile intervals and the full-sample point estimate can disagree;
    // when the point falls outside its own interval this flag must be set.
    bool point_outside_ci = false;

    nlohmann::json to_json() const;
};

// Eq.-style weighted difference in means between treated and control.
double ate_ipw(std::span<const int> treatment, std::span<const double> outcome,
               std::span<const double> weights);
double ate_ipw(const Dataset& ds, const TreatmentSpec& spec, const WeightSet& ws);

// OLS of the outcome on intercept + treatment + covariates; returns the
// treatment coefficient. Column names are used in collinearity diagnostics.
double ols_treatment_coefficient(std::span<const int> treatment, std::span<const double> outcome,
                                 const std::vector<std::vector<double>>& covariates,
                                 const std::vector<std::string>& names);
double ate_linear_regression(const Dataset& ds, const TreatmentSpec& spec);

// Unweighted difference in group means (the confounded baseline contrast).
double naive_difference(const Dataset& ds, const TreatmentSpec& spec);

struct BootstrapOptions {
    int n_boot = 1000;
    double alpha = 0.05;
    std::uint64_t seed = 0;
};

using DatasetEstimator = std::function<double(const Dataset&)>;

struct BootstrapResult {
    Interval interval;
    int n_used = 0;    // resamples that produced an estimate
    int n_failed = 0;  // resamples skipped due to estimator failure
};

// Row-wise nonparametric bootstrap percentile interval. Resample r draws its
// indices from the child stream (seed, r), so results do not depend on
// execution order and replicate exactly for a fixed seed.
BootstrapResult bootstrap_ci(const DatasetEstimator& estimator, const Dataset& ds,
                             const BootstrapOptions& opts);

// Estimators suitable for bootstrap_ci: the IPW route refits the propensity
// model inside every resample so the interval reflects its uncertainty.
DatasetEstimator make_ipw_estimator(TreatmentSpec spec, FitOptions fit_opts = {},
                                    WeightOptions weight_opts = {});
DatasetEstimator make_lr_estimator(TreatmentSpec spec);

// Full-sample point estimate plus bootstrap interval in one report row.
CausalEstimate estimate_ate(const Dataset& ds, const TreatmentSpec& spec, EstimationMethod method,
                            const BootstrapOptions& opts, const FitOptions& fit_opts = {},
                            const WeightOptions& weight_opts = {});

struct StratumEstimate {
    int index = 0;          // 0 = lowest stratum
    double lower = 0.0;     // stratification variable range (lower, upper]
    double upper = 0.0;
    std::size_t n = 0;
    std::optional<CausalEstimate> estimate;
    std::string status;  // "ok" or the reason the stratum is inestimable
};

// Splits rows by empirical quantiles of `strat_var` (boundary values go to
// the lower stratum) and runs the full IPW pipeline independently per
// stratum. Inestimable strata are flagged, the rest still returned.
std::vector<StratumEstimate> stratified_ate(const Dataset& ds, const TreatmentSpec& spec,
                                            Column strat_var, int n_strata,
                                            const BootstrapOptions& opts,
                                            const FitOptions& fit_opts = {},
                                            const WeightOptions& weight_opts = {});

struct SubgroupEstimate {
    std::string label;
    int value_a = 0;
    int value_b = 0;
    std::optional<CausalEstimate> estimate;
    std::string status;
};

// Effect of belonging to each (attr_a x attr_b) cell versus all other units,
// estimated with the requested method and the given adjustment covariates.
std::vector<SubgroupEstimate> intersectional_ate(const Dataset& ds, Attribute attr_a,
                                                 Attribute attr_b,
                                                 const std::vector<Column>& covariates,
                                                 EstimationMethod method,
                                                 const BootstrapOptions& opts,
                                                 const FitOptions& fit_opts = {},
                                                 const WeightOptions& weight_opts = {});

}  // namespace causal_audit
