#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "causal_audit/data_model.hpp"

namespace causal_audit {

struct FitOptions {
    double tol = 1e-8;   // convergence threshold on the gradient L2 norm
    int max_iter = 100;
    double ridge = 0.0;  // L2 penalty on standardized covariate coefficients
};

struct FitMeta {
    int iterations = 0;
    double final_gradient_norm = 0.0;
    double ridge_penalty = 0.0;
    bool converged = false;
    // Set when a coefficient ran away with ridge = 0; the fit stops early and
    // the caller should consider refitting with ridge > 0.
    bool separation_warning = false;
    std::vector<double> log_likelihood_trace;  // penalized, one entry per iteration
};

// Fitted logistic propensity model on the original covariate scale.
struct LogisticModel {
    double intercept = 0.0;
    std::vector<double> coefficients;  // aligned to covariate_names
    std::vector<std::string> covariate_names;
    FitMeta fit_meta;

    double linear_predictor(const std::vector<double>& covariates) const;

    nlohmann::json to_json() const;
    static LogisticModel from_json(const nlohmann::json& j);
};

// Maximum-likelihood logistic fit via Newton/IRLS with step-halving and a
// gradient-ascent fallback. Covariates are standardized internally for
// conditioning; reported coefficients are back-transformed to the original
// scale. `columns` is one vector per covariate, all of length y.size().
LogisticModel fit_logistic(const std::vector<int>& y,
                           const std::vector<std::vector<double>>& columns,
                           const std::vector<std::string>& names, const FitOptions& opts = {});

LogisticModel fit_logistic(const Dataset& ds, const TreatmentSpec& spec,
                           const FitOptions& opts = {});

// sigmoid(intercept + beta . covariates), clamped strictly inside (0, 1).
double predict_propensity(const LogisticModel& m, const PaperRecord& r, const TreatmentSpec& spec);

// Scores every row of the dataset under the spec's covariate encoding.
std::vector<double> propensity_scores(const LogisticModel& m, const Dataset& ds,
                                      const TreatmentSpec& spec);

}  // namespace causal_audit
