#include "causal_audit/propensity.hpp"

#include <algorithm>
#include <cmath>

#include "causal_audit/linalg.hpp"
#include "causal_audit/stats.hpp"

namespace causal_audit {

namespace {

// Coefficient magnitude (standardized scale) beyond which a ridgeless fit is
// treated as quasi-complete separation. sigmoid saturates to within 3e-7 of
// {0,1} by |eta| = 15, so nothing useful lies past this cap.
constexpr double kSeparationCap = 15.0;

constexpr double kPropensityFloor = 1e-12;

struct StandardizedDesign {
    std::size_t n = 0;
    std::size_t p = 0;                      // number of covariates (columns beyond intercept)
    std::vector<std::vector<double>> cols;  // standardized covariate columns
    std::vector<double> means;
    std::vector<double> sds;
};

StandardizedDesign standardize(const std::vector<std::vector<double>>& columns,
                               const std::vector<std::string>& names, std::size_t n) {
    StandardizedDesign d;
    d.n = n;
    d.p = columns.size();
    d.cols.resize(d.p);
    d.means.resize(d.p);
    d.sds.resize(d.p);
    for (std::size_t j = 0; j < d.p; ++j) {
        const auto& x = columns[j];
        if (x.size() != n) throw ShapeError("covariate '" + names[j] + "': length mismatch");
        for (double v : x) {
            if (!std::isfinite(v))
                throw DomainError("covariate '" + names[j] + "': non-finite value");
        }
        const double m = mean(x);
        double sd = 0.0;
        for (double v : x) sd += (v - m) * (v - m);
        sd = std::sqrt(sd / static_cast<double>(n));
        if (sd == 0.0)
            throw CollinearityError("covariate '" + names[j] + "' is constant", names[j]);
        d.means[j] = m;
        d.sds[j] = sd;
        d.cols[j].resize(n);
        for (std::size_t i = 0; i < n; ++i) d.cols[j][i] = (x[i] - m) / sd;
    }
    return d;
}

// ll = sum_i y_i eta_i - log(1 + exp(eta_i)), in the overflow-safe form,
// minus the ridge penalty on the non-intercept coefficients.
double penalized_log_likelihood(const std::vector<int>& y, const std::vector<double>& eta,
                                const std::vector<double>& beta, double ridge) {
    double ll = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double e = eta[i];
        const double log1pexp = e > 0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e));
        ll += y[i] * e - log1pexp;
    }
    double penalty = 0.0;
    for (std::size_t j = 1; j < beta.size(); ++j) penalty += beta[j] * beta[j];
    return ll - 0.5 * ridge * penalty;
}

void compute_eta(const StandardizedDesign& d, const std::vector<double>& beta,
                 std::vector<double>& eta) {
    for (std::size_t i = 0; i < d.n; ++i) {
        double e = beta[0];
        for (std::size_t j = 0; j < d.p; ++j) e += beta[j + 1] * d.cols[j][i];
        eta[i] = e;
    }
}

// Gradient of the penalized log-likelihood: X^T (y - p) - ridge * beta (no
// penalty on the intercept).
std::vector<double> compute_gradient(const StandardizedDesign& d, const std::vector<int>& y,
                                     const std::vector<double>& prob,
                                     const std::vector<double>& beta, double ridge) {
    std::vector<double> g(d.p + 1, 0.0);
    for (std::size_t i = 0; i < d.n; ++i) {
        const double r = y[i] - prob[i];
        g[0] += r;
        for (std::size_t j = 0; j < d.p; ++j) g[j + 1] += r * d.cols[j][i];
    }
    for (std::size_t j = 1; j <= d.p; ++j) g[j] -= ridge * beta[j];
    return g;
}

double norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

}  // namespace

LogisticModel fit_logistic(const std::vector<int>& y,
                           const std::vector<std::vector<double>>& columns,
                           const std::vector<std::string>& names, const FitOptions& opts) {
    if (columns.size() != names.size()) throw ShapeError("fit_logistic: names/columns mismatch");
    if (columns.empty())
        throw ConfigError("fit_logistic: propensity estimation needs at least one covariate");
    const std::size_t n = y.size();
    if (n == 0) throw DomainError("fit_logistic: empty data");
    std::size_t n1 = 0;
    for (int v : y) n1 += static_cast<std::size_t>(v);
    if (n1 == 0 || n1 == n)
        throw DomainError("fit_logistic: a treatment group is empty (n_treated=" +
                          std::to_string(n1) + ", n=" + std::to_string(n) + ")");
    if (!(opts.tol > 0.0)) throw ConfigError("fit_logistic: tol must be > 0");
    if (opts.max_iter < 1) throw ConfigError("fit_logistic: max_iter must be >= 1");
    if (opts.ridge < 0.0) throw ConfigError("fit_logistic: ridge must be >= 0");

    const StandardizedDesign d = standardize(columns, names, n);
    const std::size_t k = d.p + 1;

    std::vector<double> beta(k, 0.0);
    std::vector<double> eta(n, 0.0), prob(n, 0.0);
    FitMeta meta;
    meta.ridge_penalty = opts.ridge;

    compute_eta(d, beta, eta);
    double ll = penalized_log_likelihood(y, eta, beta, opts.ridge);
    double grad_norm = 0.0;
    bool converged = false;
    int iter = 0;

    for (; iter < opts.max_iter; ++iter) {
        for (std::size_t i = 0; i < n; ++i) prob[i] = sigmoid(eta[i]);
        std::vector<double> g = compute_gradient(d, y, prob, beta, opts.ridge);
        grad_norm = norm2(g);
        meta.log_likelihood_trace.push_back(ll);
        if (grad_norm <= opts.tol) {
            converged = true;
            break;
        }

        if (opts.ridge == 0.0) {
            bool runaway = false;
            for (std::size_t j = 1; j < k; ++j) runaway |= std::abs(beta[j]) > kSeparationCap;
            if (runaway) {
                meta.separation_warning = true;
                break;
            }
        }

        // Newton direction from the weighted normal equations.
        std::vector<double> h(k * k, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double w = std::max(prob[i] * (1.0 - prob[i]), 1e-10);
            h[0] += w;
            for (std::size_t a = 0; a < d.p; ++a) {
                const double xa = d.cols[a][i];
                h[(a + 1) * k] += w * xa;
                for (std::size_t b = 0; b <= a; ++b)
                    h[(a + 1) * k + (b + 1)] += w * xa * d.cols[b][i];
            }
        }
        for (std::size_t a = 0; a < k; ++a)
            for (std::size_t b = a + 1; b < k; ++b) h[a * k + b] = h[b * k + a];
        for (std::size_t j = 1; j < k; ++j) h[j * k + j] += opts.ridge;

        std::vector<double> step;
        if (auto newton = solve_spd(h, k, g)) {
            step = std::move(*newton);
        } else {
            // Singular curvature; fall back to a scaled gradient-ascent step.
            double scale = 0.0;
            for (std::size_t j = 0; j < k; ++j) scale = std::max(scale, h[j * k + j]);
            step = g;
            for (double& s : step) s /= std::max(scale, 1.0);
        }

        // Step-halving keeps the penalized log-likelihood non-decreasing, up
        // to evaluation noise: near the optimum the true improvement of a
        // full Newton step falls below the floating-point resolution of the
        // log-likelihood, and rejecting those steps would stall the gradient
        // above tol forever.
        const double ll_noise = 1e-10 * (std::abs(ll) + 1.0);
        double factor = 1.0;
        bool improved = false;
        std::vector<double> candidate(k);
        for (int half = 0; half < 40; ++half) {
            for (std::size_t j = 0; j < k; ++j) candidate[j] = beta[j] + factor * step[j];
            compute_eta(d, candidate, eta);
            const double cand_ll = penalized_log_likelihood(y, eta, candidate, opts.ridge);
            if (cand_ll >= ll - ll_noise) {
                beta = candidate;
                ll = cand_ll;
                improved = true;
                break;
            }
            factor *= 0.5;
        }
        if (!improved) {
            // No ascent direction left at machine precision: we are at the
            // optimum as far as the likelihood can tell.
            compute_eta(d, beta, eta);
            converged = grad_norm <= std::max(opts.tol, 1e-6 * static_cast<double>(n));
            break;
        }
    }

    meta.iterations = iter;
    meta.final_gradient_norm = grad_norm;
    meta.converged = converged;

    // Back-transform to the original covariate scale.
    LogisticModel model;
    model.covariate_names = names;
    model.coefficients.resize(d.p);
    double intercept = beta[0];
    for (std::size_t j = 0; j < d.p; ++j) {
        model.coefficients[j] = beta[j + 1] / d.sds[j];
        intercept -= beta[j + 1] * d.means[j] / d.sds[j];
    }
    model.intercept = intercept;
    model.fit_meta = meta;

    if (!converged && !meta.separation_warning) {
        std::vector<double> last(1, model.intercept);
        last.insert(last.end(), model.coefficients.begin(), model.coefficients.end());
        throw ConvergenceError("fit_logistic: no convergence after " +
                                   std::to_string(opts.max_iter) +
                                   " iterations (gradient norm " + std::to_string(grad_norm) +
                                   ", tol " + std::to_string(opts.tol) + ")",
                               std::move(last), grad_norm);
    }
    return model;
}

LogisticModel fit_logistic(const Dataset& ds, const TreatmentSpec& spec, const FitOptions& opts) {
    spec.validate();
    ds.require_both_groups(spec);
    std::vector<std::string> names;
    names.reserve(spec.covariates.size());
    for (Column c : spec.covariates) names.emplace_back(column_name(c));
    return fit_logistic(ds.treatment_vector(spec), ds.covariate_columns(spec), names, opts);
}

double LogisticModel::linear_predictor(const std::vector<double>& covariates) const {
    if (covariates.size() != coefficients.size())
        throw ShapeError("LogisticModel: expected " + std::to_string(coefficients.size()) +
                         " covariates, got " + std::to_string(covariates.size()));
    double eta = intercept;
    for (std::size_t j = 0; j < coefficients.size(); ++j) eta += coefficients[j] * covariates[j];
    return eta;
}

double predict_propensity(const LogisticModel& m, const PaperRecord& r,
                          const TreatmentSpec& spec) {
    if (spec.covariates.size() != m.coefficients.size())
        throw ShapeError("predict_propensity: spec has " + std::to_string(spec.covariates.size()) +
                         " covariates, model has " + std::to_string(m.coefficients.size()));
    std::vector<double> x(spec.covariates.size());
    for (std::size_t j = 0; j < spec.covariates.size(); ++j)
        x[j] = column_value(r, spec.covariates[j]);
    const double p = sigmoid(m.linear_predictor(x));
    return std::clamp(p, kPropensityFloor, 1.0 - kPropensityFloor);
}

std::vector<double> propensity_scores(const LogisticModel& m, const Dataset& ds,
                                      const TreatmentSpec& spec) {
    std::vector<double> scores;
    scores.reserve(ds.size());
    for (const auto& r : ds.records()) scores.push_back(predict_propensity(m, r, spec));
    return scores;
}

nlohmann::json LogisticModel::to_json() const {
    return {{"intercept", intercept},
            {"coefficients", coefficients},
            {"covariate_names", covariate_names},
            {"fit_meta",
             {{"iterations", fit_meta.iterations},
              {"final_gradient_norm", fit_meta.final_gradient_norm},
              {"ridge_penalty", fit_meta.ridge_penalty},
              {"converged", fit_meta.converged},
              {"separation_warning", fit_meta.separation_warning}}}};
}

LogisticModel LogisticModel::from_json(const nlohmann::json& j) {
    LogisticModel m;
    m.intercept = j.at("intercept").get<double>();
    m.coefficients = j.at("coefficients").get<std::vector<double>>();
    m.covariate_names = j.at("covariate_names").get<std::vector<std::string>>();
    const auto& meta = j.at("fit_meta");
    m.fit_meta.iterations = meta.at("iterations").get<int>();
    m.fit_meta.final_gradient_norm = meta.at("final_gradient_norm").get<double>();
    m.fit_meta.ridge_penalty = meta.at("ridge_penalty").get<double>();
    m.fit_meta.converged = meta.at("converged").get<bool>();
    m.fit_meta.separation_warning = meta.at("separation_warning").get<bool>();
    if (m.coefficients.size() != m.covariate_names.size())
        throw ConfigError("LogisticModel: coefficients/covariate_names length mismatch");
    return m;
}

}  // namespace causal_audit
