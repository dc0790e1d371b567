#include "causal_audit/weighting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "causal_audit/stats.hpp"

namespace causal_audit {

namespace {

struct GroupMoments {
    double mean1 = 0.0, mean0 = 0.0;
    std::size_t n1 = 0, n0 = 0;
};

GroupMoments weighted_group_means(std::span<const int> t, std::span<const double> x,
                                  const std::vector<double>* w) {
    GroupMoments g;
    double s1 = 0, s0 = 0, w1 = 0, w0 = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double wi = w ? (*w)[i] : 1.0;
        if (t[i]) {
            s1 += wi * x[i];
            w1 += wi;
            ++g.n1;
        } else {
            s0 += wi * x[i];
            w0 += wi;
            ++g.n0;
        }
    }
    if (g.n1 == 0 || g.n0 == 0) throw DomainError("smd: a treatment group is empty");
    g.mean1 = s1 / w1;
    g.mean0 = s0 / w0;
    return g;
}

}  // namespace

WeightSet ipw_weights(std::span<const int> treatment, std::span<const double> scores,
                      const WeightOptions& opts) {
    if (treatment.size() != scores.size()) throw ShapeError("ipw_weights: length mismatch");
    if (treatment.empty()) throw DomainError("ipw_weights: empty input");

    std::vector<double> e(scores.begin(), scores.end());
    if (opts.clip) {
        if (!(opts.clip->lo > 0.0 && opts.clip->hi < 1.0 && opts.clip->lo < opts.clip->hi))
            throw ConfigError("ipw_weights: clip bounds must satisfy 0 < lo < hi < 1");
        for (double& v : e) v = std::clamp(v, opts.clip->lo, opts.clip->hi);
    }

    std::vector<std::size_t> violations;
    for (std::size_t i = 0; i < e.size(); ++i) {
        if (!(e[i] > 0.0 && e[i] < 1.0)) violations.push_back(i);
    }
    if (!violations.empty()) {
        std::ostringstream msg;
        msg << "positivity violation: propensity at 0 or 1 for " << violations.size()
            << " row(s), first at row " << violations.front();
        throw PositivityError(msg.str(), std::move(violations));
    }

    std::size_t n1 = 0;
    for (int t : treatment) n1 += static_cast<std::size_t>(t);
    const auto n = static_cast<double>(treatment.size());
    const double p1 = static_cast<double>(n1) / n;
    const double p0 = 1.0 - p1;

    WeightSet ws;
    ws.stabilized = opts.stabilized;
    ws.clip_bounds = opts.clip;
    ws.weights.resize(e.size());
    for (std::size_t i = 0; i < e.size(); ++i) {
        const double w = treatment[i] ? 1.0 / e[i] : 1.0 / (1.0 - e[i]);
        ws.weights[i] = opts.stabilized ? (treatment[i] ? p1 : p0) * w : w;
    }

    double sum = 0, sum_sq = 0;
    double lo = ws.weights[0], hi = ws.weights[0];
    for (double w : ws.weights) {
        sum += w;
        sum_sq += w * w;
        lo = std::min(lo, w);
        hi = std::max(hi, w);
    }
    ws.diagnostics = {lo, hi, sum * sum / sum_sq};
    return ws;
}

WeightSet ipw_weights(const Dataset& ds, const TreatmentSpec& spec,
                      std::span<const double> scores, const WeightOptions& opts) {
    ds.require_both_groups(spec);
    const std::vector<int> t = ds.treatment_vector(spec);
    return ipw_weights(t, scores, opts);
}

double smd(std::span<const int> t, std::span<const double> x, const std::vector<double>* w) {
    if (t.size() != x.size()) throw ShapeError("smd: length mismatch");
    const GroupMoments g = weighted_group_means(t, x, w);
    if (g.n1 < 2 || g.n0 < 2)
        throw DomainError("smd: each group needs >= 2 observations for the pooled SD");

    std::vector<double> x1, x0;
    x1.reserve(g.n1);
    x0.reserve(g.n0);
    for (std::size_t i = 0; i < t.size(); ++i) (t[i] ? x1 : x0).push_back(x[i]);
    const double v1 = sample_variance(x1);
    const double v0 = sample_variance(x0);
    const double pooled = std::sqrt(0.5 * (v1 + v0));
    if (pooled == 0.0) throw DomainError("smd: degenerate covariate (zero pooled variance)");
    return (g.mean1 - g.mean0) / pooled;
}

double smd(const Dataset& ds, const TreatmentSpec& spec, Column covariate,
           const WeightSet* weights) {
    const std::vector<int> t = ds.treatment_vector(spec);
    const std::vector<double> x = ds.column_vector(covariate);
    if (weights && weights->weights.size() != ds.size())
        throw ShapeError("smd: weights not aligned to dataset rows");
    return smd(t, x, weights ? &weights->weights : nullptr);
}

bool BalanceReport::balanced() const {
    return std::all_of(rows.begin(), rows.end(),
                       [&](const BalanceRow& r) { return std::abs(r.smd_post) < threshold; });
}

BalanceReport balance_report(const Dataset& ds, const TreatmentSpec& spec, const WeightSet& ws,
                             double threshold) {
    if (ws.weights.size() != ds.size())
        throw ShapeError("balance_report: weights not aligned to dataset rows");
    BalanceReport report;
    report.threshold = threshold;
    const std::vector<int> t = ds.treatment_vector(spec);
    for (Column c : spec.covariates) {
        const std::vector<double> x = ds.column_vector(c);
        BalanceRow row;
        row.covariate = column_name(c);
        const GroupMoments pre = weighted_group_means(t, x, nullptr);
        const GroupMoments post = weighted_group_means(t, x, &ws.weights);
        row.mean_treated_pre = pre.mean1;
        row.mean_control_pre = pre.mean0;
        row.mean_treated_post = post.mean1;
        row.mean_control_post = post.mean0;
        row.smd_pre = smd(t, x, nullptr);
        row.smd_post = smd(t, x, &ws.weights);
        report.rows.push_back(std::move(row));
    }
    return report;
}

nlohmann::json BalanceReport::to_json() const {
    nlohmann::json rows_json = nlohmann::json::array();
    for (const auto& r : rows) {
        rows_json.push_back({{"covariate", r.covariate},
                             {"mean_treated_pre", r.mean_treated_pre},
                             {"mean_control_pre", r.mean_control_pre},
                             {"smd_pre", r.smd_pre},
                             {"mean_treated_post", r.mean_treated_post},
                             {"mean_control_post", r.mean_control_post},
                             {"smd_post", r.smd_post}});
    }
    return {{"rows", rows_json}, {"threshold", threshold}, {"balanced", balanced()}};
}

std::string BalanceReport::to_text() const {
    std::ostringstream out;
    char buf[200];
    std::snprintf(buf, sizeof(buf), "%-12s %12s %12s %10s %13s %13s %10s\n", "Covariate",
                  "T Mean(Pre)", "C Mean(Pre)", "SMD(Pre)", "T Mean(Post)", "C Mean(Post)",
                  "SMD(Post)");
    out << buf;
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%-12s %12.3f %12.3f %10.3f %13.3f %13.3f %10.3f\n",
                      r.covariate.c_str(), r.mean_treated_pre, r.mean_control_pre, r.smd_pre,
                      r.mean_treated_post, r.mean_control_post, r.smd_post);
        out << buf;
    }
    std::snprintf(buf, sizeof(buf), "balanced: %s (threshold %.2f)\n",
                  balanced() ? "yes" : "no", threshold);
    out << buf;
    return out.str();
}

}  // namespace causal_audit
