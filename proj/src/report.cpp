#include "causal_audit/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "causal_audit/metrics.hpp"
#include "causal_audit/rng.hpp"
#include "causal_audit/stats.hpp"
#include "causal_audit/svg.hpp"

namespace causal_audit {

namespace {

std::string fmt(const char* pattern, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), pattern, v);
    return buf;
}

std::string csv_num(double v) { return fmt("%.10g", v); }

std::string display_attr(Attribute a) {
    switch (a) {
        case Attribute::race: return "Race";
        case Attribute::gender: return "Gender";
        case Attribute::country: return "Country";
    }
    return "?";
}

nlohmann::json conventions_json() {
    return {{"sign_convention", kSignConvention},
            {"dcg_gain", "raw_relevance"},
            {"dcg_discount", "log2(i+1)"},
            {"pooled_sd", "sqrt((s1^2+s0^2)/2), unweighted"}};
}

nlohmann::json dataset_json(const Dataset& ds, const std::string& label) {
    return {{"label", label.empty() ? nlohmann::json() : nlohmann::json(label)},
            {"n", ds.size()},
            {"provenance", ds.provenance() == Provenance::synthetic ? "synthetic" : "ingested"}};
}

nlohmann::json envelope(const char* kind, std::uint64_t seed, const Dataset& ds,
                        const std::string& label) {
    return {{"schema_version", kReportSchemaVersion},
            {"kind", kind},
            {"tool", "causal-audit"},
            {"seed", seed},
            {"conventions", conventions_json()},
            {"dataset", dataset_json(ds, label)}};
}

nlohmann::json weight_diagnostics_json(const WeightSet& ws) {
    nlohmann::json clip = nullptr;
    if (ws.clip_bounds) clip = {ws.clip_bounds->lo, ws.clip_bounds->hi};
    return {{"min_weight", ws.diagnostics.min_weight},
            {"max_weight", ws.diagnostics.max_weight},
            {"effective_sample_size", ws.diagnostics.effective_sample_size},
            {"stabilized", ws.stabilized},
            {"clip", clip}};
}

std::string ci_text(const CausalEstimate& est) {
    if (!est.ci) return "-";
    return "(" + fmt("%.3f", est.ci->low) + ", " + fmt("%.3f", est.ci->high) + ")";
}

// Acceptance share (outcome >= 2) in h-index bins for one group.
std::vector<std::pair<double, double>> acceptance_curve(const Dataset& ds, Attribute attr,
                                                        int group, int bins) {
    std::vector<double> h;
    h.reserve(ds.size());
    for (const auto& r : ds.records()) h.push_back(r.h_index);
    const double lo = *std::min_element(h.begin(), h.end());
    const double hi = *std::max_element(h.begin(), h.end());
    const double width = hi > lo ? (hi - lo) / bins : 1.0;
    std::vector<double> accept(static_cast<std::size_t>(bins), 0.0);
    std::vector<double> count(static_cast<std::size_t>(bins), 0.0);
    for (const auto& r : ds.records()) {
        if (attribute_value(r, attr) != group) continue;
        int b = static_cast<int>((r.h_index - lo) / width);
        b = std::clamp(b, 0, bins - 1);
        accept[static_cast<std::size_t>(b)] += r.outcome >= 2 ? 1.0 : 0.0;
        count[static_cast<std::size_t>(b)] += 1.0;
    }
    std::vector<std::pair<double, double>> points;
    for (int b = 0; b < bins; ++b) {
        const auto bi = static_cast<std::size_t>(b);
        if (count[bi] < 1.0) continue;
        points.emplace_back(lo + (b + 0.5) * width, accept[bi] / count[bi]);
    }
    return points;
}

struct RankingMetrics {
    double ndcg = 0.0;
    double avg_rank_race0 = 0.0;
    double avg_rank_race1 = 0.0;
    double rank_gap_race = 0.0;
    double rank_gap_gender = 0.0;
    double rank_gap_country = 0.0;
    double parity_gap_race = 0.0;
    double parity_gap_gender = 0.0;
    double parity_gap_country = 0.0;
};

RankingMetrics ranking_metrics(const RankerModel& model, const Dataset& ds) {
    RankingMetrics m;
    const RankedList rl = ranked_list(model, ds);
    m.ndcg = ndcg(rl);
    m.rank_gap_race = rank_gap(rl, Attribute::race);
    m.rank_gap_gender = rank_gap(rl, Attribute::gender);
    m.rank_gap_country = rank_gap(rl, Attribute::country);
    double sum0 = 0, sum1 = 0;
    std::size_t n0 = 0, n1 = 0;
    for (std::size_t i = 0; i < rl.entries.size(); ++i) {
        if (rl.entries[i].race) {
            sum1 += static_cast<double>(i + 1);
            ++n1;
        } else {
            sum0 += static_cast<double>(i + 1);
            ++n0;
        }
    }
    m.avg_rank_race0 = n0 ? sum0 / static_cast<double>(n0) : 0.0;
    m.avg_rank_race1 = n1 ? sum1 / static_cast<double>(n1) : 0.0;

    std::vector<double> preds;
    preds.reserve(ds.size());
    for (const auto& r : ds.records())
        preds.push_back(model.forward(encode_features(r, model.scaling)));
    TreatmentSpec dummy;
    dummy.treatment = Attribute::race;
    m.parity_gap_race = parity_gap(preds, ds.treatment_vector(dummy));
    dummy.treatment = Attribute::gender;
    m.parity_gap_gender = parity_gap(preds, ds.treatment_vector(dummy));
    dummy.treatment = Attribute::country;
    m.parity_gap_country = parity_gap(preds, ds.treatment_vector(dummy));
    return m;
}

nlohmann::json ranking_metrics_json(const RankingMetrics& m) {
    return {{"ndcg", m.ndcg},
            {"avg_rank_race0", m.avg_rank_race0},
            {"avg_rank_race1", m.avg_rank_race1},
            {"rank_gap_race", m.rank_gap_race},
            {"rank_gap_gender", m.rank_gap_gender},
            {"rank_gap_country", m.rank_gap_country},
            {"parity_gap_race", m.parity_gap_race},
            {"parity_gap_gender", m.parity_gap_gender},
            {"parity_gap_country", m.parity_gap_country}};
}

void attach_artifact_lists(Artifacts& art) {
    nlohmann::json figure_list = nlohmann::json::array();
    for (const auto& [path, _] : art.figures) figure_list.push_back(path);
    nlohmann::json table_list = nlohmann::json::array();
    for (const auto& [path, _] : art.tables) table_list.push_back(path);
    nlohmann::json model_list = nlohmann::json::array();
    for (const auto& [path, _] : art.models) model_list.push_back(path);
    art.report["figures"] = figure_list;
    art.report["tables"] = table_list;
    art.report["model_files"] = model_list;
}

}  // namespace

Artifacts run_audit(const Dataset& ds, const AuditOptions& opts) {
    if (ds.size() == 0) throw DomainError("audit: empty dataset");
    if (opts.treatments.empty()) throw ConfigError("audit: no treatments requested");
    Artifacts art;
    const std::uint64_t master = opts.bootstrap.seed;
    art.report = envelope("audit_report", master, ds, opts.dataset_label);

    const Summary summary = summarize(ds);
    art.report["summary"] = summary.to_json();
    art.tables["tables/summary.txt"] = summary.to_text();

    try {
        art.report["correlation_h_index_outcome"] =
            pearson_r(ds.column_vector(Column::h_index), ds.outcome_vector());
    } catch (const Error&) {
        art.report["correlation_h_index_outcome"] = nullptr;
    }

    nlohmann::json treatments = nlohmann::json::array();
    std::vector<ForestItem> forest;
    std::ostringstream balance_text, ate_csv, ate_text, stratified_csv;
    ate_csv << "attribute,method,ate,ci_low,ci_high,alpha,n_treated,n_control,seed,"
               "sign_convention\n";
    stratified_csv << "attribute,stratum,range_low,range_high,n,status,ate,ci_low,ci_high,seed\n";
    char line[256];
    ate_text << "ATEs on Paper Acceptance Ranking (negative = causal disadvantage for the "
                "treated group)\n";
    std::snprintf(line, sizeof(line), "%-8s %-14s %-14s %9s %-18s %-6s\n", "Demo.", "Treat.",
                  "Comp.", "ATE", "95% CI", "Method");
    ate_text << line;

    for (std::size_t i = 0; i < opts.treatments.size(); ++i) {
        const Attribute attr = opts.treatments[i];
        TreatmentSpec spec;
        spec.treatment = attr;
        spec.covariates = opts.covariates;
        nlohmann::json node = {{"attribute", attribute_name(attr)}};
        {
            nlohmann::json cov = nlohmann::json::array();
            for (Column c : opts.covariates) cov.push_back(column_name(c));
            node["covariates"] = cov;
        }
        try {
            spec.validate();
            ds.require_both_groups(spec);

            const LogisticModel model = fit_logistic(ds, spec, opts.fit);
            const std::vector<double> scores = propensity_scores(model, ds, spec);
            const WeightSet ws = ipw_weights(ds, spec, scores, opts.weights);
            const BalanceReport balance = balance_report(ds, spec, ws, opts.balance_threshold);

            BootstrapOptions ipw_opts = opts.bootstrap;
            ipw_opts.seed = Rng::child_seed(master, 3 * i);
            BootstrapOptions lr_opts = opts.bootstrap;
            lr_opts.seed = Rng::child_seed(master, 3 * i + 1);
            BootstrapOptions strat_opts = opts.bootstrap;
            strat_opts.seed = Rng::child_seed(master, 3 * i + 2);

            const CausalEstimate est_ipw =
                estimate_ate(ds, spec, EstimationMethod::ipw, ipw_opts, opts.fit, opts.weights);
            const CausalEstimate est_lr = estimate_ate(
                ds, spec, EstimationMethod::linear_regression, lr_opts, opts.fit, opts.weights);
            const double naive = naive_difference(ds, spec);

            node["n_treated"] = est_ipw.n_treated;
            node["n_control"] = est_ipw.n_control;
            node["propensity_model"] = model.to_json();
            node["weight_diagnostics"] = weight_diagnostics_json(ws);
            node["balance"] = balance.to_json();
            node["naive_difference"] = naive;
            node["ate_ipw"] = est_ipw.to_json();
            node["ate_lr"] = est_lr.to_json();

            nlohmann::json strata = nlohmann::json::array();
            for (const auto& se : stratified_ate(ds, spec, Column::h_index, opts.n_strata,
                                                 strat_opts, opts.fit, opts.weights)) {
                strata.push_back({{"index", se.index},
                                  {"range", {se.lower, se.upper}},
                                  {"n", se.n},
                                  {"status", se.status},
                                  {"estimate", se.estimate ? se.estimate->to_json()
                                                           : nlohmann::json(nullptr)}});
                stratified_csv << attribute_name(attr) << ',' << se.index << ','
                               << csv_num(se.lower) << ',' << csv_num(se.upper) << ',' << se.n
                               << ',' << (se.estimate ? "ok" : "inestimable");
                if (se.estimate && se.estimate->ci) {
                    stratified_csv << ',' << csv_num(se.estimate->ate) << ','
                                   << csv_num(se.estimate->ci->low) << ','
                                   << csv_num(se.estimate->ci->high) << ',' << se.estimate->seed;
                } else {
                    stratified_csv << ",,,,";
                }
                stratified_csv << '\n';
            }
            node["stratified"] = {{"strat_var", "h_index"},
                                  {"n_strata", opts.n_strata},
                                  {"strata", strata}};
            node["status"] = "ok";

            balance_text << display_attr(attr) << " (" << attribute_level_label(attr, 1)
                         << " vs. " << attribute_level_label(attr, 0) << ")\n"
                         << balance.to_text() << "\n";
            for (const CausalEstimate* est : {&est_ipw, &est_lr}) {
                ate_csv << attribute_name(attr) << ',' << method_name(est->method) << ','
                        << csv_num(est->ate) << ',' << csv_num(est->ci->low) << ','
                        << csv_num(est->ci->high) << ',' << csv_num(est->alpha) << ','
                        << est->n_treated << ',' << est->n_control << ',' << est->seed << ','
                        << kSignConvention << '\n';
                std::snprintf(line, sizeof(line), "%-8s %-14s %-14s %+9.3f %-18s %-6s\n",
                              display_attr(attr).c_str(), attribute_level_label(attr, 1).c_str(),
                              attribute_level_label(attr, 0).c_str(), est->ate,
                              ci_text(*est).c_str(), method_name(est->method));
                ate_text << line;
                forest.push_back({display_attr(attr) + " (" +
                                      std::string(method_name(est->method)) + ")",
                                  est->ate, est->ci->low, est->ci->high});
            }

            std::vector<double> scores1, scores0;
            const std::vector<int> t = ds.treatment_vector(spec);
            for (std::size_t r = 0; r < t.size(); ++r)
                (t[r] ? scores1 : scores0).push_back(scores[r]);
            const std::string attr_str = attribute_name(attr);
            art.figures["figures/propensity_overlap_" + attr_str + ".svg"] =
                overlap_histogram_svg("Propensity score overlap: " + display_attr(attr),
                                      "propensity score",
                                      {{attribute_level_label(attr, 1), scores1, "#c0392b"},
                                       {attribute_level_label(attr, 0), scores0, "#1f6fb2"}},
                                      20, 0.0, 1.0);
            art.figures["figures/acceptance_vs_h_index_" + attr_str + ".svg"] = line_chart_svg(
                "Acceptance share vs h-index: " + display_attr(attr), "max h-index",
                "share accepted (rank >= 2)",
                {{attribute_level_label(attr, 0), acceptance_curve(ds, attr, 0, 8), "#1f6fb2"},
                 {attribute_level_label(attr, 1), acceptance_curve(ds, attr, 1, 8), "#c0392b"}});
        } catch (const Error& e) {
            node["status"] = std::string("inestimable: ") + e.what();
            art.primary_failure = true;
        }
        treatments.push_back(std::move(node));
    }
    art.report["treatments"] = treatments;
    art.tables["tables/balance.txt"] = balance_text.str();
    art.tables["tables/ate.csv"] = ate_csv.str();
    art.tables["tables/ate.txt"] = ate_text.str();
    art.tables["tables/stratified.csv"] = stratified_csv.str();

    {
        std::ostringstream balance_csv;
        balance_csv << "attribute,covariate,mean_treated_pre,mean_control_pre,smd_pre,"
                       "mean_treated_post,mean_control_post,smd_post\n";
        for (const auto& node : art.report["treatments"]) {
            if (node["status"] != "ok") continue;
            for (const auto& row : node["balance"]["rows"]) {
                balance_csv << node["attribute"].get<std::string>() << ','
                            << row["covariate"].get<std::string>() << ','
                            << csv_num(row["mean_treated_pre"].get<double>()) << ','
                            << csv_num(row["mean_control_pre"].get<double>()) << ','
                            << csv_num(row["smd_pre"].get<double>()) << ','
                            << csv_num(row["mean_treated_post"].get<double>()) << ','
                            << csv_num(row["mean_control_post"].get<double>()) << ','
                            << csv_num(row["smd_post"].get<double>()) << '\n';
            }
        }
        art.tables["tables/balance.csv"] = balance_csv.str();
    }

    if (opts.intersectional) {
        nlohmann::json inter = nullptr;
        try {
            BootstrapOptions ipw_opts = opts.bootstrap;
            ipw_opts.seed = Rng::child_seed(master, 900);
            BootstrapOptions lr_opts = opts.bootstrap;
            lr_opts.seed = Rng::child_seed(master, 901);
            const auto rows_ipw =
                intersectional_ate(ds, Attribute::race, Attribute::gender, opts.covariates,
                                   EstimationMethod::ipw, ipw_opts, opts.fit, opts.weights);
            const auto rows_lr = intersectional_ate(ds, Attribute::race, Attribute::gender,
                                                    opts.covariates,
                                                    EstimationMethod::linear_regression, lr_opts,
                                                    opts.fit, opts.weights);
            nlohmann::json rows = nlohmann::json::array();
            std::ostringstream csv, text;
            csv << "subgroup,ate_ipw,ate_lr,status_ipw,status_lr\n";
            text << "Intersectional ATEs by Estimation Method (cell vs. all others)\n";
            std::snprintf(line, sizeof(line), "%-22s %10s %10s\n", "Demographic Group",
                          "ATE (IPW)", "ATE (LR)");
            text << line;
            for (std::size_t r = 0; r < rows_ipw.size(); ++r) {
                const auto& a = rows_ipw[r];
                const auto& b = rows_lr[r];
                rows.push_back(
                    {{"label", a.label},
                     {"value_race", a.value_a},
                     {"value_gender", a.value_b},
                     {"ipw", a.estimate ? a.estimate->to_json() : nlohmann::json(nullptr)},
                     {"ipw_status", a.status},
                     {"lr", b.estimate ? b.estimate->to_json() : nlohmann::json(nullptr)},
                     {"lr_status", b.status}});
                csv << '"' << a.label << '"' << ','
                    << (a.estimate ? csv_num(a.estimate->ate) : "") << ','
                    << (b.estimate ? csv_num(b.estimate->ate) : "") << ',' << a.status << ','
                    << b.status << '\n';
                std::snprintf(line, sizeof(line), "%-22s %+10.3f %+10.3f\n", a.label.c_str(),
                              a.estimate ? a.estimate->ate : std::nan(""),
                              b.estimate ? b.estimate->ate : std::nan(""));
                text << line;
            }
            inter = {{"attributes", {"race", "gender"}}, {"rows", rows}};
            art.tables["tables/intersectional.csv"] = csv.str();
            art.tables["tables/intersectional.txt"] = text.str();
        } catch (const Error& e) {
            inter = {{"error", e.what()}};
        }
        art.report["intersectional"] = inter;
    } else {
        art.report["intersectional"] = nullptr;
    }

    if (!forest.empty()) {
        art.figures["figures/ate_forest.svg"] =
            forest_plot_svg("ATEs with 95% bootstrap CIs", "ATE (rank units)", forest);
    }
    attach_artifact_lists(art);
    return art;
}

Artifacts run_train(const Dataset& ds, const TrainCommandOptions& opts) {
    Artifacts art;
    art.report = envelope("train_report", opts.train.seed, ds, opts.dataset_label);

    FairnessConfig baseline_cfg = opts.fairness;
    baseline_cfg.lambda = 0.0;
    const RankerModel baseline = train(ds, baseline_cfg, opts.train);
    const RankerModel fair = train(ds, opts.fairness, opts.train);

    const RankingMetrics mb = ranking_metrics(baseline, ds);
    const RankingMetrics mf = ranking_metrics(fair, ds);

    art.report["fairness_config"] = opts.fairness.to_json();
    art.report["train_options"] = {{"epochs", opts.train.epochs},
                                   {"lr", opts.train.lr},
                                   {"seed", opts.train.seed},
                                   {"hidden_dims", opts.train.hidden_dims}};
    // Reserved field: the "alpha = 0.5 fairness adjustment" named alongside
    // the reference comparison has no defined semantics and is not applied.
    art.report["fairness_adjustment_alpha"] = nullptr;
    art.report["baseline"] = {{"metrics", ranking_metrics_json(mb)},
                              {"final_total_loss", baseline.train_meta.final_total_loss},
                              {"model", "models/baseline.json"}};
    art.report["fair"] = {{"metrics", ranking_metrics_json(mf)},
                          {"final_total_loss", fair.train_meta.final_total_loss},
                          {"model", "models/model.json"}};

    art.models["models/baseline.json"] = baseline.to_json().dump(2) + "\n";
    art.models["models/model.json"] = fair.to_json().dump(2) + "\n";

    std::ostringstream text, csv;
    char line[200];
    text << "Selection outcomes: baseline vs fairness-regularized model\n";
    std::snprintf(line, sizeof(line), "%-28s %12s %12s\n", "Metric", "Baseline", "Fair");
    text << line;
    auto row = [&](const char* name, double b, double f, const char* pat) {
        std::snprintf(line, sizeof(line), "%-28s %12s %12s\n", name, fmt(pat, b).c_str(),
                      fmt(pat, f).c_str());
        text << line;
    };
    row("Avg. Rank (Race = 0)", mb.avg_rank_race0, mf.avg_rank_race0, "%.1f");
    row("Avg. Rank (Race = 1)", mb.avg_rank_race1, mf.avg_rank_race1, "%.1f");
    row("Rank Gap (Race 1 - Race 0)", mb.rank_gap_race, mf.rank_gap_race, "%.1f");
    row("NDCG (Utility)", mb.ndcg, mf.ndcg, "%.4f");
    csv << "metric,baseline,fair\n"
        << "avg_rank_race0," << csv_num(mb.avg_rank_race0) << ',' << csv_num(mf.avg_rank_race0)
        << "\navg_rank_race1," << csv_num(mb.avg_rank_race1) << ',' << csv_num(mf.avg_rank_race1)
        << "\nrank_gap_race," << csv_num(mb.rank_gap_race) << ',' << csv_num(mf.rank_gap_race)
        << "\nndcg," << csv_num(mb.ndcg) << ',' << csv_num(mf.ndcg) << '\n';
    art.tables["tables/comparison.txt"] = text.str();
    art.tables["tables/comparison.csv"] = csv.str();
    attach_artifact_lists(art);
    return art;
}

Artifacts run_sweep(const Dataset& ds, const SweepCommandOptions& opts) {
    Artifacts art;
    art.report = envelope("sweep_report", opts.train.seed, ds, opts.dataset_label);

    std::vector<std::optional<RankerModel>> models;
    const std::vector<SweepRow> rows = lambda_sweep(ds, opts.lambdas, opts.component_weights,
                                                    opts.train, opts.ate_covariates, &models);
    const bool all_failed =
        std::all_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.status != "ok"; });
    art.primary_failure = all_failed;

    art.report["component_weights"] = {{"w_race", opts.component_weights.w_race},
                                       {"w_country", opts.component_weights.w_country}};
    art.report["train_options"] = {{"epochs", opts.train.epochs},
                                   {"lr", opts.train.lr},
                                   {"seed", opts.train.seed},
                                   {"hidden_dims", opts.train.hidden_dims}};
    art.report["lambdas"] = opts.lambdas;

    nlohmann::json rows_json = nlohmann::json::array();
    std::ostringstream csv;
    csv << "lambda,status,ate_race,ate_gender,ate_country,ndcg,rank_gap_race,rank_gap_gender,"
           "rank_gap_country,parity_gap_race,parity_gap_gender,parity_gap_country\n";
    std::vector<std::pair<double, double>> pr, pg, pc;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const SweepRow& r = rows[i];
        nlohmann::json rj = {{"lambda", r.lambda}, {"status", r.status}};
        csv << csv_num(r.lambda) << ',' << r.status;
        if (r.status == "ok" && models[i]) {
            char model_path[64];
            std::snprintf(model_path, sizeof(model_path), "models/lambda_%02zu.json", i);
            art.models[model_path] = models[i]->to_json().dump(2) + "\n";
            rj["model"] = model_path;
        }
        if (r.status == "ok") {
            rj["ate_race"] = r.ate_race;
            rj["ate_gender"] = r.ate_gender;
            rj["ate_country"] = r.ate_country;
            rj["ndcg"] = r.ndcg;
            rj["rank_gap_race"] = r.rank_gap_race;
            rj["rank_gap_gender"] = r.rank_gap_gender;
            rj["rank_gap_country"] = r.rank_gap_country;
            rj["parity_gap_race"] = r.parity_gap_race;
            rj["parity_gap_gender"] = r.parity_gap_gender;
            rj["parity_gap_country"] = r.parity_gap_country;
            rj["seed"] = Rng::child_seed(opts.train.seed, i);
            for (double v : {r.ate_race, r.ate_gender, r.ate_country, r.ndcg, r.rank_gap_race,
                             r.rank_gap_gender, r.rank_gap_country, r.parity_gap_race,
                             r.parity_gap_gender, r.parity_gap_country})
                csv << ',' << csv_num(v);
            pr.emplace_back(r.lambda, r.ate_race);
            pg.emplace_back(r.lambda, r.ate_gender);
            pc.emplace_back(r.lambda, r.ate_country);
        } else {
            csv << ",,,,,,,,,,";
        }
        csv << '\n';
        rows_json.push_back(std::move(rj));
    }
    art.report["rows"] = rows_json;
    art.tables["tables/sweep.csv"] = csv.str();
    if (!pr.empty()) {
        art.figures["figures/ate_vs_lambda.svg"] =
            line_chart_svg("Causal bias of model scores vs fairness regularization", "lambda",
                           "ATE of model score",
                           {{"Race", pr, "#c0392b"},
                            {"Gender", pg, "#7d3c98"},
                            {"Country", pc, "#1f6fb2"}});
    }
    attach_artifact_lists(art);
    return art;
}

Artifacts run_ablate(const Dataset& ds, const AblateCommandOptions& opts) {
    Artifacts art;
    art.report = envelope("ablation_report", opts.train.seed, ds, opts.dataset_label);

    std::vector<std::optional<RankerModel>> models;
    const std::vector<AblationRow> rows =
        ablation(ds, opts.weight_pairs, opts.lambda_fixed, opts.train, &models);
    art.primary_failure = std::all_of(rows.begin(), rows.end(),
                                      [](const AblationRow& r) { return r.status != "ok"; });

    art.report["lambda"] = opts.lambda_fixed;
    art.report["train_options"] = {{"epochs", opts.train.epochs},
                                   {"lr", opts.train.lr},
                                   {"seed", opts.train.seed},
                                   {"hidden_dims", opts.train.hidden_dims}};

    nlohmann::json rows_json = nlohmann::json::array();
    std::ostringstream csv, text;
    char line[200];
    csv << "weighting,w_race,w_country,status,rank_gap_race,rank_gap_country,rank_gap_gender,"
           "ndcg\n";
    text << "Ablation on fairness component weights (lambda = " << fmt("%g", opts.lambda_fixed)
         << ")\n";
    std::snprintf(line, sizeof(line), "%-26s %10s %10s %10s %8s\n", "Fairness Weighting (Wr:Wc)",
                  "Race", "Country", "Gender", "NDCG");
    text << line;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        nlohmann::json rj = {{"label", r.label},
                             {"w_race", r.w_race},
                             {"w_country", r.w_country},
                             {"status", r.status},
                             {"seed", opts.train.seed}};
        if (r.status == "ok" && models[i]) {
            char model_path[64];
            std::snprintf(model_path, sizeof(model_path), "models/point_%02zu.json", i);
            art.models[model_path] = models[i]->to_json().dump(2) + "\n";
            rj["model"] = model_path;
        }
        csv << '"' << r.label << '"' << ',' << csv_num(r.w_race) << ',' << csv_num(r.w_country)
            << ',' << r.status;
        if (r.status == "ok") {
            rj["rank_gap_race"] = r.rank_gap_race;
            rj["rank_gap_country"] = r.rank_gap_country;
            rj["rank_gap_gender"] = r.rank_gap_gender;
            rj["ndcg"] = r.ndcg;
            csv << ',' << csv_num(r.rank_gap_race) << ',' << csv_num(r.rank_gap_country) << ','
                << csv_num(r.rank_gap_gender) << ',' << csv_num(r.ndcg);
            std::snprintf(line, sizeof(line), "%-26s %10.1f %10.1f %10.1f %8.4f\n",
                          r.label.c_str(), r.rank_gap_race, r.rank_gap_country, r.rank_gap_gender,
                          r.ndcg);
            text << line;
        } else {
            csv << ",,,,";
        }
        csv << '\n';
        rows_json.push_back(std::move(rj));
    }
    art.report["rows"] = rows_json;
    art.tables["tables/ablation.csv"] = csv.str();
    art.tables["tables/ablation.txt"] = text.str();
    attach_artifact_lists(art);
    return art;
}

bool validate_report(const nlohmann::json& report, std::string* why) {
    auto fail = [&](const std::string& message) {
        if (why) *why = message;
        return false;
    };
    if (!report.is_object()) return fail("report is not an object");
    for (const char* key : {"schema_version", "kind", "tool", "seed", "conventions", "dataset",
                            "figures", "tables"}) {
        if (!report.contains(key)) return fail(std::string("missing key: ") + key);
    }
    if (!report["schema_version"].is_number_integer() ||
        report["schema_version"].get<int>() != kReportSchemaVersion)
        return fail("unsupported schema_version");
    const std::string kind = report["kind"].get<std::string>();
    if (!report["conventions"].is_object() || !report["conventions"].contains("sign_convention"))
        return fail("conventions.sign_convention missing");
    if (!report["dataset"].is_object() || !report["dataset"].contains("n"))
        return fail("dataset.n missing");

    if (kind == "audit_report") {
        for (const char* key : {"summary", "treatments", "intersectional"}) {
            if (!report.contains(key)) return fail(std::string("missing key: ") + key);
        }
        if (!report["treatments"].is_array()) return fail("treatments is not an array");
        for (const auto& t : report["treatments"]) {
            if (!t.contains("attribute") || !t.contains("status"))
                return fail("treatment row missing attribute/status");
            if (t["status"] == "ok") {
                for (const char* key : {"propensity_model", "balance", "ate_ipw", "ate_lr",
                                        "naive_difference", "stratified"}) {
                    if (!t.contains(key))
                        return fail(std::string("treatment row missing key: ") + key);
                }
                for (const char* est : {"ate_ipw", "ate_lr"}) {
                    const auto& e = t[est];
                    for (const char* key :
                         {"ate", "ci", "alpha", "method", "n_treated", "n_control", "seed",
                          "sign_convention"}) {
                        if (!e.contains(key))
                            return fail(std::string(est) + " missing key: " + key);
                    }
                }
            }
        }
    } else if (kind == "train_report") {
        for (const char* key :
             {"fairness_config", "train_options", "fairness_adjustment_alpha", "baseline",
              "fair"}) {
            if (!report.contains(key)) return fail(std::string("missing key: ") + key);
        }
        if (!report["fairness_adjustment_alpha"].is_null())
            return fail("fairness_adjustment_alpha must be null (reserved)");
    } else if (kind == "sweep_report") {
        for (const char* key : {"lambdas", "rows", "component_weights", "train_options"}) {
            if (!report.contains(key)) return fail(std::string("missing key: ") + key);
        }
        if (!report["rows"].is_array()) return fail("rows is not an array");
    } else if (kind == "ablation_report") {
        for (const char* key : {"lambda", "rows", "train_options"}) {
            if (!report.contains(key)) return fail(std::string("missing key: ") + key);
        }
    } else {
        return fail("unknown report kind: " + kind);
    }
    if (why) why->clear();
    return true;
}

std::string render_report_text(const nlohmann::json& report) {
    std::string why;
    if (!validate_report(report, &why))
        throw ConfigError("report: invalid report.json: " + why);

    std::ostringstream out;
    const std::string kind = report["kind"].get<std::string>();
    out << "causal-audit report (" << kind << ")\n";
    out << "  dataset n = " << report["dataset"]["n"].get<std::size_t>() << " ("
        << report["dataset"]["provenance"].get<std::string>() << ")\n";
    out << "  seed = " << report["seed"].get<std::uint64_t>() << "\n";
    out << "  sign convention: "
        << report["conventions"]["sign_convention"].get<std::string>() << "\n\n";

    char line[256];
    if (kind == "audit_report") {
        const auto& s = report["summary"];
        out << "Summary: n = " << s["n"].get<std::size_t>()
            << ", minority " << fmt("%.1f%%", 100.0 * s["share_minority"].get<double>())
            << ", female " << fmt("%.1f%%", 100.0 * s["share_female"].get<double>())
            << ", Global South " << fmt("%.1f%%", 100.0 * s["share_global_south"].get<double>())
            << "\n";
        out << "  h-index mean " << fmt("%.2f", s["h_index"]["mean"].get<double>()) << " (SD "
            << fmt("%.2f", s["h_index"]["sd"].get<double>()) << "), outcome mean "
            << fmt("%.2f", s["outcome"]["mean"].get<double>()) << " (SD "
            << fmt("%.2f", s["outcome"]["sd"].get<double>()) << ")\n\n";

        std::snprintf(line, sizeof(line), "%-10s %-18s %9s %9s %-20s %s\n", "Treatment", "Method",
                      "Naive", "ATE", "95% CI", "Status");
        out << line;
        for (const auto& t : report["treatments"]) {
            const std::string attr = t["attribute"].get<std::string>();
            if (t["status"] != "ok") {
                std::snprintf(line, sizeof(line), "%-10s %-18s %9s %9s %-20s %s\n", attr.c_str(),
                              "-", "-", "-", "-", t["status"].get<std::string>().c_str());
                out << line;
                continue;
            }
            for (const char* est_key : {"ate_ipw", "ate_lr"}) {
                const auto& e = t[est_key];
                const std::string ci = "(" + fmt("%.3f", e["ci"][0].get<double>()) + ", " +
                                       fmt("%.3f", e["ci"][1].get<double>()) + ")";
                std::snprintf(line, sizeof(line), "%-10s %-18s %+9.3f %+9.3f %-20s %s\n",
                              attr.c_str(), e["method"].get<std::string>().c_str(),
                              t["naive_difference"].get<double>(), e["ate"].get<double>(),
                              ci.c_str(), "ok");
                out << line;
            }
            const auto& b = t["balance"];
            out << "  balance: " << (b["balanced"].get<bool>() ? "yes" : "no")
                << " (threshold " << fmt("%.2f", b["threshold"].get<double>()) << ")\n";
        }
        if (report["intersectional"].is_object() && report["intersectional"].contains("rows")) {
            out << "\nIntersectional ATEs (cell vs. all others)\n";
            std::snprintf(line, sizeof(line), "%-22s %10s %10s\n", "Demographic Group",
                          "ATE (IPW)", "ATE (LR)");
            out << line;
            for (const auto& r : report["intersectional"]["rows"]) {
                const double ipw =
                    r["ipw"].is_null() ? std::nan("") : r["ipw"]["ate"].get<double>();
                const double lr = r["lr"].is_null() ? std::nan("") : r["lr"]["ate"].get<double>();
                std::snprintf(line, sizeof(line), "%-22s %+10.3f %+10.3f\n",
                              r["label"].get<std::string>().c_str(), ipw, lr);
                out << line;
            }
        }
    } else if (kind == "train_report") {
        const auto& mb = report["baseline"]["metrics"];
        const auto& mf = report["fair"]["metrics"];
        out << "lambda = " << fmt("%g", report["fairness_config"]["lambda"].get<double>())
            << ", w_race = " << fmt("%g", report["fairness_config"]["w_race"].get<double>())
            << ", w_country = " << fmt("%g", report["fairness_config"]["w_country"].get<double>())
            << "\n\n";
        std::snprintf(line, sizeof(line), "%-28s %12s %12s\n", "Metric", "Baseline", "Fair");
        out << line;
        auto row = [&](const char* name, const char* key, const char* pat) {
            std::snprintf(line, sizeof(line), "%-28s %12s %12s\n", name,
                          fmt(pat, mb[key].get<double>()).c_str(),
                          fmt(pat, mf[key].get<double>()).c_str());
            out << line;
        };
        row("Avg. Rank (Race = 0)", "avg_rank_race0", "%.1f");
        row("Avg. Rank (Race = 1)", "avg_rank_race1", "%.1f");
        row("Rank Gap (Race)", "rank_gap_race", "%.1f");
        row("NDCG (Utility)", "ndcg", "%.4f");
    } else if (kind == "sweep_report") {
        std::snprintf(line, sizeof(line), "%8s %10s %10s %10s %8s %s\n", "lambda", "ATE race",
                      "ATE gend.", "ATE ctry.", "NDCG", "status");
        out << line;
        for (const auto& r : report["rows"]) {
            if (r["status"] == "ok") {
                std::snprintf(line, sizeof(line), "%8g %+10.4f %+10.4f %+10.4f %8.4f %s\n",
                              r["lambda"].get<double>(), r["ate_race"].get<double>(),
                              r["ate_gender"].get<double>(), r["ate_country"].get<double>(),
                              r["ndcg"].get<double>(), "ok");
            } else {
                std::snprintf(line, sizeof(line), "%8g %10s %10s %10s %8s %s\n",
                              r["lambda"].get<double>(), "-", "-", "-", "-",
                              r["status"].get<std::string>().c_str());
            }
            out << line;
        }
    } else if (kind == "ablation_report") {
        std::snprintf(line, sizeof(line), "%-26s %10s %10s %10s %8s\n", "Weighting (Wr:Wc)",
                      "Race", "Country", "Gender", "NDCG");
        out << line;
        for (const auto& r : report["rows"]) {
            if (r["status"] == "ok") {
                std::snprintf(line, sizeof(line), "%-26s %10.1f %10.1f %10.1f %8.4f\n",
                              r["label"].get<std::string>().c_str(),
                              r["rank_gap_race"].get<double>(),
                              r["rank_gap_country"].get<double>(),
                              r["rank_gap_gender"].get<double>(), r["ndcg"].get<double>());
            } else {
                std::snprintf(line, sizeof(line), "%-26s %s\n",
                              r["label"].get<std::string>().c_str(),
                              r["status"].get<std::string>().c_str());
            }
            out << line;
        }
    }
    return out.str();
}

}  // namespace causal_audit
