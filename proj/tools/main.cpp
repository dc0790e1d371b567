// causal-audit: generate | audit | train | sweep | ablate | report
//
// Every analysis command materializes an effective run configuration
// (defaults, then CLI flags, then --config JSON overriding individual
// flags). The run id is a hash of that configuration, the configuration is
// persisted next to the outputs, and replaying it reproduces every report
// byte for byte.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "causal_audit/data_model.hpp"
#include "causal_audit/report.hpp"
#include "causal_audit/scm.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace causal_audit;

namespace {

std::string fnv1a64_hex(const std::string& data) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

json load_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("invalid JSON in '" + path + "': " + e.what());
    }
    return j;
}

// Temp-file-then-rename so partially written outputs never appear.
void write_file_atomic(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write file: '" + tmp.string() + "'");
        out << content;
    }
    fs::rename(tmp, path);
}

struct RunDirectory {
    fs::path dir;

    void write(const std::string& relative, const std::string& content) const {
        write_file_atomic(dir / relative, content);
    }
};

// Effective config -> out/<run-id>/, with the config itself persisted.
RunDirectory open_run_dir(const std::string& output_dir, const json& effective_config) {
    const std::string run_id = fnv1a64_hex(effective_config.dump());
    RunDirectory run{fs::path(output_dir) / run_id};
    fs::create_directories(run.dir);
    write_file_atomic(run.dir / "run_config.json", effective_config.dump(2) + "\n");
    return run;
}

void write_artifacts(const RunDirectory& run, const Artifacts& art) {
    for (const auto& [path, content] : art.tables) run.write(path, content);
    for (const auto& [path, content] : art.figures) run.write(path, content);
    for (const auto& [path, content] : art.models) run.write(path, content);
    // The report indexes every other artifact, so it is written last.
    run.write("report.json", art.report.dump(2) + "\n");
}

// Applies `--config` on top of flag-derived values: keys present in the file
// override the corresponding flags.
json merge_config(json flags, const std::string& config_path, const std::string& command) {
    if (config_path.empty()) return flags;
    const json file = load_json_file(config_path);
    if (!file.is_object()) throw ConfigError("config file must hold a JSON object");
    if (file.contains("command") && file.at("command").get<std::string>() != command)
        throw ConfigError("config file is for command '" +
                          file.at("command").get<std::string>() + "', not '" + command + "'");
    flags.update(file);
    flags["command"] = command;
    return flags;
}

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(csv);
    while (std::getline(in, cur, ',')) {
        if (!cur.empty()) out.push_back(cur);
    }
    return out;
}

std::vector<double> parse_doubles(const std::string& csv, const char* what) {
    std::vector<double> out;
    for (const auto& tok : split_list(csv)) {
        try {
            out.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw ConfigError(std::string(what) + ": not a number: '" + tok + "'");
        }
    }
    return out;
}

std::vector<std::size_t> parse_sizes(const std::string& csv, const char* what) {
    std::vector<std::size_t> out;
    for (const auto& tok : split_list(csv)) {
        try {
            const long v = std::stol(tok);
            if (v < 1) throw std::invalid_argument("non-positive");
            out.push_back(static_cast<std::size_t>(v));
        } catch (const std::exception&) {
            throw ConfigError(std::string(what) + ": not a positive integer: '" + tok + "'");
        }
    }
    return out;
}

std::vector<Column> columns_from_json(const json& arr) {
    std::vector<Column> cols;
    for (const auto& c : arr) cols.push_back(column_from_name(c.get<std::string>()));
    return cols;
}

// Shared flag state for the analysis commands.
struct CommonFlags {
    std::string dataset;
    std::string config_path;
    std::string output_dir = "out";
    std::uint64_t seed = 0;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool needs_dataset) {
    if (needs_dataset)
        cmd->add_option("--dataset", flags.dataset, "input dataset CSV")->required(false);
    cmd->add_option("--config", flags.config_path,
                    "JSON run config; its values override individual flags");
    cmd->add_option("--output-dir", flags.output_dir, "output root (default: out)");
    cmd->add_option("--seed", flags.seed, "master seed");
}

Dataset load_dataset(const json& config) {
    if (!config.contains("dataset") || config.at("dataset").get<std::string>().empty())
        throw ConfigError("missing --dataset (or \"dataset\" in --config)");
    return parse_csv_file(config.at("dataset").get<std::string>());
}

int finish_run(const RunDirectory& run, const Artifacts& art) {
    std::cout << "run directory: " << run.dir.string() << "\n";
    std::cout << "report: " << (run.dir / "report.json").string() << "\n";
    if (art.primary_failure) {
        std::cerr << "causal-audit: one or more primary estimates failed; see report.json\n";
        return 1;
    }
    return 0;
}

TrainOptions train_options_from_json(const json& cfg) {
    TrainOptions t;
    t.epochs = cfg.at("epochs").get<int>();
    t.lr = cfg.at("lr").get<double>();
    t.seed = cfg.at("seed").get<std::uint64_t>();
    t.hidden_dims = cfg.at("hidden_dims").get<std::vector<std::size_t>>();
    return t;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"causal fairness auditing toolkit"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "generate a synthetic SCM dataset + truth.json");
    CommonFlags gen_flags;
    add_common(gen, gen_flags, false);
    ScmConfig scm;
    scm.n_units = 1000;
    std::string treatment_flag = "race";
    gen->add_option("--n", scm.n_units, "number of units");
    gen->add_option("--treatment", treatment_flag,
                    "active treatment attribute (race|gender|country)");
    gen->add_option("--tau-race", scm.tau_race, "direct race effect on the latent score");
    gen->add_option("--tau-gender", scm.tau_gender, "direct gender effect");
    gen->add_option("--tau-country", scm.tau_country, "direct country effect");
    gen->add_option("--tau-quality-slope", scm.tau_quality_slope,
                    "heterogeneity of the active effect in standardized quality");
    gen->add_option("--tau-race-gender", scm.tau_race_gender, "race x gender interaction");
    gen->add_option("--conf-institution", scm.coef_conf_institution,
                    "active treatment -> prestige log-odds");
    gen->add_option("--conf-quality", scm.coef_conf_quality, "prestige -> quality mean shift");
    gen->add_option("--base-rate-race", scm.base_rate_race, "minority share");
    gen->add_option("--base-rate-gender", scm.base_rate_gender, "female share");
    gen->add_option("--base-rate-country", scm.base_rate_country, "Global South share");
    std::string thresholds_flag;
    gen->add_option("--thresholds", thresholds_flag, "latent cut points, e.g. \"-1.25,-0.2\"");

    // audit
    auto* audit = app.add_subcommand("audit", "summary, balance, ATE and subgroup report");
    CommonFlags audit_flags;
    add_common(audit, audit_flags, true);
    std::string treatments_flag = "race,gender,country";
    std::string covariates_flag = "h_index,prestige";
    int n_boot = 1000;
    double alpha = 0.05;
    double ridge = 0.0;
    double tol = 1e-8;
    int max_iter = 100;
    bool no_stabilized = false;
    bool clip = false;
    std::string clip_bounds_flag = "0.01,0.99";
    int n_strata = 4;
    double balance_threshold = 0.1;
    bool no_intersectional = false;
    audit->add_option("--treatments", treatments_flag, "comma list of treatment attributes");
    audit->add_option("--covariates", covariates_flag, "comma list of adjustment covariates");
    audit->add_option("--n-boot", n_boot, "bootstrap resamples (>= 200)");
    audit->add_option("--alpha", alpha, "CI level is 1 - alpha");
    audit->add_option("--ridge", ridge, "ridge penalty for the propensity fit");
    audit->add_option("--tol", tol, "propensity convergence tolerance");
    audit->add_option("--max-iter", max_iter, "propensity iteration cap");
    audit->add_flag("--no-stabilized", no_stabilized, "use unstabilized IPW weights");
    audit->add_flag("--clip", clip, "clip propensities to --clip-bounds");
    audit->add_option("--clip-bounds", clip_bounds_flag, "propensity clip bounds lo,hi");
    audit->add_option("--n-strata", n_strata, "h-index strata for the moderated analysis");
    audit->add_option("--balance-threshold", balance_threshold, "SMD balance threshold");
    audit->add_flag("--no-intersectional", no_intersectional, "skip the race x gender table");

    // train
    auto* train_cmd = app.add_subcommand("train", "train the fairness-regularized ranker");
    CommonFlags train_flags;
    add_common(train_cmd, train_flags, true);
    double lambda = 1.0, w_race = 0.5, w_country = 0.5, lr = 0.05;
    int epochs = 2000;
    std::string hidden_dims_flag = "16";
    train_cmd->add_option("--lambda", lambda, "fairness regularization strength");
    train_cmd->add_option("--w-race", w_race, "race component weight");
    train_cmd->add_option("--w-country", w_country, "country component weight");
    train_cmd->add_option("--epochs", epochs, "training epochs");
    train_cmd->add_option("--lr", lr, "learning rate");
    train_cmd->add_option("--hidden-dims", hidden_dims_flag, "hidden layer widths, e.g. \"16\"");

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "train across a lambda grid");
    CommonFlags sweep_flags;
    add_common(sweep_cmd, sweep_flags, true);
    std::string lambdas_flag = "0,0.5,1,5,10";
    double sweep_w_race = 0.5, sweep_w_country = 0.5, sweep_lr = 0.05;
    int sweep_epochs = 2000;
    std::string sweep_hidden_flag = "16";
    sweep_cmd->add_option("--lambdas", lambdas_flag, "ascending lambda grid");
    sweep_cmd->add_option("--w-race", sweep_w_race, "race component weight");
    sweep_cmd->add_option("--w-country", sweep_w_country, "country component weight");
    sweep_cmd->add_option("--epochs", sweep_epochs, "training epochs");
    sweep_cmd->add_option("--lr", sweep_lr, "learning rate");
    sweep_cmd->add_option("--hidden-dims", sweep_hidden_flag, "hidden layer widths");

    // ablate
    auto* ablate_cmd = app.add_subcommand("ablate", "component-weight ablation at fixed lambda");
    CommonFlags ablate_flags;
    add_common(ablate_cmd, ablate_flags, true);
    std::string pairs_flag = "0.5:0.5,0.9:0.1,0.1:0.9";
    double ablate_lambda = 1.0, ablate_lr = 0.05;
    int ablate_epochs = 2000;
    std::string ablate_hidden_flag = "16";
    ablate_cmd->add_option("--pairs", pairs_flag, "weight pairs wr:wc, comma separated");
    ablate_cmd->add_option("--lambda", ablate_lambda, "fixed regularization strength");
    ablate_cmd->add_option("--epochs", ablate_epochs, "training epochs");
    ablate_cmd->add_option("--lr", ablate_lr, "learning rate");
    ablate_cmd->add_option("--hidden-dims", ablate_hidden_flag, "hidden layer widths");

    // report
    auto* report_cmd = app.add_subcommand("report", "render a report.json as text");
    std::string report_path;
    report_cmd->add_option("path", report_path, "path to report.json")->required();

    try {
        app.parse(argc, argv);

        if (gen->parsed()) {
            scm.seed = gen_flags.seed;
            scm.treatment = attribute_from_name(treatment_flag);
            if (!thresholds_flag.empty()) {
                const auto cuts = parse_doubles(thresholds_flag, "--thresholds");
                if (cuts.size() != 2) throw ConfigError("--thresholds needs exactly two values");
                scm.outcome_thresholds = {cuts[0], cuts[1]};
            }
            json effective = {{"command", "generate"}, {"scm", scm.to_json()}};
            if (!gen_flags.config_path.empty()) {
                const json file = load_json_file(gen_flags.config_path);
                if (file.contains("command") && file.at("command") != "generate")
                    throw ConfigError("config file is not for 'generate'");
                if (file.contains("scm")) effective["scm"].update(file.at("scm"));
            }
            const ScmConfig config = ScmConfig::from_json(effective.at("scm"));
            effective["scm"] = config.to_json();

            const auto units = generate(config);
            const Dataset ds = to_dataset(units);
            const RunDirectory run = open_run_dir(gen_flags.output_dir, effective);
            run.write("dataset.csv", to_csv(ds));
            const json truth = {{"config", config.to_json()},
                                {"true_ate", true_ate(units)},
                                {"treatment", attribute_name(config.treatment)},
                                {"sign_convention", kSignConvention}};
            run.write("truth.json", truth.dump(2) + "\n");
            std::cout << "run directory: " << run.dir.string() << "\n";
            std::cout << "dataset: " << (run.dir / "dataset.csv").string() << "\n";
            std::cout << "truth:   " << (run.dir / "truth.json").string() << "\n";
            return 0;
        }

        if (audit->parsed()) {
            json flags = {{"command", "audit"},
                          {"dataset", audit_flags.dataset},
                          {"seed", audit_flags.seed},
                          {"treatments", split_list(treatments_flag)},
                          {"covariates", split_list(covariates_flag)},
                          {"n_boot", n_boot},
                          {"alpha", alpha},
                          {"ridge", ridge},
                          {"tol", tol},
                          {"max_iter", max_iter},
                          {"stabilized", !no_stabilized},
                          {"clip", clip ? json(parse_doubles(clip_bounds_flag, "--clip-bounds"))
                                        : json(nullptr)},
                          {"n_strata", n_strata},
                          {"balance_threshold", balance_threshold},
                          {"intersectional", !no_intersectional}};
            const json cfg = merge_config(std::move(flags), audit_flags.config_path, "audit");

            AuditOptions opts;
            opts.treatments.clear();
            for (const auto& t : cfg.at("treatments"))
                opts.treatments.push_back(attribute_from_name(t.get<std::string>()));
            opts.covariates = columns_from_json(cfg.at("covariates"));
            opts.bootstrap.n_boot = cfg.at("n_boot").get<int>();
            opts.bootstrap.alpha = cfg.at("alpha").get<double>();
            opts.bootstrap.seed = cfg.at("seed").get<std::uint64_t>();
            opts.fit.ridge = cfg.at("ridge").get<double>();
            opts.fit.tol = cfg.at("tol").get<double>();
            opts.fit.max_iter = cfg.at("max_iter").get<int>();
            opts.weights.stabilized = cfg.at("stabilized").get<bool>();
            if (!cfg.at("clip").is_null()) {
                const auto bounds = cfg.at("clip").get<std::vector<double>>();
                if (bounds.size() != 2) throw ConfigError("clip must be [lo, hi]");
                opts.weights.clip = ClipBounds{bounds[0], bounds[1]};
            }
            opts.n_strata = cfg.at("n_strata").get<int>();
            opts.balance_threshold = cfg.at("balance_threshold").get<double>();
            opts.intersectional = cfg.at("intersectional").get<bool>();
            opts.dataset_label = cfg.at("dataset").get<std::string>();

            const Dataset ds = load_dataset(cfg);
            const Artifacts art = run_audit(ds, opts);
            const RunDirectory run = open_run_dir(audit_flags.output_dir, cfg);
            write_artifacts(run, art);
            return finish_run(run, art);
        }

        if (train_cmd->parsed()) {
            json flags = {{"command", "train"},
                          {"dataset", train_flags.dataset},
                          {"seed", train_flags.seed},
                          {"lambda", lambda},
                          {"w_race", w_race},
                          {"w_country", w_country},
                          {"epochs", epochs},
                          {"lr", lr},
                          {"hidden_dims", parse_sizes(hidden_dims_flag, "--hidden-dims")}};
            const json cfg = merge_config(std::move(flags), train_flags.config_path, "train");
            TrainCommandOptions opts;
            opts.fairness.lambda = cfg.at("lambda").get<double>();
            opts.fairness.w_race = cfg.at("w_race").get<double>();
            opts.fairness.w_country = cfg.at("w_country").get<double>();
            opts.train = train_options_from_json(cfg);
            opts.dataset_label = cfg.at("dataset").get<std::string>();

            const Dataset ds = load_dataset(cfg);
            const Artifacts art = run_train(ds, opts);
            const RunDirectory run = open_run_dir(train_flags.output_dir, cfg);
            write_artifacts(run, art);
            return finish_run(run, art);
        }

        if (sweep_cmd->parsed()) {
            json flags = {{"command", "sweep"},
                          {"dataset", sweep_flags.dataset},
                          {"seed", sweep_flags.seed},
                          {"lambdas", parse_doubles(lambdas_flag, "--lambdas")},
                          {"w_race", sweep_w_race},
                          {"w_country", sweep_w_country},
                          {"epochs", sweep_epochs},
                          {"lr", sweep_lr},
                          {"hidden_dims", parse_sizes(sweep_hidden_flag, "--hidden-dims")}};
            const json cfg = merge_config(std::move(flags), sweep_flags.config_path, "sweep");
            SweepCommandOptions opts;
            opts.lambdas = cfg.at("lambdas").get<std::vector<double>>();
            opts.component_weights.w_race = cfg.at("w_race").get<double>();
            opts.component_weights.w_country = cfg.at("w_country").get<double>();
            opts.train = train_options_from_json(cfg);
            opts.dataset_label = cfg.at("dataset").get<std::string>();

            const Dataset ds = load_dataset(cfg);
            const Artifacts art = run_sweep(ds, opts);
            const RunDirectory run = open_run_dir(sweep_flags.output_dir, cfg);
            write_artifacts(run, art);
            return finish_run(run, art);
        }

        if (ablate_cmd->parsed()) {
            std::vector<std::pair<double, double>> pairs;
            for (const auto& tok : split_list(pairs_flag)) {
                const auto sep = tok.find(':');
                if (sep == std::string::npos)
                    throw ConfigError("--pairs: expected wr:wc, got '" + tok + "'");
                pairs.emplace_back(std::stod(tok.substr(0, sep)), std::stod(tok.substr(sep + 1)));
            }
            json pairs_json = json::array();
            for (const auto& [wr, wc] : pairs) pairs_json.push_back({wr, wc});
            json flags = {{"command", "ablate"},
                          {"dataset", ablate_flags.dataset},
                          {"seed", ablate_flags.seed},
                          {"lambda", ablate_lambda},
                          {"pairs", pairs_json},
                          {"epochs", ablate_epochs},
                          {"lr", ablate_lr},
                          {"hidden_dims", parse_sizes(ablate_hidden_flag, "--hidden-dims")}};
            const json cfg = merge_config(std::move(flags), ablate_flags.config_path, "ablate");
            AblateCommandOptions opts;
            opts.weight_pairs.clear();
            for (const auto& p : cfg.at("pairs"))
                opts.weight_pairs.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
            opts.lambda_fixed = cfg.at("lambda").get<double>();
            opts.train = train_options_from_json(cfg);
            opts.dataset_label = cfg.at("dataset").get<std::string>();

            const Dataset ds = load_dataset(cfg);
            const Artifacts art = run_ablate(ds, opts);
            const RunDirectory run = open_run_dir(ablate_flags.output_dir, cfg);
            write_artifacts(run, art);
            return finish_run(run, art);
        }

        if (report_cmd->parsed()) {
            const json report = load_json_file(report_path);
            std::cout << render_report_text(report);
            return 0;
        }
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    } catch (const ConfigError& e) {
        std::cerr << "causal-audit: " << e.what() << "\n";
        return 2;
    } catch (const SchemaError& e) {
        std::cerr << "causal-audit: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "causal-audit: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "causal-audit: unexpected error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
