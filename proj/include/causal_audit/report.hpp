#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "causal_audit/estimators.hpp"
#include "causal_audit/fairrank.hpp"

namespace causal_audit {

inline constexpr int kReportSchemaVersion = 1;

struct AuditOptions {
    std::vector<Attribute> treatments = {Attribute::race, Attribute::gender, Attribute::country};
    std::vector<Column> covariates = {Column::h_index, Column::prestige};
    BootstrapOptions bootstrap;
    FitOptions fit;
    WeightOptions weights;
    int n_strata = 4;
    double balance_threshold = 0.1;
    bool intersectional = true;  // race x gender table
    std::string dataset_label;   // echoed into the report
};

// Everything a command produces, decoupled from the filesystem: the report
// plus named table, figure, and model payloads.
struct Artifacts {
    nlohmann::json report;
    std::map<std::string, std::string> tables;   // relative path -> content
    std::map<std::string, std::string> figures;  // relative path -> SVG
    std::map<std::string, std::string> models;   // relative path -> model JSON
    // Set when a headline per-treatment ATE could not be estimated.
    bool primary_failure = false;
};

Artifacts run_audit(const Dataset& ds, const AuditOptions& opts);

struct TrainCommandOptions {
    FairnessConfig fairness;
    TrainOptions train;
    std::vector<Column> ate_covariates = {Column::h_index, Column::prestige};
    std::string dataset_label;
};

// Trains the requested model plus a lambda = 0 baseline from the same seed
// and emits the baseline-vs-fair comparison table.
Artifacts run_train(const Dataset& ds, const TrainCommandOptions& opts);

struct SweepCommandOptions {
    std::vector<double> lambdas = {0.0, 0.5, 1.0, 5.0, 10.0};
    FairnessConfig component_weights;  // lambda ignored, swept per point
    TrainOptions train;
    std::vector<Column> ate_covariates = {Column::h_index, Column::prestige};
    std::string dataset_label;
};

Artifacts run_sweep(const Dataset& ds, const SweepCommandOptions& opts);

struct AblateCommandOptions {
    std::vector<std::pair<double, double>> weight_pairs = {{0.5, 0.5}, {0.9, 0.1}, {0.1, 0.9}};
    double lambda_fixed = 1.0;
    TrainOptions train;
    std::string dataset_label;
};

Artifacts run_ablate(const Dataset& ds, const AblateCommandOptions& opts);

// Structural check of a report produced by any command against the published
// schema. Returns false and fills `why` on the first violation.
bool validate_report(const nlohmann::json& report, std::string* why);

// Human-readable rendering of a validated report (the `report` subcommand).
std::string render_report_text(const nlohmann::json& report);

}  // namespace causal_audit
