#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "causal_audit/data_model.hpp"
#include "causal_audit/metrics.hpp"

namespace causal_audit {

// Composite-loss configuration: total = prediction + lambda * fairness, with
// fairness = w_race * gap_race^2 + w_country * gap_country^2 where each gap
// is the protected group's mean prediction minus the global mean. Gender is
// deliberately unpenalized and tracked only as a spillover metric.
struct FairnessConfig {
    double lambda = 0.0;
    double w_race = 0.5;
    double w_country = 0.5;

    void validate() const;  // all fields non-negative
    nlohmann::json to_json() const;
    static FairnessConfig from_json(const nlohmann::json& j);
};

// Protected-group membership flags aligned to prediction rows.
struct GroupMasks {
    std::vector<std::uint8_t> race;
    std::vector<std::uint8_t> country;

    static GroupMasks from_dataset(const Dataset& ds);
};

// Weighted sum of squared statistical parity differences. Terms with zero
// weight are skipped; a positive weight with an empty group is an error.
double fairness_loss(std::span<const double> predictions, const GroupMasks& groups,
                     const FairnessConfig& cfg);

// Mean binary cross-entropy.
double prediction_loss(std::span<const double> predictions, std::span<const double> labels);

double total_loss(std::span<const double> predictions, std::span<const double> labels,
                  const GroupMasks& groups, const FairnessConfig& cfg);

struct TrainOptions {
    int epochs = 2000;
    double lr = 0.05;
    std::uint64_t seed = 0;
    std::vector<std::size_t> hidden_dims = {16};  // may be empty (plain logistic scorer)
};

struct TrainMeta {
    int epochs_run = 0;
    double final_total_loss = 0.0;
    double final_prediction_loss = 0.0;
    double final_fairness_loss = 0.0;
    std::uint64_t seed = 0;
};

// Input standardization fitted on the training data and stored with the
// model so scoring stays reproducible.
struct FeatureScaling {
    double h_index_mean = 0.0;
    double h_index_sd = 1.0;
};

// Feed-forward scorer: relu hidden layers, sigmoid output of width 1.
struct RankerModel {
    std::vector<std::size_t> layer_dims;          // input, hidden..., 1
    std::vector<std::vector<double>> weights;     // [l]: dims[l+1] x dims[l], row-major
    std::vector<std::vector<double>> biases;      // [l]: dims[l+1]
    FairnessConfig fairness_config;
    FeatureScaling scaling;
    TrainMeta train_meta;

    static RankerModel init(std::size_t input_dim, const std::vector<std::size_t>& hidden_dims,
                            std::uint64_t seed);

    // Single forward pass; output clamped strictly inside (0, 1).
    double forward(std::span<const double> features) const;

    std::size_t input_dim() const { return layer_dims.front(); }
    std::size_t parameter_count() const;

    nlohmann::json to_json() const;
    static RankerModel from_json(const nlohmann::json& j);
};

// Flattened parameter view used by training and gradient verification.
std::vector<double> flatten_params(const RankerModel& m);
void set_params(RankerModel& m, std::span<const double> params);

// Total loss over the batch and, when `grad` is non-null, its analytic
// gradient with respect to every parameter (flattened layout). Includes the
// backpropagated fairness term through the group means.
double loss_and_gradient(const RankerModel& m, const std::vector<std::vector<double>>& features,
                         std::span<const double> labels, const GroupMasks& groups,
                         const FairnessConfig& cfg, std::vector<double>* grad);

// Ranker feature encoding: standardized h-index, prestige, demographic flags.
std::vector<double> encode_features(const PaperRecord& r, const FeatureScaling& scaling);
FeatureScaling fit_scaling(const Dataset& ds);
constexpr std::size_t kRankerInputDim = 5;

// Acceptance label: 1 for outcome ranks {2, 3}, 0 for rank 1. The full
// ordinal rank is kept separately as NDCG relevance.
std::vector<double> accept_labels(const Dataset& ds);

// Full-batch gradient descent on total_loss; deterministic given seed.
RankerModel train(const Dataset& ds, const FairnessConfig& cfg, const TrainOptions& opts);

struct RankRow {
    std::string id;
    double score = 0.0;
    std::size_t rank = 0;  // 1-based
};

// Descending score, ties broken by ascending id.
std::vector<RankRow> rank(const RankerModel& m, const Dataset& ds);

// Same ordering plus relevance (outcome) and group flags, for metrics.
RankedList ranked_list(const RankerModel& m, const Dataset& ds);

struct SweepRow {
    double lambda = 0.0;
    double ate_race = 0.0;
    double ate_gender = 0.0;
    double ate_country = 0.0;
    double ndcg = 0.0;
    double rank_gap_race = 0.0;
    double rank_gap_gender = 0.0;
    double rank_gap_country = 0.0;
    double parity_gap_race = 0.0;
    double parity_gap_gender = 0.0;
    double parity_gap_country = 0.0;
    std::string status;  // "ok" or the per-point failure
};

// Trains one model per lambda (seed-derived init per point), ranks, and
// re-estimates demographic ATEs on the model scores via the IPW pipeline.
// When `out_models` is given it receives the per-point models (nullopt for
// failed points) aligned to the returned rows.
std::vector<SweepRow> lambda_sweep(const Dataset& ds, const std::vector<double>& lambdas,
                                   const FairnessConfig& component_weights,
                                   const TrainOptions& opts,
                                   const std::vector<Column>& ate_covariates,
                                   std::vector<std::optional<RankerModel>>* out_models = nullptr);

struct AblationRow {
    std::string label;
    double w_race = 0.0;
    double w_country = 0.0;
    double rank_gap_race = 0.0;
    double rank_gap_country = 0.0;
    double rank_gap_gender = 0.0;
    double ndcg = 0.0;
    std::string status;
};

// One trained model per component-weight pair at a fixed lambda, all from the
// same seed so a (0, 0) pair coincides with the no-fairness baseline row. A
// baseline row is always emitted first.
std::vector<AblationRow> ablation(const Dataset& ds,
                                  const std::vector<std::pair<double, double>>& weight_pairs,
                                  double lambda_fixed, const TrainOptions& opts,
                                  std::vector<std::optional<RankerModel>>* out_models = nullptr);

}  // namespace causal_audit
