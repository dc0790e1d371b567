#include "causal_audit/fairrank.hpp"

#include <algorithm>
#include <cmath>

#include "causal_audit/estimators.hpp"
#include "causal_audit/rng.hpp"
#include "causal_audit/stats.hpp"

namespace causal_audit {

namespace {

constexpr double kScoreFloor = 1e-12;

double clamp_unit(double p) { return std::clamp(p, kScoreFloor, 1.0 - kScoreFloor); }

struct ParityTerm {
    double weight = 0.0;
    double gap = 0.0;           // group mean - global mean
    std::size_t group_size = 0;
    const std::vector<std::uint8_t>* mask = nullptr;
};

// Evaluates the active parity terms; throws when a positively weighted group
// is empty.
std::vector<ParityTerm> parity_terms(std::span<const double> preds, const GroupMasks& groups,
                                     const FairnessConfig& cfg) {
    cfg.validate();
    std::vector<ParityTerm> terms;
    const double global_mean = mean(preds);
    auto add_term = [&](double weight, const std::vector<std::uint8_t>& mask, const char* name) {
        if (weight == 0.0) return;
        if (mask.size() != preds.size()) throw ShapeError("fairness_loss: mask length mismatch");
        double sum = 0.0;
        std::size_t count = 0;
        for (std::size_t i = 0; i < mask.size(); ++i) {
            if (mask[i]) {
                sum += preds[i];
                ++count;
            }
        }
        if (count == 0)
            throw DomainError(std::string("fairness_loss: empty protected group '") + name +
                              "' with positive weight");
        terms.push_back({weight, sum / static_cast<double>(count) - global_mean, count, &mask});
    };
    add_term(cfg.w_race, groups.race, "race");
    add_term(cfg.w_country, groups.country, "country");
    return terms;
}

// Glorot-uniform layer initialization from the model's own stream.
void init_layer(std::vector<double>& w, std::size_t fan_out, std::size_t fan_in, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    w.resize(fan_out * fan_in);
    for (double& v : w) v = (2.0 * rng.uniform01() - 1.0) * limit;
}

// Reusable forward/backward workspace for full-batch evaluation.
struct BatchWorkspace {
    std::vector<std::vector<double>> activations;  // a[0] = inputs .. a[L] = predictions
    std::vector<std::vector<double>> pre;          // z[l] for layer l
    std::vector<std::vector<double>> delta;        // dL/dz per layer
};

void forward_batch(const RankerModel& m, const std::vector<std::vector<double>>& features,
                   BatchWorkspace& ws) {
    const std::size_t n = features.size();
    const std::size_t layers = m.weights.size();
    ws.activations.resize(layers + 1);
    ws.pre.resize(layers);

    auto& input = ws.activations[0];
    input.resize(n * m.layer_dims[0]);
    for (std::size_t i = 0; i < n; ++i) {
        if (features[i].size() != m.layer_dims[0])
            throw ShapeError("forward: expected " + std::to_string(m.layer_dims[0]) +
                             " features, got " + std::to_string(features[i].size()));
        std::copy(features[i].begin(), features[i].end(), input.begin() + i * m.layer_dims[0]);
    }

    for (std::size_t l = 0; l < layers; ++l) {
        const std::size_t din = m.layer_dims[l];
        const std::size_t dout = m.layer_dims[l + 1];
        const auto& a_prev = ws.activations[l];
        auto& z = ws.pre[l];
        auto& a = ws.activations[l + 1];
        z.assign(n * dout, 0.0);
        a.assign(n * dout, 0.0);
        const auto& w = m.weights[l];
        const auto& b = m.biases[l];
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t o = 0; o < dout; ++o) {
                double s = b[o];
                const double* wrow = &w[o * din];
                const double* arow = &a_prev[i * din];
                for (std::size_t j = 0; j < din; ++j) s += wrow[j] * arow[j];
                z[i * dout + o] = s;
                a[i * dout + o] = l + 1 == layers ? clamp_unit(sigmoid(s))
                                                  : (s > 0.0 ? s : 0.0);
            }
        }
    }
}

}  // namespace

void FairnessConfig::validate() const {
    if (lambda < 0.0) throw ConfigError("FairnessConfig.lambda must be >= 0");
    if (w_race < 0.0) throw ConfigError("FairnessConfig.w_race must be >= 0");
    if (w_country < 0.0) throw ConfigError("FairnessConfig.w_country must be >= 0");
}

nlohmann::json FairnessConfig::to_json() const {
    return {{"lambda", lambda}, {"w_race", w_race}, {"w_country", w_country}};
}

FairnessConfig FairnessConfig::from_json(const nlohmann::json& j) {
    FairnessConfig cfg;
    if (j.contains("lambda")) cfg.lambda = j.at("lambda").get<double>();
    if (j.contains("w_race")) cfg.w_race = j.at("w_race").get<double>();
    if (j.contains("w_country")) cfg.w_country = j.at("w_country").get<double>();
    cfg.validate();
    return cfg;
}

GroupMasks GroupMasks::from_dataset(const Dataset& ds) {
    GroupMasks g;
    g.race.reserve(ds.size());
    g.country.reserve(ds.size());
    for (const auto& r : ds.records()) {
        g.race.push_back(static_cast<std::uint8_t>(r.race));
        g.country.push_back(static_cast<std::uint8_t>(r.country));
    }
    return g;
}

double fairness_loss(std::span<const double> predictions, const GroupMasks& groups,
                     const FairnessConfig& cfg) {
    if (predictions.empty()) throw DomainError("fairness_loss: empty predictions");
    double loss = 0.0;
    for (const auto& term : parity_terms(predictions, groups, cfg))
        loss += term.weight * term.gap * term.gap;
    return loss;
}

double prediction_loss(std::span<const double> predictions, std::span<const double> labels) {
    if (predictions.size() != labels.size()) throw ShapeError("prediction_loss: length mismatch");
    if (predictions.empty()) throw DomainError("prediction_loss: empty predictions");
    double s = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const double p = clamp_unit(predictions[i]);
        s += labels[i] * std::log(p) + (1.0 - labels[i]) * std::log(1.0 - p);
    }
    return -s / static_cast<double>(predictions.size());
}

double total_loss(std::span<const double> predictions, std::span<const double> labels,
                  const GroupMasks& groups, const FairnessConfig& cfg) {
    const double pred = prediction_loss(predictions, labels);
    if (cfg.lambda == 0.0) return pred;
    return pred + cfg.lambda * fairness_loss(predictions, groups, cfg);
}

RankerModel RankerModel::init(std::size_t input_dim, const std::vector<std::size_t>& hidden_dims,
                              std::uint64_t seed) {
    if (input_dim == 0) throw ConfigError("RankerModel: input_dim must be positive");
    for (std::size_t h : hidden_dims) {
        if (h == 0) throw ConfigError("RankerModel: hidden dims must be positive");
    }
    RankerModel m;
    m.layer_dims.push_back(input_dim);
    for (std::size_t h : hidden_dims) m.layer_dims.push_back(h);
    m.layer_dims.push_back(1);
    Rng rng(seed);
    for (std::size_t l = 0; l + 1 < m.layer_dims.size(); ++l) {
        std::vector<double> w;
        init_layer(w, m.layer_dims[l + 1], m.layer_dims[l], rng);
        m.weights.push_back(std::move(w));
        m.biases.emplace_back(m.layer_dims[l + 1], 0.0);
    }
    m.train_meta.seed = seed;
    return m;
}

double RankerModel::forward(std::span<const double> features) const {
    if (features.size() != layer_dims.front())
        throw ShapeError("forward: expected " + std::to_string(layer_dims.front()) +
                         " features, got " + std::to_string(features.size()));
    std::vector<double> cur(features.begin(), features.end());
    std::vector<double> next;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        const std::size_t din = layer_dims[l];
        const std::size_t dout = layer_dims[l + 1];
        next.assign(dout, 0.0);
        for (std::size_t o = 0; o < dout; ++o) {
            double s = biases[l][o];
            for (std::size_t j = 0; j < din; ++j) s += weights[l][o * din + j] * cur[j];
            next[o] = l + 1 == weights.size() ? clamp_unit(sigmoid(s)) : (s > 0.0 ? s : 0.0);
        }
        cur.swap(next);
    }
    return cur[0];
}

std::size_t RankerModel::parameter_count() const {
    std::size_t count = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) count += weights[l].size() + biases[l].size();
    return count;
}

std::vector<double> flatten_params(const RankerModel& m) {
    std::vector<double> params;
    params.reserve(m.parameter_count());
    for (std::size_t l = 0; l < m.weights.size(); ++l) {
        params.insert(params.end(), m.weights[l].begin(), m.weights[l].end());
        params.insert(params.end(), m.biases[l].begin(), m.biases[l].end());
    }
    return params;
}

void set_params(RankerModel& m, std::span<const double> params) {
    if (params.size() != m.parameter_count()) throw ShapeError("set_params: size mismatch");
    std::size_t pos = 0;
    for (std::size_t l = 0; l < m.weights.size(); ++l) {
        std::copy_n(params.begin() + pos, m.weights[l].size(), m.weights[l].begin());
        pos += m.weights[l].size();
        std::copy_n(params.begin() + pos, m.biases[l].size(), m.biases[l].begin());
        pos += m.biases[l].size();
    }
}

double loss_and_gradient(const RankerModel& m, const std::vector<std::vector<double>>& features,
                         std::span<const double> labels, const GroupMasks& groups,
                         const FairnessConfig& cfg, std::vector<double>* grad) {
    const std::size_t n = features.size();
    if (n == 0) throw DomainError("loss_and_gradient: empty batch");
    if (labels.size() != n) throw ShapeError("loss_and_gradient: labels length mismatch");

    BatchWorkspace ws;
    forward_batch(m, features, ws);
    const std::vector<double>& preds = ws.activations.back();

    const double loss = total_loss(preds, labels, groups, cfg);
    if (!grad) return loss;

    const auto n_d = static_cast<double>(n);
    const std::size_t layers = m.weights.size();

    // dL/dz at the output: cross-entropy-through-sigmoid term plus the
    // fairness term routed through each group mean and the global mean.
    std::vector<double> dout(n);
    for (std::size_t i = 0; i < n; ++i) dout[i] = (preds[i] - labels[i]) / n_d;
    if (cfg.lambda > 0.0) {
        for (const auto& term : parity_terms(preds, groups, cfg)) {
            const double common = 2.0 * cfg.lambda * term.weight * term.gap;
            const double inv_group = 1.0 / static_cast<double>(term.group_size);
            for (std::size_t i = 0; i < n; ++i) {
                const double dmean = ((*term.mask)[i] ? inv_group : 0.0) - 1.0 / n_d;
                dout[i] += common * dmean * preds[i] * (1.0 - preds[i]);
            }
        }
    }

    ws.delta.resize(layers);
    ws.delta[layers - 1] = std::move(dout);

    grad->assign(m.parameter_count(), 0.0);
    // Flattened offsets mirror flatten_params: weights then biases per layer.
    std::vector<std::size_t> offsets(layers);
    std::size_t pos = 0;
    for (std::size_t l = 0; l < layers; ++l) {
        offsets[l] = pos;
        pos += m.weights[l].size() + m.biases[l].size();
    }

    for (std::size_t l = layers; l-- > 0;) {
        const std::size_t din = m.layer_dims[l];
        const std::size_t dout_dim = m.layer_dims[l + 1];
        const auto& a_prev = ws.activations[l];
        const auto& d = ws.delta[l];
        double* gw = grad->data() + offsets[l];
        double* gb = gw + m.weights[l].size();
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t o = 0; o < dout_dim; ++o) {
                const double di = d[i * dout_dim + o];
                gb[o] += di;
                double* gwrow = gw + o * din;
                const double* arow = &a_prev[i * din];
                for (std::size_t j = 0; j < din; ++j) gwrow[j] += di * arow[j];
            }
        }
        if (l == 0) break;
        // Propagate through the relu of the previous layer.
        auto& d_prev = ws.delta[l - 1];
        d_prev.assign(n * din, 0.0);
        const auto& w = m.weights[l];
        const auto& z_prev = ws.pre[l - 1];
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t o = 0; o < dout_dim; ++o) {
                const double di = d[i * dout_dim + o];
                if (di == 0.0) continue;
                const double* wrow = &w[o * din];
                for (std::size_t j = 0; j < din; ++j) {
                    if (z_prev[i * din + j] > 0.0) d_prev[i * din + j] += di * wrow[j];
                }
            }
        }
    }
    return loss;
}

std::vector<double> encode_features(const PaperRecord& r, const FeatureScaling& scaling) {
    const double sd = scaling.h_index_sd > 0.0 ? scaling.h_index_sd : 1.0;
    return {(r.h_index - scaling.h_index_mean) / sd, r.prestige, static_cast<double>(r.race),
            static_cast<double>(r.gender), static_cast<double>(r.country)};
}

FeatureScaling fit_scaling(const Dataset& ds) {
    if (ds.size() == 0) throw DomainError("fit_scaling: empty dataset");
    const std::vector<double> h = ds.column_vector(Column::h_index);
    FeatureScaling s;
    s.h_index_mean = mean(h);
    s.h_index_sd = h.size() > 1 ? sample_sd(h) : 1.0;
    if (s.h_index_sd == 0.0) s.h_index_sd = 1.0;
    return s;
}

std::vector<double> accept_labels(const Dataset& ds) {
    std::vector<double> y;
    y.reserve(ds.size());
    for (const auto& r : ds.records()) y.push_back(r.outcome >= 2 ? 1.0 : 0.0);
    return y;
}

RankerModel train(const Dataset& ds, const FairnessConfig& cfg, const TrainOptions& opts) {
    cfg.validate();
    if (ds.size() == 0) throw DomainError("train: empty dataset");
    if (opts.epochs < 1) throw ConfigError("train: epochs must be >= 1");
    if (!(opts.lr > 0.0)) throw ConfigError("train: lr must be > 0");

    const std::vector<double> labels = accept_labels(ds);
    const bool has_pos = std::any_of(labels.begin(), labels.end(), [](double v) { return v == 1.0; });
    const bool has_neg = std::any_of(labels.begin(), labels.end(), [](double v) { return v == 0.0; });
    if (!has_pos || !has_neg)
        throw DomainError("train: both label classes must be present");

    const FeatureScaling scaling = fit_scaling(ds);
    std::vector<std::vector<double>> features;
    features.reserve(ds.size());
    for (const auto& r : ds.records()) features.push_back(encode_features(r, scaling));
    const GroupMasks groups = GroupMasks::from_dataset(ds);

    RankerModel model = RankerModel::init(kRankerInputDim, opts.hidden_dims, opts.seed);
    model.fairness_config = cfg;
    model.scaling = scaling;

    std::vector<double> params = flatten_params(model);
    std::vector<double> grad;
    double loss = 0.0;
    double last_finite_loss = 0.0;
    int epoch = 0;
    for (; epoch < opts.epochs; ++epoch) {
        loss = loss_and_gradient(model, features, labels, groups, cfg, &grad);
        if (!std::isfinite(loss))
            throw TrainingError("train: loss diverged at epoch " + std::to_string(epoch) +
                                    " (last finite total loss " +
                                    std::to_string(last_finite_loss) + ")",
                                epoch, last_finite_loss);
        last_finite_loss = loss;
        for (std::size_t j = 0; j < params.size(); ++j) params[j] -= opts.lr * grad[j];
        set_params(model, params);
    }

    // Final bookkeeping pass at the trained parameters.
    BatchWorkspace ws;
    forward_batch(model, features, ws);
    const std::vector<double>& preds = ws.activations.back();
    model.train_meta.epochs_run = epoch;
    model.train_meta.seed = opts.seed;
    model.train_meta.final_prediction_loss = prediction_loss(preds, labels);
    model.train_meta.final_fairness_loss =
        cfg.lambda > 0.0 ? fairness_loss(preds, groups, cfg) : 0.0;
    model.train_meta.final_total_loss =
        model.train_meta.final_prediction_loss + cfg.lambda * model.train_meta.final_fairness_loss;
    if (!std::isfinite(model.train_meta.final_total_loss))
        throw TrainingError("train: final loss non-finite", epoch, last_finite_loss);
    return model;
}

std::vector<RankRow> rank(const RankerModel& m, const Dataset& ds) {
    std::vector<RankRow> rows;
    rows.reserve(ds.size());
    for (const auto& r : ds.records())
        rows.push_back({r.id, m.forward(encode_features(r, m.scaling)), 0});
    std::sort(rows.begin(), rows.end(), [](const RankRow& a, const RankRow& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.id < b.id;
    });
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i].rank = i + 1;
    return rows;
}

RankedList ranked_list(const RankerModel& m, const Dataset& ds) {
    std::vector<std::pair<double, const PaperRecord*>> scored;
    scored.reserve(ds.size());
    for (const auto& r : ds.records())
        scored.emplace_back(m.forward(encode_features(r, m.scaling)), &r);
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second->id < b.second->id;
    });
    RankedList rl;
    rl.entries.reserve(scored.size());
    for (const auto& [score, rec] : scored)
        rl.entries.push_back({rec->id, score, rec->outcome, rec->race, rec->gender, rec->country});
    return rl;
}

namespace {

struct AttributeWeights {
    std::vector<int> treatment;
    std::vector<double> weights;
};

// Propensity weights for score-outcome ATEs; the fit depends only on the
// data, so one fit per attribute serves every sweep point.
AttributeWeights attribute_ipw(const Dataset& ds, Attribute attr,
                               const std::vector<Column>& covariates) {
    TreatmentSpec spec;
    spec.treatment = attr;
    spec.covariates = covariates;
    spec.validate();
    const LogisticModel model = fit_logistic(ds, spec);
    const std::vector<double> scores = propensity_scores(model, ds, spec);
    const WeightSet ws = ipw_weights(ds, spec, scores, WeightOptions{});
    return {ds.treatment_vector(spec), ws.weights};
}

void fill_metrics(const RankerModel& model, const Dataset& ds, SweepRow& row) {
    const RankedList rl = ranked_list(model, ds);
    row.ndcg = ndcg(rl);
    row.rank_gap_race = rank_gap(rl, Attribute::race);
    row.rank_gap_gender = rank_gap(rl, Attribute::gender);
    row.rank_gap_country = rank_gap(rl, Attribute::country);

    std::vector<double> preds;
    preds.reserve(ds.size());
    for (const auto& r : ds.records())
        preds.push_back(model.forward(encode_features(r, model.scaling)));
    TreatmentSpec dummy;
    for (Attribute a : {Attribute::race, Attribute::gender, Attribute::country}) {
        dummy.treatment = a;
        const std::vector<int> flags = ds.treatment_vector(dummy);
        const double gap = parity_gap(preds, flags);
        switch (a) {
            case Attribute::race: row.parity_gap_race = gap; break;
            case Attribute::gender: row.parity_gap_gender = gap; break;
            case Attribute::country: row.parity_gap_country = gap; break;
        }
    }
}

}  // namespace

std::vector<SweepRow> lambda_sweep(const Dataset& ds, const std::vector<double>& lambdas,
                                   const FairnessConfig& component_weights,
                                   const TrainOptions& opts,
                                   const std::vector<Column>& ate_covariates,
                                   std::vector<std::optional<RankerModel>>* out_models) {
    if (lambdas.empty()) throw ConfigError("lambda_sweep: no lambda values");
    if (!std::is_sorted(lambdas.begin(), lambdas.end()))
        throw ConfigError("lambda_sweep: lambdas must be sorted ascending");
    for (double l : lambdas) {
        if (l < 0.0) throw ConfigError("lambda_sweep: lambdas must be non-negative");
    }

    const AttributeWeights w_race = attribute_ipw(ds, Attribute::race, ate_covariates);
    const AttributeWeights w_gender = attribute_ipw(ds, Attribute::gender, ate_covariates);
    const AttributeWeights w_country = attribute_ipw(ds, Attribute::country, ate_covariates);

    std::vector<SweepRow> rows;
    if (out_models) out_models->clear();
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        SweepRow row;
        row.lambda = lambdas[i];
        std::optional<RankerModel> trained;
        try {
            FairnessConfig cfg = component_weights;
            cfg.lambda = lambdas[i];
            TrainOptions point_opts = opts;
            point_opts.seed = Rng::child_seed(opts.seed, i);
            const RankerModel model = train(ds, cfg, point_opts);

            std::vector<double> preds;
            preds.reserve(ds.size());
            for (const auto& r : ds.records())
                preds.push_back(model.forward(encode_features(r, model.scaling)));

            row.ate_race = ate_ipw(w_race.treatment, preds, w_race.weights);
            row.ate_gender = ate_ipw(w_gender.treatment, preds, w_gender.weights);
            row.ate_country = ate_ipw(w_country.treatment, preds, w_country.weights);
            fill_metrics(model, ds, row);
            row.status = "ok";
            trained = model;
        } catch (const Error& e) {
            row.status = std::string("failed: ") + e.what();
        }
        rows.push_back(std::move(row));
        if (out_models) out_models->push_back(std::move(trained));
    }
    return rows;
}

std::vector<AblationRow> ablation(const Dataset& ds,
                                  const std::vector<std::pair<double, double>>& weight_pairs,
                                  double lambda_fixed, const TrainOptions& opts,
                                  std::vector<std::optional<RankerModel>>* out_models) {
    if (lambda_fixed < 0.0) throw ConfigError("ablation: lambda must be non-negative");
    std::vector<AblationRow> rows;
    if (out_models) out_models->clear();

    auto run_point = [&](const std::string& label, double wr, double wc, double lambda) {
        AblationRow row;
        row.label = label;
        row.w_race = wr;
        row.w_country = wc;
        std::optional<RankerModel> trained;
        try {
            FairnessConfig cfg;
            cfg.lambda = lambda;
            cfg.w_race = wr;
            cfg.w_country = wc;
            const RankerModel model = train(ds, cfg, opts);
            const RankedList rl = ranked_list(model, ds);
            row.rank_gap_race = rank_gap(rl, Attribute::race);
            row.rank_gap_country = rank_gap(rl, Attribute::country);
            row.rank_gap_gender = rank_gap(rl, Attribute::gender);
            row.ndcg = ndcg(rl);
            row.status = "ok";
            trained = model;
        } catch (const Error& e) {
            row.status = std::string("failed: ") + e.what();
        }
        rows.push_back(std::move(row));
        if (out_models) out_models->push_back(std::move(trained));
    };

    run_point("Baseline (No Fairness)", 0.0, 0.0, lambda_fixed);
    for (const auto& [wr, wc] : weight_pairs) {
        if (wr < 0.0 || wc < 0.0) throw ConfigError("ablation: weights must be non-negative");
        char label[64];
        std::snprintf(label, sizeof(label), "(%g:%g)", wr, wc);
        run_point(label, wr, wc, lambda_fixed);
    }
    return rows;
}

nlohmann::json RankerModel::to_json() const {
    nlohmann::json weights_json = nlohmann::json::array();
    for (const auto& w : weights) weights_json.push_back(w);
    nlohmann::json biases_json = nlohmann::json::array();
    for (const auto& b : biases) biases_json.push_back(b);
    return {{"layer_dims", layer_dims},
            {"weights", weights_json},
            {"biases", biases_json},
            {"activation", {{"hidden", "relu"}, {"output", "sigmoid"}}},
            {"fairness_config", fairness_config.to_json()},
            {"scaling", {{"h_index_mean", scaling.h_index_mean}, {"h_index_sd", scaling.h_index_sd}}},
            {"train_meta",
             {{"epochs_run", train_meta.epochs_run},
              {"final_total_loss", train_meta.final_total_loss},
              {"final_prediction_loss", train_meta.final_prediction_loss},
              {"final_fairness_loss", train_meta.final_fairness_loss},
              {"seed", train_meta.seed}}}};
}

RankerModel RankerModel::from_json(const nlohmann::json& j) {
    RankerModel m;
    m.layer_dims = j.at("layer_dims").get<std::vector<std::size_t>>();
    if (m.layer_dims.size() < 2 || m.layer_dims.back() != 1)
        throw ConfigError("RankerModel: output layer width must be 1");
    for (const auto& w : j.at("weights")) m.weights.push_back(w.get<std::vector<double>>());
    for (const auto& b : j.at("biases")) m.biases.push_back(b.get<std::vector<double>>());
    if (m.weights.size() != m.layer_dims.size() - 1 || m.biases.size() != m.weights.size())
        throw ConfigError("RankerModel: layer count mismatch");
    for (std::size_t l = 0; l + 1 < m.layer_dims.size(); ++l) {
        if (m.weights[l].size() != m.layer_dims[l + 1] * m.layer_dims[l] ||
            m.biases[l].size() != m.layer_dims[l + 1])
            throw ConfigError("RankerModel: weight shape mismatch at layer " + std::to_string(l));
    }
    m.fairness_config = FairnessConfig::from_json(j.at("fairness_config"));
    m.scaling.h_index_mean = j.at("scaling").at("h_index_mean").get<double>();
    m.scaling.h_index_sd = j.at("scaling").at("h_index_sd").get<double>();
    const auto& meta = j.at("train_meta");
    m.train_meta.epochs_run = meta.at("epochs_run").get<int>();
    m.train_meta.final_total_loss = meta.at("final_total_loss").get<double>();
    m.train_meta.final_prediction_loss = meta.at("final_prediction_loss").get<double>();
    m.train_meta.final_fairness_loss = meta.at("final_fairness_loss").get<double>();
    m.train_meta.seed = meta.at("seed").get<std::uint64_t>();
    return m;
}

}  // namespace causal_audit
