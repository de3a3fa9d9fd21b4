#include "lagcn/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "lagcn/error.hpp"
#include "lagcn/random.hpp"

namespace lagcn {

namespace {

constexpr const char* kModule = "models";

void fill_uniform(std::span<double> values, double bound, Rng& rng) {
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double& v : values) v = dist(rng);
}

void check_trainable(const NodeTable& t) {
    if (t.nodes_in(Split::train).empty()) fail(kModule, "train split is empty");
    if (t.num_classes < 1) fail(kModule, "node table has no classes");
}

// Mean softmax cross-entropy over `nodes`; dlogits (same shape as logits,
// zero outside `nodes`) is filled when requested.
double softmax_cross_entropy(const Matrix& logits, const NodeTable& t, std::span<const NodeId> nodes,
                             Matrix* dlogits) {
    if (dlogits) *dlogits = Matrix(logits.rows(), logits.cols());
    if (nodes.empty()) return 0.0;
    const double inv_n = 1.0 / static_cast<double>(nodes.size());
    double loss = 0.0;
    for (NodeId v : nodes) {
        const int y = t.labels[v];
        if (y == kUnknownLabel) fail(kModule, "loss over node " + std::to_string(v) + " without a label");
        auto row = logits.row(v);
        const double mx = *std::max_element(row.begin(), row.end());
        double z = 0.0;
        for (double l : row) z += std::exp(l - mx);
        const double log_z = mx + std::log(z);
        loss += (log_z - row[static_cast<std::size_t>(y)]) * inv_n;
        if (dlogits) {
            auto drow = dlogits->row(v);
            for (std::size_t c = 0; c < row.size(); ++c) drow[c] = std::exp(row[c] - log_z) * inv_n;
            drow[static_cast<std::size_t>(y)] -= inv_n;
        }
    }
    return loss;
}

template <typename Model>
void zero(Model& m) {
    for (auto p : m.parameters()) std::fill(p.begin(), p.end(), 0.0);
}

template <typename Model>
void step(Model& m, Model& velocity, const Model& grad, const FitConfig& cfg) {
    auto params = m.parameters();
    auto vel = velocity.parameters();
    auto grads = grad.parameters();
    for (std::size_t t = 0; t < params.size(); ++t) {
        for (std::size_t i = 0; i < params[t].size(); ++i) {
            vel[t][i] = cfg.momentum * vel[t][i] - cfg.learning_rate * grads[t][i];
            params[t][i] += vel[t][i];
        }
    }
}

// Shared gradient-descent loop with optional early stopping on validation accuracy.
template <typename Model, typename LossFn, typename PredictFn>
Model fit_loop(Model m, const NodeTable& t, const FitConfig& cfg, LossFn loss_fn, PredictFn predict_fn) {
    Model velocity = m;
    zero(velocity);
    Model grad = m;
    Model best = m;
    double best_val = -1.0;
    int since_best = 0;
    const bool early_stop = cfg.patience > 0 && !t.nodes_in(Split::val).empty();
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double l = loss_fn(m, &grad);
        if (!std::isfinite(l)) fail(kModule, "non-finite loss at epoch " + std::to_string(epoch));
        step(m, velocity, grad, cfg);
        if (early_stop) {
            const auto pred = predict_fn(m);
            const double val = accuracy(pred, t, Split::val);
            if (val > best_val) {
                best_val = val;
                best = m;
                since_best = 0;
            } else if (++since_best >= cfg.patience) {
                break;
            }
        }
    }
    return early_stop ? best : m;
}

Matrix second_aggregate(const Graph* g, const Matrix& h, Normalization norm) {
    return g ? aggregate(*g, h, norm) : h;
}

Matrix second_aggregate_transpose(const Graph* g, const Matrix& h, Normalization norm) {
    return g ? aggregate_transpose(*g, h, norm) : h;
}

} // namespace

void FitConfig::validate() const {
    if (!(learning_rate > 0.0)) fail(kModule, "learning_rate must be positive");
    if (epochs < 0) fail(kModule, "epochs must be non-negative");
    if (!(weight_decay >= 0.0)) fail(kModule, "weight_decay must be non-negative");
    if (hidden_width == 0) fail(kModule, "hidden_width must be positive");
    if (!(momentum >= 0.0 && momentum < 1.0)) fail(kModule, "momentum must lie in [0, 1)");
}

std::vector<std::span<double>> SgcModel::parameters() { return {weights.values(), bias}; }
std::vector<std::span<const double>> SgcModel::parameters() const { return {weights.values(), bias}; }

std::vector<std::span<double>> GcnModel::parameters() {
    return {layer1.weights.values(), layer1.bias, layer2.weights.values(), layer2.bias};
}
std::vector<std::span<const double>> GcnModel::parameters() const {
    return {layer1.weights.values(), layer1.bias, layer2.weights.values(), layer2.bias};
}

double sgc_loss(const SgcModel& m, const Matrix& propagated, const NodeTable& t, std::span<const NodeId> nodes,
                double weight_decay, SgcModel* grad) {
    if (propagated.cols() != m.weights.rows()) fail(kModule, "feature width does not match SGC weights");
    Matrix logits = matmul(propagated, m.weights);
    add_row_vector(logits, m.bias);
    Matrix dlogits;
    double loss = softmax_cross_entropy(logits, t, nodes, grad ? &dlogits : nullptr);
    loss += 0.5 * weight_decay * frobenius_norm_squared(m.weights);
    if (grad) {
        grad->k = m.k;
        grad->norm = m.norm;
        grad->weights = matmul_tn(propagated, dlogits);
        auto gw = grad->weights.values();
        auto w = m.weights.values();
        for (std::size_t i = 0; i < gw.size(); ++i) gw[i] += weight_decay * w[i];
        grad->bias = column_sums(dlogits);
    }
    return loss;
}

double gcn_loss(const GcnModel& m, const Graph* g, const Matrix& aggregated_x, const NodeTable& t,
                std::span<const NodeId> nodes, double weight_decay, GcnModel* grad) {
    if (aggregated_x.cols() != m.layer1.weights.rows()) fail(kModule, "feature width does not match GCN weights");
    Matrix pre1 = matmul(aggregated_x, m.layer1.weights);
    add_row_vector(pre1, m.layer1.bias);
    Matrix h1 = pre1;
    for (double& v : h1.values()) v = std::max(0.0, v);
    const Matrix p = second_aggregate(g, h1, m.norm);
    Matrix logits = matmul(p, m.layer2.weights);
    add_row_vector(logits, m.layer2.bias);
    Matrix dlogits;
    double loss = softmax_cross_entropy(logits, t, nodes, grad ? &dlogits : nullptr);
    loss += 0.5 * weight_decay *
            (frobenius_norm_squared(m.layer1.weights) + frobenius_norm_squared(m.layer2.weights));
    if (grad) {
        grad->norm = m.norm;
        grad->layer2.weights = matmul_tn(p, dlogits);
        grad->layer2.bias = column_sums(dlogits);
        const Matrix dp = matmul_nt(dlogits, m.layer2.weights);
        Matrix dpre1 = second_aggregate_transpose(g, dp, m.norm);
        auto dv = dpre1.values();
        auto pv = pre1.values();
        for (std::size_t i = 0; i < dv.size(); ++i)
            if (!(pv[i] > 0.0)) dv[i] = 0.0;
        grad->layer1.weights = matmul_tn(aggregated_x, dpre1);
        grad->layer1.bias = column_sums(dpre1);
        auto add_decay = [&](Matrix& gw, const Matrix& w) {
            auto gv = gw.values();
            auto wv = w.values();
            for (std::size_t i = 0; i < gv.size(); ++i) gv[i] += weight_decay * wv[i];
        };
        add_decay(grad->layer1.weights, m.layer1.weights);
        add_decay(grad->layer2.weights, m.layer2.weights);
    }
    return loss;
}

SgcModel sgc_initialize(std::size_t input_dim, int num_classes, int k, const FitConfig& cfg) {
    cfg.validate();
    if (input_dim == 0 || num_classes < 1) fail(kModule, "SGC needs positive input width and class count");
    Rng rng(derive_seed(cfg.seed, 0x59C));
    SgcModel m;
    m.k = k;
    m.norm = cfg.norm;
    m.weights = Matrix(input_dim, static_cast<std::size_t>(num_classes));
    fill_uniform(m.weights.values(), 1.0 / std::sqrt(static_cast<double>(input_dim)), rng);
    m.bias.assign(static_cast<std::size_t>(num_classes), 0.0);
    return m;
}

GcnModel gcn_initialize(std::size_t input_dim, int num_classes, const FitConfig& cfg) {
    cfg.validate();
    if (input_dim == 0 || num_classes < 1) fail(kModule, "GCN needs positive input width and class count");
    Rng rng(derive_seed(cfg.seed, 0x6C4));
    GcnModel m;
    m.norm = cfg.norm;
    m.layer1 = {Matrix(input_dim, cfg.hidden_width), std::vector<double>(cfg.hidden_width, 0.0)};
    m.layer2 = {Matrix(cfg.hidden_width, static_cast<std::size_t>(num_classes)),
                std::vector<double>(static_cast<std::size_t>(num_classes), 0.0)};
    fill_uniform(m.layer1.weights.values(), 1.0 / std::sqrt(static_cast<double>(input_dim)), rng);
    fill_uniform(m.layer2.weights.values(), 1.0 / std::sqrt(static_cast<double>(cfg.hidden_width)), rng);
    return m;
}

SgcModel sgc_fit(const Graph& g, const NodeTable& t, const FitConfig& cfg, int k) {
    cfg.validate();
    check_trainable(t);
    const Matrix z = propagate(g, t.features, PropagationConfig{k, cfg.norm});
    const auto train = t.nodes_in(Split::train);
    SgcModel m = sgc_initialize(t.features.cols(), t.num_classes, k, cfg);
    auto loss_fn = [&](const SgcModel& model, SgcModel* grad) {
        return sgc_loss(model, z, t, train, cfg.weight_decay, grad);
    };
    auto predict_fn = [&](const SgcModel& model) {
        Matrix logits = matmul(z, model.weights);
        add_row_vector(logits, model.bias);
        return argmax_rows(logits);
    };
    return fit_loop(std::move(m), t, cfg, loss_fn, predict_fn);
}

namespace {

GcnModel gcn_fit_impl(const Graph* g, const NodeTable& t, const FitConfig& cfg) {
    cfg.validate();
    check_trainable(t);
    const Matrix ax = g ? aggregate(*g, t.features, cfg.norm) : t.features;
    const auto train = t.nodes_in(Split::train);
    GcnModel m = gcn_initialize(t.features.cols(), t.num_classes, cfg);
    auto loss_fn = [&](const GcnModel& model, GcnModel* grad) {
        return gcn_loss(model, g, ax, t, train, cfg.weight_decay, grad);
    };
    auto predict_fn = [&](const GcnModel& model) {
        Matrix h = matmul(ax, model.layer1.weights);
        add_row_vector(h, model.layer1.bias);
        for (double& v : h.values()) v = std::max(0.0, v);
        Matrix logits = matmul(second_aggregate(g, h, model.norm), model.layer2.weights);
        add_row_vector(logits, model.layer2.bias);
        return argmax_rows(logits);
    };
    return fit_loop(std::move(m), t, cfg, loss_fn, predict_fn);
}

} // namespace

GcnModel gcn_fit(const Graph& g, const NodeTable& t, const FitConfig& cfg) {
    if (!g.has_self_loops()) fail(kModule, "GCN requires self-loops on every node");
    return gcn_fit_impl(&g, t, cfg);
}

GcnModel mlp_fit(const NodeTable& t, const FitConfig& cfg) { return gcn_fit_impl(nullptr, t, cfg); }

Matrix sgc_logits(const SgcModel& m, const Graph& g, const NodeTable& t) {
    const Matrix z = propagate(g, t.features, PropagationConfig{m.k, m.norm});
    Matrix logits = matmul(z, m.weights);
    add_row_vector(logits, m.bias);
    return logits;
}

Matrix gcn_logits(const GcnModel& m, const Graph& g, const NodeTable& t) {
    Matrix h = matmul(aggregate(g, t.features, m.norm), m.layer1.weights);
    add_row_vector(h, m.layer1.bias);
    for (double& v : h.values()) v = std::max(0.0, v);
    Matrix logits = matmul(aggregate(g, h, m.norm), m.layer2.weights);
    add_row_vector(logits, m.layer2.bias);
    return logits;
}

std::vector<int> argmax_rows(const Matrix& logits) {
    std::vector<int> out(logits.rows(), 0);
    for (std::size_t i = 0; i < logits.rows(); ++i) {
        auto row = logits.row(i);
        std::size_t best = 0;
        for (std::size_t c = 1; c < row.size(); ++c)
            if (row[c] > row[best]) best = c;
        out[i] = static_cast<int>(best);
    }
    return out;
}

std::vector<int> predict(const SgcModel& m, const Graph& g, const NodeTable& t) {
    return argmax_rows(sgc_logits(m, g, t));
}

std::vector<int> predict(const GcnModel& m, const Graph& g, const NodeTable& t) {
    return argmax_rows(gcn_logits(m, g, t));
}

double accuracy(std::span<const int> predictions, const NodeTable& t, Split split) {
    if (predictions.size() != t.num_nodes()) fail(kModule, "prediction count does not match node count");
    std::size_t total = 0;
    std::size_t correct = 0;
    for (std::size_t v = 0; v < predictions.size(); ++v) {
        if (t.splits[v] != split || t.labels[v] == kUnknownLabel) continue;
        ++total;
        if (predictions[v] == t.labels[v]) ++correct;
    }
    if (total == 0) fail(kModule, std::string("split '") + to_string(split) + "' has no labeled nodes");
    return static_cast<double>(correct) / static_cast<double>(total);
}

} // namespace lagcn
