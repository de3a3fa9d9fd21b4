#include "lagcn/edge_classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "lagcn/error.hpp"
#include "lagcn/random.hpp"

namespace lagcn {

namespace {

constexpr const char* kModule = "edge-classifier";

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

std::vector<double> project_row(const Matrix& w, std::span<const double> x) {
    std::vector<double> out(w.cols(), 0.0);
    for (std::size_t i = 0; i < w.rows(); ++i) {
        const double xi = x[i];
        if (xi == 0.0) continue;
        auto wrow = w.row(i);
        for (std::size_t j = 0; j < w.cols(); ++j) out[j] += xi * wrow[j];
    }
    return out;
}

// Activations of every layer for one pair; acts[0] is the pair feature vector.
struct Forward {
    std::vector<std::vector<double>> acts;
    std::vector<std::vector<double>> pre;
    double logit = 0.0;
};

Forward forward_pair(const EdgeClassifier& c, std::span<const double> eu, std::span<const double> ev) {
    Forward f;
    f.acts.push_back(pair_features(eu, ev));
    for (std::size_t l = 0; l < c.layers.size(); ++l) {
        const auto& layer = c.layers[l];
        const auto& in = f.acts.back();
        std::vector<double> z(layer.bias);
        for (std::size_t i = 0; i < in.size(); ++i) {
            const double a = in[i];
            if (a == 0.0) continue;
            auto wrow = layer.weights.row(i);
            for (std::size_t j = 0; j < z.size(); ++j) z[j] += a * wrow[j];
        }
        f.pre.push_back(z);
        if (l + 1 == c.layers.size()) {
            f.logit = z[0];
        } else {
            for (double& v : z) v = std::max(0.0, v);
            f.acts.push_back(std::move(z));
        }
    }
    return f;
}

void fill_uniform(std::span<double> values, double bound, Rng& rng) {
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double& v : values) v = dist(rng);
}

void zero(EdgeClassifier& c) {
    for (auto p : c.parameters()) std::fill(p.begin(), p.end(), 0.0);
}

} // namespace

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) fail(kModule, "learning_rate must be positive");
    if (epochs < 0) fail(kModule, "epochs must be non-negative");
    if (batch_size == 0) fail(kModule, "batch_size must be positive");
    if (proj_dim == 0) fail(kModule, "proj_dim must be positive");
    for (auto w : hidden_widths)
        if (w == 0) fail(kModule, "hidden widths must be positive");
    if (!(momentum >= 0.0 && momentum < 1.0)) fail(kModule, "momentum must lie in [0, 1)");
    if (!(threshold >= 0.0 && threshold <= 1.0)) fail(kModule, "threshold must lie in [0, 1]");
    if (!(weight_decay >= 0.0)) fail(kModule, "weight_decay must be non-negative");
}

std::size_t PairSet::positives() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(pairs.begin(), pairs.end(), [](const LabeledPair& p) { return p.label == 1; }));
}

PairSet build_pairs(const Graph& g, const NodeTable& t, const TrainConfig& cfg) {
    const auto train = t.nodes_in(Split::train);
    if (train.empty()) fail(kModule, "train split is empty");
    std::vector<bool> is_train(g.num_nodes(), false);
    for (NodeId v : train) is_train[v] = true;
    auto make = [&](NodeId a, NodeId b, PairProvenance prov) {
        return LabeledPair{a, b, t.labels[a] == t.labels[b] ? 1 : 0, prov};
    };

    PairSet out;
    std::vector<Edge> one_hop;
    for (NodeId u : train) {
        for (NodeId v : g.neighbors(u)) {
            if (v == u || !is_train[v]) continue;
            one_hop.emplace_back(std::min(u, v), std::max(u, v));
        }
    }
    std::sort(one_hop.begin(), one_hop.end());
    one_hop.erase(std::unique(one_hop.begin(), one_hop.end()), one_hop.end());
    for (auto [a, b] : one_hop) out.pairs.push_back(make(a, b, PairProvenance::one_hop));

    std::vector<Edge> taken = one_hop;
    if (cfg.include_two_hop) {
        std::vector<Edge> two_hop;
        for (NodeId u : train) {
            for (NodeId w : two_hop_candidates(g, u)) {
                // Distance is symmetric only on symmetric graphs; keep the pair
                // once and skip anything already adjacent.
                if (!is_train[w]) continue;
                const Edge key{std::min(u, w), std::max(u, w)};
                if (std::binary_search(one_hop.begin(), one_hop.end(), key)) continue;
                two_hop.push_back(key);
            }
        }
        std::sort(two_hop.begin(), two_hop.end());
        two_hop.erase(std::unique(two_hop.begin(), two_hop.end()), two_hop.end());
        for (auto [a, b] : two_hop) out.pairs.push_back(make(a, b, PairProvenance::two_hop));
        taken.insert(taken.end(), two_hop.begin(), two_hop.end());
        std::sort(taken.begin(), taken.end());
    }

    if (cfg.sampled_pairs > 0 && train.size() >= 2) {
        const std::size_t available = train.size() * (train.size() - 1) / 2 - taken.size();
        const std::size_t want = std::min(cfg.sampled_pairs, available);
        Rng rng(derive_seed(cfg.seed, 0xA11));
        std::uniform_int_distribution<std::size_t> pick(0, train.size() - 1);
        std::vector<Edge> sampled;
        while (sampled.size() < want) {
            const NodeId a = train[pick(rng)];
            const NodeId b = train[pick(rng)];
            if (a == b) continue;
            const Edge key{std::min(a, b), std::max(a, b)};
            if (std::binary_search(taken.begin(), taken.end(), key)) continue;
            taken.insert(std::lower_bound(taken.begin(), taken.end(), key), key);
            sampled.push_back(key);
        }
        std::sort(sampled.begin(), sampled.end());
        for (auto [a, b] : sampled) out.pairs.push_back(make(a, b, PairProvenance::sampled));
    }

    if (out.pairs.empty()) fail(kModule, "no eligible train-train pairs");
    return out;
}

PairSet held_out_pairs(const Graph& g, const NodeTable& t) {
    PairSet out;
    for (NodeId u = 0; u < g.num_nodes(); ++u) {
        for (NodeId v : g.neighbors(u)) {
            if (v == u) continue;
            if (v < u && g.has_edge(v, u)) continue;
            if (!t.has_label(u) || !t.has_label(v)) continue;
            if (t.splits[u] == Split::train && t.splits[v] == Split::train) continue;
            const NodeId a = std::min(u, v);
            const NodeId b = std::max(u, v);
            out.pairs.push_back({a, b, t.labels[a] == t.labels[b] ? 1 : 0, PairProvenance::one_hop});
        }
    }
    std::sort(out.pairs.begin(), out.pairs.end(),
              [](const LabeledPair& x, const LabeledPair& y) { return std::tie(x.u, x.v) < std::tie(y.u, y.v); });
    return out;
}

std::vector<double> pair_features(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        fail(kModule, "pair feature dims differ: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
    }
    const std::size_t d = a.size();
    std::vector<double> out(3 * d);
    for (std::size_t i = 0; i < d; ++i) {
        out[i] = std::abs(a[i] - b[i]);
        out[d + i] = a[i] + b[i];
        out[2 * d + i] = a[i] * b[i];
    }
    return out;
}

EdgeClassifier EdgeClassifier::initialize(std::size_t input_dim, const TrainConfig& cfg) {
    cfg.validate();
    if (input_dim == 0) fail(kModule, "input feature dimension must be positive");
    Rng rng(derive_seed(cfg.seed, 0xEC));
    EdgeClassifier c;
    c.projection = Matrix(input_dim, cfg.proj_dim);
    fill_uniform(c.projection.values(), 1.0 / std::sqrt(static_cast<double>(input_dim)), rng);
    std::size_t in = 3 * cfg.proj_dim;
    std::vector<std::size_t> widths = cfg.hidden_widths;
    widths.push_back(1);
    for (std::size_t out : widths) {
        DenseLayer layer{Matrix(in, out), std::vector<double>(out)};
        const double bound = 1.0 / std::sqrt(static_cast<double>(in));
        fill_uniform(layer.weights.values(), bound, rng);
        fill_uniform(layer.bias, bound, rng);
        c.layers.push_back(std::move(layer));
        in = out;
    }
    return c;
}

void EdgeClassifier::validate() const {
    if (layers.empty()) fail(kModule, "classifier has no layers");
    if (layers.front().weights.rows() != 3 * proj_dim()) fail(kModule, "first layer width must be 3 x proj_dim");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        if (layers[l].bias.size() != layers[l].weights.cols()) fail(kModule, "bias width mismatch");
        if (l > 0 && layers[l].weights.rows() != layers[l - 1].weights.cols()) {
            fail(kModule, "layer widths are inconsistent");
        }
    }
    if (layers.back().weights.cols() != 1) fail(kModule, "output layer must have width 1");
}

std::vector<std::span<double>> EdgeClassifier::parameters() {
    std::vector<std::span<double>> out{projection.values()};
    for (auto& l : layers) {
        out.push_back(l.weights.values());
        out.push_back(l.bias);
    }
    return out;
}

std::vector<std::span<const double>> EdgeClassifier::parameters() const {
    std::vector<std::span<const double>> out{projection.values()};
    for (const auto& l : layers) {
        out.push_back(l.weights.values());
        out.push_back(l.bias);
    }
    return out;
}

Matrix EdgeClassifier::project(const Matrix& features) const {
    if (features.cols() != input_dim()) fail(kModule, "feature width does not match projection");
    return matmul(features, projection);
}

double EdgeClassifier::logit_projected(std::span<const double> eu, std::span<const double> ev) const {
    return forward_pair(*this, eu, ev).logit;
}

double EdgeClassifier::score_projected(std::span<const double> eu, std::span<const double> ev) const {
    return sigmoid(logit_projected(eu, ev));
}

double score(const EdgeClassifier& c, std::span<const double> x_u, std::span<const double> x_v) {
    if (x_u.size() != c.input_dim() || x_v.size() != c.input_dim()) fail(kModule, "feature width mismatch");
    const auto eu = project_row(c.projection, x_u);
    const auto ev = project_row(c.projection, x_v);
    return c.score_projected(eu, ev);
}

ClassWeights class_weights(const PairSet& pairs, ClassWeighting mode) {
    if (mode == ClassWeighting::none) return {};
    const double n = static_cast<double>(pairs.size());
    const double pos = static_cast<double>(pairs.positives());
    const double neg = n - pos;
    if (pos == 0 || neg == 0) return {};
    return {n / (2.0 * neg), n / (2.0 * pos)};
}

double edge_loss(const EdgeClassifier& c, const PairSet& pairs, const Matrix& features,
                 std::span<const std::size_t> indices, const ClassWeights& weights, EdgeClassifier* grad) {
    if (features.cols() != c.input_dim()) fail(kModule, "feature width does not match projection");
    if (grad) {
        *grad = c;
        zero(*grad);
    }
    double weight_sum = 0.0;
    for (std::size_t idx : indices) weight_sum += pairs.pairs[idx].label == 1 ? weights.positive : weights.negative;
    if (weight_sum <= 0.0) return 0.0;

    const std::size_t dp = c.proj_dim();
    double loss = 0.0;
    for (std::size_t idx : indices) {
        const auto& pr = pairs.pairs[idx];
        if (pr.u >= features.rows() || pr.v >= features.rows()) fail(kModule, "pair references a missing feature row");
        const auto xu = features.row(pr.u);
        const auto xv = features.row(pr.v);
        const auto eu = project_row(c.projection, xu);
        const auto ev = project_row(c.projection, xv);
        const Forward f = forward_pair(c, eu, ev);
        const double target = pr.label;
        const double w = (pr.label == 1 ? weights.positive : weights.negative) / weight_sum;
        loss += w * (softplus(f.logit) - target * f.logit);
        if (!grad) continue;

        std::vector<double> dz{w * (sigmoid(f.logit) - target)};
        for (std::size_t l = c.layers.size(); l-- > 0;) {
            const auto& layer = c.layers[l];
            auto& g_layer = grad->layers[l];
            const auto& in = f.acts[l];
            for (std::size_t i = 0; i < in.size(); ++i) {
                if (in[i] == 0.0) continue;
                auto grow = g_layer.weights.row(i);
                for (std::size_t j = 0; j < dz.size(); ++j) grow[j] += in[i] * dz[j];
            }
            for (std::size_t j = 0; j < dz.size(); ++j) g_layer.bias[j] += dz[j];
            std::vector<double> da(in.size(), 0.0);
            for (std::size_t i = 0; i < in.size(); ++i) {
                auto wrow = layer.weights.row(i);
                double s = 0.0;
                for (std::size_t j = 0; j < dz.size(); ++j) s += wrow[j] * dz[j];
                da[i] = s;
            }
            if (l > 0) {
                const auto& z_prev = f.pre[l - 1];
                for (std::size_t i = 0; i < da.size(); ++i) da[i] = z_prev[i] > 0.0 ? da[i] : 0.0;
            }
            dz = std::move(da);
        }
        // dz now holds d loss / d pair_features.
        std::vector<double> deu(dp, 0.0);
        std::vector<double> dev(dp, 0.0);
        for (std::size_t i = 0; i < dp; ++i) {
            const double diff = eu[i] - ev[i];
            const double sgn = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
            deu[i] = dz[i] * sgn + dz[dp + i] + dz[2 * dp + i] * ev[i];
            dev[i] = -dz[i] * sgn + dz[dp + i] + dz[2 * dp + i] * eu[i];
        }
        for (std::size_t r = 0; r < c.input_dim(); ++r) {
            const double a = xu[r];
            const double b = xv[r];
            if (a == 0.0 && b == 0.0) continue;
            auto grow = grad->projection.row(r);
            for (std::size_t j = 0; j < dp; ++j) grow[j] += a * deu[j] + b * dev[j];
        }
    }
    return loss;
}

EdgeClassifier train_edge_classifier(const PairSet& pairs, const Matrix& features, const TrainConfig& cfg,
                                     TrainingLog* log) {
    cfg.validate();
    const std::size_t pos = pairs.positives();
    if (pos == 0 || pos == pairs.size()) {
        fail(kModule, "training pairs contain a single class (" + std::to_string(pos) + " positive of " +
                          std::to_string(pairs.size()) + ")");
    }
    EdgeClassifier c = EdgeClassifier::initialize(features.cols(), cfg);
    const ClassWeights weights = class_weights(pairs, cfg.class_weighting);
    std::vector<std::size_t> order(pairs.size());
    std::iota(order.begin(), order.end(), 0);
    const std::vector<std::size_t> all = order;

    auto full_loss = [&] {
        const double l = edge_loss(c, pairs, features, all, weights, nullptr);
        if (!std::isfinite(l)) fail(kModule, "non-finite training loss");
        return l;
    };
    if (log) log->epoch_loss = {full_loss()};

    EdgeClassifier velocity = c;
    zero(velocity);
    EdgeClassifier grad;
    Rng rng(derive_seed(cfg.seed, 0x5EED));
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
            const std::span<const std::size_t> batch(order.data() + start, stop - start);
            const double l = edge_loss(c, pairs, features, batch, weights, &grad);
            if (!std::isfinite(l)) {
                fail(kModule, "non-finite loss at epoch " + std::to_string(epoch) + ", batch starting at " +
                                  std::to_string(start));
            }
            auto params = c.parameters();
            auto grads = grad.parameters();
            auto vel = velocity.parameters();
            for (std::size_t t = 0; t < params.size(); ++t) {
                for (std::size_t i = 0; i < params[t].size(); ++i) {
                    vel[t][i] = cfg.momentum * vel[t][i] -
                                cfg.learning_rate * (grads[t][i] + cfg.weight_decay * params[t][i]);
                    params[t][i] += vel[t][i];
                }
            }
        }
        if (log) log->epoch_loss.push_back(full_loss());
    }
    return c;
}

ClassifierQuality quality_from_counts(std::size_t tp, std::size_t fn, std::size_t fp, std::size_t tn) {
    ClassifierQuality q;
    q.true_pos = tp;
    q.false_neg = fn;
    q.false_pos = fp;
    q.true_neg = tn;
    if (tp + fn > 0) q.p = static_cast<double>(tp) / static_cast<double>(tp + fn);
    if (fp + tn > 0) q.q = static_cast<double>(fp) / static_cast<double>(fp + tn);
    if (tp + fp > 0) q.p_pre = static_cast<double>(tp) / static_cast<double>(tp + fp);
    return q;
}

ClassifierQuality evaluate_quality(const EdgeClassifier& c, const PairSet& pairs, const Matrix& features,
                                   double threshold) {
    const Matrix emb = c.project(features);
    std::size_t tp = 0, fn = 0, fp = 0, tn = 0;
    for (const auto& pr : pairs.pairs) {
        const bool predicted = c.score_projected(emb.row(pr.u), emb.row(pr.v)) >= threshold;
        if (pr.label == 1) {
            predicted ? ++tp : ++fn;
        } else {
            predicted ? ++fp : ++tn;
        }
    }
    return quality_from_counts(tp, fn, fp, tn);
}

} // namespace lagcn
