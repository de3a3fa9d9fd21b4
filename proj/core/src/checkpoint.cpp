#include "lagcn/checkpoint.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "lagcn/error.hpp"
#include "lagcn/graph_io.hpp"

namespace lagcn {

namespace {

constexpr const char* kModule = "checkpoint";
constexpr const char* kMagic = "lagcn-checkpoint";
constexpr int kVersion = 1;

Matrix bias_matrix(const std::vector<double>& b) { return Matrix(1, b.size(), b); }

std::vector<double> bias_vector(const Matrix& m) {
    if (m.rows() != 1) fail(kModule, "bias tensor must have one row");
    auto v = m.values();
    return {v.begin(), v.end()};
}

std::string expect_kind(const Checkpoint& ckpt, const char* kind) {
    if (ckpt.kind != kind) fail(kModule, "expected a '" + std::string(kind) + "' checkpoint, got '" + ckpt.kind + "'");
    return ckpt.kind;
}

const std::string& meta(const Checkpoint& ckpt, const std::string& key) {
    auto it = ckpt.meta.find(key);
    if (it == ckpt.meta.end()) fail(kModule, "checkpoint is missing meta key '" + key + "'");
    return it->second;
}

} // namespace

const Matrix& Checkpoint::tensor(const std::string& name) const {
    for (const auto& [n, m] : tensors)
        if (n == name) return m;
    fail(kModule, "checkpoint has no tensor '" + name + "'");
}

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
    out << kMagic << ' ' << kVersion << '\n';
    out << "kind " << ckpt.kind << '\n';
    for (const auto& [k, v] : ckpt.meta) out << "meta " << k << ' ' << v << '\n';
    for (const auto& [name, m] : ckpt.tensors) {
        out << "tensor " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
        for (std::size_t i = 0; i < m.rows(); ++i) {
            auto row = m.row(i);
            for (std::size_t j = 0; j < row.size(); ++j) {
                if (j) out << ' ';
                out << format_double(row[j]);
            }
            out << '\n';
        }
    }
    out << "end\n";
}

Checkpoint read_checkpoint(std::istream& in) {
    std::string magic;
    int version = 0;
    if (!(in >> magic >> version) || magic != kMagic) fail(kModule, "not a lagcn checkpoint");
    if (version != kVersion) fail(kModule, "unsupported checkpoint version " + std::to_string(version));
    Checkpoint ckpt;
    std::string word;
    while (in >> word) {
        if (word == "end") return ckpt;
        if (word == "kind") {
            in >> ckpt.kind;
        } else if (word == "meta") {
            std::string k, v;
            in >> k >> v;
            ckpt.meta[k] = v;
        } else if (word == "tensor") {
            std::string name;
            std::size_t rows = 0, cols = 0;
            if (!(in >> name >> rows >> cols)) fail(kModule, "bad tensor header");
            std::vector<double> values(rows * cols);
            for (double& v : values) {
                std::string tok;
                if (!(in >> tok)) fail(kModule, "truncated tensor '" + name + "'");
                auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
                if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
                    fail(kModule, "bad value '" + tok + "' in tensor '" + name + "'");
                }
            }
            ckpt.tensors.emplace_back(name, Matrix(rows, cols, std::move(values)));
        } else {
            fail(kModule, "unexpected token '" + word + "'");
        }
    }
    fail(kModule, "checkpoint is missing its end marker");
}

Checkpoint to_checkpoint(const EdgeClassifier& c) {
    c.validate();
    Checkpoint ckpt;
    ckpt.kind = "edge-classifier";
    ckpt.meta["layers"] = std::to_string(c.layers.size());
    ckpt.tensors.emplace_back("projection", c.projection);
    for (std::size_t l = 0; l < c.layers.size(); ++l) {
        ckpt.tensors.emplace_back("layer" + std::to_string(l) + ".weights", c.layers[l].weights);
        ckpt.tensors.emplace_back("layer" + std::to_string(l) + ".bias", bias_matrix(c.layers[l].bias));
    }
    return ckpt;
}

Checkpoint to_checkpoint(const SgcModel& m) {
    Checkpoint ckpt;
    ckpt.kind = "sgc";
    ckpt.meta["k"] = std::to_string(m.k);
    ckpt.meta["norm"] = to_string(m.norm);
    ckpt.tensors.emplace_back("weights", m.weights);
    ckpt.tensors.emplace_back("bias", bias_matrix(m.bias));
    return ckpt;
}

Checkpoint to_checkpoint(const GcnModel& m) {
    Checkpoint ckpt;
    ckpt.kind = "gcn";
    ckpt.meta["norm"] = to_string(m.norm);
    ckpt.tensors.emplace_back("layer1.weights", m.layer1.weights);
    ckpt.tensors.emplace_back("layer1.bias", bias_matrix(m.layer1.bias));
    ckpt.tensors.emplace_back("layer2.weights", m.layer2.weights);
    ckpt.tensors.emplace_back("layer2.bias", bias_matrix(m.layer2.bias));
    return ckpt;
}

EdgeClassifier edge_classifier_from(const Checkpoint& ckpt) {
    expect_kind(ckpt, "edge-classifier");
    EdgeClassifier c;
    c.projection = ckpt.tensor("projection");
    const std::size_t layers = std::stoul(meta(ckpt, "layers"));
    for (std::size_t l = 0; l < layers; ++l) {
        const std::string prefix = "layer" + std::to_string(l);
        c.layers.push_back({ckpt.tensor(prefix + ".weights"), bias_vector(ckpt.tensor(prefix + ".bias"))});
    }
    c.validate();
    return c;
}

SgcModel sgc_model_from(const Checkpoint& ckpt) {
    expect_kind(ckpt, "sgc");
    SgcModel m;
    m.k = std::stoi(meta(ckpt, "k"));
    m.norm = parse_normalization(meta(ckpt, "norm"));
    m.weights = ckpt.tensor("weights");
    m.bias = bias_vector(ckpt.tensor("bias"));
    return m;
}

GcnModel gcn_model_from(const Checkpoint& ckpt) {
    expect_kind(ckpt, "gcn");
    GcnModel m;
    m.norm = parse_normalization(meta(ckpt, "norm"));
    m.layer1 = {ckpt.tensor("layer1.weights"), bias_vector(ckpt.tensor("layer1.bias"))};
    m.layer2 = {ckpt.tensor("layer2.weights"), bias_vector(ckpt.tensor("layer2.bias"))};
    return m;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    std::ofstream out(path);
    if (!out) fail(kModule, "cannot write " + path.string());
    write_checkpoint(out, ckpt);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(kModule, "cannot open " + path.string());
    return read_checkpoint(in);
}

void write_predictions(std::ostream& out, const std::vector<int>& predictions) {
    for (std::size_t v = 0; v < predictions.size(); ++v) out << v << '\t' << predictions[v] << '\n';
}

} // namespace lagcn
