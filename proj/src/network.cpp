#include "fastkan/network.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>

#include "fastkan/errors.hpp"

namespace fastkan {

const char* basis_kind_name(BasisKind kind) {
    return kind == BasisKind::BSpline ? "spline" : "rbf";
}

BasisKind basis_kind_from_name(const std::string& name) {
    if (name == "spline" || name == "bspline") return BasisKind::BSpline;
    if (name == "rbf" || name == "gaussian_rbf") return BasisKind::GaussianRbf;
    throw ConfigError("unknown basis family '" + name + "' (expected spline or rbf)");
}

void NetworkSpec::validate() const {
    if (widths.size() < 2)
        throw ConfigError("network: need at least input and output widths");
    for (int w : widths)
        if (w < 1) throw ConfigError("network: widths must be >= 1");
    if (!(grid_lo < grid_hi)) throw ConfigError("network: grid lo must be < hi");
    if (spline_order < 1) throw ConfigError("network: spline order must be >= 1");
    if (family == BasisKind::BSpline) {
        if (basis_count <= spline_order)
            throw ConfigError("network: spline basis count must exceed the order (count = intervals + order)");
    } else {
        if (basis_count < 2) throw ConfigError("network: rbf basis count must be >= 2");
    }
}

std::shared_ptr<const BasisFamily> NetworkSpec::make_basis() const {
    if (family == BasisKind::BSpline) {
        GridSpec g{grid_lo, grid_hi, basis_count - spline_order, spline_order};
        return std::make_shared<BSplineBasis>(g);
    }
    GridSpec g{grid_lo, grid_hi, basis_count, 1};
    return std::make_shared<GaussianRBFBasis>(g, bandwidth);
}

Network Network::build(const NetworkSpec& spec, std::uint64_t seed) {
    spec.validate();
    Network net(spec);
    const auto basis = spec.make_basis();
    Rng rng(mix_seed(seed, 0x1417));
    for (std::size_t i = 0; i + 1 < spec.widths.size(); ++i) {
        if (spec.use_layer_norm())
            net.layers_.push_back(std::make_unique<LayerNorm>(spec.widths[i]));
        auto kan = std::make_unique<KanLayer>(spec.widths[i], spec.widths[i + 1], basis);
        kan->init_params(rng);
        net.layers_.push_back(std::move(kan));
    }
    return net;
}

Matrix Network::forward(const Matrix& x) {
    if (layers_.empty()) throw StateError("network: no layers");
    Matrix cur = layers_.front()->forward(x);
    for (std::size_t i = 1; i < layers_.size(); ++i) cur = layers_[i]->forward(cur);
    return cur;
}

Matrix Network::backward(const Matrix& grad_out, bool need_input_grad) {
    if (layers_.empty()) throw StateError("network: no layers");
    Matrix grad = grad_out;
    for (std::size_t i = layers_.size(); i-- > 0;) {
        const bool need = i > 0 || need_input_grad;
        grad = layers_[i]->backward(grad, need);
    }
    return grad;
}

std::vector<ParamRef> Network::params() {
    std::vector<ParamRef> all;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        for (auto& p : layers_[i]->params()) {
            p.name = "layer" + std::to_string(i) + "." + layers_[i]->kind() + "." + p.name;
            all.push_back(p);
        }
    }
    return all;
}

std::size_t Network::param_count() {
    std::size_t n = 0;
    for (const auto& p : params()) n += p.value.size();
    return n;
}

// ---------------------------------------------------------------------------
// Serialization: magic "KANF", u32 version, spec block, then per-layer kind
// tag, shape header and little-endian 64-bit parameter payload.

namespace {

constexpr char kMagic[4] = {'K', 'A', 'N', 'F'};
constexpr std::uint32_t kFormatVersion = 1;

void put_u32(std::vector<std::uint8_t>& b, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& b, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& b, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64(b, bits);
}

struct ByteReader {
    const std::vector<std::uint8_t>& bytes;
    std::size_t pos = 0;

    void need(std::size_t n) const {
        if (pos + n > bytes.size())
            throw FormatError("model file truncated: need " + std::to_string(n) +
                              " bytes at offset " + std::to_string(pos) + ", file has " +
                              std::to_string(bytes.size()));
    }
    std::uint8_t u8() {
        need(1);
        return bytes[pos++];
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t(bytes[pos + i]) << (8 * i);
        pos += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::uint64_t(bytes[pos + i]) << (8 * i);
        pos += 8;
        return v;
    }
    double f64() {
        const std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
};

std::uint8_t layer_kind_tag(const char* kind) {
    if (std::strcmp(kind, "kan") == 0) return 0;
    if (std::strcmp(kind, "layernorm") == 0) return 1;
    if (std::strcmp(kind, "linear") == 0) return 2;
    throw FormatError(std::string("unknown layer kind ") + kind);
}

} // namespace

void Network::save(const std::string& path) const {
    std::vector<std::uint8_t> b;
    b.insert(b.end(), kMagic, kMagic + 4);
    put_u32(b, kFormatVersion);

    put_u32(b, static_cast<std::uint32_t>(spec_.widths.size()));
    for (int w : spec_.widths) put_u32(b, static_cast<std::uint32_t>(w));
    b.push_back(spec_.family == BasisKind::BSpline ? 0 : 1);
    put_u32(b, static_cast<std::uint32_t>(spec_.basis_count));
    put_u32(b, static_cast<std::uint32_t>(spec_.spline_order));
    put_f64(b, spec_.grid_lo);
    put_f64(b, spec_.grid_hi);
    put_f64(b, spec_.bandwidth);
    b.push_back(spec_.layer_norm.has_value() ? 1 : 0);
    b.push_back(spec_.use_layer_norm() ? 1 : 0);

    put_u32(b, static_cast<std::uint32_t>(layers_.size()));
    for (const auto& layer : layers_) {
        b.push_back(layer_kind_tag(layer->kind()));
        put_u32(b, static_cast<std::uint32_t>(layer->in_dim()));
        put_u32(b, static_cast<std::uint32_t>(layer->out_dim()));
        auto params = const_cast<Layer&>(*layer).params();
        std::uint64_t count = 0;
        for (const auto& p : params) count += p.value.size();
        put_u64(b, count);
        for (const auto& p : params)
            for (double v : p.value) put_f64(b, v);
    }

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot create " + path);
    out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
    if (!out) throw IoError("short write to " + path);
}

Network Network::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in),
                                    std::istreambuf_iterator<char>()};
    ByteReader r{bytes};

    r.need(4);
    if (std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw FormatError(path + ": bad magic, not a model file");
    r.pos = 4;
    const std::uint32_t version = r.u32();
    if (version != kFormatVersion)
        throw FormatError(path + ": unsupported format version " + std::to_string(version));

    NetworkSpec spec;
    const std::uint32_t n_widths = r.u32();
    if (n_widths < 2 || n_widths > 1024)
        throw FormatError(path + ": implausible width count " + std::to_string(n_widths));
    spec.widths.resize(n_widths);
    for (auto& w : spec.widths) w = static_cast<int>(r.u32());
    spec.family = r.u8() == 0 ? BasisKind::BSpline : BasisKind::GaussianRbf;
    spec.basis_count = static_cast<int>(r.u32());
    spec.spline_order = static_cast<int>(r.u32());
    spec.grid_lo = r.f64();
    spec.grid_hi = r.f64();
    spec.bandwidth = r.f64();
    const bool ln_override = r.u8() != 0;
    const bool ln_value = r.u8() != 0;
    if (ln_override) spec.layer_norm = ln_value;

    Network net = build(spec, 0);

    const std::uint32_t n_layers = r.u32();
    if (n_layers != net.layers_.size())
        throw FormatError(path + ": file declares " + std::to_string(n_layers) +
                          " layers, spec builds " + std::to_string(net.layers_.size()));
    for (std::size_t i = 0; i < net.layers_.size(); ++i) {
        Layer& layer = *net.layers_[i];
        const std::uint8_t tag = r.u8();
        const std::uint32_t in_dim = r.u32();
        const std::uint32_t out_dim = r.u32();
        if (tag != layer_kind_tag(layer.kind()) ||
            in_dim != static_cast<std::uint32_t>(layer.in_dim()) ||
            out_dim != static_cast<std::uint32_t>(layer.out_dim()))
            throw FormatError(path + ": layer " + std::to_string(i) + " header (" +
                              std::to_string(tag) + ", " + std::to_string(in_dim) + "x" +
                              std::to_string(out_dim) + ") does not match spec layer " +
                              layer.kind());
        auto params = layer.params();
        std::uint64_t expect = 0;
        for (const auto& p : params) expect += p.value.size();
        const std::uint64_t count = r.u64();
        if (count != expect)
            throw FormatError(path + ": layer " + std::to_string(i) + " (" + layer.kind() +
                              ") declares " + std::to_string(count) + " parameters, expected " +
                              std::to_string(expect));
        for (auto& p : params)
            for (double& v : p.value) v = r.f64();
    }
    if (r.pos != bytes.size())
        throw FormatError(path + ": " + std::to_string(bytes.size() - r.pos) +
                          " trailing bytes after parameters");
    return net;
}

// ---------------------------------------------------------------------------
// Losses

LossResult cross_entropy(const Matrix& logits, const std::vector<int>& labels) {
    const int batch = logits.rows();
    const int classes = logits.cols();
    if (static_cast<int>(labels.size()) != batch)
        throw ShapeError("cross_entropy: " + std::to_string(labels.size()) + " labels for " +
                         std::to_string(batch) + " rows");
    Matrix grad(batch, classes);
    double loss = 0.0;
    for (int r = 0; r < batch; ++r) {
        const int label = labels[static_cast<std::size_t>(r)];
        if (label < 0 || label >= classes)
            throw DataError("cross_entropy: label " + std::to_string(label) +
                            " out of range [0, " + std::to_string(classes) + ")");
        const auto row = logits.row(r);
        double max_logit = row[0];
        for (double v : row) max_logit = std::max(max_logit, v);
        double sum = 0.0;
        for (double v : row) sum += std::exp(v - max_logit);
        const double lse = max_logit + std::log(sum);
        loss += lse - row[static_cast<std::size_t>(label)];
        for (int c = 0; c < classes; ++c) {
            const double p = std::exp(row[static_cast<std::size_t>(c)] - lse);
            grad(r, c) = (p - (c == label ? 1.0 : 0.0)) / batch;
        }
    }
    return {loss / batch, std::move(grad)};
}

LossResult mse(const Matrix& pred, const Matrix& target) {
    if (!pred.same_shape(target))
        throw ShapeError("mse: prediction " + std::to_string(pred.rows()) + "x" +
                         std::to_string(pred.cols()) + " vs target " +
                         std::to_string(target.rows()) + "x" + std::to_string(target.cols()));
    const double inv_n = 1.0 / static_cast<double>(pred.size());
    Matrix grad(pred.rows(), pred.cols());
    double loss = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred.data()[i] - target.data()[i];
        loss += d * d * inv_n;
        grad.data()[i] = 2.0 * d * inv_n;
    }
    return {loss, std::move(grad)};
}

// ---------------------------------------------------------------------------
// Training

void TrainConfig::validate() const {
    if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("train: batch size must be >= 1");
    if (!(learning_rate > 0.0)) throw ConfigError("train: learning rate must be > 0");
}

namespace {

class Optimizer {
public:
    virtual ~Optimizer() = default;
    virtual void step(std::vector<ParamRef>& params) = 0;
};

class SgdOptimizer final : public Optimizer {
public:
    explicit SgdOptimizer(double lr) : lr_(lr) {}
    void step(std::vector<ParamRef>& params) override {
        for (auto& p : params)
            for (std::size_t i = 0; i < p.value.size(); ++i) p.value[i] -= lr_ * p.grad[i];
    }

private:
    double lr_;
};

class AdamOptimizer final : public Optimizer {
public:
    AdamOptimizer(double lr, double b1, double b2, double eps)
        : lr_(lr), b1_(b1), b2_(b2), eps_(eps) {}

    void step(std::vector<ParamRef>& params) override {
        if (m_.empty()) {
            m_.resize(params.size());
            v_.resize(params.size());
            for (std::size_t k = 0; k < params.size(); ++k) {
                m_[k].assign(params[k].value.size(), 0.0);
                v_[k].assign(params[k].value.size(), 0.0);
            }
        }
        ++t_;
        const double bc1 = 1.0 - std::pow(b1_, t_);
        const double bc2 = 1.0 - std::pow(b2_, t_);
        for (std::size_t k = 0; k < params.size(); ++k) {
            auto& p = params[k];
            for (std::size_t i = 0; i < p.value.size(); ++i) {
                const double g = p.grad[i];
                m_[k][i] = b1_ * m_[k][i] + (1.0 - b1_) * g;
                v_[k][i] = b2_ * v_[k][i] + (1.0 - b2_) * g * g;
                const double mhat = m_[k][i] / bc1;
                const double vhat = v_[k][i] / bc2;
                p.value[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
            }
        }
    }

private:
    double lr_, b1_, b2_, eps_;
    int t_ = 0;
    std::vector<std::vector<double>> m_, v_;
};

Matrix gather_rows(const Matrix& src, const std::vector<int>& idx, int from, int count) {
    Matrix out(count, src.cols());
    for (int r = 0; r < count; ++r) {
        const auto row = src.row(idx[static_cast<std::size_t>(from + r)]);
        std::copy(row.begin(), row.end(), out.row(r).begin());
    }
    return out;
}

LossResult batch_loss(Network& net, const Matrix& out, const Dataset& ds,
                      const std::vector<int>& idx, int from, int count, LossKind loss) {
    (void)net;
    if (loss == LossKind::CrossEntropy) {
        if (ds.kind != DatasetKind::Classification)
            throw ConfigError("train: cross-entropy needs a labeled dataset");
        std::vector<int> labels(static_cast<std::size_t>(count));
        for (int r = 0; r < count; ++r)
            labels[static_cast<std::size_t>(r)] = ds.labels[static_cast<std::size_t>(idx[static_cast<std::size_t>(from + r)])];
        return cross_entropy(out, labels);
    }
    if (!ds.targets) throw ConfigError("train: mse needs a regression dataset with targets");
    return mse(out, gather_rows(*ds.targets, idx, from, count));
}

double max_abs_param(std::vector<ParamRef>& params) {
    double m = 0.0;
    for (const auto& p : params)
        for (double v : p.value) m = std::max(m, std::abs(v));
    return m;
}

} // namespace

EvalResult evaluate(Network& net, const Dataset& ds, LossKind loss, int batch_size) {
    std::vector<int> idx(static_cast<std::size_t>(ds.size()));
    for (int i = 0; i < ds.size(); ++i) idx[static_cast<std::size_t>(i)] = i;
    double loss_sum = 0.0;
    int correct = 0;
    for (int from = 0; from < ds.size(); from += batch_size) {
        const int count = std::min(batch_size, ds.size() - from);
        const Matrix x = gather_rows(ds.inputs, idx, from, count);
        const Matrix out = net.forward(x);
        const LossResult l = batch_loss(net, out, ds, idx, from, count, loss);
        loss_sum += l.value * count;
        if (ds.kind == DatasetKind::Classification) {
            for (int r = 0; r < count; ++r) {
                int best = 0;
                for (int c = 1; c < out.cols(); ++c)
                    if (out(r, c) > out(r, best)) best = c;
                if (best == ds.labels[static_cast<std::size_t>(idx[static_cast<std::size_t>(from + r)])]) ++correct;
            }
        }
    }
    EvalResult res;
    res.loss = loss_sum / ds.size();
    res.accuracy = ds.kind == DatasetKind::Classification
                       ? static_cast<double>(correct) / ds.size()
                       : 0.0;
    return res;
}

std::vector<EpochRecord> train(Network& net, const Dataset& train_ds, const Dataset& val_ds,
                               const TrainConfig& cfg,
                               const std::function<void(const EpochRecord&)>& on_epoch) {
    cfg.validate();
    if (train_ds.dim() != net.in_dim())
        throw ConfigError("train: dataset dim " + std::to_string(train_ds.dim()) +
                          " does not match network input " + std::to_string(net.in_dim()));
    if (cfg.loss == LossKind::CrossEntropy && train_ds.kind != DatasetKind::Classification)
        throw ConfigError("train: cross-entropy needs a labeled dataset");
    if (cfg.loss == LossKind::Mse && train_ds.kind != DatasetKind::Regression)
        throw ConfigError("train: mse needs a regression dataset");

    std::unique_ptr<Optimizer> opt;
    if (cfg.optimizer == OptimizerKind::Adam)
        opt = std::make_unique<AdamOptimizer>(cfg.learning_rate, cfg.adam_beta1,
                                              cfg.adam_beta2, cfg.adam_epsilon);
    else
        opt = std::make_unique<SgdOptimizer>(cfg.learning_rate);

    auto params = net.params();
    std::vector<EpochRecord> records;
    records.reserve(static_cast<std::size_t>(cfg.epochs));
    const int n = train_ds.size();

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        Rng shuffle_rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(epoch)));
        const std::vector<int> order = shuffle_rng.permutation(n);

        double loss_sum = 0.0;
        int batch_index = 0;
        for (int from = 0; from < n; from += cfg.batch_size, ++batch_index) {
            const int count = std::min(cfg.batch_size, n - from);
            const Matrix x = gather_rows(train_ds.inputs, order, from, count);
            const Matrix out = net.forward(x);
            LossResult l = batch_loss(net, out, train_ds, order, from, count, cfg.loss);
            if (!std::isfinite(l.value))
                throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch) +
                                   ", batch " + std::to_string(batch_index) +
                                   "; max |param| = " + std::to_string(max_abs_param(params)));
            loss_sum += l.value * count;
            net.backward(l.grad, false);
            opt->step(params);
        }

        const EvalResult val = evaluate(net, val_ds, cfg.loss);
        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_loss = loss_sum / n;
        rec.val_loss = val.loss;
        rec.val_accuracy = val.accuracy;
        rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (on_epoch) on_epoch(rec);
        records.push_back(rec);
    }
    return records;
}

} // namespace fastkan
