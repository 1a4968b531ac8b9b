#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fastkan/data.hpp"
#include "fastkan/layers.hpp"
#include "fastkan/matrix.hpp"

namespace fastkan {

enum class BasisKind { BSpline, GaussianRbf };

const char* basis_kind_name(BasisKind kind);
BasisKind basis_kind_from_name(const std::string& name);

// Architecture description. widths lists the unit counts per level, e.g.
// {784, 64, 10} builds two stacked KAN layers. basis_count is the number of
// basis functions per input scalar (for splines the grid gets
// basis_count - order intervals so both families have equal parameter
// budgets). layer_norm defaults to on for the RBF family and off for the
// spline family.
struct NetworkSpec {
    std::vector<int> widths;
    BasisKind family = BasisKind::GaussianRbf;
    int basis_count = 8;
    int spline_order = 3;
    double grid_lo = -2.0;
    double grid_hi = 2.0;
    double bandwidth = 0.0;  // <= 0: center spacing
    std::optional<bool> layer_norm;

    bool use_layer_norm() const {
        return layer_norm.value_or(family == BasisKind::GaussianRbf);
    }
    void validate() const;
    std::shared_ptr<const BasisFamily> make_basis() const;
};

class Network {
public:
    // Deterministic parameter init from seed.
    static Network build(const NetworkSpec& spec, std::uint64_t seed);

    Matrix forward(const Matrix& x);

    // Backpropagates grad through the chain, filling each layer's parameter
    // gradients. Returns the gradient wrt the network input when
    // need_input_grad is true (1x1 placeholder otherwise).
    Matrix backward(const Matrix& grad_out, bool need_input_grad = false);

    std::vector<ParamRef> params();
    std::size_t param_count();

    const NetworkSpec& spec() const { return spec_; }
    const std::vector<std::unique_ptr<Layer>>& layers() const { return layers_; }
    std::vector<std::unique_ptr<Layer>>& layers() { return layers_; }

    int in_dim() const { return spec_.widths.front(); }
    int out_dim() const { return spec_.widths.back(); }

    // Versioned binary model file; load(save(net)) reproduces forward
    // outputs bit-exactly.
    void save(const std::string& path) const;
    static Network load(const std::string& path);

private:
    explicit Network(NetworkSpec spec) : spec_(std::move(spec)) {}

    NetworkSpec spec_;
    std::vector<std::unique_ptr<Layer>> layers_;
};

struct LossResult {
    double value;
    Matrix grad;  // same shape as the network output
};

// Mean softmax cross-entropy; grad = (softmax - onehot) / batch.
LossResult cross_entropy(const Matrix& logits, const std::vector<int>& labels);

// Mean squared error over all entries; grad = 2 (pred - target) / (batch * t).
LossResult mse(const Matrix& pred, const Matrix& target);

enum class OptimizerKind { Sgd, Adam };
enum class LossKind { CrossEntropy, Mse };

struct TrainConfig {
    int epochs = 20;
    int batch_size = 64;
    double learning_rate = 1e-3;
    OptimizerKind optimizer = OptimizerKind::Adam;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    std::uint64_t seed = 0;
    LossKind loss = LossKind::CrossEntropy;

    void validate() const;
};

struct EpochRecord {
    int epoch = 0;  // 1-based
    double train_loss = 0.0;
    double val_loss = 0.0;
    double val_accuracy = 0.0;  // in [0, 1]; 0 for regression runs
    double wall_time = 0.0;     // seconds spent in this epoch
};

struct EvalResult {
    double loss = 0.0;
    double accuracy = 0.0;
};

// Mini-batch evaluation of a frozen network.
EvalResult evaluate(Network& net, const Dataset& ds, LossKind loss, int batch_size = 256);

// Mini-batch training with per-epoch deterministic shuffling derived from
// (cfg.seed, epoch). Emits one EpochRecord per epoch through on_epoch as soon
// as the epoch finishes. A NaN/Inf loss aborts with NumericError carrying the
// epoch, batch and max |param|.
std::vector<EpochRecord> train(Network& net, const Dataset& train_ds, const Dataset& val_ds,
                               const TrainConfig& cfg,
                               const std::function<void(const EpochRecord&)>& on_epoch = {});

} // namespace fastkan
