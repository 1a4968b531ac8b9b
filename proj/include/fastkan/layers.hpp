#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fastkan/basis.hpp"
#include "fastkan/matrix.hpp"
#include "fastkan/rng.hpp"

namespace fastkan {

// One named parameter tensor with its freshly computed gradient. Gradients
// are overwritten on every backward call; accumulation belongs to the
// optimizer.
struct ParamRef {
    std::string name;
    std::span<double> value;
    std::span<double> grad;
};

// Forward/backward building block. A layer instance is single-writer:
// forward and backward share the activation cache, so they must not run
// concurrently on the same instance.
class Layer {
public:
    virtual ~Layer() = default;

    virtual int in_dim() const = 0;
    virtual int out_dim() const = 0;
    virtual const char* kind() const = 0;

    virtual Matrix forward(const Matrix& x) = 0;

    // grad_out is [batch x out_dim] for the batch of the preceding forward.
    // Returns grad wrt the input; pass need_input_grad = false to skip that
    // work (e.g. for the first layer of a network), in which case the return
    // value is a 1x1 placeholder.
    virtual Matrix backward(const Matrix& grad_out, bool need_input_grad = true) = 0;

    virtual std::vector<ParamRef> params() = 0;
};

// KAN layer: each input scalar expands into B basis values, the concatenated
// [batch x P*B] expansion goes through one linear map to Q outputs. Covers
// both the spline variant and the Gaussian-RBF variant depending on the
// basis family passed in.
class KanLayer final : public Layer {
public:
    KanLayer(int in_dim, int out_dim, std::shared_ptr<const BasisFamily> basis);

    int in_dim() const override { return in_dim_; }
    int out_dim() const override { return out_dim_; }
    const char* kind() const override { return "kan"; }
    int basis_count() const { return basis_->count(); }
    const BasisFamily& basis() const { return *basis_; }

    // Uniform init in [-s, s] with s = 1/sqrt(P*B).
    void init_params(Rng& rng);

    Matrix forward(const Matrix& x) override;
    Matrix backward(const Matrix& grad_out, bool need_input_grad = true) override;
    std::vector<ParamRef> params() override;

    // Weights are stored transposed, [P*B x Q], so the forward pass is one
    // row-major matmul with no transpose copies.
    Matrix& weights_t() { return weights_t_; }
    const Matrix& weights_t() const { return weights_t_; }

private:
    int in_dim_;
    int out_dim_;
    std::shared_ptr<const BasisFamily> basis_;
    Matrix weights_t_;
    Matrix grad_weights_t_;
    std::optional<Matrix> x_cache_;
    std::optional<Matrix> phi_cache_;
};

// Per-row standardization with learnable gain/bias. Keeps activations inside
// the basis grid domain.
class LayerNorm final : public Layer {
public:
    explicit LayerNorm(int dim, double epsilon = 1e-5);

    int in_dim() const override { return dim_; }
    int out_dim() const override { return dim_; }
    const char* kind() const override { return "layernorm"; }
    double epsilon() const { return epsilon_; }

    Matrix forward(const Matrix& x) override;
    Matrix backward(const Matrix& grad_out, bool need_input_grad = true) override;
    std::vector<ParamRef> params() override;

    std::vector<double>& gain() { return gain_; }
    std::vector<double>& bias() { return bias_; }

private:
    int dim_;
    double epsilon_;
    std::vector<double> gain_;
    std::vector<double> bias_;
    std::vector<double> grad_gain_;
    std::vector<double> grad_bias_;
    std::optional<Matrix> xhat_cache_;
    std::vector<double> inv_std_cache_;
};

// Plain affine map y = x W' + b.
class LinearLayer final : public Layer {
public:
    LinearLayer(int in_dim, int out_dim);

    int in_dim() const override { return in_dim_; }
    int out_dim() const override { return out_dim_; }
    const char* kind() const override { return "linear"; }

    void init_params(Rng& rng);

    Matrix forward(const Matrix& x) override;
    Matrix backward(const Matrix& grad_out, bool need_input_grad = true) override;
    std::vector<ParamRef> params() override;

    Matrix& weights_t() { return weights_t_; }
    std::vector<double>& bias() { return bias_; }

private:
    int in_dim_;
    int out_dim_;
    Matrix weights_t_;  // [in x out]
    std::vector<double> bias_;
    Matrix grad_weights_t_;
    std::vector<double> grad_bias_;
    std::optional<Matrix> x_cache_;
};

} // namespace fastkan
