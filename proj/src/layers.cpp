#include "fastkan/layers.hpp"

#include <cmath>
#include <string>

#include "fastkan/errors.hpp"

namespace fastkan {

namespace {

void check_input(const char* kind, const Matrix& x, int expected_cols) {
    if (x.cols() != expected_cols)
        throw ShapeError(std::string(kind) + ": input has " + std::to_string(x.cols()) +
                         " columns, layer expects " + std::to_string(expected_cols));
}

void check_grad(const char* kind, const Matrix& g, int batch, int expected_cols) {
    if (g.cols() != expected_cols)
        throw ShapeError(std::string(kind) + ": grad has " + std::to_string(g.cols()) +
                         " columns, layer produces " + std::to_string(expected_cols));
    if (g.rows() != batch)
        throw StateError(std::string(kind) + ": grad batch " + std::to_string(g.rows()) +
                         " does not match cached forward batch " + std::to_string(batch));
}

} // namespace

KanLayer::KanLayer(int in_dim, int out_dim, std::shared_ptr<const BasisFamily> basis)
    : in_dim_(in_dim),
      out_dim_(out_dim),
      basis_(std::move(basis)),
      weights_t_(in_dim * basis_->count(), out_dim),
      grad_weights_t_(in_dim * basis_->count(), out_dim) {
    if (in_dim < 1 || out_dim < 1)
        throw ConfigError("kan: dimensions must be >= 1");
}

void KanLayer::init_params(Rng& rng) {
    const double s = 1.0 / std::sqrt(static_cast<double>(in_dim_) * basis_->count());
    for (double& w : weights_t_.data()) w = rng.uniform(-s, s);
}

Matrix KanLayer::forward(const Matrix& x) {
    check_input("kan", x, in_dim_);
    const int batch = x.rows();
    const int b = basis_->count();
    const int pb = in_dim_ * b;
    if (!phi_cache_ || phi_cache_->rows() != batch) phi_cache_.emplace(batch, pb);
    Matrix& phi = *phi_cache_;
    for (int r = 0; r < batch; ++r) {
        auto phi_row = phi.row(r);
        for (int p = 0; p < in_dim_; ++p)
            basis_->eval(x(r, p), phi_row.subspan(static_cast<std::size_t>(p) * b,
                                                  static_cast<std::size_t>(b)));
    }
    x_cache_ = x;
    return matmul(phi, weights_t_);
}

Matrix KanLayer::backward(const Matrix& grad_out, bool need_input_grad) {
    if (!x_cache_) throw StateError("kan: backward called before forward");
    const Matrix& x = *x_cache_;
    const Matrix& phi = *phi_cache_;
    check_grad("kan", grad_out, x.rows(), out_dim_);

    grad_weights_t_ = matmul(transpose(phi), grad_out);
    if (!need_input_grad) return Matrix(1, 1);

    const int batch = x.rows();
    const int b = basis_->count();
    const Matrix grad_phi = matmul(grad_out, transpose(weights_t_));
    Matrix grad_in(batch, in_dim_);
    std::vector<double> dphi(static_cast<std::size_t>(b));
    for (int r = 0; r < batch; ++r) {
        auto gp_row = grad_phi.row(r);
        for (int p = 0; p < in_dim_; ++p) {
            basis_->eval_deriv(x(r, p), dphi);
            double acc = 0.0;
            const std::size_t off = static_cast<std::size_t>(p) * b;
            for (int i = 0; i < b; ++i) acc += gp_row[off + static_cast<std::size_t>(i)] * dphi[static_cast<std::size_t>(i)];
            grad_in(r, p) = acc;
        }
    }
    return grad_in;
}

std::vector<ParamRef> KanLayer::params() {
    return {{"weights", std::span<double>(weights_t_.data()),
             std::span<double>(grad_weights_t_.data())}};
}

LayerNorm::LayerNorm(int dim, double epsilon)
    : dim_(dim),
      epsilon_(epsilon),
      gain_(static_cast<std::size_t>(dim), 1.0),
      bias_(static_cast<std::size_t>(dim), 0.0),
      grad_gain_(static_cast<std::size_t>(dim), 0.0),
      grad_bias_(static_cast<std::size_t>(dim), 0.0) {
    if (dim < 1) throw ConfigError("layernorm: dim must be >= 1");
}

Matrix LayerNorm::forward(const Matrix& x) {
    check_input("layernorm", x, dim_);
    const int batch = x.rows();
    if (!xhat_cache_ || xhat_cache_->rows() != batch) xhat_cache_.emplace(batch, dim_);
    inv_std_cache_.assign(static_cast<std::size_t>(batch), 0.0);
    Matrix out(batch, dim_);
    for (int r = 0; r < batch; ++r) {
        auto xr = x.row(r);
        double mean = 0.0;
        for (double v : xr) mean += v;
        mean /= dim_;
        double var = 0.0;
        for (double v : xr) var += (v - mean) * (v - mean);
        var /= dim_;  // biased variance
        const double inv_std = 1.0 / std::sqrt(var + epsilon_);
        inv_std_cache_[static_cast<std::size_t>(r)] = inv_std;
        for (int c = 0; c < dim_; ++c) {
            const double xhat = (xr[static_cast<std::size_t>(c)] - mean) * inv_std;
            (*xhat_cache_)(r, c) = xhat;
            out(r, c) = xhat * gain_[static_cast<std::size_t>(c)] + bias_[static_cast<std::size_t>(c)];
        }
    }
    return out;
}

Matrix LayerNorm::backward(const Matrix& grad_out, bool need_input_grad) {
    if (!xhat_cache_) throw StateError("layernorm: backward called before forward");
    const Matrix& xhat = *xhat_cache_;
    const int batch = xhat.rows();
    check_grad("layernorm", grad_out, batch, dim_);

    grad_gain_.assign(static_cast<std::size_t>(dim_), 0.0);
    grad_bias_.assign(static_cast<std::size_t>(dim_), 0.0);
    for (int r = 0; r < batch; ++r) {
        for (int c = 0; c < dim_; ++c) {
            grad_bias_[static_cast<std::size_t>(c)] += grad_out(r, c);
            grad_gain_[static_cast<std::size_t>(c)] += grad_out(r, c) * xhat(r, c);
        }
    }
    if (!need_input_grad) return Matrix(1, 1);

    Matrix grad_in(batch, dim_);
    std::vector<double> dxhat(static_cast<std::size_t>(dim_));
    for (int r = 0; r < batch; ++r) {
        double s1 = 0.0, s2 = 0.0;
        for (int c = 0; c < dim_; ++c) {
            dxhat[static_cast<std::size_t>(c)] = grad_out(r, c) * gain_[static_cast<std::size_t>(c)];
            s1 += dxhat[static_cast<std::size_t>(c)];
            s2 += dxhat[static_cast<std::size_t>(c)] * xhat(r, c);
        }
        const double inv_std = inv_std_cache_[static_cast<std::size_t>(r)];
        for (int c = 0; c < dim_; ++c)
            grad_in(r, c) = inv_std / dim_ *
                            (dim_ * dxhat[static_cast<std::size_t>(c)] - s1 - xhat(r, c) * s2);
    }
    return grad_in;
}

std::vector<ParamRef> LayerNorm::params() {
    return {{"gain", std::span<double>(gain_), std::span<double>(grad_gain_)},
            {"bias", std::span<double>(bias_), std::span<double>(grad_bias_)}};
}

LinearLayer::LinearLayer(int in_dim, int out_dim)
    : in_dim_(in_dim),
      out_dim_(out_dim),
      weights_t_(in_dim, out_dim),
      bias_(static_cast<std::size_t>(out_dim), 0.0),
      grad_weights_t_(in_dim, out_dim),
      grad_bias_(static_cast<std::size_t>(out_dim), 0.0) {
    if (in_dim < 1 || out_dim < 1)
        throw ConfigError("linear: dimensions must be >= 1");
}

void LinearLayer::init_params(Rng& rng) {
    const double s = 1.0 / std::sqrt(static_cast<double>(in_dim_));
    for (double& w : weights_t_.data()) w = rng.uniform(-s, s);
}

Matrix LinearLayer::forward(const Matrix& x) {
    check_input("linear", x, in_dim_);
    Matrix out = matmul(x, weights_t_);
    for (int r = 0; r < out.rows(); ++r)
        for (int c = 0; c < out_dim_; ++c) out(r, c) += bias_[static_cast<std::size_t>(c)];
    x_cache_ = x;
    return out;
}

Matrix LinearLayer::backward(const Matrix& grad_out, bool need_input_grad) {
    if (!x_cache_) throw StateError("linear: backward called before forward");
    const Matrix& x = *x_cache_;
    check_grad("linear", grad_out, x.rows(), out_dim_);

    grad_weights_t_ = matmul(transpose(x), grad_out);
    grad_bias_.assign(static_cast<std::size_t>(out_dim_), 0.0);
    for (int r = 0; r < grad_out.rows(); ++r)
        for (int c = 0; c < out_dim_; ++c) grad_bias_[static_cast<std::size_t>(c)] += grad_out(r, c);

    if (!need_input_grad) return Matrix(1, 1);
    return matmul(grad_out, transpose(weights_t_));
}

std::vector<ParamRef> LinearLayer::params() {
    return {{"weights", std::span<double>(weights_t_.data()),
             std::span<double>(grad_weights_t_.data())},
            {"bias", std::span<double>(bias_), std::span<double>(grad_bias_)}};
}

} // namespace fastkan
