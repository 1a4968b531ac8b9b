#include "fastkan/gradcheck.hpp"

#include <cmath>
#include <functional>

#include "fastkan/rng.hpp"

namespace fastkan {

namespace {

constexpr double kEps = 1e-5;

double rel_err(double analytic, double numeric) {
    return std::abs(analytic - numeric) /
           std::max({1.0, std::abs(analytic), std::abs(numeric)});
}

double dot_sum(const Matrix& a, const Matrix& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a.data()[i] * b.data()[i];
    return s;
}

// Central differences over every parameter and every input entry against the
// analytic gradients already stored alongside.
double fd_max_rel_err(const std::function<double()>& loss, std::vector<ParamRef> params,
                      Matrix& x, const Matrix& input_grad) {
    double worst = 0.0;
    for (auto& p : params) {
        for (std::size_t i = 0; i < p.value.size(); ++i) {
            const double saved = p.value[i];
            p.value[i] = saved + kEps;
            const double up = loss();
            p.value[i] = saved - kEps;
            const double down = loss();
            p.value[i] = saved;
            worst = std::max(worst, rel_err(p.grad[i], (up - down) / (2.0 * kEps)));
        }
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double saved = x.data()[i];
        x.data()[i] = saved + kEps;
        const double up = loss();
        x.data()[i] = saved - kEps;
        const double down = loss();
        x.data()[i] = saved;
        worst = std::max(worst, rel_err(input_grad.data()[i], (up - down) / (2.0 * kEps)));
    }
    return worst;
}

Matrix random_matrix(int rows, int cols, Rng& rng, double lo, double hi) {
    Matrix m(rows, cols);
    for (double& v : m.data()) v = rng.uniform(lo, hi);
    return m;
}

GradCheckCase check_layer(const std::string& name, Layer& layer, int batch, Rng& rng,
                          double tolerance) {
    Matrix x = random_matrix(batch, layer.in_dim(), rng, -1.5, 1.5);
    const Matrix proj = random_matrix(batch, layer.out_dim(), rng, -1.0, 1.0);

    layer.forward(x);
    const Matrix grad_in = layer.backward(proj, true);

    const auto loss = [&] { return dot_sum(layer.forward(x), proj); };
    const double worst = fd_max_rel_err(loss, layer.params(), x, grad_in);
    // Leave the cache consistent with x for any later use.
    layer.forward(x);
    return {name, worst, worst <= tolerance};
}

GradCheckCase check_network(const std::string& name, BasisKind family, Rng& rng,
                            double tolerance, std::uint64_t seed) {
    NetworkSpec spec;
    spec.widths = {2, 3, 2};
    spec.family = family;
    Network net = Network::build(spec, seed);

    Matrix x = random_matrix(3, net.in_dim(), rng, -1.5, 1.5);
    const Matrix proj = random_matrix(3, net.out_dim(), rng, -1.0, 1.0);

    net.forward(x);
    const Matrix grad_in = net.backward(proj, true);

    const auto loss = [&] { return dot_sum(net.forward(x), proj); };
    const double worst = fd_max_rel_err(loss, net.params(), x, grad_in);
    return {name, worst, worst <= tolerance};
}

} // namespace

const GradCheckCase* GradCheckSummary::worst() const {
    const GradCheckCase* w = nullptr;
    for (const auto& c : cases)
        if (!w || c.max_rel_err > w->max_rel_err) w = &c;
    return w;
}

GradCheckSummary run_gradcheck(double tolerance, std::optional<BasisKind> family,
                               std::uint64_t seed) {
    GradCheckSummary summary;
    summary.tolerance = tolerance;
    Rng rng(mix_seed(seed, 0x9cad));

    const bool want_spline = !family || *family == BasisKind::BSpline;
    const bool want_rbf = !family || *family == BasisKind::GaussianRbf;

    if (want_spline) {
        NetworkSpec spec;
        spec.family = BasisKind::BSpline;
        KanLayer layer(3, 2, spec.make_basis());
        layer.init_params(rng);
        summary.cases.push_back(check_layer("kan[spline]", layer, 3, rng, tolerance));
    }
    if (want_rbf) {
        NetworkSpec spec;
        spec.family = BasisKind::GaussianRbf;
        KanLayer layer(3, 2, spec.make_basis());
        layer.init_params(rng);
        summary.cases.push_back(check_layer("kan[rbf]", layer, 3, rng, tolerance));
    }
    {
        LayerNorm ln(4);
        for (double& g : ln.gain()) g = rng.uniform(0.5, 1.5);
        for (double& b : ln.bias()) b = rng.uniform(-0.5, 0.5);
        summary.cases.push_back(check_layer("layernorm", ln, 3, rng, tolerance));
    }
    {
        LinearLayer lin(3, 2);
        lin.init_params(rng);
        for (double& b : lin.bias()) b = rng.uniform(-0.5, 0.5);
        summary.cases.push_back(check_layer("linear", lin, 3, rng, tolerance));
    }
    if (want_spline)
        summary.cases.push_back(
            check_network("network[spline]", BasisKind::BSpline, rng, tolerance, seed));
    if (want_rbf)
        summary.cases.push_back(
            check_network("network[rbf]", BasisKind::GaussianRbf, rng, tolerance, seed));

    summary.all_pass = true;
    for (const auto& c : summary.cases) summary.all_pass &= c.pass;
    return summary;
}

} // namespace fastkan
