#include "fastkan/basis.hpp"

#include <cmath>
#include <string>

#include "fastkan/errors.hpp"

namespace fastkan {

void GridSpec::validate() const {
    if (!(lo < hi))
        throw ConfigError("grid: lo (" + std::to_string(lo) + ") must be < hi (" +
                          std::to_string(hi) + ")");
    if (count < 1) throw ConfigError("grid: count must be >= 1");
    if (order < 1) throw ConfigError("grid: order must be >= 1");
}

BSplineBasis::BSplineBasis(GridSpec grid) : grid_(grid) {
    grid_.validate();
    const int g = grid_.count;
    const int k = grid_.order;
    const double h = (grid_.hi - grid_.lo) / g;
    knots_.resize(static_cast<std::size_t>(g + 2 * k + 1));
    for (int i = 0; i <= g + 2 * k; ++i)
        knots_[static_cast<std::size_t>(i)] = grid_.lo + (i - k) * h;
    // Pin the domain endpoints so knots[k] == lo and knots[k+G] == hi hold
    // exactly in floating point.
    knots_[static_cast<std::size_t>(k)] = grid_.lo;
    knots_[static_cast<std::size_t>(k + g)] = grid_.hi;
}

namespace {

constexpr int kStackWork = 160;

// deBoor-Cox iteration over the full knot vector: order-0 indicators, then
// p sweeps of the two-term recurrence. Terms with zero denominator count as 0.
// At x == hi the order-0 indicator switches to (t_i, t_{i+1}] so the basis
// takes its left-limit value and partition of unity holds on the closed
// interval.
void deboor_cox(const std::vector<double>& t, double hi, int up_to_order, double x,
                double* w, int m) {
    if (x == hi) {
        for (int i = 0; i < m; ++i) w[i] = (t[i] < x && x <= t[i + 1]) ? 1.0 : 0.0;
    } else {
        for (int i = 0; i < m; ++i) w[i] = (t[i] <= x && x < t[i + 1]) ? 1.0 : 0.0;
    }
    for (int p = 1; p <= up_to_order; ++p) {
        for (int i = 0; i + p < m; ++i) {
            const double d1 = t[i + p] - t[i];
            const double d2 = t[i + p + 1] - t[i + 1];
            double acc = 0.0;
            if (d1 > 0.0) acc += (x - t[i]) / d1 * w[i];
            if (d2 > 0.0) acc += (t[i + p + 1] - x) / d2 * w[i + 1];
            w[i] = acc;
        }
    }
}

} // namespace

void BSplineBasis::eval(double x, std::span<double> out) const {
    const int k = grid_.order;
    const int m = grid_.count + 2 * k;  // order-0 entries
    double stack[kStackWork];
    std::vector<double> heap;
    double* w = stack;
    if (m > kStackWork) {
        heap.resize(static_cast<std::size_t>(m));
        w = heap.data();
    }
    deboor_cox(knots_, grid_.hi, k, x, w, m);
    for (int i = 0; i < count(); ++i) out[static_cast<std::size_t>(i)] = w[i];
}

void BSplineBasis::eval_deriv(double x, std::span<double> out) const {
    const int k = grid_.order;
    const int m = grid_.count + 2 * k;
    double stack[kStackWork];
    std::vector<double> heap;
    double* w = stack;
    if (m > kStackWork) {
        heap.resize(static_cast<std::size_t>(m));
        w = heap.data();
    }
    // B'_{i,k} = k * (B_{i,k-1}/(t_{i+k}-t_i) - B_{i+1,k-1}/(t_{i+k+1}-t_{i+1}))
    deboor_cox(knots_, grid_.hi, k - 1, x, w, m);
    for (int i = 0; i < count(); ++i) {
        const double d1 = knots_[static_cast<std::size_t>(i + k)] - knots_[static_cast<std::size_t>(i)];
        const double d2 = knots_[static_cast<std::size_t>(i + k + 1)] - knots_[static_cast<std::size_t>(i + 1)];
        double acc = 0.0;
        if (d1 > 0.0) acc += w[i] / d1;
        if (d2 > 0.0) acc -= w[i + 1] / d2;
        out[static_cast<std::size_t>(i)] = k * acc;
    }
}

GaussianRBFBasis::GaussianRBFBasis(GridSpec grid, double bandwidth) : grid_(grid) {
    grid_.order = 1;  // not meaningful for this family
    grid_.validate();
    const int n = grid_.count;
    if (n < 2)
        throw ConfigError("rbf: need at least 2 centers to span [lo, hi], got " +
                          std::to_string(n));
    const double spacing = (grid_.hi - grid_.lo) / (n - 1);
    centers_.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) centers_[static_cast<std::size_t>(i)] = grid_.lo + i * spacing;
    centers_.front() = grid_.lo;
    centers_.back() = grid_.hi;
    bandwidth_ = bandwidth > 0.0 ? bandwidth : spacing;
    if (!(bandwidth_ > 0.0)) throw ConfigError("rbf: bandwidth must be > 0");
    neg_inv_two_h2_ = -1.0 / (2.0 * bandwidth_ * bandwidth_);
    inv_h2_ = 1.0 / (bandwidth_ * bandwidth_);
}

void GaussianRBFBasis::eval(double x, std::span<double> out) const {
    const std::size_t n = centers_.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double d = x - centers_[i];
        out[i] = std::exp(d * d * neg_inv_two_h2_);
    }
}

void GaussianRBFBasis::eval_deriv(double x, std::span<double> out) const {
    const std::size_t n = centers_.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double d = x - centers_[i];
        out[i] = -d * inv_h2_ * std::exp(d * d * neg_inv_two_h2_);
    }
}

} // namespace fastkan
