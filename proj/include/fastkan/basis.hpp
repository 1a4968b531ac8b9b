#pragma once

#include <memory>
#include <span>
#include <vector>

namespace fastkan {

// Uniform knot/center layout on a closed interval [lo, hi]. Shared vocabulary
// of both basis families: `count` is the number of knot intervals G for
// B-splines and the number of centers N for Gaussian RBFs.
struct GridSpec {
    double lo = -2.0;
    double hi = 2.0;
    int count = 5;
    int order = 3;  // spline order k; unused by the RBF family

    void validate() const;
};

// A family of univariate basis functions evaluated over a shared grid.
// Implementations are immutable after construction; eval calls are pure and
// safe to run concurrently.
class BasisFamily {
public:
    virtual ~BasisFamily() = default;

    // Number of basis functions B produced per input scalar.
    virtual int count() const = 0;

    // Writes the B basis values at x into out (out.size() == count()).
    virtual void eval(double x, std::span<double> out) const = 0;

    // Writes d/dx of each basis value at x into out.
    virtual void eval_deriv(double x, std::span<double> out) const = 0;

    virtual const char* name() const = 0;

    std::vector<double> eval(double x) const {
        std::vector<double> out(static_cast<std::size_t>(count()));
        eval(x, out);
        return out;
    }
    std::vector<double> eval_deriv(double x) const {
        std::vector<double> out(static_cast<std::size_t>(count()));
        eval_deriv(x, out);
        return out;
    }
};

// Order-k B-spline basis on a uniform grid of G intervals over [lo, hi],
// computed with the deBoor-Cox iteration over the full knot vector. The knot
// vector carries k extra uniform knots beyond each end, giving G + k basis
// functions that partition unity on the interior.
class BSplineBasis final : public BasisFamily {
public:
    explicit BSplineBasis(GridSpec grid);

    int count() const override { return grid_.count + grid_.order; }
    void eval(double x, std::span<double> out) const override;
    void eval_deriv(double x, std::span<double> out) const override;
    const char* name() const override { return "bspline"; }

    const GridSpec& grid() const { return grid_; }
    const std::vector<double>& knots() const { return knots_; }

private:
    GridSpec grid_;
    std::vector<double> knots_;  // G + 2k + 1 strictly increasing values
};

// Gaussian radial basis: entry i is exp(-(x - c_i)^2 / (2 h^2)) for N centers
// c_i uniformly spaced on [lo, hi] inclusive. bandwidth <= 0 selects the
// default h = center spacing.
class GaussianRBFBasis final : public BasisFamily {
public:
    explicit GaussianRBFBasis(GridSpec grid, double bandwidth = 0.0);

    int count() const override { return static_cast<int>(centers_.size()); }
    void eval(double x, std::span<double> out) const override;
    void eval_deriv(double x, std::span<double> out) const override;
    const char* name() const override { return "gaussian_rbf"; }

    const GridSpec& grid() const { return grid_; }
    const std::vector<double>& centers() const { return centers_; }
    double bandwidth() const { return bandwidth_; }

private:
    GridSpec grid_;
    std::vector<double> centers_;
    double bandwidth_;
    double neg_inv_two_h2_;
    double inv_h2_;
};

} // namespace fastkan
