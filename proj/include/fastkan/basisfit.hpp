#pragma once

#include <string>

#include "fastkan/basis.hpp"
#include "fastkan/matrix.hpp"

namespace fastkan {

// Result of least-squares-aligning Gaussian RBFs to a B-spline basis: one
// transform column per spline basis function, plus residual statistics over
// the sample grid.
struct FitReport {
    GridSpec spline_grid;
    GridSpec rbf_grid;
    double bandwidth = 0.0;
    Matrix transform;  // N x (G+k): maps RBF values to each spline basis
    double max_abs_error = 0.0;
    double rms_error = 0.0;
    int samples = 0;
    double sample_lo = 0.0;
    double sample_hi = 0.0;

    FitReport() : transform(1, 1) {}
};

// Evaluates both bases at `samples` uniform points on [lo, hi] (endpoints
// included), solves lstsq(rbf_values, spline_values) for the transform and
// reports max-abs / RMS residual over the sample grid.
// Requires samples >= 10 * max(basis counts).
FitReport fit_transform(const BSplineBasis& spline, const GaussianRBFBasis& rbf,
                        int samples, double lo, double hi);

// CSV with columns x, spline_0..spline_{B-1}, approx_0..approx_{B-1}; one row
// per sample point, enough to re-plot the aligned bases externally.
void emit_fit_curves(const FitReport& report, const BSplineBasis& spline,
                     const GaussianRBFBasis& rbf, const std::string& path);

// Max |approx - spline| of a fitted transform over `samples` uniform points
// on [lo, hi]; used to measure interior error separately from the fit range.
double max_error_on(const FitReport& report, const BSplineBasis& spline,
                    const GaussianRBFBasis& rbf, int samples, double lo, double hi);

} // namespace fastkan
