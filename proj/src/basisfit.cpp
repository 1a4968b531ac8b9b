#include "fastkan/basisfit.hpp"

#include <cmath>
#include <fstream>

#include "fastkan/csv.hpp"
#include "fastkan/errors.hpp"

namespace fastkan {

namespace {

Matrix design_matrix(const BasisFamily& basis, int samples, double lo, double hi) {
    Matrix a(samples, basis.count());
    const double step = (hi - lo) / (samples - 1);
    for (int i = 0; i < samples; ++i) {
        const double x = i + 1 == samples ? hi : lo + i * step;
        basis.eval(x, a.row(i));
    }
    return a;
}

} // namespace

FitReport fit_transform(const BSplineBasis& spline, const GaussianRBFBasis& rbf,
                        int samples, double lo, double hi) {
    const int min_samples = 10 * std::max(spline.count(), rbf.count());
    if (samples < min_samples)
        throw ConfigError("fit_transform: need at least " + std::to_string(min_samples) +
                          " samples, got " + std::to_string(samples));
    if (!(lo < hi)) throw ConfigError("fit_transform: lo must be < hi");

    const Matrix a = design_matrix(rbf, samples, lo, hi);
    const Matrix b = design_matrix(spline, samples, lo, hi);
    LstsqResult ls = lstsq(a, b);

    const Matrix fit = matmul(a, ls.solution);
    double max_err = 0.0;
    double sq = 0.0;
    for (std::size_t i = 0; i < fit.size(); ++i) {
        const double d = std::abs(fit.data()[i] - b.data()[i]);
        max_err = std::max(max_err, d);
        sq += d * d;
    }

    FitReport report;
    report.spline_grid = spline.grid();
    report.rbf_grid = rbf.grid();
    report.bandwidth = rbf.bandwidth();
    report.transform = std::move(ls.solution);
    report.max_abs_error = max_err;
    report.rms_error = std::sqrt(sq / static_cast<double>(fit.size()));
    report.samples = samples;
    report.sample_lo = lo;
    report.sample_hi = hi;
    return report;
}

void emit_fit_curves(const FitReport& report, const BSplineBasis& spline,
                     const GaussianRBFBasis& rbf, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot create " + path);

    const int nb = spline.count();
    std::vector<std::string> header{"x"};
    for (int i = 0; i < nb; ++i) header.push_back("spline_" + std::to_string(i));
    for (int i = 0; i < nb; ++i) header.push_back("approx_" + std::to_string(i));
    out << csv::join_row(header) << "\n";

    const double step = (report.sample_hi - report.sample_lo) / (report.samples - 1);
    std::vector<double> sv(static_cast<std::size_t>(nb));
    std::vector<double> rv(static_cast<std::size_t>(rbf.count()));
    for (int i = 0; i < report.samples; ++i) {
        const double x = i + 1 == report.samples ? report.sample_hi : report.sample_lo + i * step;
        spline.eval(x, sv);
        rbf.eval(x, rv);
        std::vector<std::string> fields{csv::format(x)};
        for (double v : sv) fields.push_back(csv::format(v));
        for (int c = 0; c < nb; ++c) {
            double approx = 0.0;
            for (int j = 0; j < rbf.count(); ++j)
                approx += rv[static_cast<std::size_t>(j)] * report.transform(j, c);
            fields.push_back(csv::format(approx));
        }
        out << csv::join_row(fields) << "\n";
    }
    if (!out) throw IoError("short write to " + path);
}

double max_error_on(const FitReport& report, const BSplineBasis& spline,
                    const GaussianRBFBasis& rbf, int samples, double lo, double hi) {
    const Matrix a = design_matrix(rbf, samples, lo, hi);
    const Matrix b = design_matrix(spline, samples, lo, hi);
    const Matrix fit = matmul(a, report.transform);
    double max_err = 0.0;
    for (std::size_t i = 0; i < fit.size(); ++i)
        max_err = std::max(max_err, std::abs(fit.data()[i] - b.data()[i]));
    return max_err;
}

} // namespace fastkan
