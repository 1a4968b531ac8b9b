#include "fastkan/matrix.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>
#include <thread>

#include "fastkan/errors.hpp"

namespace fastkan {

namespace {

std::string shape_str(int r, int c) {
    return std::to_string(r) + "x" + std::to_string(c);
}

std::atomic<int> g_matmul_threads{1};

} // namespace

Matrix::Matrix(int rows, int cols) : rows_(rows), cols_(cols) {
    if (rows < 1 || cols < 1)
        throw ShapeError("matrix: invalid shape " + shape_str(rows, cols));
    data_.assign(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), 0.0);
}

Matrix::Matrix(int rows, int cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (rows < 1 || cols < 1)
        throw ShapeError("matrix: invalid shape " + shape_str(rows, cols));
    if (data_.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols))
        throw ShapeError("matrix: data length " + std::to_string(data_.size()) +
                         " does not match shape " + shape_str(rows, cols));
}

Matrix Matrix::identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const int r = static_cast<int>(rows.size());
    if (r == 0) throw ShapeError("matrix: empty row list");
    const int c = static_cast<int>(rows.begin()->size());
    Matrix m(r, c);
    int i = 0;
    for (const auto& row : rows) {
        if (static_cast<int>(row.size()) != c)
            throw ShapeError("matrix: ragged row list");
        int j = 0;
        for (double v : row) m(i, j++) = v;
        ++i;
    }
    return m;
}

void Matrix::fill(double value) {
    std::fill(data_.begin(), data_.end(), value);
}

void set_matmul_threads(int n) {
    g_matmul_threads.store(n < 1 ? 1 : n);
}

int matmul_threads() {
    return g_matmul_threads.load();
}

namespace {

// out rows [r0, r1) of a*b. i-k-j order: for each output element the k
// reduction runs strictly left-to-right, independent of row partitioning.
void matmul_rows(const Matrix& a, const Matrix& b, Matrix& out, int r0, int r1) {
    const int k_dim = a.cols();
    const int n = b.cols();
    const double* bd = b.data().data();
    for (int i = r0; i < r1; ++i) {
        double* out_row = out.row(i).data();
        const double* a_row = a.row(i).data();
        for (int k = 0; k < k_dim; ++k) {
            const double aik = a_row[k];
            const double* b_row = bd + static_cast<std::size_t>(k) * n;
            for (int j = 0; j < n; ++j) out_row[j] += aik * b_row[j];
        }
    }
}

} // namespace

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows())
        throw ShapeError("matmul: a is " + shape_str(a.rows(), a.cols()) +
                         ", b is " + shape_str(b.rows(), b.cols()));
    Matrix out(a.rows(), b.cols());
    const int threads = matmul_threads();
    const std::size_t work = a.size() * static_cast<std::size_t>(b.cols());
    if (threads > 1 && a.rows() >= 2 * threads && work >= (1u << 20)) {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        const int chunk = (a.rows() + threads - 1) / threads;
        for (int t = 0; t < threads; ++t) {
            const int r0 = t * chunk;
            const int r1 = std::min(a.rows(), r0 + chunk);
            if (r0 >= r1) break;
            pool.emplace_back(matmul_rows, std::cref(a), std::cref(b), std::ref(out), r0, r1);
        }
        for (auto& th : pool) th.join();
    } else {
        matmul_rows(a, b, out, 0, a.rows());
    }
    return out;
}

Matrix transpose(const Matrix& a) {
    Matrix out(a.cols(), a.rows());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
    return out;
}

LstsqResult lstsq(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows())
        throw ShapeError("lstsq: a is " + shape_str(a.rows(), a.cols()) +
                         ", b is " + shape_str(b.rows(), b.cols()));
    if (a.rows() < a.cols())
        throw ShapeError("lstsq: underdetermined system, a is " +
                         shape_str(a.rows(), a.cols()));

    const Matrix at = transpose(a);
    Matrix ata = matmul(at, a);  // k x k, symmetric positive definite if full rank
    const Matrix atb = matmul(at, b);
    const int k = ata.rows();

    double max_diag = 0.0;
    for (int i = 0; i < k; ++i) max_diag = std::max(max_diag, ata(i, i));
    const double pivot_floor = 1e-12 * max_diag;

    // In-place lower Cholesky: ata = L L'.
    for (int j = 0; j < k; ++j) {
        double d = ata(j, j);
        for (int p = 0; p < j; ++p) d -= ata(j, p) * ata(j, p);
        if (!(d > pivot_floor))
            throw SingularError("lstsq: rank-deficient normal equations, pivot " +
                                std::to_string(d) + " at column " + std::to_string(j));
        const double ljj = std::sqrt(d);
        ata(j, j) = ljj;
        for (int i = j + 1; i < k; ++i) {
            double s = ata(i, j);
            for (int p = 0; p < j; ++p) s -= ata(i, p) * ata(j, p);
            ata(i, j) = s / ljj;
        }
    }

    // Solve L y = atb, then L' w = y, column by column.
    Matrix w(k, atb.cols());
    for (int c = 0; c < atb.cols(); ++c) {
        for (int i = 0; i < k; ++i) {
            double s = atb(i, c);
            for (int p = 0; p < i; ++p) s -= ata(i, p) * w(p, c);
            w(i, c) = s / ata(i, i);
        }
        for (int i = k - 1; i >= 0; --i) {
            double s = w(i, c);
            for (int p = i + 1; p < k; ++p) s -= ata(p, i) * w(p, c);
            w(i, c) = s / ata(i, i);
        }
    }

    const Matrix fit = matmul(a, w);
    double sq = 0.0;
    for (std::size_t i = 0; i < fit.size(); ++i) {
        const double d = fit.data()[i] - b.data()[i];
        sq += d * d;
    }
    return {std::move(w), std::sqrt(sq)};
}

double max_abs(const Matrix& a) {
    double m = 0.0;
    for (double v : a.data()) m = std::max(m, std::abs(v));
    return m;
}

double frobenius_norm(const Matrix& a) {
    double sq = 0.0;
    for (double v : a.data()) sq += v * v;
    return std::sqrt(sq);
}

} // namespace fastkan
