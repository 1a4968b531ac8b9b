#pragma once

#include <cassert>
#include <initializer_list>
#include <span>
#include <vector>

namespace fastkan {

// Dense row-major matrix of doubles. The one tensor type in the project:
// activations, weights and basis evaluations all live here.
// Shapes are fixed at construction; 0-sized matrices are rejected.
class Matrix {
public:
    Matrix(int rows, int cols);
    Matrix(int rows, int cols, std::vector<double> data);

    static Matrix identity(int n);
    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double operator()(int r, int c) const {
        assert(r >= 0 && r < rows_ && c >= 0 && c < cols_);
        return data_[static_cast<std::size_t>(r) * cols_ + c];
    }
    double& operator()(int r, int c) {
        assert(r >= 0 && r < rows_ && c >= 0 && c < cols_);
        return data_[static_cast<std::size_t>(r) * cols_ + c];
    }

    std::span<const double> row(int r) const {
        assert(r >= 0 && r < rows_);
        return {data_.data() + static_cast<std::size_t>(r) * cols_,
                static_cast<std::size_t>(cols_)};
    }
    std::span<double> row(int r) {
        assert(r >= 0 && r < rows_);
        return {data_.data() + static_cast<std::size_t>(r) * cols_,
                static_cast<std::size_t>(cols_)};
    }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    void fill(double value);

private:
    int rows_;
    int cols_;
    std::vector<double> data_;
};

// Number of worker threads matmul may split rows across. Default 1.
// Any split preserves the per-element summation order, so the product is
// bit-identical for every thread count.
void set_matmul_threads(int n);
int matmul_threads();

// Standard product. The reduction over k runs left-to-right for every output
// element (i-k-j loop order), so results are bit-reproducible across runs.
Matrix matmul(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& a);

struct LstsqResult {
    Matrix solution;  // k x n
    double residual;  // Frobenius norm of a*solution - b
};

// Minimize ||a*W - b||_F via normal equations (a'a) W = a'b with a Cholesky
// solve. Requires a.rows >= a.cols and full column rank; a pivot below
// 1e-12 * max diagonal of a'a raises SingularError.
LstsqResult lstsq(const Matrix& a, const Matrix& b);

double max_abs(const Matrix& a);
double frobenius_norm(const Matrix& a);

} // namespace fastkan
