#pragma once
//
// Dense binary64 matrices and vectors plus the kernels the rest of the
// library is built on.
//
// All products here use a fixed accumulation order: entry (i,j) of a
// product is summed over the inner index in increasing order starting
// from zero. Every kernel in the library that computes a dense
// matrix-vector product follows the same order, so results from the
// public mat_vec, the cascade stage kernel and the oracles can be
// compared bitwise.
//

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace ssm {

class Vector;

// Row-major dense matrix. System matrices always have rows, cols >= 1;
// empty shapes (e.g. rank-0 low-rank factors) are representable.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols);
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(std::size_t n);
    static Matrix constant(std::size_t rows, std::size_t cols, double value);
    static Matrix diagonal(std::span<const double> diag);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }
    bool is_square() const noexcept { return rows_ == cols_; }

    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }
    double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }

    std::span<const double> row(std::size_t i) const noexcept { return {data_.data() + i * cols_, cols_}; }
    std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }

    std::span<const double> data() const noexcept { return data_; }
    std::span<double> data() noexcept { return data_; }

    // Copy of the sub-block [r0, r0+nr) x [c0, c0+nc).
    Matrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const;
    std::vector<double> diagonal() const;

    bool all_finite() const noexcept;

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

class Vector {
public:
    Vector() = default;
    explicit Vector(std::size_t dim) : data_(dim, 0.0) {}
    explicit Vector(std::vector<double> data) : data_(std::move(data)) {}
    Vector(std::initializer_list<double> values) : data_(values) {}

    std::size_t dim() const noexcept { return data_.size(); }

    double operator[](std::size_t i) const noexcept { return data_[i]; }
    double& operator[](std::size_t i) noexcept { return data_[i]; }

    std::span<const double> data() const noexcept { return data_; }
    std::span<double> data() noexcept { return data_; }

    bool all_finite() const noexcept;

    bool operator==(const Vector&) const = default;

private:
    std::vector<double> data_;
};

using complex = std::complex<double>;

// Small row-major complex matrix; used for transfer-function values.
class ComplexMatrix {
public:
    ComplexMatrix() = default;
    ComplexMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    complex operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }
    complex& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }

    std::span<const complex> data() const noexcept { return data_; }
    std::span<complex> data() noexcept { return data_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<complex> data_;
};

Matrix transpose(const Matrix& a);
Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(double alpha, const Matrix& a);

Matrix mat_mul(const Matrix& a, const Matrix& b);

Vector mat_vec(const Matrix& a, const Vector& x);

// y = a x on raw storage; y must not alias x.
void mat_vec(const Matrix& a, std::span<const double> x, std::span<double> y);

// [a, a^2, a^4, ..., a^(2^(count-1))] by successive squaring.
std::vector<Matrix> repeated_squares(const Matrix& a, std::size_t count);

// Largest singular value. Throws NumericalError if the SVD does not converge.
double spectral_norm(const Matrix& a);
double spectral_norm(const ComplexMatrix& a);

struct TruncatedSvd {
    Matrix u;                  // rows x rank
    std::vector<double> s;     // rank singular values, descending
    Matrix v;                  // cols x rank
    std::size_t rank = 0;
    double sigma_max = 0.0;    // largest singular value before truncation
};

// Keeps singular values > tol * sigma_max, so that
// ||a - u diag(s) v^T||_2 <= tol * sigma_max.
TruncatedSvd block_svd(const Matrix& a, double tol);

// Solves a x = b. Lower/upper triangular a is solved by substitution,
// anything else by LU with partial pivoting. No inverse is formed.
Matrix solve(const Matrix& a, const Matrix& b);

bool is_lower_triangular(const Matrix& a) noexcept;
bool is_upper_triangular(const Matrix& a) noexcept;

// Upper estimate of the spectral radius. Exact (max |a_ii|) for triangular
// input; otherwise min over k of ||a^(2^k)||_2^(1/2^k), k < power_cap.
double spectral_radius_estimate(const Matrix& a, std::size_t power_cap = 24);

double max_abs(const Matrix& a) noexcept;
double max_abs_diff(const Matrix& a, const Matrix& b);
double frobenius_norm(const Matrix& a) noexcept;
double norm2(std::span<const double> x) noexcept;

}  // namespace ssm
