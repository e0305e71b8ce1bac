#include "ssm/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "eigen_bridge.hpp"
#include "ssm/errors.hpp"

namespace ssm {

namespace {

std::string shape(const Matrix& a) {
    return std::to_string(a.rows()) + "x" + std::to_string(a.cols());
}

constexpr double kEps = std::numeric_limits<double>::epsilon();

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_)
        throw ContractError("matrix data length " + std::to_string(data_.size()) + " does not match " +
                            std::to_string(rows_) + "x" + std::to_string(cols_));
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) throw ContractError("ragged matrix literal");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix out(n, n);
    for (std::size_t i = 0; i < n; ++i) out(i, i) = 1.0;
    return out;
}

Matrix Matrix::constant(std::size_t rows, std::size_t cols, double value) {
    return Matrix(rows, cols, std::vector<double>(rows * cols, value));
}

Matrix Matrix::diagonal(std::span<const double> diag) {
    Matrix out(diag.size(), diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) out(i, i) = diag[i];
    return out;
}

Matrix Matrix::block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
    if (r0 + nr > rows_ || c0 + nc > cols_) throw ContractError("block out of range for " + shape(*this));
    Matrix out(nr, nc);
    for (std::size_t i = 0; i < nr; ++i)
        std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>((r0 + i) * cols_ + c0), nc, out.row(i).begin());
    return out;
}

std::vector<double> Matrix::diagonal() const {
    std::vector<double> out(std::min(rows_, cols_));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (*this)(i, i);
    return out;
}

bool Matrix::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

bool Vector::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Matrix transpose(const Matrix& a) {
    Matrix out(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
    return out;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ContractError("cannot add " + shape(a) + " and " + shape(b));
    Matrix out = a;
    auto o = out.data();
    auto bd = b.data();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] += bd[i];
    return out;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ContractError("cannot subtract " + shape(b) + " from " + shape(a));
    Matrix out = a;
    auto o = out.data();
    auto bd = b.data();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] -= bd[i];
    return out;
}

Matrix operator*(double alpha, const Matrix& a) {
    Matrix out = a;
    for (double& v : out.data()) v *= alpha;
    return out;
}

Matrix mat_mul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows())
        throw ContractError("mat_mul: inner dimensions differ (" + shape(a) + " * " + shape(b) + ")");
    Matrix out(a.rows(), b.cols());
    // i-k-j order: out(i,j) accumulates over k ascending, same as a dot product.
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto orow = out.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            auto brow = b.row(k);
            for (std::size_t j = 0; j < orow.size(); ++j) orow[j] += aik * brow[j];
        }
    }
    return out;
}

void mat_vec(const Matrix& a, std::span<const double> x, std::span<double> y) {
    if (a.cols() != x.size() || a.rows() != y.size())
        throw ContractError("mat_vec: " + shape(a) + " matrix with vector of length " + std::to_string(x.size()));
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto r = a.row(i);
        double sum = 0.0;
        for (std::size_t j = 0; j < r.size(); ++j) sum += r[j] * x[j];
        y[i] = sum;
    }
}

Vector mat_vec(const Matrix& a, const Vector& x) {
    Vector y(a.rows());
    mat_vec(a, x.data(), y.data());
    return y;
}

std::vector<Matrix> repeated_squares(const Matrix& a, std::size_t count) {
    if (!a.is_square()) throw ContractError("repeated_squares: matrix is " + shape(a) + ", not square");
    if (count == 0) throw ContractError("repeated_squares: count must be >= 1");
    std::vector<Matrix> powers;
    powers.reserve(count);
    powers.push_back(a);
    for (std::size_t k = 1; k < count; ++k) powers.push_back(mat_mul(powers.back(), powers.back()));
    return powers;
}

double spectral_norm(const Matrix& a) {
    if (a.empty()) throw ContractError("spectral_norm: empty matrix");
    if (max_abs(a) == 0.0) return 0.0;
    Eigen::BDCSVD<detail::RowMajorXd> svd(detail::view(a));
    if (svd.info() != Eigen::Success) throw NumericalError("spectral_norm: SVD did not converge");
    return svd.singularValues()(0);
}

double spectral_norm(const ComplexMatrix& a) {
    if (a.data().empty()) throw ContractError("spectral_norm: empty matrix");
    Eigen::BDCSVD<detail::RowMajorXcd> svd(detail::view(a));
    if (svd.info() != Eigen::Success) throw NumericalError("spectral_norm: SVD did not converge");
    return svd.singularValues()(0);
}

TruncatedSvd block_svd(const Matrix& a, double tol) {
    if (!(tol >= 0.0)) throw ContractError("block_svd: tol must be >= 0");
    TruncatedSvd out;
    if (a.empty() || max_abs(a) == 0.0) {
        out.u = Matrix(a.rows(), 0);
        out.v = Matrix(a.cols(), 0);
        return out;
    }
    Eigen::BDCSVD<detail::RowMajorXd> svd(detail::view(a), Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) throw NumericalError("block_svd: SVD did not converge");
    const auto& sv = svd.singularValues();
    out.sigma_max = sv(0);
    const double cut = tol * out.sigma_max;
    std::size_t rank = 0;
    while (rank < static_cast<std::size_t>(sv.size()) && sv(static_cast<Eigen::Index>(rank)) > cut) ++rank;
    const auto r = static_cast<Eigen::Index>(rank);
    out.rank = rank;
    out.u = detail::to_matrix(svd.matrixU().leftCols(r));
    out.v = detail::to_matrix(svd.matrixV().leftCols(r));
    out.s.assign(sv.data(), sv.data() + rank);
    return out;
}

bool is_lower_triangular(const Matrix& a) noexcept {
    if (!a.is_square()) return false;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = i + 1; j < a.cols(); ++j)
            if (a(i, j) != 0.0) return false;
    return true;
}

bool is_upper_triangular(const Matrix& a) noexcept {
    if (!a.is_square()) return false;
    for (std::size_t i = 1; i < a.rows(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (a(i, j) != 0.0) return false;
    return true;
}

namespace {

void check_pivots(const Matrix& a) {
    const double floor = static_cast<double>(a.rows()) * kEps * max_abs(a);
    for (std::size_t i = 0; i < a.rows(); ++i)
        if (!(std::abs(a(i, i)) > floor))
            throw SingularError("solve: triangular matrix has a zero pivot at row " + std::to_string(i));
}

Matrix forward_substitute(const Matrix& a, const Matrix& b) {
    check_pivots(a);
    const std::size_t n = a.rows();
    Matrix x(n, b.cols());
    for (std::size_t c = 0; c < b.cols(); ++c) {
        for (std::size_t i = 0; i < n; ++i) {
            double s = b(i, c);
            for (std::size_t k = 0; k < i; ++k) s -= a(i, k) * x(k, c);
            x(i, c) = s / a(i, i);
        }
    }
    return x;
}

Matrix back_substitute(const Matrix& a, const Matrix& b) {
    check_pivots(a);
    const std::size_t n = a.rows();
    Matrix x(n, b.cols());
    for (std::size_t c = 0; c < b.cols(); ++c) {
        for (std::size_t i = n; i-- > 0;) {
            double s = b(i, c);
            for (std::size_t k = i + 1; k < n; ++k) s -= a(i, k) * x(k, c);
            x(i, c) = s / a(i, i);
        }
    }
    return x;
}

}  // namespace

Matrix solve(const Matrix& a, const Matrix& b) {
    if (!a.is_square()) throw ContractError("solve: matrix is " + shape(a) + ", not square");
    if (a.rows() != b.rows()) throw ContractError("solve: right-hand side is " + shape(b) + " for " + shape(a));
    if (is_lower_triangular(a)) return forward_substitute(a, b);
    if (is_upper_triangular(a)) return back_substitute(a, b);

    Eigen::PartialPivLU<detail::RowMajorXd> lu(detail::view(a));
    if (!(lu.rcond() > static_cast<double>(a.rows()) * kEps))
        throw SingularError("solve: matrix is numerically singular (rcond " + std::to_string(lu.rcond()) + ")");
    Matrix x = detail::to_matrix(lu.solve(detail::view(b)));
    if (!x.all_finite()) throw SingularError("solve: non-finite solution");
    return x;
}

double spectral_radius_estimate(const Matrix& a, std::size_t power_cap) {
    if (!a.is_square()) throw ContractError("spectral_radius_estimate: matrix is " + shape(a));
    if (is_lower_triangular(a) || is_upper_triangular(a)) {
        double r = 0.0;
        for (double d : a.diagonal()) r = std::max(r, std::abs(d));
        return r;
    }
    // Gelfand: rho <= ||a^k||^(1/k). Powers are renormalised each step and the
    // log of the true norm is carried separately to avoid under/overflow.
    double norm = spectral_norm(a);
    if (norm == 0.0) return 0.0;
    double log_norm = std::log(norm);
    double best = norm;
    Matrix q = (1.0 / norm) * a;
    double exponent = 1.0;
    for (std::size_t k = 1; k < power_cap; ++k) {
        q = mat_mul(q, q);
        exponent *= 2.0;
        const double n = spectral_norm(q);
        if (n == 0.0) return 0.0;
        log_norm = 2.0 * log_norm + std::log(n);
        best = std::min(best, std::exp(log_norm / exponent));
        q = (1.0 / n) * q;
    }
    return best;
}

double max_abs(const Matrix& a) noexcept {
    double m = 0.0;
    for (double v : a.data()) m = std::max(m, std::abs(v));
    return m;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ContractError("max_abs_diff: " + shape(a) + " vs " + shape(b));
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

double frobenius_norm(const Matrix& a) noexcept { return norm2(a.data()); }

double norm2(std::span<const double> x) noexcept {
    double scale = 0.0;
    for (double v : x) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) return 0.0;
    double s = 0.0;
    for (double v : x) {
        const double t = v / scale;
        s += t * t;
    }
    return scale * std::sqrt(s);
}

}  // namespace ssm
