#include "ssm/lti.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/LU>
#include <unsupported/Eigen/MatrixFunctions>

#include "eigen_bridge.hpp"
#include "ssm/errors.hpp"

namespace ssm {

namespace {

std::string dims(const Matrix& a) { return std::to_string(a.rows()) + "x" + std::to_string(a.cols()); }

void check_system_shapes(const Matrix& a, const Matrix& b, const Matrix& c, const Matrix& d, const char* who) {
    const std::string w(who);
    if (a.rows() == 0 || !a.is_square()) throw ContractError(w + ": state matrix must be square and non-empty, got " + dims(a));
    const std::size_t m = a.rows();
    if (b.rows() != m || b.cols() == 0) throw ContractError(w + ": input matrix is " + dims(b) + ", expected " + std::to_string(m) + "xp");
    if (c.cols() != m || c.rows() == 0) throw ContractError(w + ": output matrix is " + dims(c) + ", expected qx" + std::to_string(m));
    if (d.rows() != c.rows() || d.cols() != b.cols())
        throw ContractError(w + ": feedthrough is " + dims(d) + ", expected " + std::to_string(c.rows()) + "x" + std::to_string(b.cols()));
}

void check_unit_modulus(complex z) {
    if (std::abs(std::abs(z) - 1.0) > 1e-12)
        throw ContractError("transfer function is evaluated on the unit circle only (|z| = " + std::to_string(std::abs(z)) + ")");
}

}  // namespace

std::string_view to_string(Scheme s) noexcept {
    switch (s) {
        case Scheme::bilinear: return "bilinear";
        case Scheme::exponential: return "exponential";
        case Scheme::none: return "none";
    }
    return "none";
}

Scheme parse_scheme(std::string_view text) {
    if (text == "bilinear") return Scheme::bilinear;
    if (text == "exponential") return Scheme::exponential;
    if (text == "none") return Scheme::none;
    throw ContractError("unknown discretisation scheme '" + std::string(text) + "'");
}

ContinuousLti::ContinuousLti(Matrix a, Matrix b, Matrix c, Matrix d)
    : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)), d_(std::move(d)) {
    check_system_shapes(a_, b_, c_, d_, "ContinuousLti");
}

DiscreteLti::DiscreteLti(Matrix abar, Matrix bbar, Matrix c, Matrix d, double delta, Scheme scheme)
    : abar_(std::move(abar)), bbar_(std::move(bbar)), c_(std::move(c)), d_(std::move(d)), delta_(delta), scheme_(scheme) {
    check_system_shapes(abar_, bbar_, c_, d_, "DiscreteLti");
    if (!(delta_ > 0.0)) throw ContractError("DiscreteLti: step size must be positive");
    spectral_radius_ = spectral_radius_estimate(abar_);
}

Matrix hippo_matrix(std::size_t m) {
    if (m == 0) throw ContractError("hippo_matrix: m must be >= 1");
    Matrix a(m, m);
    for (std::size_t n = 1; n <= m; ++n) {
        const double rn = std::sqrt(2.0 * static_cast<double>(n) + 1.0);
        for (std::size_t k = 1; k < n; ++k) a(n - 1, k - 1) = -(rn * std::sqrt(2.0 * static_cast<double>(k) + 1.0));
        a(n - 1, n - 1) = -(static_cast<double>(n) + 1.0);
    }
    return a;
}

ContinuousLti averaging_siso(Matrix a) {
    const std::size_t m = a.rows();
    return ContinuousLti(std::move(a), Matrix::constant(m, 1, 1.0), Matrix::constant(1, m, 1.0 / static_cast<double>(m)),
                         Matrix(1, 1));
}

DiscreteLti discretize_bilinear(const ContinuousLti& sys, double delta) {
    if (!(delta > 0.0)) throw ContractError("discretize_bilinear: delta must be positive");
    const Matrix eye = Matrix::identity(sys.m());
    const Matrix half = (0.5 * delta) * sys.a();
    const Matrix lhs = eye - half;
    Matrix abar = solve(lhs, eye + half);
    Matrix bbar = delta * solve(lhs, sys.b());
    return DiscreteLti(std::move(abar), std::move(bbar), sys.c(), sys.d(), delta, Scheme::bilinear);
}

DiscreteLti discretize_exponential(const ContinuousLti& sys, double delta) {
    if (!(delta > 0.0)) throw ContractError("discretize_exponential: delta must be positive");
    const auto m = static_cast<Eigen::Index>(sys.m());
    const auto p = static_cast<Eigen::Index>(sys.p());
    if (max_abs(sys.a()) == 0.0)
        return DiscreteLti(Matrix::identity(sys.m()), delta * sys.b(), sys.c(), sys.d(), delta, Scheme::exponential);

    Eigen::MatrixXd e = (delta * detail::view(sys.a())).eval().exp();
    // exp(delta [[A, B], [0, 0]]) = [[exp(delta A), A^{-1}(exp(delta A) - I) B], [0, I]];
    // the upper-right block stays defined when A is singular.
    Eigen::MatrixXd augmented = Eigen::MatrixXd::Zero(m + p, m + p);
    augmented.topLeftCorner(m, m) = delta * detail::view(sys.a());
    augmented.topRightCorner(m, p) = delta * detail::view(sys.b());
    Eigen::MatrixXd ea = augmented.exp();
    if (!e.allFinite() || !ea.allFinite()) throw NumericalError("discretize_exponential: matrix exponential overflowed");
    return DiscreteLti(detail::to_matrix(e), detail::to_matrix(ea.topRightCorner(m, p)), sys.c(), sys.d(), delta,
                       Scheme::exponential);
}

ComplexMatrix transfer_eval(const DiscreteLti& sys, complex z) {
    check_unit_modulus(z);
    const auto m = static_cast<Eigen::Index>(sys.m());
    const complex zinv = 1.0 / z;
    detail::RowMajorXcd resolvent = detail::RowMajorXcd::Identity(m, m) - zinv * detail::view(sys.abar()).cast<complex>();
    Eigen::PartialPivLU<detail::RowMajorXcd> lu(resolvent);
    if (!(lu.rcond() > static_cast<double>(m) * std::numeric_limits<double>::epsilon()))
        throw SingularError("transfer_eval: I - Abar/z is singular at z = (" + std::to_string(z.real()) + ", " +
                            std::to_string(z.imag()) + ")");
    detail::RowMajorXcd x = lu.solve(detail::view(sys.bbar()).cast<complex>());
    detail::RowMajorXcd h = detail::view(sys.c()).cast<complex>() * x + detail::view(sys.d()).cast<complex>();
    if (!h.allFinite()) throw SingularError("transfer_eval: non-finite resolvent solution");
    return detail::to_complex_matrix(h);
}

ComplexMatrix truncated_transfer_eval(const DiscreteLti& sys, complex z, std::span<const Matrix> powers,
                                      std::size_t stages) {
    check_unit_modulus(z);
    if (stages == 0) throw ContractError("truncated_transfer_eval: stages must be >= 1");
    if (powers.size() < stages) throw ContractError("truncated_transfer_eval: fewer precomputed powers than stages");
    detail::RowMajorXcd x = detail::view(sys.bbar()).cast<complex>();
    complex shift = 1.0 / z;  // z^{-2^s}
    for (std::size_t s = 0; s < stages; ++s) {
        if (powers[s].rows() != sys.m()) throw ContractError("truncated_transfer_eval: power has wrong dimension");
        detail::RowMajorXcd applied = detail::view(powers[s]).cast<complex>() * x;
        x += shift * applied;
        shift *= shift;
    }
    detail::RowMajorXcd h = detail::view(sys.c()).cast<complex>() * x + detail::view(sys.d()).cast<complex>();
    return detail::to_complex_matrix(h);
}

ComplexMatrix truncated_transfer_eval(const DiscreteLti& sys, complex z, std::size_t stages) {
    if (stages == 0) throw ContractError("truncated_transfer_eval: stages must be >= 1");
    const auto powers = repeated_squares(sys.abar(), stages);
    return truncated_transfer_eval(sys, z, powers, stages);
}

complex unit_circle_point(std::size_t k, std::size_t grid_points) {
    const double theta = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(grid_points);
    return std::polar(1.0, theta);
}

std::vector<FrequencySample> frequency_response(const DiscreteLti& sys, std::size_t grid_points) {
    if (grid_points == 0) throw ContractError("frequency_response: grid_points must be >= 1");
    std::vector<FrequencySample> out;
    out.reserve(grid_points);
    for (std::size_t k = 0; k < grid_points; ++k) {
        const complex z = unit_circle_point(k, grid_points);
        out.push_back({z, transfer_eval(sys, z)});
    }
    return out;
}

}  // namespace ssm
