#pragma once
//
// Linear time-invariant state-space models
//
//     x'(t) = A x(t) + B u(t),   y(t) = C x(t) + D u(t)
//
// their discretisations
//
//     x_n = Abar x_{n-1} + Bbar u_n,   y_n = C x_n + D u_n
//
// and evaluation of the discrete transfer function
//
//     H(z) = C (I - z^{-1} Abar)^{-1} Bbar + D
//
// together with its truncated cascade form, in which the resolvent is
// replaced by prod_{s<S} (I + (z^{-1} Abar)^(2^s)).
//

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "ssm/matrix.hpp"

namespace ssm {

enum class Scheme {
    bilinear,     // trapezoidal rule
    exponential,  // exp(delta A), zero-order hold input
    none,         // matrices supplied directly
};

std::string_view to_string(Scheme s) noexcept;
Scheme parse_scheme(std::string_view text);

class ContinuousLti {
public:
    ContinuousLti(Matrix a, Matrix b, Matrix c, Matrix d);

    const Matrix& a() const noexcept { return a_; }
    const Matrix& b() const noexcept { return b_; }
    const Matrix& c() const noexcept { return c_; }
    const Matrix& d() const noexcept { return d_; }

    std::size_t m() const noexcept { return a_.rows(); }
    std::size_t p() const noexcept { return b_.cols(); }
    std::size_t q() const noexcept { return c_.rows(); }

private:
    Matrix a_, b_, c_, d_;
};

class DiscreteLti {
public:
    // Validates dimensions and delta > 0 and records a spectral-radius
    // estimate of abar (see spectral_radius_estimate).
    DiscreteLti(Matrix abar, Matrix bbar, Matrix c, Matrix d, double delta = 1.0, Scheme scheme = Scheme::none);

    const Matrix& abar() const noexcept { return abar_; }
    const Matrix& bbar() const noexcept { return bbar_; }
    const Matrix& c() const noexcept { return c_; }
    const Matrix& d() const noexcept { return d_; }
    double delta() const noexcept { return delta_; }
    Scheme scheme() const noexcept { return scheme_; }

    std::size_t m() const noexcept { return abar_.rows(); }
    std::size_t p() const noexcept { return bbar_.cols(); }
    std::size_t q() const noexcept { return c_.rows(); }

    double spectral_radius() const noexcept { return spectral_radius_; }
    bool stable() const noexcept { return spectral_radius_ < 1.0; }

private:
    Matrix abar_, bbar_, c_, d_;
    double delta_;
    Scheme scheme_;
    double spectral_radius_;
};

struct FrequencySample {
    complex z;
    ComplexMatrix h;  // q x p
};

// HiPPO state matrix with 1-based indices n, k:
//   A[n,k] = -sqrt(2n+1) sqrt(2k+1)  (n > k),  -(n+1)  (n = k),  0  (n < k).
Matrix hippo_matrix(std::size_t m);

// Single-input single-output wrapper around a state matrix:
// B = ones(m,1), C = ones(1,m)/m, D = 0.
ContinuousLti averaging_siso(Matrix a);

DiscreteLti discretize_bilinear(const ContinuousLti& sys, double delta);

// Abar = exp(delta A) (scaling and squaring with Pade kernel),
// Bbar = A^{-1} (exp(delta A) - I) B (zero-order hold), read off the exponential
// of the augmented matrix delta [[A, B], [0, 0]] so that singular A is handled
// as the limit, e.g. A = 0 gives Bbar = delta B.
DiscreteLti discretize_exponential(const ContinuousLti& sys, double delta);

// |z| must be 1 to within 1e-12.
ComplexMatrix transfer_eval(const DiscreteLti& sys, complex z);

// Uses powers[0..stages) = Abar^(2^s); powers.size() must be >= stages.
ComplexMatrix truncated_transfer_eval(const DiscreteLti& sys, complex z, std::span<const Matrix> powers,
                                      std::size_t stages);
ComplexMatrix truncated_transfer_eval(const DiscreteLti& sys, complex z, std::size_t stages);

// H at z_k = exp(2 pi i k / grid_points), k = 0..grid_points-1.
std::vector<FrequencySample> frequency_response(const DiscreteLti& sys, std::size_t grid_points);

// z_k = exp(2 pi i k / K).
complex unit_circle_point(std::size_t k, std::size_t grid_points);

}  // namespace ssm
