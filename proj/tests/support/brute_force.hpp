#pragma once
// Test-only reference computations. Nothing here goes through the cascade,
// repeated_squares or the oracles module.

#include <algorithm>
#include <cmath>
#include <vector>

#include "ssm/lti.hpp"
#include "ssm/matrix.hpp"
#include "ssm/signal.hpp"

namespace ssm::testing {

// a^k by k-1 successive multiplications by a.
inline Matrix naive_power(const Matrix& a, std::size_t k) {
    Matrix out = Matrix::identity(a.rows());
    for (std::size_t i = 0; i < k; ++i) out = mat_mul(out, a);
    return out;
}

// y_l = sum_{k = max(0, l - window + 1)}^{l} C Abar^(l-k) Bbar u_k + D u_l
// with every power Abar^j formed densely by naive multiplication.
inline SignalBlock truncated_convolution(const DiscreteLti& sys, const SignalBlock& u, std::size_t window) {
    const std::size_t length = u.length();
    const std::size_t taps = std::min(window, length);
    std::vector<Matrix> h;
    Matrix power = Matrix::identity(sys.m());
    for (std::size_t j = 0; j < taps; ++j) {
        h.push_back(mat_mul(mat_mul(sys.c(), power), sys.bbar()));
        power = mat_mul(power, sys.abar());
    }
    SignalBlock y(sys.q(), length);
    for (std::size_t l = 0; l < length; ++l) {
        for (std::size_t i = 0; i < sys.q(); ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < taps && j <= l; ++j)
                for (std::size_t c = 0; c < sys.p(); ++c) s += h[j](i, c) * u(c, l - j);
            for (std::size_t c = 0; c < sys.p(); ++c) s += sys.d()(i, c) * u(c, l);
            y(i, l) = s;
        }
    }
    return y;
}

inline SignalBlock combine(double alpha, const SignalBlock& a, double beta, const SignalBlock& b) {
    SignalBlock out(a.dim(), a.length());
    for (std::size_t i = 0; i < out.data().size(); ++i) out.data()[i] = alpha * a.data()[i] + beta * b.data()[i];
    return out;
}

inline double max_abs_entry(const SignalBlock& s) {
    double m = 0.0;
    for (double v : s.data()) m = std::max(m, std::abs(v));
    return m;
}

inline DiscreteLti scalar_system(double a, double b, double c, double d) {
    return DiscreteLti(Matrix{{a}}, Matrix{{b}}, Matrix{{c}}, Matrix{{d}});
}

}  // namespace ssm::testing
