#include "ssm/oracles.hpp"

#include <algorithm>
#include <string>

#include "ssm/errors.hpp"

namespace ssm {

namespace {

// y += a x
void add_mat_vec(const Matrix& a, std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto r = a.row(i);
        double sum = 0.0;
        for (std::size_t j = 0; j < r.size(); ++j) sum += r[j] * x[j];
        y[i] += sum;
    }
}

}  // namespace

SignalBlock recurrence_apply(const DiscreteLti& sys, const SignalBlock& input) {
    if (input.dim() != sys.p())
        throw ContractError("recurrence_apply: input has " + std::to_string(input.dim()) + " channels, system expects " +
                            std::to_string(sys.p()));
    const std::size_t m = sys.m();
    SignalBlock out(sys.q(), input.length());
    std::vector<double> x(m, 0.0), next(m);
    for (std::size_t n = 0; n < input.length(); ++n) {
        auto u = input.column(n);
        mat_vec(sys.abar(), x, next);
        add_mat_vec(sys.bbar(), u, next);
        x.swap(next);
        auto y = out.column(n);
        mat_vec(sys.c(), x, y);
        add_mat_vec(sys.d(), u, y);
    }
    return out;
}

Kernel kernel_materialize(const DiscreteLti& sys, std::size_t length) {
    if (length == 0) throw ContractError("kernel_materialize: length must be >= 1");
    Kernel k;
    k.feedthrough = sys.d();
    k.taps.reserve(length);
    Matrix state = sys.bbar();
    for (std::size_t i = 0; i < length; ++i) {
        k.taps.push_back(mat_mul(sys.c(), state));
        if (i + 1 < length) state = mat_mul(sys.abar(), state);
    }
    return k;
}

SignalBlock conv_apply(const Kernel& kernel, const SignalBlock& input) {
    if (kernel.taps.empty()) throw ContractError("conv_apply: empty kernel");
    const Matrix& d = kernel.feedthrough;
    if (input.dim() != d.cols())
        throw ContractError("conv_apply: input has " + std::to_string(input.dim()) + " channels, kernel expects " +
                            std::to_string(d.cols()));
    SignalBlock out(d.rows(), input.length());
    for (std::size_t l = 0; l < input.length(); ++l) {
        auto y = out.column(l);
        const std::size_t last = std::min(l, kernel.length() - 1);
        for (std::size_t k = 0; k <= last; ++k) add_mat_vec(kernel.taps[k], input.column(l - k), y);
        add_mat_vec(d, input.column(l), y);
    }
    return out;
}

}  // namespace ssm
