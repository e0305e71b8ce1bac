#pragma once
//
// Reference implementations of the discrete system map: the sequential
// recurrence and the direct convolution with the materialised impulse
// response h_k = C Abar^k Bbar. Both are exact to binary64 rounding and
// serve as baselines for the cascade.
//

#include <cstddef>
#include <vector>

#include "ssm/lti.hpp"
#include "ssm/signal.hpp"

namespace ssm {

struct Kernel {
    std::vector<Matrix> taps;  // q x p each
    Matrix feedthrough;        // D

    std::size_t length() const noexcept { return taps.size(); }
};

// x_n = Abar x_{n-1} + Bbar u_n (x_{-1} = 0), y_n = C x_n + D u_n.
SignalBlock recurrence_apply(const DiscreteLti& sys, const SignalBlock& input);

// Taps 0..length-1 by propagating the m x p block Abar^k Bbar.
Kernel kernel_materialize(const DiscreteLti& sys, std::size_t length);

// y_l = sum_{k <= min(l, K-1)} h_k u_{l-k} + D u_l by direct summation.
SignalBlock conv_apply(const Kernel& kernel, const SignalBlock& input);

}  // namespace ssm
