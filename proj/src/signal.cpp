#include "ssm/signal.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ssm/errors.hpp"
#include "ssm/lti.hpp"
#include "ssm/random.hpp"

namespace ssm {

SignalBlock::SignalBlock(std::size_t dim, std::size_t length) : dim_(dim), length_(length), data_(dim * length, 0.0) {}

SignalBlock SignalBlock::from_matrix(const Matrix& channels_by_time) {
    SignalBlock out(channels_by_time.rows(), channels_by_time.cols());
    for (std::size_t i = 0; i < out.dim_; ++i)
        for (std::size_t l = 0; l < out.length_; ++l) out(i, l) = channels_by_time(i, l);
    return out;
}

Matrix SignalBlock::to_matrix() const {
    Matrix out(dim_, length_);
    for (std::size_t i = 0; i < dim_; ++i)
        for (std::size_t l = 0; l < length_; ++l) out(i, l) = (*this)(i, l);
    return out;
}

bool SignalBlock::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

SignalBlock impulse(std::size_t dim, std::size_t length, std::size_t channel) {
    if (channel >= dim || length == 0) throw ContractError("impulse: channel out of range or empty block");
    SignalBlock out(dim, length);
    out(channel, 0) = 1.0;
    return out;
}

double relative_l2_error(const SignalBlock& approx, const SignalBlock& reference) {
    if (approx.dim() != reference.dim() || approx.length() != reference.length())
        throw ContractError("relative_l2_error: blocks differ in shape");
    std::vector<double> diff(approx.data().size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = approx.data()[i] - reference.data()[i];
    const double ref = norm2(reference.data());
    const double err = norm2(diff);
    return ref == 0.0 ? err : err / ref;
}

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double lo, double hi) {
    Matrix out(rows, cols);
    for (double& v : out.data()) v = rng.uniform(lo, hi);
    return out;
}

SignalBlock random_signal(std::size_t dim, std::size_t length, std::uint64_t seed) {
    Rng rng(seed);
    SignalBlock out(dim, length);
    for (double& v : out.data()) v = rng.uniform(-1.0, 1.0);
    return out;
}

DiscreteLti random_stable_system(std::size_t m, std::size_t p, std::size_t q, double sigma_max, Rng& rng) {
    Matrix a = random_matrix(m, m, rng);
    const double n = spectral_norm(a);
    a = (sigma_max / n) * a;
    Matrix b = random_matrix(m, p, rng);
    Matrix c = random_matrix(q, m, rng);
    Matrix d = random_matrix(q, p, rng);
    return DiscreteLti(std::move(a), std::move(b), std::move(c), std::move(d));
}

DiscreteLti hippo_system(std::size_t m, double delta) {
    return discretize_bilinear(averaging_siso(hippo_matrix(m)), delta);
}

}  // namespace ssm
