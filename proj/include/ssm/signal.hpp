#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ssm/matrix.hpp"

namespace ssm {

// dim x length block of time samples. Column l is the sample at time l and
// is stored contiguously.
class SignalBlock {
public:
    SignalBlock() = default;
    SignalBlock(std::size_t dim, std::size_t length);

    // rows = channels, cols = time.
    static SignalBlock from_matrix(const Matrix& channels_by_time);
    Matrix to_matrix() const;

    std::size_t dim() const noexcept { return dim_; }
    std::size_t length() const noexcept { return length_; }

    std::span<const double> column(std::size_t l) const noexcept { return {data_.data() + l * dim_, dim_}; }
    std::span<double> column(std::size_t l) noexcept { return {data_.data() + l * dim_, dim_}; }

    double operator()(std::size_t channel, std::size_t l) const noexcept { return data_[l * dim_ + channel]; }
    double& operator()(std::size_t channel, std::size_t l) noexcept { return data_[l * dim_ + channel]; }

    std::span<const double> data() const noexcept { return data_; }
    std::span<double> data() noexcept { return data_; }

    bool all_finite() const noexcept;

    bool operator==(const SignalBlock&) const = default;

private:
    std::size_t dim_ = 0;
    std::size_t length_ = 0;
    std::vector<double> data_;
};

SignalBlock impulse(std::size_t dim, std::size_t length, std::size_t channel = 0);

// ||approx - reference||_2 / ||reference||_2 over all entries; the absolute
// error when the reference is zero.
double relative_l2_error(const SignalBlock& approx, const SignalBlock& reference);

}  // namespace ssm
