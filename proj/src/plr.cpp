#include "ssm/plr.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ssm/errors.hpp"

namespace ssm {

namespace {

LowRankBlock compress(const Matrix& block, double eps) {
    TruncatedSvd svd = block_svd(block, eps);
    // Fold the singular values into u.
    for (std::size_t i = 0; i < svd.u.rows(); ++i)
        for (std::size_t k = 0; k < svd.rank; ++k) svd.u(i, k) *= svd.s[k];
    return {std::move(svd.u), std::move(svd.v)};
}

std::size_t low_rank_flops(const LowRankBlock& b) { return 2 * b.rank() * (b.u.rows() + b.v.rows()); }

// y += u (v^T x)
void add_low_rank(const LowRankBlock& b, std::span<const double> x, std::span<double> y) {
    const std::size_t r = b.rank();
    if (r == 0) return;
    std::vector<double> t(r, 0.0);
    for (std::size_t j = 0; j < b.v.rows(); ++j) {
        const double xj = x[j];
        auto vrow = b.v.row(j);
        for (std::size_t k = 0; k < r; ++k) t[k] += vrow[k] * xj;
    }
    for (std::size_t i = 0; i < b.u.rows(); ++i) {
        auto urow = b.u.row(i);
        double s = 0.0;
        for (std::size_t k = 0; k < r; ++k) s += urow[k] * t[k];
        y[i] += s;
    }
}

}  // namespace

std::size_t PlrMatrix::build_node(const Matrix& a, std::size_t offset, std::size_t size, std::size_t level) {
    const std::size_t index = nodes_.size();
    nodes_.push_back({});
    nodes_[index].offset = offset;
    nodes_[index].size = size;
    depth_ = std::max(depth_, level);
    if (size <= leaf_size_) {
        nodes_[index].dense = a.block(offset, offset, size, size);
        flops_ += 2 * size * size;
        return index;
    }
    const std::size_t h = (size + 1) / 2;
    const std::size_t rest = size - h;
    LowRankBlock upper = compress(a.block(offset, offset + h, h, rest), eps_);
    LowRankBlock lower = compress(a.block(offset + h, offset, rest, h), eps_);
    max_rank_ = std::max({max_rank_, upper.rank(), lower.rank()});
    flops_ += low_rank_flops(upper) + low_rank_flops(lower);
    const std::size_t top = build_node(a, offset, h, level + 1);
    const std::size_t bottom = build_node(a, offset + h, rest, level + 1);
    Node& n = nodes_[index];
    n.top = top;
    n.bottom = bottom;
    n.upper = std::move(upper);
    n.lower = std::move(lower);
    return index;
}

PlrMatrix plr_build(const Matrix& a, double eps, std::size_t leaf_size) {
    if (!a.is_square() || a.empty()) throw ContractError("plr_build: matrix must be square and non-empty");
    if (!(eps >= 0.0)) throw ContractError("plr_build: eps must be >= 0");
    if (leaf_size == 0) throw ContractError("plr_build: leaf_size must be >= 1");
    PlrMatrix out;
    out.size_ = a.rows();
    out.leaf_size_ = leaf_size;
    out.eps_ = eps;
    out.build_node(a, 0, a.rows(), 0);
    return out;
}

std::size_t PlrMatrix::stored_values() const noexcept {
    std::size_t total = 0;
    for (const Node& n : nodes_) total += n.dense.size() + n.upper.u.size() + n.upper.v.size() + n.lower.u.size() + n.lower.v.size();
    return total;
}

std::vector<std::size_t> PlrMatrix::offdiag_ranks() const {
    std::vector<std::size_t> out;
    for (const Node& n : nodes_) {
        if (n.is_leaf()) continue;
        out.push_back(n.upper.rank());
        out.push_back(n.lower.rank());
    }
    return out;
}

Matrix PlrMatrix::to_dense() const {
    Matrix out(size_, size_);
    for (const Node& n : nodes_) {
        if (n.is_leaf()) {
            for (std::size_t i = 0; i < n.size; ++i)
                for (std::size_t j = 0; j < n.size; ++j) out(n.offset + i, n.offset + j) = n.dense(i, j);
            continue;
        }
        const std::size_t h = nodes_[n.top].size;
        auto expand = [&](const LowRankBlock& b, std::size_t r0, std::size_t c0) {
            for (std::size_t i = 0; i < b.u.rows(); ++i)
                for (std::size_t j = 0; j < b.v.rows(); ++j) {
                    double s = 0.0;
                    for (std::size_t k = 0; k < b.rank(); ++k) s += b.u(i, k) * b.v(j, k);
                    out(r0 + i, c0 + j) = s;
                }
        };
        expand(n.upper, n.offset, n.offset + h);
        expand(n.lower, n.offset + h, n.offset);
    }
    return out;
}

void PlrMatrix::apply_node(std::size_t index, std::span<const double> x, std::span<double> y) const {
    const Node& n = nodes_[index];
    if (n.is_leaf()) {
        mat_vec(n.dense, x, y);
        return;
    }
    const std::size_t h = nodes_[n.top].size;
    auto x_top = x.first(h);
    auto x_bot = x.subspan(h);
    auto y_top = y.first(h);
    auto y_bot = y.subspan(h);
    apply_node(n.top, x_top, y_top);
    add_low_rank(n.upper, x_bot, y_top);
    apply_node(n.bottom, x_bot, y_bot);
    add_low_rank(n.lower, x_top, y_bot);
}

std::size_t PlrMatrix::matvec(std::span<const double> x, std::span<double> y) const {
    if (x.size() != size_ || y.size() != size_)
        throw ContractError("plr_matvec: vector of length " + std::to_string(x.size()) + " for PLR matrix of size " +
                            std::to_string(size_));
    apply_node(0, x, y);
    return flops_;
}

std::size_t plr_matvec(const PlrMatrix& a, std::span<const double> x, std::span<double> y) { return a.matvec(x, y); }

Vector plr_matvec(const PlrMatrix& a, const Vector& x) {
    Vector y(a.size());
    a.matvec(x.data(), y.data());
    return y;
}

std::vector<PlrMatrix> plr_compress_all(std::span<const Matrix> powers, double eps, std::size_t leaf_size) {
    std::vector<PlrMatrix> out;
    out.reserve(powers.size());
    for (const Matrix& p : powers) out.push_back(plr_build(p, eps, leaf_size));
    return out;
}

std::vector<PlrMatrix> plr_power_build(const DiscreteLti& sys, std::size_t stages, double eps, std::size_t leaf_size) {
    if (stages == 0) throw ContractError("plr_power_build: stages must be >= 1");
    const auto powers = repeated_squares(sys.abar(), stages);
    return plr_compress_all(powers, eps, leaf_size);
}

double plr_tree_constant(std::size_t m, std::size_t leaf_size) {
    if (m <= leaf_size) return 1.0;
    return 2.0 * std::log2(static_cast<double>(m) / static_cast<double>(leaf_size)) + 1.0;
}

}  // namespace ssm
