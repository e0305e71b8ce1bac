#pragma once
//
// Partitioned low rank (PLR) matrices.
//
// A square matrix is split at its midpoint (ceil(n/2) / floor(n/2)) into
// two diagonal blocks, which are partitioned recursively, and two
// off-diagonal blocks, which are stored as truncated SVD factors U V^T.
// Recursion stops at blocks of at most leaf_size rows, stored densely.
//
// Truncation keeps singular values above eps times the block's own largest
// singular value.
//

#include <cstddef>
#include <span>
#include <vector>

#include "ssm/lti.hpp"
#include "ssm/matrix.hpp"

namespace ssm {

// block ~= u * v^T; u is rows x r, v is cols x r.
struct LowRankBlock {
    Matrix u;
    Matrix v;

    std::size_t rank() const noexcept { return u.cols(); }
};

class PlrMatrix {
public:
    struct Node {
        std::size_t offset = 0;
        std::size_t size = 0;
        // Leaf data; empty for split nodes.
        Matrix dense;
        // Split nodes: children and off-diagonal blocks.
        std::size_t top = 0;
        std::size_t bottom = 0;
        LowRankBlock upper;  // rows of top, cols of bottom
        LowRankBlock lower;  // rows of bottom, cols of top

        bool is_leaf() const noexcept { return !dense.empty(); }
    };

    std::size_t size() const noexcept { return size_; }
    std::size_t leaf_size() const noexcept { return leaf_size_; }
    double eps() const noexcept { return eps_; }
    std::size_t max_offdiag_rank() const noexcept { return max_rank_; }
    std::size_t depth() const noexcept { return depth_; }

    // Floating-point operations of one matvec (multiplies and adds).
    std::size_t matvec_flops() const noexcept { return flops_; }
    // Floating-point values held by the representation.
    std::size_t stored_values() const noexcept;

    // Ranks of all off-diagonal blocks in build order.
    std::vector<std::size_t> offdiag_ranks() const;

    const std::vector<Node>& nodes() const noexcept { return nodes_; }

    Matrix to_dense() const;

    // y = A x; returns the number of flops performed. y must not alias x.
    std::size_t matvec(std::span<const double> x, std::span<double> y) const;

private:
    friend PlrMatrix plr_build(const Matrix& a, double eps, std::size_t leaf_size);

    std::size_t build_node(const Matrix& a, std::size_t offset, std::size_t size, std::size_t level);
    void apply_node(std::size_t index, std::span<const double> x, std::span<double> y) const;

    std::size_t size_ = 0;
    std::size_t leaf_size_ = 16;
    double eps_ = 0.0;
    std::size_t max_rank_ = 0;
    std::size_t depth_ = 0;
    std::size_t flops_ = 0;
    std::vector<Node> nodes_;  // nodes_[0] is the root
};

PlrMatrix plr_build(const Matrix& a, double eps, std::size_t leaf_size = 16);

Vector plr_matvec(const PlrMatrix& a, const Vector& x);
std::size_t plr_matvec(const PlrMatrix& a, std::span<const double> x, std::span<double> y);

// Abar^(2^s), s < stages, computed densely and compressed independently.
std::vector<PlrMatrix> plr_power_build(const DiscreteLti& sys, std::size_t stages, double eps,
                                       std::size_t leaf_size = 16);
std::vector<PlrMatrix> plr_compress_all(std::span<const Matrix> powers, double eps, std::size_t leaf_size = 16);

// Reconstruction constant c_tree = 2 log2(m / leaf_size) + 1 (at least 1).
double plr_tree_constant(std::size_t m, std::size_t leaf_size);

}  // namespace ssm
