#pragma once
// Private: zero-copy views between ssm::Matrix and Eigen.

#include <Eigen/Dense>

#include "ssm/matrix.hpp"

namespace ssm::detail {

using RowMajorXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMajorXcd = Eigen::Matrix<complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline Eigen::Map<const RowMajorXd> view(const Matrix& a) {
    return {a.data().data(), static_cast<Eigen::Index>(a.rows()), static_cast<Eigen::Index>(a.cols())};
}

inline Eigen::Map<RowMajorXd> view(Matrix& a) {
    return {a.data().data(), static_cast<Eigen::Index>(a.rows()), static_cast<Eigen::Index>(a.cols())};
}

inline Eigen::Map<const RowMajorXcd> view(const ComplexMatrix& a) {
    return {a.data().data(), static_cast<Eigen::Index>(a.rows()), static_cast<Eigen::Index>(a.cols())};
}

template <typename Derived>
Matrix to_matrix(const Eigen::MatrixBase<Derived>& e) {
    Matrix out(static_cast<std::size_t>(e.rows()), static_cast<std::size_t>(e.cols()));
    view(out) = e;
    return out;
}

template <typename Derived>
ComplexMatrix to_complex_matrix(const Eigen::MatrixBase<Derived>& e) {
    ComplexMatrix out(static_cast<std::size_t>(e.rows()), static_cast<std::size_t>(e.cols()));
    Eigen::Map<RowMajorXcd>(out.data().data(), e.rows(), e.cols()) = e;
    return out;
}

}  // namespace ssm::detail
