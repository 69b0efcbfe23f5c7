#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace losscape {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

inline void require_finite(const Matrix& m, const char* what) {
    if (!m.allFinite())
        throw std::invalid_argument(std::string(what) + ": non-finite entries");
}

inline Vector singular_values(const Matrix& m) {
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues();
}

/// Number of singular values above tol. tol < 0 selects the auto
/// tolerance max(rows, cols) * eps * sigma_max.
inline Index numerical_rank(const Matrix& m, double tol = -1.0) {
    require_finite(m, "numerical_rank");
    const Vector sv = singular_values(m);
    if (sv.size() == 0) return 0;
    if (tol < 0.0) {
        tol = static_cast<double>(std::max(m.rows(), m.cols())) *
              std::numeric_limits<double>::epsilon() * sv(0);
    }
    Index r = 0;
    for (Index i = 0; i < sv.size(); ++i)
        if (sv(i) > tol) ++r;
    return r;
}

inline double min_singular_value(const Matrix& m) {
    require_finite(m, "min_singular_value");
    const Vector sv = singular_values(m);
    return sv(sv.size() - 1);
}

inline double max_singular_value(const Matrix& m) {
    require_finite(m, "max_singular_value");
    return singular_values(m)(0);
}

/// LU with partial pivoting; pivot sign tracked exactly inside Eigen.
inline double determinant(const Matrix& m) {
    if (m.rows() != m.cols())
        throw std::invalid_argument("determinant: matrix must be square");
    require_finite(m, "determinant");
    return Eigen::PartialPivLU<Matrix>(m).determinant();
}

/// Rows and columns of a square matrix restricted to `indices`
/// (0-based), order preserved. Duplicates and out-of-range rejected.
inline Matrix principal_submatrix(const Matrix& m, const std::vector<Index>& indices) {
    if (m.rows() != m.cols())
        throw std::invalid_argument("principal_submatrix: matrix must be square");
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] < 0 || indices[i] >= m.rows())
            throw std::out_of_range("principal_submatrix: index out of range");
        for (std::size_t j = 0; j < i; ++j)
            if (indices[i] == indices[j])
                throw std::invalid_argument("principal_submatrix: duplicate index");
    }
    const Index n = static_cast<Index>(indices.size());
    Matrix out(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j)
            out(i, j) = m(indices[static_cast<std::size_t>(i)],
                          indices[static_cast<std::size_t>(j)]);
    return out;
}

/// [M, 1_N]: appends an all-ones column.
inline Matrix with_ones_column(const Matrix& m) {
    Matrix out(m.rows(), m.cols() + 1);
    out.leftCols(m.cols()) = m;
    out.col(m.cols()).setOnes();
    return out;
}

}  // namespace losscape
