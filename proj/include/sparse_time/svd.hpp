#pragma once

#include "sparse_time/matrix.hpp"

#include <cstddef>
#include <vector>

namespace sparsetime {

/// Leading k singular triplets of a matrix: x ~= u * diag(sigma) * v^T.
///
/// Columns of `u` (rows x k) and `v` (cols x k) are orthonormal and `sigma` is
/// nonincreasing. Each left singular vector has its largest-magnitude entry
/// nonnegative (first such entry on ties), which fixes the sign ambiguity.
struct TruncatedSvd {
    Matrix u;
    std::vector<double> sigma;
    Matrix v;

    std::size_t rank() const noexcept { return sigma.size(); }

    /// u * diag(sigma) * v^T
    Matrix reconstruct() const;
};

struct SvdOptions {
    std::size_t max_sweeps = 1000;
    double tolerance = 1e-12;
};

/// One-sided Jacobi SVD truncated to rank k.
///
/// Throws std::invalid_argument unless 1 <= k <= min(rows, cols), and
/// NumericalError when the rotations have not converged after
/// `options.max_sweeps` sweeps.
TruncatedSvd truncated_svd(const Matrix& x, std::size_t k, const SvdOptions& options = {});

} // namespace sparsetime
