#include "sparse_time/svd.hpp"

#include "sparse_time/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace sparsetime {

namespace {

// Column-major working copy; Jacobi rotations act on column pairs.
struct Columns {
    std::size_t length = 0;
    std::vector<std::vector<double>> cols;
};

Columns to_columns(const Matrix& a) {
    Columns out;
    out.length = a.rows();
    out.cols.assign(a.cols(), std::vector<double>(a.rows()));
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            out.cols[j][i] = a(i, j);
        }
    }
    return out;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

void rotate(std::vector<double>& p, std::vector<double>& q, double c, double s) {
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double xp = p[i];
        const double xq = q[i];
        p[i] = c * xp - s * xq;
        q[i] = s * xp + c * xq;
    }
}

struct FullSvd {
    // a = w * diag(sigma) * vt, unsorted; w columns may be zero for null directions.
    std::vector<std::vector<double>> w;
    std::vector<double> sigma;
    std::vector<std::vector<double>> v;
};

// Hestenes one-sided Jacobi on a tall matrix (rows >= cols).
FullSvd jacobi(const Matrix& a, const SvdOptions& options) {
    Columns work = to_columns(a);
    const std::size_t n = a.cols();
    std::vector<std::vector<double>> v(n, std::vector<double>(n, 0.0));
    for (std::size_t j = 0; j < n; ++j) {
        v[j][j] = 1.0;
    }

    bool converged = n < 2;
    for (std::size_t sweep = 0; sweep < options.max_sweeps && !converged; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double alpha = dot(work.cols[p], work.cols[p]);
                const double beta = dot(work.cols[q], work.cols[q]);
                const double gamma = dot(work.cols[p], work.cols[q]);
                if (gamma == 0.0 || std::abs(gamma) <= options.tolerance * std::sqrt(alpha * beta)) {
                    continue;
                }
                rotated = true;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
                const double c = 1.0 / std::hypot(1.0, t);
                const double s = c * t;
                rotate(work.cols[p], work.cols[q], c, s);
                rotate(v[p], v[q], c, s);
            }
        }
        converged = !rotated;
    }
    if (!converged) {
        throw NumericalError("truncated_svd: Jacobi rotations did not converge within " +
                             std::to_string(options.max_sweeps) + " sweeps");
    }

    FullSvd out;
    out.sigma.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        out.sigma[j] = std::sqrt(dot(work.cols[j], work.cols[j]));
    }
    out.w = std::move(work.cols);
    // v[j] holds column j of V because rotations were applied to V's columns.
    out.v = std::move(v);
    return out;
}

// Gram-Schmidt completion: extend `basis` with unit vectors orthogonal to it.
std::vector<double> orthogonal_complement_vector(const std::vector<std::vector<double>>& basis,
                                                 std::size_t length) {
    for (std::size_t e = 0; e < length; ++e) {
        std::vector<double> cand(length, 0.0);
        cand[e] = 1.0;
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& b : basis) {
                const double proj = dot(cand, b);
                for (std::size_t i = 0; i < length; ++i) {
                    cand[i] -= proj * b[i];
                }
            }
        }
        const double norm = std::sqrt(dot(cand, cand));
        if (norm > 0.5) {
            for (double& x : cand) {
                x /= norm;
            }
            return cand;
        }
    }
    throw std::logic_error("orthogonal_complement_vector: basis already spans the space");
}

} // namespace

Matrix TruncatedSvd::reconstruct() const {
    Matrix scaled = u;
    for (std::size_t i = 0; i < scaled.rows(); ++i) {
        for (std::size_t j = 0; j < scaled.cols(); ++j) {
            scaled(i, j) *= sigma[j];
        }
    }
    return matmul(scaled, transpose(v));
}

TruncatedSvd truncated_svd(const Matrix& x, std::size_t k, const SvdOptions& options) {
    const std::size_t min_dim = std::min(x.rows(), x.cols());
    if (k < 1 || k > min_dim) {
        throw std::invalid_argument("truncated_svd: rank " + std::to_string(k) +
                                    " outside [1, " + std::to_string(min_dim) + "] for " +
                                    shape_string(x));
    }

    const bool wide = x.rows() < x.cols();
    FullSvd full = jacobi(wide ? transpose(x) : x, options);
    // For a wide input x^T = W S V^T, hence x = V S W^T and the factors swap roles.
    const std::size_t left_len = x.rows();
    const std::size_t right_len = x.cols();

    std::vector<std::size_t> order(full.sigma.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return full.sigma[a] > full.sigma[b]; });

    const double sigma_max = full.sigma.empty() ? 0.0 : full.sigma[order.front()];
    const double null_threshold = static_cast<double>(std::max(x.rows(), x.cols())) *
                                  std::numeric_limits<double>::epsilon() * sigma_max;

    std::vector<std::vector<double>> left;
    std::vector<std::vector<double>> right;
    std::vector<double> sigma;
    for (std::size_t idx = 0; idx < k; ++idx) {
        const std::size_t j = order[idx];
        const double s = full.sigma[j];
        // The Jacobi side carries W*sigma unnormalized; the other side is already orthonormal.
        std::vector<double> w_col = full.w[j];
        const bool null_direction = s <= null_threshold || s == 0.0;
        if (null_direction) {
            w_col = orthogonal_complement_vector(wide ? right : left, w_col.size());
        } else {
            for (double& e : w_col) {
                e /= s;
            }
        }
        std::vector<double> v_col = full.v[j];
        std::vector<double> l = wide ? std::move(v_col) : std::move(w_col);
        std::vector<double> r = wide ? std::move(w_col) : std::move(v_col);

        const auto largest = std::max_element(l.begin(), l.end(), [](double a, double b) {
            return std::abs(a) < std::abs(b);
        });
        if (*largest < 0.0) {
            for (double& e : l) {
                e = -e;
            }
            for (double& e : r) {
                e = -e;
            }
        }
        left.push_back(std::move(l));
        right.push_back(std::move(r));
        sigma.push_back(s);
    }

    TruncatedSvd out{Matrix(left_len, k), std::move(sigma), Matrix(right_len, k)};
    for (std::size_t j = 0; j < k; ++j) {
        for (std::size_t i = 0; i < left_len; ++i) {
            out.u(i, j) = left[j][i];
        }
        for (std::size_t i = 0; i < right_len; ++i) {
            out.v(i, j) = right[j][i];
        }
    }
    return out;
}

} // namespace sparsetime
