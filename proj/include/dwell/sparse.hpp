#pragma once

#include "dwell/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <tuple>
#include <vector>

namespace dwell {

struct Triplet {
    int row, col;
    double value;
};

/// Compressed sparse row matrix; rows are sorted and duplicate-free.
class CsrMatrix {
public:
    CsrMatrix() = default;

    /// Sums duplicates. Sorting makes the summation order independent of insertion order.
    CsrMatrix(int n, std::vector<Triplet> entries) : n_(n) {
        std::sort(entries.begin(), entries.end(), [](const Triplet& x, const Triplet& y) {
            return std::tie(x.row, x.col, x.value) < std::tie(y.row, y.col, y.value);
        });
        row_ptr_.assign(static_cast<std::size_t>(n) + 1, 0);
        for (std::size_t i = 0; i < entries.size();) {
            std::size_t j = i;
            double s = 0.0;
            while (j < entries.size() && entries[j].row == entries[i].row && entries[j].col == entries[i].col)
                s += entries[j++].value;
            cols_.push_back(entries[i].col);
            vals_.push_back(s);
            ++row_ptr_[entries[i].row + 1];
            i = j;
        }
        for (int r = 0; r < n; ++r) row_ptr_[r + 1] += row_ptr_[r];
    }

    [[nodiscard]] int rows() const noexcept { return n_; }
    [[nodiscard]] std::size_t nnz() const noexcept { return vals_.size(); }

    void multiply(const std::vector<double>& x, std::vector<double>& y) const {
        y.assign(static_cast<std::size_t>(n_), 0.0);
        for (int r = 0; r < n_; ++r) {
            double s = 0.0;
            for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) s += vals_[k] * x[cols_[k]];
            y[r] = s;
        }
    }

    [[nodiscard]] double at(int r, int c) const {
        for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
            if (cols_[k] == c) return vals_[k];
        return 0.0;
    }

    [[nodiscard]] std::vector<double> diagonal() const {
        std::vector<double> d(static_cast<std::size_t>(n_), 0.0);
        for (int r = 0; r < n_; ++r) d[r] = at(r, r);
        return d;
    }

    [[nodiscard]] const std::vector<int>& row_ptr() const noexcept { return row_ptr_; }
    [[nodiscard]] const std::vector<int>& cols() const noexcept { return cols_; }
    [[nodiscard]] const std::vector<double>& values() const noexcept { return vals_; }

private:
    int n_ = 0;
    std::vector<int> row_ptr_;
    std::vector<int> cols_;
    std::vector<double> vals_;
};

inline double vdot(const std::vector<double>& x, const std::vector<double>& y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

inline double vnorm(const std::vector<double>& x) { return std::sqrt(vdot(x, x)); }

struct CgResult {
    int iterations = 0;
    double relative_residual = 0.0;
};

/**
 * @brief Jacobi-preconditioned conjugate gradients for K x = rhs, warm-started from x.
 *
 * Stops on the true residual ||K x - rhs|| <= tol ||rhs||; the recurrence
 * residual is only used to decide when to recompute it.
 */
inline CgResult pcg(const CsrMatrix& K, const std::vector<double>& rhs, std::vector<double>& x, double tol,
                    int max_iter) {
    const std::size_t n = rhs.size();
    DWELL_REQUIRE(static_cast<int>(n) == K.rows() && x.size() == n, "pcg: size mismatch");
    CgResult res;
    const double bnorm = vnorm(rhs);
    if (bnorm == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        return res;
    }
    std::vector<double> inv_diag = K.diagonal();
    for (auto& d : inv_diag) d = d > 0.0 ? 1.0 / d : 1.0;

    std::vector<double> r(n), z(n), p(n), q(n);
    const auto true_residual = [&]() {
        K.multiply(x, q);
        for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - q[i];
        return vnorm(r) / bnorm;
    };
    res.relative_residual = true_residual();
    while (res.relative_residual > tol && res.iterations < max_iter) {
        for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
        p = z;
        double rz = vdot(r, z);
        while (res.iterations < max_iter) {
            K.multiply(p, q);
            const double pq = vdot(p, q);
            if (!(pq > 0.0)) break;
            const double alpha = rz / pq;
            for (std::size_t i = 0; i < n; ++i) {
                x[i] += alpha * p[i];
                r[i] -= alpha * q[i];
            }
            ++res.iterations;
            if (vnorm(r) <= 0.5 * tol * bnorm) break;
            for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
            const double rz_new = vdot(r, z);
            const double beta = rz_new / rz;
            rz = rz_new;
            for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
        }
        const double previous = res.relative_residual;
        res.relative_residual = true_residual();
        if (res.relative_residual >= previous && res.relative_residual > tol) break;  // stagnation
    }
    if (res.relative_residual > tol)
        throw SolverError("conjugate gradients did not converge in " + std::to_string(res.iterations) +
                              " iterations (relative residual " + std::to_string(res.relative_residual) + ")",
                          res.relative_residual);
    return res;
}

} // namespace dwell
