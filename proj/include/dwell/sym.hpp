#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace dwell {

/**
 * @brief Symmetric n x n matrix for n in {1, 2}, upper triangle only.
 *
 * Storage is row-major upper triangle: n=1 -> {xx}; n=2 -> {xx, xy, yy}.
 * The inner product is Frobenius, so the off-diagonal entry counts twice.
 */
struct SymMat {
    int dim = 1;
    std::array<double, 3> v{0.0, 0.0, 0.0};

    SymMat() = default;
    explicit SymMat(int n) : dim(n) {}
    static SymMat scalar(double s) {
        SymMat m(1);
        m.v[0] = s;
        return m;
    }
    static SymMat make2(double xx, double xy, double yy) {
        SymMat m(2);
        m.v = {xx, xy, yy};
        return m;
    }
    static SymMat identity(int n) {
        return n == 1 ? scalar(1.0) : make2(1.0, 0.0, 1.0);
    }

    [[nodiscard]] std::size_t ncomp() const noexcept { return dim == 1 ? 1 : 3; }

    [[nodiscard]] double xx() const noexcept { return v[0]; }
    [[nodiscard]] double xy() const noexcept { return dim == 1 ? 0.0 : v[1]; }
    [[nodiscard]] double yy() const noexcept { return dim == 1 ? 0.0 : v[2]; }

    SymMat& operator+=(const SymMat& o) noexcept {
        for (std::size_t i = 0; i < 3; ++i) v[i] += o.v[i];
        return *this;
    }
    SymMat& operator-=(const SymMat& o) noexcept {
        for (std::size_t i = 0; i < 3; ++i) v[i] -= o.v[i];
        return *this;
    }
    SymMat& operator*=(double s) noexcept {
        for (auto& x : v) x *= s;
        return *this;
    }

    friend SymMat operator+(SymMat a, const SymMat& b) noexcept { return a += b; }
    friend SymMat operator-(SymMat a, const SymMat& b) noexcept { return a -= b; }
    friend SymMat operator*(double s, SymMat a) noexcept { return a *= s; }
    friend SymMat operator*(SymMat a, double s) noexcept { return a *= s; }
    friend SymMat operator-(SymMat a) noexcept { return a *= -1.0; }

    [[nodiscard]] double det() const noexcept {
        return dim == 1 ? v[0] : v[0] * v[2] - v[1] * v[1];
    }
};

/// Frobenius inner product.
inline double dot(const SymMat& a, const SymMat& b) noexcept {
    if (a.dim == 1) return a.v[0] * b.v[0];
    return a.v[0] * b.v[0] + 2.0 * a.v[1] * b.v[1] + a.v[2] * b.v[2];
}

inline double norm2(const SymMat& a) noexcept { return dot(a, a); }
inline double norm(const SymMat& a) noexcept { return std::sqrt(norm2(a)); }

/// sym(x (x) y) = (x y^T + y x^T) / 2 for 2-vectors.
inline SymMat sym_outer(const std::array<double, 2>& x, const std::array<double, 2>& y) {
    return SymMat::make2(x[0] * y[0], 0.5 * (x[0] * y[1] + x[1] * y[0]), x[1] * y[1]);
}

} // namespace dwell
