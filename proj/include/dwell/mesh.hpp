#pragma once

/**
 * @file mesh.hpp
 * @brief Structured simplicial meshes of intervals and rectangles, P1
 * displacement fields, constant-per-element strain and stress fields,
 * and the pairings / window reductions built on top of them.
 */

#include "dwell/errors.hpp"
#include "dwell/sym.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace dwell {

using Point = std::array<double, 2>;

/**
 * @brief Uniform mesh of [0,Lx] (n=1) or [0,Lx]x[0,Ly] (n=2).
 *
 * In 2D every grid quad (i,j) is split along its (0,0)-(1,1) diagonal into
 * element 2q = (v00, v10, v11) and element 2q+1 = (v00, v11, v01), with
 * q = i + Nx*j. Node (i,j) has index i + (Nx+1)*j.
 */
class StructuredMesh {
public:
    int dim = 1;
    std::array<double, 2> extents{1.0, 1.0};
    std::array<int, 2> counts{1, 1};

    std::vector<Point> nodes;
    std::vector<std::array<int, 3>> elements;  ///< n+1 node ids; third unused in 1D
    std::vector<double> measure;
    std::vector<Point> centroid;
    std::vector<char> boundary;                ///< per node
    std::vector<int> node_dof;                 ///< first dof of node, -1 on boundary
    /// Gradient of each local barycentric function, per element.
    std::vector<std::array<Point, 3>> grad;
    int ndof = 0;

    [[nodiscard]] std::size_t num_nodes() const noexcept { return nodes.size(); }
    [[nodiscard]] std::size_t num_elements() const noexcept { return elements.size(); }
    [[nodiscard]] int nodes_per_element() const noexcept { return dim + 1; }
    [[nodiscard]] double spacing(int axis) const { return extents[axis] / counts[axis]; }
    [[nodiscard]] double volume() const {
        return dim == 1 ? extents[0] : extents[0] * extents[1];
    }
    [[nodiscard]] int interior_nodes() const {
        int c = 0;
        for (char b : boundary) c += b ? 0 : 1;
        return c;
    }

    /// Element whose closure contains x (points on shared edges pick one side).
    [[nodiscard]] int locate(const Point& x) const {
        const auto cell = [&](int axis) {
            const double h = spacing(axis);
            int i = static_cast<int>(std::floor(x[axis] / h));
            return std::clamp(i, 0, counts[axis] - 1);
        };
        if (dim == 1) return cell(0);
        const int i = cell(0);
        const int j = cell(1);
        const double lx = x[0] / spacing(0) - i;
        const double ly = x[1] / spacing(1) - j;
        const int q = i + counts[0] * j;
        return ly <= lx ? 2 * q : 2 * q + 1;
    }

    /// Grid quad (or interval) index of an element.
    [[nodiscard]] std::array<int, 2> cell_of(int e) const {
        if (dim == 1) return {e, 0};
        const int q = e / 2;
        return {q % counts[0], q / counts[0]};
    }
};

/// Builds the mesh; resolution entries beyond `dim` are ignored.
inline StructuredMesh build_mesh(std::array<double, 2> extents, std::array<int, 2> resolution, int dim) {
    if (dim != 1 && dim != 2) throw ConfigError("mesh.dimension must be 1 or 2");
    for (int a = 0; a < dim; ++a) {
        if (resolution[a] < 1) throw ConfigError("mesh.resolution must be >= 1 on every axis");
        if (!(extents[a] > 0.0)) throw ConfigError("mesh.extents must be > 0 on every axis");
    }
    StructuredMesh m;
    m.dim = dim;
    m.extents = extents;
    m.counts = resolution;
    if (dim == 1) {
        m.counts[1] = 1;
        m.extents[1] = 1.0;
        const int n = resolution[0];
        const double h = extents[0] / n;
        for (int i = 0; i <= n; ++i) m.nodes.push_back({i * h, 0.0});
        for (int e = 0; e < n; ++e) {
            m.elements.push_back({e, e + 1, -1});
            m.measure.push_back(h);
            m.centroid.push_back({(e + 0.5) * h, 0.0});
            m.grad.push_back({Point{-1.0 / h, 0.0}, Point{1.0 / h, 0.0}, Point{0.0, 0.0}});
        }
        m.boundary.assign(m.nodes.size(), 0);
        m.boundary.front() = 1;
        m.boundary.back() = 1;
    } else {
        const int nx = resolution[0];
        const int ny = resolution[1];
        const double hx = extents[0] / nx;
        const double hy = extents[1] / ny;
        const auto id = [nx](int i, int j) { return i + (nx + 1) * j; };
        for (int j = 0; j <= ny; ++j)
            for (int i = 0; i <= nx; ++i) m.nodes.push_back({i * hx, j * hy});
        m.boundary.assign(m.nodes.size(), 0);
        for (int j = 0; j <= ny; ++j)
            for (int i = 0; i <= nx; ++i)
                if (i == 0 || j == 0 || i == nx || j == ny) m.boundary[id(i, j)] = 1;
        for (int j = 0; j < ny; ++j) {
            for (int i = 0; i < nx; ++i) {
                m.elements.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
                m.elements.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
            }
        }
        for (const auto& el : m.elements) {
            const Point& p0 = m.nodes[el[0]];
            const Point& p1 = m.nodes[el[1]];
            const Point& p2 = m.nodes[el[2]];
            const double j11 = p1[0] - p0[0], j12 = p2[0] - p0[0];
            const double j21 = p1[1] - p0[1], j22 = p2[1] - p0[1];
            const double det = j11 * j22 - j12 * j21;
            m.measure.push_back(0.5 * std::abs(det));
            m.centroid.push_back({(p0[0] + p1[0] + p2[0]) / 3.0, (p0[1] + p1[1] + p2[1]) / 3.0});
            // rows of J^{-T}: gradients of the reference coordinates
            const Point g1{j22 / det, -j12 / det};
            const Point g2{-j21 / det, j11 / det};
            m.grad.push_back({Point{-g1[0] - g2[0], -g1[1] - g2[1]}, g1, g2});
        }
    }
    m.node_dof.assign(m.nodes.size(), -1);
    int dof = 0;
    for (std::size_t k = 0; k < m.nodes.size(); ++k) {
        if (!m.boundary[k]) {
            m.node_dof[k] = dof;
            dof += dim;
        }
    }
    m.ndof = dof;
    return m;
}

/// Nodal P1 vector field; component c of node k is values[k*dim + c].
struct DisplacementField {
    int dim = 1;
    std::vector<double> values;

    DisplacementField() = default;
    explicit DisplacementField(const StructuredMesh& m)
        : dim(m.dim), values(m.num_nodes() * static_cast<std::size_t>(m.dim), 0.0) {}

    [[nodiscard]] double at(std::size_t node, int c) const { return values[node * dim + c]; }
    double& at(std::size_t node, int c) { return values[node * dim + c]; }
};

template <class Tag>
struct ElementMatrixField {
    std::vector<SymMat> values;

    ElementMatrixField() = default;
    explicit ElementMatrixField(const StructuredMesh& m) : values(m.num_elements(), SymMat(m.dim)) {}
    explicit ElementMatrixField(std::vector<SymMat> v) : values(std::move(v)) {}

    [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
    const SymMat& operator[](std::size_t e) const { return values[e]; }
    SymMat& operator[](std::size_t e) { return values[e]; }
};

struct StrainTag {};
struct DualTag {};
using StrainField = ElementMatrixField<StrainTag>;
using DualField = ElementMatrixField<DualTag>;

/// Restriction of a full nodal field to interior dof (boundary values dropped).
inline std::vector<double> to_dof(const DisplacementField& u, const StructuredMesh& m) {
    std::vector<double> x(static_cast<std::size_t>(m.ndof), 0.0);
    for (std::size_t k = 0; k < m.num_nodes(); ++k)
        if (m.node_dof[k] >= 0)
            for (int c = 0; c < m.dim; ++c) x[m.node_dof[k] + c] = u.at(k, c);
    return x;
}

/// Extension by zero of interior dof to a full nodal field.
inline DisplacementField from_dof(const std::vector<double>& x, const StructuredMesh& m) {
    DWELL_REQUIRE(x.size() == static_cast<std::size_t>(m.ndof), "from_dof: size mismatch");
    DisplacementField u(m);
    for (std::size_t k = 0; k < m.num_nodes(); ++k)
        if (m.node_dof[k] >= 0)
            for (int c = 0; c < m.dim; ++c) u.at(k, c) = x[m.node_dof[k] + c];
    return u;
}

/// Strain of a single element from its nodal values.
inline SymMat element_strain(const DisplacementField& u, const StructuredMesh& m, std::size_t e) {
    const auto& el = m.elements[e];
    const auto& g = m.grad[e];
    if (m.dim == 1) return SymMat::scalar(u.at(el[0], 0) * g[0][0] + u.at(el[1], 0) * g[1][0]);
    double gu[2][2] = {{0.0, 0.0}, {0.0, 0.0}};  // gu[i][j] = d u_i / d x_j
    for (int a = 0; a < 3; ++a)
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) gu[i][j] += u.at(el[a], i) * g[a][j];
    return SymMat::make2(gu[0][0], 0.5 * (gu[0][1] + gu[1][0]), gu[1][1]);
}

inline StrainField symmetrized_gradient(const DisplacementField& u, const StructuredMesh& m) {
    DWELL_REQUIRE(u.dim == m.dim && u.values.size() == m.num_nodes() * static_cast<std::size_t>(m.dim),
                  "symmetrized_gradient: field does not conform to mesh");
    StrainField eps(m);
    for (std::size_t e = 0; e < m.num_elements(); ++e) eps[e] = element_strain(u, m, e);
    return eps;
}

/// Strain of the basis field that is 1 in component c at local node a.
inline SymMat basis_strain(const StructuredMesh& m, std::size_t e, int a, int c) {
    const Point& g = m.grad[e][a];
    if (m.dim == 1) return SymMat::scalar(g[0]);
    return c == 0 ? SymMat::make2(g[0], 0.5 * g[1], 0.0) : SymMat::make2(0.0, 0.5 * g[0], g[1]);
}

/// Integral of q . eps(v) over the domain (exact: both factors are elementwise constant).
template <class Tag>
double pairing(const ElementMatrixField<Tag>& q, const DisplacementField& v, const StructuredMesh& m) {
    DWELL_REQUIRE(q.size() == m.num_elements(), "pairing: dual field does not conform to mesh");
    double s = 0.0;
    for (std::size_t e = 0; e < m.num_elements(); ++e) s += m.measure[e] * dot(q[e], element_strain(v, m, e));
    return s;
}

/// L2 norm of an elementwise-constant matrix field.
template <class Tag>
double l2_norm(const ElementMatrixField<Tag>& q, const StructuredMesh& m) {
    double s = 0.0;
    for (std::size_t e = 0; e < m.num_elements(); ++e) s += m.measure[e] * norm2(q[e]);
    return std::sqrt(s);
}

/// Partition of the elements into square blocks of `size` cells per axis.
struct WindowGrid {
    int size = 1;
    std::array<int, 2> counts{1, 1};
    std::vector<int> window_of;          ///< per element
    std::vector<double> measure;         ///< per window
    std::vector<std::vector<int>> members;

    [[nodiscard]] std::size_t num_windows() const noexcept { return measure.size(); }
};

inline WindowGrid make_windows(const StructuredMesh& m, int size) {
    if (size < 1) throw ConfigError("window size must be >= 1");
    for (int a = 0; a < m.dim; ++a)
        if (m.counts[a] % size != 0)
            throw ConfigError("window size " + std::to_string(size) + " does not divide element count " +
                              std::to_string(m.counts[a]));
    WindowGrid w;
    w.size = size;
    w.counts = {m.counts[0] / size, m.dim == 2 ? m.counts[1] / size : 1};
    const std::size_t nw = static_cast<std::size_t>(w.counts[0]) * w.counts[1];
    w.measure.assign(nw, 0.0);
    w.members.resize(nw);
    w.window_of.resize(m.num_elements());
    for (std::size_t e = 0; e < m.num_elements(); ++e) {
        const auto c = m.cell_of(static_cast<int>(e));
        const int id = c[0] / size + w.counts[0] * (c[1] / size);
        w.window_of[e] = id;
        w.measure[id] += m.measure[e];
        w.members[id].push_back(static_cast<int>(e));
    }
    return w;
}

/// Measure-weighted mean of an elementwise field over each window.
template <class T>
std::vector<T> window_average(const std::vector<T>& field, const StructuredMesh& m, const WindowGrid& w, T zero) {
    DWELL_REQUIRE(field.size() == m.num_elements(), "window_average: field does not conform to mesh");
    std::vector<T> out(w.num_windows(), zero);
    for (std::size_t id = 0; id < w.num_windows(); ++id) {
        T acc = zero;
        for (int e : w.members[id]) acc += m.measure[e] * field[e];
        out[id] = (1.0 / w.measure[id]) * acc;
    }
    return out;
}

inline std::vector<double> window_average(const std::vector<double>& field, const StructuredMesh& m,
                                          const WindowGrid& w) {
    return window_average<double>(field, m, w, 0.0);
}

template <class Tag>
std::vector<SymMat> window_average(const ElementMatrixField<Tag>& field, const StructuredMesh& m,
                                   const WindowGrid& w) {
    return window_average<SymMat>(field.values, m, w, SymMat(m.dim));
}

/// Smooth compactly supported bump exp(1 - 1/(1 - r^2/R^2)).
struct Bump {
    Point center{0.0, 0.0};
    double radius = 1.0;

    [[nodiscard]] double operator()(const Point& x, int dim) const {
        double r2 = (x[0] - center[0]) * (x[0] - center[0]);
        if (dim == 2) r2 += (x[1] - center[1]) * (x[1] - center[1]);
        const double s = r2 / (radius * radius);
        return s < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - s)) : 0.0;
    }
};

struct TestFunctionSet {
    std::vector<Bump> bumps;

    /// Nodal samples of bump k; boundary nodes are zero because supports stay inside.
    [[nodiscard]] std::vector<double> nodal(std::size_t k, const StructuredMesh& m) const {
        std::vector<double> out(m.num_nodes());
        for (std::size_t i = 0; i < m.num_nodes(); ++i) out[i] = m.boundary[i] ? 0.0 : bumps[k](m.nodes[i], m.dim);
        return out;
    }
};

/// A few bumps of decreasing radius, all strictly inside the domain.
inline TestFunctionSet default_test_functions(const StructuredMesh& m) {
    TestFunctionSet t;
    const double lx = m.extents[0];
    const double ly = m.dim == 2 ? m.extents[1] : 0.0;
    const double lmin = m.dim == 2 ? std::min(lx, ly) : lx;
    const Point mid{0.5 * lx, 0.5 * ly};
    t.bumps.push_back({mid, 0.45 * lmin});
    t.bumps.push_back({{0.3 * lx, m.dim == 2 ? 0.35 * ly : 0.0}, 0.25 * lmin});
    t.bumps.push_back({{0.7 * lx, m.dim == 2 ? 0.6 * ly : 0.0}, 0.2 * lmin});
    return t;
}

} // namespace dwell
