#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "harvest/tridiag.hpp"

namespace harvest {

enum class MeshKind { interval, radial_disk };

/// Uniform 1D mesh over the interval (0,L), or the radial coordinate of the
/// disk of radius R (rotationally symmetric problems). Quadrature weights are
/// the row sums of the P1 mass matrix, so integrate() is the trapezoid rule on
/// the interval and carries the 2*pi*r Jacobian on the disk. The stiffness
/// matrix realizes the second-order Laplacian with natural (flux) boundary
/// rows; on the disk its conservative form regularizes the r=0 axis.
struct Mesh {
    MeshKind kind;
    double extent;  // L or R
    int n;          // cell count; n+1 nodes
    double h;
    std::vector<double> nodes;
    std::vector<double> quad_w;  // lumped mass / domain quadrature weights
    std::vector<double> bdry_w;  // boundary quadrature weights, 0 off-boundary
    std::vector<int> boundary;   // boundary node indices
    Tridiag stiffness;

    bool is_boundary(int i) const { return bdry_w[static_cast<std::size_t>(i)] != 0.0; }
    std::size_t size() const { return nodes.size(); }
    double measure() const {
        return kind == MeshKind::interval ? extent : std::numbers::pi * extent * extent;
    }
};

using MeshPtr = std::shared_ptr<const Mesh>;

inline MeshPtr build_mesh(MeshKind kind, double extent, int n) {
    if (!(extent > 0.0)) throw std::invalid_argument("build_mesh: extent must be > 0");
    if (n < 2) throw std::invalid_argument("build_mesh: need at least 2 cells");

    auto m = std::make_shared<Mesh>();
    m->kind = kind;
    m->extent = extent;
    m->n = n;
    m->h = extent / n;
    const std::size_t nn = static_cast<std::size_t>(n) + 1;
    m->nodes.resize(nn);
    for (std::size_t i = 0; i < nn; ++i) m->nodes[i] = static_cast<double>(i) * m->h;
    m->nodes.back() = extent;

    m->quad_w.assign(nn, 0.0);
    m->bdry_w.assign(nn, 0.0);
    m->stiffness = Tridiag(nn);
    const double h = m->h;

    if (kind == MeshKind::interval) {
        for (std::size_t i = 0; i < nn; ++i) m->quad_w[i] = h;
        m->quad_w.front() = 0.5 * h;
        m->quad_w.back() = 0.5 * h;
        for (std::size_t e = 0; e + 1 < nn; ++e) {
            const double k = 1.0 / h;
            m->stiffness.diag[e] += k;
            m->stiffness.diag[e + 1] += k;
            m->stiffness.off[e] -= k;
        }
        m->bdry_w.front() = 1.0;
        m->bdry_w.back() = 1.0;
        m->boundary = {0, n};
    } else {
        const double pi = std::numbers::pi;
        m->quad_w[0] = pi * h * h / 3.0;
        for (std::size_t i = 1; i + 1 < nn; ++i) m->quad_w[i] = 2.0 * pi * m->nodes[i] * h;
        m->quad_w.back() = pi * h * (extent - h / 3.0);
        for (std::size_t e = 0; e + 1 < nn; ++e) {
            // element integral of the Jacobian: pi*(r_i + r_{i+1})/h
            const double k = pi * (m->nodes[e] + m->nodes[e + 1]) / h;
            m->stiffness.diag[e] += k;
            m->stiffness.diag[e + 1] += k;
            m->stiffness.off[e] -= k;
        }
        m->bdry_w.back() = 2.0 * pi * extent;
        m->boundary = {n};
    }
    return m;
}

/// Nodal grid function bound to its mesh.
struct Field {
    MeshPtr mesh;
    std::vector<double> v;

    double& operator[](std::size_t i) { return v[i]; }
    double operator[](std::size_t i) const { return v[i]; }
    std::size_t size() const { return v.size(); }
};

inline Field make_field(const MeshPtr& m, double c = 0.0) {
    return Field{m, std::vector<double>(m->size(), c)};
}

inline Field make_field(const MeshPtr& m, const std::function<double(double)>& f) {
    Field u{m, std::vector<double>(m->size())};
    for (std::size_t i = 0; i < u.size(); ++i) u.v[i] = f(m->nodes[i]);
    return u;
}

inline void check_same_mesh(const Mesh& m, const Field& f) {
    if (f.mesh.get() != &m || f.v.size() != m.size())
        throw std::invalid_argument("field does not live on this mesh");
}

inline double integrate(const Mesh& m, const Field& f) {
    check_same_mesh(m, f);
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += m.quad_w[i] * f.v[i];
    return s;
}

inline double integrate_boundary(const Mesh& m, const Field& g) {
    check_same_mesh(m, g);
    double s = 0.0;
    for (int b : m.boundary) s += m.bdry_w[static_cast<std::size_t>(b)] * g.v[static_cast<std::size_t>(b)];
    return s;
}

struct Norms {
    double l2, h1, sup;
};

inline double sup_norm(const Field& f) {
    double s = 0.0;
    for (double x : f.v) s = std::max(s, std::abs(x));
    return s;
}

inline double l2_norm(const Mesh& m, const Field& f) {
    check_same_mesh(m, f);
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += m.quad_w[i] * f.v[i] * f.v[i];
    return std::sqrt(s);
}

/// Squared L2 norm of the elementwise gradient (one-sided slopes at the two
/// boundary nodes, shared slopes inside); equals f^T A f with A the stiffness.
inline double grad_l2_sq(const Mesh& m, const Field& f) {
    check_same_mesh(m, f);
    return m.stiffness.quad(f.v);
}

/// H1 inner product <a,b> = a^T (A + M) b; the norm the eigenfunctions are
/// normalized in and the decomposition below is orthogonal in.
inline double h1_inner(const Mesh& m, const Field& a, const Field& b) {
    check_same_mesh(m, a);
    check_same_mesh(m, b);
    double s = 0.0;
    const std::size_t nn = m.size();
    for (std::size_t i = 0; i < nn; ++i) {
        double Ab = m.stiffness.diag[i] * b.v[i];
        if (i > 0) Ab += m.stiffness.off[i - 1] * b.v[i - 1];
        if (i + 1 < nn) Ab += m.stiffness.off[i] * b.v[i + 1];
        s += a.v[i] * (Ab + m.quad_w[i] * b.v[i]);
    }
    return s;
}

inline double h1_norm(const Mesh& m, const Field& f) {
    double l2 = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) l2 += m.quad_w[i] * f.v[i] * f.v[i];
    return std::sqrt(grad_l2_sq(m, f) + l2);
}

inline Norms norms(const Mesh& m, const Field& f) {
    check_same_mesh(m, f);
    const double l2 = l2_norm(m, f);
    return Norms{l2, std::sqrt(grad_l2_sq(m, f) + l2 * l2), sup_norm(f)};
}

/// Outward normal derivative at a boundary node, second-order one-sided.
inline double normal_derivative(const Mesh& m, const Field& f, int b) {
    check_same_mesh(m, f);
    if (!m.is_boundary(b)) throw std::invalid_argument("normal_derivative: not a boundary node");
    const auto& v = f.v;
    const double h = m.h;
    if (b == 0)  // nu = -e_x at the left end
        return -(-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
    const std::size_t n = m.size() - 1;
    return (3.0 * v[n] - 4.0 * v[n - 1] + v[n - 2]) / (2.0 * h);
}

}  // namespace harvest
