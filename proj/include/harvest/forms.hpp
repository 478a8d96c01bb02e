#pragma once

#include <cmath>
#include <stdexcept>

#include "harvest/mesh.hpp"
#include "harvest/params.hpp"
#include "harvest/tridiag.hpp"

namespace harvest {

// Bulk nonlinearity |u|^{p-1} u (odd extension, so Newton iterates may cross
// zero) and its derivative p |u|^{p-1}.
inline double bulk_power(double u, double p) {
    return std::copysign(std::pow(std::abs(u), p), u);
}
inline double bulk_power_d(double u, double p) { return p * std::pow(std::abs(u), p - 1.0); }

// Boundary absorption g(u) = (u+alpha)^{q-1} u. For alpha = 0 this is u^q,
// defined for u >= 0 only and not differentiable at u = 0.
inline double boundary_map(double u, double alpha, double q) {
    if (alpha == 0.0) {
        if (u < 0.0) throw std::domain_error("boundary map u^q undefined for u < 0");
        return std::pow(u, q);
    }
    if (u + alpha <= 0.0) throw std::domain_error("boundary map undefined at u <= -alpha");
    return std::pow(u + alpha, q - 1.0) * u;
}

inline double boundary_map_d(double u, double alpha, double q) {
    if (alpha == 0.0) {
        if (u <= 0.0) throw std::domain_error("boundary map u^q not differentiable at u <= 0");
        return q * std::pow(u, q - 1.0);
    }
    if (u + alpha <= 0.0) throw std::domain_error("boundary map undefined at u <= -alpha");
    return (q - 1.0) * std::pow(u + alpha, q - 2.0) * u + std::pow(u + alpha, q - 1.0);
}

/// Nodal residual of the discrete weak form:
///   A u - beta M u + M |u|^{p-1}u + lambda B (u+alpha)^{q-1}u
/// with A the stiffness, M the lumped mass and B the boundary weights.
/// Zero exactly at discrete solutions.
inline Field residual(const Mesh& m, const Field& u, const Params& prm) {
    check_same_mesh(m, u);
    prm.validate_shape();
    Field r{u.mesh, m.stiffness.mul(u.v)};
    for (std::size_t i = 0; i < r.size(); ++i)
        r.v[i] += m.quad_w[i] * (-prm.beta * u.v[i] + bulk_power(u.v[i], prm.p));
    for (int b : m.boundary) {
        const std::size_t i = static_cast<std::size_t>(b);
        r.v[i] += prm.lambda * m.bdry_w[i] * boundary_map(u.v[i], prm.alpha, prm.q);
    }
    return r;
}

/// Symmetric tridiagonal derivative of residual() at u.
inline Tridiag jacobian(const Mesh& m, const Field& u, const Params& prm) {
    check_same_mesh(m, u);
    prm.validate_shape();
    Tridiag J = m.stiffness;
    for (std::size_t i = 0; i < J.size(); ++i)
        J.diag[i] += m.quad_w[i] * (-prm.beta + bulk_power_d(u.v[i], prm.p));
    for (int b : m.boundary) {
        const std::size_t i = static_cast<std::size_t>(b);
        J.diag[i] += prm.lambda * m.bdry_w[i] * boundary_map_d(u.v[i], prm.alpha, prm.q);
    }
    return J;
}

/// E_beta(u) = int |grad u|^2 - beta u^2. E_1 is written E.
inline double energy(const Mesh& m, const Field& u, double beta) {
    check_same_mesh(m, u);
    double l2sq = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) l2sq += m.quad_w[i] * u.v[i] * u.v[i];
    return grad_l2_sq(m, u) - beta * l2sq;
}

/// Left side of the energy identity obtained by testing the weak form with u:
///   int(|grad u|^2 - beta u^2 + |u|^{p+1}) + lambda int_bdry (u+alpha)^{q-1} u^2.
/// Vanishes at discrete solutions.
inline double energy_identity_defect(const Mesh& m, const Field& u, const Params& prm) {
    check_same_mesh(m, u);
    prm.validate_shape();
    double s = grad_l2_sq(m, u);
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double ui = u.v[i];
        s += m.quad_w[i] * (-prm.beta * ui * ui + bulk_power(ui, prm.p) * ui);
    }
    for (int b : m.boundary) {
        const std::size_t i = static_cast<std::size_t>(b);
        s += prm.lambda * m.bdry_w[i] * boundary_map(u.v[i], prm.alpha, prm.q) * u.v[i];
    }
    return s;
}

}  // namespace harvest
