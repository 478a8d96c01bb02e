#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "harvest/forms.hpp"
#include "harvest/mesh.hpp"
#include "harvest/tridiag.hpp"

namespace harvest {

/// Eigenvalue, normalized positive eigenfunction (H1 norm 1) and a residual
/// certificate ||A f - value M f||_2 of the discrete pencil. boundary_flux
/// holds -d(func)/dnu at the mesh's boundary nodes.
struct EigenPair {
    double value;
    Field func;
    double residual_norm;
    std::vector<double> boundary_flux;
};

namespace detail {

// boundary nodes sit at the ends, so the non-boundary block is contiguous
inline std::pair<std::size_t, std::size_t> interior_span(const Mesh& m) {
    const std::size_t lo = (m.kind == MeshKind::interval) ? 1 : 0;
    return {lo, m.size() - 2};
}

inline Tridiag slice(const Tridiag& A, std::size_t lo, std::size_t hi) {
    Tridiag S(hi - lo + 1);
    for (std::size_t i = lo; i <= hi; ++i) S.diag[i - lo] = A.diag[i];
    for (std::size_t i = lo; i < hi; ++i) S.off[i - lo] = A.off[i];
    return S;
}

inline void h1_normalize_positive(const Mesh& m, Field& f) {
    double mean = 0.0;
    for (double x : f.v) mean += x;
    if (mean < 0.0)
        for (auto& x : f.v) x = -x;
    const double nrm = h1_norm(m, f);
    for (auto& x : f.v) x /= nrm;
}

inline std::vector<double> fluxes(const Mesh& m, const Field& f) {
    std::vector<double> out;
    out.reserve(m.boundary.size());
    for (int b : m.boundary) out.push_back(-normal_derivative(m, f, b));
    return out;
}

}  // namespace detail

/// Principal Dirichlet eigenpair: smallest beta with -Lap(phi) = beta*phi,
/// phi = 0 on the boundary, phi > 0 inside.
inline EigenPair dirichlet_principal(const MeshPtr& mp) {
    const Mesh& m = *mp;
    const auto [lo, hi] = detail::interior_span(m);
    Tridiag A = detail::slice(m.stiffness, lo, hi);
    std::vector<double> M(m.quad_w.begin() + lo, m.quad_w.begin() + hi + 1);
    EigenResult r = smallest_eigenpair(A, M);

    Field phi = make_field(mp);
    for (std::size_t i = lo; i <= hi; ++i) phi.v[i] = r.vec[i - lo];
    detail::h1_normalize_positive(m, phi);

    for (std::size_t i = lo; i <= hi; ++i)
        if (!(phi.v[i] > 0.0))
            throw NumericFailure("dirichlet_principal: eigenfunction not positive", r.iterations);

    // certificate at the returned (normalized) vector
    std::vector<double> xi(phi.v.begin() + lo, phi.v.begin() + hi + 1), Ax;
    A.mul(xi, Ax);
    double rn = 0.0;
    for (std::size_t i = 0; i < xi.size(); ++i) {
        const double res = Ax[i] - r.value * M[i] * xi[i];
        rn += res * res;
    }
    rn = std::sqrt(rn);
    if (rn > 1e-10 * (1.0 + std::abs(r.value)))
        throw NumericFailure("dirichlet_principal: residual certificate failed", r.iterations);
    return EigenPair{r.value, phi, rn, detail::fluxes(m, phi)};
}

/// Principal eigenvalue lambda of -Lap(phi) = beta*phi in Omega,
/// d(phi)/dnu = -lambda*phi on the boundary, for 0 < beta < beta_Omega.
/// The pencil (beta M - A) phi = lambda B phi has as many finite eigenvalues
/// as boundary nodes; condensing the interior onto the boundary block turns it
/// into a dense problem of that size, and the principal mode is the largest
/// eigenvalue, its eigenfunction positive on the whole mesh.
inline EigenPair steklov_principal(const MeshPtr& mp, double beta) {
    const Mesh& m = *mp;
    if (!(beta > 0.0)) throw std::invalid_argument("steklov_principal: beta must be > 0");
    const double beta_omega = dirichlet_principal(mp).value;
    if (!(beta < beta_omega))
        throw std::invalid_argument("steklov_principal: beta must be below beta_Omega");

    Tridiag K = m.stiffness;
    for (std::size_t i = 0; i < K.size(); ++i) K.diag[i] -= beta * m.quad_w[i];

    const auto [lo, hi] = detail::interior_span(m);
    Tridiag Kii = detail::slice(K, lo, hi);
    const std::size_t nb = m.boundary.size();
    const std::size_t ni = hi - lo + 1;

    // interior responses to unit boundary values: Kii * X_j = -K(:,b_j)
    std::vector<std::vector<double>> X(nb);
    for (std::size_t j = 0; j < nb; ++j) {
        std::vector<double> rhs(ni, 0.0);
        const std::size_t b = static_cast<std::size_t>(m.boundary[j]);
        if (b == 0)
            rhs[0] = -K.off[0];
        else
            rhs[ni - 1] = -K.off[b - 1];
        X[j] = solve_tridiag(Kii, rhs);
    }

    // condensed boundary operator S = K_bb + K_bi X
    std::array<std::array<double, 2>, 2> S{{{0, 0}, {0, 0}}};
    for (std::size_t j = 0; j < nb; ++j) {
        const std::size_t bj = static_cast<std::size_t>(m.boundary[j]);
        for (std::size_t k = 0; k < nb; ++k) {
            double s = (j == k) ? K.diag[bj] : 0.0;
            if (bj == 0)
                s += K.off[0] * X[k][0];
            else
                s += K.off[bj - 1] * X[k][ni - 1];
            S[j][k] = s;
        }
    }

    // generalized problem S w = -lambda B w, symmetrized by B^{-1/2}
    std::array<double, 2> sqb{0, 0};
    for (std::size_t j = 0; j < nb; ++j)
        sqb[j] = std::sqrt(m.bdry_w[static_cast<std::size_t>(m.boundary[j])]);
    double lambda;
    std::array<double, 2> w{0, 0};
    if (nb == 1) {
        lambda = -S[0][0] / (sqb[0] * sqb[0]);
        w[0] = 1.0;
    } else {
        const double a = -S[0][0] / (sqb[0] * sqb[0]);
        const double b = -0.5 * (S[0][1] + S[1][0]) / (sqb[0] * sqb[1]);
        const double c = -S[1][1] / (sqb[1] * sqb[1]);
        const double mean = 0.5 * (a + c);
        const double disc = std::sqrt(0.25 * (a - c) * (a - c) + b * b);
        lambda = mean + disc;  // largest
        if (std::abs(b) > 1e-300) {
            w = {b, lambda - a};
        } else {
            w = (a >= c) ? std::array<double, 2>{1.0, 0.0} : std::array<double, 2>{0.0, 1.0};
        }
        w[0] /= sqb[0];
        w[1] /= sqb[1];
    }

    Field phi = make_field(mp);
    for (std::size_t j = 0; j < nb; ++j) {
        phi.v[static_cast<std::size_t>(m.boundary[j])] = w[j];
        for (std::size_t i = 0; i < ni; ++i) phi.v[lo + i] += w[j] * X[j][i];
    }
    detail::h1_normalize_positive(m, phi);
    for (double x : phi.v)
        if (!(x > 0.0)) throw NumericFailure("steklov_principal: eigenfunction not positive");

    // certificate on the full pencil (A - beta M) phi + lambda B phi = 0
    std::vector<double> Kphi = K.mul(phi.v);
    double rn = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        const double res = Kphi[i] + lambda * m.bdry_w[i] * phi.v[i];
        rn += res * res;
    }
    rn = std::sqrt(rn);
    if (rn > 1e-10 * (1.0 + std::abs(lambda)))
        throw NumericFailure("steklov_principal: residual certificate failed");
    return EigenPair{lambda, phi, rn, detail::fluxes(m, phi)};
}

/// Bifurcation point of the regularized problem on the trivial line:
/// lambda_{alpha,beta} = lambda_beta * alpha^{1-q}.
inline double regularized_bifurcation_lambda(const MeshPtr& m, double beta, double alpha,
                                             double q) {
    if (!(alpha > 0.0))
        throw std::invalid_argument("regularized_bifurcation_lambda: alpha must be > 0");
    if (!(q > 0.0 && q < 1.0))
        throw std::invalid_argument("regularized_bifurcation_lambda: need 0 < q < 1");
    return steklov_principal(m, beta).value * std::pow(alpha, 1.0 - q);
}

/// Smallest eigenvalue mu_1 of the linearization at u in the lumped mass
/// inner product. mu_1 > 0 marks an asymptotically stable state.
inline double linearized_stability(const Mesh& m, const Field& u, const Params& prm) {
    Tridiag J = jacobian(m, u, prm);
    return smallest_eigenpair(J, m.quad_w).value;
}

}  // namespace harvest
