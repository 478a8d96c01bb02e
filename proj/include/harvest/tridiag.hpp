#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace harvest {

/// Symmetric tridiagonal matrix: diag[i] on the diagonal, off[i] = A(i,i+1).
struct Tridiag {
    std::vector<double> diag;
    std::vector<double> off;

    Tridiag() = default;
    explicit Tridiag(std::size_t n) : diag(n, 0.0), off(n > 0 ? n - 1 : 0, 0.0) {}

    std::size_t size() const { return diag.size(); }

    void mul(const std::vector<double>& x, std::vector<double>& y) const {
        const std::size_t n = size();
        y.assign(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double s = diag[i] * x[i];
            if (i > 0) s += off[i - 1] * x[i - 1];
            if (i + 1 < n) s += off[i] * x[i + 1];
            y[i] = s;
        }
    }

    std::vector<double> mul(const std::vector<double>& x) const {
        std::vector<double> y;
        mul(x, y);
        return y;
    }

    /// Quadratic form x^T A x.
    double quad(const std::vector<double>& x) const {
        const std::size_t n = size();
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += diag[i] * x[i] * x[i];
        for (std::size_t i = 0; i + 1 < n; ++i) s += 2.0 * off[i] * x[i] * x[i + 1];
        return s;
    }

    void add_diagonal(const std::vector<double>& d, double scale = 1.0) {
        for (std::size_t i = 0; i < size(); ++i) diag[i] += scale * d[i];
    }
};

struct NumericFailure : std::runtime_error {
    int iterations;
    NumericFailure(const std::string& msg, int iters = 0)
        : std::runtime_error(msg), iterations(iters) {}
};

/// Solve A x = b by Gaussian elimination with partial pivoting (gtsv-style).
/// Handles indefinite matrices, e.g. Newton systems near folds.
inline std::vector<double> solve_tridiag(const Tridiag& A, std::vector<double> b) {
    const std::size_t n = A.size();
    if (b.size() != n) throw std::invalid_argument("solve_tridiag: size mismatch");
    if (n == 0) return b;
    if (n == 1) {
        if (A.diag[0] == 0.0) throw NumericFailure("solve_tridiag: singular 1x1 system");
        return {b[0] / A.diag[0]};
    }
    // working copies: lower, main, upper, and second upper (fill-in from pivoting)
    std::vector<double> dl(A.off), d(A.diag), du(A.off), du2(n, 0.0);

    for (std::size_t i = 0; i + 1 < n; ++i) {
        double sub = dl[i];
        if (std::abs(d[i]) >= std::abs(sub)) {
            if (d[i] == 0.0) throw NumericFailure("solve_tridiag: zero pivot");
            const double m = sub / d[i];
            d[i + 1] -= m * du[i];
            b[i + 1] -= m * b[i];
            if (i + 2 < n) du2[i] = 0.0;
        } else {
            // swap rows i and i+1
            const double m = d[i] / sub;
            d[i] = sub;
            double tmp = d[i + 1];
            d[i + 1] = du[i] - m * tmp;
            du[i] = tmp;
            if (i + 2 < n) {
                du2[i] = du[i + 1];
                du[i + 1] = -m * du2[i];
            }
            std::swap(b[i], b[i + 1]);
            b[i + 1] -= m * b[i];
        }
    }
    if (d[n - 1] == 0.0) throw NumericFailure("solve_tridiag: singular system");

    // back substitution
    std::vector<double> x(n);
    x[n - 1] = b[n - 1] / d[n - 1];
    if (n >= 2) {
        x[n - 2] = (b[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2];
        for (std::size_t k = n - 2; k-- > 0;) {
            double s = b[k] - du[k] * x[k + 1];
            if (k + 2 < n) s -= du2[k] * x[k + 2];
            x[k] = s / d[k];
        }
    }
    return x;
}

/// Number of eigenvalues of the pencil (A, M) strictly below sigma,
/// with M a positive diagonal, via the Sturm sign count of A - sigma*M.
inline int eigen_count_below(const Tridiag& A, const std::vector<double>& M, double sigma) {
    const std::size_t n = A.size();
    int count = 0;
    double q = 0.0;
    const double tiny = std::numeric_limits<double>::min() / std::numeric_limits<double>::epsilon();
    for (std::size_t i = 0; i < n; ++i) {
        double di = A.diag[i] - sigma * M[i];
        q = (i == 0) ? di : di - (A.off[i - 1] * A.off[i - 1]) / q;
        if (std::abs(q) < tiny) q = -tiny;
        if (q < 0.0) ++count;
    }
    return count;
}

struct EigenResult {
    double value = 0.0;
    std::vector<double> vec;
    double residual = 0.0;  // ||A v - value M v||_2 with ||v||_M = 1
    int iterations = 0;
};

namespace detail {

inline double pencil_rayleigh(const Tridiag& A, const std::vector<double>& M,
                              const std::vector<double>& x) {
    double num = A.quad(x), den = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) den += M[i] * x[i] * x[i];
    return num / den;
}

inline void m_normalize(const std::vector<double>& M, std::vector<double>& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += M[i] * x[i] * x[i];
    s = std::sqrt(s);
    for (auto& v : x) v /= s;
}

}  // namespace detail

/// Smallest eigenpair of A x = mu M x (A symmetric tridiagonal, M diagonal > 0).
/// Bisection on the Sturm count brackets mu_1, then shifted inverse iteration
/// refines the pair to a residual certificate.
inline EigenResult smallest_eigenpair(const Tridiag& A, const std::vector<double>& M,
                                      double tol = 1e-12, int max_iter = 200) {
    const std::size_t n = A.size();
    if (n == 0 || M.size() != n) throw std::invalid_argument("smallest_eigenpair: bad sizes");

    // Gershgorin bounds for the pencil
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < n; ++i) {
        double r = 0.0;
        if (i > 0) r += std::abs(A.off[i - 1]);
        if (i + 1 < n) r += std::abs(A.off[i]);
        lo = std::min(lo, (A.diag[i] - r) / M[i]);
        hi = std::max(hi, (A.diag[i] + r) / M[i]);
    }
    const double scale = std::max({std::abs(lo), std::abs(hi), 1.0});

    double a = lo - 1e-8 * scale, b = hi + 1e-8 * scale;
    for (int it = 0; it < 200 && (b - a) > 1e-12 * scale; ++it) {
        const double mid = 0.5 * (a + b);
        if (eigen_count_below(A, M, mid) >= 1)
            b = mid;
        else
            a = mid;
    }

    // shift strictly below mu_1 so the target dominates inverse iteration
    const double shift = a - 1e-7 * scale;
    Tridiag S = A;
    for (std::size_t i = 0; i < n; ++i) S.diag[i] -= shift * M[i];

    std::vector<double> x(n, 1.0);
    detail::m_normalize(M, x);
    EigenResult out;
    EigenResult best;
    best.residual = std::numeric_limits<double>::infinity();
    int stagnant = 0;
    std::vector<double> rhs(n), Ax, Sz, z2;
    for (int it = 1; it <= max_iter; ++it) {
        for (std::size_t i = 0; i < n; ++i) rhs[i] = M[i] * x[i];
        std::vector<double> z = solve_tridiag(S, rhs);
        // one step of iterative refinement; the shifted system carries the
        // full 1/h^2 stiffness-to-mass scale and loses ~6 digits otherwise
        S.mul(z, Sz);
        for (std::size_t i = 0; i < n; ++i) Sz[i] = rhs[i] - Sz[i];
        z2 = solve_tridiag(S, Sz);
        for (std::size_t i = 0; i < n; ++i) z[i] += z2[i];
        x = std::move(z);
        detail::m_normalize(M, x);
        out.value = detail::pencil_rayleigh(A, M, x);
        A.mul(x, Ax);
        double rn = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = Ax[i] - out.value * M[i] * x[i];
            rn += r * r;
        }
        out.residual = std::sqrt(rn);
        out.iterations = it;
        if (out.residual < best.residual) {
            best = out;
            best.vec = x;
            stagnant = 0;
        } else if (++stagnant >= 3) {
            break;  // rounding floor reached
        }
        if (out.residual <= tol * (1.0 + std::abs(out.value))) break;
    }
    // the Rayleigh value is accurate to residual^2/gap even at the floor;
    // callers needing a certified pair check best.residual themselves
    if (!std::isfinite(best.value) || best.vec.empty())
        throw NumericFailure("smallest_eigenpair: iteration degenerated", best.iterations);
    return best;
}

/// Solve the bordered (arrow) system [A b; c^T d] [x; y] = [r; s] by block
/// elimination with two pivoted tridiagonal solves. Standard for
/// pseudo-arclength correctors; A may be ill-conditioned near folds.
inline void solve_bordered(const Tridiag& A, const std::vector<double>& b,
                           const std::vector<double>& c, double d,
                           const std::vector<double>& r, double s,
                           std::vector<double>& x, double& y) {
    std::vector<double> z1 = solve_tridiag(A, r);
    std::vector<double> z2 = solve_tridiag(A, b);
    double cz1 = 0.0, cz2 = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        cz1 += c[i] * z1[i];
        cz2 += c[i] * z2[i];
    }
    const double denom = d - cz2;
    if (denom == 0.0) throw NumericFailure("solve_bordered: singular bordered system");
    y = (s - cz1) / denom;
    x.resize(z1.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = z1[i] - y * z2[i];
}

}  // namespace harvest
