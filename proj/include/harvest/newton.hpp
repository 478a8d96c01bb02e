#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "harvest/forms.hpp"
#include "harvest/mesh.hpp"
#include "harvest/params.hpp"
#include "harvest/spectra.hpp"
#include "harvest/tridiag.hpp"

namespace harvest {

struct NewtonOptions {
    double tol = 1e-10;  // on ||r||_2 / (1 + ||u||_H1)
    int max_iter = 80;
    double damping_floor = 9.5367431640625e-07;  // 2^-20
    bool compute_mu1 = true;
};

enum class SolutionClass { positive, trivial };

/// A converged state. classification is "trivial" when the sup norm sits
/// below the grid-zero threshold 10*h^2, i.e. indistinguishable from zero at
/// scheme accuracy.
struct Solution {
    Field field;
    Params params;
    double residual_norm = 0.0;  // scaled
    double mu1 = std::numeric_limits<double>::quiet_NaN();
    long iterations = 0;
    SolutionClass classification = SolutionClass::positive;
};

struct SolveFailure : NumericFailure {
    Field best;
    double residual_norm;
    SolveFailure(const std::string& msg, Field b, double rn, int iters)
        : NumericFailure(msg, iters), best(std::move(b)), residual_norm(rn) {}
};

struct MonotonicityFailure : NumericFailure {
    using NumericFailure::NumericFailure;
};

inline double trivial_threshold(const Mesh& m) { return 10.0 * m.h * m.h; }

inline double scaled_residual_norm(const Mesh& m, const Field& u, const Field& r) {
    double rn = 0.0;
    for (double x : r.v) rn += x * x;
    return std::sqrt(rn) / (1.0 + h1_norm(m, u));
}

namespace detail {

inline double boundary_min(const Mesh& m, const Field& u) {
    double s = std::numeric_limits<double>::infinity();
    for (int b : m.boundary) s = std::min(s, u.v[static_cast<std::size_t>(b)]);
    return s;
}

// residual norm of a trial state; infinity when outside the domain of the
// boundary map (line searches treat that as a rejected step)
inline double try_residual(const Mesh& m, const Field& u, const Params& prm, Field& r) {
    try {
        r = residual(m, u, prm);
    } catch (const std::domain_error&) {
        return std::numeric_limits<double>::infinity();
    }
    const double rn = scaled_residual_norm(m, u, r);
    return std::isfinite(rn) ? rn : std::numeric_limits<double>::infinity();
}

inline void fill_mu1_and_class(const Mesh& m, Solution& s, bool compute_mu1) {
    s.classification =
        (sup_norm(s.field) < trivial_threshold(m)) ? SolutionClass::trivial : SolutionClass::positive;
    if (compute_mu1) {
        try {
            s.mu1 = linearized_stability(m, s.field, s.params);
        } catch (const std::domain_error&) {
            s.mu1 = std::numeric_limits<double>::quiet_NaN();
        }
    }
}

}  // namespace detail

/// Damped Newton iteration on the discrete weak form. Backtracks on the
/// residual norm with factor 1/2 down to 2^-20. When alpha = 0 and a boundary
/// value sinks below 1e-12 the boundary term is frozen at the previous
/// iterate for that step, since the map u^q has no derivative there.
inline Solution newton_solve(const MeshPtr& mp, const Field& u0, const Params& prm,
                             const NewtonOptions& opts = {}) {
    const Mesh& m = *mp;
    check_same_mesh(m, u0);
    prm.validate();

    Field u = u0;
    Field r = residual(m, u, prm);  // domain errors on the seed propagate
    double rn = scaled_residual_norm(m, u, r);

    long it = 0;
    while (rn > opts.tol) {
        if (it >= opts.max_iter)
            throw SolveFailure("newton_solve: max iterations exceeded", u, rn,
                               static_cast<int>(it));
        ++it;

        const bool freeze_boundary =
            prm.alpha == 0.0 && prm.lambda > 0.0 && detail::boundary_min(m, u) < 1e-12;
        Tridiag J;
        if (freeze_boundary) {
            Params neumann = prm;
            neumann.lambda = 0.0;
            J = jacobian(m, u, neumann);
        } else {
            J = jacobian(m, u, prm);
        }
        std::vector<double> dir = solve_tridiag(J, r.v);

        double t = 1.0;
        bool accepted = false;
        Field trial = u, rt{u.mesh, {}};
        while (t >= opts.damping_floor) {
            for (std::size_t i = 0; i < u.size(); ++i) trial.v[i] = u.v[i] - t * dir[i];
            const double rtn = detail::try_residual(m, trial, prm, rt);
            if (rtn < rn * (1.0 - 1e-4 * t)) {
                u = trial;
                r = rt;
                rn = rtn;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted)
            throw SolveFailure("newton_solve: line search failed", u, rn, static_cast<int>(it));
    }

    Solution s;
    s.field = std::move(u);
    s.params = prm;
    s.residual_norm = rn;
    s.iterations = it;
    detail::fill_mu1_and_class(m, s, opts.compute_mu1);
    return s;
}

/// The explicit subsolution eps*(phi_Omega + eps^tau); its minimum over the
/// mesh is eps^{1+tau}, attained on the boundary where phi_Omega vanishes.
inline Field build_subsolution(const MeshPtr& mp, const Field& phi, double eps, double tau) {
    check_same_mesh(*mp, phi);
    if (!(eps > 0.0 && tau > 0.0)) throw std::invalid_argument("build_subsolution: eps, tau > 0");
    Field out = make_field(mp);
    const double shift = std::pow(eps, tau);
    for (std::size_t i = 0; i < out.size(); ++i) out.v[i] = eps * (phi.v[i] + shift);
    return out;
}

/// Constants certifying phi_eps as a subsolution for every lambda in
/// [0, Lambda], valid for pq > 1 and (1-q)/q < tau < p-1. eps_bar_1 bounds
/// come from the bulk inequality, eps_bar_2 from the boundary flux against
/// c1 = min(-d phi_Omega/d nu); both are set to 0.99x their strict suprema.
/// K and M are the monotonization constants for the sweep operator.
struct SubsolutionRecipe {
    double tau;
    double eps_bar;
    double eps_bar_1;
    double eps_bar_2;
    double c1;
    double K;
    double M;
    double Lambda;
};

inline SubsolutionRecipe subsolution_recipe(const MeshPtr& mp, double p, double q, double tau,
                                            double Lambda) {
    if (!(q > 0.0 && q < 1.0 && p > 1.0))
        throw std::invalid_argument("subsolution_recipe: need 0 < q < 1 < p");
    if (!(p * q > 1.0)) throw std::invalid_argument("subsolution_recipe: requires pq > 1");
    if (!((1.0 - q) / q < tau && tau < p - 1.0))
        throw std::invalid_argument("subsolution_recipe: tau out of ((1-q)/q, p-1)");
    if (!(Lambda > 0.0)) throw std::invalid_argument("subsolution_recipe: Lambda must be > 0");

    const EigenPair eig = dirichlet_principal(mp);
    double c1 = std::numeric_limits<double>::infinity();
    for (double f : eig.boundary_flux) c1 = std::min(c1, f);
    if (!(c1 > 0.0)) throw NumericFailure("subsolution_recipe: boundary flux not positive");
    const double maxphi = sup_norm(eig.func);

    SubsolutionRecipe r;
    r.tau = tau;
    r.Lambda = Lambda;
    r.c1 = c1;
    r.eps_bar_1 =
        0.99 * std::min(1.0, std::pow(1.0 / std::pow(1.0 + maxphi, p), 1.0 / (p - tau - 1.0)));
    r.eps_bar_2 = 0.99 * std::pow(c1 / Lambda, 1.0 / (q + tau * q - 1.0));
    r.eps_bar = std::min(r.eps_bar_1, r.eps_bar_2);
    r.K = p + 1.0;  // monotonizes K t + t - t^p on [0,1]
    const double floor = std::pow(r.eps_bar, 1.0 + tau);
    r.M = Lambda * q * std::pow(floor, q - 1.0) + 1.0;
    return r;
}

struct MonotoneOptions {
    double tol = 1e-10;
    long max_sweeps = 200000;
    int stall_probe = 30;     // sweeps between stall measurements
    double stall_rate = 0.99;
    bool compute_mu1 = true;
};

struct MonotoneResult {
    Solution minimal;
    Solution maximal;
    long iterations = 0;  // total sweeps, both directions
};

namespace detail {

constexpr double kOrderSlack = 1e-12;
constexpr double kSignSlack = 1e-10;

inline bool is_discrete_subsolution(const Mesh& m, const Field& u, const Params& prm,
                                    double slack = kSignSlack) {
    Field r{u.mesh, {}};
    if (!std::isfinite(try_residual(m, u, prm, r))) return false;
    for (double x : r.v)
        if (x > slack) return false;
    return true;
}

inline bool is_discrete_supersolution(const Mesh& m, const Field& u, const Params& prm,
                                      double slack = kSignSlack) {
    Field r{u.mesh, {}};
    if (!std::isfinite(try_residual(m, u, prm, r))) return false;
    for (double x : r.v)
        if (x < -slack) return false;
    return true;
}

// A scaled residual below tol is necessary but not sufficient near resonance:
// states in the flat valley along the trivial line have microscopic residuals
// while sitting far from any solution. Confirm with the Newton increment,
// which must be small relative to the state itself.
inline bool newton_step_small(const Mesh& m, const Field& u, const Params& prm, const Field& r) {
    const double us = sup_norm(u);
    if (us == 0.0) return true;
    try {
        Tridiag J;
        if (prm.alpha == 0.0 && prm.lambda > 0.0 && boundary_min(m, u) < 1e-12) {
            Params neumann = prm;
            neumann.lambda = 0.0;
            J = jacobian(m, u, neumann);
        } else {
            J = jacobian(m, u, prm);
        }
        const std::vector<double> step = solve_tridiag(J, r.v);
        double ds = 0.0;
        for (double x : step) ds = std::max(ds, std::abs(x));
        return ds <= 1e-6 * us;
    } catch (const NumericFailure&) {
        return true;  // singular linearization: fall back to the residual test
    } catch (const std::domain_error&) {
        return true;
    }
}

inline bool leq(const Field& a, const Field& b, double slack) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a.v[i] > b.v[i] + slack) return false;
    return true;
}

// upper bound for lambda * g'(.) over [bmin, 1]; adaptive in the current
// iterate so the boundary relaxation does not freeze while iterates are far
// from the subsolution floor
inline double boundary_relax_coeff(const Params& prm, double bmin) {
    if (prm.lambda <= 0.0) return 1.0;
    double slope;
    if (prm.alpha == 0.0) {
        slope = prm.q * std::pow(std::max(bmin, 1e-300), prm.q - 1.0);
    } else {
        slope = std::max(boundary_map_d(std::max(bmin, 0.0), prm.alpha, prm.q),
                         std::pow(prm.alpha, prm.q - 1.0));
    }
    return prm.lambda * slope * 1.01 + 1.0;
}

struct SweepWorkspace {
    Tridiag op;
    Field r;
};

// one monotone sweep u <- u - OP^{-1} residual(u) with
// OP = A + K diag(w) + Mb diag(bw); returns the new iterate
inline Field monotone_sweep(const Mesh& m, const Field& u, const Params& prm, double K, double Mb,
                            SweepWorkspace& ws) {
    ws.op = m.stiffness;
    for (std::size_t i = 0; i < ws.op.size(); ++i)
        ws.op.diag[i] += K * m.quad_w[i] + Mb * m.bdry_w[i];
    ws.r = residual(m, u, prm);
    std::vector<double> step = solve_tridiag(ws.op, ws.r.v);
    Field out = u;
    for (std::size_t i = 0; i < out.size(); ++i) out.v[i] -= step[i];
    return out;
}

enum class Side { increasing, decreasing };

struct SideState {
    Field u;
    long sweeps = 0;
    bool done = false;
};

// Solve <residual(u + c*phi), phi> = 0 for the amplitude c along the
// principal Dirichlet eigenfunction. At resonance the iteration crawls along
// this one flat direction; jumping to the projected root and polishing from
// there is what makes the large-lambda solves tractable.
inline std::optional<Field> amplitude_jump(const Mesh& m, const Field& u, const Params& prm,
                                           const Field& phi, Side side, double cap) {
    auto project = [&](const Field& state) -> std::optional<double> {
        Field r{state.mesh, {}};
        if (!std::isfinite(try_residual(m, state, prm, r)))
            return std::nullopt;
        double s = 0.0;
        for (std::size_t i = 0; i < r.size(); ++i) s += r.v[i] * phi.v[i];
        return s;
    };
    const double dir = (side == Side::increasing) ? 1.0 : -1.0;
    const auto f0 = project(u);
    if (!f0) return std::nullopt;
    Field trial = u;
    auto at = [&](double c) -> std::optional<double> {
        for (std::size_t i = 0; i < u.size(); ++i) trial.v[i] = u.v[i] + dir * c * phi.v[i];
        return project(trial);
    };
    double lo = 0.0, hi = m.h * m.h;
    bool bracketed = false;
    for (int k = 0; k < 80 && hi <= cap; ++k) {
        const auto fhi = at(hi);
        if (!fhi) break;
        if ((*fhi > 0.0) != (*f0 > 0.0)) {
            bracketed = true;
            break;
        }
        lo = hi;
        hi *= 2.0;
    }
    if (!bracketed) return std::nullopt;
    for (int k = 0; k < 70; ++k) {
        const double mid = 0.5 * (lo + hi);
        const auto fm = at(mid);
        if (!fm) return std::nullopt;
        if ((*fm > 0.0) == (*f0 > 0.0))
            lo = mid;
        else
            hi = mid;
    }
    at(0.5 * (lo + hi));
    return trial;
}

// extrapolate along the last monotone increment as far as the sub/super
// residual sign certificate allows; a cheap escape from the marginal
// contraction the resonant problems exhibit near the trivial state
inline bool certified_extrapolation(const Mesh& m, Field& u, const Field& incr,
                                    const Params& prm, Side side, const Field& other_bound) {
    double best = 0.0;
    Field trial = u;
    for (double w = 1.0; w <= 1.2e18; w *= 2.0) {
        for (std::size_t i = 0; i < u.size(); ++i) trial.v[i] = u.v[i] + w * incr.v[i];
        const bool inside = (side == Side::increasing) ? leq(trial, other_bound, kOrderSlack)
                                                       : leq(other_bound, trial, kOrderSlack);
        if (!inside) break;
        const bool cert = (side == Side::increasing)
                              ? is_discrete_subsolution(m, trial, prm, 1e-12)
                              : is_discrete_supersolution(m, trial, prm, 1e-12);
        if (!cert) break;
        best = w;
    }
    if (best < 8.0) return false;  // below that, plain sweeps do as well
    for (std::size_t i = 0; i < u.size(); ++i) u.v[i] += best * incr.v[i];
    return true;
}

}  // namespace detail

/// Monotone sub/supersolution iteration. The increasing sequence from `sub`
/// converges to the minimal solution of the interval [sub, super], the
/// decreasing sequence from `super` to the maximal one. Each sweep solves
/// (-Lap + K + M d/dnu-relaxation) u_{k+1} = monotonized right side, i.e.
/// u_{k+1} = u_k - OP^{-1} residual(u_k), and is checked for ordering.
/// Near resonance the contraction degenerates; a stalled side first tries a
/// certified extrapolation along its increment and then a Newton polish that
/// is only accepted inside the current monotone bracket.
inline MonotoneResult monotone_iterate(const MeshPtr& mp, const Field& sub, const Field& super,
                                       const Params& prm, const SubsolutionRecipe& recipe,
                                       const MonotoneOptions& opts = {}) {
    const Mesh& m = *mp;
    check_same_mesh(m, sub);
    check_same_mesh(m, super);
    prm.validate();
    if (prm.lambda > recipe.Lambda * (1.0 + 1e-12))
        throw std::invalid_argument("monotone_iterate: lambda exceeds the recipe's Lambda");
    if (!detail::leq(sub, super, detail::kOrderSlack))
        throw std::invalid_argument("monotone_iterate: sub must be <= super nodewise");
    if (!detail::is_discrete_subsolution(m, sub, prm))
        throw std::invalid_argument("monotone_iterate: sub fails the residual sign check");
    if (!detail::is_discrete_supersolution(m, super, prm))
        throw std::invalid_argument("monotone_iterate: super fails the residual sign check");

    const double K =
        std::max(recipe.K, prm.p * std::pow(std::max(1.0, sup_norm(super)), prm.p - 1.0) + 1.0);
    NewtonOptions polish_opts;
    polish_opts.tol = opts.tol;
    polish_opts.compute_mu1 = false;

    std::optional<Field> phi_dir;  // valley direction, computed on first stall
    auto valley_direction = [&]() -> const Field& {
        if (!phi_dir) phi_dir = dirichlet_principal(mp).func;
        return *phi_dir;
    };

    long total_sweeps = 0;

    auto run_side = [&](detail::Side side) -> std::pair<Field, long> {
        Field u = (side == detail::Side::increasing) ? sub : super;
        const Field& bound = (side == detail::Side::increasing) ? super : sub;
        detail::SweepWorkspace ws;
        Field incr = make_field(mp);
        long sweeps = 0;
        double gain_at_probe = -1.0;
        int probe = opts.stall_probe;
        int since_probe = 0;
        double last_gain = 0.0;

        while (true) {
            Field r = residual(m, u, prm);
            if (scaled_residual_norm(m, u, r) <= opts.tol &&
                detail::newton_step_small(m, u, prm, r))
                return {u, sweeps};
            if (sweeps >= opts.max_sweeps)
                throw MonotonicityFailure("monotone_iterate: sweep budget exhausted",
                                          static_cast<int>(sweeps));

            const double order_slack = 1e-9 * (1.0 + sup_norm(u));
            const double Mb = detail::boundary_relax_coeff(prm, detail::boundary_min(m, u));
            double Mb_try = Mb;
            Field next{u.mesh, {}};
            bool ordered = false;
            for (int esc = 0; esc < 12; ++esc) {
                next = detail::monotone_sweep(m, u, prm, K, Mb_try, ws);
                ordered = (side == detail::Side::increasing)
                              ? detail::leq(u, next, order_slack)
                              : detail::leq(next, u, order_slack);
                // keep the boundary inside the domain of u -> u^q
                if (ordered && prm.lambda > 0.0) {
                    const double bmin_next = detail::boundary_min(m, next);
                    ordered = prm.alpha == 0.0 ? bmin_next >= 0.0 : bmin_next > -0.5 * prm.alpha;
                }
                if (ordered) break;
                Mb_try *= 10.0;
            }
            if (!ordered)
                throw MonotonicityFailure("monotone_iterate: ordering lost (K or M too small)",
                                          static_cast<int>(sweeps));
            ++sweeps;
            ++since_probe;

            last_gain = 0.0;
            for (std::size_t i = 0; i < u.size(); ++i) {
                incr.v[i] = next.v[i] - u.v[i];
                last_gain = std::max(last_gain, std::abs(incr.v[i]));
            }
            u = next;

            if (since_probe >= probe) {
                const bool stalled =
                    gain_at_probe >= 0.0 &&
                    (last_gain == 0.0 ||
                     std::pow(last_gain / gain_at_probe, 1.0 / probe) >= opts.stall_rate);
                gain_at_probe = last_gain;
                since_probe = 0;
                if (stalled) {
                    const double slack = 1e-9 * (1.0 + sup_norm(u));
                    auto guarded_polish = [&](const Field& seed) -> std::optional<Solution> {
                        try {
                            Solution cand = newton_solve(mp, seed, prm, polish_opts);
                            bool ok = (side == detail::Side::increasing)
                                          ? detail::leq(u, cand.field, slack) &&
                                                detail::leq(cand.field, super, slack)
                                          : detail::leq(cand.field, u, slack) &&
                                                detail::leq(sub, cand.field, slack);
                            if (ok) {
                                Field rc = residual(m, cand.field, prm);
                                ok = detail::newton_step_small(m, cand.field, prm, rc);
                            }
                            if (ok) return cand;
                        } catch (const NumericFailure&) {
                        }
                        return std::nullopt;
                    };
                    const double cap = 2.0 * (1.0 + sup_norm(super));
                    if (auto jumped =
                            detail::amplitude_jump(m, u, prm, valley_direction(), side, cap)) {
                        if (auto cand = guarded_polish(*jumped))
                            return {cand->field, sweeps + cand->iterations};
                    }
                    if (detail::certified_extrapolation(m, u, incr, prm, side, bound)) {
                        gain_at_probe = -1.0;
                        continue;
                    }
                    if (auto cand = guarded_polish(u)) return {cand->field, sweeps + cand->iterations};
                    probe = std::min(probe * 2, 16 * opts.stall_probe);
                }
            }
        }
    };

    auto [umin, it_min] = run_side(detail::Side::increasing);
    auto [umax, it_max] = run_side(detail::Side::decreasing);
    total_sweeps = it_min + it_max;

    if (!detail::leq(umin, umax, 1e-8 * (1.0 + sup_norm(umax))))
        throw MonotonicityFailure("monotone_iterate: minimal exceeds maximal",
                                  static_cast<int>(total_sweeps));

    MonotoneResult out;
    out.iterations = total_sweeps;
    for (auto side : {detail::Side::increasing, detail::Side::decreasing}) {
        Solution s;
        s.field = (side == detail::Side::increasing) ? std::move(umin) : std::move(umax);
        s.params = prm;
        Field r = residual(m, s.field, prm);
        s.residual_norm = scaled_residual_norm(m, s.field, r);
        s.iterations = (side == detail::Side::increasing) ? it_min : it_max;
        detail::fill_mu1_and_class(m, s, opts.compute_mu1);
        if (side == detail::Side::increasing)
            out.minimal = std::move(s);
        else
            out.maximal = std::move(s);
    }
    return out;
}

}  // namespace harvest
