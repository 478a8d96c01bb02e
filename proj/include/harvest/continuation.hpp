#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "harvest/forms.hpp"
#include "harvest/mesh.hpp"
#include "harvest/newton.hpp"
#include "harvest/params.hpp"
#include "harvest/spectra.hpp"

namespace harvest {

enum class EndpointClass { trivial_line, neumann_state, fold_turnback, range_exhausted };

inline const char* to_string(EndpointClass c) {
    switch (c) {
        case EndpointClass::trivial_line: return "trivial-line";
        case EndpointClass::neumann_state: return "neumann-state";
        case EndpointClass::fold_turnback: return "fold-turnback";
        default: return "range-exhausted";
    }
}

struct BranchPoint {
    double lambda = 0.0;
    Field field;
    double sup_norm = 0.0;
    double h1_norm = 0.0;
    double s_comp = 0.0;  // H1 component along phi_Omega
    double energy = 0.0;  // E_beta
    double mu1 = std::numeric_limits<double>::quiet_NaN();
    double residual_norm = 0.0;
};

struct Fold {
    int index;
    double lambda;
};

struct Branch {
    std::vector<BranchPoint> points;
    Params base;  // lambda varies along the branch
    double lambda_max = 0.0;
    EndpointClass start_class = EndpointClass::neumann_state;
    EndpointClass end_class = EndpointClass::range_exhausted;
    std::vector<Fold> folds;
    std::string diagnostic;  // empty when the trace ended as predicted
    double trivial_thresh = 0.0;
};

struct Tangent {
    std::vector<double> du;
    double dlambda = 0.0;
};

struct SeedPoint {
    BranchPoint point;
    Tangent tangent;
};

struct ContinuationOptions {
    double step = 1e-2;  // arclength step in the (lambda, H1) metric
    double min_step = 1e-7;
    double max_step = 1.0;
    int max_points = 4000;
    double lambda_cap = 50.0;
    double tol = 1e-10;
    int max_corrector = 10;
    int max_halvings = 5;
    double grow = 1.3;
    int grow_after = 4;
    bool compute_mu1 = true;
};

/// Sign changes of the lambda-increment along the branch; the fold locations
/// are refined by the vertex of the parabola through the three neighbours.
/// The largest fold lambda serves as the empirical existence bound.
inline std::vector<Fold> detect_folds(const Branch& br) {
    std::vector<Fold> folds;
    const auto& pts = br.points;
    if (pts.size() < 3) return folds;
    for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
        const double gp = pts[i].lambda - pts[i - 1].lambda;
        const double gn = pts[i + 1].lambda - pts[i].lambda;
        if (std::abs(gp) < 1e-14 || std::abs(gn) < 1e-14 || gp * gn >= 0.0) continue;
        // arclength positions in the (lambda, h1) plane
        const double s0 = 0.0;
        const double s1 = std::hypot(gp, pts[i].h1_norm - pts[i - 1].h1_norm);
        const double s2 = s1 + std::hypot(gn, pts[i + 1].h1_norm - pts[i].h1_norm);
        const double y0 = pts[i - 1].lambda, y1 = pts[i].lambda, y2 = pts[i + 1].lambda;
        const double d1 = (y1 - y0) / (s1 - s0), d2 = (y2 - y1) / (s2 - s1);
        const double curv = (d2 - d1) / (s2 - s0);
        double lam = y1;
        if (curv != 0.0) {
            const double sv = 0.5 * (s0 + s1) - 0.5 * d1 / curv;
            const double t0 = 0.5 * (s0 + s1);
            lam = y0 + d1 * (sv - s0) + curv * (sv - t0) * (sv - s1 + s1 - s1);
            // evaluate the Newton-form quadratic at the vertex
            lam = y0 + d1 * (sv - s0) + curv * (sv - s0) * (sv - s1);
            lam = std::clamp(lam, std::min({y0, y1, y2}), std::max({y0, y1, y2}) +
                                                              0.5 * std::abs(y2 - y0) + 1e-12);
        }
        folds.push_back(Fold{static_cast<int>(i), lam});
    }
    return folds;
}

namespace detail {

inline std::vector<double> gram_apply(const Mesh& m, const std::vector<double>& v) {
    std::vector<double> out = m.stiffness.mul(v);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += m.quad_w[i] * v[i];
    return out;
}

inline double product_norm(const Mesh& m, const std::vector<double>& du, double dl) {
    Field f{nullptr, du};
    double g = m.stiffness.quad(du);
    for (std::size_t i = 0; i < du.size(); ++i) g += m.quad_w[i] * du[i] * du[i];
    return std::sqrt(g + dl * dl);
}

inline void normalize_tangent(const Mesh& m, Tangent& t) {
    const double nrm = product_norm(m, t.du, t.dlambda);
    if (!(nrm > 0.0)) throw NumericFailure("continuation: zero tangent");
    for (auto& x : t.du) x /= nrm;
    t.dlambda /= nrm;
}

struct CorrectorResult {
    bool ok = false;
    Field u;
    double lambda = 0.0;
    double residual_norm = 0.0;
};

// Newton on the bordered system [J  dres/dlam; (G t_u)^T  t_lam], the border
// row pinning the step onto the hyperplane through the predictor orthogonal
// to the tangent in the product metric.
inline CorrectorResult correct_arclength(const MeshPtr& mp, const Params& base, const Field& upred,
                                         double lpred, const Tangent& tan,
                                         const ContinuationOptions& opts) {
    const Mesh& m = *mp;
    CorrectorResult res;
    Field u = upred;
    double lam = lpred;
    const std::vector<double> border_c = gram_apply(m, tan.du);

    for (int it = 0; it < opts.max_corrector; ++it) {
        Params prm = base;
        prm.lambda = lam;
        Field r{u.mesh, {}};
        const double rn = harvest::detail::try_residual(m, u, prm, r);
        if (!std::isfinite(rn)) return res;
        if (rn <= opts.tol) {
            res.ok = true;
            res.u = std::move(u);
            res.lambda = lam;
            res.residual_norm = rn;
            return res;
        }

        Tridiag J;
        try {
            if (prm.alpha == 0.0 && prm.lambda > 0.0 &&
                harvest::detail::boundary_min(m, u) < 1e-12) {
                Params frozen = prm;
                frozen.lambda = 0.0;
                J = jacobian(m, u, frozen);
            } else {
                J = jacobian(m, u, prm);
            }
        } catch (const std::domain_error&) {
            return res;
        }

        std::vector<double> dldr(m.size(), 0.0);
        try {
            for (int b : m.boundary) {
                const std::size_t i = static_cast<std::size_t>(b);
                dldr[i] = m.bdry_w[i] * boundary_map(u.v[i], prm.alpha, prm.q);
            }
        } catch (const std::domain_error&) {
            return res;
        }

        double N = tan.dlambda * (lam - lpred);
        for (std::size_t i = 0; i < u.size(); ++i) N += border_c[i] * (u.v[i] - upred.v[i]);

        std::vector<double> rhs(r.v);
        for (auto& x : rhs) x = -x;
        std::vector<double> du;
        double dl = 0.0;
        try {
            solve_bordered(J, dldr, border_c, tan.dlambda, rhs, -N, du, dl);
        } catch (const NumericFailure&) {
            return res;
        }
        for (std::size_t i = 0; i < u.size(); ++i) u.v[i] += du[i];
        lam += dl;
        if (!std::isfinite(lam)) return res;
    }
    return res;
}

}  // namespace detail

/// Full per-point diagnostics: norms, phi_Omega component, energy, stability.
inline BranchPoint make_branch_point(const MeshPtr& mp, double lambda, Field u,
                                     const Params& base, const Field& phi,
                                     bool compute_mu1 = true) {
    const Mesh& m = *mp;
    BranchPoint bp;
    bp.lambda = lambda;
    Params prm = base;
    prm.lambda = lambda;
    Field r{u.mesh, {}};
    bp.residual_norm = harvest::detail::try_residual(m, u, prm, r);
    const Norms ns = norms(m, u);
    bp.sup_norm = ns.sup;
    bp.h1_norm = ns.h1;
    bp.s_comp = h1_inner(m, u, phi);
    bp.energy = energy(m, u, base.beta);
    if (compute_mu1) {
        try {
            bp.mu1 = linearized_stability(m, u, prm);
        } catch (const std::domain_error&) {
        }
    }
    bp.field = std::move(u);
    return bp;
}

/// Branch point and tangent at the Neumann state (0, beta^{1/(p-1)}), the
/// constant from which the positive branch emanates at lambda = 0. The
/// tangent solves J du = -dres/dlambda; its du is nonpositive nodewise.
inline SeedPoint start_from_neumann(const MeshPtr& mp, const Params& prm0) {
    const Mesh& m = *mp;
    prm0.validate();
    if (prm0.lambda != 0.0)
        throw std::invalid_argument("start_from_neumann: requires lambda = 0");
    const double ustar = std::pow(prm0.beta, 1.0 / (prm0.p - 1.0));
    Field u = make_field(mp, ustar);

    const double mu1 = linearized_stability(m, u, prm0);
    if (!(mu1 > 0.0))
        throw NumericFailure("start_from_neumann: constant state is degenerate");

    Tridiag J = jacobian(m, u, prm0);
    std::vector<double> b(m.size(), 0.0);
    for (int bi : m.boundary) {
        const std::size_t i = static_cast<std::size_t>(bi);
        b[i] = m.bdry_w[i] * boundary_map(ustar, prm0.alpha, prm0.q);
    }
    std::vector<double> du = solve_tridiag(J, b);
    Tangent t;
    t.du.resize(du.size());
    for (std::size_t i = 0; i < du.size(); ++i) t.du[i] = -du[i];
    t.dlambda = 1.0;
    detail::normalize_tangent(m, t);

    const EigenPair phi = dirichlet_principal(mp);
    SeedPoint sp;
    sp.point = make_branch_point(mp, 0.0, std::move(u), prm0, phi.func);
    sp.tangent = std::move(t);
    return sp;
}

/// Secant predictor / bordered Newton corrector arclength trace. Terminates
/// on a lambda < 0 crossing (re-solved at lambda = 0 exactly), on the sup
/// norm falling below the trivial threshold 10 h^2, on lambda_cap, or on the
/// point budget; endpoints are classified accordingly.
inline Branch trace_branch(const MeshPtr& mp, const Params& base, const BranchPoint& seed,
                           Tangent tangent, const ContinuationOptions& opts = {},
                           EndpointClass start_class = EndpointClass::neumann_state) {
    const Mesh& m = *mp;
    base.validate_shape();
    if (!(seed.residual_norm <= 10.0 * opts.tol))
        throw std::invalid_argument("trace_branch: seed is not converged");
    if (sup_norm(seed.field) < trivial_threshold(m) && detail::product_norm(m, tangent.du, tangent.dlambda) == 0.0)
        throw std::invalid_argument("trace_branch: trivial seed with zero tangent");

    const EigenPair phi = dirichlet_principal(mp);
    const double thresh = trivial_threshold(m);

    Branch br;
    br.base = base;
    br.trivial_thresh = thresh;
    br.start_class = start_class;
    br.points.push_back(seed);

    detail::normalize_tangent(m, tangent);
    double step = opts.step;
    int clean = 0;
    bool armed = seed.sup_norm > 3.0 * thresh;
    bool done = false;

    while (!done) {
        if (static_cast<int>(br.points.size()) >= opts.max_points) {
            br.end_class = EndpointClass::range_exhausted;
            break;
        }
        const BranchPoint& last = br.points.back();

        detail::CorrectorResult cr;
        int halvings = 0;
        for (;;) {
            Field pred = last.field;
            for (std::size_t i = 0; i < pred.size(); ++i) pred.v[i] += step * tangent.du[i];
            const double lpred = last.lambda + step * tangent.dlambda;
            cr = detail::correct_arclength(mp, base, pred, lpred, tangent, opts);
            if (cr.ok) break;
            step *= 0.5;
            if (++halvings > opts.max_halvings || step < opts.min_step) break;
        }
        if (!cr.ok) {
            br.end_class = EndpointClass::range_exhausted;
            br.diagnostic = "corrector failed after " + std::to_string(halvings) +
                            " step halvings; partial branch";
            break;
        }

        if (cr.lambda < 0.0) {
            // crossing the lambda = 0 axis: land exactly on it
            Params pz = base;
            pz.lambda = 0.0;
            NewtonOptions nopt;
            nopt.tol = opts.tol;
            nopt.compute_mu1 = false;
            try {
                Solution sz = newton_solve(mp, cr.u, pz, nopt);
                br.points.push_back(
                    make_branch_point(mp, 0.0, sz.field, base, phi.func, opts.compute_mu1));
            } catch (const NumericFailure&) {
                br.diagnostic = "lambda = 0 clamp solve failed";
            }
            const Field& endf = br.points.back().field;
            br.end_class = (sup_norm(endf) < thresh) ? EndpointClass::trivial_line
                                                     : EndpointClass::neumann_state;
            break;
        }

        br.points.push_back(
            make_branch_point(mp, cr.lambda, cr.u, base, phi.func, opts.compute_mu1));
        const BranchPoint& np = br.points.back();

        if (np.sup_norm > 3.0 * thresh) armed = true;
        if (armed && np.sup_norm < thresh) {
            br.end_class = EndpointClass::trivial_line;
            done = true;
        } else if (np.lambda > opts.lambda_cap) {
            br.end_class = EndpointClass::range_exhausted;
            done = true;
        } else if (br.points.size() > 8) {
            // loop closure: returned to a previously traced neighbourhood
            for (std::size_t i = 0; i + 8 < br.points.size(); ++i) {
                const double d = std::hypot(br.points[i].lambda - np.lambda,
                                            br.points[i].h1_norm - np.h1_norm);
                if (d < 0.25 * step) {
                    br.end_class = EndpointClass::fold_turnback;
                    done = true;
                    break;
                }
            }
        }

        // secant tangent and step adaptation
        const std::size_t k = br.points.size() - 1;
        Tangent tnew;
        tnew.du.resize(m.size());
        for (std::size_t i = 0; i < m.size(); ++i)
            tnew.du[i] = br.points[k].field.v[i] - br.points[k - 1].field.v[i];
        tnew.dlambda = br.points[k].lambda - br.points[k - 1].lambda;
        try {
            detail::normalize_tangent(m, tnew);
            tangent = std::move(tnew);
        } catch (const NumericFailure&) {
            // repeated point; keep the previous tangent
        }
        if (halvings == 0) {
            if (++clean >= opts.grow_after) {
                step = std::min(step * opts.grow, opts.max_step);
                clean = 0;
            }
        } else {
            clean = 0;
        }
    }

    br.lambda_max = 0.0;
    for (const auto& p : br.points) br.lambda_max = std::max(br.lambda_max, p.lambda);
    br.folds = detect_folds(br);
    return br;
}

/// The regularized continuum: bifurcates from the trivial line at
/// (lambda_{alpha,beta}, 0), taken off along the Steklov eigenfunction with
/// amplitude 10 h^2 (above scheme noise), and traced until it meets the
/// lambda = 0 axis at the Neumann constant beta^{1/(p-1)}. A mismatched
/// endpoint is reported in Branch::diagnostic, not thrown.
inline Branch trace_regularized_continuum(const MeshPtr& mp, double alpha, double beta, double p,
                                          double q, const ContinuationOptions& opts = {}) {
    const Mesh& m = *mp;
    if (!(alpha > 0.0))
        throw std::invalid_argument("trace_regularized_continuum: alpha must be > 0");
    if (!(beta > 0.0 && beta < 1.0))
        throw std::invalid_argument("trace_regularized_continuum: need 0 < beta < 1");

    const EigenPair st = steklov_principal(mp, beta);  // also enforces beta < beta_Omega
    const double lam0 = st.value * std::pow(alpha, 1.0 - q);
    Params base{p, q, lam0, alpha, beta};
    base.validate();

    const EigenPair phi = dirichlet_principal(mp);
    const double delta = 10.0 * m.h * m.h;

    // take-off corrector: amplitude along phi_beta pinned, lambda free
    Field u0 = make_field(mp);
    for (std::size_t i = 0; i < u0.size(); ++i) u0.v[i] = delta * st.func.v[i];
    Tangent pin;
    pin.du = st.func.v;
    pin.dlambda = 0.0;
    detail::CorrectorResult take =
        detail::correct_arclength(mp, base, u0, lam0, pin, opts);
    if (!take.ok)
        throw NumericFailure("trace_regularized_continuum: take-off corrector failed");

    BranchPoint p1 = make_branch_point(mp, take.lambda, take.u, base, phi.func, opts.compute_mu1);
    Tangent t;
    t.du.resize(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) t.du[i] = p1.field.v[i];
    t.dlambda = p1.lambda - lam0;
    detail::normalize_tangent(m, t);

    Branch br = trace_branch(mp, base, p1, t, opts, EndpointClass::trivial_line);

    // prepend the bifurcation point itself
    BranchPoint p0 = make_branch_point(mp, lam0, make_field(mp), base, phi.func, opts.compute_mu1);
    br.points.insert(br.points.begin(), std::move(p0));
    br.folds = detect_folds(br);
    br.lambda_max = std::max(br.lambda_max, lam0);

    if (br.end_class == EndpointClass::neumann_state) {
        const double target = std::pow(beta, 1.0 / (p - 1.0));
        double dev = 0.0;
        for (double x : br.points.back().field.v) dev = std::max(dev, std::abs(x - target));
        if (dev > 1e-6 || br.points.back().lambda > 1e-3)
            br.diagnostic = "topology-failure: lambda = 0 endpoint is not the Neumann constant";
    } else {
        br.diagnostic = "topology-failure: branch did not reach the lambda = 0 axis (" +
                        std::string(to_string(br.end_class)) + ")";
    }
    return br;
}

struct ConvergenceReport {
    std::vector<double> hausdorff;  // consecutive pairs, in the chosen plane
    bool converged = false;
    bool diverged = false;
    std::size_t limit_index = 0;
};

enum class BranchMetric { sup, h1 };

namespace detail {

inline std::vector<std::pair<double, double>> resample_polyline(const Branch& br,
                                                                BranchMetric metric, int npts) {
    std::vector<std::pair<double, double>> raw;
    raw.reserve(br.points.size());
    for (const auto& p : br.points)
        raw.emplace_back(p.lambda, metric == BranchMetric::sup ? p.sup_norm : p.h1_norm);
    std::vector<double> arc(raw.size(), 0.0);
    for (std::size_t i = 1; i < raw.size(); ++i)
        arc[i] = arc[i - 1] + std::hypot(raw[i].first - raw[i - 1].first,
                                         raw[i].second - raw[i - 1].second);
    const double total = arc.back();
    std::vector<std::pair<double, double>> out(static_cast<std::size_t>(npts));
    std::size_t seg = 0;
    for (int k = 0; k < npts; ++k) {
        const double s = total * k / (npts - 1);
        while (seg + 2 < raw.size() && arc[seg + 1] < s) ++seg;
        const double len = arc[seg + 1] - arc[seg];
        const double t = len > 0.0 ? (s - arc[seg]) / len : 0.0;
        out[static_cast<std::size_t>(k)] = {
            raw[seg].first + t * (raw[seg + 1].first - raw[seg].first),
            raw[seg].second + t * (raw[seg + 1].second - raw[seg].second)};
    }
    return out;
}

inline double hausdorff_distance(const std::vector<std::pair<double, double>>& P,
                                 const std::vector<std::pair<double, double>>& Q) {
    auto one_sided = [](const auto& A, const auto& B) {
        double worst = 0.0;
        for (const auto& a : A) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& b : B)
                best = std::min(best, std::hypot(a.first - b.first, a.second - b.second));
            worst = std::max(worst, best);
        }
        return worst;
    };
    return std::max(one_sided(P, Q), one_sided(Q, P));
}

}  // namespace detail

/// Hausdorff convergence of a monotone branch family (alpha -> 0+ or
/// beta -> 1-): polylines in the (lambda, norm) plane are resampled at 200
/// equal-arclength points; the family "converged" when the last distance is
/// below twice the continuation step. Non-decreasing distances raise the
/// divergence flag.
inline ConvergenceReport homotopy_limit(const std::vector<Branch>& branches,
                                        BranchMetric metric = BranchMetric::sup,
                                        double step = 1e-2) {
    if (branches.size() < 3)
        throw std::invalid_argument("homotopy_limit: need at least 3 branches");
    ConvergenceReport rep;
    std::vector<std::vector<std::pair<double, double>>> polys;
    polys.reserve(branches.size());
    for (const auto& b : branches) polys.push_back(detail::resample_polyline(b, metric, 200));
    for (std::size_t i = 0; i + 1 < polys.size(); ++i)
        rep.hausdorff.push_back(detail::hausdorff_distance(polys[i], polys[i + 1]));
    rep.converged = rep.hausdorff.back() <= 2.0 * step;
    for (std::size_t i = 0; i + 1 < rep.hausdorff.size(); ++i)
        if (rep.hausdorff[i + 1] >= rep.hausdorff[i]) rep.diverged = true;
    rep.limit_index = branches.size() - 1;
    return rep;
}

struct LambdaStarEstimate {
    std::vector<double> estimates;  // one per refinement level
    double mean = 0.0;
    double spread = 0.0;  // max - min
};

namespace detail {

// extrapolate the branch tail (lambda vs sup) to sup -> 0 by least squares
inline double tail_extrapolate(const Branch& br) {
    const auto& pts = br.points;
    const std::size_t n = pts.size();
    const std::size_t k = std::min<std::size_t>(6, n);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = n - k; i < n; ++i) {
        const double x = pts[i].sup_norm, y = pts[i].lambda;
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double det = k * sxx - sx * sx;
    if (std::abs(det) < 1e-300) return pts.back().lambda;
    const double intercept = (sxx * sy - sx * sxy) / det;
    return intercept;
}

}  // namespace detail

/// For pq = 1 the positive branch detaches from the trivial line at an
/// interior lambda* > 0. Each refinement level traces the branch from the
/// Neumann state through its fold down into the trivial threshold and
/// extrapolates the tail to sup -> 0; the spread across levels is the
/// self-consistency uncertainty.
inline LambdaStarEstimate estimate_lambda_star(const MeshPtr& mp, double p, double q,
                                               const ContinuationOptions& opts,
                                               const std::vector<int>& levels) {
    if (std::abs(p * q - 1.0) > 1e-12)
        throw std::invalid_argument("estimate_lambda_star: requires pq = 1");
    if (levels.empty()) throw std::invalid_argument("estimate_lambda_star: no levels");

    LambdaStarEstimate out;
    for (int n : levels) {
        MeshPtr mesh = build_mesh(mp->kind, mp->extent, n);
        Params prm{p, q, 0.0, 0.0, 1.0};
        SeedPoint seed = start_from_neumann(mesh, prm);
        ContinuationOptions o = opts;
        o.compute_mu1 = false;
        Branch br = trace_branch(mesh, prm, seed.point, seed.tangent, o);
        if (br.end_class != EndpointClass::trivial_line || br.points.back().lambda <= 0.0)
            throw NumericFailure(
                "estimate_lambda_star: branch did not classify as trivial-line at lambda > 0");
        const double est = detail::tail_extrapolate(br);
        if (!(est > 0.0) || est > br.lambda_max)
            throw NumericFailure("estimate_lambda_star: inconsistent tail extrapolation");
        out.estimates.push_back(est);
    }
    double lo = out.estimates[0], hi = out.estimates[0], sum = 0.0;
    for (double e : out.estimates) {
        lo = std::min(lo, e);
        hi = std::max(hi, e);
        sum += e;
    }
    out.mean = sum / static_cast<double>(out.estimates.size());
    out.spread = hi - lo;
    return out;
}

/// Indices i such that [lambda_i, lambda_{i+1}] brackets lambda_s; used by
/// the multiplicity and uniqueness witnesses.
inline std::vector<std::size_t> branch_crossings(const Branch& br, double lambda_s) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i + 1 < br.points.size(); ++i) {
        const double a = br.points[i].lambda, b = br.points[i + 1].lambda;
        if ((a <= lambda_s && lambda_s < b) || (b < lambda_s && lambda_s <= a)) out.push_back(i);
    }
    return out;
}

/// Fixed-lambda Newton solve seeded from the bracketing segment.
inline Solution solve_at_crossing(const MeshPtr& mp, const Branch& br, std::size_t i,
                                  double lambda_s, double tol = 1e-10) {
    const auto& a = br.points[i];
    const auto& b = br.points[i + 1];
    const double t = (b.lambda != a.lambda) ? (lambda_s - a.lambda) / (b.lambda - a.lambda) : 0.5;
    Field seed{a.field.mesh, std::vector<double>(a.field.size())};
    for (std::size_t k = 0; k < seed.size(); ++k)
        seed.v[k] = (1.0 - t) * a.field.v[k] + t * b.field.v[k];
    Params prm = br.base;
    prm.lambda = lambda_s;
    NewtonOptions nopt;
    nopt.tol = tol;
    return newton_solve(mp, seed, prm, nopt);
}

}  // namespace harvest
