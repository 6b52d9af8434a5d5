#pragma once

#include <functional>

#include "vortex/triple.hpp"

namespace vortex {

/// rho1 = i Lambda Omega^1 + phi phi^* - tau1, rho2 = i Lambda Omega^2 -
/// phi^* phi - tau2, evaluated at the triple's current metrics.
struct residual_report {
    field rho1, rho2;  // (0,0) endomorphism fields
    double sup = 0.0;
    cd trace_integral{0.0, 0.0};
};

namespace detail {

inline field phi_star(const triple& T) {
    return adjoint_hom(T.phi, T.h2, T.h1);
}

inline void add_identity(field& f, cd s) {
    for (int r = 0; r < f.rows; ++r) {
        cd* p = f.plane(r, r);
        for (int i = 0; i < f.nodes(); ++i) p[i] += s;
    }
}

/// Pointwise Hermitian part (K + K^dagger)/2.
inline field herm_part(const field& k) {
    field out = k;
    for (int p = 0; p < k.rows; ++p)
        for (int q = 0; q <= p; ++q) {
            const cd* a = k.plane(p, q);
            const cd* b = k.plane(q, p);
            cd* oa = out.plane(p, q);
            cd* ob = out.plane(q, p);
            for (int i = 0; i < k.nodes(); ++i) {
                cd v = 0.5 * (a[i] + std::conj(b[i]));
                oa[i] = v;
                ob[i] = std::conj(v);
            }
        }
    return out;
}

}  // namespace detail

inline residual_report vortex_residual(const triple& T) {
    const torus_base& X = *T.X;
    residual_report rep;
    field ps = detail::phi_star(T);
    rep.rho1 = X.i_lambda(curvature(X, T.e1, T.h1));
    rep.rho1 += mat_mul(T.phi, ps);
    detail::add_identity(rep.rho1, cd(-T.tau1, 0.0));
    rep.rho2 = X.i_lambda(curvature(X, T.e2, T.h2));
    rep.rho2 -= mat_mul(ps, T.phi);
    detail::add_identity(rep.rho2, cd(-T.tau2, 0.0));
    rep.sup = std::max(sup_norm(rep.rho1), sup_norm(rep.rho2));
    rep.trace_integral = X.integrate_trace(rep.rho1) + X.integrate_trace(rep.rho2);
    return rep;
}

/// The solver's nonlinear map evaluated at a pair of positive self-adjoint
/// automorphisms (psi1, psi2) relative to the triple's current metrics:
/// V_nu = psi_nu (i Lambda Omega~^nu +/- phi-terms - tau_nu), together with
/// the gauge integral m = integral of (tr psi1 + tr psi2).
struct f_map_value {
    field v1, v2;
    double m = 0.0;
};

inline f_map_value f_map(const triple& T, const field& psi1, const field& psi2) {
    const torus_base& X = *T.X;
    triple twisted = T;
    twisted.h1.h = mat_mul(T.h1.h, psi1);
    twisted.h2.h = mat_mul(T.h2.h, psi2);
    twisted.h1.validate();
    twisted.h2.validate();
    residual_report r = vortex_residual(twisted);
    f_map_value out;
    out.v1 = mat_mul(psi1, r.rho1);
    out.v2 = mat_mul(psi2, r.rho2);
    out.m = (X.integrate_trace(psi1) + X.integrate_trace(psi2)).real();
    return out;
}

/// Derivative of the map at psi = Id over the triple's current metrics:
/// L1 = d*d chi1 + phi(phi* chi1 - chi2 phi*),
/// L2 = d*d chi2 - (phi* chi1 - chi2 phi*) phi,
/// m  = integral of (tr chi1 + tr chi2).
struct df0_value {
    field l1, l2;
    double m = 0.0;
};

/// Context with the connection data reused across operator applications.
struct df0_context {
    const triple* T;
    field theta1, theta2, phi_star;

    explicit df0_context(const triple& t)
        : T(&t),
          theta1(chern_connection(*t.X, t.e1, t.h1)),
          theta2(chern_connection(*t.X, t.e2, t.h2)),
          phi_star(detail::phi_star(t)) {}

    field dstar_d(const field& chi, const field& theta, const field& beta) const {
        const torus_base& X = *T->X;
        field d = cov_z_endo(X, chi, theta, form_type::f10);
        field out = cov_zbar_endo(X, d, beta, form_type::f00);
        out *= cd(-1.0 / X.g(), 0.0);
        return out;
    }

    df0_value apply(const field& chi1, const field& chi2) const {
        const torus_base& X = *T->X;
        df0_value out;
        // phi* chi1 - chi2 phi*  : Hom(E1, E2)
        field a = mat_mul(phi_star, chi1);
        a -= mat_mul(chi2, phi_star);
        out.l1 = dstar_d(chi1, theta1, T->e1.beta);
        out.l1 += mat_mul(T->phi, a);
        out.l2 = dstar_d(chi2, theta2, T->e2.beta);
        out.l2 -= mat_mul(a, T->phi);
        out.m = (X.integrate_trace(chi1) + X.integrate_trace(chi2)).real();
        return out;
    }
};

inline df0_value linearized_df0(const triple& T, const field& chi1, const field& chi2,
                                double sa_tol = 1e-8) {
    field d1 = chi1 - adjoint_endo(chi1, T.h1);
    field d2 = chi2 - adjoint_endo(chi2, T.h2);
    if (sup_norm(d1) > sa_tol || sup_norm(d2) > sa_tol)
        throw error("linearized_df0: chi not self-adjoint");
    return df0_context(T).apply(chi1, chi2);
}

struct solve_config {
    double tol = 1e-9;         // sup-norm target for the residual
    int max_newton = 60;
    double cg_tol = 1e-11;     // relative CG tolerance floor
    int max_cg = 4000;
    double degenerate_pivot = 1e-10;
    bool record_trace = true;
};

enum class solve_status : int { converged, max_iterations, degenerate };

struct solve_result {
    hermitian_metric h1, h2;
    residual_report residual;
    solve_status status = solve_status::max_iterations;
    int newton_steps = 0;
    int cg_iterations = 0;
    double gauge_value = 0.0;
    double last_increment = 0.0;
    std::vector<double> residual_history;
    std::vector<double> trace_history;  // |trace integral| per iterate
    std::string note;
};

namespace detail {

struct kpair {
    field k1, k2;
};

inline double ip_flat(const torus_base& X, const kpair& a, const kpair& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.k1.data.size(); ++i)
        s += (a.k1.data[i] * std::conj(b.k1.data[i])).real();
    for (std::size_t i = 0; i < a.k2.data.size(); ++i)
        s += (a.k2.data[i] * std::conj(b.k2.data[i])).real();
    return s * (two_pi / double(X.nodes()));
}

inline void axpy(kpair& y, double a, const kpair& x) {
    for (std::size_t i = 0; i < y.k1.data.size(); ++i) y.k1.data[i] += a * x.k1.data[i];
    for (std::size_t i = 0; i < y.k2.data.size(); ++i) y.k2.data[i] += a * x.k2.data[i];
}

inline void scale_add(kpair& p, const kpair& r, double beta) {
    for (std::size_t i = 0; i < p.k1.data.size(); ++i)
        p.k1.data[i] = r.k1.data[i] + beta * p.k1.data[i];
    for (std::size_t i = 0; i < p.k2.data.size(); ++i)
        p.k2.data[i] = r.k2.data[i] + beta * p.k2.data[i];
}

}  // namespace detail

/// Damped Newton iteration on the metric pair. Each step solves the
/// linearized system in metric-update coordinates K (Hermitian fields with
/// H_new = H + t K) by preconditioned CG on the symmetric weak form, with the
/// gauge direction (K proportional to (H1, H2)) projected out and the gauge
/// integral re-pinned to its initial value after every update. Falls back to
/// the metric flow direction K = -H rho when the Newton step stalls.
inline solve_result solve_coupled_vortex(const triple& T0, const solve_config& cfg = {}) {
    const torus_base& X = *T0.X;
    triple T = T0;
    solve_result out;
    const int r1 = T.rank1(), r2 = T.rank2();
    const double gauge_target = two_pi * double(r1 + r2);

    auto gauge_value = [&]() {
        // psi_nu = H_nu against the flat unit family reference, so the gauge
        // integral is the plain trace integral of the metrics. Warm starts
        // then pin to the same value as cold starts.
        return (X.integrate_trace(T.h1.h) + X.integrate_trace(T.h2.h)).real();
    };
    auto repin_gauge = [&]() {
        double cur = gauge_value();
        double c = gauge_target / cur;
        T.h1.h *= cd(c, 0.0);
        T.h2.h *= cd(c, 0.0);
    };

    repin_gauge();
    residual_report res = vortex_residual(T);
    if (cfg.record_trace) {
        out.residual_history.push_back(res.sup);
        out.trace_history.push_back(std::abs(res.trace_integral));
    }

    const double sigma = 1.0 + std::abs(T.tau1) + std::abs(T.tau2) +
                         sup_norm(mat_mul(T.phi, detail::phi_star(T)));

    auto precond = [&](const detail::kpair& k) {
        detail::kpair m{k.k1, k.k2};
        for (int c = 0; c < m.k1.comps(); ++c) {
            field comp(X.n(), 1, 1, form_type::f00);
            std::copy_n(m.k1.data.data() + std::size_t(c) * X.nodes(), X.nodes(), comp.data.data());
            comp = X.shifted_inverse_laplacian(comp, sigma);
            std::copy_n(comp.data.data(), X.nodes(), m.k1.data.data() + std::size_t(c) * X.nodes());
        }
        for (int c = 0; c < m.k2.comps(); ++c) {
            field comp(X.n(), 1, 1, form_type::f00);
            std::copy_n(m.k2.data.data() + std::size_t(c) * X.nodes(), X.nodes(), comp.data.data());
            comp = X.shifted_inverse_laplacian(comp, sigma);
            std::copy_n(comp.data.data(), X.nodes(), m.k2.data.data() + std::size_t(c) * X.nodes());
        }
        m.k1 = detail::herm_part(m.k1);
        m.k2 = detail::herm_part(m.k2);
        return m;
    };

    double last_inc = 1e300;
    for (int it = 0; it < cfg.max_newton; ++it) {
        if (res.sup <= cfg.tol && last_inc <= cfg.tol) {
            out.status = solve_status::converged;
            break;
        }
        double scale1 = sup_norm(T.h1.h), scale2 = sup_norm(T.h2.h);
        if (min_cholesky_pivot(T.h1.h) < cfg.degenerate_pivot * scale1 ||
            min_cholesky_pivot(T.h2.h) < cfg.degenerate_pivot * scale2) {
            out.status = solve_status::degenerate;
            out.note = "metric eigenvalue collapse (no solution in this gauge orbit is a "
                       "Kobayashi-Hitchin signal for non-polystable data)";
            break;
        }

        df0_context ctx(T);
        field h1inv = mat_inv(T.h1.h);
        field h2inv = mat_inv(T.h2.h);
        detail::kpair gauge_dir{T.h1.h, T.h2.h};
        double gnorm2 = detail::ip_flat(X, gauge_dir, gauge_dir);
        auto deflate = [&](detail::kpair& k) {
            double c = detail::ip_flat(X, k, gauge_dir) / gnorm2;
            detail::axpy(k, -c, gauge_dir);
        };

        auto apply_op = [&](const detail::kpair& k) {
            field chi1 = mat_mul(h1inv, k.k1);
            field chi2 = mat_mul(h2inv, k.k2);
            df0_value v = ctx.apply(chi1, chi2);
            detail::kpair a;
            a.k1 = detail::herm_part(mat_mul(v.l1, h1inv));
            a.k2 = detail::herm_part(mat_mul(v.l2, h2inv));
            deflate(a);
            return a;
        };

        detail::kpair rhs;
        rhs.k1 = detail::herm_part(mat_mul(res.rho1, h1inv));
        rhs.k1 *= cd(-1.0, 0.0);
        rhs.k2 = detail::herm_part(mat_mul(res.rho2, h2inv));
        rhs.k2 *= cd(-1.0, 0.0);
        deflate(rhs);

        // Preconditioned CG on the symmetric weak form.
        detail::kpair x{zeros_like(rhs.k1), zeros_like(rhs.k2)};
        detail::kpair r = rhs;
        detail::kpair z = precond(r);
        deflate(z);
        detail::kpair p = z;
        double rz = detail::ip_flat(X, r, z);
        double rhs_norm = std::sqrt(detail::ip_flat(X, rhs, rhs));
        double cg_rtol = std::max(cfg.cg_tol, std::min(1e-4, 1e-3 * res.sup));
        int cg_used = 0;
        for (int k = 0; k < cfg.max_cg; ++k) {
            detail::kpair ap = apply_op(p);
            double pap = detail::ip_flat(X, p, ap);
            if (!(pap > 0.0)) break;  // numerical loss of positivity
            double a = rz / pap;
            detail::axpy(x, a, p);
            detail::axpy(r, -a, ap);
            ++cg_used;
            if (std::sqrt(detail::ip_flat(X, r, r)) <= cg_rtol * rhs_norm) break;
            z = precond(r);
            deflate(z);
            double rz_new = detail::ip_flat(X, r, z);
            scale_add(p, z, rz_new / rz);
            rz = rz_new;
        }
        out.cg_iterations += cg_used;

        auto try_direction = [&](const detail::kpair& dir, double& accepted_t) -> bool {
            double t = 1.0;
            for (int ls = 0; ls < 10; ++ls, t *= 0.5) {
                triple cand = T;
                cand.h1.h = T.h1.h;
                cand.h2.h = T.h2.h;
                field k1 = dir.k1;
                k1 *= cd(t, 0.0);
                field k2 = dir.k2;
                k2 *= cd(t, 0.0);
                cand.h1.h += k1;
                cand.h2.h += k2;
                if (min_cholesky_pivot(cand.h1.h) <= 0.0 || min_cholesky_pivot(cand.h2.h) <= 0.0)
                    continue;
                residual_report cres;
                try {
                    cres = vortex_residual(cand);
                } catch (const error&) {
                    continue;
                }
                if (std::isfinite(cres.sup) && cres.sup <= res.sup * (1.0 - 1e-4 * t)) {
                    T = cand;
                    res = cres;
                    accepted_t = t;
                    return true;
                }
            }
            return false;
        };

        double t_used = 0.0;
        bool ok = try_direction(x, t_used);
        detail::kpair used = x;
        if (!ok) {
            // metric flow fallback: K = -H rho
            detail::kpair g;
            g.k1 = detail::herm_part(mat_mul(T.h1.h, res.rho1));
            g.k1 *= cd(-1.0, 0.0);
            g.k2 = detail::herm_part(mat_mul(T.h2.h, res.rho2));
            g.k2 *= cd(-1.0, 0.0);
            deflate(g);
            ok = try_direction(g, t_used);
            used = g;
        }
        ++out.newton_steps;
        if (!ok) {
            out.status = solve_status::max_iterations;
            out.note = "stalled: no descent in Newton or flow direction";
            break;
        }
        repin_gauge();
        res = vortex_residual(T);
        last_inc = t_used * std::max(sup_norm(used.k1), sup_norm(used.k2)) /
                   std::max(1.0, std::max(sup_norm(T.h1.h), sup_norm(T.h2.h)));
        if (cfg.record_trace) {
            out.residual_history.push_back(res.sup);
            out.trace_history.push_back(std::abs(res.trace_integral));
        }
    }
    if (out.status != solve_status::converged && out.status != solve_status::degenerate &&
        res.sup <= cfg.tol)
        out.status = solve_status::converged;
    if (out.status == solve_status::converged) {
        // A residual below tolerance reached with a collapsing eigenvalue is
        // the boundary-of-moduli signal, not a solution.
        double scale = std::max(sup_norm(T.h1.h), sup_norm(T.h2.h));
        if (min_cholesky_pivot(T.h1.h) < 1e-7 * scale ||
            min_cholesky_pivot(T.h2.h) < 1e-7 * scale) {
            out.status = solve_status::degenerate;
            out.note = "residual tolerance reached only along metric degeneration";
        }
    }

    out.h1 = T.h1;
    out.h2 = T.h2;
    out.residual = res;
    out.gauge_value = gauge_value();
    out.last_increment = last_inc;
    return out;
}

/// Convenience: solve and write the metrics back into the triple.
inline solve_result solve_in_place(triple& T, const solve_config& cfg = {}) {
    solve_result r = solve_coupled_vortex(T, cfg);
    if (r.status == solve_status::converged) {
        T.h1 = r.h1;
        T.h2 = r.h2;
    }
    return r;
}

}  // namespace vortex
