#pragma once

// Test-only oracles, kept independent of the solver paths they check.

#include "vortex/solver.hpp"

namespace vortex::oracle {

/// Scalar Kazdan-Warner-type reduction for rank-(1,1) triples.
///
/// Writing h_nu = e^{-u_nu} the coupled equations subtract to a single
/// equation for w = u1 - u2:
///     Lap w = (P1 - P2) + 2 F e^{-w} - alpha,
/// with F = |phi|^2 and P_nu = (2/g) Re d_z beta_nu. A damped spectral fixed
/// point iteration solves it without touching the Newton solver.
struct kw_result {
    field w;       // real scalar field, w = log(h2/h1)
    double residual = 0.0;
    int iterations = 0;
};

inline kw_result kazdan_warner_w(const triple& T, double tol = 1e-12, int max_iter = 20000) {
    const torus_base& X = *T.X;
    if (T.rank1() != 1 || T.rank2() != 1) throw dimension_error("kazdan_warner_w: rank (1,1) only");
    field f2(X.n(), 1, 1, form_type::f00);
    for (int i = 0; i < X.nodes(); ++i)
        f2.data[static_cast<std::size_t>(i)] = std::norm(T.phi.data[static_cast<std::size_t>(i)]);
    auto p_of = [&](const holomorphic_structure& st) {
        field dz = X.deriv_z(st.beta);
        field p(X.n(), 1, 1, form_type::f00);
        for (int i = 0; i < X.nodes(); ++i)
            p.data[static_cast<std::size_t>(i)] = (2.0 / X.g()) * dz.data[static_cast<std::size_t>(i)].real();
        return p;
    };
    field pdiff = p_of(T.e1) - p_of(T.e2);

    kw_result out;
    out.w = field(X.n(), 1, 1, form_type::f00);
    for (int it = 0; it < max_iter; ++it) {
        field lw = X.laplacian_scalar(out.w);
        field res = pdiff;
        double expmax = 0.0;
        for (int i = 0; i < X.nodes(); ++i) {
            double e = 2.0 * f2.data[static_cast<std::size_t>(i)].real() *
                       std::exp(-out.w.data[static_cast<std::size_t>(i)].real());
            expmax = std::max(expmax, e);
            res.data[static_cast<std::size_t>(i)] += e - T.alpha - lw.data[static_cast<std::size_t>(i)];
        }
        out.residual = sup_norm(res);
        out.iterations = it;
        if (out.residual <= tol) break;
        double lambda = std::max(1.0, expmax);
        field upd = X.shifted_inverse_laplacian(res, lambda);
        out.w += upd;
    }
    return out;
}

}  // namespace vortex::oracle
