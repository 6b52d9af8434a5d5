#pragma once

#include "vortex/torus.hpp"

namespace vortex {

/// dbar-operator of a rank-r bundle of trivial topological type: dbar0 + beta,
/// with beta a (0,1) endomorphism-valued coefficient field. On a curve the
/// integrability condition is vacuous (no (0,2) forms); recorded, not tested.
struct holomorphic_structure {
    int rank = 1;
    field beta;  // (0,1), rank x rank

    holomorphic_structure() = default;
    holomorphic_structure(const torus_base& X, int r)
        : rank(r), beta(X.n(), r, r, form_type::f01) {}
    holomorphic_structure(int r, field b) : rank(r), beta(std::move(b)) {
        check_type(beta, form_type::f01, "holomorphic_structure");
        if (beta.rows != r || beta.cols != r) throw dimension_error("holomorphic_structure: beta shape");
    }
};

/// Smallest Cholesky pivot of the pointwise Hermitian matrices; nonpositive
/// values flag indefiniteness at some node.
inline double min_cholesky_pivot(const field& h) {
    if (h.rows != h.cols) throw dimension_error("min_cholesky_pivot");
    const int r = h.rows, nn = h.nodes();
    double best = 1e300;
    std::vector<cd> L(static_cast<std::size_t>(r) * r);
    for (int i = 0; i < nn; ++i) {
        for (int k = 0; k < r; ++k) {
            double d = h.at(k, k, i).real();
            for (int j = 0; j < k; ++j) d -= std::norm(L[static_cast<std::size_t>(k * r + j)]);
            best = std::min(best, d);
            if (d <= 0.0) return d;
            const double lkk = std::sqrt(d);
            L[static_cast<std::size_t>(k * r + k)] = lkk;
            for (int p = k + 1; p < r; ++p) {
                cd s = h.at(p, k, i);
                for (int j = 0; j < k; ++j)
                    s -= L[static_cast<std::size_t>(p * r + j)] *
                         std::conj(L[static_cast<std::size_t>(k * r + j)]);
                L[static_cast<std::size_t>(p * r + k)] = s / lkk;
            }
        }
    }
    return best;
}

struct hermitian_metric {
    field h;  // (0,0), rank x rank, pointwise Hermitian positive definite

    hermitian_metric() = default;
    explicit hermitian_metric(field h_) : h(std::move(h_)) {}

    int rank() const { return h.rows; }

    void validate(double tol = 1e-12) const {
        if (h.rows != h.cols) throw metric_error("metric: not square");
        double herm = 0.0;
        for (int p = 0; p < h.rows; ++p)
            for (int q = 0; q <= p; ++q) {
                const cd* a = h.plane(p, q);
                const cd* b = h.plane(q, p);
                for (int i = 0; i < h.nodes(); ++i)
                    herm = std::max(herm, std::abs(a[i] - std::conj(b[i])));
            }
        if (herm > 1e-10) throw metric_error("metric: not Hermitian");
        if (min_cholesky_pivot(h) <= tol) throw metric_error("metric: not positive definite");
    }
};

inline hermitian_metric flat_metric(const torus_base& X, int rank, double scale = 1.0) {
    hermitian_metric m(identity_field(X.n(), rank));
    m.h *= cd(scale, 0.0);
    return m;
}

/// Adjoint of a homomorphism A: E -> F with respect to (hE, hF):
/// A^* = hE^{-1} A^dagger hF. For endomorphisms pass the same metric twice.
/// Output carries the caller's form tag (forms conjugate their z-type).
inline field adjoint_hom(const field& a, const hermitian_metric& hE, const hermitian_metric& hF,
                         form_type t = form_type::f00) {
    if (a.rows != hF.rank() || a.cols != hE.rank()) throw dimension_error("adjoint_hom: shapes");
    field he_inv = mat_inv(hE.h);
    field out = mat_mul(mat_mul(he_inv, dagger(a, t), t), hF.h, t);
    return out;
}

inline field adjoint_endo(const field& a, const hermitian_metric& h,
                          form_type t = form_type::f00) {
    return adjoint_hom(a, h, h, t);
}

/// Covariant d/dz and d/dzbar on coefficient fields. The caller supplies the
/// connection/structure coefficients for each bundle slot and the output tag;
/// orientation signs of form assembly are handled by the complex operators.
inline field cov_z_endo(const torus_base& X, const field& f, const field& theta, form_type t) {
    field out = X.deriv_z(f);
    out.type = t;
    out += commutator(theta, f, t);
    return out;
}

inline field cov_zbar_endo(const torus_base& X, const field& f, const field& beta, form_type t) {
    field out = X.deriv_zbar(f);
    out.type = t;
    out += commutator(beta, f, t);
    return out;
}

inline field cov_z_hom(const torus_base& X, const field& f, const field& theta1,
                       const field& theta2, form_type t) {
    field out = X.deriv_z(f);
    out.type = t;
    out += mat_mul(theta1, f, t);
    out -= mat_mul(f, theta2, t);
    return out;
}

inline field cov_zbar_hom(const torus_base& X, const field& f, const field& beta1,
                          const field& beta2, form_type t) {
    field out = X.deriv_zbar(f);
    out.type = t;
    out += mat_mul(beta1, f, t);
    out -= mat_mul(f, beta2, t);
    return out;
}

/// Chern connection (1,0)-coefficient theta_z = h^{-1} d_z h - (beta)^*.
/// The metric is assumed valid; construction sites check positivity.
inline field chern_connection(const torus_base& X, const holomorphic_structure& st,
                              const hermitian_metric& h) {
    field hinv = mat_inv(h.h);
    field theta = mat_mul(hinv, X.deriv_z(h.h), form_type::f10);
    field beta_star = adjoint_endo(st.beta, h, form_type::f10);
    theta -= beta_star;
    return theta;
}

/// Curvature coefficient R_{z zbar} = d_z beta - d_zbar theta + [theta, beta].
/// Sign convention: sections satisfy s_{;z zbar} = s_{;zbar z} - R s, and a
/// rank-one metric e^{-u} on the trivial structure has R = u_{z zbar}.
inline field curvature(const torus_base& X, const holomorphic_structure& st,
                       const hermitian_metric& h) {
    field theta = chern_connection(X, st, h);
    field r = X.deriv_z(st.beta);
    r.type = form_type::f11;
    field dth = X.deriv_zbar(theta);
    dth.type = form_type::f11;
    r -= dth;
    r += commutator(theta, st.beta, form_type::f11);
    return r;
}

/// (1/2pi) integral of tr(i Lambda Omega); an integer for consistent data.
inline double degree(const torus_base& X, const holomorphic_structure& st,
                     const hermitian_metric& h) {
    field r = curvature(X, st, h);
    return (X.integrate_trace(X.i_lambda(r)) / two_pi).real();
}

/// Sup norm of dbar phi + beta1 phi - phi beta2; zero iff phi is holomorphic
/// for the perturbed structures.
inline double holomorphy_residual(const torus_base& X, const field& phi,
                                  const holomorphic_structure& st1,
                                  const holomorphic_structure& st2) {
    if (phi.rows != st1.rank || phi.cols != st2.rank)
        throw dimension_error("holomorphy_residual: shapes");
    return sup_norm(cov_zbar_hom(X, phi, st1.beta, st2.beta, form_type::f01));
}

/// psi_{;z zbar} - psi_{;zbar z} + [R, psi] for an endomorphism; vanishes to
/// spectral-composition error.
inline field commutator_defect(const torus_base& X, const holomorphic_structure& st,
                               const hermitian_metric& h, const field& psi) {
    field theta = chern_connection(X, st, h);
    field r = curvature(X, st, h);
    field dz = cov_z_endo(X, psi, theta, form_type::f10);
    field a = cov_zbar_endo(X, dz, st.beta, form_type::f11);
    field dzb = cov_zbar_endo(X, psi, st.beta, form_type::f01);
    field b = cov_z_endo(X, dzb, theta, form_type::f11);
    a -= b;
    a += commutator(r, psi, form_type::f11);
    return a;
}

/// Same commutation defect for a homomorphism psi: E2 -> E1.
inline field commutator_defect_hom(const torus_base& X, const holomorphic_structure& st1,
                                   const hermitian_metric& h1, const holomorphic_structure& st2,
                                   const hermitian_metric& h2, const field& psi) {
    field th1 = chern_connection(X, st1, h1);
    field th2 = chern_connection(X, st2, h2);
    field r1 = curvature(X, st1, h1);
    field r2 = curvature(X, st2, h2);
    field dz = cov_z_hom(X, psi, th1, th2, form_type::f10);
    field a = cov_zbar_hom(X, dz, st1.beta, st2.beta, form_type::f11);
    field dzb = cov_zbar_hom(X, psi, st1.beta, st2.beta, form_type::f01);
    field b = cov_z_hom(X, dzb, th1, th2, form_type::f11);
    a -= b;
    a += mat_mul(r1, psi, form_type::f11);
    a -= mat_mul(psi, r2, form_type::f11);
    return a;
}

}  // namespace vortex
