#pragma once

#include "vortex/solver.hpp"

namespace vortex {

/// Level 0: pairs of endomorphism sections (f1, f2).
struct c0_element {
    field f1, f2;
};

/// Level 1: a (0,0) homomorphism a: E2 -> E1 and (0,1) endomorphism forms
/// (b1, b2).
struct c1_element {
    field a;
    field b1, b2;
};

/// Level 2: a (0,1) homomorphism form u plus the structural (0,2) slots
/// (v1, v2), identically zero on a curve but kept so the shapes match the
/// general complex.
struct c2_element {
    field u;
    field v1, v2;
};

/// Precomputed geometry of a triple's elliptic complex: connections, the
/// adjoint homomorphism, and the metric weights used by all pairings.
struct complex_ctx {
    const triple* T;
    field theta1, theta2;
    field phi_star;
    field h1_inv, h2_inv;

    explicit complex_ctx(const triple& t)
        : T(&t),
          theta1(chern_connection(*t.X, t.e1, t.h1)),
          theta2(chern_connection(*t.X, t.e2, t.h2)),
          phi_star(adjoint_hom(t.phi, t.h2, t.h1)),
          h1_inv(mat_inv(t.h1.h)),
          h2_inv(mat_inv(t.h2.h)) {}

    const torus_base& X() const { return *T->X; }

    c0_element zero0() const {
        return {field(X().n(), T->rank1(), T->rank1(), form_type::f00),
                field(X().n(), T->rank2(), T->rank2(), form_type::f00)};
    }
    c1_element zero1() const {
        return {field(X().n(), T->rank1(), T->rank2(), form_type::f00),
                field(X().n(), T->rank1(), T->rank1(), form_type::f01),
                field(X().n(), T->rank2(), T->rank2(), form_type::f01)};
    }
    c2_element zero2() const {
        return {field(X().n(), T->rank1(), T->rank2(), form_type::f01),
                field(X().n(), T->rank1(), T->rank1(), form_type::f02),
                field(X().n(), T->rank2(), T->rank2(), form_type::f02)};
    }

    field adj1(const field& m, form_type t = form_type::f00) const {  // End(E1) adjoint
        return mat_mul(mat_mul(h1_inv, dagger(m, t), t), T->h1.h, t);
    }
    field adj2(const field& m, form_type t = form_type::f00) const {
        return mat_mul(mat_mul(h2_inv, dagger(m, t), t), T->h2.h, t);
    }
    /// Adjoint of a Hom(E2,E1)-valued field: lands in Hom(E1,E2).
    field adj_hom(const field& m, form_type t = form_type::f00) const {
        return mat_mul(mat_mul(h2_inv, dagger(m, t), t), T->h1.h, t);
    }
    /// Adjoint of a Hom(E1,E2)-valued field: lands in Hom(E2,E1).
    field adj_hom_rev(const field& m, form_type t = form_type::f00) const {
        return mat_mul(mat_mul(h1_inv, dagger(m, t), t), T->h2.h, t);
    }
};

/// Delta(f1, f2) = f1 phi - phi f2.
inline field delta(const complex_ctx& c, const c0_element& f) {
    check_shape(f.f1, field(c.X().n(), c.T->rank1(), c.T->rank1(), form_type::f00), "delta");
    field out = mat_mul(f.f1, c.T->phi);
    out -= mat_mul(c.T->phi, f.f2);
    return out;
}

/// Delta on (0,1) endomorphism pairs.
inline field delta_form(const complex_ctx& c, const field& b1, const field& b2) {
    field out = mat_mul(b1, c.T->phi, form_type::f01);
    out -= mat_mul(c.T->phi, b2, form_type::f01);
    return out;
}

/// d0 f = (Delta f, dbar f).
inline c1_element d0(const complex_ctx& c, const c0_element& f) {
    const torus_base& X = c.X();
    c1_element out;
    out.a = delta(c, f);
    out.b1 = cov_zbar_endo(X, f.f1, c.T->e1.beta, form_type::f01);
    out.b2 = cov_zbar_endo(X, f.f2, c.T->e2.beta, form_type::f01);
    return out;
}

/// d1 (a, b) = (dbar a - Delta b, dbar b); the (0,2) part is structurally 0.
inline c2_element d1(const complex_ctx& c, const c1_element& x) {
    const torus_base& X = c.X();
    c2_element out = c.zero2();
    out.u = cov_zbar_hom(X, x.a, c.T->e1.beta, c.T->e2.beta, form_type::f01);
    out.u -= delta_form(c, x.b1, x.b2);
    return out;
}

/// d0* (a, b) = (a phi* + dbar* b1, -phi* a + dbar* b2).
inline c0_element d0_star(const complex_ctx& c, const c1_element& x) {
    const torus_base& X = c.X();
    const double w = -1.0 / X.g();
    c0_element out;
    out.f1 = mat_mul(x.a, c.phi_star);
    field db1 = cov_z_endo(X, x.b1, c.theta1, form_type::f00);
    db1 *= cd(w, 0.0);
    out.f1 += db1;
    out.f2 = mat_mul(c.phi_star, x.a);
    out.f2 *= cd(-1.0, 0.0);
    field db2 = cov_z_endo(X, x.b2, c.theta2, form_type::f00);
    db2 *= cd(w, 0.0);
    out.f2 += db2;
    return out;
}

/// d1* (u, v) = (dbar* u, (-u phi*, phi* u)) on a curve (v contributes 0).
inline c1_element d1_star(const complex_ctx& c, const c2_element& y) {
    const torus_base& X = c.X();
    c1_element out;
    out.a = cov_z_hom(X, y.u, c.theta1, c.theta2, form_type::f00);
    out.a *= cd(-1.0 / X.g(), 0.0);
    out.b1 = mat_mul(y.u, c.phi_star, form_type::f01);
    out.b1 *= cd(-1.0, 0.0);
    out.b2 = mat_mul(c.phi_star, y.u, form_type::f01);
    return out;
}

// ---- inner products (omega-integrated, (0,1) slots weighted by 1/g) ----

inline cd ip0(const complex_ctx& c, const c0_element& x, const c0_element& y) {
    const torus_base& X = c.X();
    return X.integrate_trace(mat_mul(x.f1, c.adj1(y.f1))) +
           X.integrate_trace(mat_mul(x.f2, c.adj2(y.f2)));
}

inline cd ip1(const complex_ctx& c, const c1_element& x, const c1_element& y) {
    const torus_base& X = c.X();
    const double w = 1.0 / X.g();
    cd s = X.integrate_trace(mat_mul(x.a, c.adj_hom(y.a)));
    s += w * X.integrate_trace(mat_mul(x.b1, c.adj1(y.b1, form_type::f10), form_type::f00));
    s += w * X.integrate_trace(mat_mul(x.b2, c.adj2(y.b2, form_type::f10), form_type::f00));
    return s;
}

inline cd ip2(const complex_ctx& c, const c2_element& x, const c2_element& y) {
    const torus_base& X = c.X();
    return (1.0 / X.g()) *
           X.integrate_trace(mat_mul(x.u, c.adj_hom(y.u, form_type::f10), form_type::f00));
}

inline double norm0(const complex_ctx& c, const c0_element& x) {
    return std::sqrt(std::max(0.0, ip0(c, x, x).real()));
}
inline double norm1(const complex_ctx& c, const c1_element& x) {
    return std::sqrt(std::max(0.0, ip1(c, x, x).real()));
}
inline double norm2(const complex_ctx& c, const c2_element& x) {
    return std::sqrt(std::max(0.0, ip2(c, x, x).real()));
}

// ---- Laplacians ----

inline c0_element laplace0(const complex_ctx& c, const c0_element& x) {
    return d0_star(c, d0(c, x));
}

inline c1_element laplace1(const complex_ctx& c, const c1_element& x) {
    c1_element out = d0(c, d0_star(c, x));
    c1_element dd = d1_star(c, d1(c, x));
    out.a += dd.a;
    out.b1 += dd.b1;
    out.b2 += dd.b2;
    return out;
}

inline c2_element laplace2(const complex_ctx& c, const c2_element& x) {
    return d1(c, d1_star(c, x));
}

// ---- element arithmetic, shared by the iterative solvers ----

inline void axpy(c0_element& y, cd a, const c0_element& x) {
    for (std::size_t i = 0; i < y.f1.data.size(); ++i) y.f1.data[i] += a * x.f1.data[i];
    for (std::size_t i = 0; i < y.f2.data.size(); ++i) y.f2.data[i] += a * x.f2.data[i];
}
inline void axpy(c1_element& y, cd a, const c1_element& x) {
    for (std::size_t i = 0; i < y.a.data.size(); ++i) y.a.data[i] += a * x.a.data[i];
    for (std::size_t i = 0; i < y.b1.data.size(); ++i) y.b1.data[i] += a * x.b1.data[i];
    for (std::size_t i = 0; i < y.b2.data.size(); ++i) y.b2.data[i] += a * x.b2.data[i];
}
inline void axpy(c2_element& y, cd a, const c2_element& x) {
    for (std::size_t i = 0; i < y.u.data.size(); ++i) y.u.data[i] += a * x.u.data[i];
}
inline void scale(c0_element& y, cd a) { y.f1 *= a; y.f2 *= a; }
inline void scale(c1_element& y, cd a) { y.a *= a; y.b1 *= a; y.b2 *= a; }
inline void scale(c2_element& y, cd a) { y.u *= a; }

}  // namespace vortex
