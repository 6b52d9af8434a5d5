#include "doctest.h"
#include "vortex/complex_ops.hpp"
#include "vortex/rng.hpp"

using namespace vortex;

namespace {

triple solved_dressed(const torus_base& X, double amp, double alpha = 1.0, cd c = cd(1.0, 0.2)) {
    rng r(101);
    field xi = random_band_limited(X, r, 2, amp);
    field beta1 = X.dbar(xi);
    holomorphic_structure s1(1, beta1), s2(X, 1);
    field phi(X.n(), 1, 1, form_type::f00);
    for (int i = 0; i < X.nodes(); ++i)
        phi.data[static_cast<std::size_t>(i)] = c * std::exp(-xi.data[static_cast<std::size_t>(i)]);
    triple T = make_triple(X, s1, s2, phi, alpha);
    solve_config cfg;
    cfg.tol = 1e-11;
    solve_result sol = solve_coupled_vortex(T, cfg);
    REQUIRE(sol.status == solve_status::converged);
    T.h1 = sol.h1;
    T.h2 = sol.h2;
    return T;
}

c0_element random_c0(const complex_ctx& c, rng& r, int cutoff = 3) {
    return {random_matrix_field(c.X(), r, c.T->rank1(), c.T->rank1(), cutoff, 1.0),
            random_matrix_field(c.X(), r, c.T->rank2(), c.T->rank2(), cutoff, 1.0)};
}

c1_element random_c1(const complex_ctx& c, rng& r, int cutoff = 3) {
    return {random_matrix_field(c.X(), r, c.T->rank1(), c.T->rank2(), cutoff, 1.0),
            random_matrix_field(c.X(), r, c.T->rank1(), c.T->rank1(), cutoff, 1.0, form_type::f01),
            random_matrix_field(c.X(), r, c.T->rank2(), c.T->rank2(), cutoff, 1.0, form_type::f01)};
}

c2_element random_c2(const complex_ctx& c, rng& r, int cutoff = 3) {
    c2_element out = c.zero2();
    out.u = random_matrix_field(c.X(), r, c.T->rank1(), c.T->rank2(), cutoff, 1.0, form_type::f01);
    return out;
}

}  // namespace

TEST_CASE("delta and d0 basics") {
    torus_base X = make_flat_torus(cd(0.0, 1.0), 16);
    holomorphic_structure l(X, 1);
    field c = constant_matrix(X.n(), 1, 1, {cd(1.3, -0.2)});
    triple T = make_triple(X, l, l, c, 1.0);
    complex_ctx cx(T);

    c0_element id = {identity_field(X.n(), 1), identity_field(X.n(), 1)};
    CHECK(sup_norm(delta(cx, id)) <= 1e-14);
    c1_element d = d0(cx, id);
    CHECK(sup_norm(d.a) + sup_norm(d.b1) + sup_norm(d.b2) <= 1e-14);

    rng r(5);
    c0_element f = random_c0(cx, r);
    c0_element fzero = {f.f1, field(X.n(), 1, 1, form_type::f00)};
    field dl = delta(cx, fzero);
    field expect = mat_mul(f.f1, T.phi);
    CHECK(sup_norm(dl - expect) <= 1e-13);

    c0_element dd = d0_star(cx, d0(cx, id));
    CHECK(norm0(cx, dd) <= 1e-13);
}

TEST_CASE("complex property d1 after d0 vanishes to rounding") {
    torus_base X = make_flat_torus(cd(0.1, 0.9), 32);
    triple T = solved_dressed(X, 0.25);
    complex_ctx cx(T);
    rng r(7);
    for (int t = 0; t < 3; ++t) {
        c0_element f = random_c0(cx, r);
        c2_element y = d1(cx, d0(cx, f));
        CHECK(norm2(cx, y) <= 1e-12);
        CHECK(sup_norm(y.v1) == 0.0);  // structural zero on a curve
    }
}

TEST_CASE("d0 kills triple endomorphisms of a diagonal direct sum") {
    torus_base X = make_flat_torus(cd(0.0, 1.0), 16);
    holomorphic_structure e(X, 2);
    field phi(X.n(), 2, 2, form_type::f00);
    std::fill_n(phi.plane(0, 0), X.nodes(), cd(1.0, 0.0));
    std::fill_n(phi.plane(1, 1), X.nodes(), cd(0.4, 0.3));
    triple T = make_triple(X, e, e, phi, 1.0);
    complex_ctx cx(T);
    field chi(X.n(), 2, 2, form_type::f00);
    std::fill_n(chi.plane(0, 0), X.nodes(), cd(2.0, 1.0));
    std::fill_n(chi.plane(1, 1), X.nodes(), cd(-0.7, 0.1));
    c0_element f = {chi, chi};
    c1_element d = d0(cx, f);
    CHECK(norm1(cx, d) <= 1e-13);
}

TEST_CASE("adjointness of d0 and d1 on random data") {
    torus_base X = make_flat_torus(cd(0.05, 1.2), 32);
    triple T = solved_dressed(X, 0.25);
    complex_ctx cx(T);
    rng r(13);
    double worst = 0.0;
    for (int t = 0; t < 25; ++t) {
        c0_element f = random_c0(cx, r);
        c1_element x = random_c1(cx, r);
        cd lhs = ip1(cx, d0(cx, f), x);
        cd rhs = ip0(cx, f, d0_star(cx, x));
        worst = std::max(worst, std::abs(lhs - rhs));

        c2_element y = random_c2(cx, r);
        cd lhs2 = ip2(cx, d1(cx, x), y);
        cd rhs2 = ip1(cx, x, d1_star(cx, y));
        worst = std::max(worst, std::abs(lhs2 - rhs2));
    }
    CHECK(worst <= 1e-10);
}

TEST_CASE("d0* on harmonic b with vanishing a") {
    torus_base X = make_flat_torus(cd(0.0, 1.0), 16);
    holomorphic_structure l(X, 1);
    field c = constant_matrix(X.n(), 1, 1, {cd(1.0, 0.0)});
    triple T = make_triple(X, l, l, c, 1.0);
    complex_ctx cx(T);
    c1_element x = cx.zero1();
    std::fill(x.b1.data.begin(), x.b1.data.end(), cd(0.7, 0.4));
    std::fill(x.b2.data.begin(), x.b2.data.end(), cd(-0.1, 0.9));
    c0_element y = d0_star(cx, x);
    CHECK(norm0(cx, y) <= 1e-13);
}

TEST_CASE("level laplacians are nonnegative and symmetric") {
    torus_base X = make_flat_torus(cd(0.0, 1.1), 32);
    triple T = solved_dressed(X, 0.2);
    complex_ctx cx(T);
    rng r(17);
    c1_element x = random_c1(cx, r);
    c1_element y = random_c1(cx, r);
    cd sym = ip1(cx, laplace1(cx, x), y) - ip1(cx, x, laplace1(cx, y));
    CHECK(std::abs(sym) <= 1e-9);
    CHECK(ip1(cx, laplace1(cx, x), x).real() >= -1e-10);
    c0_element f = random_c0(cx, r);
    CHECK(ip0(cx, laplace0(cx, f), f).real() >= -1e-10);
    c2_element u = random_c2(cx, r);
    CHECK(ip2(cx, laplace2(cx, u), u).real() >= -1e-10);
}
