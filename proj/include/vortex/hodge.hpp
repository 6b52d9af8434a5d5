#pragma once

#include <Eigen/Dense>

#include "vortex/complex_ops.hpp"
#include "vortex/rng.hpp"

namespace vortex {

struct hodge_params {
    double cg_tol = 1e-11;       // relative residual for Green solves
    int max_cg = 6000;
    double kernel_threshold = 1e-6;  // Ritz values below this count as kernel
    double shift = 1e-2;             // shift-invert parameter
    int inverse_iterations = 4;
    double probe_cg_tol = 1e-8;
    std::uint64_t probe_seed = 0x9d2c5680u;
};

namespace detail_hodge {

template <typename Elem>
struct level_ops;

template <>
struct level_ops<c0_element> {
    static constexpr int level = 0;
    static c0_element zero(const complex_ctx& c) { return c.zero0(); }
    static c0_element laplace(const complex_ctx& c, const c0_element& x) { return laplace0(c, x); }
    static cd ip(const complex_ctx& c, const c0_element& x, const c0_element& y) {
        return ip0(c, x, y);
    }
    template <typename F>
    static void for_each_component(c0_element& x, F&& f) {
        f(x.f1);
        f(x.f2);
    }
    static c0_element random(const complex_ctx& c, rng& r, int cutoff) {
        const torus_base& X = c.X();
        return {random_matrix_field(X, r, c.T->rank1(), c.T->rank1(), cutoff, 1.0),
                random_matrix_field(X, r, c.T->rank2(), c.T->rank2(), cutoff, 1.0)};
    }
};

template <>
struct level_ops<c1_element> {
    static constexpr int level = 1;
    static c1_element zero(const complex_ctx& c) { return c.zero1(); }
    static c1_element laplace(const complex_ctx& c, const c1_element& x) { return laplace1(c, x); }
    static cd ip(const complex_ctx& c, const c1_element& x, const c1_element& y) {
        return ip1(c, x, y);
    }
    template <typename F>
    static void for_each_component(c1_element& x, F&& f) {
        f(x.a);
        f(x.b1);
        f(x.b2);
    }
    static c1_element random(const complex_ctx& c, rng& r, int cutoff) {
        const torus_base& X = c.X();
        return {random_matrix_field(X, r, c.T->rank1(), c.T->rank2(), cutoff, 1.0),
                random_matrix_field(X, r, c.T->rank1(), c.T->rank1(), cutoff, 1.0, form_type::f01),
                random_matrix_field(X, r, c.T->rank2(), c.T->rank2(), cutoff, 1.0, form_type::f01)};
    }
};

template <>
struct level_ops<c2_element> {
    static constexpr int level = 2;
    static c2_element zero(const complex_ctx& c) { return c.zero2(); }
    static c2_element laplace(const complex_ctx& c, const c2_element& x) { return laplace2(c, x); }
    static cd ip(const complex_ctx& c, const c2_element& x, const c2_element& y) {
        return ip2(c, x, y);
    }
    template <typename F>
    static void for_each_component(c2_element& x, F&& f) {
        f(x.u);
    }
    static c2_element random(const complex_ctx& c, rng& r, int cutoff) {
        const torus_base& X = c.X();
        c2_element out = c.zero2();
        out.u = random_matrix_field(X, r, c.T->rank1(), c.T->rank2(), cutoff, 1.0, form_type::f01);
        return out;
    }
};

}  // namespace detail_hodge

/// Orthonormal kernel basis of a level Laplacian, the Ritz values observed by
/// the probe, and the spectral gap above the kernel threshold.
template <typename Elem>
struct harmonic_space {
    std::vector<Elem> basis;
    std::vector<double> ritz;
    double threshold = 1e-6;
    double gap = 0.0;

    int dim() const { return static_cast<int>(basis.size()); }
};

template <typename Elem>
Elem harmonic_projection(const complex_ctx& c, const harmonic_space<Elem>& hs, const Elem& x) {
    using ops = detail_hodge::level_ops<Elem>;
    Elem out = ops::zero(c);
    for (const Elem& e : hs.basis) axpy(out, ops::ip(c, x, e), e);
    return out;
}

template <typename Elem>
void remove_harmonic(const complex_ctx& c, const harmonic_space<Elem>& hs, Elem& x) {
    using ops = detail_hodge::level_ops<Elem>;
    for (const Elem& e : hs.basis) axpy(x, -ops::ip(c, x, e), e);
}

namespace detail_hodge {

/// Flexible PCG for (box + shift) x = rhs, with the flat shifted inverse
/// Laplacian applied componentwise as preconditioner and optional deflation
/// against an orthonormal basis.
template <typename Elem>
Elem cg_solve(const complex_ctx& c, double shift, const Elem& rhs,
              const std::vector<Elem>& deflate, double rtol, int max_iter, int* iters_out) {
    using ops = level_ops<Elem>;
    const torus_base& X = c.X();
    const double sigma0 =
        shift + 1.0 + std::abs(c.T->tau1) + std::abs(c.T->tau2) +
        sup_norm(mat_mul(c.T->phi, c.phi_star));

    auto deflate_vec = [&](Elem& v) {
        for (const Elem& e : deflate) axpy(v, -ops::ip(c, v, e), e);
    };
    auto precond = [&](const Elem& v) {
        Elem m = v;
        ops::for_each_component(m, [&](field& comp) {
            field tmp(X.n(), 1, 1, form_type::f00);
            for (int k = 0; k < comp.comps(); ++k) {
                std::copy_n(comp.data.data() + std::size_t(k) * X.nodes(), X.nodes(),
                            tmp.data.data());
                tmp = X.shifted_inverse_laplacian(tmp, sigma0);
                std::copy_n(tmp.data.data(), X.nodes(),
                            comp.data.data() + std::size_t(k) * X.nodes());
            }
        });
        deflate_vec(m);
        return m;
    };
    auto apply = [&](const Elem& v) {
        Elem a = ops::laplace(c, v);
        if (shift != 0.0) axpy(a, cd(shift, 0.0), v);
        deflate_vec(a);
        return a;
    };

    Elem x = ops::zero(c);
    Elem r = rhs;
    deflate_vec(r);
    double rhsn = std::sqrt(std::abs(ops::ip(c, r, r).real()));
    if (rhsn == 0.0) {
        if (iters_out) *iters_out = 0;
        return x;
    }
    Elem z = precond(r);
    Elem p = z;
    Elem r_prev = r;
    cd rz = ops::ip(c, r, z);
    int used = 0;
    for (int k = 0; k < max_iter; ++k) {
        Elem ap = apply(p);
        double pap = ops::ip(c, p, ap).real();
        if (!(pap > 0.0)) break;
        double a = rz.real() / pap;
        axpy(x, cd(a, 0.0), p);
        r_prev = r;
        axpy(r, cd(-a, 0.0), ap);
        ++used;
        double rn = std::sqrt(std::abs(ops::ip(c, r, r).real()));
        if (rn <= rtol * rhsn) break;
        z = precond(r);
        // flexible (Polak-Ribiere) beta: robust to the metric-weighted inner
        // product not exactly commuting with the flat preconditioner
        Elem dr = r;
        axpy(dr, cd(-1.0, 0.0), r_prev);
        cd rz_new = ops::ip(c, dr, z);
        double beta = rz_new.real() / rz.real();
        rz = ops::ip(c, r, z);
        Elem pnew = z;
        axpy(pnew, cd(beta, 0.0), p);
        p = pnew;
    }
    if (iters_out) *iters_out = used;
    return x;
}

template <typename Elem>
void orthonormalize(const complex_ctx& c, std::vector<Elem>& xs) {
    using ops = level_ops<Elem>;
    std::vector<Elem> kept;
    for (Elem& x : xs) {
        for (const Elem& e : kept) axpy(x, -ops::ip(c, x, e), e);
        double n = std::sqrt(std::abs(ops::ip(c, x, x).real()));
        if (n > 1e-12) {
            scale(x, cd(1.0 / n, 0.0));
            kept.push_back(x);
        }
    }
    xs = kept;
}

}  // namespace detail_hodge

/// Shift-inverted block inverse iteration with a Ritz projection. `seeds`
/// may contain exact or approximate kernel candidates; extra random probes
/// are added so an unexpected kernel dimension is detected rather than
/// assumed. The 1e-6 threshold and the observed gap are recorded.
template <typename Elem>
harmonic_space<Elem> probe_harmonic_space(const complex_ctx& c, std::vector<Elem> seeds,
                                          int extra_probes = 3, const hodge_params& hp = {}) {
    using ops = detail_hodge::level_ops<Elem>;
    rng r(hp.probe_seed + 31 * ops::level);
    for (int i = 0; i < extra_probes; ++i)
        seeds.push_back(ops::random(c, r, std::max(2, c.X().n() / 8)));
    detail_hodge::orthonormalize(c, seeds);
    const int nb = static_cast<int>(seeds.size());

    for (int it = 0; it < hp.inverse_iterations; ++it) {
        for (Elem& s : seeds)
            s = detail_hodge::cg_solve(c, hp.shift, s, std::vector<Elem>{}, hp.probe_cg_tol,
                                       hp.max_cg, nullptr);
        detail_hodge::orthonormalize(c, seeds);
    }
    // Ritz projection of the Laplacian onto the probe space.
    Eigen::MatrixXcd A(nb, nb);
    std::vector<Elem> lap;
    lap.reserve(seeds.size());
    for (const Elem& s : seeds) lap.push_back(ops::laplace(c, s));
    for (int i = 0; i < nb; ++i)
        for (int j = 0; j < nb; ++j) A(i, j) = ops::ip(c, lap[j], seeds[i]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(0.5 * (A + A.adjoint()));

    harmonic_space<Elem> out;
    out.threshold = hp.kernel_threshold;
    out.ritz.resize(nb);
    for (int i = 0; i < nb; ++i) out.ritz[static_cast<std::size_t>(i)] = eig.eigenvalues()(i);
    out.gap = 0.0;
    for (int i = 0; i < nb; ++i) {
        double lam = eig.eigenvalues()(i);
        Elem v = ops::zero(c);
        for (int j = 0; j < nb; ++j) axpy(v, eig.eigenvectors()(j, i), seeds[static_cast<std::size_t>(j)]);
        if (lam < hp.kernel_threshold)
            out.basis.push_back(std::move(v));
        else if (out.gap == 0.0)
            out.gap = lam;
    }
    detail_hodge::orthonormalize(c, out.basis);
    return out;
}

/// Green's operator: solves box xi = x - H x on the orthogonal complement of
/// the harmonics (at level 0 this removes the mean-trace/IdId component, the
/// identity pair being always harmonic) and returns xi with H xi = 0.
template <typename Elem>
Elem green(const complex_ctx& c, const harmonic_space<Elem>& hs, const Elem& x,
           const hodge_params& hp = {}, int* iters_out = nullptr) {
    Elem rhs = x;
    remove_harmonic(c, hs, rhs);
    Elem out = detail_hodge::cg_solve(c, 0.0, rhs, hs.basis, hp.cg_tol, hp.max_cg, iters_out);
    remove_harmonic(c, hs, out);
    return out;
}

/// Identity pair (Id, Id), an exact harmonic at level 0 for any triple.
inline c0_element identity_pair(const complex_ctx& c) {
    return {identity_field(c.X().n(), c.T->rank1()), identity_field(c.X().n(), c.T->rank2())};
}

/// Bundled per-triple Hodge data with lazily computed kernels.
struct hodge_ctx {
    complex_ctx cx;
    hodge_params params;
    std::optional<harmonic_space<c0_element>> h0;
    std::optional<harmonic_space<c1_element>> h1;
    std::optional<harmonic_space<c2_element>> h2;

    explicit hodge_ctx(const triple& t, hodge_params hp = {}) : cx(t), params(hp) {}

    const harmonic_space<c0_element>& space0() {
        if (!h0) h0 = probe_harmonic_space<c0_element>(cx, {identity_pair(cx)}, 3, params);
        return *h0;
    }
    const harmonic_space<c1_element>& space1(std::vector<c1_element> seeds = {}) {
        if (!h1) h1 = probe_harmonic_space<c1_element>(cx, std::move(seeds), 3, params);
        return *h1;
    }
    const harmonic_space<c2_element>& space2() {
        if (!h2) h2 = probe_harmonic_space<c2_element>(cx, {}, 3, params);
        return *h2;
    }
};

}  // namespace vortex
