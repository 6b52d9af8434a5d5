#pragma once

#include <optional>

#include "vortex/bundle.hpp"

namespace vortex {

/// alpha-slope (d1 + d2 + alpha*r2)/(r1 + r2).
inline double alpha_slope(double d1, double d2, int r1, int r2, double alpha) {
    if (r1 < 0 || r2 < 0 || r1 + r2 == 0) throw dimension_error("alpha_slope: zero total rank");
    return (d1 + d2 + alpha * r2) / double(r1 + r2);
}

/// Unique (tau1, tau2) with tau1 - tau2 = alpha and d1 + d2 = tau1 r1 + tau2 r2.
inline std::pair<double, double> taus_from_alpha(double d1, double d2, int r1, int r2,
                                                 double alpha) {
    if (r1 < 1 || r2 < 1) throw dimension_error("taus_from_alpha: ranks must be >= 1");
    const double tau1 = (d1 + d2 + alpha * r2) / double(r1 + r2);
    const double tau2 = tau1 - alpha;
    return {tau1, tau2};
}

enum class stability : int {
    stable,
    semistable_not_stable,
    unstable,
    polystable,
    unsupported,
};

inline const char* stability_name(stability s) {
    switch (s) {
        case stability::stable: return "stable";
        case stability::semistable_not_stable: return "semistable-not-stable";
        case stability::unstable: return "unstable";
        case stability::polystable: return "polystable";
        case stability::unsupported: return "unsupported";
    }
    return "?";
}

/// A triple (E1, E2, phi) on a fixed torus with degree-zero bundles: the
/// dbar-structures, current Hermitian metrics, the homomorphism phi: E2 -> E1,
/// and the coupling constants (alpha; tau1, tau2 derived).
struct triple {
    const torus_base* X = nullptr;
    holomorphic_structure e1, e2;
    hermitian_metric h1, h2;
    field phi;  // (0,0), r1 x r2
    double alpha = 0.0;
    double tau1 = 0.0, tau2 = 0.0;

    int rank1() const { return e1.rank; }
    int rank2() const { return e2.rank; }
};

/// Builds a triple with flat unit reference metrics, derives the taus from
/// alpha (degrees are zero by construction) and validates the invariants.
inline triple make_triple(const torus_base& X, holomorphic_structure e1,
                          holomorphic_structure e2, field phi, double alpha,
                          double holomorphy_tol = 1e-8) {
    triple T;
    T.X = &X;
    T.e1 = std::move(e1);
    T.e2 = std::move(e2);
    T.phi = std::move(phi);
    if (T.phi.rows != T.e1.rank || T.phi.cols != T.e2.rank)
        throw dimension_error("make_triple: phi shape");
    check_type(T.phi, form_type::f00, "make_triple");
    T.alpha = alpha;
    auto [t1, t2] = taus_from_alpha(0.0, 0.0, T.e1.rank, T.e2.rank, alpha);
    T.tau1 = t1;
    T.tau2 = t2;
    T.h1 = flat_metric(X, T.e1.rank);
    T.h2 = flat_metric(X, T.e2.rank);
    double res = holomorphy_residual(X, T.phi, T.e1, T.e2);
    if (res > holomorphy_tol)
        throw error("make_triple: phi not holomorphic for the given structures (residual " +
                    std::to_string(res) + ")");
    return T;
}

namespace detail {

/// Index ranges of a block-diagonal splitting shared by beta1, beta2, phi,
/// h1, h2 (equal split on both bundles), or nullopt. Only equal-rank
/// rank-(1,1) summand splittings are searched, which is what the stability
/// rules below can decide.
inline std::optional<int> block_count(const triple& T, double tol = 1e-12) {
    if (T.rank1() != T.rank2()) return std::nullopt;
    const int r = T.rank1();
    if (r == 1) return 1;
    auto offdiag = [&](const field& f) {
        double m = 0.0;
        for (int p = 0; p < f.rows; ++p)
            for (int q = 0; q < f.cols; ++q) {
                if (p == q) continue;
                const cd* pl = f.plane(p, q);
                for (int i = 0; i < f.nodes(); ++i) m = std::max(m, std::abs(pl[i]));
            }
        return m;
    };
    double m = std::max({offdiag(T.e1.beta), offdiag(T.e2.beta), offdiag(T.phi),
                         offdiag(T.h1.h), offdiag(T.h2.h)});
    if (m <= tol) return r;  // fully diagonal: r rank-(1,1) summands
    return std::nullopt;
}

}  // namespace detail

/// Verdict for rank (1,1) triples and diagonal direct sums of them; all other
/// configurations report `unsupported` rather than guessing (the definition
/// quantifies over all coherent subsheaves).
///
/// Rank (1,1), degrees zero, phi != 0: the only saturated proper subtriple is
/// (E1, 0), so stability is alpha > 0, with equality the semistable case.
/// phi == 0: subtriples (E1,0) and (0,E2) have slopes 0 and alpha against
/// total slope alpha/2; never stable, polystable exactly at alpha = 0.
inline stability check_stability(const triple& T, double phi_tol = 1e-12) {
    auto blocks = detail::block_count(T);
    if (!blocks) return stability::unsupported;
    const double alpha = T.alpha;
    auto verdict_11 = [&](bool phi_nonzero) {
        if (phi_nonzero) {
            if (alpha > 0.0) return stability::stable;
            if (alpha == 0.0) return stability::semistable_not_stable;
            return stability::unstable;
        }
        if (alpha == 0.0) return stability::polystable;
        return stability::unstable;
    };
    if (*blocks == 1) {
        return verdict_11(sup_norm(T.phi) > phi_tol);
    }
    // Diagonal sum of rank-(1,1) triples: all summand alpha-slopes equal
    // alpha/2 automatically, so the sum is polystable iff every summand is
    // stable or polystable.
    bool all_solid = true;
    for (int b = 0; b < *blocks; ++b) {
        double phn = 0.0;
        const cd* pl = T.phi.plane(b, b);
        for (int i = 0; i < T.phi.nodes(); ++i) phn = std::max(phn, std::abs(pl[i]));
        stability s = verdict_11(phn > phi_tol);
        if (s == stability::unstable) return stability::unstable;
        if (s == stability::semistable_not_stable) all_solid = false;
    }
    return all_solid ? stability::polystable : stability::semistable_not_stable;
}

}  // namespace vortex
