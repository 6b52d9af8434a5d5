#pragma once

#include <cmath>
#include <numeric>

#include "vortex/fft.hpp"
#include "vortex/field.hpp"

namespace vortex {

/// Flat torus X = C/(Z + tau Z) with an N x N spectral grid.
///
/// Coordinates are z = x + tau*y with (x,y) in [0,1)^2. The Kahler form is
/// omega = i*g dz^dzbar with constant g chosen so the total volume is 2*pi.
/// All derivatives act mode-exactly on the Fourier basis e(m,n) =
/// exp(2*pi*i(m x + n y)) over the full symmetric frequency range, so
/// d/dz and d/dzbar are exactly adjoint and the Laplacian kernel is exactly
/// the constants.
class torus_base {
  public:
    torus_base(cd tau_lattice, int n_grid) : tau_(tau_lattice), n_(n_grid) {
        if (!(tau_.imag() > 0.0)) throw invalid_lattice_error("Im(tau) must be positive");
        if (n_ < 8 || n_ % 2 != 0) throw invalid_grid_error("n_grid must be even and >= 8");
        g_ = pi / tau_.imag();
        const int nn = n_ * n_;
        sym_dz_.resize(nn);
        sym_dzbar_.resize(nn);
        sym_lap_.resize(nn);
        const double im = tau_.imag();
        for (int ix = 0; ix < n_; ++ix) {
            for (int iy = 0; iy < n_; ++iy) {
                const int m = signed_freq(ix, n_);
                const int nf = signed_freq(iy, n_);
                const int k = ix * n_ + iy;
                cd p = pi * (cd(nf, 0.0) - double(m) * std::conj(tau_)) / im;
                cd q = pi * (double(m) * tau_ - cd(nf, 0.0)) / im;
                sym_dz_[k] = p;
                sym_dzbar_[k] = q;
                sym_lap_[k] = std::norm(p) / g_;
            }
        }
    }

    cd tau() const { return tau_; }
    int n() const { return n_; }
    int nodes() const { return n_ * n_; }
    double g() const { return g_; }
    double volume() const { return two_pi; }

    double x_coord(int node) const { return double(node / n_) / n_; }
    double y_coord(int node) const { return double(node % n_) / n_; }
    cd z_coord(int node) const { return x_coord(node) + tau_ * y_coord(node); }

    /// Integral against the volume form; exact for band-limited integrands.
    cd integrate(const field& f) const {
        check_type(f, form_type::f00, "integrate");
        if (!f.scalar() || f.n != n_) throw dimension_error("integrate: scalar field expected");
        cd s = std::accumulate(f.data.begin(), f.data.end(), cd{0.0, 0.0});
        return s * (two_pi / double(nodes()));
    }

    /// Integral of the pointwise trace of a square matrix field.
    cd integrate_trace(const field& f) const {
        if (f.rows != f.cols || f.n != n_) throw dimension_error("integrate_trace");
        cd s{0.0, 0.0};
        for (int r = 0; r < f.rows; ++r) {
            const cd* p = f.plane(r, r);
            for (int i = 0; i < nodes(); ++i) s += p[i];
        }
        return s * (two_pi / double(nodes()));
    }

    field deriv_z(const field& f) const { return apply(f, sym_dz_.data(), raise_z(f.type)); }
    field deriv_zbar(const field& f) const { return apply(f, sym_dzbar_.data(), raise_zbar(f.type)); }

    /// dbar on (0,0) fields (componentwise; bundle twists live in bundle.hpp).
    field dbar(const field& f) const {
        check_type(f, form_type::f00, "dbar");
        return deriv_zbar(f);
    }

    field partial(const field& f) const {
        check_type(f, form_type::f00, "partial");
        return deriv_z(f);
    }

    /// Contraction dual to exterior multiplication by omega; Lambda(omega) = 1.
    field lambda_contract(const field& w) const {
        check_type(w, form_type::f11, "lambda_contract");
        field out = w;
        out.type = form_type::f00;
        out *= cd{0.0, -1.0} / g_;
        return out;
    }

    /// i*Lambda on a (1,1) field: the coefficient divided by g.
    field i_lambda(const field& w) const {
        check_type(w, form_type::f11, "i_lambda");
        field out = w;
        out.type = form_type::f00;
        out *= cd{1.0 / g_, 0.0};
        return out;
    }

    /// Nonnegative scalar Laplacian -(1/g) d_z d_zbar.
    field laplacian_scalar(const field& f) const {
        check_type(f, form_type::f00, "laplacian_scalar");
        field out = f;
        std::vector<cd> sym(sym_lap_.begin(), sym_lap_.end());
        apply_planes(out, sym.data());
        return out;
    }

    /// Solves laplacian u = f - mean(f); returns the mean-zero solution.
    field inverse_laplacian(const field& f) const {
        check_type(f, form_type::f00, "inverse_laplacian");
        field out = f;
        std::vector<cd> sym(nodes());
        for (int k = 0; k < nodes(); ++k)
            sym[k] = (sym_lap_[k] > 0.0) ? cd(1.0 / sym_lap_[k], 0.0) : cd(0.0, 0.0);
        apply_planes(out, sym.data());
        return out;
    }

    /// (laplacian + sigma)^-1 with the exact flat symbol; used as preconditioner.
    field shifted_inverse_laplacian(const field& f, double sigma) const {
        field out = f;
        std::vector<cd> sym(nodes());
        for (int k = 0; k < nodes(); ++k) sym[k] = cd(1.0 / (sym_lap_[k] + sigma), 0.0);
        apply_planes(out, sym.data());
        return out;
    }

    cd dz_symbol(int m, int nf) const {
        const double im = tau_.imag();
        return pi * (cd(nf, 0.0) - double(m) * std::conj(tau_)) / im;
    }

  private:
    static form_type raise_zbar(form_type t) {
        switch (t) {
            case form_type::f00: return form_type::f01;
            case form_type::f10: return form_type::f11;
            default: throw bidegree_error("deriv_zbar: no (0,2) forms on a curve");
        }
    }
    static form_type raise_z(form_type t) {
        switch (t) {
            case form_type::f00: return form_type::f10;
            case form_type::f01: return form_type::f11;
            default: throw bidegree_error("deriv_z: no (2,0) forms on a curve");
        }
    }

    field apply(const field& f, const cd* sym, form_type t) const {
        if (f.n != n_) throw dimension_error("torus_base: grid mismatch");
        field out = f;
        out.type = t;
        apply_planes(out, sym);
        return out;
    }

    void apply_planes(field& f, const cd* sym) const {
        auto& eng = spectral_engine::for_grid(n_);
        for (int c = 0; c < f.comps(); ++c)
            eng.apply_symbol(f.data.data() + static_cast<std::size_t>(c) * nodes(), sym);
    }

    cd tau_;
    int n_;
    double g_;
    std::vector<cd> sym_dz_, sym_dzbar_;
    std::vector<double> sym_lap_;
};

inline torus_base make_flat_torus(cd tau_lattice, int n_grid) {
    return torus_base(tau_lattice, n_grid);
}

/// L2 inner product of matrix fields: integral of tr(a * b^dagger).
/// This is the raw (metric-free) pairing; metric-aware pairings live with
/// the complex operators.
inline cd l2_raw(const torus_base& X, const field& a, const field& b) {
    check_shape(a, b, "l2_raw");
    cd s{0.0, 0.0};
    for (std::size_t i = 0; i < a.data.size(); ++i) s += a.data[i] * std::conj(b.data[i]);
    return s * (two_pi / double(X.nodes()));
}

}  // namespace vortex
