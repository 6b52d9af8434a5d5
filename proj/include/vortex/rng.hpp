#pragma once

#include <cstdint>

#include "vortex/torus.hpp"

namespace vortex {

/// splitmix64: tiny, fully portable generator; identical streams everywhere.
class rng {
  public:
    explicit rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [-1, 1).
    double next_sym() {
        return static_cast<double>(static_cast<std::int64_t>(next_u64())) * 0x1p-63;
    }

    cd next_complex() {
        double a = next_sym(), b = next_sym();
        return cd(a, b);
    }

  private:
    std::uint64_t state_;
};

/// Band-limited random scalar field: modes with |m|,|n| <= cutoff and
/// spectrum decaying like (1+m^2+n^2)^-2, rescaled to sup-norm `amp`.
/// With hermitian=true the field is real.
inline field random_band_limited(const torus_base& X, rng& r, int cutoff, double amp,
                                 bool hermitian = false, bool zero_mean = false) {
    const int n = X.n();
    field coef(n, 1, 1, form_type::f00);
    for (int m = -cutoff; m <= cutoff; ++m) {
        for (int k = -cutoff; k <= cutoff; ++k) {
            double w = 1.0 + m * m + k * k;
            cd c = r.next_complex() / (w * w);
            int ix = (m + n) % n, iy = (k + n) % n;
            coef.data[static_cast<std::size_t>(ix * n + iy)] += c;
            if (hermitian) {
                int jx = (n - ix) % n, jy = (n - iy) % n;
                coef.data[static_cast<std::size_t>(jx * n + jy)] += std::conj(c);
            }
        }
    }
    if (zero_mean) coef.data[0] = 0.0;
    field out(n, 1, 1, form_type::f00);
    spectral_engine::for_grid(n).synthesize(coef.data.data(), out.data.data());
    double s = sup_norm(out);
    if (s > 0.0) out *= cd(amp / s, 0.0);
    return out;
}

/// Random matrix field with band-limited entries.
inline field random_matrix_field(const torus_base& X, rng& r, int rows, int cols, int cutoff,
                                 double amp, form_type t = form_type::f00) {
    field out(X.n(), rows, cols, t);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) {
            field s = random_band_limited(X, r, cutoff, amp);
            std::copy(s.data.begin(), s.data.end(), out.plane(i, j));
        }
    return out;
}

}  // namespace vortex
