#pragma once

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>

#include "vortex/core.hpp"

namespace vortex {

/// Planned 2D complex FFTs for one grid size, with owned aligned buffers.
///
/// Plans use FFTW_ESTIMATE so that plan selection (and hence floating-point
/// rounding) is reproducible across runs. Each thread gets its own engine
/// through for_grid(); plan creation is serialized globally.
class spectral_engine {
  public:
    explicit spectral_engine(int n) : n_(n), nn_(n * n) {
        std::lock_guard<std::mutex> lock(plan_mutex());
        buf_ = fftw_alloc_complex(static_cast<std::size_t>(nn_));
        fwd_ = fftw_plan_dft_2d(n, n, buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft_2d(n, n, buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
        if (!buf_ || !fwd_ || !bwd_) throw error("spectral_engine: fftw setup failed");
    }

    ~spectral_engine() {
        std::lock_guard<std::mutex> lock(plan_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(buf_);
    }

    spectral_engine(const spectral_engine&) = delete;
    spectral_engine& operator=(const spectral_engine&) = delete;

    int n() const { return n_; }

    /// In-place multiplication of the spectrum of `io` by `symbol` (length n*n,
    /// indexed like the grid with frequency index k = kx*n + ky).
    void apply_symbol(cd* io, const cd* symbol) {
        cd* b = reinterpret_cast<cd*>(buf_);
        for (int i = 0; i < nn_; ++i) b[i] = io[i];
        fftw_execute(fwd_);
        const double norm = 1.0 / nn_;
        for (int i = 0; i < nn_; ++i) b[i] *= symbol[i] * norm;
        fftw_execute(bwd_);
        for (int i = 0; i < nn_; ++i) io[i] = b[i];
    }

    /// Evaluates the trigonometric polynomial with the given spectrum:
    /// out[x] = sum_k coef[k] exp(+2 pi i <k,x>/n).
    void synthesize(const cd* coef, cd* out) {
        cd* b = reinterpret_cast<cd*>(buf_);
        for (int i = 0; i < nn_; ++i) b[i] = coef[i];
        fftw_execute(bwd_);
        for (int i = 0; i < nn_; ++i) out[i] = b[i];
    }

    /// Thread-local engine cache.
    static spectral_engine& for_grid(int n) {
        thread_local std::map<int, std::unique_ptr<spectral_engine>> cache;
        auto it = cache.find(n);
        if (it == cache.end())
            it = cache.emplace(n, std::make_unique<spectral_engine>(n)).first;
        return *it->second;
    }

  private:
    static std::mutex& plan_mutex() {
        static std::mutex m;
        return m;
    }

    int n_, nn_;
    fftw_complex* buf_ = nullptr;
    fftw_plan fwd_ = nullptr;
    fftw_plan bwd_ = nullptr;
};

/// Signed frequency for index i on an n-grid: 0,1,...,n/2-1,-n/2,...,-1.
inline int signed_freq(int i, int n) { return (i < n / 2) ? i : i - n; }

}  // namespace vortex
