#pragma once

#include <atomic>
#include <functional>
#include <map>
#include <thread>

#include "vortex/solver.hpp"

namespace vortex {

/// Grid index of a family member: one (x,y) integer pair per complex
/// direction, flattened as [x1, y1, x2, y2, ...]. The parameter value is
/// s_i = delta * (x_i + i y_i).
using sindex = std::vector<int>;

inline sindex center_index(int m) { return sindex(static_cast<std::size_t>(2 * m), 0); }

inline sindex shifted(sindex idx, int axis, int step) {
    idx[static_cast<std::size_t>(axis)] += step;
    return idx;
}

struct family_member {
    triple T;
    solve_result sol;
};

/// A holomorphic family of triples over a polydisc, sampled on the integer
/// grid with step `delta` per real axis. Members are generated on demand,
/// solved with warm starts from the nearest already-solved neighbor, and
/// memoized. The generator must produce data holomorphic in s; every member
/// is validated against the holomorphy tolerance when constructed.
class triple_family {
  public:
    using generator_fn = std::function<triple(const std::vector<cd>&)>;

    triple_family(const torus_base& X, int m, double delta, generator_fn gen,
                  solve_config cfg = {})
        : X_(&X), m_(m), delta_(delta), gen_(std::move(gen)), cfg_(cfg) {
        if (m_ < 1) throw dimension_error("triple_family: need at least one direction");
        if (!(delta_ > 0.0)) throw error("triple_family: delta must be positive");
    }

    const torus_base& X() const { return *X_; }
    int directions() const { return m_; }
    double delta() const { return delta_; }
    const solve_config& config() const { return cfg_; }

    std::vector<cd> s_of(const sindex& idx) const {
        if (static_cast<int>(idx.size()) != 2 * m_) throw dimension_error("s_of: index size");
        std::vector<cd> s(static_cast<std::size_t>(m_));
        for (int i = 0; i < m_; ++i)
            s[static_cast<std::size_t>(i)] = delta_ * cd(idx[static_cast<std::size_t>(2 * i)],
                                                         idx[static_cast<std::size_t>(2 * i + 1)]);
        return s;
    }

    triple unsolved(const sindex& idx) const { return gen_(s_of(idx)); }

    /// Solved member at the given grid index (memoized).
    const family_member& member(const sindex& idx) {
        auto it = cache_.find(idx);
        if (it != cache_.end()) return it->second;
        family_member mem;
        mem.T = gen_(s_of(idx));
        if (const family_member* nb = nearest_solved(idx)) {
            mem.T.h1 = nb->T.h1;
            mem.T.h2 = nb->T.h2;
        }
        mem.sol = solve_coupled_vortex(mem.T, cfg_);
        if (mem.sol.status != solve_status::converged)
            throw convergence_error("family member did not converge at grid index " +
                                    index_name(idx) + (mem.sol.note.empty() ? "" : ": " + mem.sol.note));
        mem.T.h1 = mem.sol.h1;
        mem.T.h2 = mem.sol.h2;
        return cache_.emplace(idx, std::move(mem)).first->second;
    }

    const triple& solved(const sindex& idx) { return member(idx).T; }

    /// Solves a batch of members, optionally with worker threads capped by
    /// the VORTEX_MAX_WORKERS environment variable (default: sequential).
    void prefetch(const std::vector<sindex>& indices) {
        int workers = 1;
        if (const char* env = std::getenv("VORTEX_MAX_WORKERS"))
            workers = std::max(1, std::atoi(env));
        workers = std::min<int>(workers, std::max(1u, std::thread::hardware_concurrency()));
        if (workers <= 1) {
            for (const sindex& idx : indices) member(idx);
            return;
        }
        // Solve independent members in waves; results merge deterministically
        // because each member's solve depends only on its own data (warm
        // starts only read already-merged cache entries).
        std::size_t pos = 0;
        while (pos < indices.size()) {
            std::size_t batch = std::min<std::size_t>(static_cast<std::size_t>(workers),
                                                      indices.size() - pos);
            std::vector<std::pair<sindex, family_member>> results(batch);
            std::vector<std::thread> pool;
            for (std::size_t b = 0; b < batch; ++b) {
                const sindex idx = indices[pos + b];
                if (cache_.count(idx)) {
                    results[b].first.clear();
                    continue;
                }
                results[b].first = idx;
                pool.emplace_back([this, idx, &results, b]() {
                    family_member mem;
                    mem.T = gen_(s_of(idx));
                    if (const family_member* nb = nearest_solved(idx)) {
                        mem.T.h1 = nb->T.h1;
                        mem.T.h2 = nb->T.h2;
                    }
                    mem.sol = solve_coupled_vortex(mem.T, cfg_);
                    mem.T.h1 = mem.sol.h1;
                    mem.T.h2 = mem.sol.h2;
                    results[b].second = std::move(mem);
                });
            }
            for (auto& th : pool) th.join();
            for (auto& [idx, mem] : results) {
                if (idx.empty()) continue;
                if (mem.sol.status != solve_status::converged)
                    throw convergence_error("family member did not converge at grid index " +
                                            index_name(idx));
                cache_.emplace(idx, std::move(mem));
            }
            pos += batch;
        }
    }

    int solved_count() const { return static_cast<int>(cache_.size()); }

    // ---- samplers ----
    field metric(int nu, const sindex& idx) { return nu == 1 ? solved(idx).h1.h : solved(idx).h2.h; }
    field phi(const sindex& idx) { return solved(idx).phi; }
    field beta(int nu, const sindex& idx) {
        return nu == 1 ? solved(idx).e1.beta : solved(idx).e2.beta;
    }

    // ---- complex-step central differences over the member grid ----

    /// d/ds_i (bar=false) or d/dsbar_i (bar=true) of a field-valued sampler.
    template <typename F>
    field fd1(F&& f, int dir, bool bar, const sindex& at, int stride) {
        const double h = stride * delta_;
        field fx_p = f(shifted(at, 2 * dir, stride));
        field fx_m = f(shifted(at, 2 * dir, -stride));
        field fy_p = f(shifted(at, 2 * dir + 1, stride));
        field fy_m = f(shifted(at, 2 * dir + 1, -stride));
        field out = fx_p;
        out -= fx_m;
        out *= cd(1.0 / (4.0 * h), 0.0);
        fy_p -= fy_m;
        fy_p *= (bar ? iu : -iu) * (1.0 / (4.0 * h));
        out += fy_p;
        return out;
    }

    /// d^2/ds_i ds_k of a sampler (both holomorphic derivatives).
    template <typename F>
    field fd2(F&& f, int di, int dk, const sindex& at, int stride) {
        if (di != dk) {
            auto inner = [&](const sindex& idx) { return fd1(f, dk, false, idx, stride); };
            return fd1(inner, di, false, at, stride);
        }
        const double h = stride * delta_;
        field f0 = f(at);
        field xx = f(shifted(at, 2 * di, stride));
        xx += f(shifted(at, 2 * di, -stride));
        xx -= f0;
        xx -= f0;
        field yy = f(shifted(at, 2 * di + 1, stride));
        yy += f(shifted(at, 2 * di + 1, -stride));
        yy -= f0;
        yy -= f0;
        sindex pp = shifted(shifted(at, 2 * di, stride), 2 * di + 1, stride);
        sindex pm = shifted(shifted(at, 2 * di, stride), 2 * di + 1, -stride);
        sindex mp = shifted(shifted(at, 2 * di, -stride), 2 * di + 1, stride);
        sindex mm = shifted(shifted(at, 2 * di, -stride), 2 * di + 1, -stride);
        field xy = f(pp);
        xy -= f(pm);
        xy -= f(mp);
        xy += f(mm);
        field out = xx;
        out -= yy;
        out *= cd(0.25 / (h * h), 0.0);
        xy *= cd(0.0, -0.5 / (4.0 * h * h));
        out += xy;
        return out;
    }

    /// d^2/ds_i dsbar_j of a sampler.
    template <typename F>
    field fd_mixed(F&& f, int i, int jbar, const sindex& at, int stride) {
        if (i != jbar) {
            auto inner = [&](const sindex& idx) { return fd1(f, jbar, true, idx, stride); };
            return fd1(inner, i, false, at, stride);
        }
        const double h = stride * delta_;
        field f0 = f(at);
        field out = f(shifted(at, 2 * i, stride));
        out += f(shifted(at, 2 * i, -stride));
        out += f(shifted(at, 2 * i + 1, stride));
        out += f(shifted(at, 2 * i + 1, -stride));
        out -= f0;
        out -= f0;
        out -= f0;
        out -= f0;
        out *= cd(0.25 / (h * h), 0.0);
        return out;
    }

    // ---- family connection and curvature data ----

    /// S-direction Chern connection theta_i = H^{-1} d_i H of bundle nu.
    field theta_s(int nu, int i, const sindex& at, int stride) {
        field dh = fd1([&](const sindex& idx) { return metric(nu, idx); }, i, false, at, stride);
        return mat_mul(mat_inv(metric(nu, at)), dh);
    }

    /// T_{ik} = H^{-1} d_i d_k H (symmetric curvature-free second derivative).
    field theta_second(int nu, int i, int k, const sindex& at, int stride) {
        field d2h = fd2([&](const sindex& idx) { return metric(nu, idx); }, i, k, at, stride);
        return mat_mul(mat_inv(metric(nu, at)), d2h);
    }

    /// Covariant s-derivative of Phi: Phi_{;i} = d_i Phi + theta1_i Phi -
    /// Phi theta2_i.
    field phi_cov(int i, const sindex& at, int stride) {
        field dphi = fd1([&](const sindex& idx) { return phi(idx); }, i, false, at, stride);
        field th1 = theta_s(1, i, at, stride);
        field th2 = theta_s(2, i, at, stride);
        field out = dphi;
        out += mat_mul(th1, phi(at));
        out -= mat_mul(phi(at), th2);
        return out;
    }

    /// Mixed curvature R_{i zbar} = d_i beta - dbar_z theta_i + [theta_i, beta].
    field mixed_curvature(int nu, int i, const sindex& at, int stride) {
        const torus_base& Xb = X();
        field dbeta = fd1([&](const sindex& idx) { return beta(nu, idx); }, i, false, at, stride);
        field th = theta_s(nu, i, at, stride);
        field out = dbeta;
        field dzb = Xb.deriv_zbar(th);
        dzb.type = form_type::f01;
        out -= dzb;
        out += commutator(th, beta(nu, at), form_type::f01);
        return out;
    }

    /// Base-direction metric curvature R_{i jbar} = -dbar_j theta_i.
    field base_curvature(int nu, int i, int jbar, const sindex& at, int stride) {
        auto th = [&](const sindex& idx) { return theta_s(nu, i, idx, stride); };
        field out = fd1(th, jbar, true, at, stride);
        out *= cd(-1.0, 0.0);
        return out;
    }

  private:
    static std::string index_name(const sindex& idx) {
        std::string s = "(";
        for (std::size_t i = 0; i < idx.size(); ++i)
            s += std::to_string(idx[i]) + (i + 1 < idx.size() ? "," : ")");
        return s;
    }

    const family_member* nearest_solved(const sindex& idx) const {
        const family_member* best = nullptr;
        long best_d = -1;
        for (const auto& [k, v] : cache_) {
            long d = 0;
            for (std::size_t i = 0; i < idx.size(); ++i) d += std::abs(idx[i] - k[i]);
            if (best_d < 0 || d < best_d) {
                best_d = d;
                best = &v;
            }
        }
        return best;
    }

    const torus_base* X_;
    int m_;
    double delta_;
    generator_fn gen_;
    solve_config cfg_;
    std::map<sindex, family_member> cache_;
};

/// One rank-(1,1) summand of a structured family: phi = c exp(-w xi) on the
/// block diagonal, beta1 = w (v0 + dbar xi), beta2 = w v0, with
/// w(s) = offset + s_b + sum_{k<=l} quad_{kl} s_k s_l holomorphic.
struct block_spec {
    cd c{1.0, 0.0};
    cd v0{1.0, 0.0};
    cd offset{0.0, 0.0};
    field xi;  // scalar potential; empty means undressed
    std::vector<std::vector<cd>> quad;  // m x m coefficient table (upper triangle used)
};

struct family_spec {
    double alpha = 1.0;
    std::vector<block_spec> blocks;
    double holomorphy_tol = 1e-8;
};

/// Builds the generator for a diagonal family of rank-(1,1) summands; block b
/// is driven by direction b.
inline triple_family::generator_fn make_block_generator(const torus_base& X, family_spec spec) {
    const int m = static_cast<int>(spec.blocks.size());
    return [&X, spec, m](const std::vector<cd>& s) {
        if (static_cast<int>(s.size()) != m) throw dimension_error("family generator: s size");
        field beta1(X.n(), m, m, form_type::f01);
        field beta2(X.n(), m, m, form_type::f01);
        field phi(X.n(), m, m, form_type::f00);
        for (int b = 0; b < m; ++b) {
            const block_spec& blk = spec.blocks[static_cast<std::size_t>(b)];
            cd w = blk.offset + s[static_cast<std::size_t>(b)];
            for (int k = 0; k < m; ++k)
                for (int l = k; l < m; ++l)
                    if (static_cast<int>(blk.quad.size()) > k &&
                        static_cast<int>(blk.quad[static_cast<std::size_t>(k)].size()) > l)
                        w += blk.quad[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)] *
                             s[static_cast<std::size_t>(k)] * s[static_cast<std::size_t>(l)];
            const bool dressed = !blk.xi.data.empty();
            cd* b1 = beta1.plane(b, b);
            cd* b2 = beta2.plane(b, b);
            cd* ph = phi.plane(b, b);
            if (dressed) {
                field dxi = X.dbar(blk.xi);
                for (int i = 0; i < X.nodes(); ++i) {
                    b1[i] = w * (blk.v0 + dxi.data[static_cast<std::size_t>(i)]);
                    b2[i] = w * blk.v0;
                    ph[i] = blk.c * std::exp(-w * blk.xi.data[static_cast<std::size_t>(i)]);
                }
            } else {
                for (int i = 0; i < X.nodes(); ++i) {
                    b1[i] = w * blk.v0;
                    b2[i] = w * blk.v0;
                    ph[i] = blk.c;
                }
            }
        }
        holomorphic_structure e1(m, beta1), e2(m, beta2);
        return make_triple(X, e1, e2, phi, spec.alpha, spec.holomorphy_tol);
    };
}

/// General family from explicit linear directions (d beta1, d beta2, d phi)
/// around a center triple. Directions that break the holomorphy of phi for
/// the perturbed structures surface as errors when members are built.
struct linear_direction {
    field dbeta1, dbeta2, dphi;
};

inline triple_family::generator_fn make_linear_generator(const torus_base& X, triple center,
                                                         std::vector<linear_direction> dirs,
                                                         double holomorphy_tol = 1e-8) {
    return [&X, center, dirs, holomorphy_tol](const std::vector<cd>& s) {
        if (s.size() != dirs.size()) throw dimension_error("family generator: s size");
        field b1 = center.e1.beta, b2 = center.e2.beta, ph = center.phi;
        for (std::size_t i = 0; i < dirs.size(); ++i) {
            field t = dirs[i].dbeta1;
            t *= s[i];
            b1 += t;
            t = dirs[i].dbeta2;
            t *= s[i];
            b2 += t;
            t = dirs[i].dphi;
            t *= s[i];
            ph += t;
        }
        holomorphic_structure e1(center.rank1(), b1), e2(center.rank2(), b2);
        return make_triple(X, e1, e2, ph, center.alpha, holomorphy_tol);
    };
}

/// make_family: validates the directions by building the center and one probe
/// member per axis, then checking a finite-difference Cauchy-Riemann
/// residual in s for phi. Invalid directions raise the holomorphy error from
/// make_triple; non-holomorphic parameter dependence is reported here.
inline triple_family make_family(const torus_base& X, int m, double delta,
                                 triple_family::generator_fn gen, solve_config cfg = {},
                                 double cr_tol_scale = 10.0) {
    triple_family fam(X, m, delta, std::move(gen), cfg);
    for (int i = 0; i < m; ++i) {
        auto phi_at = [&](const sindex& idx) { return fam.unsolved(idx).phi; };
        field cr = fam.fd1(phi_at, i, true, center_index(m), 1);
        double scale = sup_norm(fam.unsolved(center_index(m)).phi) + 1.0;
        if (sup_norm(cr) > cr_tol_scale * delta * delta * scale)
            throw error("make_family: phi is not holomorphic in direction " + std::to_string(i) +
                        " (Cauchy-Riemann residual " + std::to_string(sup_norm(cr)) + ")");
    }
    return fam;
}

}  // namespace vortex
