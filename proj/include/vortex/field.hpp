#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "vortex/core.hpp"

namespace vortex {

/// Grid of complex rows x cols matrices over the N x N torus grid.
///
/// Storage is component-major: entry (r,c) of every node forms one
/// contiguous plane of n*n values, so spectral transforms run per plane.
/// Node index is ix*n + iy with x the first lattice coordinate.
struct field {
    int n = 0;
    int rows = 0;
    int cols = 0;
    form_type type = form_type::f00;
    std::vector<cd> data;

    field() = default;
    field(int n_, int rows_, int cols_, form_type t)
        : n(n_), rows(rows_), cols(cols_), type(t),
          data(static_cast<std::size_t>(n_) * n_ * rows_ * cols_, cd{0.0, 0.0}) {}

    int nodes() const { return n * n; }
    int comps() const { return rows * cols; }
    bool scalar() const { return rows == 1 && cols == 1; }

    cd* plane(int r, int c) { return data.data() + static_cast<std::size_t>(r * cols + c) * nodes(); }
    const cd* plane(int r, int c) const {
        return data.data() + static_cast<std::size_t>(r * cols + c) * nodes();
    }
    cd& at(int r, int c, int node) { return plane(r, c)[node]; }
    const cd& at(int r, int c, int node) const { return plane(r, c)[node]; }

    bool same_shape(const field& o) const {
        return n == o.n && rows == o.rows && cols == o.cols;
    }
};

inline void check_shape(const field& a, const field& b, const char* where) {
    if (!a.same_shape(b)) throw dimension_error(std::string(where) + ": shape mismatch");
}

inline void check_type(const field& a, form_type t, const char* where) {
    if (a.type != t)
        throw bidegree_error(std::string(where) + ": expected " + form_name(t) + ", got " +
                             form_name(a.type));
}

inline field zeros_like(const field& a) { return field(a.n, a.rows, a.cols, a.type); }

inline field constant_matrix(int n, int rows, int cols, const std::vector<cd>& m,
                             form_type t = form_type::f00) {
    field f(n, rows, cols, t);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            std::fill_n(f.plane(r, c), f.nodes(), m[static_cast<std::size_t>(r * cols + c)]);
    return f;
}

inline field identity_field(int n, int rank, form_type t = form_type::f00) {
    field f(n, rank, rank, t);
    for (int r = 0; r < rank; ++r) std::fill_n(f.plane(r, r), f.nodes(), cd{1.0, 0.0});
    return f;
}

inline field& operator+=(field& a, const field& b) {
    check_shape(a, b, "field +=");
    for (std::size_t i = 0; i < a.data.size(); ++i) a.data[i] += b.data[i];
    return a;
}

inline field& operator-=(field& a, const field& b) {
    check_shape(a, b, "field -=");
    for (std::size_t i = 0; i < a.data.size(); ++i) a.data[i] -= b.data[i];
    return a;
}

inline field& operator*=(field& a, cd s) {
    for (auto& v : a.data) v *= s;
    return a;
}

inline field operator+(field a, const field& b) { a += b; return a; }
inline field operator-(field a, const field& b) { a -= b; return a; }
inline field operator*(cd s, field a) { a *= s; return a; }

/// Pointwise matrix product a*b; result type tag supplied by caller.
inline field mat_mul(const field& a, const field& b, form_type t) {
    if (a.cols != b.rows || a.n != b.n) throw dimension_error("mat_mul: incompatible shapes");
    field out(a.n, a.rows, b.cols, t);
    const int nn = a.nodes();
    for (int r = 0; r < a.rows; ++r)
        for (int c = 0; c < b.cols; ++c) {
            cd* dst = out.plane(r, c);
            for (int k = 0; k < a.cols; ++k) {
                const cd* pa = a.plane(r, k);
                const cd* pb = b.plane(k, c);
                for (int i = 0; i < nn; ++i) dst[i] += pa[i] * pb[i];
            }
        }
    return out;
}

inline field mat_mul(const field& a, const field& b) { return mat_mul(a, b, a.type); }

/// Pointwise commutator [a,b] = ab - ba for square fields.
inline field commutator(const field& a, const field& b, form_type t) {
    field ab = mat_mul(a, b, t);
    field ba = mat_mul(b, a, t);
    ab -= ba;
    return ab;
}

/// Pointwise scalar * matrix.
inline field scalar_mul(const field& s, const field& a, form_type t) {
    if (!s.scalar() || s.n != a.n) throw dimension_error("scalar_mul");
    field out(a.n, a.rows, a.cols, t);
    const int nn = a.nodes();
    for (int c = 0; c < a.comps(); ++c) {
        const cd* pa = a.data.data() + static_cast<std::size_t>(c) * nn;
        cd* dst = out.data.data() + static_cast<std::size_t>(c) * nn;
        for (int i = 0; i < nn; ++i) dst[i] = s.data[static_cast<std::size_t>(i)] * pa[i];
    }
    return out;
}

/// Pointwise conjugate transpose (plain dagger, no metric).
inline field dagger(const field& a, form_type t) {
    field out(a.n, a.cols, a.rows, t);
    const int nn = a.nodes();
    for (int r = 0; r < a.rows; ++r)
        for (int c = 0; c < a.cols; ++c) {
            const cd* src = a.plane(r, c);
            cd* dst = out.plane(c, r);
            for (int i = 0; i < nn; ++i) dst[i] = std::conj(src[i]);
        }
    return out;
}

/// Pointwise trace of a square field.
inline field trace(const field& a) {
    if (a.rows != a.cols) throw dimension_error("trace: not square");
    field out(a.n, 1, 1, a.type);
    for (int r = 0; r < a.rows; ++r) {
        const cd* p = a.plane(r, r);
        for (int i = 0; i < a.nodes(); ++i) out.data[static_cast<std::size_t>(i)] += p[i];
    }
    return out;
}

/// Pointwise inverse of a small square matrix field (Gauss-Jordan, rank <= 4 expected).
inline field mat_inv(const field& a) {
    if (a.rows != a.cols) throw dimension_error("mat_inv: not square");
    const int r = a.rows;
    field out = identity_field(a.n, r, a.type);
    if (r == 1) {
        const cd* p = a.plane(0, 0);
        cd* q = out.plane(0, 0);
        for (int i = 0; i < a.nodes(); ++i) q[i] = 1.0 / p[i];
        return out;
    }
    const int nn = a.nodes();
    std::vector<cd> m(static_cast<std::size_t>(r) * r), inv(static_cast<std::size_t>(r) * r);
    for (int i = 0; i < nn; ++i) {
        for (int p = 0; p < r; ++p)
            for (int q = 0; q < r; ++q) {
                m[static_cast<std::size_t>(p * r + q)] = a.at(p, q, i);
                inv[static_cast<std::size_t>(p * r + q)] = (p == q) ? cd{1.0, 0.0} : cd{0.0, 0.0};
            }
        for (int col = 0; col < r; ++col) {
            int piv = col;
            double best = std::abs(m[static_cast<std::size_t>(col * r + col)]);
            for (int p = col + 1; p < r; ++p) {
                double v = std::abs(m[static_cast<std::size_t>(p * r + col)]);
                if (v > best) { best = v; piv = p; }
            }
            if (best == 0.0) throw metric_error("mat_inv: singular matrix at a grid node");
            if (piv != col)
                for (int q = 0; q < r; ++q) {
                    std::swap(m[static_cast<std::size_t>(piv * r + q)], m[static_cast<std::size_t>(col * r + q)]);
                    std::swap(inv[static_cast<std::size_t>(piv * r + q)], inv[static_cast<std::size_t>(col * r + q)]);
                }
            cd d = 1.0 / m[static_cast<std::size_t>(col * r + col)];
            for (int q = 0; q < r; ++q) {
                m[static_cast<std::size_t>(col * r + q)] *= d;
                inv[static_cast<std::size_t>(col * r + q)] *= d;
            }
            for (int p = 0; p < r; ++p) {
                if (p == col) continue;
                cd f = m[static_cast<std::size_t>(p * r + col)];
                if (f == cd{0.0, 0.0}) continue;
                for (int q = 0; q < r; ++q) {
                    m[static_cast<std::size_t>(p * r + q)] -= f * m[static_cast<std::size_t>(col * r + q)];
                    inv[static_cast<std::size_t>(p * r + q)] -= f * inv[static_cast<std::size_t>(col * r + q)];
                }
            }
        }
        for (int p = 0; p < r; ++p)
            for (int q = 0; q < r; ++q) out.at(p, q, i) = inv[static_cast<std::size_t>(p * r + q)];
    }
    return out;
}

inline double sup_norm(const field& a) {
    double m = 0.0;
    for (const auto& v : a.data) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace vortex
