#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace vortex {

using cd = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846264338327950288;
inline constexpr double two_pi = 2.0 * pi;
inline constexpr cd iu{0.0, 1.0};

struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Lattice modulus with non-positive imaginary part.
struct invalid_lattice_error : error { using error::error; };
/// Grid size odd, too small, or otherwise unusable.
struct invalid_grid_error : error { using error::error; };
/// Field shapes or ranks do not match.
struct dimension_error : error { using error::error; };
/// Operation applied to a field with the wrong (p,q) tag.
struct bidegree_error : error { using error::error; };
/// Metric not positive definite (or not Hermitian) somewhere.
struct metric_error : error { using error::error; };
/// Iterative solve exceeded its budget.
struct convergence_error : error { using error::error; };
/// Binary grid file malformed.
struct format_error : error { using error::error; };
/// Config file malformed; carries a line number when known.
struct config_error : error {
    explicit config_error(const std::string& msg, int line_no = -1)
        : error(line_no >= 0 ? "line " + std::to_string(line_no) + ": " + msg : msg),
          line(line_no) {}
    int line;
};
/// A step was invoked before its inputs were prepared (e.g. unsolved family).
struct precondition_error : error { using error::error; };

/// (p,q) bidegree of a field on the torus. f02 tags the structural (0,2)
/// slots of the complex, which are identically zero on a curve.
enum class form_type : std::uint16_t { f00 = 0, f01 = 1, f10 = 2, f11 = 3, f02 = 4 };

inline const char* form_name(form_type t) {
    switch (t) {
        case form_type::f00: return "(0,0)";
        case form_type::f01: return "(0,1)";
        case form_type::f10: return "(1,0)";
        case form_type::f11: return "(1,1)";
        case form_type::f02: return "(0,2)";
    }
    return "?";
}

inline void require(bool cond, const char* what) {
    if (!cond) throw error(what);
}

}  // namespace vortex
