#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>

#include "mdbell/geometry.hpp"

namespace mdbell {

/// The four correlators entering a CHSH expression, each in [-1, 1].
struct CorrelatorQuad {
    double c_xy = 0.0;    // <X Y>
    double c_xyp = 0.0;   // <X Y'>
    double c_xpy = 0.0;   // <X' Y>
    double c_xpyp = 0.0;  // <X' Y'>
};

/// The 8 CHSH sign patterns (odd number of minus signs). Variant 0 is the
/// canonical pattern (+, +, +, -); variants 1-3 move the single minus left;
/// variants 4-7 are the global sign flips of 0-3 (same absolute value).
inline constexpr std::array<std::array<int, 4>, 8> kChshVariants = {{
    {{+1, +1, +1, -1}},
    {{+1, +1, -1, +1}},
    {{+1, -1, +1, +1}},
    {{-1, +1, +1, +1}},
    {{-1, -1, -1, +1}},
    {{-1, -1, +1, -1}},
    {{-1, +1, -1, -1}},
    {{+1, -1, -1, -1}},
}};

/// |s0 c_xy + s1 c_xy' + s2 c_x'y + s3 c_x'y'| for the given sign variant.
inline double chsh_value(const CorrelatorQuad& quad, std::size_t variant) {
    if (variant >= kChshVariants.size()) {
        throw std::invalid_argument("chsh_value: variant index out of range");
    }
    const auto& s = kChshVariants[variant];
    return std::fabs(s[0] * quad.c_xy + s[1] * quad.c_xyp + s[2] * quad.c_xpy +
                     s[3] * quad.c_xpyp);
}

/// Maximum CHSH value over all 8 variants; ties resolve to the lowest index.
inline std::pair<double, std::size_t> chsh_max(const CorrelatorQuad& quad) {
    double best = chsh_value(quad, 0);
    std::size_t arg = 0;
    for (std::size_t v = 1; v < kChshVariants.size(); ++v) {
        const double val = chsh_value(quad, v);
        if (val > best) {
            best = val;
            arg = v;
        }
    }
    return {best, arg};
}

/// Is B <= 2 + M + tol? M must lie in [0, 2].
inline bool bound_check(double b, double m, double tol) {
    if (!(m >= 0.0 && m <= 2.0)) {
        throw std::invalid_argument("bound_check: M must lie in [0, 2]");
    }
    if (!(tol >= 0.0)) {
        throw std::invalid_argument("bound_check: tol must be >= 0");
    }
    return b <= 2.0 + m + tol;
}

/// CHSH summary against the relaxed bound 2 + M.
struct ChshReport {
    std::array<double, 8> value_per_variant{};
    double max_value = 0.0;
    std::size_t argmax_variant = 0;
    double bound = 2.0;  // 2 + M
    double tolerance = 0.0;
    bool satisfied = true;
};

inline ChshReport chsh_report(const CorrelatorQuad& quad, double m, double tol) {
    ChshReport report;
    for (std::size_t v = 0; v < kChshVariants.size(); ++v) {
        report.value_per_variant[v] = chsh_value(quad, v);
    }
    const auto [max_value, argmax] = chsh_max(quad);
    report.max_value = max_value;
    report.argmax_variant = argmax;
    report.bound = 2.0 + m;
    report.tolerance = tol;
    report.satisfied = bound_check(max_value, m, tol);
    return report;
}

/// Measurement directions reaching the quantum CHSH maximum 2*sqrt(2) on
/// variant 0 when the correlators are -X.Y:
///   X = (1,0,0), X' = (0,1,0), Y = -(1,1,0)/sqrt2, Y' = (-1,1,0)/sqrt2.
struct ChshSettings {
    UnitVec3 x;
    UnitVec3 xp;
    UnitVec3 y;
    UnitVec3 yp;
};

inline ChshSettings quantum_optimal_settings() {
    return ChshSettings{unit(1.0, 0.0, 0.0), unit(0.0, 1.0, 0.0), unit(-1.0, -1.0, 0.0),
                        unit(-1.0, 1.0, 0.0)};
}

}  // namespace mdbell
