#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace mdbell {

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendreRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Computes the n-point rule by Newton iteration on the Legendre polynomial.
/// Results are cached; accuracy is machine precision for the sizes used here.
inline const GaussLegendreRule& gauss_legendre(std::size_t n) {
    static std::map<std::size_t, GaussLegendreRule> cache;
    static std::mutex mutex;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(n);
    if (it != cache.end()) {
        return it->second;
    }
    if (n == 0) {
        throw std::invalid_argument("gauss_legendre: n must be >= 1");
    }
    GaussLegendreRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const std::size_t half = (n + 1) / 2;
    for (std::size_t i = 1; i <= half; ++i) {
        double z = std::cos(M_PI * (static_cast<double>(i) - 0.25) /
                            (static_cast<double>(n) + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p1 = 1.0;
            double p2 = 0.0;
            for (std::size_t j = 1; j <= n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / static_cast<double>(j);
            }
            pp = static_cast<double>(n) * (z * p1 - p2) / (z * z - 1.0);
            const double z1 = z;
            z = z1 - p1 / pp;
            if (std::fabs(z - z1) < 1e-15) {
                break;
            }
        }
        rule.nodes[i - 1] = -z;
        rule.nodes[n - i] = z;
        rule.weights[i - 1] = 2.0 / ((1.0 - z * z) * pp * pp);
        rule.weights[n - i] = rule.weights[i - 1];
    }
    return cache.emplace(n, std::move(rule)).first->second;
}

/// Gauss-Legendre integral of f over [a, b] with the n-point rule.
template <typename F>
double integrate(F&& f, double a, double b, std::size_t n = 32) {
    const GaussLegendreRule& rule = gauss_legendre(n);
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double sum = 0.0;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        sum += rule.weights[k] * f(mid + half * rule.nodes[k]);
    }
    return half * sum;
}

/// Integral over [pts.front(), pts.back()] split at the given interior points.
/// Use this when f is smooth between known kinks: one fixed rule per piece then
/// reaches machine precision.
template <typename F>
double integrate_over_pieces(F&& f, const std::vector<double>& pts, std::size_t n = 32) {
    if (pts.size() < 2) {
        throw std::invalid_argument("integrate_over_pieces: need at least two breakpoints");
    }
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        if (pts[k + 1] > pts[k]) {
            total += integrate(f, pts[k], pts[k + 1], n);
        }
    }
    return total;
}

/// Integral of f over [0, upper] for integrands with a weak endpoint singularity
/// at 0 (think c * log c): geometric bisection toward 0, one fixed rule per piece.
/// `levels` dyadic pieces are used; the remaining [0, upper * 2^-levels] stub is
/// dropped, so pick `levels` large enough that its analytic bound is negligible.
template <typename F>
double integrate_dyadic_to_zero(F&& f, double upper, int levels, std::size_t n = 32) {
    double total = 0.0;
    double hi = upper;
    for (int k = 0; k < levels; ++k) {
        const double lo = hi * 0.5;
        total += integrate(f, lo, hi, n);
        hi = lo;
    }
    return total;
}

}  // namespace mdbell
