#pragma once

// psi_p Orlicz norms on the uniform finite probability space.
//
// ||f||_{psi_p} is the infimum of lambda > 0 with mean exp(|f|^p / lambda^p) <= e.
// For f != 0 the map lambda -> log mean exp(|f|^p / lambda^p) is strictly
// decreasing, so the root of log-mean = 1 is unique and found by bisection.
// The log-mean is evaluated with a log-sum-exp shift, which keeps every
// exponent finite whatever the ratio |f|/lambda.

#include "coordproj/core.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <span>

namespace coordproj {

struct PsiNormResult {
    double value = 0.0;
    double p = 1.0;
    int iterations = 0;
    /// |log mean exp(|f|^p/value^p) - 1| at the returned value.
    double residual = 0.0;
};

namespace detail {

/// log( (1/n) sum exp(|f(i)|^p * inv) ), inv = lambda^{-p}.
inline double log_mean_exp_power(std::span<const double> powers, double inv) {
    double top = 0.0;
    for (double y : powers) top = std::max(top, y * inv);
    double acc = 0.0;
    for (double y : powers) acc += std::exp(y * inv - top);
    return top + std::log(acc / static_cast<double>(powers.size()));
}

} // namespace detail

inline PsiNormResult psi_norm(std::span<const double> f, double p, double tol = 1e-12) {
    require(!f.empty(), ErrorCode::Dimension, "psi_norm of an empty vector");
    require(p >= 1.0, ErrorCode::BadExponent, "psi_norm needs p >= 1");
    require(tol > 0.0, ErrorCode::BadInput, "psi_norm needs tol > 0");
    require(all_finite(f), ErrorCode::BadInput, "psi_norm input must be finite");

    PsiNormResult out;
    out.p = p;
    double peak = 0.0;
    for (double x : f) peak = std::max(peak, std::abs(x));
    if (peak == 0.0) return out;

    // Work with f / peak so the bracket is scale free; lambda* scales back linearly.
    std::vector<double> powers(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) powers[i] = std::pow(std::abs(f[i]) / peak, p);
    auto excess = [&](double lambda) { return detail::log_mean_exp_power(powers, std::pow(lambda, -p)) - 1.0; };

    // lambda* >= 1 / ln(n(e-1)+1)^{1/p} (single peak) and lambda* <= 1 (every term <= e).
    const double n = static_cast<double>(f.size());
    double lo = std::pow(std::log(n * (std::numbers::e - 1.0) + 1.0), -1.0 / p) * 1e-3;
    double hi = 1e3;
    while (excess(lo) <= 0.0) lo *= 0.5;
    while (excess(hi) > 0.0) hi *= 2.0;

    int it = 0;
    for (; it < 400; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (excess(mid) > 0.0)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= tol * 1e-3 * hi) {
            ++it;
            break;
        }
    }
    // hi satisfies the defining constraint; report it so value is admissible.
    out.value = hi * peak;
    out.iterations = it;
    out.residual = std::abs(excess(hi));
    return out;
}

/// Checks psi_p(a)^p == psi_1(|a|^p) to absolute tolerance tol.
inline bool psi_power_identity_check(std::span<const double> a, double p, double tol) {
    require(!a.empty(), ErrorCode::Dimension, "psi_power_identity_check of an empty vector");
    std::vector<double> powered(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) powered[i] = std::pow(std::abs(a[i]), p);
    const double lhs = std::pow(psi_norm(a, p).value, p);
    const double rhs = psi_norm(powered, 1.0).value;
    return std::abs(lhs - rhs) <= tol;
}

/// Reference psi_2 bound 2A for a tail P{|f| > t} <= A exp(-t^2), t > 1.
inline double tail_to_psi2_bound(double tail_constant) {
    require(tail_constant >= 1.0, ErrorCode::BadConstant, "tail constant A must be >= 1");
    return 2.0 * tail_constant;
}

} // namespace coordproj
