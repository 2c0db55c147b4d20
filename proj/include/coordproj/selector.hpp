#pragma once

// Bernoulli selector model: delta_1..delta_n independent {0,1} with mean delta,
// sigma = {i : delta_i = 1}. Exact moment generating functions of the centered
// sum sum_i (delta_i - delta) a_i, the Chernoff bound they induce, exact tail
// probabilities where they are computable, and Monte Carlo experiments.

#include "coordproj/core.hpp"
#include "coordproj/orlicz.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace coordproj {

struct SelectorDraw {
    double delta = 0.0;
    std::vector<std::uint8_t> outcomes;
    CoordinateSubset subset;
};

inline void check_delta(double delta) {
    require(delta > 0.0 && delta <= 1.0 && std::isfinite(delta), ErrorCode::BadDelta, "selector mean must lie in (0, 1]");
}

inline SelectorDraw draw_selectors(std::size_t n, double delta, RngStream& rng) {
    require(n >= 1, ErrorCode::Dimension, "draw_selectors needs n >= 1");
    check_delta(delta);
    SelectorDraw d;
    d.delta = delta;
    d.outcomes.resize(n);
    for (std::size_t i = 0; i < n; ++i) d.outcomes[i] = rng.uniform() < delta ? 1 : 0;
    d.subset = CoordinateSubset::from_mask(d.outcomes);
    return d;
}

namespace detail {

inline double log_add_exp(double x, double y) {
    const double m = std::max(x, y);
    if (m == -std::numeric_limits<double>::infinity()) return m;
    return m + std::log(std::exp(x - m) + std::exp(y - m));
}

inline double sum_in_order(std::span<const double> a) {
    double s = 0.0;
    for (double x : a) s += x;
    return s;
}

/// sum_i (delta_i - delta) a_i evaluated as (sum over selected a_i) - delta * (sum a_i).
/// Exact tail routines evaluate the same expression so Monte Carlo and exact
/// events agree bit for bit at threshold ties.
inline double centered_statistic(double selected_sum, double total, double delta) {
    return selected_sum - delta * total;
}

} // namespace detail

/// log E exp(lambda * sum_i (delta_i - delta) a_i)
///   = sum_i log[(1-delta) e^{-lambda delta a_i} + delta e^{lambda (1-delta) a_i}].
inline double log_exact_mgf(std::span<const double> a, double delta, double lambda) {
    require(all_finite(a) && std::isfinite(delta) && std::isfinite(lambda), ErrorCode::BadInput,
            "exact_mgf needs finite inputs");
    if (delta >= 1.0) return 0.0;
    const double l0 = std::log1p(-delta), l1 = std::log(delta);
    double acc = 0.0;
    for (double ai : a)
        acc += detail::log_add_exp(l0 - lambda * delta * ai, l1 + lambda * (1.0 - delta) * ai);
    return acc;
}

inline double exact_mgf(std::span<const double> a, double delta, double lambda) {
    return std::exp(log_exact_mgf(a, delta, lambda));
}

/// inf_{lambda > 0} exp(-lambda t delta n) E exp(lambda sum (delta_i - delta) a_i):
/// an upper bound on P{ sum (delta_i - delta) a_i > t delta n }.
inline double chernoff_tail_bound(std::span<const double> a, double delta, double t) {
    require(t > 0.0, ErrorCode::BadInput, "chernoff_tail_bound needs t > 0");
    check_delta(delta);
    const double shift = t * delta * static_cast<double>(a.size());
    auto phi = [&](double lambda) { return log_exact_mgf(a, delta, lambda) - lambda * shift; };

    // Convex in lambda: scan a log grid on [1e-4, 1e4], then golden-section
    // search between the neighbours of the best grid point.
    constexpr int kPerDecade = 10;
    constexpr int kPoints = 8 * kPerDecade + 1;
    std::vector<double> grid(kPoints), vals(kPoints);
    int best = 0;
    for (int k = 0; k < kPoints; ++k) {
        grid[k] = std::pow(10.0, -4.0 + static_cast<double>(k) / kPerDecade);
        vals[k] = phi(grid[k]);
        if (vals[k] < vals[best]) best = k;
    }
    double lo = best > 0 ? grid[best - 1] : grid[0] * 0.1;
    double hi = best + 1 < kPoints ? grid[best + 1] : grid[kPoints - 1];
    const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - ratio * (hi - lo), x2 = lo + ratio * (hi - lo);
    double f1 = phi(x1), f2 = phi(x2);
    for (int it = 0; it < 120 && hi - lo > 1e-14 * hi; ++it) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = phi(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = phi(x2);
        }
    }
    const double best_log = std::min({vals[best], f1, f2, 0.0});
    return std::exp(best_log);
}

// ---------------------------------------------------------------------------
// Exact tails

enum class ExactTailMethod { IntegerConvolution, Enumeration };

struct ExactTail {
    double one_sided = 0.0; ///< P{ S > t delta n }
    double two_sided = 0.0; ///< P{ |S| > t delta n }
    ExactTailMethod method = ExactTailMethod::Enumeration;
};

/// Largest sum of |a_i| handled by the integer convolution route.
inline constexpr double kMaxConvolutionRange = 4e6;

/// Exact distribution of S = sum (delta_i - delta) a_i where available:
/// integer-valued a (covers {0,1} and +-1 data) by dynamic-programming
/// convolution over partial sums; otherwise n <= 20 by full enumeration.
inline std::optional<ExactTail> exact_tail(std::span<const double> a, double delta, double t) {
    check_delta(delta);
    const std::size_t n = a.size();
    const double threshold = t * delta * static_cast<double>(n);
    const double total = detail::sum_in_order(a);

    bool integral = true;
    double neg = 0.0, pos = 0.0;
    for (double x : a) {
        if (x != std::floor(x)) integral = false;
        (x < 0 ? neg : pos) += std::abs(x);
    }
    if (integral && neg + pos <= kMaxConvolutionRange) {
        const auto offset = static_cast<long long>(neg);
        const auto width = static_cast<std::size_t>(neg + pos) + 1;
        std::vector<double> dist(width, 0.0), next(width);
        dist[static_cast<std::size_t>(offset)] = 1.0;
        for (double x : a) {
            const auto shift = static_cast<long long>(x);
            std::fill(next.begin(), next.end(), 0.0);
            for (std::size_t s = 0; s < width; ++s) {
                if (dist[s] == 0.0) continue;
                next[s] += (1.0 - delta) * dist[s];
                next[static_cast<std::size_t>(static_cast<long long>(s) + shift)] += delta * dist[s];
            }
            dist.swap(next);
        }
        ExactTail out{0.0, 0.0, ExactTailMethod::IntegerConvolution};
        for (std::size_t s = 0; s < width; ++s) {
            const double selected = static_cast<double>(static_cast<long long>(s) - offset);
            const double stat = detail::centered_statistic(selected, total, delta);
            if (stat > threshold) out.one_sided += dist[s];
            if (std::abs(stat) > threshold) out.two_sided += dist[s];
        }
        return out;
    }
    if (n <= 20) {
        ExactTail out{0.0, 0.0, ExactTailMethod::Enumeration};
        const double l0 = delta < 1.0 ? std::log1p(-delta) : 0.0, l1 = std::log(delta);
        for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
            double selected = 0.0;
            int k = 0;
            for (std::size_t i = 0; i < n; ++i)
                if (mask >> i & 1u) {
                    selected += a[i];
                    ++k;
                }
            double prob;
            if (delta >= 1.0)
                prob = (k == static_cast<int>(n)) ? 1.0 : 0.0;
            else
                prob = std::exp(k * l1 + static_cast<double>(static_cast<int>(n) - k) * l0);
            const double stat = detail::centered_statistic(selected, total, delta);
            if (stat > threshold) out.one_sided += prob;
            if (std::abs(stat) > threshold) out.two_sided += prob;
        }
        return out;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Experiments

struct TailExperimentReport {
    double t = 0.0;
    double delta = 0.0;
    std::size_t n = 0;
    std::size_t trials = 0;
    double psi1_norm = 0.0; ///< M = ||a||_{psi_1}
    double empirical_prob = 0.0;
    double empirical_two_sided = 0.0;
    double chernoff_bound = 1.0;
    std::optional<double> exact_prob;
    std::optional<double> exact_two_sided;
    /// -ln(p) M^2 / (t^2 delta n): the largest c consistent with the observed tail.
    std::optional<double> fitted_c;
    std::optional<double> fitted_c_exact;
    std::vector<std::string> flags;

    bool has_flag(const std::string& f) const {
        return std::find(flags.begin(), flags.end(), f) != flags.end();
    }
};

inline constexpr std::size_t kTrialsPerBlock = 4096;

inline TailExperimentReport tail_experiment(std::span<const double> a, double delta, double t, std::size_t trials,
                                            RngStream& rng) {
    require(trials >= 1, ErrorCode::BadInput, "tail_experiment needs trials >= 1");
    require(!a.empty(), ErrorCode::Dimension, "tail_experiment needs a nonempty vector");
    check_delta(delta);
    require(t > 0.0, ErrorCode::BadInput, "tail_experiment needs t > 0");

    TailExperimentReport rep;
    rep.t = t;
    rep.delta = delta;
    rep.n = a.size();
    rep.trials = trials;
    rep.psi1_norm = psi_norm(a, 1.0).value;
    require(rep.psi1_norm > 0.0, ErrorCode::BadInput, "tail_experiment needs a nonzero vector");
    if (t >= rep.psi1_norm / 2.0) rep.flags.emplace_back("T_ABOVE_HALF_M");
    if (delta > 0.5) rep.flags.emplace_back("DELTA_ABOVE_HALF");

    const double total = detail::sum_in_order(a);
    const double threshold = t * delta * static_cast<double>(a.size());
    const std::size_t blocks = (trials + kTrialsPerBlock - 1) / kTrialsPerBlock;
    std::vector<std::size_t> one(blocks, 0), two(blocks, 0);
    const RngStream base = rng.split();
    for_each_block(blocks, [&](std::size_t b) {
        RngStream s = base.substream(b);
        const std::size_t begin = b * kTrialsPerBlock, end = std::min(trials, begin + kTrialsPerBlock);
        for (std::size_t k = begin; k < end; ++k) {
            double selected = 0.0;
            for (double ai : a)
                if (s.uniform() < delta) selected += ai;
            const double stat = detail::centered_statistic(selected, total, delta);
            if (stat > threshold) ++one[b];
            if (std::abs(stat) > threshold) ++two[b];
        }
    });
    std::size_t c1 = 0, c2 = 0;
    for (std::size_t b = 0; b < blocks; ++b) {
        c1 += one[b];
        c2 += two[b];
    }
    rep.empirical_prob = static_cast<double>(c1) / static_cast<double>(trials);
    rep.empirical_two_sided = static_cast<double>(c2) / static_cast<double>(trials);
    rep.chernoff_bound = chernoff_tail_bound(a, delta, t);

    if (auto ex = exact_tail(a, delta, t)) {
        rep.exact_prob = ex->one_sided;
        rep.exact_two_sided = ex->two_sided;
    }
    const double scale = rep.psi1_norm * rep.psi1_norm / (t * t * delta * static_cast<double>(a.size()));
    if (rep.empirical_prob > 0.0)
        rep.fitted_c = -std::log(rep.empirical_prob) * scale;
    else
        rep.flags.emplace_back("UNRESOLVED_TAIL");
    if (rep.exact_prob) {
        if (*rep.exact_prob > 0.0)
            rep.fitted_c_exact = -std::log(*rep.exact_prob) * scale;
        else
            rep.flags.emplace_back("VACUOUS_TAIL");
    }
    return rep;
}

/// Fraction of draws with (1-eps)||f|| <= ||P_sigma f||_{L_2^sigma} <= (1+eps)||f||,
/// norms normalized by the uniform measure. An empty sigma is a failure.
inline double almost_isometry_experiment(std::span<const double> f, double delta, double eps, std::size_t trials,
                                         RngStream& rng) {
    check_delta(delta);
    require(eps > 0.0 && eps < 1.0, ErrorCode::BadEpsilon, "almost_isometry_experiment needs 0 < eps < 1");
    require(trials >= 1, ErrorCode::BadInput, "almost_isometry_experiment needs trials >= 1");
    double energy = 0.0;
    for (double x : f) energy += x * x;
    const double full = std::sqrt(energy / static_cast<double>(f.size()));
    require(full > 0.0, ErrorCode::BadInput, "almost_isometry_experiment needs ||f|| > 0");

    const std::size_t blocks = (trials + kTrialsPerBlock - 1) / kTrialsPerBlock;
    std::vector<std::size_t> hits(blocks, 0);
    const RngStream base = rng.split();
    for_each_block(blocks, [&](std::size_t b) {
        RngStream s = base.substream(b);
        const std::size_t begin = b * kTrialsPerBlock, end = std::min(trials, begin + kTrialsPerBlock);
        for (std::size_t k = begin; k < end; ++k) {
            double sel = 0.0;
            std::size_t card = 0;
            for (double x : f)
                if (s.uniform() < delta) {
                    sel += x * x;
                    ++card;
                }
            if (card == 0) continue;
            const double proj = std::sqrt(sel / static_cast<double>(card));
            if ((1.0 - eps) * full <= proj && proj <= (1.0 + eps) * full) ++hits[b];
        }
    });
    std::size_t total = 0;
    for (auto h : hits) total += h;
    return static_cast<double>(total) / static_cast<double>(trials);
}

/// Frequency of | |sigma| - delta n | >= eps delta n, i.e. of
/// |sum (delta_i - delta)| >= eps delta n.
inline double cardinality_deviation_frequency(std::size_t n, double delta, double eps, std::size_t trials,
                                              RngStream& rng) {
    check_delta(delta);
    require(trials >= 1 && n >= 1, ErrorCode::BadInput, "cardinality_deviation_frequency needs n, trials >= 1");
    const double dn = delta * static_cast<double>(n);
    const std::size_t blocks = (trials + kTrialsPerBlock - 1) / kTrialsPerBlock;
    std::vector<std::size_t> hits(blocks, 0);
    const RngStream base = rng.split();
    for_each_block(blocks, [&](std::size_t b) {
        RngStream s = base.substream(b);
        const std::size_t begin = b * kTrialsPerBlock, end = std::min(trials, begin + kTrialsPerBlock);
        for (std::size_t k = begin; k < end; ++k) {
            std::size_t card = 0;
            for (std::size_t i = 0; i < n; ++i) card += s.uniform() < delta;
            if (std::abs(static_cast<double>(card) - dn) >= eps * dn) ++hits[b];
        }
    });
    std::size_t total = 0;
    for (auto h : hits) total += h;
    return static_cast<double>(total) / static_cast<double>(trials);
}

} // namespace coordproj
