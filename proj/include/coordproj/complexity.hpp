#pragma once

// Gaussian and Rademacher averages of finite classes, the l_k(F) and t(F, eps)
// parameters, minimum-over-signs norms of vector sums and the two fitted
// audits built on them.

#include "coordproj/core.hpp"
#include "coordproj/selector.hpp"
#include "coordproj/shatter.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace coordproj {

enum class WeightKind { Gaussian, Rademacher };

inline const char* to_string(WeightKind k) { return k == WeightKind::Gaussian ? "gaussian" : "rademacher"; }

struct ComplexityEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t trials = 0;
    WeightKind kind = WeightKind::Gaussian;
};

namespace detail {

/// Mean and standard error of sample(s, scratch) over `trials` draws, in fixed blocks.
/// Each block gets its own scratch buffer.
template <class Sample>
ComplexityEstimate monte_carlo(std::size_t trials, RngStream& rng, WeightKind kind, Sample&& sample) {
    const std::size_t blocks = (trials + kTrialsPerBlock - 1) / kTrialsPerBlock;
    std::vector<double> sums(blocks, 0.0), squares(blocks, 0.0);
    const RngStream base = rng.split();
    for_each_block(blocks, [&](std::size_t b) {
        RngStream s = base.substream(b);
        std::vector<double> scratch;
        const std::size_t begin = b * kTrialsPerBlock, end = std::min(trials, begin + kTrialsPerBlock);
        double acc = 0.0, acc2 = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
            const double v = sample(s, scratch);
            acc += v;
            acc2 += v * v;
        }
        sums[b] = acc;
        squares[b] = acc2;
    });
    double total = 0.0, total2 = 0.0;
    for (std::size_t b = 0; b < blocks; ++b) {
        total += sums[b];
        total2 += squares[b];
    }
    const double nt = static_cast<double>(trials);
    ComplexityEstimate e;
    e.kind = kind;
    e.trials = trials;
    e.mean = total / nt;
    const double var = trials > 1 ? std::max(0.0, (total2 - nt * e.mean * e.mean) / (nt - 1.0)) : 0.0;
    e.std_error = std::sqrt(var / nt);
    return e;
}

inline double draw_weight(RngStream& s, WeightKind kind) { return kind == WeightKind::Gaussian ? s.normal() : s.sign(); }

/// sup_f |sum_j w_j f(x_j)| (or without the absolute value) over the columns `cols`.
inline double weighted_sup(const FunctionClass& F, const std::vector<std::size_t>& cols, const double* w, bool absolute) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < F.rows(); ++r) {
        double s = 0.0;
        for (std::size_t j = 0; j < cols.size(); ++j) s += w[j] * F(r, cols[j]);
        best = std::max(best, absolute ? std::abs(s) : s);
    }
    return best;
}

inline ComplexityEstimate class_average(const FunctionClass& F, const std::vector<std::size_t>& cols, std::size_t trials,
                                        RngStream& rng, WeightKind kind, bool absolute) {
    require(trials >= 100, ErrorCode::BadInput, "complexity estimates need at least 100 trials");
    return monte_carlo(trials, rng, kind, [&](RngStream& s, std::vector<double>& w) {
        w.resize(cols.size());
        for (auto& x : w) x = draw_weight(s, kind);
        return weighted_sup(F, cols, w.data(), absolute);
    });
}

} // namespace detail

/// E sup_f |sum_{i in sigma} g_i f(i)| by Monte Carlo.
inline ComplexityEstimate gaussian_complexity(const FunctionClass& F, const CoordinateSubset& sigma, std::size_t trials,
                                              RngStream& rng) {
    require(sigma.ambient_n() == F.cols(), ErrorCode::Dimension, "subset does not match the class domain");
    return detail::class_average(F, sigma.indices(), trials, rng, WeightKind::Gaussian, true);
}

inline ComplexityEstimate rademacher_complexity(const FunctionClass& F, const CoordinateSubset& sigma,
                                                std::size_t trials, RngStream& rng) {
    require(sigma.ambient_n() == F.cols(), ErrorCode::Dimension, "subset does not match the class domain");
    return detail::class_average(F, sigma.indices(), trials, rng, WeightKind::Rademacher, true);
}

/// Exact E_eps sup_f |sum_j eps_j f(x_j)| over all 2^k sign vectors.
inline double exact_rademacher_average(const FunctionClass& F, const std::vector<std::size_t>& cols) {
    const std::size_t k = cols.size();
    require(k <= 24, ErrorCode::SizeCap, "exact Rademacher average limited to 24 points");
    if (k == 0) return 0.0;
    std::vector<double> w(k);
    double acc = 0.0;
    const std::size_t patterns = std::size_t{1} << k;
    for (std::size_t p = 0; p < patterns; ++p) {
        for (std::size_t j = 0; j < k; ++j) w[j] = (p >> j & 1u) ? 1.0 : -1.0;
        acc += detail::weighted_sup(F, cols, w.data(), true);
    }
    return acc / static_cast<double>(patterns);
}

// ---------------------------------------------------------------------------
// l_k(F) = sup over k-tuples of domain points of the average on that tuple

struct EllEstimate {
    ComplexityEstimate estimate;
    /// Maximizing tuple (nondecreasing, repetition allowed).
    std::vector<std::size_t> tuple;
    bool exhaustive = false;
    /// True when the Rademacher value is computed exactly rather than sampled.
    bool exact = false;
};

struct EllOptions {
    double exhaustive_limit = 1e5;
    std::size_t restarts = 4;
    WeightKind kind = WeightKind::Gaussian;
    /// Rademacher only: average over all sign vectors instead of sampling.
    bool exact_rademacher = false;
};

namespace detail {

inline double multiset_count(std::size_t n, std::size_t k) {
    double r = 1.0;
    for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - 1 + i) / static_cast<double>(i);
    return r;
}

template <class Fn>
void for_each_multiset(std::size_t n, std::size_t k, Fn&& fn) {
    std::vector<std::size_t> t(k, 0);
    while (true) {
        fn(t);
        std::size_t j = k;
        while (j > 0 && t[j - 1] == n - 1) --j;
        if (j == 0) return;
        const std::size_t v = t[j - 1] + 1;
        for (std::size_t i = j - 1; i < k; ++i) t[i] = v;
    }
}

// Monte-Carlo averages on different tuples share one weight matrix, so the
// search compares tuples under common random numbers.
class SharedWeights {
public:
    SharedWeights(std::size_t trials, std::size_t k, RngStream& rng, WeightKind kind)
        : trials_(trials), k_(k), kind_(kind), w_(trials * k) {
        const std::size_t blocks = (trials + kTrialsPerBlock - 1) / kTrialsPerBlock;
        const RngStream base = rng.split();
        for_each_block(blocks, [&](std::size_t b) {
            RngStream s = base.substream(b);
            const std::size_t begin = b * kTrialsPerBlock, end = std::min(trials, begin + kTrialsPerBlock);
            for (std::size_t i = begin * k; i < end * k; ++i) w_[i] = draw_weight(s, kind);
        });
    }

    ComplexityEstimate estimate(const FunctionClass& F, const std::vector<std::size_t>& cols) const {
        double acc = 0.0, acc2 = 0.0;
        for (std::size_t i = 0; i < trials_; ++i) {
            const double v = weighted_sup(F, cols, &w_[i * k_], true);
            acc += v;
            acc2 += v * v;
        }
        const double nt = static_cast<double>(trials_);
        ComplexityEstimate e;
        e.kind = kind_;
        e.trials = trials_;
        e.mean = acc / nt;
        e.std_error = std::sqrt(std::max(0.0, (acc2 - nt * e.mean * e.mean) / (nt - 1.0)) / nt);
        return e;
    }

private:
    std::size_t trials_, k_;
    WeightKind kind_;
    std::vector<double> w_;
};

} // namespace detail

inline EllEstimate ell_parameter(const FunctionClass& F, std::size_t k, std::size_t trials, RngStream& rng,
                                 const EllOptions& opts = {}) {
    require(k >= 1, ErrorCode::BadInput, "ell_parameter needs k >= 1");
    const std::size_t n = F.cols();
    const bool exact = opts.exact_rademacher && opts.kind == WeightKind::Rademacher;
    if (!exact) require(trials >= 100, ErrorCode::BadInput, "complexity estimates need at least 100 trials");

    std::optional<detail::SharedWeights> shared;
    if (!exact) shared.emplace(trials, k, rng, opts.kind);
    auto evaluate = [&](const std::vector<std::size_t>& cols) {
        if (exact) {
            ComplexityEstimate e;
            e.kind = WeightKind::Rademacher;
            e.mean = exact_rademacher_average(F, cols);
            return e;
        }
        return shared->estimate(F, cols);
    };

    EllEstimate best;
    best.exact = exact;
    best.estimate.mean = -1.0;
    auto consider = [&](const std::vector<std::size_t>& cols) {
        const auto e = evaluate(cols);
        if (e.mean > best.estimate.mean) {
            best.estimate = e;
            best.tuple = cols;
            std::sort(best.tuple.begin(), best.tuple.end());
        }
        return e.mean;
    };

    if (detail::multiset_count(n, k) <= opts.exhaustive_limit) {
        best.exhaustive = true;
        detail::for_each_multiset(n, k, [&](const std::vector<std::size_t>& t) { consider(t); });
        return best;
    }
    if (exact) require(false, ErrorCode::SizeCap, "exact Rademacher l_k needs the exhaustive tuple search");

    // Coordinate ascent from the tuple repeating the largest-magnitude point,
    // then from random tuples.
    std::size_t peak = 0;
    double peak_value = -1.0;
    for (std::size_t x = 0; x < n; ++x)
        for (std::size_t r = 0; r < F.rows(); ++r)
            if (std::abs(F(r, x)) > peak_value) {
                peak_value = std::abs(F(r, x));
                peak = x;
            }
    RngStream starts = rng.split();
    for (std::size_t restart = 0; restart <= opts.restarts; ++restart) {
        std::vector<std::size_t> t(k, peak);
        if (restart > 0)
            for (auto& x : t) x = starts.below(n);
        double current = consider(t);
        bool improved = true;
        while (improved) {
            improved = false;
            for (std::size_t j = 0; j < k; ++j) {
                const std::size_t keep = t[j];
                std::size_t best_x = keep;
                for (std::size_t x = 0; x < n; ++x) {
                    if (x == keep) continue;
                    t[j] = x;
                    const double v = consider(t);
                    if (v > current + 1e-15) {
                        current = v;
                        best_x = x;
                        improved = true;
                    }
                }
                t[j] = best_x;
            }
        }
    }
    return best;
}

struct TParameter {
    std::size_t value = 0;
    bool capped = false;
    std::vector<EllEstimate> per_k;
};

/// Largest k <= k_max with l_k(F) >= eps k. Sampled estimates get one standard
/// error of slack; exact Rademacher values are compared with a relative 1e-12.
inline TParameter t_parameter(const FunctionClass& F, double eps, std::size_t k_max, std::size_t trials, RngStream& rng,
                              const EllOptions& opts = {}) {
    require(eps > 0.0, ErrorCode::BadEpsilon, "t_parameter needs eps > 0");
    require(k_max >= 1, ErrorCode::BadInput, "t_parameter needs k_max >= 1");
    TParameter out;
    for (std::size_t k = 1; k <= k_max; ++k) {
        RngStream s = rng.substream(k);
        auto e = ell_parameter(F, k, trials, s, opts);
        const double target = eps * static_cast<double>(k);
        const bool ok = e.exact ? e.estimate.mean >= target * (1.0 - 1e-12)
                                : e.estimate.mean >= target - e.estimate.std_error;
        if (ok) out.value = k;
        out.per_k.push_back(std::move(e));
    }
    out.capped = out.value == k_max;
    return out;
}

// ---------------------------------------------------------------------------
// min over signs of || sum eta_i x_i ||

enum class SignMode { Exact, Heuristic };

struct SignMinimumResult {
    double value = 0.0;
    std::vector<int> signs;
    SignMode method = SignMode::Exact;
};

inline constexpr std::size_t kExactSignCap = 24;

inline double signed_sum_norm(const std::vector<RealVector>& vectors, const std::vector<int>& signs,
                              const VectorNorm& norm) {
    RealVector sum(vectors.front().size(), 0.0);
    for (std::size_t i = 0; i < vectors.size(); ++i)
        for (std::size_t j = 0; j < sum.size(); ++j) sum[j] += signs[i] * vectors[i][j];
    return norm(sum);
}

namespace detail {

inline bool exactly_orthogonal(const std::vector<RealVector>& v) {
    for (std::size_t a = 0; a < v.size(); ++a)
        for (std::size_t b = a + 1; b < v.size(); ++b) {
            double dot = 0.0;
            for (std::size_t j = 0; j < v[a].size(); ++j) dot += v[a][j] * v[b][j];
            if (dot != 0.0) return false;
        }
    return true;
}

inline void single_flip_descent(const std::vector<RealVector>& vectors, std::vector<int>& signs, RealVector& sum,
                                const VectorNorm& norm) {
    double current = norm(sum);
    RealVector trial(sum.size());
    while (true) {
        std::size_t flip = vectors.size();
        double best = current;
        for (std::size_t i = 0; i < vectors.size(); ++i) {
            for (std::size_t j = 0; j < sum.size(); ++j) trial[j] = sum[j] - 2.0 * signs[i] * vectors[i][j];
            const double v = norm(trial);
            if (v < best - 1e-14 * std::max(1.0, current)) {
                best = v;
                flip = i;
            }
        }
        if (flip == vectors.size()) return;
        for (std::size_t j = 0; j < sum.size(); ++j) sum[j] -= 2.0 * signs[flip] * vectors[flip][j];
        signs[flip] = -signs[flip];
        current = best;
    }
}

} // namespace detail

/// Exact mode enumerates the 2^(count-1) patterns with eta_0 = +1 in Gray-code
/// order. Pairwise orthogonal vectors in the 2-norm are answered directly:
/// every sign choice gives sqrt(sum ||x_i||^2). Heuristic mode balances greedily
/// in decreasing-norm order, then in 15 random orders, each followed by
/// single-flip descent; its value is an upper bound.
inline SignMinimumResult min_sign_norm(const std::vector<RealVector>& vectors, const VectorNorm& norm, SignMode mode,
                                       RngStream& rng) {
    require(!vectors.empty(), ErrorCode::BadInput, "min_sign_norm needs at least one vector");
    const std::size_t c = vectors.size(), dim = vectors.front().size();
    for (const auto& v : vectors) {
        require(v.size() == dim, ErrorCode::Dimension, "vectors must share a dimension");
        require(all_finite(v), ErrorCode::BadInput, "vectors must be finite");
    }
    SignMinimumResult res;
    res.method = mode;
    res.signs.assign(c, 1);

    if (mode == SignMode::Exact) {
        const bool euclid = norm.kind == VectorNorm::Kind::P && norm.p == 2.0;
        if (euclid && detail::exactly_orthogonal(vectors)) {
            res.value = signed_sum_norm(vectors, res.signs, norm);
            return res;
        }
        if (c > kExactSignCap)
            throw SizeCapError("exact min_sign_norm on " + std::to_string(c) + " vectors exceeds the cap of " +
                                   std::to_string(kExactSignCap) + " (2^(count-1) patterns)",
                               std::ldexp(1.0, static_cast<int>(c - 1)));
        std::vector<int> signs(c, 1);
        RealVector sum(dim, 0.0);
        for (const auto& v : vectors)
            for (std::size_t j = 0; j < dim; ++j) sum[j] += v[j];
        double best = norm(sum);
        std::vector<int> best_signs = signs;
        const std::uint64_t patterns = std::uint64_t{1} << (c - 1);
        for (std::uint64_t g = 1; g < patterns; ++g) {
            const std::size_t i = static_cast<std::size_t>(std::countr_zero(g)) + 1;
            for (std::size_t j = 0; j < dim; ++j) sum[j] -= 2.0 * signs[i] * vectors[i][j];
            signs[i] = -signs[i];
            const double v = norm(sum);
            if (v < best) {
                best = v;
                best_signs = signs;
            }
        }
        res.signs = best_signs;
        res.value = signed_sum_norm(vectors, res.signs, norm);
        return res;
    }

    std::vector<std::size_t> order(c);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> lengths(c);
    for (std::size_t i = 0; i < c; ++i) lengths[i] = norm(vectors[i]);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return lengths[a] > lengths[b]; });

    RngStream shuffles = rng.split();
    res.value = std::numeric_limits<double>::infinity();
    RealVector plus(dim), minus(dim);
    for (int restart = 0; restart < 16; ++restart) {
        if (restart > 0) std::shuffle(order.begin(), order.end(), shuffles.engine());
        std::vector<int> signs(c, 1);
        RealVector sum(dim, 0.0);
        for (std::size_t i : order) {
            for (std::size_t j = 0; j < dim; ++j) {
                plus[j] = sum[j] + vectors[i][j];
                minus[j] = sum[j] - vectors[i][j];
            }
            if (norm(minus) < norm(plus)) {
                signs[i] = -1;
                sum.swap(minus);
            } else {
                sum.swap(plus);
            }
        }
        detail::single_flip_descent(vectors, signs, sum, norm);
        if (signs[0] < 0)
            for (auto& s : signs) s = -s;
        const double v = signed_sum_norm(vectors, signs, norm);
        if (v < res.value) {
            res.value = v;
            res.signs = signs;
        }
    }
    return res;
}

/// E || sum g_i x_i || by Monte Carlo.
inline ComplexityEstimate gaussian_vector_average(const std::vector<RealVector>& vectors, const VectorNorm& norm,
                                                  std::size_t trials, RngStream& rng) {
    require(!vectors.empty(), ErrorCode::BadInput, "need at least one vector");
    require(trials >= 100, ErrorCode::BadInput, "complexity estimates need at least 100 trials");
    const std::size_t dim = vectors.front().size();
    return detail::monte_carlo(trials, rng, WeightKind::Gaussian, [&](RngStream& s, std::vector<double>& sum) {
        sum.assign(dim, 0.0);
        for (const auto& v : vectors) {
            const double g = s.normal();
            for (std::size_t j = 0; j < dim; ++j) sum[j] += g * v[j];
        }
        return norm(sum);
    });
}

struct InfratypeRow {
    double lambda = 0.0;
    std::size_t max_size = 0;
    /// max over sampled sigma, |sigma| <= lambda n, of min_sign_norm / sqrt(|sigma|).
    double m_emp = 0.0;
    double c_emp = 0.0;
    bool exact = true;
};

struct InfratypeReport {
    ComplexityEstimate gaussian_average;
    std::vector<InfratypeRow> rows;
    std::vector<std::string> flags;
};

/// For each lambda, samples `subset_samples` subsets with sizes spread over
/// 1..floor(lambda n) (the largest size always included) and reports
/// C_emp = E || sum g_i x_i || / (M_emp sqrt(n / lambda)).
inline InfratypeReport type_infratype_report(const std::vector<RealVector>& vectors, const VectorNorm& norm,
                                             const std::vector<double>& lambda_grid, std::size_t trials, RngStream& rng,
                                             std::size_t subset_samples = 8) {
    require(!vectors.empty(), ErrorCode::BadInput, "need at least one vector");
    require(!lambda_grid.empty(), ErrorCode::BadInput, "empty lambda grid");
    require(subset_samples >= 1, ErrorCode::BadInput, "need at least one subset sample");
    for (const auto& v : vectors) require(norm(v) <= 1.0 + 1e-12, ErrorCode::BadInput, "vectors must lie in the unit ball");
    const std::size_t n = vectors.size();

    InfratypeReport rep;
    RngStream avg_stream = rng.split();
    rep.gaussian_average = gaussian_vector_average(vectors, norm, trials, avg_stream);

    for (std::size_t li = 0; li < lambda_grid.size(); ++li) {
        const double lambda = lambda_grid[li];
        require(lambda > 0.0 && lambda <= 1.0, ErrorCode::BadDelta, "lambda must lie in (0, 1]");
        InfratypeRow row;
        row.lambda = lambda;
        row.max_size = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(lambda * static_cast<double>(n))));
        RngStream s = rng.substream(li);
        for (std::size_t k = 0; k < subset_samples; ++k) {
            const std::size_t size = k == 0 ? row.max_size : 1 + s.below(row.max_size);
            std::vector<std::size_t> idx(n);
            std::iota(idx.begin(), idx.end(), 0);
            std::shuffle(idx.begin(), idx.end(), s.engine());
            idx.resize(size);
            std::sort(idx.begin(), idx.end());
            std::vector<RealVector> chosen;
            chosen.reserve(size);
            for (std::size_t i : idx) chosen.push_back(vectors[i]);
            SignMinimumResult m;
            try {
                m = min_sign_norm(chosen, norm, SignMode::Exact, s);
            } catch (const SizeCapError&) {
                m = min_sign_norm(chosen, norm, SignMode::Heuristic, s);
                row.exact = false;
            }
            row.m_emp = std::max(row.m_emp, m.value / std::sqrt(static_cast<double>(size)));
        }
        row.c_emp = row.m_emp > 0.0
                        ? rep.gaussian_average.mean / (row.m_emp * std::sqrt(static_cast<double>(n) / lambda))
                        : std::numeric_limits<double>::infinity();
        if (!row.exact && std::find(rep.flags.begin(), rep.flags.end(), "M_EMP_HEURISTIC") == rep.flags.end())
            rep.flags.emplace_back("M_EMP_HEURISTIC");
        rep.rows.push_back(row);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// E sup_f sum g_i f(i) <= K sqrt(n) int_{cE/n}^1 sqrt(vc(F,t) ln(2/t)) dt

struct ProcessBoundAudit {
    FittedConstant constant;
    ComplexityEstimate expectation;
    double lower_limit = 0.0;
    double integral = 0.0;
    /// Delta-method standard error of K_fit from the Monte-Carlo error of E.
    double k_std_error = 0.0;
    std::vector<double> grid;
    std::vector<std::size_t> vc;
};

inline constexpr std::size_t kProcessBoundGridPoints = 64;

inline constexpr const char* kProcessBoundProtocol =
    "E = Monte-Carlo E sup_f sum g_i f(i); integral of sqrt(vc(F,t) ln(2/t)) over [E/n, 1] (c = 1) by the "
    "trapezoid rule on 64 equally spaced points with exhaustive vc; K_fit = E / (sqrt(n) integral)";

inline ProcessBoundAudit process_bound_audit(const FunctionClass& F, std::size_t trials, RngStream& rng,
                                      const ShatterOptions& opts = {}) {
    require(F.max_abs() <= 1.0, ErrorCode::BadInput, "process-bound audit needs a class bounded by 1");
    const std::size_t n = F.cols();
    const double nn = static_cast<double>(n);
    ProcessBoundAudit out;
    out.constant.name = "K";
    out.constant.protocol = kProcessBoundProtocol;
    Digest digest;
    digest.add(F.values()).add_bits(F.rows()).add_bits(trials).add_bits(rng.seed());
    out.constant.inputs_digest = digest.hex();

    const auto all = CoordinateSubset::full(n);
    out.expectation = detail::class_average(F, all.indices(), trials, rng, WeightKind::Gaussian, false);
    const double e = out.expectation.mean;
    out.lower_limit = std::clamp(e / nn, 1e-9, 1.0);

    const std::size_t points = kProcessBoundGridPoints;
    std::vector<double> integrand(points);
    for (std::size_t k = 0; k < points; ++k) {
        const double t = out.lower_limit + (1.0 - out.lower_limit) * static_cast<double>(k) / static_cast<double>(points - 1);
        const std::size_t vc = vc_dimension(F, t, opts).dimension;
        out.grid.push_back(t);
        out.vc.push_back(vc);
        integrand[k] = std::sqrt(static_cast<double>(vc) * std::log(2.0 / t));
    }
    const double h = (1.0 - out.lower_limit) / static_cast<double>(points - 1);
    for (std::size_t k = 0; k + 1 < points; ++k) out.integral += 0.5 * h * (integrand[k] + integrand[k + 1]);

    if (out.integral <= 0.0) {
        out.constant.flags.emplace_back("INTEGRAL_ZERO");
        out.constant.value = e > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
        return out;
    }
    const double scale = std::sqrt(nn) * out.integral;
    out.constant.value = e / scale;
    // dK/dE: the integrand at the lower limit enters through d(E/n)/dE = 1/n.
    const double slope = 1.0 / scale + e * integrand.front() / (nn * std::sqrt(nn) * out.integral * out.integral);
    out.k_std_error = std::abs(slope) * out.expectation.std_error;
    return out;
}

} // namespace coordproj
