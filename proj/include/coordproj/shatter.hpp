#pragma once

// Scale-sensitive shattering.
//
// A set sigma is t-shattered by F when some level h on sigma lets every sign
// pattern be realized by a function at least t above h on the + coordinates and
// at least t below h on the - coordinates. For a fixed assignment of functions
// to patterns, such an h exists iff for each x in sigma
//
//     min_{patterns high at x} f(x) - max_{patterns low at x} f(x) >= 2t,
//
// and then the midpoint of those two numbers is a valid level. The finite-class
// search therefore never enumerates h.
//
// Patterns are bitmasks over the positions of sigma: bit j set means the j-th
// point of sigma is on the high side.

#include "coordproj/core.hpp"
#include "coordproj/lp.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace coordproj {

struct ShatterOptions {
    std::size_t max_points = 5;
    std::size_t max_functions = 64;
    std::size_t max_domain = 20;
    /// Slack allowed on the 2t separation test.
    double tol = 1e-12;
};

struct ShatterWitness {
    CoordinateSubset sigma;
    std::vector<double> level;
    double scale = 0.0;
    /// Finite classes: function (row) index per pattern.
    std::vector<std::size_t> assignment;
    /// Convex hulls: convex weights over the rows of F per pattern.
    std::vector<std::vector<double>> weights;
};

/// Value of the pattern's realizer at position j of sigma.
inline double realized_value(const FunctionClass& F, const ShatterWitness& w, std::size_t pattern, std::size_t j) {
    const std::size_t x = w.sigma.indices()[j];
    if (!w.assignment.empty()) return F(w.assignment[pattern], x);
    double v = 0.0;
    for (std::size_t r = 0; r < F.rows(); ++r) v += w.weights[pattern][r] * F(r, x);
    return v;
}

/// Direct substitution check of a witness against its defining inequalities.
inline bool verify_witness(const FunctionClass& F, const ShatterWitness& w, double tol) {
    const std::size_t k = w.sigma.size();
    const std::size_t patterns = std::size_t{1} << k;
    if (w.level.size() != k) return false;
    if (w.assignment.empty() == w.weights.empty()) return false;
    if (!w.assignment.empty() && w.assignment.size() != patterns) return false;
    if (!w.weights.empty()) {
        if (w.weights.size() != patterns) return false;
        for (const auto& wt : w.weights) {
            double s = 0.0;
            for (double x : wt) {
                if (x < -tol) return false;
                s += x;
            }
            if (std::abs(s - 1.0) > tol * static_cast<double>(wt.size()) + 1e-12) return false;
        }
    }
    for (std::size_t p = 0; p < patterns; ++p) {
        for (std::size_t j = 0; j < k; ++j) {
            const double v = realized_value(F, w, p, j);
            if ((p >> j) & 1u) {
                if (v < w.level[j] + w.scale - tol) return false;
            } else if (v > w.level[j] - w.scale + tol) {
                return false;
            }
        }
    }
    return true;
}

namespace detail {

class PatternSearch {
public:
    PatternSearch(const FunctionClass& F, const CoordinateSubset& sigma, double t, double tol)
        : k_(sigma.size()), patterns_(std::size_t{1} << k_), need_(2.0 * t - tol) {
        values_.resize(F.rows() * k_);
        for (std::size_t r = 0; r < F.rows(); ++r)
            for (std::size_t j = 0; j < k_; ++j) values_[r * k_ + j] = F(r, sigma.indices()[j]);
        candidates_.resize(patterns_);
        for (std::size_t p = 0; p < patterns_; ++p) candidates_[p] = undominated(F.rows(), p);
        hi_min_.assign(k_, std::numeric_limits<double>::infinity());
        lo_max_.assign(k_, -std::numeric_limits<double>::infinity());
        assignment_.assign(patterns_, kUnassigned);
    }

    bool solve() { return extend(0); }

    const std::vector<std::size_t>& assignment() const { return assignment_; }
    const std::vector<double>& hi_min() const { return hi_min_; }
    const std::vector<double>& lo_max() const { return lo_max_; }

private:
    static constexpr std::size_t kUnassigned = static_cast<std::size_t>(-1);

    double value(std::size_t r, std::size_t j) const { return values_[r * k_ + j]; }

    // Rows not dominated for pattern p (higher on high coordinates, lower on low
    // ones is never worse). Identical projections are kept once.
    std::vector<std::size_t> undominated(std::size_t rows, std::size_t p) const {
        std::vector<std::size_t> keep;
        for (std::size_t r = 0; r < rows; ++r) {
            bool dominated = false;
            for (std::size_t q = 0; q < rows && !dominated; ++q) {
                if (q == r) continue;
                bool geq = true, strict = false;
                for (std::size_t j = 0; j < k_; ++j) {
                    const double a = value(q, j), b = value(r, j);
                    const bool high = (p >> j) & 1u;
                    const bool better_or_eq = high ? a >= b : a <= b;
                    if (!better_or_eq) {
                        geq = false;
                        break;
                    }
                    if (a != b) strict = true;
                }
                // Ties: keep the lowest index among identical projections.
                if (geq && (strict || q < r)) dominated = true;
            }
            if (!dominated) keep.push_back(r);
        }
        return keep;
    }

    bool compatible(std::size_t p, std::size_t r) const {
        for (std::size_t j = 0; j < k_; ++j) {
            const double v = value(r, j);
            if ((p >> j) & 1u) {
                if (std::min(hi_min_[j], v) - lo_max_[j] < need_) return false;
            } else if (hi_min_[j] - std::max(lo_max_[j], v) < need_) {
                return false;
            }
        }
        return true;
    }

    bool extend(std::size_t assigned) {
        if (assigned == patterns_) return true;
        // Most constrained pattern next; ties prefer more high coordinates.
        std::size_t pick = kUnassigned, pick_count = std::numeric_limits<std::size_t>::max();
        std::vector<std::size_t> pick_options;
        for (std::size_t p = 0; p < patterns_; ++p) {
            if (assignment_[p] != kUnassigned) continue;
            std::vector<std::size_t> options;
            for (std::size_t r : candidates_[p])
                if (compatible(p, r)) options.push_back(r);
            if (options.empty()) return false;
            const bool better = options.size() < pick_count ||
                                (options.size() == pick_count && std::popcount(p) > std::popcount(pick));
            if (better) {
                pick = p;
                pick_count = options.size();
                pick_options = std::move(options);
            }
        }
        for (std::size_t r : pick_options) {
            const auto saved_hi = hi_min_;
            const auto saved_lo = lo_max_;
            for (std::size_t j = 0; j < k_; ++j) {
                if ((pick >> j) & 1u)
                    hi_min_[j] = std::min(hi_min_[j], value(r, j));
                else
                    lo_max_[j] = std::max(lo_max_[j], value(r, j));
            }
            assignment_[pick] = r;
            if (extend(assigned + 1)) return true;
            assignment_[pick] = kUnassigned;
            hi_min_ = saved_hi;
            lo_max_ = saved_lo;
        }
        return false;
    }

    std::size_t k_, patterns_;
    double need_;
    std::vector<double> values_;
    std::vector<std::vector<std::size_t>> candidates_;
    std::vector<double> hi_min_, lo_max_;
    std::vector<std::size_t> assignment_;
};

inline double binomial(std::size_t n, std::size_t k) {
    double r = 1.0;
    for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    return r;
}

} // namespace detail

inline std::optional<ShatterWitness> is_shattered(const FunctionClass& F, const CoordinateSubset& sigma, double t,
                                                  const ShatterOptions& opts = {}) {
    require(t > 0.0, ErrorCode::BadInput, "shattering scale must be positive");
    require(sigma.ambient_n() == F.cols(), ErrorCode::Dimension, "subset does not match the class domain");
    require(!sigma.empty(), ErrorCode::EmptySubset, "shattering an empty set");
    const std::size_t k = sigma.size(), m = F.rows();
    if (k > opts.max_points || m > opts.max_functions || k >= 63) {
        const double pairs = std::ldexp(static_cast<double>(m), static_cast<int>(std::min<std::size_t>(k, 1000)));
        std::ostringstream msg;
        msg << "is_shattered on |sigma| = " << k << ", m = " << m << " exceeds caps (" << opts.max_points << ", "
            << opts.max_functions << "); search covers 2^" << k << " patterns x " << m
            << " functions, assignment space m^(2^k) = 10^" << std::ldexp(std::log10(static_cast<double>(m)), static_cast<int>(std::min<std::size_t>(k, 1000)));
        throw SizeCapError(msg.str(), pairs);
    }
    // Distinct patterns need distinct functions.
    if ((std::size_t{1} << k) > m) return std::nullopt;

    detail::PatternSearch search(F, sigma, t, opts.tol);
    if (!search.solve()) return std::nullopt;

    ShatterWitness w;
    w.sigma = sigma;
    w.scale = t;
    w.assignment = search.assignment();
    w.level.resize(k);
    for (std::size_t j = 0; j < k; ++j) w.level[j] = 0.5 * (search.hi_min()[j] + search.lo_max()[j]);
    return w;
}

struct VcResult {
    std::size_t dimension = 0;
    std::optional<ShatterWitness> witness;
    std::size_t subsets_checked = 0;
};

/// Largest t-shattered subset of the domain, by increasing size. Shattering is
/// hereditary, so a size-s candidate is examined only when all of its
/// (s-1)-subsets were shattered.
inline VcResult vc_dimension(const FunctionClass& F, double t, const ShatterOptions& opts = {}) {
    require(t > 0.0, ErrorCode::BadInput, "shattering scale must be positive");
    const std::size_t n = F.cols(), m = F.rows();
    if (n > opts.max_domain || n >= 63) {
        throw SizeCapError("vc_dimension on a domain of " + std::to_string(n) + " points exceeds the cap of " +
                               std::to_string(opts.max_domain) + " (2^n candidate subsets)",
                           std::ldexp(1.0, static_cast<int>(std::min<std::size_t>(n, 1000))));
    }
    auto to_subset = [n](std::uint64_t mask) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < n; ++i)
            if (mask >> i & 1u) idx.push_back(i);
        return CoordinateSubset(std::move(idx), n);
    };

    VcResult res;
    std::set<std::uint64_t> prev;
    prev.insert(0);
    for (std::size_t size = 1; size <= n; ++size) {
        if ((std::size_t{1} << size) > m) break;
        std::set<std::uint64_t> candidates;
        for (std::uint64_t base : prev) {
            const int top = base ? 64 - std::countl_zero(base) : 0;
            for (std::size_t x = static_cast<std::size_t>(top); x < n; ++x) {
                const std::uint64_t cand = base | (std::uint64_t{1} << x);
                bool ok = true;
                for (std::size_t y = 0; y < n && ok; ++y)
                    if ((cand >> y & 1u) && size > 1) ok = prev.count(cand & ~(std::uint64_t{1} << y)) > 0;
                if (ok) candidates.insert(cand);
            }
        }
        if (candidates.empty()) break;
        if (size > opts.max_points) {
            throw SizeCapError("vc_dimension needs subsets of size " + std::to_string(size) + " beyond max_points = " +
                                   std::to_string(opts.max_points) + "; " + std::to_string(candidates.size()) +
                                   " candidate subsets of C(n, size) = " + std::to_string(detail::binomial(n, size)),
                               static_cast<double>(candidates.size()) * std::ldexp(static_cast<double>(m), static_cast<int>(size)));
        }
        std::set<std::uint64_t> shattered;
        for (std::uint64_t cand : candidates) {
            ++res.subsets_checked;
            if (auto w = is_shattered(F, to_subset(cand), t, opts)) {
                if (shattered.empty()) res.witness = std::move(w);
                shattered.insert(cand);
            }
        }
        if (shattered.empty()) break;
        res.dimension = size;
        prev = std::move(shattered);
    }
    if ((std::size_t{1} << res.dimension) > m)
        throw std::logic_error("vc_dimension exceeded log2 of the class size");
    return res;
}

// ---------------------------------------------------------------------------
// l1 domination: eps* = min_{||a||_1 = 1} || sum_i a_i x_i ||

enum class DominationMode { Exact, Sampled };

struct DominationResult {
    double epsilon_star = 0.0;
    RealVector minimizer;
    DominationMode method = DominationMode::Exact;
};

struct DominationOptions {
    std::size_t max_exact_points = 15;
    std::size_t random_directions = 4000;
};

inline double combination_norm(const std::vector<RealVector>& points, std::span<const double> a, const VectorNorm& norm) {
    RealVector sum(points.front().size(), 0.0);
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = 0; j < sum.size(); ++j) sum[j] += a[i] * points[i][j];
    return norm(sum);
}

/// Exact mode (sup norm only) solves one LP per sign orthant of a, up to the
/// global sign: minimize s subject to -s <= (X a)_j <= s, sign(a_i) = s_i,
/// sum |a_i| = 1. Sampled mode returns an upper bound from structured and
/// random directions.
inline DominationResult l1_domination(const std::vector<RealVector>& points, const VectorNorm& norm,
                                      DominationMode mode, RngStream* rng = nullptr,
                                      const DominationOptions& opts = {}) {
    require(!points.empty(), ErrorCode::BadInput, "l1_domination needs at least one point");
    const std::size_t c = points.size(), dim = points.front().size();
    for (const auto& p : points) require(p.size() == dim, ErrorCode::Dimension, "points must share a dimension");

    DominationResult best;
    best.method = mode;
    best.epsilon_star = std::numeric_limits<double>::infinity();

    if (mode == DominationMode::Exact) {
        require(norm.kind == VectorNorm::Kind::Sup, ErrorCode::UnsupportedNorm, "exact l1_domination supports the sup norm only");
        if (c > opts.max_exact_points)
            throw SizeCapError("exact l1_domination on " + std::to_string(c) + " points exceeds the cap of " +
                                   std::to_string(opts.max_exact_points),
                               std::ldexp(1.0, static_cast<int>(c - 1)));
        const std::size_t orthants = std::size_t{1} << (c - 1);
        for (std::size_t o = 0; o < orthants; ++o) {
            std::vector<double> sgn(c, 1.0);
            for (std::size_t i = 1; i < c; ++i)
                if ((o >> (i - 1)) & 1u) sgn[i] = -1.0;
            lp::Problem prob;
            prob.num_vars = c + 1; // b_1..b_c >= 0, s
            prob.objective.assign(c + 1, 0.0);
            prob.objective[c] = 1.0;
            for (std::size_t j = 0; j < dim; ++j) {
                std::vector<double> up(c + 1), down(c + 1);
                for (std::size_t i = 0; i < c; ++i) {
                    up[i] = sgn[i] * points[i][j];
                    down[i] = -sgn[i] * points[i][j];
                }
                up[c] = down[c] = -1.0;
                prob.add(std::move(up), lp::Relation::LessEq, 0.0);
                prob.add(std::move(down), lp::Relation::LessEq, 0.0);
            }
            std::vector<double> simplex(c + 1, 1.0);
            simplex[c] = 0.0;
            prob.add(std::move(simplex), lp::Relation::Eq, 1.0);
            const auto sol = lp::minimize(prob, 1e-11);
            if (sol.status != lp::Status::Optimal) throw std::runtime_error("orthant LP did not reach an optimum");
            if (sol.objective < best.epsilon_star) {
                best.epsilon_star = sol.objective;
                best.minimizer.assign(c, 0.0);
                for (std::size_t i = 0; i < c; ++i) best.minimizer[i] = sgn[i] * sol.x[i];
            }
        }
        return best;
    }

    auto consider = [&](RealVector a) {
        double l1 = 0.0;
        for (double x : a) l1 += std::abs(x);
        if (l1 == 0.0) return;
        for (double& x : a) x /= l1;
        const double v = combination_norm(points, a, norm);
        if (v < best.epsilon_star) {
            best.epsilon_star = v;
            best.minimizer = std::move(a);
        }
    };
    for (std::size_t i = 0; i < c; ++i) {
        RealVector a(c, 0.0);
        a[i] = 1.0;
        consider(a);
        for (std::size_t j = i + 1; j < c; ++j) {
            a[j] = 1.0;
            consider(a);
            a[j] = -1.0;
            consider(a);
            a[j] = 0.0;
        }
    }
    if (c <= 16) {
        for (std::size_t o = 0; o < (std::size_t{1} << (c - 1)); ++o) {
            RealVector a(c, 1.0);
            for (std::size_t i = 1; i < c; ++i)
                if ((o >> (i - 1)) & 1u) a[i] = -1.0;
            consider(a);
        }
    }
    if (rng) {
        for (std::size_t r = 0; r < opts.random_directions; ++r) {
            RealVector a(c);
            for (auto& x : a) x = rng->normal();
            consider(a);
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Shattering by the convex hull of a finite class

enum class HullMethod { Automatic, JointLp, Decomposed };

struct HullOptions {
    std::size_t max_points = 4;
    double tol = 1e-7;
    HullMethod method = HullMethod::Automatic;
    /// Automatic picks the joint LP while patterns * rows stays below this.
    std::size_t joint_limit = 2048;
    std::size_t max_rounds = 20000;
};

namespace detail {

/// Best margin of a single pattern at level h:
///   max_{w in simplex} min_j eps_j (F_w(x_j) - h_j),
/// with the optimal weights and the minimizing player's distribution over points.
struct PatternGame {
    double value = 0.0;
    std::vector<double> weights;
    std::vector<double> point_mass;
};

inline PatternGame solve_pattern_game(const std::vector<double>& proj, std::size_t m, std::size_t k,
                                      std::size_t pattern, const std::vector<double>& level, double bound) {
    // Variables w_1..w_m >= 0, s' = s + bound >= 0. minimize -s'.
    lp::Problem prob;
    prob.num_vars = m + 1;
    prob.objective.assign(m + 1, 0.0);
    prob.objective[m] = -1.0;
    for (std::size_t j = 0; j < k; ++j) {
        const double e = ((pattern >> j) & 1u) ? 1.0 : -1.0;
        std::vector<double> row(m + 1);
        for (std::size_t r = 0; r < m; ++r) row[r] = -e * (proj[r * k + j] - level[j]);
        row[m] = 1.0;
        prob.add(std::move(row), lp::Relation::LessEq, bound);
    }
    std::vector<double> simplex(m + 1, 1.0);
    simplex[m] = 0.0;
    prob.add(std::move(simplex), lp::Relation::Eq, 1.0);
    const auto sol = lp::minimize(prob, 1e-12);
    if (sol.status != lp::Status::Optimal) throw std::runtime_error("pattern LP did not reach an optimum");

    PatternGame g;
    g.value = sol.x[m] - bound;
    g.weights.assign(sol.x.begin(), sol.x.begin() + static_cast<std::ptrdiff_t>(m));
    g.point_mass.resize(k);
    double total = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        g.point_mass[j] = std::max(0.0, -sol.duals[j]);
        total += g.point_mass[j];
    }
    if (total <= 0.0)
        std::fill(g.point_mass.begin(), g.point_mass.end(), 1.0 / static_cast<double>(k));
    else
        for (auto& p : g.point_mass) p /= total;
    return g;
}

struct Cut {
    std::vector<double> slope; // a: the cut reads  s <= offset - a . h
    double offset = 0.0;
};

/// Any distribution p over points yields the valid upper bound
///   margin_pattern(h) <= max_r sum_j p_j e_j F_r(x_j) - sum_j p_j e_j h_j.
inline Cut make_cut(const std::vector<double>& proj, std::size_t m, std::size_t k, std::size_t pattern,
                    const std::vector<double>& mass) {
    Cut c;
    c.slope.resize(k);
    for (std::size_t j = 0; j < k; ++j) c.slope[j] = mass[j] * (((pattern >> j) & 1u) ? 1.0 : -1.0);
    c.offset = -std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < m; ++r) {
        double v = 0.0;
        for (std::size_t j = 0; j < k; ++j) v += c.slope[j] * proj[r * k + j];
        c.offset = std::max(c.offset, v);
    }
    return c;
}

} // namespace detail

/// Decides whether sigma is t-shattered by conv(F). The joint LP has variables
/// h (split into positive parts) and one weight vector per pattern. The
/// decomposed route maximizes the worst pattern margin over h by cutting
/// planes: each pattern's margin is a concave polyhedral function of h whose
/// supporting planes come from the minimizing player's optimal strategy.
inline std::optional<ShatterWitness> vc_convex_hull(const FunctionClass& F, const CoordinateSubset& sigma, double t,
                                                    const HullOptions& opts = {}) {
    require(t > 0.0, ErrorCode::BadInput, "shattering scale must be positive");
    require(sigma.ambient_n() == F.cols(), ErrorCode::Dimension, "subset does not match the class domain");
    require(!sigma.empty(), ErrorCode::EmptySubset, "shattering an empty set");
    const std::size_t k = sigma.size(), m = F.rows();
    if (k > opts.max_points || k >= 30) {
        throw SizeCapError("vc_convex_hull on |sigma| = " + std::to_string(k) + " exceeds max_points = " +
                               std::to_string(opts.max_points) + "; the LP has 2^k * m + k = " +
                               std::to_string((std::size_t{1} << std::min<std::size_t>(k, 30)) * m + k) + " variables",
                           std::ldexp(static_cast<double>(m), static_cast<int>(k)) + static_cast<double>(k));
    }
    const std::size_t patterns = std::size_t{1} << k;

    std::vector<double> proj(m * k);
    std::vector<double> lo(k, std::numeric_limits<double>::infinity()), hi(k, -std::numeric_limits<double>::infinity());
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t j = 0; j < k; ++j) {
            const double v = F(r, sigma.indices()[j]);
            proj[r * k + j] = v;
            lo[j] = std::min(lo[j], v);
            hi[j] = std::max(hi[j], v);
        }
    // Quick reject: a coordinate's values span less than 2t.
    for (std::size_t j = 0; j < k; ++j)
        if (hi[j] - lo[j] < 2.0 * t - opts.tol) return std::nullopt;

    ShatterWitness w;
    w.sigma = sigma;
    w.scale = t;

    HullMethod method = opts.method;
    if (method == HullMethod::Automatic)
        method = patterns * m <= opts.joint_limit ? HullMethod::JointLp : HullMethod::Decomposed;

    if (method == HullMethod::JointLp) {
        // Columns: h+ (k), h- (k), then w_{p,r}.
        lp::Problem prob;
        prob.num_vars = 2 * k + patterns * m;
        prob.objective.assign(prob.num_vars, 0.0);
        for (std::size_t p = 0; p < patterns; ++p) {
            for (std::size_t j = 0; j < k; ++j) {
                std::vector<double> row(prob.num_vars, 0.0);
                row[j] = -1.0;
                row[k + j] = 1.0;
                for (std::size_t r = 0; r < m; ++r) row[2 * k + p * m + r] = proj[r * k + j];
                if ((p >> j) & 1u)
                    prob.add(std::move(row), lp::Relation::GreaterEq, t);
                else
                    prob.add(std::move(row), lp::Relation::LessEq, -t);
            }
            std::vector<double> simplex(prob.num_vars, 0.0);
            for (std::size_t r = 0; r < m; ++r) simplex[2 * k + p * m + r] = 1.0;
            prob.add(std::move(simplex), lp::Relation::Eq, 1.0);
        }
        const auto sol = lp::minimize(prob, 1e-10);
        if (sol.status == lp::Status::Infeasible) return std::nullopt;
        if (sol.status != lp::Status::Optimal) throw std::runtime_error("joint hull LP failed");
        w.level.resize(k);
        for (std::size_t j = 0; j < k; ++j) w.level[j] = sol.x[j] - sol.x[k + j];
        w.weights.assign(patterns, std::vector<double>(m));
        for (std::size_t p = 0; p < patterns; ++p)
            for (std::size_t r = 0; r < m; ++r) w.weights[p][r] = sol.x[2 * k + p * m + r];
    } else {
        double span = 0.0;
        for (std::size_t j = 0; j < k; ++j) span = std::max(span, hi[j] - lo[j]);
        const double bound = 2.0 * span + 1.0;

        std::vector<detail::Cut> cuts;
        std::vector<double> h(k);
        for (std::size_t j = 0; j < k; ++j) h[j] = 0.5 * (lo[j] + hi[j]);
        bool found = false;
        for (std::size_t round = 0;; ++round) {
            if (round >= opts.max_rounds) throw std::runtime_error("hull cutting-plane search did not converge");
            // Margins at the current level.
            double worst = std::numeric_limits<double>::infinity();
            std::vector<detail::PatternGame> games(patterns);
            for (std::size_t p = 0; p < patterns; ++p) {
                games[p] = detail::solve_pattern_game(proj, m, k, p, h, bound);
                worst = std::min(worst, games[p].value);
            }
            if (worst >= t - opts.tol) {
                w.level = h;
                w.weights.resize(patterns);
                for (std::size_t p = 0; p < patterns; ++p) w.weights[p] = games[p].weights;
                found = true;
                break;
            }
            // Master: max s s.t. s <= offset_i - slope_i . h, lo <= h <= hi, solved
            // through its dual  min sum l_i offset_i + mu+ . hi - mu- . lo  subject to
            // sum l_i = 1, sum l_i slope_i + mu+ - mu- = 0; the multipliers are (s, h).
            double master_value = std::numeric_limits<double>::infinity();
            std::size_t added = 0;
            for (std::size_t p = 0; p < patterns; ++p) {
                double current = std::numeric_limits<double>::infinity();
                // Skip cuts that would not tighten the model at h.
                auto cut = detail::make_cut(proj, m, k, p, games[p].point_mass);
                double at_h = cut.offset;
                for (std::size_t j = 0; j < k; ++j) at_h -= cut.slope[j] * h[j];
                for (const auto& c : cuts) {
                    double v = c.offset;
                    for (std::size_t j = 0; j < k; ++j) v -= c.slope[j] * h[j];
                    current = std::min(current, v);
                }
                if (at_h < current - 1e-12) {
                    cuts.push_back(std::move(cut));
                    ++added;
                }
            }
            lp::Problem dual;
            const std::size_t nc = cuts.size();
            dual.num_vars = nc + 2 * k;
            dual.objective.resize(dual.num_vars);
            for (std::size_t i = 0; i < nc; ++i) dual.objective[i] = cuts[i].offset;
            for (std::size_t j = 0; j < k; ++j) {
                dual.objective[nc + j] = hi[j];
                dual.objective[nc + k + j] = -lo[j];
            }
            {
                std::vector<double> row(dual.num_vars, 0.0);
                for (std::size_t i = 0; i < nc; ++i) row[i] = 1.0;
                dual.add(std::move(row), lp::Relation::Eq, 1.0);
            }
            for (std::size_t j = 0; j < k; ++j) {
                std::vector<double> row(dual.num_vars, 0.0);
                for (std::size_t i = 0; i < nc; ++i) row[i] = cuts[i].slope[j];
                row[nc + j] = 1.0;
                row[nc + k + j] = -1.0;
                dual.add(std::move(row), lp::Relation::Eq, 0.0);
            }
            const auto sol = lp::minimize(dual, 1e-12);
            if (sol.status != lp::Status::Optimal) throw std::runtime_error("hull master LP failed");
            master_value = sol.objective;
            if (master_value < t - opts.tol) return std::nullopt;
            if (added == 0) return std::nullopt; // model is exact at h and h is optimal
            for (std::size_t j = 0; j < k; ++j) h[j] = std::clamp(sol.duals[1 + j], lo[j], hi[j]);
        }
        if (!found) return std::nullopt;
    }

    if (!verify_witness(F, w, opts.tol)) {
        // Re-normalize tiny negative or drifting weights from the LP before giving up.
        for (auto& wt : w.weights) {
            double s = 0.0;
            for (auto& x : wt) {
                x = std::max(0.0, x);
                s += x;
            }
            for (auto& x : wt) x /= s;
        }
        if (!verify_witness(F, w, opts.tol)) throw std::runtime_error("hull LP witness failed verification");
    }
    return w;
}

} // namespace coordproj
