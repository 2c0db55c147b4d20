#pragma once

// Packing and internal covering numbers of a finite class in L_2(mu), and the
// fitted-constant audit of  N(F, t) <= (2/t)^{K vc(F, c t)}.
//
// Conventions: a set is t-separated when every pair is at distance > t; a
// point is covered by a center at distance <= t. Centers are rows of F.

#include "coordproj/core.hpp"
#include "coordproj/shatter.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace coordproj {

class DistanceTable {
public:
    DistanceTable() = default;
    DistanceTable(std::size_t m, std::vector<double> d) : m_(m), d_(std::move(d)) {}

    std::size_t size() const noexcept { return m_; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return d_[i * m_ + j]; }
    const std::vector<double>& values() const noexcept { return d_; }

    double diameter() const noexcept {
        double best = 0.0;
        for (double x : d_) best = std::max(best, x);
        return best;
    }

private:
    std::size_t m_ = 0;
    std::vector<double> d_;
};

inline DistanceTable pairwise_l2_distances(const FunctionClass& F) {
    const std::size_t m = F.rows(), n = F.cols();
    std::vector<double> d(m * m, 0.0);
    RealVector diff(n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) {
            for (std::size_t x = 0; x < n; ++x) diff[x] = F(i, x) - F(j, x);
            d[i * m + j] = d[j * m + i] = normalized_lp(diff, 2.0);
        }
    return {m, std::move(d)};
}

struct CoveringEstimate {
    double t = 0.0;
    std::size_t packing_lower = 0;
    std::size_t covering_upper = 0;
    bool exact = false;
};

inline constexpr std::size_t kExactPackingCap = 30;
inline constexpr std::size_t kExactCoveringCap = 25;

/// Farthest-point traversal from row 0: the result is a maximal t-separated set.
inline std::vector<std::size_t> greedy_packing(const DistanceTable& d, double t) {
    const std::size_t m = d.size();
    std::vector<std::size_t> chosen{0};
    std::vector<double> gap(m);
    for (std::size_t i = 0; i < m; ++i) gap[i] = d(0, i);
    while (true) {
        std::size_t pick = m;
        for (std::size_t i = 0; i < m; ++i)
            if (gap[i] > t && (pick == m || gap[i] > gap[pick])) pick = i;
        if (pick == m) return chosen;
        chosen.push_back(pick);
        for (std::size_t i = 0; i < m; ++i) gap[i] = std::min(gap[i], d(pick, i));
    }
}

namespace detail {

inline std::vector<std::uint64_t> close_masks(const DistanceTable& d, double t) {
    std::vector<std::uint64_t> masks(d.size(), 0);
    for (std::size_t i = 0; i < d.size(); ++i)
        for (std::size_t j = 0; j < d.size(); ++j)
            if (d(i, j) <= t) masks[i] |= std::uint64_t{1} << j;
    return masks;
}

// Maximum independent set in the graph "distance <= t".
inline void max_separated(const std::vector<std::uint64_t>& close, std::uint64_t candidates, std::size_t size,
                          std::size_t& best) {
    if (candidates == 0) {
        best = std::max(best, size);
        return;
    }
    if (size + static_cast<std::size_t>(std::popcount(candidates)) <= best) return;
    const int v = std::countr_zero(candidates);
    // Take v.
    max_separated(close, candidates & ~close[v], size + 1, best);
    // Skip v.
    max_separated(close, candidates & ~(std::uint64_t{1} << v), size, best);
}

inline void min_cover(const std::vector<std::uint64_t>& close, std::uint64_t uncovered, std::size_t used,
                      std::size_t max_reach, std::size_t& best) {
    if (uncovered == 0) {
        best = std::min(best, used);
        return;
    }
    const auto left = static_cast<std::size_t>(std::popcount(uncovered));
    if (used + (left + max_reach - 1) / max_reach >= best) return;
    // Some center must cover the lowest uncovered point; try the largest gains first.
    const int e = std::countr_zero(uncovered);
    std::vector<std::pair<int, int>> options;
    for (std::size_t c = 0; c < close.size(); ++c)
        if (close[c] >> e & 1u) options.emplace_back(-std::popcount(close[c] & uncovered), static_cast<int>(c));
    std::sort(options.begin(), options.end());
    for (const auto& [neg_gain, c] : options) min_cover(close, uncovered & ~close[c], used + 1, max_reach, best);
}

} // namespace detail

inline std::optional<std::size_t> exact_packing_number(const DistanceTable& d, double t) {
    if (d.size() > kExactPackingCap) return std::nullopt;
    const auto close = detail::close_masks(d, t);
    const std::uint64_t all = d.size() == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << d.size()) - 1;
    std::size_t best = greedy_packing(d, t).size();
    detail::max_separated(close, all, 0, best);
    return best;
}

/// Repeatedly adds the uncovered row whose t-ball holds the most uncovered rows.
inline std::vector<std::size_t> greedy_cover(const DistanceTable& d, double t) {
    const std::size_t m = d.size();
    std::vector<bool> covered(m, false);
    std::vector<std::size_t> centers;
    std::size_t left = m;
    while (left > 0) {
        std::size_t pick = m, pick_gain = 0;
        for (std::size_t c = 0; c < m; ++c) {
            if (covered[c]) continue;
            std::size_t gain = 0;
            for (std::size_t j = 0; j < m; ++j)
                if (!covered[j] && d(c, j) <= t) ++gain;
            if (gain > pick_gain) {
                pick = c;
                pick_gain = gain;
            }
        }
        centers.push_back(pick);
        for (std::size_t j = 0; j < m; ++j)
            if (!covered[j] && d(pick, j) <= t) {
                covered[j] = true;
                --left;
            }
    }
    return centers;
}

inline std::optional<std::size_t> exact_covering_number(const DistanceTable& d, double t) {
    if (d.size() > kExactCoveringCap) return std::nullopt;
    const auto close = detail::close_masks(d, t);
    std::size_t reach = 1;
    for (auto c : close) reach = std::max(reach, static_cast<std::size_t>(std::popcount(c)));
    std::size_t best = greedy_cover(d, t).size();
    const std::uint64_t all = (std::uint64_t{1} << d.size()) - 1;
    detail::min_cover(close, all, 0, reach, best);
    return best;
}

/// packing_lower is exact when m <= 30, otherwise the greedy size.
inline CoveringEstimate packing_number(const FunctionClass& F, double t) {
    require(t > 0.0, ErrorCode::BadInput, "packing scale must be positive");
    const auto d = pairwise_l2_distances(F);
    CoveringEstimate e;
    e.t = t;
    if (auto exact = exact_packing_number(d, t)) {
        e.packing_lower = *exact;
        e.exact = true;
    } else {
        e.packing_lower = greedy_packing(d, t).size();
    }
    return e;
}

inline std::size_t covering_number_upper(const FunctionClass& F, double t) {
    require(t > 0.0, ErrorCode::BadInput, "covering radius must be positive");
    return greedy_cover(pairwise_l2_distances(F), t).size();
}

/// Both numbers at scale t; exact when both branch-and-bound routines apply.
inline CoveringEstimate covering_estimate(const DistanceTable& d, double t) {
    require(t > 0.0, ErrorCode::BadInput, "covering radius must be positive");
    CoveringEstimate e;
    e.t = t;
    const auto p = exact_packing_number(d, t);
    const auto n = exact_covering_number(d, t);
    e.packing_lower = p ? *p : greedy_packing(d, t).size();
    e.covering_upper = n ? *n : greedy_cover(d, t).size();
    e.exact = p && n;
    return e;
}

struct EntropyAuditRow {
    double t = 0.0;
    std::size_t covering = 0;
    bool covering_exact = false;
    std::size_t vc = 0;
    /// ln N / (vc ln(2/t)); absent when vc = 0.
    std::optional<double> ratio;
};

struct EntropyAudit {
    FittedConstant constant;
    std::vector<EntropyAuditRow> rows;
};

inline constexpr const char* kEntropyProtocol =
    "K_fit = max over the t grid of ln N(F,t) / (vc(F, c t) ln(2/t)), N the internal L_2 covering number "
    "(exact set cover when m <= 25, greedy otherwise), vc by exhaustive subset search; grid points with "
    "vc = 0 contribute only when N > 1, as the flag VC_ZERO_ANOMALY";

inline EntropyAudit entropy_inequality_audit(const FunctionClass& F, const std::vector<double>& t_grid,
                                             double c_assumed = 0.25, const ShatterOptions& opts = {}) {
    require(F.max_abs() <= 1.0, ErrorCode::BadInput, "entropy audit needs a class bounded by 1");
    require(c_assumed > 0.0, ErrorCode::BadConstant, "c_assumed must be positive");
    require(!t_grid.empty(), ErrorCode::BadInput, "empty t grid");
    for (double t : t_grid) require(t > 0.0 && t < 1.0, ErrorCode::BadInput, "t grid values must lie in (0, 1)");

    const auto d = pairwise_l2_distances(F);
    EntropyAudit out;
    out.constant.name = "K";
    out.constant.protocol = kEntropyProtocol;
    Digest digest;
    digest.add(c_assumed).add(t_grid).add(F.values()).add_bits(F.rows());
    out.constant.inputs_digest = digest.hex();

    double k_fit = 0.0;
    for (double t : t_grid) {
        EntropyAuditRow row;
        row.t = t;
        if (auto exact = exact_covering_number(d, t)) {
            row.covering = *exact;
            row.covering_exact = true;
        } else {
            row.covering = greedy_cover(d, t).size();
        }
        row.vc = vc_dimension(F, c_assumed * t, opts).dimension;
        if (row.vc > 0) {
            row.ratio = std::log(static_cast<double>(row.covering)) / (static_cast<double>(row.vc) * std::log(2.0 / t));
            k_fit = std::max(k_fit, *row.ratio);
        } else if (row.covering > 1 && !out.constant.has_flag("VC_ZERO_ANOMALY")) {
            out.constant.flags.emplace_back("VC_ZERO_ANOMALY");
        }
        out.rows.push_back(row);
    }
    out.constant.value = k_fit;
    return out;
}

} // namespace coordproj
