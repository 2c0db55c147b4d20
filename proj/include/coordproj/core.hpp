#pragma once

// Shared data model: function classes on the uniform space {0..n-1},
// coordinate subsets, normalized L_p norms and seeded random streams.

#include "coordproj/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace coordproj {

using RealVector = std::vector<double>;

inline bool all_finite(std::span<const double> v) noexcept {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

/// m real-valued functions on the uniform probability space of n points,
/// stored row-major (row = function, column = domain point). A multiset:
/// duplicate rows are kept.
class FunctionClass {
public:
    FunctionClass() = default;

    FunctionClass(std::size_t rows, std::size_t cols, std::vector<double> values,
                  bool bounded_by_one = false)
        : rows_(rows), cols_(cols), values_(std::move(values)), bounded_(bounded_by_one) {
        require(rows_ >= 1 && cols_ >= 1, ErrorCode::Dimension, "function class needs m >= 1 and n >= 1");
        require(values_.size() == rows_ * cols_, ErrorCode::Dimension, "value table size does not match m*n");
        require(all_finite(values_), ErrorCode::BadInput, "function class entries must be finite");
        if (bounded_) {
            require(max_abs() <= 1.0, ErrorCode::BadInput, "class flagged bounded_by_one has |value| > 1");
        }
    }

    static FunctionClass from_rows(const std::vector<RealVector>& rows, bool bounded_by_one = false) {
        require(!rows.empty(), ErrorCode::Dimension, "function class needs at least one row");
        const std::size_t n = rows.front().size();
        std::vector<double> flat;
        flat.reserve(rows.size() * n);
        for (const auto& r : rows) {
            require(r.size() == n, ErrorCode::Dimension, "ragged rows in function class");
            flat.insert(flat.end(), r.begin(), r.end());
        }
        return FunctionClass(rows.size(), n, std::move(flat), bounded_by_one);
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool bounded_by_one() const noexcept { return bounded_; }

    double operator()(std::size_t row, std::size_t col) const noexcept { return values_[row * cols_ + col]; }

    std::span<const double> row(std::size_t r) const noexcept {
        return {values_.data() + r * cols_, cols_};
    }

    RealVector row_vector(std::size_t r) const {
        auto s = row(r);
        return {s.begin(), s.end()};
    }

    const std::vector<double>& values() const noexcept { return values_; }

    double max_abs() const noexcept {
        double m = 0.0;
        for (double v : values_) m = std::max(m, std::abs(v));
        return m;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
    bool bounded_ = false;
};

/// Strictly increasing set of 0-based coordinates of {0..ambient_n-1}.
/// Reports and CSV/CLI surfaces use 1-based indices (see one_based()).
class CoordinateSubset {
public:
    CoordinateSubset() = default;

    CoordinateSubset(std::vector<std::size_t> indices, std::size_t ambient_n)
        : indices_(std::move(indices)), ambient_n_(ambient_n) {
        for (std::size_t k = 0; k < indices_.size(); ++k) {
            require(indices_[k] < ambient_n_, ErrorCode::Dimension, "subset index out of range");
            require(k == 0 || indices_[k - 1] < indices_[k], ErrorCode::BadInput,
                    "subset indices must be strictly increasing");
        }
    }

    static CoordinateSubset full(std::size_t n) {
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        return {std::move(idx), n};
    }

    static CoordinateSubset from_mask(const std::vector<std::uint8_t>& mask) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < mask.size(); ++i)
            if (mask[i]) idx.push_back(i);
        return {std::move(idx), mask.size()};
    }

    const std::vector<std::size_t>& indices() const noexcept { return indices_; }
    std::size_t ambient_n() const noexcept { return ambient_n_; }
    std::size_t size() const noexcept { return indices_.size(); }
    bool empty() const noexcept { return indices_.empty(); }
    bool contains(std::size_t i) const {
        return std::binary_search(indices_.begin(), indices_.end(), i);
    }

    std::vector<std::size_t> one_based() const {
        std::vector<std::size_t> out(indices_);
        for (auto& i : out) ++i;
        return out;
    }

    friend bool operator==(const CoordinateSubset&, const CoordinateSubset&) = default;

private:
    std::vector<std::size_t> indices_;
    std::size_t ambient_n_ = 0;
};

// ---------------------------------------------------------------------------
// Random streams

namespace detail {
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}
} // namespace detail

/// Reproducible random stream identified by (seed, stream_id). Substreams
/// derived with substream(k) are seeded independently of the parent state,
/// so a fixed substream layout gives identical draws regardless of the
/// order (or thread) in which substreams are consumed.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0)
        : seed_(seed), stream_id_(stream_id),
          engine_(detail::splitmix64(seed ^ detail::splitmix64(stream_id + 0x632BE59BD9B4E019ULL))) {}

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }

    RngStream substream(std::uint64_t k) const {
        return RngStream(seed_, detail::splitmix64(stream_id_ * 0x9E3779B97F4A7C15ULL + k + 1));
    }

    /// Child stream keyed by the next draw of this stream; advances the parent,
    /// so successive calls hand out distinct substream families.
    RngStream split() { return substream(engine_()); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double normal() { return normal_(engine_); }

    /// +1 or -1 with equal probability.
    double sign() { return (engine_() >> 63) ? 1.0 : -1.0; }

    bool bernoulli(double p) { return uniform() < p; }

    std::uint64_t below(std::uint64_t bound) { return std::uniform_int_distribution<std::uint64_t>(0, bound - 1)(engine_); }

    std::mt19937_64& engine() noexcept { return engine_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

// ---------------------------------------------------------------------------
// Parallelism. Results never depend on the thread count: work is split into
// fixed blocks, each block owns its substream, and reductions run in block order.

inline std::atomic<unsigned>& max_threads_setting() {
    static std::atomic<unsigned> value{1};
    return value;
}

inline void set_max_threads(unsigned n) { max_threads_setting() = std::max(1u, n); }
inline unsigned max_threads() { return max_threads_setting().load(); }

template <class Fn>
void for_each_block(std::size_t num_blocks, Fn&& fn) {
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(max_threads(), num_blocks));
    if (workers <= 1) {
        for (std::size_t b = 0; b < num_blocks; ++b) fn(b);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t b = next++; b < num_blocks; b = next++) fn(b);
        });
    }
    for (auto& t : pool) t.join();
}

// ---------------------------------------------------------------------------
// Norms and projections

/// ((1/n) sum |f(i)|^p)^(1/p), the L_p norm under the uniform measure.
inline double normalized_lp(std::span<const double> f, double p) {
    require(p >= 1.0, ErrorCode::BadExponent, "normalized_lp needs p >= 1");
    require(!f.empty(), ErrorCode::Dimension, "normalized_lp of an empty vector");
    double scale = 0.0;
    for (double x : f) scale = std::max(scale, std::abs(x));
    if (scale == 0.0) return 0.0;
    double acc = 0.0;
    for (double x : f) acc += std::pow(std::abs(x) / scale, p);
    return scale * std::pow(acc / static_cast<double>(f.size()), 1.0 / p);
}

/// Plain (unnormalized) Euclidean norm.
inline double euclidean_norm(std::span<const double> f) {
    double acc = 0.0;
    for (double x : f) acc += x * x;
    return std::sqrt(acc);
}

/// Unnormalized norm on R^k used for vector-valued sums: l_p or l_inf.
struct VectorNorm {
    enum class Kind { P, Sup };
    Kind kind = Kind::P;
    double p = 2.0;

    static VectorNorm sup() { return {Kind::Sup, 0.0}; }
    static VectorNorm lp(double p) {
        require(p >= 1.0, ErrorCode::BadExponent, "l_p norm needs p >= 1");
        return {Kind::P, p};
    }

    double operator()(std::span<const double> v) const {
        if (kind == Kind::Sup) {
            double m = 0.0;
            for (double x : v) m = std::max(m, std::abs(x));
            return m;
        }
        if (p == 2.0) return euclidean_norm(v);
        double acc = 0.0;
        for (double x : v) acc += std::pow(std::abs(x), p);
        return std::pow(acc, 1.0 / p);
    }

    std::string name() const { return kind == Kind::Sup ? "sup" : "l" + std::to_string(p); }
};

inline RealVector project(std::span<const double> f, const CoordinateSubset& sigma) {
    require(sigma.ambient_n() == f.size(), ErrorCode::Dimension, "subset ambient dimension does not match vector");
    require(!sigma.empty(), ErrorCode::EmptySubset, "projection onto an empty coordinate set");
    RealVector out;
    out.reserve(sigma.size());
    for (std::size_t i : sigma.indices()) out.push_back(f[i]);
    return out;
}

inline FunctionClass project_class(const FunctionClass& F, const CoordinateSubset& sigma) {
    require(sigma.ambient_n() == F.cols(), ErrorCode::Dimension, "subset ambient dimension does not match class");
    require(!sigma.empty(), ErrorCode::EmptySubset, "projection onto an empty coordinate set");
    std::vector<double> flat;
    flat.reserve(F.rows() * sigma.size());
    for (std::size_t r = 0; r < F.rows(); ++r)
        for (std::size_t i : sigma.indices()) flat.push_back(F(r, i));
    return FunctionClass(F.rows(), sigma.size(), std::move(flat), F.bounded_by_one());
}

// ---------------------------------------------------------------------------
// Fitted constants

/// An unspecified absolute constant estimated by a documented protocol.
struct FittedConstant {
    std::string name;
    double value = 0.0;
    std::string protocol;
    std::string inputs_digest;
    std::vector<std::string> flags;

    bool has_flag(const std::string& f) const { return std::find(flags.begin(), flags.end(), f) != flags.end(); }
};

/// FNV-1a over the bit patterns of a sequence of doubles, as 16 hex digits.
class Digest {
public:
    Digest& add(double x) {
        std::uint64_t bits;
        static_assert(sizeof bits == sizeof x);
        std::memcpy(&bits, &x, sizeof bits);
        return add_bits(bits);
    }
    Digest& add(std::span<const double> xs) {
        for (double x : xs) add(x);
        return *this;
    }
    Digest& add_bits(std::uint64_t bits) {
        for (int i = 0; i < 8; ++i) {
            h_ ^= (bits >> (8 * i)) & 0xFFu;
            h_ *= 0x100000001B3ULL;
        }
        return *this;
    }
    std::string hex() const {
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h_));
        return buf;
    }

private:
    std::uint64_t h_ = 0xCBF29CE484222325ULL;
};

} // namespace coordproj
