#include <catch_amalgamated.hpp>

#include "coordproj/core.hpp"

#include <cmath>

using namespace coordproj;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::BadInput;
}

RealVector random_vector(RngStream& rng, std::size_t n) {
    RealVector v(n);
    for (auto& x : v) x = rng.normal();
    return v;
}

} // namespace

TEST_CASE("project selects coordinates in index order") {
    const RealVector f{1, 2, 3};
    CHECK(project(f, CoordinateSubset({0, 2}, 3)) == RealVector{1, 3});
    CHECK(project(f, CoordinateSubset::full(3)) == f);
    CHECK(code_of([] { project(RealVector{1, 2}, CoordinateSubset({}, 2)); }) == ErrorCode::EmptySubset);
    CHECK(code_of([] { project(RealVector{1, 2}, CoordinateSubset({0}, 3)); }) == ErrorCode::Dimension);
}

TEST_CASE("coordinate subsets reject bad indices") {
    CHECK(code_of([] { CoordinateSubset({0, 3}, 3); }) == ErrorCode::Dimension);
    CHECK(code_of([] { CoordinateSubset({1, 1}, 3); }) == ErrorCode::BadInput);
    CHECK(code_of([] { CoordinateSubset({2, 1}, 3); }) == ErrorCode::BadInput);
    const auto s = CoordinateSubset::from_mask({1, 0, 1, 1});
    CHECK(s.indices() == std::vector<std::size_t>{0, 2, 3});
    CHECK(s.one_based() == std::vector<std::size_t>{1, 3, 4});
    CHECK(s.contains(2));
    CHECK_FALSE(s.contains(1));
}

TEST_CASE("normalized_lp values") {
    CHECK_THAT(normalized_lp(RealVector{1, 1, 1, 1}, 2), WithinAbs(1.0, 1e-15));
    CHECK_THAT(normalized_lp(RealVector{3, 0, 0, 0}, 2), WithinAbs(1.5, 1e-15));
    CHECK(normalized_lp(RealVector{0, 0}, 3) == 0.0);
    CHECK(code_of([] { normalized_lp(RealVector{1}, 0.5); }) == ErrorCode::BadExponent);

    RngStream rng(3);
    for (int k = 0; k < 50; ++k) {
        const auto f = random_vector(rng, 9);
        const double c = 3.0 * rng.uniform();
        RealVector g(f);
        for (auto& x : g) x *= c;
        for (double p : {1.0, 2.0, 3.5}) CHECK_THAT(normalized_lp(g, p), WithinRel(c * normalized_lp(f, p), 1e-12));
    }
}

TEST_CASE("normalized_lp is nondecreasing in p") {
    RngStream rng(4);
    for (int k = 0; k < 100; ++k) {
        const auto f = random_vector(rng, 1 + rng.below(20));
        double prev = 0.0;
        for (double p : {1.0, 1.5, 2.0, 3.0, 6.0}) {
            const double v = normalized_lp(f, p);
            CHECK(v >= prev * (1 - 1e-14));
            prev = v;
        }
    }
}

TEST_CASE("projected energy identity") {
    RngStream rng(5);
    for (int k = 0; k < 50; ++k) {
        const auto f = random_vector(rng, 12);
        std::vector<std::uint8_t> mask(12);
        for (auto& b : mask) b = rng.bernoulli(0.5);
        mask[0] = 1;
        const auto s = CoordinateSubset::from_mask(mask);
        const auto p = project(f, s);
        double direct = 0.0;
        for (std::size_t i : s.indices()) direct += f[i] * f[i];
        const double l2 = normalized_lp(p, 2.0);
        CHECK_THAT(l2 * l2 * static_cast<double>(s.size()), WithinRel(direct, 1e-12));
    }
}

TEST_CASE("projection composes") {
    const RealVector f{5, 6, 7, 8, 9};
    const CoordinateSubset outer({0, 2, 3, 4}, 5);
    const CoordinateSubset inner({1, 3}, 4); // positions within outer
    const auto twice = project(project(f, outer), inner);
    const CoordinateSubset composed({2, 4}, 5);
    CHECK(twice == project(f, composed));
}

TEST_CASE("project_class keeps duplicates and shapes") {
    const auto F = FunctionClass::from_rows({{1, 2, 3}, {4, 5, 6}});
    const auto col = project_class(F, CoordinateSubset({1}, 3));
    CHECK(col.rows() == 2);
    CHECK(col.cols() == 1);
    CHECK(col(0, 0) == 2);
    CHECK(col(1, 0) == 5);
    CHECK(project_class(F, CoordinateSubset::full(3)).values() == F.values());

    const auto D = FunctionClass::from_rows({{1, 2}, {1, 2}});
    CHECK(project_class(D, CoordinateSubset({0}, 2)).rows() == 2);
}

TEST_CASE("function class validation") {
    CHECK(code_of([] { FunctionClass(2, 2, {1, 2, 3}); }) == ErrorCode::Dimension);
    CHECK(code_of([] { FunctionClass(1, 2, {1, NAN}); }) == ErrorCode::BadInput);
    CHECK(code_of([] { FunctionClass(1, 2, {1, 1.5}, true); }) == ErrorCode::BadInput);
    CHECK(code_of([] { FunctionClass::from_rows({{1, 2}, {3}}); }) == ErrorCode::Dimension);
    CHECK(FunctionClass(1, 2, {1, -1}, true).bounded_by_one());
}

TEST_CASE("random streams are reproducible and substreams independent of consumption order") {
    RngStream a(42, 7), b(42, 7);
    for (int i = 0; i < 100; ++i) CHECK(a.uniform() == b.uniform());

    RngStream base(9);
    const auto s3 = base.substream(3);
    RngStream x = s3, y = base.substream(3);
    (void)base.substream(1).uniform();
    for (int i = 0; i < 10; ++i) CHECK(x.normal() == y.normal());

    RngStream c(42, 8);
    RngStream d(42, 7);
    int same = 0;
    for (int i = 0; i < 100; ++i) same += c.uniform() == d.uniform();
    CHECK(same == 0);
}

TEST_CASE("split hands out distinct families") {
    RngStream r(1);
    auto s1 = r.split();
    auto s2 = r.split();
    CHECK(s1.uniform() != s2.uniform());
}

TEST_CASE("block parallelism is order independent") {
    std::vector<double> serial(64), threaded(64);
    const RngStream base(11);
    set_max_threads(1);
    for_each_block(64, [&](std::size_t b) { serial[b] = base.substream(b).uniform(); });
    set_max_threads(4);
    for_each_block(64, [&](std::size_t b) { threaded[b] = base.substream(b).uniform(); });
    set_max_threads(1);
    CHECK(serial == threaded);
}

TEST_CASE("vector norms") {
    const RealVector v{3, -4};
    CHECK(VectorNorm::lp(2)(v) == 5);
    CHECK(VectorNorm::sup()(v) == 4);
    CHECK_THAT(VectorNorm::lp(1)(v), WithinAbs(7, 1e-14));
    CHECK(code_of([] { VectorNorm::lp(0.5); }) == ErrorCode::BadExponent);
}

TEST_CASE("digest depends on every bit") {
    Digest a, b, c;
    a.add(1.0).add(2.0);
    b.add(1.0).add(2.0);
    c.add(1.0).add(std::nextafter(2.0, 3.0));
    CHECK(a.hex() == b.hex());
    CHECK(a.hex() != c.hex());
    CHECK(a.hex().size() == 16);
}
