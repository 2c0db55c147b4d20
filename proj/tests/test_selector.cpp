#include <catch_amalgamated.hpp>

#include "coordproj/audit.hpp"
#include "coordproj/selector.hpp"
#include "oracles.hpp"

#include <boost/math/distributions/binomial.hpp>

#include <cmath>
#include <cstdio>

using namespace coordproj;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("selector draws") {
    RngStream rng(41);
    const auto full = draw_selectors(9, 1.0, rng);
    CHECK(full.subset.size() == 9);

    RngStream a(5), b(5);
    CHECK(draw_selectors(50, 0.3, a).outcomes == draw_selectors(50, 0.3, b).outcomes);

    CHECK_THROWS_AS(draw_selectors(5, 0.0, rng), Error);
    CHECK_THROWS_AS(draw_selectors(5, 1.5, rng), Error);
}

TEST_CASE("mean subset size") {
    RngStream rng(42);
    const std::size_t trials = 10000, n = 1000;
    double sum = 0.0;
    for (std::size_t k = 0; k < trials; ++k) sum += static_cast<double>(draw_selectors(n, 0.3, rng).subset.size());
    const double se = std::sqrt(n * 0.3 * 0.7 / trials);
    CHECK(std::abs(sum / trials - 300.0) <= 3 * se);
}

TEST_CASE("exact mgf") {
    CHECK_THAT(exact_mgf(RealVector{1, 2, -3}, 0.2, 0.0), WithinAbs(1.0, 1e-15));
    for (double lam : {-3.0, -0.5, 0.7, 4.0}) CHECK_THAT(exact_mgf(RealVector{1}, 0.5, lam), WithinRel(std::cosh(lam / 2), 1e-13));

    RngStream rng(43);
    for (int k = 0; k < 100; ++k) {
        RealVector a(1 + rng.below(30));
        for (auto& x : a) x = rng.normal();
        const double delta = 0.05 + 0.9 * rng.uniform();
        const double lam = 4.0 * rng.normal();
        CHECK(exact_mgf(a, delta, lam) >= 1.0 - 1e-12);
    }
}

TEST_CASE("symmetrization bound on the mgf") {
    RngStream rng(44);
    for (int k = 0; k < 40; ++k) {
        RealVector a(1 + rng.below(20));
        for (auto& x : a) x = rng.normal();
        const double delta = 0.05 + 0.9 * rng.uniform();
        for (double lam = 0.01; lam < 5.0; lam *= 1.5) {
            double rhs = 0.0;
            for (double x : a) rhs += std::log1p(2 * delta * (1 - delta) * (std::cosh(2 * lam * x) - 1));
            CHECK(2 * std::log(exact_mgf(a, delta, lam)) <= rhs + 1e-12);
        }
    }
}

TEST_CASE("chernoff bound for constant weights is the binomial chernoff bound") {
    for (std::size_t n : {20u, 100u, 400u})
        for (double delta : {0.1, 0.3, 0.5})
            for (double t : {0.1, 0.25, 0.5, 1.0}) {
                if (delta * (1 + t) >= 1) continue;
                const RealVector a(n, 1.0);
                CHECK_THAT(chernoff_tail_bound(a, delta, t), WithinRel(oracle::chernoff_binomial(n, delta, t), 1e-6));
            }
}

TEST_CASE("chernoff bound is valid and monotone") {
    RngStream rng(45);
    for (int k = 0; k < 60; ++k) {
        RealVector a(2 + rng.below(12));
        for (auto& x : a) x = rng.normal();
        const double delta = 0.05 + 0.9 * rng.uniform();
        double prev = 2.0;
        for (double t = 0.05; t < 3.0; t += 0.15) {
            const double bound = chernoff_tail_bound(a, delta, t);
            CHECK(oracle::enumerate_selector_tail(a, delta, t) <= bound + 1e-12);
            CHECK(bound <= prev + 1e-12);
            CHECK(bound >= 0.0);
            prev = bound;
        }
    }
    const RealVector ones(10, 1.0);
    const double b = chernoff_tail_bound(ones, 0.3, 5.0); // t delta n = 15 > n (1 - delta)
    CHECK(std::isfinite(b));
    CHECK(b >= 0.0);
}

TEST_CASE("exact tails") {
    // Binomial route against boost.
    for (double delta : {0.1, 0.3})
        for (double t : {0.25, 0.5}) {
            const RealVector a(100, 1.0);
            const auto ex = exact_tail(a, delta, t);
            REQUIRE(ex);
            CHECK(ex->method == ExactTailMethod::IntegerConvolution);
            CHECK_THAT(ex->one_sided, WithinRel(oracle::binomial_upper_tail(100, delta, delta * 100 * (1 + t)), 1e-9));
            CHECK_THAT(ex->two_sided, WithinRel(oracle::binomial_two_sided(100, delta, t * delta * 100), 1e-9));
        }
    // Enumeration route against the brute-force oracle.
    RngStream rng(46);
    for (int k = 0; k < 20; ++k) {
        RealVector a(3 + rng.below(10));
        for (auto& x : a) x = rng.normal();
        const auto ex = exact_tail(a, 0.3, 0.4);
        REQUIRE(ex);
        CHECK(ex->method == ExactTailMethod::Enumeration);
        CHECK_THAT(ex->one_sided, WithinAbs(oracle::enumerate_selector_tail(a, 0.3, 0.4), 1e-12));
    }
    // Integer-valued signs go through the convolution route.
    RealVector s(40);
    for (auto& x : s) x = rng.sign();
    const auto ex = exact_tail(s, 0.2, 0.5);
    REQUIRE(ex);
    CHECK(ex->method == ExactTailMethod::IntegerConvolution);
    RealVector big(30);
    for (auto& x : big) x = rng.normal();
    CHECK_FALSE(exact_tail(big, 0.2, 0.5));
}

TEST_CASE("tail experiment matches the binomial tail") {
    RngStream rng(47);
    const RealVector a(100, 1.0);
    const auto rep = tail_experiment(a, 0.3, 0.5, 100000, rng);
    const double exact = oracle::binomial_upper_tail(100, 0.3, 45);
    REQUIRE(rep.exact_prob);
    CHECK_THAT(*rep.exact_prob, WithinRel(exact, 1e-9));
    const double se = std::sqrt(exact * (1 - exact) / 100000);
    CHECK(std::abs(rep.empirical_prob - exact) <= 3 * se);
    CHECK(*rep.exact_prob <= rep.chernoff_bound + 1e-12);
    CHECK(rep.has_flag("T_ABOVE_HALF_M") == (0.5 >= rep.psi1_norm / 2));
}

TEST_CASE("degenerate tails") {
    RngStream rng(48);
    const RealVector a(50, 1.0);
    const auto full = tail_experiment(a, 1.0, 0.1, 1000, rng);
    CHECK(full.empirical_prob == 0.0);
    CHECK(*full.exact_prob == 0.0);
    CHECK(full.has_flag("UNRESOLVED_TAIL"));

    const auto beyond = tail_experiment(a, 0.3, 3.0, 1000, rng); // t delta n = 45 > 35
    CHECK(beyond.empirical_prob == 0.0);
    CHECK(*beyond.exact_prob == 0.0);
    CHECK(beyond.has_flag("VACUOUS_TAIL"));
}

TEST_CASE("two-sided tail dominates the one-sided tail and matches its exact value") {
    RngStream rng(49);
    for (double delta : {0.1, 0.3, 0.5}) {
        RealVector a(200);
        for (auto& x : a) x = rng.sign();
        const auto rep = tail_experiment(a, delta, 0.3, 20000, rng);
        CHECK(rep.empirical_two_sided >= rep.empirical_prob);
        REQUIRE(rep.exact_two_sided);
        CHECK(*rep.exact_two_sided >= *rep.exact_prob);
        const double se = std::sqrt(*rep.exact_two_sided * (1 - *rep.exact_two_sided) / 20000);
        CHECK(std::abs(rep.empirical_two_sided - *rep.exact_two_sided) <= 3 * se + 1e-12);
    }
}

TEST_CASE("almost isometry experiments") {
    RngStream rng(50);
    const RealVector ones(20, 1.0);
    const double p = almost_isometry_experiment(ones, 0.1, 0.2, 20000, rng);
    const double exact = 1 - std::pow(0.9, 20);
    CHECK(std::abs(p - exact) <= 3 * std::sqrt(exact * (1 - exact) / 20000));
    CHECK(almost_isometry_experiment(RealVector{1, 2, 3}, 1.0, 0.01, 100, rng) == 1.0);

    // Spike sqrt(n) e_1: success iff 1 in sigma and (1-eps)^2 <= n/|sigma| <= (1+eps)^2.
    const std::size_t n = 30;
    const double delta = 0.5, eps = 0.5;
    RealVector spike(n, 0.0);
    spike[0] = std::sqrt(static_cast<double>(n));
    boost::math::binomial_distribution<double> rest(n - 1, delta);
    double ref = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double ratio = static_cast<double>(n) / static_cast<double>(j + 1);
        if ((1 - eps) * (1 - eps) <= ratio && ratio <= (1 + eps) * (1 + eps))
            ref += delta * boost::math::pdf(rest, static_cast<double>(j));
    }
    const double q = almost_isometry_experiment(spike, delta, eps, 50000, rng);
    CHECK(std::abs(q - ref) <= 3 * std::sqrt(ref * (1 - ref) / 50000));
    CHECK_THROWS_AS(almost_isometry_experiment(spike, delta, 1.0, 10, rng), Error);
}

TEST_CASE("cardinality deviation decays with n") {
    RngStream rng(51);
    std::vector<double> xs, ys;
    for (std::size_t n : {50u, 100u, 200u, 400u}) {
        const double f = cardinality_deviation_frequency(n, 0.3, 0.25, 40000, rng);
        xs.push_back(static_cast<double>(n));
        ys.push_back(std::log(std::max(f, 1.0 / 40000)));
    }
    for (std::size_t i = 1; i < ys.size(); ++i) CHECK(ys[i] < ys[i - 1]);
    // Least-squares slope of log frequency against n.
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i] / xs.size();
        my += ys[i] / ys.size();
    }
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    const double rate = -sxy / sxx;
    std::printf("fitted decay exponent for cardinality deviation: %.6g per coordinate\n", rate);
    CHECK(rate > 0);
}

TEST_CASE("fitted tail constant stays in band across the standard suite") {
    RngStream rng(52);
    const auto suite = selector_suite(20000, rng);
    std::printf("fitted c: min %.6g max %.6g over %zu points\n", suite.c_min.value, suite.c_max, suite.reports.size());
    CHECK(suite.c_min.value >= 0.01);
    CHECK(suite.c_max <= 10.0);
    for (const auto& r : suite.reports)
        if (r.exact_prob) CHECK(*r.exact_prob <= r.chernoff_bound + 1e-12);
}
