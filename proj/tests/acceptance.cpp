// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
// Usage: acceptance [path-to-coordproj-cli]

#include "coordproj/audit.hpp"
#include "coordproj/coordproj.hpp"
#include "oracles.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

using namespace coordproj;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

RealVector unit_vector(RngStream& rng, std::size_t n) {
    RealVector v(n);
    for (auto& x : v) x = rng.normal();
    const double s = euclidean_norm(v);
    for (auto& x : v) x /= s;
    return v;
}

FunctionClass dual_ball_class(const std::vector<RealVector>& pts) {
    const std::size_t k = pts.front().size(), c = pts.size();
    std::vector<double> v;
    for (double s : {1.0, -1.0})
        for (std::size_t j = 0; j < k; ++j)
            for (std::size_t i = 0; i < c; ++i) v.push_back(s * pts[i][j]);
    return FunctionClass(2 * k, c, std::move(v));
}

FunctionClass sign_class(std::size_t n) {
    std::vector<RealVector> rows;
    for (std::size_t p = 0; p < (std::size_t{1} << n); ++p) {
        RealVector r(n);
        for (std::size_t j = 0; j < n; ++j) r[j] = (p >> j & 1u) ? 1.0 : -1.0;
        rows.push_back(r);
    }
    return FunctionClass::from_rows(rows, true);
}

// ---------------------------------------------------------------------------

Outcome psi2_closed_form() {
    double worst = 0.0;
    for (std::size_t n : {2u, 4u, 16u, 64u, 256u}) {
        RealVector e(n, 0.0);
        e[0] = 1.0;
        worst = std::max(worst, std::abs(psi_norm(e, 2.0).value - oracle::spike_psi2(n)));
    }
    return {worst <= 1e-8, fmt("max |bisection - closed form| = %.3g (tol 1e-8)", worst)};
}

Outcome sphere_bound() {
    RngStream rng(2);
    std::size_t failures = 0;
    double worst = 0.0;
    for (std::size_t n : {4u, 16u, 64u}) {
        const double bound = std::sqrt(2.0 / std::log(static_cast<double>(n)));
        for (int k = 0; k < 1000; ++k) {
            const double v = psi_norm(unit_vector(rng, n), 2.0).value;
            worst = std::max(worst, v / bound);
            failures += v > bound;
        }
    }
    return {failures == 0, fmt("%zu failures in 3000 vectors, max psi2 / bound = %.4f", failures, worst)};
}

Outcome selector_tail() {
    RngStream rng(3);
    bool ok = true;
    std::string d;
    const RealVector a(100, 1.0);
    for (double delta : {0.1, 0.3})
        for (double t : {0.25, 0.5}) {
            const auto rep = tail_experiment(a, delta, t, 100000, rng);
            const double exact = oracle::binomial_upper_tail(100, delta, delta * 100 * (1 + t));
            const double se = std::sqrt(exact * (1 - exact) / 100000);
            const double z = se > 0 ? std::abs(rep.empirical_prob - exact) / se : (rep.empirical_prob == exact ? 0 : 1e9);
            const bool exact_match = rep.exact_prob && std::abs(*rep.exact_prob - exact) <= 1e-12 + 1e-9 * exact;
            const bool chernoff = exact <= rep.chernoff_bound + 1e-12;
            ok = ok && z <= 3 && exact_match && chernoff;
            d += fmt("d=%.1f t=%.2f z=%.2f; ", delta, t, z);
        }
    const auto suite = selector_suite(20000, rng);
    const bool band = suite.c_min.value >= 0.01 && suite.c_max <= 10.0;
    d += fmt("suite c in [%.4g, %.4g] (band [0.01, 10])", suite.c_min.value, suite.c_max);
    return {ok && band, d};
}

Outcome coordinate_jl_rate() {
    const double rate = jl_success_rate(scaled_basis(128), 0.25, kDefaultJlConstant, 200, 50);
    return {rate >= 0.5, fmt("C_fit = %.2g, success on held-out seeds 200..249 = %.2f (need >= 0.5)", kDefaultJlConstant, rate)};
}

Outcome domination_equivalence() {
    RngStream rng(5);
    int instances = 0, agree = 0;
    while (instances < 50) {
        const std::size_t c = 1 + rng.below(4), k = 1 + rng.below(6);
        std::vector<RealVector> pts(c, RealVector(k));
        for (auto& p : pts)
            for (auto& x : p) x = 2 * rng.uniform() - 1;
        const double eps = l1_domination(pts, VectorNorm::sup(), DominationMode::Exact).epsilon_star;
        const double t = eps * (0.5 + rng.uniform());
        if (t <= 1e-6) continue;
        ++instances;
        HullOptions o;
        o.tol = 1e-7;
        const bool shattered = vc_convex_hull(dual_ball_class(pts), CoordinateSubset::full(c), t, o).has_value();
        agree += shattered == (eps >= t - 1e-7);
    }
    return {agree == instances, fmt("%d of %d instances agree", agree, instances)};
}

Outcome hull_sharpness() {
    bool ok = true;
    std::string d;
    for (std::size_t n : {2u, 4u, 8u}) {
        const auto h = oracle::hadamard(n);
        // {e_i} as functions on the Hadamard points: e_i(x_p) = H[p][i].
        std::vector<std::vector<double>> values(n, std::vector<double>(n));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t p = 0; p < n; ++p) values[i][p] = h[p][i];
        std::vector<double> flat;
        for (const auto& r : values) flat.insert(flat.end(), r.begin(), r.end());
        const FunctionClass E(n, n, flat);
        const std::size_t brute = oracle::vc_by_levels(values, 0.25);
        const std::size_t vc = vc_dimension(E, 0.25).dimension;
        const auto log2n = static_cast<std::size_t>(std::log2(static_cast<double>(n)));
        ok = ok && brute == vc && vc <= log2n;
        d += fmt("n=%zu vc=%zu (log2 n = %zu)", n, vc, log2n);
        if (n <= 4) {
            // Cube vertices as the domain.
            const std::size_t pts = std::size_t{1} << n;
            std::vector<std::vector<double>> cube(n, std::vector<double>(pts));
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t p = 0; p < pts; ++p) cube[i][p] = (p >> i & 1u) ? 1.0 : -1.0;
            std::vector<double> cf;
            for (const auto& r : cube) cf.insert(cf.end(), r.begin(), r.end());
            const std::size_t cvc = vc_dimension(FunctionClass(n, pts, cf), 0.25).dimension;
            ok = ok && cvc <= log2n;
            d += fmt(", cube vc=%zu", cvc);
        }
        // The l_1 ball as the hull of +-e_i shatters all n Hadamard points at 1/sqrt(n).
        std::vector<RealVector> rows(h.begin(), h.end());
        HullOptions o;
        o.max_points = n;
        if (n > 4) o.method = HullMethod::Decomposed;
        const double t = 1.0 / std::sqrt(static_cast<double>(n));
        const auto D = dual_ball_class(rows);
        const auto w = vc_convex_hull(D, CoordinateSubset::full(n), t, o);
        const bool certified = w && verify_witness(D, *w, 1e-7);
        ok = ok && certified;
        d += fmt(", hull shatters at 1/sqrt(n): %s", certified ? "yes" : "no");
        if (n < 8) d += "; ";
    }
    return {ok, d};
}

Outcome entropy_audit() {
    RngStream rng(7);
    const auto suite = entropy_suite(30, {0.2, 0.4, 0.6, 0.8}, 0.25, rng);
    bool finite = true, sandwich = true;
    for (const auto& inst : suite.instances) {
        finite = finite && std::isfinite(inst.audit.constant.value) && inst.audit.constant.value > 0;
        sandwich = sandwich && inst.sandwich_holds;
    }
    const double spread = suite.k_max.value / suite.k_min;
    const bool ok = finite && sandwich && suite.k_max.value <= 100 && spread <= 3.0;
    return {ok, fmt("K_fit in [%.4g, %.4g], spread x%.3g (limit x3), finite: %s, sandwich: %s", suite.k_min,
                    suite.k_max.value, spread, finite ? "yes" : "no", sandwich ? "yes" : "no")};
}

Outcome process_bound() {
    RngStream rng(8);
    const auto suite = process_bound_suite(20, 20000, rng);
    bool finite = true;
    for (const auto& inst : suite.instances) finite = finite && std::isfinite(inst.audit.constant.value);

    RngStream s(88);
    const auto a = process_bound_audit(sign_class(4), 40000, s);
    const double e_true = 4 * std::sqrt(2.0 / std::numbers::pi);
    const double integral =
        oracle::integrate([](double t) { return std::sqrt(4 * std::log(2 / t)); }, e_true / 4, 1.0);
    const double k_true = e_true / (2 * integral);
    const double z = std::abs(a.constant.value - k_true) / a.k_std_error;
    const bool ok = finite && suite.k_max.value <= 10 && z <= 2;
    return {ok, fmt("K_fit max over 20 classes = %.4g (limit 10); sign class K = %.5g vs oracle %.5g, %.2f se", suite.k_max.value,
                    a.constant.value, k_true, z)};
}

Outcome type_comparison() {
    RngStream rng(9);
    const std::size_t n = 256;
    std::vector<RealVector> e(n, RealVector(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) e[i][i] = 1.0;
    const auto g = gaussian_vector_average(e, VectorNorm::lp(2), 4000, rng);
    const double ratio = g.mean / std::sqrt(static_cast<double>(n));
    const double chi = oracle::chi_mean(n) / std::sqrt(static_cast<double>(n));
    const double exact = min_sign_norm(e, VectorNorm::lp(2), SignMode::Exact, rng).value;
    int bad = 0, equal = 0;
    for (int it = 0; it < 100; ++it) {
        std::vector<RealVector> x(12, RealVector(8));
        for (auto& v : x)
            for (auto& c : v) c = rng.normal();
        const double ex = min_sign_norm(x, VectorNorm::lp(2), SignMode::Exact, rng).value;
        const double he = min_sign_norm(x, VectorNorm::lp(2), SignMode::Heuristic, rng).value;
        bad += he < ex - 1e-12;
        equal += std::abs(he - ex) <= 1e-12;
    }
    const bool ok = std::abs(ratio - 1.0) <= 0.02 && std::abs(exact - 16.0) <= 1e-12 && bad == 0;
    return {ok, fmt("E||sum g_i e_i|| / sqrt(n) = %.4f (chi oracle %.4f); min sign norm = %.12g; heuristic below exact on %d, "
                    "equal on %d of 100",
                    ratio, chi, exact, bad, equal)};
}

std::string capture(const std::string& cmd, int& status) {
    std::string out;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (!pipe) {
        status = -1;
        return out;
    }
    std::array<char, 4096> buf;
    std::size_t got;
    while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), got);
    status = ::pclose(pipe);
    return out;
}

Outcome cli_determinism(const std::string& cli) {
    if (cli.empty()) return {false, "no CLI path given"};
    const std::string s = SAMPLES_DIR;
    const std::vector<std::string> commands{
        "psi --p 2 --input " + s + "/constant.csv",
        "project --delta 0.4 --input " + s + "/gaussian12.csv",
        "jl --eps 0.25 --cfit 2.0 --input " + s + "/basis128.csv",
        "jl --eps 0.3 --input " + s + "/basis128.csv",
        "shatter --t 0.25 --input " + s + "/signclass.csv",
        "hull --t 0.5 --input " + s + "/signclass.csv --subset 1,2,3",
        "entropy --input " + s + "/signs10x7.csv",
        "complexity --trials 2000 --k 2 --eps 0.5 --k-max 3 --process-bound --input " + s + "/signs10x7.csv",
        "typecmp --trials 2000 --input " + s + "/gaussian12.csv",
        "audit --suite entropy --instances 3",
    };
    int same = 0;
    std::string failed;
    for (const auto& c : commands) {
        const std::string full = "\"" + cli + "\" " + c + " --seed 7 --threads 1 --deterministic 2>&1";
        int st1 = 0, st2 = 0;
        const auto a = capture(full, st1);
        const auto b = capture(full, st2);
        if (st1 == 0 && st2 == 0 && !a.empty() && a == b)
            ++same;
        else
            failed += " [" + c.substr(0, c.find(' ')) + "]";
    }
    return {same == static_cast<int>(commands.size()),
            fmt("%d of %zu commands byte-identical across repeated runs%s", same, commands.size(), failed.c_str())};
}

} // namespace

int main(int argc, char** argv) {
    std::setvbuf(stdout, nullptr, _IONBF, 0);
    const std::string cli = argc > 1 ? argv[1] : "";
    struct Criterion {
        int id;
        const char* name;
        double limit_s;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "psi2 closed form", 1, psi2_closed_form},
        {2, "sphere psi2 bound", 5, sphere_bound},
        {3, "selector tail", 30, selector_tail},
        {4, "coordinate JL", 60, coordinate_jl_rate},
        {5, "shattering vs l1 domination", 30, domination_equivalence},
        {6, "convex hull sharpness", 60, hull_sharpness},
        {7, "entropy audit", 120, entropy_audit},
        {8, "gaussian process bound audit", 60, process_bound},
        {9, "type and infratype comparison", 60, type_comparison},
        {10, "CLI determinism", 0, [&] { return cli_determinism(cli); }},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = c.limit_s <= 0 || secs < c.limit_s;
        const bool pass = o.pass && in_time;
        failures += !pass;
        std::string timing = c.limit_s > 0 ? fmt("%.2f s (limit %.0f s)", secs, c.limit_s) : fmt("%.2f s", secs);
        std::printf("%s %2d %s: %s; %s\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), timing.c_str());
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
