#pragma once

// Command-line front end. run() parses arguments, executes one command and
// returns the exit code with the JSON report text; the binary in tools/ only
// forwards argv and prints.

#include "coordproj/audit.hpp"
#include "coordproj/complexity.hpp"
#include "coordproj/csv.hpp"
#include "coordproj/entropy.hpp"
#include "coordproj/orlicz.hpp"
#include "coordproj/report.hpp"
#include "coordproj/rotation.hpp"
#include "coordproj/selector.hpp"
#include "coordproj/shatter.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace coordproj::cli {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr std::uint64_t kDefaultSeed = 1;

enum ExitCode { kOk = 0, kInternal = 1, kValidation = 2, kSizeCap = 3, kIo = 4 };

struct Result {
    int exit_code = kOk;
    std::string report;
};

using report::Json;

namespace detail {

struct Common {
    std::string input;
    std::string output;
    std::string csv_path;
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
    bool deterministic = false;
};

struct Params {
    double p = 2.0, tol = 1e-12;
    std::string subset;
    std::optional<double> delta;
    double eps = 0.25;
    std::optional<double> cfit;
    std::optional<double> t;
    std::size_t max_points = 0, max_functions = 64, max_domain = 20;
    std::string method = "auto";
    std::string t_grid = "0.2,0.4,0.6,0.8";
    double c = 0.25;
    std::size_t trials = 2000;
    std::string kind = "both";
    std::optional<std::size_t> k;
    std::optional<double> t_eps;
    std::size_t k_max = 4;
    bool exact_rademacher = false;
    bool process_bound = false;
    std::string norm = "l2";
    std::string lambda_grid = "0.25,0.5,1";
    std::size_t subsets = 8;
    std::string suite;
    std::size_t instances = 0;
};

struct Curve {
    std::string name;
    double x, y;
};

struct Output {
    Json config = Json::object();
    Json results = Json::object();
    Json fitted = Json::array();
    std::vector<std::string> flags;
    std::vector<Curve> curves;

    void flag(const std::string& f) {
        if (std::find(flags.begin(), flags.end(), f) == flags.end()) flags.push_back(f);
    }
    void flags_from(const std::vector<std::string>& fs) {
        for (const auto& f : fs) flag(f);
    }
};

inline std::vector<double> parse_list(const std::string& text, const char* what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        double v;
        require(csv::detail::parse_number(csv::detail::trim(item), v), ErrorCode::BadInput,
                std::string("cannot parse ") + what + " entry '" + item + "'");
        out.push_back(v);
    }
    require(!out.empty(), ErrorCode::BadInput, std::string("empty ") + what);
    return out;
}

inline CoordinateSubset parse_subset(const std::string& text, std::size_t n) {
    std::vector<std::size_t> idx;
    for (double v : parse_list(text, "subset")) {
        require(v >= 1.0 && v == std::floor(v) && v <= static_cast<double>(n), ErrorCode::Dimension,
                "subset indices are 1-based integers within the domain");
        idx.push_back(static_cast<std::size_t>(v) - 1);
    }
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    return {std::move(idx), n};
}

inline VectorNorm parse_norm(const std::string& text) {
    if (text == "sup" || text == "linf") return VectorNorm::sup();
    require(text.size() > 1 && text[0] == 'l', ErrorCode::BadInput, "norm must be sup or l<p>");
    double p;
    require(csv::detail::parse_number(text.substr(1), p), ErrorCode::BadInput, "norm must be sup or l<p>");
    return VectorNorm::lp(p);
}

inline Json vec(const std::vector<double>& v) { return Json(v); }

inline Json one_based(const CoordinateSubset& s) { return Json(s.one_based()); }

inline Json fitted_json(const FittedConstant& c) {
    Json j = Json::object();
    j["name"] = c.name;
    j["value"] = c.value;
    j["protocol"] = c.protocol;
    j["inputs_digest"] = c.inputs_digest;
    j["flags"] = c.flags;
    return j;
}

inline Json estimate_json(const ComplexityEstimate& e) {
    Json j = Json::object();
    j["kind"] = to_string(e.kind);
    j["mean"] = e.mean;
    j["std_error"] = e.std_error;
    j["trials"] = e.trials;
    return j;
}

inline Json witness_json(const ShatterWitness& w) {
    Json j = Json::object();
    j["sigma"] = one_based(w.sigma);
    j["scale"] = w.scale;
    j["level"] = vec(w.level);
    if (!w.assignment.empty()) {
        std::vector<std::size_t> rows(w.assignment);
        for (auto& r : rows) ++r;
        j["assignment"] = rows;
    }
    if (!w.weights.empty()) j["weights"] = w.weights;
    return j;
}

inline csv::Table load(const Common& c) {
    require(!c.input.empty(), ErrorCode::BadInput, "--input is required for this command");
    auto t = csv::read_file(c.input);
    require(!t.rows.empty(), ErrorCode::BadInput, "input has no data rows");
    return t;
}

// ---------------------------------------------------------------------------

inline void cmd_psi(const Common& c, const Params& p, Output& out) {
    out.config["p"] = p.p;
    out.config["tol"] = p.tol;
    const auto t = load(c);
    Json rows = Json::array();
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto r = psi_norm(t.rows[i], p.p, p.tol);
        Json j = Json::object();
        j["value"] = r.value;
        j["iterations"] = r.iterations;
        j["residual"] = r.residual;
        rows.push_back(j);
        out.curves.push_back({"psi", static_cast<double>(i + 1), r.value});
    }
    out.results["rows"] = rows;
}

inline void cmd_project(const Common& c, const Params& p, Output& out, RngStream& rng) {
    const auto t = load(c);
    const std::size_t n = t.rows.front().size();
    CoordinateSubset sigma;
    if (!p.subset.empty()) {
        out.config["subset"] = p.subset;
        sigma = parse_subset(p.subset, n);
    } else {
        require(p.delta.has_value(), ErrorCode::BadInput, "project needs --subset or --delta");
        out.config["delta"] = *p.delta;
        sigma = draw_selectors(n, *p.delta, rng).subset;
    }
    out.results["sigma"] = one_based(sigma);
    if (sigma.empty()) {
        out.flag("EMPTY_SUBSET");
        throw Error(ErrorCode::EmptySubset, "the selector draw is empty");
    }
    Json rows = Json::array();
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto proj = project(t.rows[i], sigma);
        const double full = normalized_lp(t.rows[i], 2.0);
        Json j = Json::object();
        j["projected"] = vec(proj);
        j["ratio"] = full > 0.0 ? normalized_lp(proj, 2.0) / full : 0.0;
        rows.push_back(j);
        out.curves.push_back({"ratio", static_cast<double>(i + 1), j["ratio"].get<double>()});
    }
    out.results["rows"] = rows;
}

inline void cmd_jl(const Common& c, const Params& p, Output& out, RngStream& rng) {
    const double cfit = p.cfit.value_or(kDefaultJlConstant);
    out.config["eps"] = p.eps;
    out.config["cfit"] = cfit;
    auto vectors = load(c).rows;
    bool normalized = false;
    for (auto& v : vectors) {
        const double norm = normalized_lp(v, 2.0);
        require(norm > 0.0, ErrorCode::BadInput, "jl input contains a zero vector");
        if (std::abs(norm - 1.0) > 1e-9) {
            normalized = true;
            for (auto& x : v) x /= norm;
        }
    }
    if (normalized) out.flag("INPUT_NORMALIZED");
    const auto rep = coordinate_jl(vectors, p.eps, cfit, rng);
    out.results["sigma"] = one_based(rep.sigma);
    out.results["cardinality"] = rep.sigma.size();
    out.results["target_cardinality"] = rep.target_cardinality;
    out.results["delta"] = rep.delta;
    out.results["psi2_max"] = rep.psi2_max;
    out.results["max_deviation"] = rep.max_deviation;
    out.results["within_eps"] = rep.max_deviation <= p.eps;
    out.results["per_vector_ratio"] = vec(rep.per_vector_ratio);
    out.flags_from(rep.flags);
    for (std::size_t i = 0; i < rep.per_vector_ratio.size(); ++i)
        out.curves.push_back({"ratio", static_cast<double>(i + 1), rep.per_vector_ratio[i]});
    if (!p.cfit) {
        FittedConstant fc;
        fc.name = "C";
        fc.value = kDefaultJlConstant;
        fc.protocol = kJlConstantProtocol;
        fc.inputs_digest = jl_pilot_digest();
        out.fitted.push_back(fitted_json(fc));
    }
}

inline ShatterOptions shatter_options(const Params& p, Output& out) {
    ShatterOptions o;
    if (p.max_points) o.max_points = p.max_points;
    o.max_functions = p.max_functions;
    o.max_domain = p.max_domain;
    out.config["max_points"] = o.max_points;
    out.config["max_functions"] = o.max_functions;
    out.config["max_domain"] = o.max_domain;
    return o;
}

inline void cmd_shatter(const Common& c, const Params& p, Output& out) {
    require(p.t.has_value(), ErrorCode::BadInput, "shatter needs --t");
    out.config["t"] = *p.t;
    const auto F = FunctionClass::from_rows(load(c).rows);
    const auto opts = shatter_options(p, out);
    if (!p.subset.empty()) {
        out.config["subset"] = p.subset;
        const auto w = is_shattered(F, parse_subset(p.subset, F.cols()), *p.t, opts);
        out.results["shattered"] = w.has_value();
        out.results["witness"] = w ? witness_json(*w) : Json();
        return;
    }
    const auto vc = vc_dimension(F, *p.t, opts);
    out.results["vc"] = vc.dimension;
    out.results["log2_class_size_bound"] = static_cast<std::size_t>(std::floor(std::log2(static_cast<double>(F.rows()))));
    out.results["subsets_checked"] = vc.subsets_checked;
    out.results["witness"] = vc.witness ? witness_json(*vc.witness) : Json();
}

inline void cmd_hull(const Common& c, const Params& p, Output& out) {
    require(p.t.has_value(), ErrorCode::BadInput, "hull needs --t");
    out.config["t"] = *p.t;
    const auto F = FunctionClass::from_rows(load(c).rows);
    HullOptions o;
    if (p.max_points) o.max_points = p.max_points;
    if (p.method == "joint")
        o.method = HullMethod::JointLp;
    else if (p.method == "decomposed")
        o.method = HullMethod::Decomposed;
    else
        require(p.method == "auto", ErrorCode::BadInput, "--method must be auto, joint or decomposed");
    out.config["max_points"] = o.max_points;
    out.config["method"] = p.method;
    const auto sigma = p.subset.empty() ? CoordinateSubset::full(F.cols()) : parse_subset(p.subset, F.cols());
    out.config["subset"] = one_based(sigma);
    const auto w = vc_convex_hull(F, sigma, *p.t, o);
    out.results["shattered"] = w.has_value();
    out.results["witness"] = w ? witness_json(*w) : Json();
}

inline void cmd_entropy(const Common& c, const Params& p, Output& out) {
    const auto grid = parse_list(p.t_grid, "t grid");
    out.config["t_grid"] = grid;
    out.config["c"] = p.c;
    const auto F = FunctionClass::from_rows(load(c).rows);
    const auto opts = shatter_options(p, out);
    const auto audit = entropy_inequality_audit(F, grid, p.c, opts);
    const auto d = pairwise_l2_distances(F);
    Json rows = Json::array();
    for (const auto& r : audit.rows) {
        const auto est = covering_estimate(d, r.t);
        Json j = Json::object();
        j["t"] = r.t;
        j["covering"] = r.covering;
        j["covering_exact"] = r.covering_exact;
        j["packing"] = est.packing_lower;
        j["packing_2t"] = covering_estimate(d, 2.0 * r.t).packing_lower;
        j["exact"] = est.exact;
        j["vc"] = r.vc;
        j["ratio"] = r.ratio ? Json(*r.ratio) : Json();
        rows.push_back(j);
        out.curves.push_back({"covering", r.t, static_cast<double>(r.covering)});
        out.curves.push_back({"packing", r.t, static_cast<double>(est.packing_lower)});
    }
    out.results["rows"] = rows;
    out.results["k_fit"] = audit.constant.value;
    out.flags_from(audit.constant.flags);
    out.fitted.push_back(fitted_json(audit.constant));
}

inline void cmd_complexity(const Common& c, const Params& p, Output& out, RngStream& rng) {
    out.config["trials"] = p.trials;
    out.config["kind"] = p.kind;
    require(p.kind == "both" || p.kind == "gaussian" || p.kind == "rademacher", ErrorCode::BadInput,
            "--kind must be gaussian, rademacher or both");
    const auto F = FunctionClass::from_rows(load(c).rows);
    const auto all = CoordinateSubset::full(F.cols());
    if (p.kind != "rademacher") {
        RngStream s = rng.substream(1);
        out.results["gaussian"] = estimate_json(gaussian_complexity(F, all, p.trials, s));
    }
    if (p.kind != "gaussian") {
        RngStream s = rng.substream(2);
        out.results["rademacher"] = estimate_json(rademacher_complexity(F, all, p.trials, s));
    }
    EllOptions eo;
    eo.kind = p.kind == "rademacher" ? WeightKind::Rademacher : WeightKind::Gaussian;
    eo.exact_rademacher = p.exact_rademacher;
    out.config["exact_rademacher"] = p.exact_rademacher;
    if (p.k) {
        out.config["k"] = *p.k;
        RngStream s = rng.substream(3);
        const auto e = ell_parameter(F, *p.k, p.trials, s, eo);
        Json j = estimate_json(e.estimate);
        j["tuple"] = e.tuple;
        for (auto& x : j["tuple"]) x = x.get<std::size_t>() + 1;
        j["exhaustive"] = e.exhaustive;
        j["exact"] = e.exact;
        out.results["ell"] = j;
    }
    if (p.t_eps) {
        out.config["eps"] = *p.t_eps;
        out.config["k_max"] = p.k_max;
        RngStream s = rng.substream(4);
        const auto tp = t_parameter(F, *p.t_eps, p.k_max, p.trials, s, eo);
        out.results["t"] = tp.value;
        Json per = Json::array();
        for (std::size_t k = 0; k < tp.per_k.size(); ++k) {
            per.push_back(estimate_json(tp.per_k[k].estimate));
            out.curves.push_back({"ell", static_cast<double>(k + 1), tp.per_k[k].estimate.mean});
        }
        out.results["ell_by_k"] = per;
        if (tp.capped) out.flag("CAPPED");
    }
    if (p.process_bound) {
        out.config["process_bound"] = true;
        RngStream s = rng.substream(5);
        const auto a = process_bound_audit(F, p.trials, s);
        Json j = Json::object();
        j["expectation"] = estimate_json(a.expectation);
        j["lower_limit"] = a.lower_limit;
        j["integral"] = a.integral;
        j["k_fit"] = a.constant.value;
        j["k_std_error"] = a.k_std_error;
        out.results["process_bound"] = j;
        out.flags_from(a.constant.flags);
        out.fitted.push_back(fitted_json(a.constant));
    }
}

inline void cmd_typecmp(const Common& c, const Params& p, Output& out, RngStream& rng) {
    const auto norm = parse_norm(p.norm);
    const auto grid = parse_list(p.lambda_grid, "lambda grid");
    out.config["norm"] = norm.name();
    out.config["lambda_grid"] = grid;
    out.config["trials"] = p.trials;
    out.config["subsets"] = p.subsets;
    const auto vectors = load(c).rows;

    RngStream sign_stream = rng.split();
    SignMinimumResult m;
    try {
        m = min_sign_norm(vectors, norm, SignMode::Exact, sign_stream);
    } catch (const SizeCapError&) {
        m = min_sign_norm(vectors, norm, SignMode::Heuristic, sign_stream);
        out.flag("SIGN_MINIMUM_HEURISTIC");
    }
    Json sm = Json::object();
    sm["value"] = m.value;
    sm["signs"] = m.signs;
    sm["method"] = m.method == SignMode::Exact ? "exact" : "heuristic";
    out.results["min_sign_norm"] = sm;

    const auto rep = type_infratype_report(vectors, norm, grid, p.trials, rng, p.subsets);
    out.results["gaussian_average"] = estimate_json(rep.gaussian_average);
    Json rows = Json::array();
    for (const auto& r : rep.rows) {
        Json j = Json::object();
        j["lambda"] = r.lambda;
        j["max_size"] = r.max_size;
        j["m_emp"] = r.m_emp;
        j["c_emp"] = r.c_emp;
        j["exact"] = r.exact;
        rows.push_back(j);
        out.curves.push_back({"c_emp", r.lambda, r.c_emp});
    }
    out.results["rows"] = rows;
    out.flags_from(rep.flags);
}

inline void cmd_audit(const Params& p, Output& out, RngStream& rng) {
    out.config["suite"] = p.suite;
    if (p.suite == "selector") {
        const std::size_t trials = p.trials;
        out.config["trials"] = trials;
        const auto s = selector_suite(trials, rng);
        Json rows = Json::array();
        for (std::size_t i = 0; i < s.reports.size(); ++i) {
            const auto& r = s.reports[i];
            Json j = Json::object();
            j["shape"] = s.shapes[i];
            j["n"] = r.n;
            j["delta"] = r.delta;
            j["t"] = r.t;
            j["empirical_prob"] = r.empirical_prob;
            j["exact_prob"] = r.exact_prob ? Json(*r.exact_prob) : Json();
            j["chernoff_bound"] = r.chernoff_bound;
            j["fitted_c"] = s.fitted[i] ? Json(*s.fitted[i]) : Json();
            j["flags"] = r.flags;
            rows.push_back(j);
            if (s.fitted[i]) out.curves.push_back({s.shapes[i], static_cast<double>(r.n), *s.fitted[i]});
        }
        out.results["rows"] = rows;
        out.results["c_min"] = s.c_min.value;
        out.results["c_max"] = s.c_max;
        out.fitted.push_back(fitted_json(s.c_min));
    } else if (p.suite == "entropy") {
        const std::size_t count = p.instances ? p.instances : 30;
        const auto grid = parse_list(p.t_grid, "t grid");
        out.config["instances"] = count;
        out.config["t_grid"] = grid;
        out.config["c"] = p.c;
        const auto s = entropy_suite(count, grid, p.c, rng);
        Json rows = Json::array();
        bool sandwich = true;
        for (std::size_t i = 0; i < s.instances.size(); ++i) {
            const auto& inst = s.instances[i];
            Json j = Json::object();
            j["m"] = inst.m;
            j["n"] = inst.n;
            j["k_fit"] = inst.audit.constant.value;
            j["sandwich_holds"] = inst.sandwich_holds;
            rows.push_back(j);
            sandwich = sandwich && inst.sandwich_holds;
            out.curves.push_back({"k_fit", static_cast<double>(i + 1), inst.audit.constant.value});
        }
        out.results["instances"] = rows;
        out.results["k_max"] = s.k_max.value;
        out.results["k_min"] = s.k_min;
        out.results["sandwich_holds"] = sandwich;
        out.flags_from(s.k_max.flags);
        out.fitted.push_back(fitted_json(s.k_max));
    } else if (p.suite == "process-bound") {
        const std::size_t count = p.instances ? p.instances : 20;
        out.config["instances"] = count;
        out.config["trials"] = p.trials;
        const auto s = process_bound_suite(count, p.trials, rng);
        Json rows = Json::array();
        for (std::size_t i = 0; i < s.instances.size(); ++i) {
            const auto& inst = s.instances[i];
            Json j = Json::object();
            j["m"] = inst.m;
            j["n"] = inst.n;
            j["expectation"] = inst.audit.expectation.mean;
            j["integral"] = inst.audit.integral;
            j["k_fit"] = inst.audit.constant.value;
            rows.push_back(j);
            out.curves.push_back({"k_fit", static_cast<double>(i + 1), inst.audit.constant.value});
        }
        out.results["instances"] = rows;
        out.results["k_max"] = s.k_max.value;
        out.flags_from(s.k_max.flags);
        out.fitted.push_back(fitted_json(s.k_max));
    } else if (p.suite == "jl-pilot") {
        const std::size_t seeds = p.instances ? p.instances : 200;
        out.config["seeds"] = seeds;
        const auto pilot = jl_pilot(128, 0.25, seeds);
        out.results["grid"] = pilot.grid;
        out.results["success"] = pilot.success;
        out.results["c_fit"] = pilot.c_fit.value;
        for (std::size_t i = 0; i < pilot.grid.size(); ++i) out.curves.push_back({"success", pilot.grid[i], pilot.success[i]});
        out.flags_from(pilot.c_fit.flags);
        out.fitted.push_back(fitted_json(pilot.c_fit));
    } else {
        throw Error(ErrorCode::BadInput, "--suite must be selector, entropy, process-bound or jl-pilot");
    }
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::Io, "cannot write " + path);
    f << text;
    if (!f) throw Error(ErrorCode::Io, "write failed for " + path);
}

inline std::optional<std::uint64_t> env_seed() {
    const char* s = std::getenv("COORDPROJ_SEED");
    if (!s || !*s) return std::nullopt;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(s, &end, 10);
    require(end && *end == '\0', ErrorCode::BadInput, "COORDPROJ_SEED must be a decimal integer");
    return v;
}

} // namespace detail

inline Result run(const std::vector<std::string>& args) {
    using namespace detail;
    CLI::App app{"Coordinate projection experiments", "coordproj"};
    app.require_subcommand(1);
    Common c;
    Params p;

    auto common = [&](CLI::App* sub, bool needs_input) {
        auto* in = sub->add_option("--input,-i", c.input, "CSV input, one vector or function per row");
        if (needs_input) in->required();
        sub->add_option("--output,-o", c.output, "write the JSON report here instead of stdout");
        sub->add_option("--csv", c.csv_path, "write plot-ready curve,x,y rows here");
        sub->add_option("--seed", c.seed, "random seed (default: COORDPROJ_SEED or 1)");
        sub->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);
        sub->add_flag("--deterministic", c.deterministic, "omit wall-clock timing from the report");
    };
    auto caps = [&](CLI::App* sub) {
        sub->add_option("--max-points", p.max_points, "cap on |sigma|");
        sub->add_option("--max-functions", p.max_functions, "cap on the class size");
        sub->add_option("--max-domain", p.max_domain, "cap on the domain size");
    };

    auto* psi = app.add_subcommand("psi", "psi_p norm of each row");
    common(psi, true);
    psi->add_option("--p", p.p, "exponent p >= 1");
    psi->add_option("--tol", p.tol, "relative bisection tolerance");

    auto* proj = app.add_subcommand("project", "coordinate projection of each row");
    common(proj, true);
    proj->add_option("--subset", p.subset, "1-based coordinates, comma separated");
    proj->add_option("--delta", p.delta, "selector mean when no subset is given");

    auto* jl = app.add_subcommand("jl", "rotate-then-sample embedding");
    common(jl, true);
    jl->add_option("--eps", p.eps, "distortion target");
    jl->add_option("--cfit", p.cfit, "cardinality constant C");

    auto* sh = app.add_subcommand("shatter", "shattering dimension of a finite class");
    common(sh, true);
    sh->add_option("--t", p.t, "scale")->required();
    sh->add_option("--subset", p.subset, "test only this subset");
    caps(sh);

    auto* hull = app.add_subcommand("hull", "shattering by the convex hull of the class");
    common(hull, true);
    hull->add_option("--t", p.t, "scale")->required();
    hull->add_option("--subset", p.subset, "1-based points (default: all)");
    hull->add_option("--max-points", p.max_points, "cap on |sigma|");
    hull->add_option("--method", p.method, "auto, joint or decomposed");

    auto* ent = app.add_subcommand("entropy", "covering numbers and the entropy audit");
    common(ent, true);
    ent->add_option("--t-grid", p.t_grid, "comma separated scales in (0, 1)");
    ent->add_option("--c", p.c, "assumed constant c");
    caps(ent);

    auto* cx = app.add_subcommand("complexity", "Gaussian and Rademacher averages");
    common(cx, true);
    cx->add_option("--trials", p.trials, "Monte-Carlo trials");
    cx->add_option("--kind", p.kind, "gaussian, rademacher or both");
    cx->add_option("--k", p.k, "tuple size for l_k");
    cx->add_option("--eps", p.t_eps, "compute t(F, eps)");
    cx->add_option("--k-max", p.k_max, "largest k for t(F, eps)");
    cx->add_flag("--exact-rademacher", p.exact_rademacher, "exact sign averages for the Rademacher l_k");
    cx->add_flag("--process-bound", p.process_bound, "run the Gaussian-process entropy audit");

    auto* tc = app.add_subcommand("typecmp", "minimum over signs against Gaussian averages");
    common(tc, true);
    tc->add_option("--norm", p.norm, "sup or l<p>");
    tc->add_option("--lambda-grid", p.lambda_grid, "subset proportions");
    tc->add_option("--trials", p.trials, "Monte-Carlo trials");
    tc->add_option("--subsets", p.subsets, "sampled subsets per proportion");

    auto* au = app.add_subcommand("audit", "standard fitting suites");
    common(au, false);
    au->add_option("--suite", p.suite, "selector, entropy, process-bound or jl-pilot")->required();
    au->add_option("--trials", p.trials, "Monte-Carlo trials");
    au->add_option("--instances", p.instances, "suite size (seeds for jl-pilot)");
    au->add_option("--t-grid", p.t_grid, "entropy suite scales");
    au->add_option("--c", p.c, "entropy suite constant");

    Json doc = Json::object();
    doc["schema"] = 1;
    doc["tool_version"] = kToolVersion;
    Output out;
    std::string command;
    int code = kOk;
    std::string reason_text, message;
    const auto start = std::chrono::steady_clock::now();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        try {
            app.parse(reversed);
        } catch (const CLI::CallForHelp&) {
            return {kOk, app.help()};
        } catch (const CLI::ParseError& e) {
            for (auto* sub : app.get_subcommands()) command = sub->get_name();
            throw Error(ErrorCode::BadInput, e.what());
        }
        command = app.get_subcommands().front()->get_name();
        if (!c.seed) c.seed = env_seed();
        const std::uint64_t seed = c.seed.value_or(kDefaultSeed);
        set_max_threads(c.threads);
        out.config["input"] = c.input;
        out.config["threads"] = c.threads;
        RngStream rng(seed);
        doc["seed"] = seed;

        if (command == "psi") cmd_psi(c, p, out);
        else if (command == "project") cmd_project(c, p, out, rng);
        else if (command == "jl") cmd_jl(c, p, out, rng);
        else if (command == "shatter") cmd_shatter(c, p, out);
        else if (command == "hull") cmd_hull(c, p, out);
        else if (command == "entropy") cmd_entropy(c, p, out);
        else if (command == "complexity") cmd_complexity(c, p, out, rng);
        else if (command == "typecmp") cmd_typecmp(c, p, out, rng);
        else cmd_audit(p, out, rng);
    } catch (const Error& e) {
        reason_text = std::string(reason(e.code()));
        message = e.what();
        code = e.code() == ErrorCode::SizeCap ? kSizeCap : e.code() == ErrorCode::Io ? kIo : kValidation;
    } catch (const std::exception& e) {
        reason_text = "INTERNAL";
        message = e.what();
        code = kInternal;
    }

    doc["command"] = command;
    doc["config"] = out.config;
    if (!doc.contains("seed")) doc["seed"] = c.seed.value_or(kDefaultSeed);
    if (code == kOk) {
        doc["results"] = out.results;
    } else {
        Json err = Json::object();
        err["reason"] = reason_text;
        err["message"] = message;
        doc["error"] = err;
    }
    doc["fitted_constants"] = out.fitted;
    doc["flags"] = out.flags;
    doc["timing_ms"] = c.deterministic
                           ? 0.0
                           : std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    std::string text = report::dump(doc);

    try {
        if (code == kOk && !c.csv_path.empty()) {
            std::string plot = "curve,x,y\n";
            for (const auto& cv : out.curves)
                plot += cv.name + "," + csv::format_number(cv.x) + "," + csv::format_number(cv.y) + "\n";
            write_text(c.csv_path, plot);
        }
        if (!c.output.empty()) write_text(c.output, text);
    } catch (const Error& e) {
        Json err = Json::object();
        err["reason"] = std::string(reason(e.code()));
        err["message"] = e.what();
        doc.erase("results");
        doc["error"] = err;
        return {kIo, report::dump(doc)};
    }
    return {code, text};
}

} // namespace coordproj::cli
