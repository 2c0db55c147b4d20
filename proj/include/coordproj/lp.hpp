#pragma once

// Dense two-phase primal simplex for small linear programs:
//
//     minimize c.x  subject to  A x {<=,=,>=} b,  x >= 0.
//
// Pricing is Dantzig's rule; after a run of degenerate pivots it falls back to
// Bland's rule, which cannot cycle. Sizes here are at most a few thousand
// entries per row, so a dense tableau is adequate.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

namespace coordproj::lp {

enum class Relation { LessEq, Eq, GreaterEq };

struct Constraint {
    std::vector<double> coeffs;
    Relation relation = Relation::LessEq;
    double rhs = 0.0;
};

struct Problem {
    std::size_t num_vars = 0;
    std::vector<double> objective;
    std::vector<Constraint> constraints;

    void add(std::vector<double> coeffs, Relation rel, double rhs) {
        constraints.push_back({std::move(coeffs), rel, rhs});
    }
};

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };

struct Solution {
    Status status = Status::Infeasible;
    std::vector<double> x;
    double objective = 0.0;
    /// Simplex multipliers y, one per constraint in the caller's orientation:
    /// c_j - sum_r y_r A_rj >= 0 for every column at an optimum.
    std::vector<double> duals;
    int pivots = 0;
};

namespace detail {

class Tableau {
public:
    Tableau(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), a_((rows + 1) * (cols + 1), 0.0) {}

    double& at(std::size_t r, std::size_t c) { return a_[r * (cols_ + 1) + c]; }
    double at(std::size_t r, std::size_t c) const { return a_[r * (cols_ + 1) + c]; }
    double& rhs(std::size_t r) { return at(r, cols_); }
    // Row `rows_` holds reduced costs; its rhs slot holds minus the objective.
    double& cost(std::size_t c) { return at(rows_, c); }

    void pivot(std::size_t pr, std::size_t pc) {
        const double inv = 1.0 / at(pr, pc);
        double* prow = &a_[pr * (cols_ + 1)];
        for (std::size_t c = 0; c <= cols_; ++c) prow[c] *= inv;
        prow[pc] = 1.0;
        for (std::size_t r = 0; r <= rows_; ++r) {
            if (r == pr) continue;
            double* row = &a_[r * (cols_ + 1)];
            const double f = row[pc];
            if (f == 0.0) continue;
            for (std::size_t c = 0; c <= cols_; ++c) row[c] -= f * prow[c];
            row[pc] = 0.0;
        }
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

private:
    std::size_t rows_, cols_;
    std::vector<double> a_;
};

/// Runs simplex iterations on the cost row. Columns with allowed[c] == false never enter.
inline Status iterate(Tableau& t, std::vector<std::size_t>& basis, const std::vector<bool>& allowed, double tol,
                      int& pivots, int max_pivots) {
    int degenerate_run = 0;
    while (true) {
        if (pivots >= max_pivots) return Status::IterationLimit;
        const bool bland = degenerate_run > 50;
        std::size_t enter = t.cols();
        double best = -tol;
        for (std::size_t c = 0; c < t.cols(); ++c) {
            if (!allowed[c]) continue;
            const double rc = t.cost(c);
            if (rc < best) {
                enter = c;
                if (bland) break;
                best = rc;
            }
        }
        if (enter == t.cols()) return Status::Optimal;

        std::size_t leave = t.rows();
        double ratio = std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < t.rows(); ++r) {
            const double a = t.at(r, enter);
            if (a <= tol) continue;
            const double q = t.rhs(r) / a;
            if (leave == t.rows() || q < ratio - 1e-12) {
                ratio = q;
                leave = r;
            } else if (q <= ratio + 1e-12 && basis[r] < basis[leave]) {
                ratio = std::min(ratio, q);
                leave = r;
            }
        }
        if (leave == t.rows()) return Status::Unbounded;
        degenerate_run = (t.rhs(leave) <= tol) ? degenerate_run + 1 : 0;
        t.pivot(leave, enter);
        basis[leave] = enter;
        ++pivots;
    }
}

} // namespace detail

inline Solution minimize(const Problem& problem, double tol = 1e-9, int max_pivots = 200000) {
    const std::size_t n = problem.num_vars;
    const std::size_t m = problem.constraints.size();

    // Column layout: [original n][slack/surplus per row][artificial per row].
    const std::size_t slack0 = n, art0 = n + m, cols = n + 2 * m;
    detail::Tableau t(m, cols);
    std::vector<std::size_t> basis(m);
    std::vector<bool> is_art(cols, false);
    std::vector<double> row_sign(m, 1.0);

    for (std::size_t r = 0; r < m; ++r) {
        const auto& con = problem.constraints[r];
        const double sgn = con.rhs < 0.0 ? -1.0 : 1.0;
        row_sign[r] = sgn;
        for (std::size_t c = 0; c < n && c < con.coeffs.size(); ++c) t.at(r, c) = sgn * con.coeffs[c];
        t.rhs(r) = sgn * con.rhs;
        auto rel = con.relation;
        if (sgn < 0.0 && rel != Relation::Eq) rel = (rel == Relation::LessEq) ? Relation::GreaterEq : Relation::LessEq;
        if (rel == Relation::LessEq) {
            t.at(r, slack0 + r) = 1.0;
            basis[r] = slack0 + r;
        } else {
            if (rel == Relation::GreaterEq) t.at(r, slack0 + r) = -1.0;
            t.at(r, art0 + r) = 1.0;
            basis[r] = art0 + r;
            is_art[art0 + r] = true;
        }
    }

    Solution sol;
    std::vector<bool> allowed(cols, true);
    for (std::size_t r = 0; r < m; ++r)
        if (problem.constraints[r].relation == Relation::Eq) allowed[slack0 + r] = false;
    for (std::size_t c = art0; c < cols; ++c) allowed[c] = is_art[c];

    // Phase 1: minimize the sum of artificials.
    bool any_art = false;
    for (std::size_t r = 0; r < m; ++r) {
        if (!is_art[basis[r]]) continue;
        any_art = true;
        for (std::size_t c = 0; c <= cols; ++c)
            if (c == cols || !is_art[c]) t.at(m, c) -= t.at(r, c);
    }
    if (any_art) {
        const auto st = detail::iterate(t, basis, allowed, tol, sol.pivots, max_pivots);
        if (st == Status::IterationLimit) {
            sol.status = st;
            return sol;
        }
        double scale = 1.0;
        for (std::size_t r = 0; r < m; ++r) scale = std::max(scale, std::abs(problem.constraints[r].rhs));
        if (-t.rhs(m) > tol * scale) {
            sol.status = Status::Infeasible;
            return sol;
        }
        // Drive zero-level artificials out of the basis where possible.
        for (std::size_t r = 0; r < m; ++r) {
            if (!is_art[basis[r]]) continue;
            for (std::size_t c = 0; c < art0; ++c) {
                if (allowed[c] && std::abs(t.at(r, c)) > tol) {
                    t.pivot(r, c);
                    basis[r] = c;
                    ++sol.pivots;
                    break;
                }
            }
        }
    }

    // Phase 2.
    for (std::size_t c = art0; c < cols; ++c) allowed[c] = false;
    for (std::size_t c = 0; c <= cols; ++c) t.at(m, c) = 0.0;
    for (std::size_t c = 0; c < n && c < problem.objective.size(); ++c) t.at(m, c) = problem.objective[c];
    for (std::size_t r = 0; r < m; ++r) {
        const std::size_t b = basis[r];
        const double cb = (b < n && b < problem.objective.size()) ? problem.objective[b] : 0.0;
        if (cb == 0.0) continue;
        for (std::size_t c = 0; c <= cols; ++c) t.at(m, c) -= cb * t.at(r, c);
    }
    sol.status = detail::iterate(t, basis, allowed, tol, sol.pivots, max_pivots);
    if (sol.status != Status::Optimal) return sol;

    sol.x.assign(n, 0.0);
    for (std::size_t r = 0; r < m; ++r)
        if (basis[r] < n) sol.x[basis[r]] = std::max(0.0, t.rhs(r));
    sol.objective = 0.0;
    for (std::size_t c = 0; c < n && c < problem.objective.size(); ++c) sol.objective += problem.objective[c] * sol.x[c];

    // The column that started as +e_r (slack for <=, artificial otherwise) has
    // reduced cost -y_r in the sign-normalized row.
    sol.duals.assign(m, 0.0);
    for (std::size_t r = 0; r < m; ++r) {
        const std::size_t unit_col = is_art[art0 + r] ? art0 + r : slack0 + r;
        sol.duals[r] = -row_sign[r] * t.cost(unit_col);
    }
    return sol;
}

} // namespace coordproj::lp
