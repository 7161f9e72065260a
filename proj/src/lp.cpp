#include "sdc/lp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "sdc/errors.hpp"

namespace sdc::lp {

namespace {

constexpr double kReducedCostTol = 1e-10;
constexpr double kPivotTol = 1e-11;
constexpr double kFeasTol = 1e-8;
constexpr long kMaxPivots = 200000;

struct Tableau {
    int rows = 0, cols = 0;       // cols excludes the rhs
    std::vector<double> a;        // rows x (cols+1), row-major, rhs last
    std::vector<double> obj;      // cols+1 reduced-cost row (rhs = -objective)
    std::vector<int> basis;       // basic column per row

    double& at(int r, int c) { return a[static_cast<size_t>(r) * (cols + 1) + c]; }
    double at(int r, int c) const { return a[static_cast<size_t>(r) * (cols + 1) + c]; }

    void pivot(int pr, int pc) {
        const int w = cols + 1;
        double* prow = &a[static_cast<size_t>(pr) * w];
        double inv = 1.0 / prow[pc];
        for (int c = 0; c < w; ++c) prow[c] *= inv;
        prow[pc] = 1.0;
        for (int r = 0; r < rows; ++r) {
            if (r == pr) continue;
            double* row = &a[static_cast<size_t>(r) * w];
            double f = row[pc];
            if (f == 0.0) continue;
            for (int c = 0; c < w; ++c) row[c] -= f * prow[c];
            row[pc] = 0.0;
        }
        double f = obj[pc];
        if (f != 0.0) {
            for (int c = 0; c < w; ++c) obj[c] -= f * prow[c];
            obj[pc] = 0.0;
        }
        basis[pr] = pc;
    }

    // Bland: smallest eligible entering column, then smallest basis leaving.
    // Returns optimal, unbounded, or throws on pivot-count blowup.
    Status run(long& pivots) {
        while (true) {
            int enter = -1;
            for (int c = 0; c < cols; ++c)
                if (obj[c] < -kReducedCostTol) {
                    enter = c;
                    break;
                }
            if (enter < 0) return Status::optimal;
            int leave = -1;
            double best = std::numeric_limits<double>::infinity();
            for (int r = 0; r < rows; ++r) {
                double d = at(r, enter);
                if (d > kPivotTol) {
                    double ratio = at(r, cols) / d;
                    if (ratio < best - 1e-12 ||
                        (ratio < best + 1e-12 && (leave < 0 || basis[r] < basis[leave]))) {
                        best = ratio;
                        leave = r;
                    }
                }
            }
            if (leave < 0) return Status::unbounded;
            pivot(leave, enter);
            if (++pivots > kMaxPivots)
                throw Error("lp: pivot limit exceeded");
        }
    }
};

}  // namespace

Solution solve_min(const std::vector<double>& c, const std::vector<Constraint>& cons, int n) {
    const int m = static_cast<int>(cons.size());
    for (const auto& row : cons)
        if (static_cast<int>(row.a.size()) != n)
            throw SpecError("lp: constraint dimension mismatch");
    if (static_cast<int>(c.size()) != n) throw SpecError("lp: objective dimension mismatch");

    // Column layout: n structural, then one slack/surplus per inequality,
    // then one artificial per >= or = row.
    int n_slack = 0, n_art = 0;
    for (const auto& row : cons) {
        bool flip = row.b < 0.0;
        Sense s = row.sense;
        if (flip && s == Sense::le) s = Sense::ge;
        else if (flip && s == Sense::ge) s = Sense::le;
        if (s != Sense::eq) ++n_slack;
        if (s != Sense::le) ++n_art;
    }

    Tableau t;
    t.rows = m;
    t.cols = n + n_slack + n_art;
    t.a.assign(static_cast<size_t>(m) * (t.cols + 1), 0.0);
    t.obj.assign(t.cols + 1, 0.0);
    t.basis.assign(m, -1);

    int slack_at = n, art_at = n + n_slack;
    std::vector<int> art_col(m, -1);
    for (int r = 0; r < m; ++r) {
        double sign = cons[r].b < 0.0 ? -1.0 : 1.0;
        for (int j = 0; j < n; ++j) t.at(r, j) = sign * cons[r].a[j];
        t.at(r, t.cols) = sign * cons[r].b;
        Sense s = cons[r].sense;
        if (sign < 0.0) {
            if (s == Sense::le) s = Sense::ge;
            else if (s == Sense::ge) s = Sense::le;
        }
        if (s == Sense::le) {
            t.at(r, slack_at) = 1.0;
            t.basis[r] = slack_at++;
        } else {
            if (s == Sense::ge) t.at(r, slack_at++) = -1.0;
            t.at(r, art_at) = 1.0;
            t.basis[r] = art_at;
            art_col[r] = art_at++;
        }
    }

    long pivots = 0;

    // Phase 1: minimize the sum of artificials (price out basic artificials).
    for (int c = 0; c <= t.cols; ++c) t.obj[c] = 0.0;
    for (int j = n + n_slack; j < t.cols; ++j) t.obj[j] = 1.0;
    for (int r = 0; r < m; ++r)
        if (art_col[r] >= 0)
            for (int c = 0; c <= t.cols; ++c) t.obj[c] -= t.at(r, c);
    if (n_art > 0) {
        if (t.run(pivots) != Status::optimal)
            throw Error("lp: phase 1 unbounded");
        if (-t.obj[t.cols] > kFeasTol) return {Status::infeasible, {}, 0.0};
        // Pivot remaining artificials out of the basis, or drop their rows.
        for (int r = 0; r < m; ++r) {
            if (t.basis[r] < n + n_slack) continue;
            int pc = -1;
            for (int c = 0; c < n + n_slack; ++c)
                if (std::abs(t.at(r, c)) > 1e-9) {
                    pc = c;
                    break;
                }
            if (pc >= 0) {
                t.pivot(r, pc);
            } else {
                for (int c = 0; c <= t.cols; ++c) t.at(r, c) = 0.0;  // redundant row
                t.basis[r] = -1;
            }
        }
    }

    // Phase 2: block artificial columns, install the real objective.
    for (int r = 0; r < m; ++r)
        for (int j = n + n_slack; j < t.cols; ++j) t.at(r, j) = 0.0;
    for (int c = 0; c <= t.cols; ++c) t.obj[c] = 0.0;
    for (int j = 0; j < n; ++j) t.obj[j] = c[j];
    for (int r = 0; r < m; ++r) {
        int b = t.basis[r];
        if (b >= 0 && b < n && c[b] != 0.0)
            for (int col = 0; col <= t.cols; ++col) t.obj[col] -= c[b] * t.at(r, col);
    }
    Status st = t.run(pivots);
    if (st == Status::unbounded) return {Status::unbounded, {}, 0.0};

    Solution sol;
    sol.status = Status::optimal;
    sol.x.assign(n, 0.0);
    for (int r = 0; r < m; ++r)
        if (t.basis[r] >= 0 && t.basis[r] < n) sol.x[t.basis[r]] = t.at(r, t.cols);
    sol.objective = 0.0;
    for (int j = 0; j < n; ++j) sol.objective += c[j] * sol.x[j];
    return sol;
}

Solution solve_max(const std::vector<double>& c, const std::vector<Constraint>& cons, int n) {
    std::vector<double> neg(c);
    for (double& v : neg) v = -v;
    Solution s = solve_min(neg, cons, n);
    s.objective = -s.objective;
    return s;
}

bool feasible(const std::vector<Constraint>& cons, int n) {
    std::vector<double> zero(n, 0.0);
    return solve_min(zero, cons, n).status == Status::optimal;
}

}  // namespace sdc::lp
