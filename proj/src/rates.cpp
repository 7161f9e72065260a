#include "sdc/rates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "sdc/errors.hpp"
#include "sdc/ldr.hpp"

namespace sdc {

namespace {

constexpr double kFwGapTol = 1e-9;
constexpr int kFwMaxIters = 100000;
constexpr double kActiveTol = 1e-6;  // row counts as active for polish / KKT
constexpr double kZeroTol = 1e-9;    // coordinate counts as at its bound
constexpr double kTinyLog = 1e-300;  // floor inside log()

double neg_inf() { return -std::numeric_limits<double>::infinity(); }

int pow_int(int base, int exp) {
    int r = 1;
    while (exp-- > 0) r *= base;
    return r;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

bool first_order_kind(const TransitionModel& m) { return m.kind != ChainKind::markov_order_k; }

// Linear image of an arbitrary vector under the objective-marginal map.
ProbVector apply_marginal(const ConstrainedSet& set, const ProbVector& x) {
    if (set.coords == SetCoords::marginal) return x;
    const int s = set.states;
    const int div = pow_int(set.alphabet_size, set.block_k - 1);
    ProbVector y(set.alphabet_size, 0.0);
    for (int u = 0; u < s; ++u) {
        double row = 0.0;
        for (int v = 0; v < s; ++v) row += x[u * s + v];
        y[u / div] += row;
    }
    return y;
}

// Row with the coefficients of y_j(x).
lp::Constraint marginal_row(const ConstrainedSet& set, int j, double rhs, lp::Sense sense) {
    lp::Constraint c;
    c.a.assign(set.dimension, 0.0);
    c.sense = sense;
    c.b = rhs;
    if (set.coords == SetCoords::marginal) {
        c.a[j] = 1.0;
        return c;
    }
    const int s = set.states;
    const int div = pow_int(set.alphabet_size, set.block_k - 1);
    for (int u = 0; u < s; ++u)
        if (u / div == j)
            for (int v = 0; v < s; ++v) c.a[u * s + v] = 1.0;
    return c;
}

// d/dx of H(y(x)); also returns y.
std::vector<double> entropy_gradient(const ConstrainedSet& set, const ProbVector& x,
                                     ProbVector& y_out) {
    y_out = apply_marginal(set, x);
    std::vector<double> gy(y_out.size());
    for (size_t i = 0; i < y_out.size(); ++i) gy[i] = -std::log(std::max(y_out[i], kTinyLog)) - 1.0;
    if (set.coords == SetCoords::marginal) return gy;
    const int s = set.states;
    const int div = pow_int(set.alphabet_size, set.block_k - 1);
    std::vector<double> g(set.dimension);
    for (int u = 0; u < s; ++u)
        for (int v = 0; v < s; ++v) g[u * s + v] = gy[u / div];
    return g;
}

// Full LP row set: named + structural + the simplex sum row (x >= 0 is
// implicit in the solver).
std::vector<lp::Constraint> lp_rows(const ConstrainedSet& set) {
    auto rows = materialize_constraints(set);
    lp::Constraint sum;
    sum.a.assign(set.dimension, 1.0);
    sum.sense = lp::Sense::eq;
    sum.b = 1.0;
    rows.push_back(std::move(sum));
    return rows;
}

// Information row over a dense transition matrix, plus forced-zero rows for
// entries the source cannot realize.
void append_info_rows(const std::vector<std::vector<double>>& p, double bound, double scale,
                      int dim, std::vector<lp::Constraint>& out) {
    const int s = static_cast<int>(p.size());
    lp::Constraint info;
    info.a.assign(dim, 0.0);
    info.sense = lp::Sense::le;
    info.b = bound;
    std::vector<int> zero_vars;
    for (int i = 0; i < s; ++i)
        for (int j = 0; j < s; ++j) {
            if (p[i][j] > 0.0)
                info.a[i * s + j] = -scale * std::log(p[i][j]);
            else
                zero_vars.push_back(i * s + j);
        }
    out.push_back(std::move(info));
    for (int var : zero_vars) {
        lp::Constraint z;
        z.a.assign(dim, 0.0);
        z.a[var] = 1.0;
        z.sense = lp::Sense::eq;
        z.b = 0.0;
        out.push_back(std::move(z));
    }
}

std::vector<std::vector<double>> mat_mul(const std::vector<std::vector<double>>& a,
                                         const std::vector<std::vector<double>>& b) {
    const int s = static_cast<int>(a.size());
    std::vector<std::vector<double>> c(s, std::vector<double>(s, 0.0));
    for (int i = 0; i < s; ++i)
        for (int k = 0; k < s; ++k) {
            const double aik = a[i][k];
            if (aik == 0.0) continue;
            for (int j = 0; j < s; ++j) c[i][j] += aik * b[k][j];
        }
    return c;
}

ConstrainedSet pair_set_common(const TransitionModel& source, lp::Constraint weight_row,
                               double eta, double eps) {
    const int l = source.alphabet_size;
    ConstrainedSet set;
    set.coords = SetCoords::pair;
    set.dimension = l * l;
    set.states = l;
    set.alphabet_size = l;
    set.block_k = 1;
    set.lifted = true;
    set.pair_consistency = true;
    weight_row.sense = lp::Sense::ge;
    weight_row.b = eta;
    append_info_rows(source.rows, entropy_rate(source) + eps, 1.0, set.dimension,
                     set.constraints);
    // Keep the named order info, weight, forced zeros.
    set.constraints.insert(set.constraints.begin() + 1, std::move(weight_row));
    return set;
}

// Small dense solve (partial pivoting); returns false on a singular system.
bool solve_dense(std::vector<std::vector<double>> a, std::vector<double> b,
                 std::vector<double>& x) {
    const int n = static_cast<int>(b.size());
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        if (std::abs(a[piv][col]) < 1e-300) return false;
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (int r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            if (f == 0.0) continue;
            for (int c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    x.assign(n, 0.0);
    for (int r = n - 1; r >= 0; --r) {
        double s = b[r];
        for (int c = r + 1; c < n; ++c) s -= a[r][c] * x[c];
        x[r] = s / a[r][r];
    }
    return true;
}

// Affine face {E x = e} from the rows active at x_hat: particular solution
// near x_hat plus a nullspace basis, via Gauss-Jordan elimination.
struct FaceBasis {
    ProbVector particular;
    std::vector<ProbVector> kernel;  // basis vectors, one per free column
};

bool face_basis(const std::vector<std::vector<double>>& e_rows, const std::vector<double>& e_rhs,
                const ProbVector& x_hat, FaceBasis& out) {
    const int n = static_cast<int>(x_hat.size());
    auto a = e_rows;
    auto b = e_rhs;
    const int m = static_cast<int>(a.size());
    std::vector<int> pivot_col;
    int r = 0;
    for (int c = 0; c < n && r < m; ++c) {
        int piv = r;
        for (int i = r + 1; i < m; ++i)
            if (std::abs(a[i][c]) > std::abs(a[piv][c])) piv = i;
        if (std::abs(a[piv][c]) < 1e-11) continue;
        std::swap(a[piv], a[r]);
        std::swap(b[piv], b[r]);
        const double d = a[r][c];
        for (int j = 0; j < n; ++j) a[r][j] /= d;
        b[r] /= d;
        for (int i = 0; i < m; ++i) {
            if (i == r || a[i][c] == 0.0) continue;
            const double f = a[i][c];
            for (int j = 0; j < n; ++j) a[i][j] -= f * a[r][j];
            b[i] -= f * b[r];
        }
        pivot_col.push_back(c);
        ++r;
    }
    for (int i = r; i < m; ++i)
        if (std::abs(b[i]) > 1e-7) return false;  // inconsistent active set
    std::vector<bool> is_pivot(n, false);
    for (int c : pivot_col) is_pivot[c] = true;
    // Particular solution: free coordinates keep their current values.
    out.particular.assign(n, 0.0);
    for (int c = 0; c < n; ++c)
        if (!is_pivot[c]) out.particular[c] = x_hat[c];
    for (int i = 0; i < r; ++i) {
        double s = b[i];
        for (int c = 0; c < n; ++c)
            if (!is_pivot[c]) s -= a[i][c] * out.particular[c];
        out.particular[pivot_col[i]] = s;
    }
    out.kernel.clear();
    for (int c = 0; c < n; ++c) {
        if (is_pivot[c]) continue;
        ProbVector k(n, 0.0);
        k[c] = 1.0;
        for (int i = 0; i < r; ++i) k[pivot_col[i]] = -a[i][c];
        out.kernel.push_back(std::move(k));
    }
    return true;
}

bool row_satisfied(const lp::Constraint& row, const ProbVector& x, double tol) {
    const double v = dot(row.a, x);
    switch (row.sense) {
        case lp::Sense::le: return v <= row.b + tol;
        case lp::Sense::ge: return v >= row.b - tol;
        case lp::Sense::eq: return std::abs(v - row.b) <= tol;
    }
    return false;
}

// Newton refinement of a Frank-Wolfe iterate on its active face: maximize
// H(y(x)) with the active rows held as equalities. Falls back silently when
// the face solve fails or leaves the polytope.
void polish_gamma_once(const ConstrainedSet& set, const std::vector<lp::Constraint>& rows,
                       ProbVector& x, double active_tol) {
    const int n = set.dimension;
    std::vector<std::vector<double>> e_rows;
    std::vector<double> e_rhs;
    for (const auto& row : rows) {
        const double v = dot(row.a, x);
        if (row.sense == lp::Sense::eq || std::abs(v - row.b) <= active_tol) {
            e_rows.push_back(row.a);
            e_rhs.push_back(row.b);
        }
    }
    for (int j = 0; j < n; ++j) {
        if (x[j] > std::max(kZeroTol, active_tol)) continue;
        std::vector<double> e(n, 0.0);
        e[j] = 1.0;
        e_rows.push_back(std::move(e));
        e_rhs.push_back(0.0);
    }
    FaceBasis face;
    if (!face_basis(e_rows, e_rhs, x, face)) return;
    const int q = static_cast<int>(face.kernel.size());
    ProbVector xw = face.particular;
    {
        ProbVector y0 = apply_marginal(set, xw);
        for (double v : y0)
            if (!(v > 0.0)) return;
    }
    if (q > 0) {
        std::vector<ProbVector> ak(q);
        for (int a = 0; a < q; ++a) ak[a] = apply_marginal(set, face.kernel[a]);
        std::vector<double> w(q, 0.0);
        for (int iter = 0; iter < 60; ++iter) {
            ProbVector y = apply_marginal(set, xw);
            std::vector<double> gy(y.size());
            for (size_t i = 0; i < y.size(); ++i) gy[i] = -std::log(y[i]) - 1.0;
            std::vector<double> gw(q, 0.0);
            double gnorm = 0.0;
            for (int a = 0; a < q; ++a) {
                gw[a] = dot(ak[a], gy);
                gnorm = std::max(gnorm, std::abs(gw[a]));
            }
            if (gnorm < 1e-12) break;
            // M = -Hessian + ridge, positive semidefinite.
            std::vector<std::vector<double>> m(q, std::vector<double>(q, 0.0));
            double diag_max = 0.0;
            for (int a = 0; a < q; ++a)
                for (int b2 = a; b2 < q; ++b2) {
                    double s = 0.0;
                    for (size_t i = 0; i < y.size(); ++i) s += ak[a][i] * ak[b2][i] / y[i];
                    m[a][b2] = m[b2][a] = s;
                    if (a == b2) diag_max = std::max(diag_max, s);
                }
            const double ridge = 1e-13 * (1.0 + diag_max);
            for (int a = 0; a < q; ++a) m[a][a] += ridge;
            std::vector<double> step;
            if (!solve_dense(m, gw, step)) break;
            const double h_now = entropy(y);
            double t = 1.0;
            bool moved = false;
            for (int halv = 0; halv < 50; ++halv, t *= 0.5) {
                ProbVector xt = xw;
                for (int a = 0; a < q; ++a)
                    for (int j = 0; j < n; ++j) xt[j] += t * step[a] * face.kernel[a][j];
                ProbVector yt = apply_marginal(set, xt);
                bool ok = true;
                for (double v : yt)
                    if (!(v > 1e-15)) ok = false;
                if (!ok || entropy(yt) < h_now - 1e-15) continue;
                xw = std::move(xt);
                for (int a = 0; a < q; ++a) w[a] += t * step[a];
                moved = true;
                break;
            }
            if (!moved) break;
        }
    }
    for (double v : xw)
        if (v < -kZeroTol) return;
    for (const auto& row : rows)
        if (!row_satisfied(row, xw, 1e-8)) return;
    const double before = entropy(apply_marginal(set, x));
    const double after = entropy(apply_marginal(set, xw));
    if (after + 1e-12 >= before) x = std::move(xw);
}

// Two passes: a tight activity tolerance, then a wider sweep that catches
// rows the flat entropy curvature near uniform leaves marginally slack at the
// Frank-Wolfe terminal point. Each pass keeps the prior point unless the
// refined one validates and does not regress.
void polish_gamma(const ConstrainedSet& set, const std::vector<lp::Constraint>& rows,
                  ProbVector& x) {
    polish_gamma_once(set, rows, x, kActiveTol);
    polish_gamma_once(set, rows, x, 1e-4);
}

// Active vertex set for the away-step Frank-Wolfe iteration.
struct VertexSet {
    std::vector<ProbVector> verts;
    std::vector<double> weights;

    int find_or_add(const ProbVector& v) {
        for (size_t i = 0; i < verts.size(); ++i) {
            double diff = 0.0;
            for (size_t j = 0; j < v.size(); ++j) diff = std::max(diff, std::abs(verts[i][j] - v[j]));
            if (diff <= 1e-12) return static_cast<int>(i);
        }
        verts.push_back(v);
        weights.push_back(0.0);
        return static_cast<int>(verts.size()) - 1;
    }

    void drop_negligible() {
        for (size_t i = verts.size(); i-- > 0;) {
            if (weights[i] > 1e-14) continue;
            verts.erase(verts.begin() + static_cast<long>(i));
            weights.erase(weights.begin() + static_cast<long>(i));
        }
        double sum = 0.0;
        for (double w : weights) sum += w;
        for (double& w : weights) w /= sum;
    }

    ProbVector combination(int n) const {
        ProbVector x(n, 0.0);
        for (size_t i = 0; i < verts.size(); ++i)
            for (int j = 0; j < n; ++j) x[j] += weights[i] * verts[i][j];
        return x;
    }
};

// Step length maximizing H(y + t dy) on [0, tmax]; the derivative is
// decreasing, so bisect on its sign.
double entropy_line_search(const ProbVector& y, const ProbVector& dy, double tmax) {
    auto deriv = [&](double t) {
        double d = 0.0;
        for (size_t j = 0; j < y.size(); ++j) {
            if (dy[j] == 0.0) continue;
            d += dy[j] * (-std::log(std::max(y[j] + t * dy[j], kTinyLog)) - 1.0);
        }
        return d;
    };
    if (deriv(tmax) >= 0.0) return tmax;
    if (deriv(0.0) <= 0.0) return 0.0;
    double lo = 0.0, hi = tmax;
    for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        (deriv(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

RateResult solve_gamma(const ConstrainedSet& set) {
    const int n = set.dimension;
    const auto rows = lp_rows(set);
    const std::vector<double> zero_obj(n, 0.0);
    RateResult out;
    out.v = std::log(static_cast<double>(set.alphabet_size));

    // Dichotomy fast path: is the uniform marginal reachable?
    {
        auto pinned = rows;
        for (int j = 0; j < set.alphabet_size; ++j)
            pinned.push_back(
                marginal_row(set, j, 1.0 / set.alphabet_size, lp::Sense::eq));
        auto sol = lp::solve_min(zero_obj, pinned, n);
        if (sol.status == lp::Status::optimal) {
            out.value = out.v;
            out.optimizer = std::move(sol.x);
            out.status = RateStatus::at_uniform;
            return out;
        }
    }
    auto sol0 = lp::solve_min(zero_obj, rows, n);
    if (sol0.status != lp::Status::optimal) {
        out.value = neg_inf();
        out.status = RateStatus::infeasible;
        return out;
    }

    VertexSet vs;
    vs.verts.push_back(sol0.x);
    vs.weights.push_back(1.0);
    ProbVector x = sol0.x;
    for (int iter = 0; iter < kFwMaxIters; ++iter) {
        ProbVector y;
        const auto g = entropy_gradient(set, x, y);
        auto lmo = lp::solve_max(g, rows, n);
        if (lmo.status != lp::Status::optimal) throw Error("entropy solver: oracle failed");
        const double gx = dot(g, x);
        const double gap_fw = dot(g, lmo.x) - gx;
        if (gap_fw < kFwGapTol) break;

        int away = 0;
        double g_away = std::numeric_limits<double>::infinity();
        for (size_t i = 0; i < vs.verts.size(); ++i) {
            const double gv = dot(g, vs.verts[i]);
            if (gv < g_away) {
                g_away = gv;
                away = static_cast<int>(i);
            }
        }
        const double gap_aw = gx - g_away;
        const bool use_away =
            gap_aw > gap_fw && vs.verts.size() > 1 && vs.weights[away] < 1.0 - 1e-14;

        ProbVector d(n);
        double tmax;
        if (use_away) {
            for (int j = 0; j < n; ++j) d[j] = x[j] - vs.verts[away][j];
            tmax = vs.weights[away] / (1.0 - vs.weights[away]);
        } else {
            for (int j = 0; j < n; ++j) d[j] = lmo.x[j] - x[j];
            tmax = 1.0;
        }
        const ProbVector dy = apply_marginal(set, d);
        const double t = entropy_line_search(y, dy, tmax);
        if (t <= 0.0) break;
        if (use_away) {
            for (double& w : vs.weights) w *= 1.0 + t;
            vs.weights[away] -= t;
        } else {
            const int si = vs.find_or_add(lmo.x);
            for (double& w : vs.weights) w *= 1.0 - t;
            vs.weights[si] += t;
        }
        vs.drop_negligible();
        x = vs.combination(n);
    }
    polish_gamma(set, rows, x);
    out.value = entropy(apply_marginal(set, x));
    out.optimizer = std::move(x);
    out.status = RateStatus::at_boundary;
    return out;
}

// Second-index (column) marginal of the pair/block variable, cleaned for use
// as a probability vector.
ProbVector column_marginal(const ProbVector& x, int s) {
    ProbVector m(s, 0.0);
    for (int u = 0; u < s; ++u)
        for (int v = 0; v < s; ++v) m[v] += x[u * s + v];
    double sum = 0.0;
    for (double& v : m) {
        v = std::max(v, 0.0);
        sum += v;
    }
    for (double& v : m) v /= sum;
    return m;
}

// Supporting coefficients c_j = log(u_j / (Pu)_j) of the inner maximizer;
// by the envelope argument they form a subgradient of M* at the marginal.
std::vector<double> inner_coefficients(const TransitionModel& storage, const ProbVector& u) {
    const int s = storage.state_count();
    std::vector<double> c(s);
    for (int j = 0; j < s; ++j) {
        double pu = 0.0;
        for (int l = 0; l < s; ++l) pu += storage.rows[j][l] * u[l];
        c[j] = std::log(std::max(u[j], kTinyLog)) - std::log(std::max(pu, kTinyLog));
    }
    return c;
}

struct PiEval {
    double value = 0.0;
    std::vector<double> coeffs;  // subgradient in marginal coordinates
};

PiEval eval_pi(const TransitionModel& storage, const ProbVector& m, ProbVector& warm) {
    MStarResult r = storage.state_count() == 2 ? m_star_full(storage, m)
                                               : m_star_ascent_from(storage, m, warm);
    warm = r.maximizer;
    PiEval e;
    e.value = std::max(r.value, 0.0);
    e.coeffs = inner_coefficients(storage, r.maximizer);
    return e;
}

RateResult solve_kappa_fw(const TransitionModel& storage, const ConstrainedSet& set) {
    const int n = set.dimension;
    const int s = set.states;
    const auto rows = lp_rows(set);
    const std::vector<double> zero_obj(n, 0.0);
    RateResult out;
    out.v = std::log(static_cast<double>(set.alphabet_size));

    auto sol0 = lp::solve_min(zero_obj, rows, n);
    if (sol0.status != lp::Status::optimal) {
        out.value = neg_inf();
        out.status = RateStatus::infeasible;
        return out;
    }
    VertexSet vs;
    vs.verts.push_back(sol0.x);
    vs.weights.push_back(1.0);
    ProbVector x = sol0.x;
    ProbVector warm(s, 1.0 / s);
    double best = std::numeric_limits<double>::infinity();
    int stalled = 0;
    for (int iter = 0; iter < kFwMaxIters; ++iter) {
        const ProbVector m = column_marginal(x, s);
        const PiEval at_x = eval_pi(storage, m, warm);
        if (at_x.value < best - 1e-13) {
            best = at_x.value;
            stalled = 0;
        } else if (++stalled > 200) {
            break;
        }
        std::vector<double> g(n);
        for (int u = 0; u < s; ++u)
            for (int v = 0; v < s; ++v) g[u * s + v] = at_x.coeffs[v];
        auto lmo = lp::solve_min(g, rows, n);
        if (lmo.status != lp::Status::optimal) throw Error("decay solver: oracle failed");
        const double gx = dot(g, x);
        const double gap_fw = gx - dot(g, lmo.x);  // bounds the suboptimality
        if (gap_fw < kFwGapTol) break;

        int away = 0;
        double g_away = -std::numeric_limits<double>::infinity();
        for (size_t i = 0; i < vs.verts.size(); ++i) {
            const double gv = dot(g, vs.verts[i]);
            if (gv > g_away) {
                g_away = gv;
                away = static_cast<int>(i);
            }
        }
        const double gap_aw = g_away - gx;
        const bool use_away =
            gap_aw > gap_fw && vs.verts.size() > 1 && vs.weights[away] < 1.0 - 1e-14;
        ProbVector d(n);
        double tmax;
        if (use_away) {
            for (int j = 0; j < n; ++j) d[j] = x[j] - vs.verts[away][j];
            tmax = vs.weights[away] / (1.0 - vs.weights[away]);
        } else {
            for (int j = 0; j < n; ++j) d[j] = lmo.x[j] - x[j];
            tmax = 1.0;
        }
        // Directional derivative t -> <subgradient(m + t dm), dm> is
        // nondecreasing; bisect for its zero.
        ProbVector dm(s, 0.0);
        for (int u = 0; u < s; ++u)
            for (int v = 0; v < s; ++v) dm[v] += d[u * s + v];
        auto deriv = [&](double t) {
            ProbVector mt(s);
            double sum = 0.0;
            for (int j = 0; j < s; ++j) {
                mt[j] = std::max(m[j] + t * dm[j], 0.0);
                sum += mt[j];
            }
            for (double& v : mt) v /= sum;
            const PiEval e = eval_pi(storage, mt, warm);
            double dd = 0.0;
            for (int j = 0; j < s; ++j) dd += dm[j] * e.coeffs[j];
            return dd;
        };
        double t;
        if (deriv(tmax) <= 0.0) {
            t = tmax;
        } else if (deriv(0.0) >= 0.0) {
            break;
        } else {
            double lo = 0.0, hi = tmax;
            for (int it2 = 0; it2 < 60; ++it2) {
                const double mid = 0.5 * (lo + hi);
                (deriv(mid) < 0.0 ? lo : hi) = mid;
            }
            t = 0.5 * (lo + hi);
        }
        if (t <= 0.0) break;
        if (use_away) {
            for (double& w : vs.weights) w *= 1.0 + t;
            vs.weights[away] -= t;
        } else {
            const int si = vs.find_or_add(lmo.x);
            for (double& w : vs.weights) w *= 1.0 - t;
            vs.weights[si] += t;
        }
        vs.drop_negligible();
        x = vs.combination(n);
    }
    const ProbVector m = column_marginal(x, s);
    const double val = std::max(m_star(storage, m), 0.0);
    out.value = -val;
    out.optimizer = std::move(x);
    out.status = RateStatus::optimal;
    return out;
}

void check_pair_set(const ConstrainedSet& set, const char* who) {
    if (set.coords == SetCoords::marginal)
        throw SpecError(std::string(who) + ": set must live in pair coordinates");
}

}  // namespace

ConstrainedSet build_set_B(const TransitionModel& source, const WeightSpec& weight, double eta,
                           double eps) {
    require_valid(source);
    if (!first_order_kind(source))
        throw SpecError("build_set_B: order-k sources take the block builder");
    if (weight.kind != WeightKind::additive)
        throw SpecError("build_set_B: weight must be one-digit additive");
    const int l = source.alphabet_size;
    lp::Constraint w;
    w.a.assign(l * l, 0.0);
    for (int i = 0; i < l; ++i)
        for (int j = 0; j < l; ++j) w.a[i * l + j] = weight.phi[i];
    return pair_set_common(source, std::move(w), eta, eps);
}

ConstrainedSet build_set_B_pair(const TransitionModel& source, const std::vector<double>& phi2,
                                double eta, double eps) {
    require_valid(source);
    if (!first_order_kind(source))
        throw SpecError("build_set_B_pair: order-k sources take the block builder");
    const int l = source.alphabet_size;
    if (static_cast<int>(phi2.size()) != l * l)
        throw SpecError("build_set_B_pair: need one coefficient per symbol pair");
    lp::Constraint w;
    w.a = phi2;
    return pair_set_common(source, std::move(w), eta, eps);
}

ConstrainedSet build_set_A(const TransitionModel& source, const WeightSpec& weight, double eta,
                           double eps) {
    ConstrainedSet set = build_set_B(source, weight, eta, eps);
    // The marginal definitions: named stationarity rows instead of the flag.
    set.pair_consistency = false;
    const int l = set.states;
    for (int i = 0; i < l; ++i) {
        lp::Constraint c;
        c.a.assign(set.dimension, 0.0);
        c.sense = lp::Sense::eq;
        c.b = 0.0;
        for (int j = 0; j < l; ++j) {
            c.a[i * l + j] += 1.0;
            c.a[j * l + i] -= 1.0;
        }
        set.constraints.push_back(std::move(c));
    }
    return set;
}

ConstrainedSet build_set_D(const TransitionModel& source, const WeightSpec& weight, double eta,
                           double eps) {
    require_valid(source);
    if (source.kind != ChainKind::iid && source.kind != ChainKind::uniform)
        throw SpecError("build_set_D: source must be iid");
    if (weight.kind != WeightKind::additive)
        throw SpecError("build_set_D: weight must be one-digit additive");
    const int l = source.alphabet_size;
    ConstrainedSet set;
    set.coords = SetCoords::marginal;
    set.dimension = l;
    set.states = l;
    set.alphabet_size = l;
    const ProbVector& p = source.rows[0];
    const double h = entropy_rate(source);
    lp::Constraint info;
    info.a.assign(l, 0.0);
    info.sense = lp::Sense::le;
    info.b = h + eps;
    std::vector<int> zero_vars;
    for (int j = 0; j < l; ++j) {
        if (p[j] > 0.0)
            info.a[j] = -std::log(p[j]);
        else
            zero_vars.push_back(j);
    }
    set.constraints.push_back(std::move(info));
    lp::Constraint w;
    w.a = weight.phi;
    w.sense = lp::Sense::ge;
    w.b = eta;
    set.constraints.push_back(std::move(w));
    for (int var : zero_vars) {
        lp::Constraint z;
        z.a.assign(l, 0.0);
        z.a[var] = 1.0;
        z.sense = lp::Sense::eq;
        z.b = 0.0;
        set.constraints.push_back(std::move(z));
    }
    return set;
}

ConstrainedSet build_set_Blk(const TransitionModel& source, const WeightSpec& weight, double eta,
                             double eps) {
    require_valid(source);
    if (weight.kind != WeightKind::additive_k)
        throw SpecError("build_set_Blk: weight must be k-digit additive");
    if (weight.k != source.order)
        throw SpecError("build_set_Blk: weight block size must match the source order");
    if (weight.alphabet_size != source.alphabet_size)
        throw SpecError("build_set_Blk: weight alphabet mismatch");
    const int k = weight.k;
    const int s = source.state_count();
    ConstrainedSet set;
    set.coords = SetCoords::block_pair;
    set.dimension = s * s;
    set.states = s;
    set.alphabet_size = source.alphabet_size;
    set.block_k = k;
    set.lifted = true;
    set.shift_consistency = true;
    // k-step transitions of the block chain.
    auto p = source.rows;
    for (int step = 1; step < k; ++step) p = mat_mul(p, source.rows);
    append_info_rows(p, entropy_rate(source) + eps, 1.0 / k, set.dimension, set.constraints);
    lp::Constraint w;
    w.a.assign(set.dimension, 0.0);
    w.sense = lp::Sense::ge;
    w.b = eta;
    for (int u = 0; u < s; ++u)
        for (int v = 0; v < s; ++v) w.a[u * s + v] = weight.phi[u];
    set.constraints.insert(set.constraints.begin() + 1, std::move(w));
    return set;
}

std::vector<lp::Constraint> materialize_constraints(const ConstrainedSet& set) {
    auto rows = set.constraints;
    const int s = set.states;
    if (set.pair_consistency) {
        for (int i = 0; i < s; ++i) {
            lp::Constraint c;
            c.a.assign(set.dimension, 0.0);
            c.sense = lp::Sense::eq;
            c.b = 0.0;
            for (int j = 0; j < s; ++j) {
                c.a[i * s + j] += 1.0;
                c.a[j * s + i] -= 1.0;
            }
            rows.push_back(std::move(c));
        }
    }
    if (set.shift_consistency) {
        // The pair variable, read as a measure on 2k-symbol windows, must be
        // invariant under a one-symbol shift: for every (2k-1)-word w, the
        // mass of windows starting with w equals the mass ending with w.
        const int l = set.alphabet_size;
        const int nw = pow_int(l, 2 * set.block_k - 1);
        for (int w = 0; w < nw; ++w) {
            lp::Constraint c;
            c.a.assign(set.dimension, 0.0);
            c.sense = lp::Sense::eq;
            c.b = 0.0;
            for (int a = 0; a < l; ++a) {
                c.a[w * l + a] += 1.0;   // window w·a
                c.a[a * nw + w] -= 1.0;  // window a·w
            }
            rows.push_back(std::move(c));
        }
    }
    return rows;
}

bool set_feasible(const ConstrainedSet& set) {
    return lp::feasible(lp_rows(set), set.dimension);
}

ProbVector objective_marginal(const ConstrainedSet& set, const ProbVector& x) {
    if (static_cast<int>(x.size()) != set.dimension)
        throw SpecError("objective_marginal: dimension mismatch");
    return apply_marginal(set, x);
}

RateResult gamma_max_entropy(const ConstrainedSet& set) { return solve_gamma(set); }

RateResult kappa_inf_rate(const TransitionModel& storage, const ConstrainedSet& set) {
    require_valid(storage);
    check_pair_set(set, "kappa_inf_rate");
    if (storage.kind == ChainKind::uniform && set.coords == SetCoords::pair) {
        if (storage.alphabet_size != set.states)
            throw SpecError("kappa_inf_rate: storage and set dimensions differ");
        // Uniform storage: Pi* = log l - H(marginal), so the infimum is the
        // entropy supremum shifted by -log l.
        RateResult g = gamma_max_entropy(set);
        if (g.status == RateStatus::infeasible) return g;
        g.value = g.value - g.v;
        return g;
    }
    if (storage.state_count() != set.states)
        throw SpecError("kappa_inf_rate: storage and set dimensions differ");
    if (set.states == 2 && set.coords == SetCoords::pair) {
        // Exact path: M* restricted to the feasible marginal interval is
        // convex with its zero at the stationary point, so the infimum sits
        // at the stationary point clamped into the interval.
        const int n = set.dimension;
        const auto rows = lp_rows(set);
        std::vector<double> c(n, 0.0);
        c[1] = c[3] = 1.0;  // mass of the second-index marginal at state 1
        auto lo_sol = lp::solve_min(c, rows, n);
        RateResult out;
        out.v = std::log(2.0);
        if (lo_sol.status != lp::Status::optimal) {
            out.value = neg_inf();
            out.status = RateStatus::infeasible;
            return out;
        }
        auto hi_sol = lp::solve_max(c, rows, n);
        const double lo = lo_sol.objective, hi = hi_sol.objective;
        const double alpha = storage.rows[0][1], beta = storage.rows[1][0];
        const double pi1 = stationary_distribution(storage)[1];
        if (pi1 >= lo && pi1 <= hi) {
            out.value = 0.0;  // the stationary pair measure is reachable
            auto pinned = rows;
            lp::Constraint pin;
            pin.a = c;
            pin.sense = lp::Sense::eq;
            pin.b = pi1;
            pinned.push_back(std::move(pin));
            auto sol = lp::solve_min(std::vector<double>(n, 0.0), pinned, n);
            out.optimizer = sol.status == lp::Status::optimal ? sol.x : lo_sol.x;
        } else if (pi1 < lo) {
            out.value = -std::max(m_star_binary(alpha, beta, 1.0 - lo), 0.0);
            out.optimizer = lo_sol.x;
        } else {
            out.value = -std::max(m_star_binary(alpha, beta, 1.0 - hi), 0.0);
            out.optimizer = hi_sol.x;
        }
        out.status = RateStatus::optimal;
        return out;
    }
    return solve_kappa_fw(storage, set);
}

RateResult kappa_inf_rate_numeric(const TransitionModel& storage, const ConstrainedSet& set) {
    require_valid(storage);
    check_pair_set(set, "kappa_inf_rate_numeric");
    if (storage.state_count() != set.states)
        throw SpecError("kappa_inf_rate_numeric: storage and set dimensions differ");
    return solve_kappa_fw(storage, set);
}

RateResult gamma_binary_interval(const TransitionModel& source, const WeightSpec& weight,
                                 double eta, double eps) {
    require_valid(source);
    if (source.state_count() != 2)
        throw SpecError("gamma_binary_interval: two-symbol sources only");
    if (weight.kind != WeightKind::additive)
        throw SpecError("gamma_binary_interval: weight must be one-digit additive");
    RateResult out;
    out.v = std::log(2.0);
    double lo = 0.0, hi = 1.0;
    bool empty = false;
    if (source.kind == ChainKind::iid || source.kind == ChainKind::uniform) {
        // Closed form: both constraints are half-lines in u = y_1.
        const double phi0 = weight.phi[0], phi1 = weight.phi[1];
        const double coef_w = phi1 - phi0, rhs_w = eta - phi0;
        if (coef_w > 0.0)
            lo = std::max(lo, rhs_w / coef_w);
        else if (coef_w < 0.0)
            hi = std::min(hi, rhs_w / coef_w);
        else if (rhs_w > 0.0)
            empty = true;
        const double p0 = source.rows[0][0], p1 = source.rows[0][1];
        const double coef_i = std::log(p0) - std::log(p1);
        const double rhs_i = entropy_rate(source) + eps + std::log(p0);
        if (coef_i > 0.0)
            hi = std::min(hi, rhs_i / coef_i);
        else if (coef_i < 0.0)
            lo = std::max(lo, rhs_i / coef_i);
        else if (rhs_i < 0.0)
            empty = true;
        if (lo > hi) empty = true;
    } else {
        const ConstrainedSet set = build_set_B(source, weight, eta, eps);
        const auto rows = lp_rows(set);
        std::vector<double> c(set.dimension, 0.0);
        c[2] = c[3] = 1.0;  // row-marginal mass at state 1
        auto lo_sol = lp::solve_min(c, rows, set.dimension);
        if (lo_sol.status != lp::Status::optimal) {
            empty = true;
        } else {
            lo = lo_sol.objective;
            hi = lp::solve_max(c, rows, set.dimension).objective;
        }
    }
    if (empty) {
        out.value = neg_inf();
        out.status = RateStatus::infeasible;
        return out;
    }
    // Entropy peaks at 1/2; outside the interval the nearest endpoint wins
    // (on an exact tie both give the same entropy; take the smaller u).
    if (lo <= 0.5 && 0.5 <= hi) {
        out.value = std::log(2.0);
        out.optimizer = {0.5, 0.5};
        out.status = RateStatus::at_uniform;
        return out;
    }
    const double u = 0.5 < lo ? lo : hi;
    out.value = entropy({1.0 - u, u});
    out.optimizer = {1.0 - u, u};
    out.status = RateStatus::at_boundary;
    return out;
}

RateResult gamma_exponent(const TransitionModel& source, const WeightSpec& weight, double eta,
                          double eps) {
    if (weight.kind == WeightKind::multiplicative)
        return iota_multiplicative(source, weight, eta, eps);
    ConstrainedSet set;
    if (weight.kind == WeightKind::additive_k)
        set = build_set_Blk(source, weight, eta, eps);
    else if (source.kind == ChainKind::iid || source.kind == ChainKind::uniform)
        set = build_set_D(source, weight, eta, eps);
    else
        set = build_set_A(source, weight, eta, eps);
    return gamma_max_entropy(set);
}

RateResult iota_multiplicative(const TransitionModel& source, const WeightSpec& psi, double eta,
                               double eps) {
    if (psi.kind != WeightKind::multiplicative)
        throw SpecError("iota_multiplicative: multiplicative weight required");
    for (double v : psi.psi)
        if (!(v > 0.0)) throw SpecError("iota_multiplicative: psi must be strictly positive");
    return gamma_exponent(source, additive_weight(effective_phi(psi)), eta, eps);
}

double volume_exponent(const RateResult& kappa, double v) {
    if (kappa.status == RateStatus::infeasible || std::isinf(kappa.value)) return neg_inf();
    return v + kappa.value;
}

double kkt_residual(const ConstrainedSet& set, const ProbVector& x) {
    if (static_cast<int>(x.size()) != set.dimension)
        throw SpecError("kkt_residual: dimension mismatch");
    const int n = set.dimension;
    const auto rows = lp_rows(set);
    ProbVector y;
    auto g = entropy_gradient(set, x, y);
    double scale = 1.0;
    for (double v : g) scale = std::max(scale, std::abs(v));
    for (double& v : g) v /= scale;

    // Columns: multipliers for active <= rows (and negated >= rows), split
    // free multipliers for equality rows, bound multipliers for coordinates
    // at zero, then the residual bound t. Stationarity within t holds
    // coordinatewise: |grad - sum(multiplier * normal)| <= t.
    std::vector<std::vector<double>> normals;
    std::vector<bool> free_sign;
    for (const auto& row : rows) {
        const double v = dot(row.a, x);
        if (row.sense == lp::Sense::eq) {
            normals.push_back(row.a);
            free_sign.push_back(true);
        } else if (std::abs(v - row.b) <= kActiveTol) {
            auto a = row.a;
            if (row.sense == lp::Sense::ge)
                for (double& e : a) e = -e;
            normals.push_back(std::move(a));
            free_sign.push_back(false);
        }
    }
    std::vector<int> frozen;
    for (int j = 0; j < n; ++j)
        if (x[j] <= kZeroTol) frozen.push_back(j);

    int cols = 0;
    std::vector<std::pair<int, int>> col_map;  // (normal index, sign) per column
    for (size_t i = 0; i < normals.size(); ++i) {
        col_map.emplace_back(static_cast<int>(i), +1);
        ++cols;
        if (free_sign[i]) {
            col_map.emplace_back(static_cast<int>(i), -1);
            ++cols;
        }
    }
    const int nu_base = cols;
    cols += static_cast<int>(frozen.size());
    const int t_col = cols;
    ++cols;

    std::vector<lp::Constraint> lprows;
    for (int c = 0; c < n; ++c) {
        lp::Constraint up, down;  // expr - t <= g_c and -expr - t <= -g_c
        up.a.assign(cols, 0.0);
        down.a.assign(cols, 0.0);
        for (int col = 0; col < nu_base; ++col) {
            const double coef = col_map[col].second * normals[col_map[col].first][c];
            up.a[col] = coef;
            down.a[col] = -coef;
        }
        for (size_t f = 0; f < frozen.size(); ++f) {
            if (frozen[f] != c) continue;
            up.a[nu_base + static_cast<int>(f)] = -1.0;
            down.a[nu_base + static_cast<int>(f)] = 1.0;
        }
        up.a[t_col] = -1.0;
        down.a[t_col] = -1.0;
        up.sense = down.sense = lp::Sense::le;
        up.b = g[c];
        down.b = -g[c];
        lprows.push_back(std::move(up));
        lprows.push_back(std::move(down));
    }
    std::vector<double> obj(cols, 0.0);
    obj[t_col] = 1.0;
    auto sol = lp::solve_min(obj, lprows, cols);
    if (sol.status != lp::Status::optimal) throw Error("kkt_residual: certificate LP failed");
    return sol.objective;
}

}  // namespace sdc
