#include "sdc/ldr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace sdc {

namespace {

constexpr double kClip = 1e-12;
constexpr double kSweepTol = 1e-12;
constexpr int kSweepCap = 10000;
constexpr int kDirichletStarts = 8;
constexpr std::uint64_t kStartSeed = 0x5dc0ffee1dbeefull;

void check_simplex(const ProbVector& y, const char* who) {
    double sum = 0.0;
    for (double v : y) {
        if (!(v >= 0.0)) throw SpecError(std::string(who) + ": negative entry");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw SpecError(std::string(who) + ": entries do not sum to 1");
}

// sum_j y_j log(u_j/(Pu)_j); u strictly positive, scale-invariant.
double inner_objective(const TransitionModel& m, const ProbVector& y,
                       const std::vector<double>& u, std::vector<double>& pu) {
    const int s = m.state_count();
    for (int j = 0; j < s; ++j) {
        double acc = 0.0;
        for (int l = 0; l < s; ++l) acc += m.rows[j][l] * u[l];
        pu[j] = acc;
    }
    double val = 0.0;
    for (int j = 0; j < s; ++j)
        if (y[j] > 0.0) val += y[j] * (std::log(u[j]) - std::log(pu[j]));
    return val;
}

// Ascent from one start point; returns the best objective seen.
double ascend(const TransitionModel& m, const ProbVector& y, std::vector<double>& u) {
    const int s = m.state_count();
    std::vector<double> pu(s);
    double best = inner_objective(m, y, u, pu);
    for (int sweep = 0; sweep < kSweepCap; ++sweep) {
        for (int l = 0; l < s; ++l) {
            // 1-D concave maximization over t = log u_l with the rest fixed:
            //   y_l t - sum_j y_j log(c_j + p_jl e^t),  c_j = (Pu)_j - p_jl u_l.
            double lo = std::log(kClip), hi = std::log(1.0 / kClip);
            auto deriv = [&](double t) {
                double e = std::exp(t);
                double d = y[l];
                for (int j = 0; j < s; ++j) {
                    double pj = m.rows[j][l];
                    if (pj == 0.0 || y[j] == 0.0) continue;
                    double cj = pu[j] - pj * u[l];
                    if (cj < 0.0) cj = 0.0;
                    d -= y[j] * (pj * e) / (cj + pj * e);
                }
                return d;
            };
            double t;
            if (deriv(lo) <= 0.0) {
                t = lo;
            } else if (deriv(hi) >= 0.0) {
                t = hi;
            } else {
                for (int it = 0; it < 100; ++it) {
                    t = 0.5 * (lo + hi);
                    (deriv(t) > 0.0 ? lo : hi) = t;
                }
                t = 0.5 * (lo + hi);
            }
            double unew = std::exp(t);
            for (int j = 0; j < s; ++j) pu[j] += m.rows[j][l] * (unew - u[l]);
            u[l] = unew;
        }
        // Renormalize (the objective is scale-invariant) and re-clip.
        double sum = 0.0;
        for (double v : u) sum += v;
        for (double& v : u) v = std::max(v / sum, kClip);
        double val = inner_objective(m, y, u, pu);
        if (val - best < kSweepTol) {
            best = std::max(best, val);
            break;
        }
        best = val;
    }
    return best;
}

}  // namespace

double entropy(const ProbVector& y) {
    double h = 0.0;
    for (double v : y)
        if (v > 0.0) h -= v * std::log(v);
    return h;
}

double relative_entropy(const ProbVector& y, const ProbVector& p) {
    if (y.size() != p.size()) throw SpecError("relative_entropy: dimension mismatch");
    double d = 0.0;
    for (size_t i = 0; i < y.size(); ++i) {
        if (y[i] == 0.0) continue;
        if (p[i] == 0.0) return std::numeric_limits<double>::infinity();
        d += y[i] * std::log(y[i] / p[i]);
    }
    return std::max(d, 0.0);
}

double binary_k_root(double a, double b, double y0) {
    if (!(a > 0.0) || !(a < 1.0) || !(b > 0.0) || !(b < 1.0))
        throw DomainError("binary_k_root: flip probabilities must lie in (0,1)");
    if (!(y0 > 0.0) || !(y0 < 1.0))
        throw DomainError("binary_k_root: y0 must be interior for the quadratic");
    const double y1 = 1.0 - y0;
    const double qa = y0 * a * (1.0 - b);
    const double qb = a * b * (y0 - y1);
    const double qc = -y1 * b * (1.0 - a);
    const double disc = qb * qb - 4.0 * qa * qc;
    const double sq = std::sqrt(disc);
    // Positive root, cancellation-free branch.
    return qb <= 0.0 ? (-qb + sq) / (2.0 * qa) : (-2.0 * qc) / (qb + sq);
}

double m_star_binary(double a, double b, double y0) {
    if (!(a > 0.0) || !(a < 1.0) || !(b > 0.0) || !(b < 1.0))
        throw DomainError("m_star_binary: flip probabilities must lie in (0,1)");
    if (!(y0 >= 0.0) || !(y0 <= 1.0)) throw DomainError("m_star_binary: y0 outside [0,1]");
    // Endpoint branches keep the limits exact.
    if (y0 < 1e-10) return -std::log1p(-b);
    if (1.0 - y0 < 1e-10) return -std::log1p(-a);
    const double y1 = 1.0 - y0;
    const double k = binary_k_root(a, b, y0);
    return -y0 * std::log1p(a * (k - 1.0)) - y1 * std::log1p(b * (1.0 / k - 1.0));
}

MStarResult m_star_full(const TransitionModel& storage, const ProbVector& y) {
    require_valid(storage);
    const int s = storage.state_count();
    if (static_cast<int>(y.size()) != s) throw SpecError("m_star: dimension mismatch");
    check_simplex(y, "m_star");
    if (s == 2) {
        const double a = storage.rows[0][1], b = storage.rows[1][0];
        MStarResult r;
        r.value = m_star_binary(a, b, y[0]);
        double k;
        if (y[0] < 1e-10) k = 1.0 / kClip;
        else if (y[1] < 1e-10) k = kClip;
        else k = binary_k_root(a, b, y[0]);
        r.maximizer = {1.0 / (1.0 + k), k / (1.0 + k)};
        return r;
    }
    return m_star_numeric_full(storage, y);
}

double m_star(const TransitionModel& storage, const ProbVector& y) {
    return m_star_full(storage, y).value;
}

MStarResult m_star_numeric_full(const TransitionModel& storage, const ProbVector& y) {
    require_valid(storage);
    const int s = storage.state_count();
    if (static_cast<int>(y.size()) != s) throw SpecError("m_star_numeric: dimension mismatch");
    check_simplex(y, "m_star_numeric");

    std::mt19937_64 rng(kStartSeed);
    auto u01 = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

    MStarResult best;
    best.value = -std::numeric_limits<double>::infinity();
    for (int start = 0; start <= kDirichletStarts; ++start) {
        std::vector<double> u(s);
        if (start == 0) {
            std::fill(u.begin(), u.end(), 1.0 / s);
        } else {
            double sum = 0.0;
            for (double& v : u) {
                v = -std::log(std::max(u01(), 1e-300));  // Exp(1) draws -> Dirichlet(1)
                sum += v;
            }
            for (double& v : u) v = std::max(v / sum, kClip);
        }
        double val = ascend(storage, y, u);
        if (val > best.value) {
            best.value = val;
            best.maximizer = u;
        }
    }
    best.value = std::max(best.value, 0.0);  // sup over u includes u = stationary-like points
    return best;
}

double m_star_numeric(const TransitionModel& storage, const ProbVector& y) {
    return m_star_numeric_full(storage, y).value;
}

MStarResult m_star_ascent_from(const TransitionModel& storage, const ProbVector& y,
                               const ProbVector& u_start) {
    const int s = storage.state_count();
    if (static_cast<int>(y.size()) != s || static_cast<int>(u_start.size()) != s)
        throw SpecError("m_star_ascent_from: dimension mismatch");
    std::vector<double> u(s);
    double sum = 0.0;
    for (int j = 0; j < s; ++j) sum += std::max(u_start[j], kClip);
    for (int j = 0; j < s; ++j) u[j] = std::max(std::max(u_start[j], kClip) / sum, kClip);
    MStarResult r;
    r.value = ascend(storage, y, u);
    r.maximizer = std::move(u);
    return r;
}

ProbVector second_marginal(const ProbVector& z, int states) {
    if (static_cast<int>(z.size()) != states * states)
        throw SpecError("second_marginal: dimension mismatch");
    ProbVector m(states, 0.0);
    for (int i = 0; i < states; ++i)
        for (int j = 0; j < states; ++j) m[j] += z[static_cast<size_t>(i) * states + j];
    return m;
}

double pi_star(const TransitionModel& storage, const ProbVector& z) {
    require_valid(storage);
    const int s = storage.state_count();
    check_simplex(z, "pi_star");
    // The objective sum_ij z_ij log(u_j/(Pu)_j) sees only the second-index
    // marginal of z, so the pair rate collapses to M*.
    return m_star(storage, second_marginal(z, s));
}

}  // namespace sdc
