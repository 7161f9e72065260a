#include "sdc/markov.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <limits>
#include <numeric>
#include <random>

namespace sdc {

namespace {

constexpr double kSumTol = 1e-12;
constexpr double kPowerTol = 1e-13;
constexpr double kResidualTol = 1e-12;
constexpr int kPowerCap = 1000000;

long long ipow(int base, int exp) {
    long long r = 1;
    for (int i = 0; i < exp; ++i) r *= base;
    return r;
}

double uniform01(std::uint64_t bits) {
    // 53-bit mantissa mapping; keeps sampling identical across platforms.
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

int draw(const double* p, int n, double r) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        acc += p[i];
        if (r < acc) return i;
    }
    // r landed in the rounding slack past the last positive entry.
    for (int i = n - 1; i >= 0; --i)
        if (p[i] > 0.0) return i;
    return n - 1;
}

bool rows_stochastic(const TransitionModel& m, std::string& detail) {
    const int s = m.state_count();
    if (m.alphabet_size < 2) {
        detail = "row-stochasticity: alphabet size must be at least 2";
        return false;
    }
    if (static_cast<int>(m.rows.size()) != s) {
        detail = "row-stochasticity: wrong row count";
        return false;
    }
    for (int i = 0; i < s; ++i) {
        if (static_cast<int>(m.rows[i].size()) != s) {
            detail = "row-stochasticity: wrong row length";
            return false;
        }
        double sum = 0.0;
        for (double v : m.rows[i]) {
            if (!(v >= 0.0) || v > 1.0) {
                detail = "row-stochasticity: entry outside [0,1]";
                return false;
            }
            sum += v;
        }
        if (std::abs(sum - 1.0) > kSumTol) {
            detail = "row-stochasticity: row sum differs from 1";
            return false;
        }
    }
    if (static_cast<int>(m.initial.size()) != s) {
        detail = "row-stochasticity: initial distribution has wrong length";
        return false;
    }
    double isum = 0.0;
    for (double v : m.initial) {
        if (!(v >= 0.0) || v > 1.0) {
            detail = "row-stochasticity: initial entry outside [0,1]";
            return false;
        }
        isum += v;
    }
    if (std::abs(isum - 1.0) > kSumTol) {
        detail = "row-stochasticity: initial distribution sum differs from 1";
        return false;
    }
    return true;
}

bool kind_consistent(const TransitionModel& m, std::string& detail) {
    const int l = m.alphabet_size;
    if (m.kind != ChainKind::markov_order_k && m.order != 1) {
        detail = "kind-consistency: first-order kinds must have order 1";
        return false;
    }
    switch (m.kind) {
        case ChainKind::markov:
            return true;
        case ChainKind::iid:
            for (const auto& row : m.rows)
                if (row != m.rows[0]) {
                    detail = "kind-consistency: iid rows must be identical";
                    return false;
                }
            return true;
        case ChainKind::uniform:
            for (const auto& row : m.rows)
                for (double v : row)
                    if (v != 1.0 / l) {
                        detail = "kind-consistency: uniform entries must equal 1/l";
                        return false;
                    }
            return true;
        case ChainKind::markov_order_k: {
            if (m.order < 1) {
                detail = "kind-consistency: order must be at least 1";
                return false;
            }
            const int s = m.state_count();
            const long long tail = ipow(l, m.order - 1);
            for (int u = 0; u < s; ++u) {
                const long long base = (u % tail) * l;
                for (int v = 0; v < s; ++v) {
                    if (m.rows[u][v] > 0.0 && (v < base || v >= base + l)) {
                        detail = "kind-consistency: shift-consistency violated "
                                 "(positive mass off shift successors)";
                        return false;
                    }
                }
            }
            return true;
        }
    }
    detail = "kind-consistency: unknown kind";
    return false;
}

// Support digraph reachability from state 0 (forward or reversed edges).
std::vector<int> bfs_levels(const TransitionModel& m, bool reversed) {
    const int s = m.state_count();
    std::vector<int> level(s, -1);
    std::deque<int> queue{0};
    level[0] = 0;
    while (!queue.empty()) {
        int u = queue.front();
        queue.pop_front();
        for (int v = 0; v < s; ++v) {
            double p = reversed ? m.rows[v][u] : m.rows[u][v];
            if (p > 0.0 && level[v] < 0) {
                level[v] = level[u] + 1;
                queue.push_back(v);
            }
        }
    }
    return level;
}

ProbVector stationary_gaussian(const TransitionModel& m) {
    const int s = m.state_count();
    // Balance equations for columns 0..s-2 plus the normalization row.
    std::vector<std::vector<double>> a(s, std::vector<double>(s + 1, 0.0));
    for (int j = 0; j + 1 < s; ++j) {
        for (int i = 0; i < s; ++i) a[j][i] = m.rows[i][j];
        a[j][j] -= 1.0;
        a[j][s] = 0.0;
    }
    for (int i = 0; i < s; ++i) a[s - 1][i] = 1.0;
    a[s - 1][s] = 1.0;

    for (int col = 0; col < s; ++col) {
        int piv = col;
        for (int r = col + 1; r < s; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        std::swap(a[col], a[piv]);
        if (std::abs(a[col][col]) < 1e-300)
            throw StructuralError("stationary distribution: singular balance system");
        for (int r = 0; r < s; ++r) {
            if (r == col) continue;
            double f = a[r][col] / a[col][col];
            if (f == 0.0) continue;
            for (int c = col; c <= s; ++c) a[r][c] -= f * a[col][c];
        }
    }
    ProbVector pi(s);
    double sum = 0.0;
    for (int i = 0; i < s; ++i) {
        pi[i] = a[i][s] / a[i][i];
        if (pi[i] < 0.0) pi[i] = 0.0;
        sum += pi[i];
    }
    for (double& v : pi) v /= sum;
    return pi;
}

double residual_inf(const TransitionModel& m, const ProbVector& pi) {
    const int s = m.state_count();
    double worst = 0.0;
    for (int j = 0; j < s; ++j) {
        double acc = 0.0;
        for (int i = 0; i < s; ++i) acc += pi[i] * m.rows[i][j];
        worst = std::max(worst, std::abs(acc - pi[j]));
    }
    return worst;
}

}  // namespace

int TransitionModel::state_count() const {
    return kind == ChainKind::markov_order_k
               ? static_cast<int>(ipow(alphabet_size, order))
               : alphabet_size;
}

TransitionModel make_markov(std::vector<std::vector<double>> rows, ProbVector initial) {
    TransitionModel m;
    m.alphabet_size = static_cast<int>(rows.size());
    m.kind = ChainKind::markov;
    m.rows = std::move(rows);
    if (initial.empty()) {
        m.initial.assign(m.state_count(), 1.0 / m.state_count());
        m.initial = stationary_distribution(m);
    } else {
        m.initial = std::move(initial);
    }
    return m;
}

TransitionModel make_iid(ProbVector p) {
    TransitionModel m;
    m.alphabet_size = static_cast<int>(p.size());
    m.kind = ChainKind::iid;
    m.rows.assign(m.alphabet_size, p);
    m.initial = std::move(p);
    return m;
}

TransitionModel make_uniform(int alphabet_size) {
    TransitionModel m;
    m.alphabet_size = alphabet_size;
    m.kind = ChainKind::uniform;
    m.rows.assign(alphabet_size, std::vector<double>(alphabet_size, 1.0 / alphabet_size));
    m.initial.assign(alphabet_size, 1.0 / alphabet_size);
    return m;
}

TransitionModel make_binary(double a, double b, ProbVector initial) {
    if (!(a > 0.0) || !(a < 1.0) || !(b > 0.0) || !(b < 1.0))
        throw DomainError("make_binary: flip probabilities must lie in (0,1)");
    std::vector<std::vector<double>> rows{{1.0 - a, a}, {b, 1.0 - b}};
    if (initial.empty()) initial = {b / (a + b), a / (a + b)};
    TransitionModel m;
    m.alphabet_size = 2;
    m.kind = ChainKind::markov;
    m.rows = std::move(rows);
    m.initial = std::move(initial);
    return m;
}

ValidationReport validate(const TransitionModel& m) {
    ValidationReport r;
    r.row_stochastic = rows_stochastic(m, r.detail);
    if (!r.row_stochastic) return r;
    r.kind_consistent = kind_consistent(m, r.detail);
    if (!r.kind_consistent) return r;

    auto fwd = bfs_levels(m, false);
    auto bwd = bfs_levels(m, true);
    r.irreducible = std::find(fwd.begin(), fwd.end(), -1) == fwd.end() &&
                    std::find(bwd.begin(), bwd.end(), -1) == bwd.end();
    if (!r.irreducible) {
        r.detail = "irreducibility: support digraph is not strongly connected";
        return r;
    }

    // Period = gcd of level[u]+1-level[v] over support edges.
    const int s = m.state_count();
    long long g = 0;
    for (int u = 0; u < s; ++u)
        for (int v = 0; v < s; ++v)
            if (m.rows[u][v] > 0.0)
                g = std::gcd(g, static_cast<long long>(std::abs(fwd[u] + 1 - fwd[v])));
    r.aperiodic = (g == 1);
    if (!r.aperiodic) r.detail = "aperiodicity: chain period exceeds 1";
    return r;
}

void require_valid(const TransitionModel& m) {
    ValidationReport r = validate(m);
    if (!r.ok()) throw StructuralError(r.detail);
}

ProbVector stationary_distribution(const TransitionModel& m) {
    require_valid(m);
    const int s = m.state_count();

    ProbVector v(s, 1.0 / s), next(s), cesaro(s, 0.0);
    long long sweeps = 0;
    for (int it = 0; it < kPowerCap; ++it) {
        for (int j = 0; j < s; ++j) {
            double acc = 0.0;
            for (int i = 0; i < s; ++i) acc += v[i] * m.rows[i][j];
            next[j] = acc;
        }
        double sum = std::accumulate(next.begin(), next.end(), 0.0);
        for (double& x : next) x /= sum;
        double diff = 0.0;
        for (int j = 0; j < s; ++j) {
            diff = std::max(diff, std::abs(next[j] - v[j]));
            cesaro[j] += next[j];
        }
        ++sweeps;
        v.swap(next);
        if (diff <= kPowerTol) break;
    }
    if (residual_inf(m, v) > kResidualTol) {
        // Periodic-leaning spectra: try the Cesaro average, then exact solve.
        for (double& x : cesaro) x /= static_cast<double>(sweeps);
        if (residual_inf(m, cesaro) <= kResidualTol) {
            v = cesaro;
        } else {
            v = stationary_gaussian(m);
            if (residual_inf(m, v) > kResidualTol)
                throw StructuralError("stationary distribution: residual above 1e-12");
        }
    }
    for (double x : v)
        if (!(x > 0.0))
            throw StructuralError("stationary distribution: nonpositive entry");
    return v;
}

double entropy_rate(const TransitionModel& m) {
    require_valid(m);
    const int l = m.alphabet_size;
    switch (m.kind) {
        case ChainKind::uniform:
            return std::log(static_cast<double>(l));
        case ChainKind::iid: {
            double h = 0.0;
            for (double p : m.rows[0])
                if (p > 0.0) h -= p * std::log(p);
            return std::max(h, 0.0);
        }
        case ChainKind::markov:
        case ChainKind::markov_order_k: {
            // One-step conditional entropy under the stationary law. For the
            // shift-consistent block chain this is already per-symbol.
            ProbVector pi = stationary_distribution(m);
            const int s = m.state_count();
            double h = 0.0;
            for (int i = 0; i < s; ++i)
                for (int j = 0; j < s; ++j) {
                    double p = m.rows[i][j];
                    if (p > 0.0) h -= pi[i] * p * std::log(p);
                }
            return std::max(h, 0.0);
        }
    }
    throw SpecError("entropy_rate: unknown kind");
}

double string_log_prob(const TransitionModel& m, const String& x) {
    require_valid(m);
    const int n = static_cast<int>(x.size());
    if (n < 1) throw DomainError("string_log_prob: empty string");
    const int l = m.alphabet_size;
    for (int sym : x)
        if (sym < 0 || sym >= l) throw DomainError("string_log_prob: symbol out of range");

    const double neg_inf = -std::numeric_limits<double>::infinity();
    if (m.kind != ChainKind::markov_order_k) {
        double lp = m.initial[x[0]] > 0.0 ? std::log(m.initial[x[0]]) : neg_inf;
        for (int i = 0; i + 1 < n && lp != neg_inf; ++i) {
            double p = m.rows[x[i]][x[i + 1]];
            lp = p > 0.0 ? lp + std::log(p) : neg_inf;
        }
        return lp;
    }

    const int k = m.order;
    if (n < k) {
        // Marginal of the initial window over all completions of x.
        const int s = m.state_count();
        const long long tail = ipow(l, k - n);
        double mass = 0.0;
        for (int u = 0; u < s; ++u) {
            long long prefix = u / tail;
            long long want = 0;
            for (int i = 0; i < n; ++i) want = want * l + x[i];
            if (prefix == want) mass += m.initial[u];
        }
        return mass > 0.0 ? std::log(mass) : neg_inf;
    }
    int w = block_index(x.data(), k, l);
    double lp = m.initial[w] > 0.0 ? std::log(m.initial[w]) : neg_inf;
    for (int i = k; i < n && lp != neg_inf; ++i) {
        int w2 = shift_block(w, x[i], k, l);
        double p = m.rows[w][w2];
        lp = p > 0.0 ? lp + std::log(p) : neg_inf;
        w = w2;
    }
    return lp;
}

String sample_string(const TransitionModel& m, int n, std::uint64_t seed) {
    require_valid(m);
    if (n < 1) throw DomainError("sample_string: n must be positive");
    std::mt19937_64 rng(seed);
    const int l = m.alphabet_size;
    String x;
    x.reserve(n);

    if (m.kind != ChainKind::markov_order_k) {
        int state = draw(m.initial.data(), l, uniform01(rng()));
        x.push_back(state);
        while (static_cast<int>(x.size()) < n) {
            state = draw(m.rows[state].data(), l, uniform01(rng()));
            x.push_back(state);
        }
        return x;
    }

    const int k = m.order;
    const int s = m.state_count();
    int w = draw(m.initial.data(), s, uniform01(rng()));
    std::vector<int> syms(k);
    block_symbols(w, k, l, syms.data());
    for (int i = 0; i < k && static_cast<int>(x.size()) < n; ++i) x.push_back(syms[i]);
    const long long tail = ipow(l, k - 1);
    std::vector<double> probs(l);
    while (static_cast<int>(x.size()) < n) {
        // Row support lives on the l shift successors; draw among them.
        int base = static_cast<int>((w % tail) * l);
        for (int j = 0; j < l; ++j) probs[j] = m.rows[w][base + j];
        int j = draw(probs.data(), l, uniform01(rng()));
        x.push_back(j);
        w = base + j;
    }
    return x;
}

TransitionModel lift_to_order_k(int alphabet_size, int k,
                                std::vector<std::vector<double>> block_rows,
                                ProbVector block_initial) {
    if (k < 1) throw DomainError("lift_to_order_k: k must be at least 1");
    TransitionModel m;
    m.alphabet_size = alphabet_size;
    m.kind = k == 1 ? ChainKind::markov : ChainKind::markov_order_k;
    m.order = k;
    m.rows = std::move(block_rows);
    if (block_initial.empty())
        block_initial.assign(m.state_count(), 1.0 / m.state_count());
    m.initial = std::move(block_initial);
    require_valid(m);
    return m;
}

TransitionModel lift_chain(const TransitionModel& first_order, int k) {
    require_valid(first_order);
    if (first_order.kind == ChainKind::markov_order_k)
        throw SpecError("lift_chain: input must be a first-order model");
    if (k < 1) throw DomainError("lift_chain: k must be at least 1");
    if (k == 1) return first_order;

    const int l = first_order.alphabet_size;
    const int s = static_cast<int>(ipow(l, k));
    std::vector<std::vector<double>> rows(s, std::vector<double>(s, 0.0));
    ProbVector initial(s, 0.0);
    std::vector<int> syms(k);
    for (int u = 0; u < s; ++u) {
        block_symbols(u, k, l, syms.data());
        double mass = first_order.initial[syms[0]];
        for (int i = 0; i + 1 < k; ++i) mass *= first_order.rows[syms[i]][syms[i + 1]];
        initial[u] = mass;
        int last = syms[k - 1];
        for (int j = 0; j < l; ++j)
            rows[u][shift_block(u, j, k, l)] = first_order.rows[last][j];
    }
    return lift_to_order_k(l, k, std::move(rows), std::move(initial));
}

int block_index(const int* symbols, int k, int alphabet_size) {
    int idx = 0;
    for (int i = 0; i < k; ++i) idx = idx * alphabet_size + symbols[i];
    return idx;
}

void block_symbols(int index, int k, int alphabet_size, int* out) {
    for (int i = k - 1; i >= 0; --i) {
        out[i] = index % alphabet_size;
        index /= alphabet_size;
    }
}

int shift_block(int index, int next_symbol, int k, int alphabet_size) {
    const long long tail = ipow(alphabet_size, k - 1);
    return static_cast<int>((index % tail) * alphabet_size + next_symbol);
}

}  // namespace sdc
