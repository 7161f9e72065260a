#include "sdc/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <thread>

#include "sdc/errors.hpp"

namespace sdc {

namespace {

constexpr long long kSizeGuard = 1LL << 26;
constexpr double kPruneMargin = 1e-9;  // slack so pruning never beats select()

long long checked_pow(int base, int exp) {
    long long r = 1;
    for (int i = 0; i < exp; ++i) {
        r *= base;
        if (r > kSizeGuard) throw SizeError("enumeration: state space exceeds the guard");
    }
    return r;
}

int worker_count(long long jobs) {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("LDP_THREADS")) {
        const int cap = std::atoi(env);
        if (cap > 0 && static_cast<unsigned>(cap) < hw) hw = static_cast<unsigned>(cap);
    }
    return static_cast<int>(std::min<long long>(hw, jobs));
}

struct KahanSum {
    double sum = 0.0, comp = 0.0;
    void add(double v) {
        const double y = v - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
};

struct Partial {
    std::uint64_t count = 0;
    KahanSum prob;
};

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t trial) {
    std::uint64_t z = seed + (trial + 1) * 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// One depth-first sweep below a fixed prefix. Counters mirror occupancy();
// the leaf test assembles rates from them with the same arithmetic as
// weight_rate/info_rate, so the decision agrees with select() exactly.
class Enumerator {
  public:
    Enumerator(const SelectionSpec& spec, const TransitionModel* prob_chain, int n)
        : spec_(spec),
          prob_chain_(prob_chain),
          n_(n),
          l_(spec.source.alphabet_size),
          order_k_(spec.source.kind == ChainKind::markov_order_k),
          src_k_(order_k_ ? spec.source.order : 1),
          min_len_(order_k_ ? spec.source.order + 1 : 2) {
        x_.assign(n_, 0);
        sym_cnt_.assign(l_, 0);
        if (!order_k_) pair_cnt_.assign(static_cast<size_t>(l_) * l_, 0);
        window_.assign(n_, 0);
        // Prefix-sum stacks: popping restores the exact prior value, and the
        // depth-d entry reproduces a left-to-right accumulation bit for bit.
        wsum_at_.assign(n_ + 1, 0.0);
        isum_at_.assign(n_ + 1, 0.0);

        const WeightSpec& w = spec_.weight;
        if (w.kind == WeightKind::additive_k) {
            block_weight_ = true;
            wk_ = w.k;
            if (n_ < wk_) throw DomainError("enumeration: string shorter than weight block");
            blk_cnt_.assign(w.phi.size(), 0);
            wblock_.assign(n_, 0);
            wcoef_ = &w.phi;
        } else {
            logpsi_ = effective_phi(w);  // phi itself, or log psi
            wcoef_ = &logpsi_;
        }
        phimax_ = *std::max_element(wcoef_->begin(), wcoef_->end());
        wdenom_ = block_weight_ ? n_ - wk_ + 1 : n_;
        idenom_ = order_k_ ? n_ - src_k_ : n_ - 1;
    }

    Partial run_prefix(long long prefix, int d0) {
        Partial out;
        // Decode the prefix (big-endian) and push it.
        std::vector<int> syms(d0);
        for (int i = d0 - 1; i >= 0; --i) {
            syms[i] = static_cast<int>(prefix % l_);
            prefix /= l_;
        }
        for (int i = 0; i < d0; ++i) push(i, syms[i]);
        descend(d0, out);
        for (int i = d0 - 1; i >= 0; --i) pop(i, syms[i]);
        return out;
    }

  private:
    void push(int d, int s) {
        x_[d] = s;
        ++sym_cnt_[s];
        double istep = 0.0;
        if (order_k_) {
            if (d == src_k_ - 1)
                window_[d] = block_index(x_.data(), src_k_, l_);
            else if (d >= src_k_)
                window_[d] = shift_block(window_[d - 1], s, src_k_, l_);
            if (d >= src_k_) {
                const double p = spec_.source.rows[window_[d - 1]][window_[d]];
                if (p > 0.0)
                    istep = -std::log(p);
                else
                    ++inf_transitions_;
            }
        } else if (d >= 1) {
            ++pair_cnt_[static_cast<size_t>(x_[d - 1]) * l_ + s];
            const double p = spec_.source.rows[x_[d - 1]][s];
            if (p > 0.0)
                istep = -std::log(p);
            else
                ++inf_transitions_;
        }
        isum_at_[d + 1] = isum_at_[d] + istep;
        double wstep = 0.0;
        if (block_weight_) {
            if (d == wk_ - 1)
                wblock_[d] = block_index(x_.data(), wk_, l_);
            else if (d >= wk_)
                wblock_[d] = shift_block(wblock_[d - 1], s, wk_, l_);
            if (d >= wk_ - 1) {
                ++blk_cnt_[wblock_[d]];
                wstep = (*wcoef_)[wblock_[d]];
            }
        } else {
            wstep = (*wcoef_)[s];
        }
        wsum_at_[d + 1] = wsum_at_[d] + wstep;
    }

    void pop(int d, int s) {
        if (block_weight_ && d >= wk_ - 1) --blk_cnt_[wblock_[d]];
        if (order_k_) {
            if (d >= src_k_ && spec_.source.rows[window_[d - 1]][window_[d]] == 0.0)
                --inf_transitions_;
        } else if (d >= 1) {
            --pair_cnt_[static_cast<size_t>(x_[d - 1]) * l_ + s];
            if (spec_.source.rows[x_[d - 1]][s] == 0.0) --inf_transitions_;
        }
        --sym_cnt_[s];
    }

    // Sound over-approximations: a subtree is dropped only when no completion
    // can reach the weight threshold, or the (monotone) information sum has
    // already overshot the budget.
    bool prunable(int d) const {
        const int rem = block_weight_ ? (d >= wk_ ? n_ - d : n_ - wk_ + 1)
                                      : n_ - d;
        if ((wsum_at_[d] + rem * phimax_) / wdenom_ < spec_.eta - kSelectGuard - kPruneMargin)
            return true;
        if (n_ >= min_len_) {
            if (inf_transitions_ > 0) return true;
            if (isum_at_[d] / idenom_ > spec_.h + spec_.eps + kSelectGuard + kPruneMargin)
                return true;
        }
        return false;
    }

    bool leaf_selected() const {
        // Weight rate, assembled exactly as weight_rate() does.
        double w = 0.0;
        if (block_weight_) {
            for (size_t b = 0; b < blk_cnt_.size(); ++b) {
                const double zeta = static_cast<double>(blk_cnt_[b]) / wdenom_;
                w += zeta * (*wcoef_)[b];
            }
        } else {
            for (int i = 0; i < l_; ++i) {
                const double u = static_cast<double>(sym_cnt_[i]) / n_;
                w += u * (*wcoef_)[i];
            }
        }
        if (!(w >= spec_.eta - kSelectGuard)) return false;
        if (n_ < min_len_) return true;
        if (inf_transitions_ > 0) return false;
        double info;
        if (order_k_) {
            info = isum_at_[n_] / idenom_;  // the positional sum is the definition
        } else {
            double acc = 0.0;
            for (int i = 0; i < l_; ++i)
                for (int j = 0; j < l_; ++j) {
                    const long long c = pair_cnt_[static_cast<size_t>(i) * l_ + j];
                    if (c == 0) continue;
                    const double t = static_cast<double>(c) / idenom_;
                    acc -= t * std::log(spec_.source.rows[i][j]);
                }
            info = acc;
        }
        return info <= spec_.h + spec_.eps + kSelectGuard;
    }

    void descend(int d, Partial& out) {
        if (prunable(d)) return;
        if (d == n_) {
            if (!leaf_selected()) return;
            ++out.count;
            if (prob_chain_) out.prob.add(std::exp(string_log_prob(*prob_chain_, x_)));
            return;
        }
        for (int s = 0; s < l_; ++s) {
            push(d, s);
            descend(d + 1, out);
            pop(d, s);
        }
    }

    const SelectionSpec& spec_;
    const TransitionModel* prob_chain_;
    const int n_, l_;
    const bool order_k_;
    const int src_k_, min_len_;
    bool block_weight_ = false;
    int wk_ = 1;
    String x_;
    std::vector<long long> sym_cnt_, pair_cnt_, blk_cnt_;
    std::vector<int> window_, wblock_;
    const std::vector<double>* wcoef_ = nullptr;
    std::vector<double> logpsi_;
    double phimax_ = 0.0;
    int wdenom_ = 1, idenom_ = 1;
    std::vector<double> wsum_at_, isum_at_;
    int inf_transitions_ = 0;
};

// Prefix-parallel enumeration with a worker-count-independent merge: prefix
// partials are computed independently and folded in prefix order.
Partial enumerate_core(const SelectionSpec& spec, const TransitionModel* prob_chain, int n) {
    require_valid(spec.source);
    if (n < 2) throw SpecError("enumeration: need n >= 2");
    checked_pow(spec.source.alphabet_size, n);
    const int l = spec.source.alphabet_size;
    const int d0 = std::min(4, n - 1);
    const long long prefixes = checked_pow(l, d0);

    std::vector<Partial> parts(prefixes);
    const int workers = worker_count(prefixes);
    if (workers <= 1) {
        Enumerator e(spec, prob_chain, n);
        for (long long p = 0; p < prefixes; ++p) parts[p] = e.run_prefix(p, d0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                Enumerator e(spec, prob_chain, n);
                for (long long p = w; p < prefixes; p += workers)
                    parts[p] = e.run_prefix(p, d0);
            });
        for (auto& t : pool) t.join();
    }
    Partial total;
    for (const Partial& p : parts) {
        total.count += p.count;
        total.prob.add(p.prob.sum);
    }
    return total;
}

}  // namespace

EnumerationResult enumerate_selected(const SelectionSpec& spec, int n) {
    const Partial p = enumerate_core(spec, &spec.source, n);
    return {p.count, p.prob.sum};
}

double exact_probability(const TransitionModel& storage, const SelectionSpec& spec, int n) {
    require_valid(storage);
    if (storage.alphabet_size != spec.source.alphabet_size)
        throw SpecError("exact_probability: storage alphabet mismatch");
    return enumerate_core(spec, &storage, n).prob.sum;
}

MonteCarloResult monte_carlo_probability(const TransitionModel& storage,
                                         const SelectionSpec& spec, int n, long trials,
                                         std::uint64_t seed) {
    require_valid(storage);
    if (storage.alphabet_size != spec.source.alphabet_size)
        throw SpecError("monte_carlo_probability: storage alphabet mismatch");
    if (n < 1) throw SpecError("monte_carlo_probability: need n >= 1");
    if (trials < 1) throw SpecError("monte_carlo_probability: need at least one trial");

    const int workers = worker_count(trials);
    std::vector<std::uint64_t> hits(workers, 0);
    auto sweep = [&](int w) {
        std::uint64_t h = 0;
        for (long t = w; t < trials; t += workers) {
            const String x = sample_string(storage, n, mix_seed(seed, static_cast<std::uint64_t>(t)));
            if (select(x, spec)) ++h;
        }
        hits[w] = h;
    };
    if (workers <= 1) {
        sweep(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) pool.emplace_back(sweep, w);
        for (auto& t : pool) t.join();
    }
    std::uint64_t total = 0;
    for (std::uint64_t h : hits) total += h;
    MonteCarloResult r;
    r.estimate = static_cast<double>(total) / static_cast<double>(trials);
    r.std_error = std::sqrt(r.estimate * (1.0 - r.estimate) / static_cast<double>(trials));
    return r;
}

std::vector<ConvergenceRow> rate_convergence(const SelectionSpec& spec,
                                             const TransitionModel& storage,
                                             const RateResult& analytic,
                                             const std::vector<int>& n_list,
                                             ConvergenceMode mode) {
    if (n_list.empty()) throw SpecError("rate_convergence: empty n_list");
    for (size_t i = 1; i < n_list.size(); ++i)
        if (n_list[i] <= n_list[i - 1])
            throw SpecError("rate_convergence: n_list must be strictly ascending");

    const double neg_inf = -std::numeric_limits<double>::infinity();
    std::vector<ConvergenceRow> rows;
    rows.reserve(n_list.size());
    for (int n : n_list) {
        double rate;
        if (mode == ConvergenceMode::count) {
            const EnumerationResult e = enumerate_selected(spec, n);
            rate = e.count > 0 ? std::log(static_cast<double>(e.count)) / n : neg_inf;
        } else {
            const double p = exact_probability(storage, spec, n);
            rate = p > 0.0 ? std::log(p) / n : neg_inf;
        }
        ConvergenceRow row;
        row.n = n;
        row.rate = rate;
        row.analytic = analytic.value;
        row.gap = (std::isinf(rate) && std::isinf(row.analytic) && rate < 0 && row.analytic < 0)
                      ? 0.0
                      : std::abs(rate - row.analytic);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace sdc
