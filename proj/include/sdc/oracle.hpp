#pragma once

// Ground-truth validation for the analytic exponents: exhaustive enumeration
// of selected sets, exact selected-set probability mass, Monte Carlo
// estimates at lengths beyond enumeration, and empirical rate tables.
//
// Enumeration is an exact-by-construction reference: selection decisions at
// the leaves reproduce select() bit for bit (the incremental counters feed
// the same count-then-assemble arithmetic), and pruning only ever discards
// subtrees that provably contain no selected string.

#include <cstdint>
#include <vector>

#include "sdc/empirical.hpp"
#include "sdc/markov.hpp"
#include "sdc/rates.hpp"

namespace sdc {

struct EnumerationResult {
    std::uint64_t count = 0;          // exact number of selected strings
    double source_probability = 0.0;  // their mass under the selection source
};

// Exhaustive DFS over X^n with incremental occupancy counters and
// weight-bound pruning. Deterministic; parallel over fixed-depth prefixes
// with a fixed-order merge, so results do not depend on the worker count
// (capped by LDP_THREADS). Requires n >= 2 and l^n <= 2^26 (SizeError).
EnumerationResult enumerate_selected(const SelectionSpec& spec, int n);

// p_n(B_n): total probability of the selected set under an arbitrary storage
// chain on the same alphabet, by the same enumeration (compensated
// summation). Uniform storage gives count / l^n up to rounding.
double exact_probability(const TransitionModel& storage, const SelectionSpec& spec, int n);

struct MonteCarloResult {
    double estimate = 0.0;   // selected fraction of sampled strings
    double std_error = 0.0;  // binomial standard error
};

// Fraction of storage-chain samples of length n that are selected. Each
// trial draws from its own seed substream, so the pooled result is
// deterministic per seed and invariant to how trials are split across
// workers. Caller contract: trials >= 1000 for a meaningful std_error.
MonteCarloResult monte_carlo_probability(const TransitionModel& storage,
                                         const SelectionSpec& spec, int n, long trials,
                                         std::uint64_t seed);

enum class ConvergenceMode { count, probability };

struct ConvergenceRow {
    int n = 0;
    double rate = 0.0;      // (1/n) log b_n, or (1/n) log p_n(B_n)
    double analytic = 0.0;  // the exponent being approached
    double gap = 0.0;       // |rate - analytic| (0 when both are -infinity)
};

// Empirical finite-n rates against an analytic exponent, one row per length.
// Count mode ignores the storage chain; probability mode weighs the selected
// set by it. n_list must be ascending and within the enumeration guard.
std::vector<ConvergenceRow> rate_convergence(const SelectionSpec& spec,
                                             const TransitionModel& storage,
                                             const RateResult& analytic,
                                             const std::vector<int>& n_list,
                                             ConvergenceMode mode);

}  // namespace sdc
