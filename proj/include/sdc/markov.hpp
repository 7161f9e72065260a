#pragma once

// Finite-alphabet Markov chain models: validation, stationary distribution,
// entropy rate, string log-probabilities, sampling, and order-k lifts.
// All logarithms are natural; unit conversion happens only at output layers.

#include <cstdint>
#include <string>
#include <vector>

#include "sdc/errors.hpp"

namespace sdc {

using ProbVector = std::vector<double>;
using String = std::vector<int>;  // symbols in {0, ..., l-1}

enum class ChainKind { markov, iid, uniform, markov_order_k };

// Transition model over an alphabet of size l. For kind=markov_order_k the
// chain runs on block states (sliding windows of k symbols, big-endian
// encoded), and transitions may only move to shift successors
// (u1..uk) -> (u2..uk, j); rows is then l^k x l^k.
struct TransitionModel {
    int alphabet_size = 0;  // l >= 2
    ChainKind kind = ChainKind::markov;
    std::vector<std::vector<double>> rows;  // row-stochastic, S x S
    ProbVector initial;                     // distribution of the first state
    int order = 1;                          // k >= 1; 1 unless markov_order_k

    // Number of chain states: l, or l^k for order-k models.
    int state_count() const;
};

struct ValidationReport {
    bool row_stochastic = false;
    bool kind_consistent = false;
    bool irreducible = false;
    bool aperiodic = false;
    std::string detail;  // names the first violated property; empty if valid

    bool ok() const { return row_stochastic && kind_consistent && irreducible && aperiodic; }
};

TransitionModel make_markov(std::vector<std::vector<double>> rows, ProbVector initial = {});
TransitionModel make_iid(ProbVector p);
TransitionModel make_uniform(int alphabet_size);
// Binary chain with rows [[1-a, a], [b, 1-b]].
TransitionModel make_binary(double a, double b, ProbVector initial = {});

// Checks, in order: row-stochasticity (entries in [0,1], sums within 1e-12),
// kind consistency (iid rows identical, uniform entries 1/l, order-k shift
// support), irreducibility (strong connectivity of the support digraph),
// aperiodicity (gcd of BFS level differences along support edges equals 1).
ValidationReport validate(const TransitionModel& m);

// Throws StructuralError naming the first violated property.
void require_valid(const TransitionModel& m);

// Unique stationary distribution pi with pi P = pi. Power iteration with
// Cesaro averaging (tol 1e-13, cap 1e6 sweeps), falling back to Gaussian
// elimination of the balance equations plus normalization. The result
// satisfies ||pi P - pi||_inf <= 1e-12 and has strictly positive entries.
ProbVector stationary_distribution(const TransitionModel& m);

// Entropy rate in nats per symbol:
//   markov:         -sum_i pi_i sum_j p_ij log p_ij
//   iid:            -sum_j p_j log p_j
//   uniform:        log l
//   markov_order_k: one-step rate of the block chain, which equals the
//                   per-symbol rate of the k-step block transitions for
//                   shift-consistent lifts.
// Uses the 0 log 0 = 0 convention.
double entropy_rate(const TransitionModel& m);

// log p(x) = log initial(x_0) + sum log p(x_i, x_{i+1}); -inf if any factor
// vanishes. Order-k models consume the first window through `initial`
// (marginalized when n < k) and then one symbol per lifted transition.
double string_log_prob(const TransitionModel& m, const String& x);

// Deterministic sample of length n from the model; identical seeds give
// identical strings on every platform (no std::distribution involved).
String sample_string(const TransitionModel& m, int n, std::uint64_t seed);

// Wraps a shift-consistent block transition assignment (l^k x l^k) as a
// validated order-k model; k = 1 yields a plain markov model.
TransitionModel lift_to_order_k(int alphabet_size, int k,
                                std::vector<std::vector<double>> block_rows,
                                ProbVector block_initial = {});

// The order-k sliding-window lift of a first-order chain:
// p((u1..uk), (u2..uk, j)) = p(uk, j), initial(u) = lambda(u1) prod p steps.
TransitionModel lift_chain(const TransitionModel& first_order, int k);

// Block index helpers (big-endian: the oldest symbol is most significant).
int block_index(const int* symbols, int k, int alphabet_size);
void block_symbols(int index, int k, int alphabet_size, int* out);
int shift_block(int index, int next_symbol, int k, int alphabet_size);

}  // namespace sdc
