#pragma once

// Occupancy measures of strings and the selection predicate: weight rate
// against a per-symbol (or per-block) value function and information rate
// against a source chain.

#include <vector>

#include "sdc/markov.hpp"

namespace sdc {

// Constraint comparisons use a symmetric absolute guard band: a string passes
// weight >= eta when weight >= eta - kSelectGuard, and information <= h + eps
// when information <= h + eps + kSelectGuard.
inline constexpr double kSelectGuard = 1e-12;

// u: symbol occupancy, u_i = (1/n) #{positions with symbol i}.
// t: pair occupancy, t_ij = (1/(n-1)) #{adjacent pairs (i,j)}; empty if n < 2.
// zeta: sliding k-block occupancy with denominator n-k+1; empty unless a
//       block length k >= 2 was requested and n >= k.
struct EmpiricalMeasure {
    ProbVector u;
    ProbVector t;
    ProbVector zeta;  // indexed by block_index
    int n = 0;
    int alphabet_size = 0;
    int block_k = 1;
};

EmpiricalMeasure occupancy(const String& x, int alphabet_size, int block_k = 1);

enum class WeightKind { additive, additive_k, multiplicative };

struct WeightSpec {
    WeightKind kind = WeightKind::additive;
    std::vector<double> phi;  // per symbol (additive) or per k-block (additive_k)
    std::vector<double> psi;  // per symbol, strictly positive (multiplicative)
    int k = 1;
    int alphabet_size = 0;  // set for additive_k (block indexing needs it)
};

WeightSpec additive_weight(std::vector<double> phi);
WeightSpec additive_k_weight(std::vector<double> phi_blocks, int alphabet_size, int k);
WeightSpec multiplicative_weight(std::vector<double> psi);

// The per-symbol coefficients the weight reduces to: phi itself for additive,
// log psi for multiplicative. SpecError for additive_k (no one-digit form).
std::vector<double> effective_phi(const WeightSpec& w);

// additive:       sum_i u_i phi(i)          (inner product with occupancy)
// additive_k:     sum_blocks zeta(b) phi(b)
// multiplicative: sum_i u_i log psi(i)
double weight_rate(const String& x, const WeightSpec& w);

// -sum_ij t_ij log p_ij for first-order sources (n >= 2); for order-k sources
// the sliding-window analogue -(1/(n-k)) sum log p(w_i, w_{i+1}) with n > k.
// +inf when the string leaves the source support.
double info_rate(const String& x, const TransitionModel& source);

// Selection thresholds. h must equal entropy_rate(source); use make_selection.
struct SelectionSpec {
    TransitionModel source;
    WeightSpec weight;
    double eta = 0.0;
    double eps = 0.0;
    double h = 0.0;
};

SelectionSpec make_selection(TransitionModel source, WeightSpec weight, double eta, double eps);

// weight_rate(x) >= eta AND info_rate(x) <= h + eps, with the guard band.
// Strings of length 1 have no pair statistics; the information constraint is
// vacuously true for them.
bool select(const String& x, const SelectionSpec& spec);

}  // namespace sdc
