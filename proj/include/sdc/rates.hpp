#pragma once

// Exponents of selected-set volume: feasible occupancy polytopes and the two
// convex programs over them,
//   gamma = sup { H(y) : y feasible }   (growth rate of the selected count),
//   kappa = -inf { Pi*(z) : z feasible } <= 0   (decay rate of the selected
//   probability under the storage chain),
// linked by the volume identity gamma = v + kappa (v = log l for counting).
//
// Sets are linear-constraint systems over a probability simplex. Pair-measure
// sets carry marginal consistency row(z) = col(z) as a structural constraint
// (a stationarity requirement of limiting pair occupancies, on par with the
// simplex itself); block sets carry the stronger window shift-invariance.

#include <vector>

#include "sdc/empirical.hpp"
#include "sdc/lp.hpp"
#include "sdc/markov.hpp"

namespace sdc {

// Coordinate system of the LP variable.
enum class SetCoords {
    marginal,   // y over symbols (iid sources)
    pair,       // z over symbol pairs, row-major
    block_pair  // Z over pairs of k-blocks, row-major in block indices
};

struct ConstrainedSet {
    SetCoords coords = SetCoords::marginal;
    int dimension = 0;      // number of LP variables
    int states = 0;         // side length of the pair index (l, or l^k)
    int alphabet_size = 0;  // l
    int block_k = 1;
    bool lifted = false;             // objective applies to a marginal image
    bool pair_consistency = false;   // structural rows: row(z) = col(z)
    bool shift_consistency = false;  // structural rows: window shift-invariance
    // Named rows: information bound, weight bound, forced zeros for
    // transitions the source cannot make. Simplex rows are implicit.
    std::vector<lp::Constraint> constraints;
};

enum class RateStatus { optimal, infeasible, at_boundary, at_uniform };

struct RateResult {
    double value = 0.0;
    ProbVector optimizer;  // LP-variable coordinates; empty when infeasible
    RateStatus status = RateStatus::optimal;
    double v = 0.0;  // total-volume exponent paired with this result
};

// Pair polytope for a first-order source: z in S_{l^2} with
//   -sum z_ij log p_ij <= h + eps,  sum z_ij phi(i) >= eta,
// plus z_ij = 0 wherever p_ij = 0. Weight must be one-digit additive.
ConstrainedSet build_set_B(const TransitionModel& source, const WeightSpec& weight,
                           double eta, double eps);

// Same polytope with an arbitrary two-digit weight sum z_ij phi2(i,j) >= eta
// (phi2 flattened row-major, size l^2).
ConstrainedSet build_set_B_pair(const TransitionModel& source, const std::vector<double>& phi2,
                                double eta, double eps);

// Marginal-objective form of the same pair polytope: the l consistency rows
// appear as named constraints (they define the objective marginal y_i =
// sum_j z_ij = sum_j z_ji). Feasibility coincides with build_set_B.
ConstrainedSet build_set_A(const TransitionModel& source, const WeightSpec& weight,
                           double eta, double eps);

// Simplex polytope in y for iid (or uniform) sources:
//   sum y_i phi(i) >= eta,  -sum y_i log p_i <= h + eps.
ConstrainedSet build_set_D(const TransitionModel& source, const WeightSpec& weight,
                           double eta, double eps);

// Block polytope for an order-k source and a k-digit additive weight. The
// variable is the pair measure Z over k-block states; the information row uses
// the k-step block transition matrix with a 1/k prefactor, the weight acts on
// the block marginal zeta(u) = sum_V Z_{uV}, and the objective marginal is
// y_j = sum over blocks u starting with j of zeta(u). k = 1 degenerates to
// build_set_A's polytope.
ConstrainedSet build_set_Blk(const TransitionModel& source, const WeightSpec& weight,
                             double eta, double eps);

// All LP rows except the simplex: named constraints followed by the
// structural consistency rows generated from the flags.
std::vector<lp::Constraint> materialize_constraints(const ConstrainedSet& set);

// Phase-1 feasibility of the full system (simplex included).
bool set_feasible(const ConstrainedSet& set);

// The entropy argument: y itself, or the first-symbol marginal of the pair /
// block variable.
ProbVector objective_marginal(const ConstrainedSet& set, const ProbVector& x);

// gamma = sup { H(y(x)) : x in set }. Exact dichotomy fast path: if some
// feasible x has uniform marginal, returns exactly log(l) with at_uniform;
// otherwise Frank-Wolfe with away steps (duality gap < 1e-9, cap 1e5
// iterations) followed by an active-face Newton polish.
RateResult gamma_max_entropy(const ConstrainedSet& set);

// kappa = -inf { Pi*_storage(z) : z in set } over a pair or block set.
// Uniform storage reduces through gamma_max_entropy (kappa = gamma - log l);
// two-state storage reduces to an exact interval search in the second-index
// marginal; otherwise the Frank-Wolfe path with Danskin subgradients.
RateResult kappa_inf_rate(const TransitionModel& storage, const ConstrainedSet& set);

// Always the general Frank-Wolfe path, as an independent cross-check of the
// reductions above.
RateResult kappa_inf_rate_numeric(const TransitionModel& storage, const ConstrainedSet& set);

// Two-state reduction of gamma: the feasible second coordinate y_1 forms an
// interval [lo, hi]; the entropy maximizer is 1/2 clamped into it (nearest
// endpoint outside; the smaller endpoint on exact ties). The optimizer is the
// marginal (1 - u*, u*).
RateResult gamma_binary_interval(const TransitionModel& source, const WeightSpec& weight,
                                 double eta, double eps);

// Growth exponent of multiplicatively selected counts: the gamma pipeline run
// with phi = log psi.
RateResult iota_multiplicative(const TransitionModel& source, const WeightSpec& psi,
                               double eta, double eps);

// The gamma pipeline for an additive-family weight, dispatching on the source
// kind (iid -> D, first-order -> A, order-k -> block set).
RateResult gamma_exponent(const TransitionModel& source, const WeightSpec& weight,
                          double eta, double eps);

// gamma = v + kappa, propagating -infinity.
double volume_exponent(const RateResult& kappa, double v);

// Stationarity certificate at a gamma optimizer: least infinity-norm residual
// of the entropy gradient against nonnegative combinations of active
// inequality normals plus free combinations of equality normals, relative to
// the gradient magnitude.
double kkt_residual(const ConstrainedSet& set, const ProbVector& x);

}  // namespace sdc
