#pragma once

// Rate functions for occupancy measures of Markov storage chains.
//
// M*(y) = sup_{u in the simplex interior} sum_j y_j log(u_j / (Pu)_j), where
// (Pu)_j = sum_l p_jl u_l. The objective is invariant under scaling of u.
// Specializations: iid storage gives the relative entropy D(y||p); uniform
// storage gives log l - H(y). The pair-measure rate Pi*(z) depends on z only
// through its second-index marginal m_j = sum_i z_ij and equals M*(m).
//
// Binary closed form: with storage rows [[1-a, a], [b, 1-b]] the inner
// maximizer is w = (1-u)/u solving
//   y0 a (1-b) w^2 + a b (y0 - y1) w - y1 b (1-a) = 0,
// and M*(y) = -y0 log(1 - a + a K) - y1 log(1 - b + b / K) at the positive
// root K. Endpoints: M*((1,0)) = -log(1-a), M*((0,1)) = -log(1-b).

#include <vector>

#include "sdc/markov.hpp"

namespace sdc {

// -sum y log y with 0 log 0 = 0; y is assumed to lie in the simplex.
double entropy(const ProbVector& y);

// D(y||p) = sum y log(y/p); +inf if y puts mass where p has none.
double relative_entropy(const ProbVector& y, const ProbVector& p);

// Positive root K of the binary inner quadratic (see header comment).
double binary_k_root(double a, double b, double y0);

// Closed-form M* for binary storage; y = (y0, 1-y0).
double m_star_binary(double a, double b, double y0);

struct MStarResult {
    double value = 0.0;
    ProbVector maximizer;  // inner point u attaining the supremum
};

// M*(y) with the inner maximizer. Two-state storage always takes the closed
// form; larger alphabets use the numeric ascent.
MStarResult m_star_full(const TransitionModel& storage, const ProbVector& y);
double m_star(const TransitionModel& storage, const ProbVector& y);

// Numeric inner solver, any alphabet size: coordinate ascent in log(u) from
// the uniform point plus 8 Dirichlet starts, entries clipped to >= 1e-12,
// stopping when a sweep improves by < 1e-12 (cap 1e4 sweeps). Kept callable
// at l = 2 so the closed form has an independent cross-check.
MStarResult m_star_numeric_full(const TransitionModel& storage, const ProbVector& y);
double m_star_numeric(const TransitionModel& storage, const ProbVector& y);

// Single ascent from a caller-supplied start, for solvers that evaluate M*
// along a path and can warm-start from the previous maximizer. No multistart,
// no nonnegativity clamp on the value.
MStarResult m_star_ascent_from(const TransitionModel& storage, const ProbVector& y,
                               const ProbVector& u_start);

// Pi*(z) = M*(second-index marginal of z); z is a flattened S x S pair
// measure in row-major order.
double pi_star(const TransitionModel& storage, const ProbVector& z);

// Second-index marginal m_j = sum_i z_ij of a flattened pair measure.
ProbVector second_marginal(const ProbVector& z, int states);

}  // namespace sdc
