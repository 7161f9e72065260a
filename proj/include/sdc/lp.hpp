#pragma once

// Dense two-phase tableau simplex over nonnegative variables. Sized for the
// feasible sets used here: a few thousand columns, tens of rows. Bland's rule
// prevents cycling; all pivots are exact tableau updates.

#include <vector>

namespace sdc::lp {

enum class Sense { le, ge, eq };

struct Constraint {
    std::vector<double> a;
    Sense sense = Sense::le;
    double b = 0.0;
};

enum class Status { optimal, infeasible, unbounded };

struct Solution {
    Status status = Status::infeasible;
    std::vector<double> x;
    double objective = 0.0;
};

// min c.x subject to the constraints and x >= 0.
Solution solve_min(const std::vector<double>& c, const std::vector<Constraint>& cons, int n);

// max c.x subject to the constraints and x >= 0.
Solution solve_max(const std::vector<double>& c, const std::vector<Constraint>& cons, int n);

// Phase-1 feasibility of {x >= 0, constraints}.
bool feasible(const std::vector<Constraint>& cons, int n);

}  // namespace sdc::lp
