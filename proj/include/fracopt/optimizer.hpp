#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "fracopt/eigensolver.hpp"
#include "fracopt/grid.hpp"
#include "fracopt/rearrange.hpp"
#include "fracopt/stiffness.hpp"

namespace fracopt {

// the class offers no positive value, so no weight in it has a positive
// principal eigenvalue
class InfeasibleProblem : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// nonpositive class mass: sup lambda_1 over the class is +infinity
class UnboundedProblem : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class OptStatus { fixed_point, iteration_cap, degenerate_class };

struct TraceRow {
  int iter = 0;
  double mu1 = 0.0;
  double lambda1 = 0.0;
  // value of the optimized linear functional at this iterate's eigenfunction
  // (the maximized value for the minimization scheme, the minimized value for
  // the Frank-Wolfe direction)
  double lin_obj = 0.0;
  int cells_changed = 0;     // cells rewritten by the step leaving this iterate
  double rho_sym_err = 0.0;  // NaN when the grid has no symmetry axis
  double u_sym_err = 0.0;
};

struct OptimizerTrace {
  std::vector<TraceRow> rows;
  OptStatus status = OptStatus::fixed_point;
};

struct OptimizeResult {
  CellFunction rho;
  EigenResult eig;
  OptimizerTrace trace;
  int restarts_used = 1;
  // distinct final lambda values over the restarts that reached a fixed point
  std::vector<double> fixed_point_lambdas;
};

// deterministic start layout: class values descending, placed from the mask
// centroid outward (ties by cell index)
CellFunction canonical_layout(const std::shared_ptr<const Grid>& grid,
                              const WeightClass& cls);

// Fixed-point ascent on mu1: rho^{k+1} = linear_maximize(class, u_k^2-order),
// which never decreases mu1. Stops at a cellwise fixed point or when the
// ascent per step falls below tol. restarts > 1 reruns from seeded random
// layouts and keeps the best final mu1.
OptimizeResult minimize_lambda1(const StiffnessOperator& op,
                                const WeightClass& cls, double tol = 1e-10,
                                int max_iter = 10000, int restarts = 1,
                                unsigned long long seed = 42);

// true iff rho is an increasing function of u up to ties: no pair with
// u_i < u_j and rho_i > rho_j
bool verify_characterization(const CellFunction& rho, const CellFunction& u);

struct BoundReport {
  double bound = 0.0;
  bool satisfied = false;
};

// bound = lambda_1(unit weight) * |domain| / (class mass); satisfied when the
// minimized lambda_1 stays below it (slack 1e-9). Throws domain_error when
// the class mass is not positive.
BoundReport check_upper_bound(const StiffnessOperator& op,
                              const WeightClass& cls,
                              const EigenResult& minimized);

using FwObserver = std::function<void(int iter, const CellFunction& rho)>;

// Frank-Wolfe ascent of lambda_1 over the convex hull of the class:
// direction sigma_k = linear_minimize(class, u_k^2), step 2/(k+2), stop when
// the duality gap sum (rho_k - sigma_k) u_k^2 m falls below tol. The result
// generally lies in the hull, not in the class itself. Throws
// UnboundedProblem when the class mass is not positive.
OptimizeResult maximize_lambda1_fw(const StiffnessOperator& op,
                                   const WeightClass& cls, double tol = 1e-10,
                                   int max_iter = 10000,
                                   const FwObserver& observer = {});

struct SteinerReport {
  double rho_symmetry = 0.0;
  double u_symmetry = 0.0;
  // disk grids only: max over pairs |x_i| < |x_j| of (rho_j - rho_i)_+
  std::optional<double> radial_defect;
};

SteinerReport steiner_report(const CellFunction& rho, const CellFunction& u);

}  // namespace fracopt
