#pragma once

#include <utility>
#include <vector>

#include "fracopt/grid.hpp"

namespace fracopt {

// Multiset of cell values defining a rearrangement class on grids of equal
// cell measure. Entries are kept with strictly decreasing values and positive
// counts.
struct WeightClass {
  std::vector<std::pair<double, long>> entries;  // (value, cell count)
  long total_cells = 0;
  double cell_measure = 0.0;

  static WeightClass from_values(const std::vector<double>& values,
                                 double cell_measure);
  // (value, fraction) pairs with fractions summing to 1 within 1e-9; cell
  // counts assigned by largest-remainder apportionment.
  static WeightClass from_fractions(
      const std::vector<std::pair<double, double>>& value_fraction,
      long total_cells, double cell_measure);

  std::vector<double> expanded_desc() const;
  double mass() const;  // sum of value * count * cell_measure
  double max_value() const;
  bool single_valued() const { return entries.size() <= 1; }
};

// Non-increasing, right-continuous step function on (0, total()).
struct StepFunction {
  std::vector<double> values;  // value on [k*step, (k+1)*step)
  double step = 0.0;
  double total() const { return static_cast<double>(values.size()) * step; }
  double value_at(double sigma) const;
};

// measure of { f > t }
double distribution_function(const CellFunction& f, double t);
StepFunction decreasing_rearrangement(const CellFunction& f);
bool equimeasurable(const CellFunction& f, const CellFunction& g);
// true iff g is majorized by f: prefix sums of the decreasing rearrangements
// dominate and the totals agree, both within 1e-12 absolute.
bool majorizes(const CellFunction& f, const CellFunction& g);

// Arrange the class values so that sum(rho * u) is maximal (resp. minimal).
// Ties in u are resolved by ascending cell index.
CellFunction linear_maximize(const WeightClass& cls, const CellFunction& u);
CellFunction linear_minimize(const WeightClass& cls, const CellFunction& u);

// Per line parallel to the grid's Steiner axis, place the sorted-descending
// values by increasing distance from the line's active-cell center, ties
// toward the positive side.
CellFunction steiner_symmetrize(const CellFunction& u);
double symmetry_error(const CellFunction& u);  // max-norm of u - u#

}  // namespace fracopt
