#include "fracopt/rearrange.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fracopt {

namespace {

// canonical form: strictly decreasing values, equal values merged
std::vector<std::pair<double, long>> canonicalize(
    std::vector<std::pair<double, long>> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<std::pair<double, long>> merged;
  for (const auto& e : entries) {
    if (e.second == 0) continue;
    if (e.second < 0) throw std::invalid_argument("weight class: negative cell count");
    if (!merged.empty() && merged.back().first == e.first)
      merged.back().second += e.second;
    else
      merged.push_back(e);
  }
  return merged;
}

std::vector<double> sorted_desc(const Eigen::VectorXd& v) {
  std::vector<double> out(v.data(), v.data() + v.size());
  std::sort(out.begin(), out.end(), std::greater<double>());
  return out;
}

// cell order used by both linear optimizers: ascending u, ties by index
std::vector<long> order_by_value(const Eigen::VectorXd& u) {
  std::vector<long> idx(u.size());
  std::iota(idx.begin(), idx.end(), 0L);
  std::sort(idx.begin(), idx.end(), [&](long a, long b) {
    if (u[a] != u[b]) return u[a] < u[b];
    return a < b;
  });
  return idx;
}

}  // namespace

WeightClass WeightClass::from_values(const std::vector<double>& values,
                                     double cell_measure) {
  if (values.empty())
    throw std::invalid_argument("weight class: needs at least one value");
  if (!(cell_measure > 0.0))
    throw std::invalid_argument("weight class: cell measure must be positive");
  std::vector<std::pair<double, long>> entries;
  entries.reserve(values.size());
  for (double v : values) entries.emplace_back(v, 1L);
  WeightClass cls;
  cls.entries = canonicalize(std::move(entries));
  cls.total_cells = static_cast<long>(values.size());
  cls.cell_measure = cell_measure;
  return cls;
}

WeightClass WeightClass::from_fractions(
    const std::vector<std::pair<double, double>>& value_fraction,
    long total_cells, double cell_measure) {
  if (value_fraction.empty())
    throw std::invalid_argument("weight class: needs at least one entry");
  if (total_cells < 1)
    throw std::invalid_argument("weight class: total cell count must be >= 1");
  if (!(cell_measure > 0.0))
    throw std::invalid_argument("weight class: cell measure must be positive");
  double fsum = 0.0;
  for (const auto& [v, f] : value_fraction) {
    (void)v;
    if (f < 0.0) throw std::invalid_argument("weight class: negative fraction");
    fsum += f;
  }
  if (std::abs(fsum - 1.0) > 1e-9)
    throw std::invalid_argument("weight class: fractions must sum to 1");

  // largest-remainder apportionment of total_cells among the entries
  const size_t k = value_fraction.size();
  std::vector<long> counts(k);
  std::vector<std::pair<double, size_t>> remainders(k);
  long assigned = 0;
  for (size_t i = 0; i < k; ++i) {
    const double quota = value_fraction[i].second * static_cast<double>(total_cells);
    counts[i] = static_cast<long>(std::floor(quota));
    remainders[i] = {quota - std::floor(quota), i};
    assigned += counts[i];
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (long r = 0; r < total_cells - assigned; ++r)
    counts[remainders[static_cast<size_t>(r) % k].second] += 1;

  std::vector<std::pair<double, long>> entries;
  for (size_t i = 0; i < k; ++i)
    if (counts[i] > 0) entries.emplace_back(value_fraction[i].first, counts[i]);
  WeightClass cls;
  cls.entries = canonicalize(std::move(entries));
  cls.total_cells = total_cells;
  cls.cell_measure = cell_measure;
  return cls;
}

std::vector<double> WeightClass::expanded_desc() const {
  std::vector<double> out;
  out.reserve(static_cast<size_t>(total_cells));
  for (const auto& [v, c] : entries)
    for (long i = 0; i < c; ++i) out.push_back(v);
  return out;
}

double WeightClass::mass() const {
  double m = 0.0;
  for (const auto& [v, c] : entries) m += v * static_cast<double>(c);
  return m * cell_measure;
}

double WeightClass::max_value() const {
  if (entries.empty()) throw std::logic_error("weight class: empty");
  return entries.front().first;
}

double StepFunction::value_at(double sigma) const {
  if (values.empty()) throw std::logic_error("step function: empty");
  long k = static_cast<long>(sigma / step);
  const long last = static_cast<long>(values.size()) - 1;
  k = std::clamp(k, 0L, last);
  // align with the computed breakpoints so value_at(k*step) hits values[k]
  while (k < last && sigma >= static_cast<double>(k + 1) * step) ++k;
  while (k > 0 && sigma < static_cast<double>(k) * step) --k;
  return values[static_cast<size_t>(k)];
}

double distribution_function(const CellFunction& f, double t) {
  long count = 0;
  for (long i = 0; i < f.values.size(); ++i)
    if (f.values[i] > t) ++count;
  return f.grid->cell_measure() * static_cast<double>(count);
}

StepFunction decreasing_rearrangement(const CellFunction& f) {
  StepFunction sf;
  sf.values = sorted_desc(f.values);
  sf.step = f.grid->cell_measure();
  return sf;
}

bool equimeasurable(const CellFunction& f, const CellFunction& g) {
  require_same_grid(f, g);
  return sorted_desc(f.values) == sorted_desc(g.values);
}

bool majorizes(const CellFunction& f, const CellFunction& g) {
  require_same_grid(f, g);
  const std::vector<double> fs = sorted_desc(f.values);
  const std::vector<double> gs = sorted_desc(g.values);
  double pf = 0.0, pg = 0.0;
  for (size_t i = 0; i < fs.size(); ++i) {
    pf += fs[i];
    pg += gs[i];
    if (pg > pf + 1e-12) return false;
  }
  return std::abs(pf - pg) <= 1e-12;
}

CellFunction linear_maximize(const WeightClass& cls, const CellFunction& u) {
  if (cls.total_cells != u.values.size())
    throw std::invalid_argument("linear_maximize: class size does not match grid");
  const std::vector<long> idx = order_by_value(u.values);
  const std::vector<double> vals = cls.expanded_desc();  // descending
  CellFunction rho = CellFunction::zero(u.grid);
  const size_t n = idx.size();
  for (size_t r = 0; r < n; ++r)  // smallest u gets smallest value
    rho.values[idx[r]] = vals[n - 1 - r];
  return rho;
}

CellFunction linear_minimize(const WeightClass& cls, const CellFunction& u) {
  if (cls.total_cells != u.values.size())
    throw std::invalid_argument("linear_minimize: class size does not match grid");
  const std::vector<long> idx = order_by_value(u.values);
  const std::vector<double> vals = cls.expanded_desc();
  CellFunction rho = CellFunction::zero(u.grid);
  for (size_t r = 0; r < idx.size(); ++r)  // smallest u gets largest value
    rho.values[idx[r]] = vals[r];
  return rho;
}

CellFunction steiner_symmetrize(const CellFunction& u) {
  const Grid& g = *u.grid;
  if (!g.steiner())
    throw std::logic_error("steiner_symmetrize: grid has no symmetry axis");
  const int axis = g.steiner()->axis;
  CellFunction out = CellFunction::zero(u.grid);

  const long lines = (g.dim() == 1) ? 1 : (axis == 0 ? g.ny() : g.nx());
  for (long line = 0; line < lines; ++line) {
    // collect active cells on this line with their coordinate along the axis
    std::vector<long> cells;   // active indices
    std::vector<double> pos;   // coordinate along the axis
    const long len = (axis == 0) ? g.nx() : g.ny();
    for (long t = 0; t < len; ++t) {
      const long ix = (axis == 0) ? t : line;
      const long iy = (axis == 0) ? line : t;
      const long a = g.active_at(ix, iy);
      if (a < 0) continue;
      cells.push_back(a);
      pos.push_back(g.cell_center(a)[axis]);
    }
    if (cells.empty()) continue;

    const double center =
        std::accumulate(pos.begin(), pos.end(), 0.0) / static_cast<double>(pos.size());
    std::vector<size_t> order(cells.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
      const double da = std::abs(pos[a] - center), db = std::abs(pos[b] - center);
      if (da != db) return da < db;
      return pos[a] > pos[b];  // ties toward the positive side
    });

    std::vector<double> vals;
    vals.reserve(cells.size());
    for (long c : cells) vals.push_back(u.values[c]);
    std::sort(vals.begin(), vals.end(), std::greater<double>());
    for (size_t r = 0; r < order.size(); ++r)
      out.values[cells[order[r]]] = vals[r];
  }
  return out;
}

double symmetry_error(const CellFunction& u) {
  const CellFunction s = steiner_symmetrize(u);
  return (u.values - s.values).lpNorm<Eigen::Infinity>();
}

}  // namespace fracopt
