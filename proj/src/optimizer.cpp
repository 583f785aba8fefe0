#include "fracopt/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace fracopt {

namespace {

double sym_err_or_nan(const CellFunction& f) {
  if (!f.grid->steiner()) return std::numeric_limits<double>::quiet_NaN();
  return symmetry_error(f);
}

int count_changed(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  int c = 0;
  for (int i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) ++c;
  return c;
}

void require_class_fits(const WeightClass& cls, const Grid& g,
                        const char* who) {
  if (cls.total_cells != g.active_count())
    throw std::invalid_argument(std::string(who) +
                                ": class size does not match the grid");
}

CellFunction shuffled_layout(const std::shared_ptr<const Grid>& grid,
                             const WeightClass& cls,
                             unsigned long long seed) {
  std::vector<double> vals = cls.expanded_desc();
  std::mt19937_64 rng(seed);
  std::shuffle(vals.begin(), vals.end(), rng);
  CellFunction rho = CellFunction::zero(grid);
  for (int i = 0; i < rho.size(); ++i) rho.values[i] = vals[static_cast<size_t>(i)];
  return rho;
}

struct RunOutcome {
  CellFunction rho;
  EigenResult eig;
  OptimizerTrace trace;
};

RunOutcome run_minimize(const PencilSolver& solver, const WeightClass& cls,
                        CellFunction rho, double tol, int max_iter,
                        double eig_tol) {
  const double m = rho.grid->cell_measure();
  RunOutcome out;
  out.trace.status = OptStatus::iteration_cap;

  double mu_prev = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < max_iter; ++k) {
    EigenResult eig = solver.solve_mu1(rho, eig_tol);
    const CellFunction& u = eig.eigenfunction;
    CellFunction next = linear_maximize(cls, u);
    const int changed = count_changed(next.values, rho.values);

    TraceRow row;
    row.iter = k;
    row.mu1 = eig.mu1_tilde;
    row.lambda1 = eig.lambda.value_or(0.0);
    row.lin_obj = m * next.values.dot(u.values.array().square().matrix());
    row.cells_changed = changed;
    row.rho_sym_err = sym_err_or_nan(rho);
    row.u_sym_err = sym_err_or_nan(u);
    out.trace.rows.push_back(row);

    const bool stalled = (k > 0) && (eig.mu1_tilde - mu_prev < tol);
    if (changed == 0 || stalled) {
      out.trace.status = OptStatus::fixed_point;
      out.rho = std::move(rho);
      out.eig = std::move(eig);
      return out;
    }
    mu_prev = eig.mu1_tilde;
    if (k + 1 == max_iter) {  // cap reached: return the last solved iterate
      out.rho = std::move(rho);
      out.eig = std::move(eig);
      return out;
    }
    rho = std::move(next);
  }
  throw std::logic_error("minimize: iteration cap must be >= 1");
}

}  // namespace

CellFunction canonical_layout(const std::shared_ptr<const Grid>& grid,
                              const WeightClass& cls) {
  require_class_fits(cls, *grid, "canonical layout");
  const int n = grid->active_count();
  double cx = 0.0, cy = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto c = grid->cell_center(i);
    cx += c[0];
    cy += c[1];
  }
  cx /= n;
  cy /= n;
  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> dist(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto c = grid->cell_center(i);
    dist[static_cast<size_t>(i)] = std::hypot(c[0] - cx, c[1] - cy);
  }
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (dist[static_cast<size_t>(a)] != dist[static_cast<size_t>(b)])
      return dist[static_cast<size_t>(a)] < dist[static_cast<size_t>(b)];
    return a < b;
  });
  const std::vector<double> vals = cls.expanded_desc();
  CellFunction rho = CellFunction::zero(grid);
  for (int r = 0; r < n; ++r)
    rho.values[order[static_cast<size_t>(r)]] = vals[static_cast<size_t>(r)];
  return rho;
}

OptimizeResult minimize_lambda1(const StiffnessOperator& op,
                                const WeightClass& cls, double tol,
                                int max_iter, int restarts,
                                unsigned long long seed) {
  require_class_fits(cls, *op.grid(), "minimize");
  if (max_iter < 1)
    throw std::invalid_argument("minimize: iteration cap must be >= 1");
  if (restarts < 1)
    throw std::invalid_argument("minimize: restart count must be >= 1");
  if (!(cls.max_value() > 0.0))
    throw InfeasibleProblem(
        "minimize: class has no positive value, every weight in it yields "
        "mu1 = 0");

  const PencilSolver solver(op);
  const double eig_tol = std::min(1e-10, tol);

  OptimizeResult best;
  best.restarts_used = restarts;
  bool have_best = false;
  std::vector<double> fp_lambdas;

  for (int r = 0; r < restarts; ++r) {
    CellFunction start =
        (r == 0) ? canonical_layout(op.grid(), cls)
                 : shuffled_layout(op.grid(), cls,
                                   seed + 1000003ull * static_cast<unsigned long long>(r));
    RunOutcome run =
        run_minimize(solver, cls, std::move(start), tol, max_iter, eig_tol);
    if (cls.single_valued()) run.trace.status = OptStatus::degenerate_class;
    if (run.trace.status != OptStatus::iteration_cap && run.eig.lambda)
      fp_lambdas.push_back(*run.eig.lambda);
    if (!have_best || run.eig.mu1_tilde > best.eig.mu1_tilde) {
      best.rho = std::move(run.rho);
      best.eig = std::move(run.eig);
      best.trace = std::move(run.trace);
      have_best = true;
    }
  }

  std::sort(fp_lambdas.begin(), fp_lambdas.end());
  for (double l : fp_lambdas) {
    if (best.fixed_point_lambdas.empty() ||
        std::abs(l - best.fixed_point_lambdas.back()) >
            1e-9 * std::max(1.0, std::abs(l)))
      best.fixed_point_lambdas.push_back(l);
  }
  return best;
}

bool verify_characterization(const CellFunction& rho, const CellFunction& u) {
  require_same_grid(rho, u);
  const int n = rho.size();
  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return u.values[a] < u.values[b]; });
  double below_max = -std::numeric_limits<double>::infinity();
  int i = 0;
  while (i < n) {
    int j = i;
    double gmin = std::numeric_limits<double>::infinity();
    double gmax = -std::numeric_limits<double>::infinity();
    while (j < n && u.values[order[static_cast<size_t>(j)]] ==
                        u.values[order[static_cast<size_t>(i)]]) {
      gmin = std::min(gmin, rho.values[order[static_cast<size_t>(j)]]);
      gmax = std::max(gmax, rho.values[order[static_cast<size_t>(j)]]);
      ++j;
    }
    if (below_max > gmin) return false;  // strict inversion found
    below_max = std::max(below_max, gmax);
    i = j;
  }
  return true;
}

BoundReport check_upper_bound(const StiffnessOperator& op,
                              const WeightClass& cls,
                              const EigenResult& minimized) {
  const double mass = cls.mass();
  if (!(mass > 0.0))
    throw std::domain_error(
        "upper bound: class mass is not positive, the estimate does not "
        "apply");
  if (!minimized.lambda)
    throw std::invalid_argument("upper bound: result carries no eigenvalue");
  const EigenResult unit = PencilSolver(op).solve_mu1(
      CellFunction::constant(op.grid(), 1.0), 1e-12);
  BoundReport rep;
  rep.bound = *unit.lambda * op.grid()->domain_measure() / mass;
  rep.satisfied = (*minimized.lambda <= rep.bound + 1e-9);
  return rep;
}

OptimizeResult maximize_lambda1_fw(const StiffnessOperator& op,
                                   const WeightClass& cls, double tol,
                                   int max_iter, const FwObserver& observer) {
  require_class_fits(cls, *op.grid(), "maximize");
  if (max_iter < 1)
    throw std::invalid_argument("maximize: iteration cap must be >= 1");
  if (!(cls.mass() > 0.0))
    throw UnboundedProblem(
        "maximize: class mass is not positive, sup lambda_1 over the class "
        "is infinite");

  const PencilSolver solver(op);
  const double eig_tol = std::min(1e-10, tol);
  const double m = op.grid()->cell_measure();

  OptimizeResult out;
  out.trace.status = OptStatus::iteration_cap;
  CellFunction rho = canonical_layout(op.grid(), cls);

  for (int k = 0; k < max_iter; ++k) {
    if (observer) observer(k, rho);
    EigenResult eig = solver.solve_mu1(rho, eig_tol);
    const Eigen::VectorXd usq = eig.eigenfunction.values.array().square();
    CellFunction direction =
        linear_minimize(cls, CellFunction(rho.grid, usq));
    const double lin = m * direction.values.dot(usq);
    const double gap = m * (rho.values - direction.values).dot(usq);

    const double gamma = 2.0 / (k + 2.0);
    Eigen::VectorXd next =
        rho.values + gamma * (direction.values - rho.values);

    TraceRow row;
    row.iter = k;
    row.mu1 = eig.mu1_tilde;
    row.lambda1 = eig.lambda.value_or(0.0);
    row.lin_obj = lin;
    row.cells_changed = (gap <= tol) ? 0 : count_changed(next, rho.values);
    row.rho_sym_err = sym_err_or_nan(rho);
    row.u_sym_err = sym_err_or_nan(eig.eigenfunction);
    out.trace.rows.push_back(row);

    if (gap <= tol) {
      out.trace.status = cls.single_valued() ? OptStatus::degenerate_class
                                             : OptStatus::fixed_point;
      out.rho = std::move(rho);
      out.eig = std::move(eig);
      return out;
    }
    if (k + 1 == max_iter) {
      out.rho = std::move(rho);
      out.eig = std::move(eig);
      return out;
    }
    rho.values = std::move(next);
  }
  throw std::logic_error("maximize: iteration cap must be >= 1");
}

SteinerReport steiner_report(const CellFunction& rho, const CellFunction& u) {
  require_same_grid(rho, u);
  SteinerReport rep;
  rep.rho_symmetry = symmetry_error(rho);
  rep.u_symmetry = symmetry_error(u);
  if (rho.grid->kind() == DomainKind::disk) {
    const int n = rho.size();
    std::vector<int> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> rad(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) rad[static_cast<size_t>(i)] = rho.grid->radius_of(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return rad[static_cast<size_t>(a)] < rad[static_cast<size_t>(b)];
    });
    double defect = 0.0;
    double inner_min = std::numeric_limits<double>::infinity();
    int i = 0;
    while (i < n) {  // walk shells of equal radius (1e-9 grouping)
      int j = i;
      double shell_min = std::numeric_limits<double>::infinity();
      double shell_max = -std::numeric_limits<double>::infinity();
      while (j < n && rad[static_cast<size_t>(order[static_cast<size_t>(j)])] <=
                          rad[static_cast<size_t>(order[static_cast<size_t>(i)])] + 1e-9) {
        const double v = rho.values[order[static_cast<size_t>(j)]];
        shell_min = std::min(shell_min, v);
        shell_max = std::max(shell_max, v);
        ++j;
      }
      if (std::isfinite(inner_min))
        defect = std::max(defect, shell_max - inner_min);
      inner_min = std::min(inner_min, shell_min);
      i = j;
    }
    rep.radial_defect = std::max(defect, 0.0);
  }
  return rep;
}

}  // namespace fracopt
