#include "fracopt/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace fracopt {

namespace {

// Implicit-shift QL for a symmetric tridiagonal matrix. d holds the diagonal
// and returns the eigenvalues (unsorted); e holds the n-1 subdiagonal
// couplings and is destroyed. When z is non-null it must come in as the
// identity and leaves with the eigenvectors in its columns.
void tridiag_ql(std::vector<double>& d, std::vector<double>& e,
                Eigen::MatrixXd* z) {
  const int n = static_cast<int>(d.size());
  if (n <= 1) return;
  e.resize(static_cast<size_t>(n), 0.0);
  const double eps = std::numeric_limits<double>::epsilon();
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m = l;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd + 1e-300) break;
      }
      if (m == l) break;
      if (iter++ == 100)
        throw std::runtime_error("tridiagonal eigensolver: QL did not converge");
      double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
      double r = std::hypot(g, 1.0);
      g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
      double s = 1.0, c = 1.0, p = 0.0;
      bool early = false;
      for (int i = m - 1; i >= l; --i) {
        double f = s * e[i];
        const double bb = c * e[i];
        r = std::hypot(f, g);
        e[i + 1] = r;
        if (r == 0.0) {
          d[i + 1] -= p;
          e[m] = 0.0;
          early = true;
          break;
        }
        s = f / r;
        c = g / r;
        g = d[i + 1] - p;
        r = (d[i] - g) * s + 2.0 * c * bb;
        p = s * r;
        d[i + 1] = g + p;
        g = c * r - bb;
        if (z) {
          for (int k = 0; k < z->rows(); ++k) {
            f = (*z)(k, i + 1);
            (*z)(k, i + 1) = s * (*z)(k, i) + c * f;
            (*z)(k, i) = c * (*z)(k, i) - s * f;
          }
        }
      }
      if (early) continue;
      d[l] -= p;
      e[l] = g;
      e[m] = 0.0;
    } while (m != l);
  }
}

double top_eigenvalue(std::vector<double> d, std::vector<double> e) {
  tridiag_ql(d, e, nullptr);
  return *std::max_element(d.begin(), d.end());
}

// top Ritz pair of the current tridiagonal: value plus coefficient vector
void top_pair(std::vector<double> d, std::vector<double> e, double& theta,
              Eigen::VectorXd& s) {
  const int m = static_cast<int>(d.size());
  Eigen::MatrixXd z = Eigen::MatrixXd::Identity(m, m);
  tridiag_ql(d, e, &z);
  int best = 0;
  for (int i = 1; i < m; ++i)
    if (d[static_cast<size_t>(i)] > d[static_cast<size_t>(best)]) best = i;
  theta = d[static_cast<size_t>(best)];
  s = z.col(best);
}

// cyclic Jacobi eigendecomposition of a symmetric matrix
void jacobi_eigs(Eigen::MatrixXd C, Eigen::VectorXd& evals,
                 Eigen::MatrixXd& evecs) {
  const int n = static_cast<int>(C.rows());
  evecs = Eigen::MatrixXd::Identity(n, n);
  const double fro = std::max(C.norm(), 1e-300);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += 2.0 * C(p, q) * C(p, q);
    if (std::sqrt(off) <= 1e-14 * fro) {
      evals = C.diagonal();
      return;
    }
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) {
        const double apq = C(p, q);
        if (std::abs(apq) < 1e-300) continue;
        const double tau = (C(q, q) - C(p, p)) / (2.0 * apq);
        const double t =
            std::copysign(1.0, tau) / (std::abs(tau) + std::hypot(tau, 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {  // rows p,q <- J^T applied on the left
          const double cpk = C(p, k), cqk = C(q, k);
          C(p, k) = c * cpk - s * cqk;
          C(q, k) = s * cpk + c * cqk;
        }
        for (int k = 0; k < n; ++k) {  // columns p,q <- J on the right
          const double ckp = C(k, p), ckq = C(k, q);
          C(k, p) = c * ckp - s * ckq;
          C(k, q) = s * ckp + c * ckq;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = evecs(k, p), vkq = evecs(k, q);
          evecs(k, p) = c * vkp - s * vkq;
          evecs(k, q) = s * vkp + c * vkq;
        }
      }
  }
  throw std::runtime_error("dense spectrum: Jacobi sweeps did not converge");
}

void orient_positive(Eigen::VectorXd& u) {
  if (u.sum() < 0.0) u = -u;
}

}  // namespace

ConvergenceError::ConvergenceError(double best_residual_, int iterations_)
    : std::runtime_error("eigensolver: pencil residual tolerance not met"),
      best_residual(best_residual_),
      iterations(iterations_) {}

PencilSolver::PencilSolver(const StiffnessOperator& op) : op_(&op) {
  llt_.compute(op.matrix());
  if (llt_.info() != Eigen::Success)
    throw std::runtime_error("eigensolver: stiffness matrix is not positive definite");
}

EigenResult PencilSolver::solve_mu1(const CellFunction& rho, double tol,
                                    int max_iter) const {
  if (rho.grid != op_->grid())
    throw std::invalid_argument("eigensolver: weight lives on a different grid");
  if (!(tol > 0.0))
    throw std::invalid_argument("eigensolver: tolerance must be positive");
  if (max_iter < 1)
    throw std::invalid_argument("eigensolver: iteration cap must be >= 1");

  EigenResult res;
  res.eigenfunction = CellFunction::zero(rho.grid);
  if ((rho.values.array() <= 0.0).all()) return res;  // no positive eigenvalue

  const int n = rho.size();
  const Eigen::VectorXd b = rho.values * rho.grid->cell_measure();
  auto L = llt_.matrixL();
  auto U = llt_.matrixU();
  auto apply_reduced = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd z = U.solve(x);
    z.array() *= b.array();
    return Eigen::VectorXd(L.solve(z));
  };

  const int mcap = std::min(n, 600);
  Eigen::MatrixXd V(n, mcap);
  std::vector<double> alpha, beta;
  std::mt19937_64 rng(0x2545F4914F6CDD1Dull);
  std::normal_distribution<double> gauss;
  auto fresh_direction = [&](int mcur) -> std::optional<Eigen::VectorXd> {
    for (int attempt = 0; attempt < 8; ++attempt) {
      Eigen::VectorXd w(n);
      for (int i = 0; i < n; ++i) w[i] = gauss(rng);
      for (int pass = 0; pass < 2 && mcur > 0; ++pass)
        w -= V.leftCols(mcur) * (V.leftCols(mcur).transpose() * w);
      const double nw = w.norm();
      if (nw > 1e-8) return Eigen::VectorXd(w / nw);
    }
    return std::nullopt;
  };

  int iters = 0;
  double best_resid = std::numeric_limits<double>::infinity();
  Eigen::VectorXd restart_seed;
  bool done = false;
  double theta = 0.0, final_resid = 0.0;
  Eigen::VectorXd u;

  while (!done) {
    alpha.clear();
    beta.clear();
    Eigen::VectorXd v =
        restart_seed.size() ? restart_seed : *fresh_direction(0);
    int mcur = 0;
    double theta_prev = std::numeric_limits<double>::quiet_NaN();

    while (!done) {
      V.col(mcur) = v;
      Eigen::VectorXd w = apply_reduced(v);
      ++iters;
      const double a = v.dot(w);
      alpha.push_back(a);
      w -= a * v;
      if (mcur > 0) w -= beta[static_cast<size_t>(mcur - 1)] * V.col(mcur - 1);
      for (int pass = 0; pass < 2; ++pass)
        w -= V.leftCols(mcur + 1) * (V.leftCols(mcur + 1).transpose() * w);
      const double bnorm = w.norm();
      ++mcur;

      const bool space_full = (mcur >= n);
      const bool breakdown = (bnorm < 1e-13) || space_full;
      const bool boundary =
          (mcur == mcap) || (iters >= max_iter) || (breakdown && space_full);

      const double th = top_eigenvalue(alpha, beta);
      const bool stabilized =
          std::isfinite(theta_prev) &&
          std::abs(th - theta_prev) <= 1e-2 * tol * std::max(std::abs(th), 1e-300);
      theta_prev = th;

      if (stabilized || boundary || mcur % 64 == 0) {
        Eigen::VectorXd s;
        top_pair(alpha, beta, theta, s);
        const Eigen::VectorXd y = V.leftCols(mcur) * s;
        u = U.solve(y);
        const Eigen::VectorXd Bu = b.cwiseProduct(u);
        const Eigen::VectorXd Au = L * y;  // A L^{-T} y = L y
        final_resid = (Bu - theta * Au).lpNorm<Eigen::Infinity>();
        const double scale = Bu.lpNorm<Eigen::Infinity>();
        best_resid = std::min(best_resid, final_resid);
        if (final_resid <= tol * scale) {
          done = true;
          break;
        }
        restart_seed = y;  // best approximation so far
      }

      if (iters >= max_iter) throw ConvergenceError(best_resid, iters);

      if (breakdown) {
        if (space_full) throw ConvergenceError(best_resid, iters);
        auto nv = fresh_direction(mcur);
        if (!nv) throw ConvergenceError(best_resid, iters);
        beta.push_back(0.0);
        v = *nv;
      } else if (mcur == mcap) {
        break;  // restart from the current Ritz approximation
      } else {
        beta.push_back(bnorm);
        v = w / bnorm;
      }
    }
  }

  if (!(theta > 0.0))
    throw std::runtime_error(
        "eigensolver: weight has a positive part but the top pencil "
        "eigenvalue came out nonpositive (internal inconsistency)");

  orient_positive(u);
  res.mu1_tilde = theta;
  res.lambda = 1.0 / theta;
  res.eigenfunction = CellFunction(rho.grid, u);
  res.residual = final_resid;
  res.iterations = iters;
  return res;
}

EigenResult PencilSolver::solve_lambda_neg1(const CellFunction& rho,
                                            double tol, int max_iter) const {
  if (rho.grid != op_->grid())
    throw std::invalid_argument("eigensolver: weight lives on a different grid");
  EigenResult res;
  res.eigenfunction = CellFunction::zero(rho.grid);
  if ((rho.values.array() >= 0.0).all()) return res;  // no negative eigenvalue
  EigenResult flip =
      solve_mu1(CellFunction(rho.grid, -rho.values), tol, max_iter);
  flip.lambda = -(1.0 / flip.mu1_tilde);
  return flip;
}

double PencilSolver::gateaux_differential(const CellFunction& rho,
                                          const CellFunction& v,
                                          double tol) const {
  require_same_grid(rho, v);
  const EigenResult r = solve_mu1(rho, tol);
  if (r.mu1_tilde == 0.0)
    throw std::domain_error(
        "gateaux differential: mu1 vanishes here, the map is not "
        "differentiable");
  const Eigen::VectorXd& u = r.eigenfunction.values;
  return rho.grid->cell_measure() * u.array().square().matrix().dot(v.values);
}

EigenResult solve_mu1(const StiffnessOperator& op, const CellFunction& rho,
                      double tol, int max_iter) {
  return PencilSolver(op).solve_mu1(rho, tol, max_iter);
}

EigenResult solve_lambda_neg1(const StiffnessOperator& op,
                              const CellFunction& rho, double tol,
                              int max_iter) {
  return PencilSolver(op).solve_lambda_neg1(rho, tol, max_iter);
}

double gateaux_differential(const StiffnessOperator& op,
                            const CellFunction& rho, const CellFunction& v,
                            double tol) {
  return PencilSolver(op).gateaux_differential(rho, v, tol);
}

std::vector<PencilPair> dense_spectrum(const StiffnessOperator& op,
                                       const CellFunction& rho, int k) {
  if (rho.grid != op.grid())
    throw std::invalid_argument("dense spectrum: weight lives on a different grid");
  const int n = rho.size();
  if (n > 512)
    throw std::length_error("dense spectrum: more than 512 active cells");

  Eigen::LLT<Eigen::MatrixXd> llt(op.matrix());
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("dense spectrum: stiffness matrix is not positive definite");
  const Eigen::VectorXd b = rho.values * rho.grid->cell_measure();

  Eigen::MatrixXd X = llt.matrixL().solve(Eigen::MatrixXd(b.asDiagonal()));
  Eigen::MatrixXd C = llt.matrixL().solve(X.transpose()).transpose();
  C = (0.5 * (C + C.transpose())).eval();

  Eigen::VectorXd evals;
  Eigen::MatrixXd Y;
  jacobi_eigs(std::move(C), evals, Y);

  std::vector<int> order(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
  std::sort(order.begin(), order.end(),
            [&](int a, int bb) { return evals[a] > evals[bb]; });

  auto make_pair = [&](int col) {
    PencilPair p;
    p.mu = evals[col];
    Eigen::VectorXd u = llt.matrixU().solve(Y.col(col));
    orient_positive(u);
    p.u = CellFunction(rho.grid, std::move(u));
    return p;
  };

  std::vector<PencilPair> out;
  if (k <= 0 || 2 * k >= n) {
    out.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) out.push_back(make_pair(order[static_cast<size_t>(i)]));
  } else {
    out.reserve(static_cast<size_t>(2 * k));
    for (int i = 0; i < k; ++i) out.push_back(make_pair(order[static_cast<size_t>(i)]));
    for (int i = n - k; i < n; ++i) out.push_back(make_pair(order[static_cast<size_t>(i)]));
  }
  return out;
}

double spectral_gap(const StiffnessOperator& op, const CellFunction& rho) {
  const auto spec = dense_spectrum(op, rho, 0);
  if (spec.size() < 2)
    throw std::invalid_argument("spectral gap: need at least two cells");
  return spec[0].mu - spec[1].mu;
}

}  // namespace fracopt
