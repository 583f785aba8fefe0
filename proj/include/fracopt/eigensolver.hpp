#pragma once

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>
#include <vector>

#include "fracopt/grid.hpp"
#include "fracopt/stiffness.hpp"

namespace fracopt {

struct EigenResult {
  double mu1_tilde = 0.0;            // largest pencil eigenvalue, clamped at 0
  std::optional<double> lambda;      // 1/mu1_tilde (negated by the lambda_-1
                                     // solve); absent when mu1_tilde = 0
  CellFunction eigenfunction;        // norm_sq = 1, oriented positive; the
                                     // zero function when mu1_tilde = 0
  double residual = 0.0;             // max-norm of B u - mu A u at return
  int iterations = 0;
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(double best_residual_, int iterations_);
  double best_residual;
  int iterations;
};

// Solver for the weighted pencil B_rho u = mu A u, B_rho = diag(rho_i * cell
// measure). One Cholesky factorization of A is shared across solves; the
// eigenpair itself comes from Lanczos with full reorthogonalization on the
// reduced symmetric operator, and convergence is declared on the actual
// pencil residual, never on the Ritz value alone.
class PencilSolver {
 public:
  explicit PencilSolver(const StiffnessOperator& op);

  EigenResult solve_mu1(const CellFunction& rho, double tol = 1e-10,
                        int max_iter = 10000) const;
  // lambda_-1(rho) = -lambda_1(-rho); mu1_tilde holds mu1_tilde(-rho) and the
  // eigenfunction is the one of the reflected problem
  EigenResult solve_lambda_neg1(const CellFunction& rho, double tol = 1e-10,
                                int max_iter = 10000) const;
  // directional derivative of mu1_tilde at rho: sum_i u_i^2 v_i * measure;
  // domain_error where mu1_tilde(rho) = 0
  double gateaux_differential(const CellFunction& rho, const CellFunction& v,
                              double tol = 1e-10) const;

  const StiffnessOperator& op() const { return *op_; }

 private:
  const StiffnessOperator* op_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

EigenResult solve_mu1(const StiffnessOperator& op, const CellFunction& rho,
                      double tol = 1e-10, int max_iter = 10000);
EigenResult solve_lambda_neg1(const StiffnessOperator& op,
                              const CellFunction& rho, double tol = 1e-10,
                              int max_iter = 10000);
double gateaux_differential(const StiffnessOperator& op,
                            const CellFunction& rho, const CellFunction& v,
                            double tol = 1e-10);

struct PencilPair {
  double mu = 0.0;
  CellFunction u;
};

// Dense full-spectrum oracle: cyclic Jacobi on the explicitly reduced matrix,
// algorithmically independent of the Lanczos path. Capped at 512 active
// cells. k <= 0 (or 2k >= n) returns all eigenpairs sorted descending;
// otherwise the k largest followed by the k most negative.
std::vector<PencilPair> dense_spectrum(const StiffnessOperator& op,
                                       const CellFunction& rho, int k = 0);

// mu1 - mu2 of the pencil via the dense oracle (small n only)
double spectral_gap(const StiffnessOperator& op, const CellFunction& rho);

}  // namespace fracopt
