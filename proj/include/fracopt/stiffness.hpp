#pragma once

#include <Eigen/Dense>
#include <memory>

#include "fracopt/grid.hpp"

namespace fracopt {

struct KernelParams {
  double s = 0.5;          // fractional order, in (0,1)
  int dim = 1;             // must match the grid
  double normalization = 1.0;  // kernel constant; only 1 is supported
};

// Discrete H^s_0 inner product over the active cells. The matrix realizes
// a(u,v) = 1/2 sum_{i!=j} W_ij (u_i-u_j)(v_i-v_j) + sum_i E_i u_i v_i with
// W_ij >= 0 and the exterior coupling E_i folded into the diagonal, so A is
// symmetric, strictly diagonally dominant, and positive definite with
// non-positive off-diagonal entries.
class StiffnessOperator {
 public:
  StiffnessOperator(std::shared_ptr<const Grid> grid, KernelParams params);

  const Eigen::MatrixXd& matrix() const { return A_; }
  const std::shared_ptr<const Grid>& grid() const { return grid_; }
  const KernelParams& params() const { return params_; }

  CellFunction apply(const CellFunction& u) const;
  double norm_sq(const CellFunction& u) const;  // u' A u

 private:
  std::shared_ptr<const Grid> grid_;
  KernelParams params_;
  Eigen::MatrixXd A_;
};

StiffnessOperator assemble(std::shared_ptr<const Grid> grid,
                           KernelParams params);

}  // namespace fracopt
