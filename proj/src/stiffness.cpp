#include "fracopt/stiffness.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace fracopt {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kPad = 3;  // phantom-cell margin around the lattice (2D)

// stable (b^e - a^e)/e for 0 < a <= b, continuous through e = 0 where it
// equals log(b/a)
double pow_diff(double a, double b, double e) {
  if (e == 0.0) return std::log(b / a);
  return (std::expm1(e * std::log(b)) - std::expm1(e * std::log(a))) / e;
}

// integral of r^{p-1-sigma} over (a,b)
double radial_moment(double a, double b, int p, double sigma) {
  return pow_diff(a, b, static_cast<double>(p) - sigma);
}

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      const double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
  }
}

// integral of f over (0,1) by tanh-sinh nodes; tolerates an algebraic
// singularity at t = 0
template <class F>
double tanh_sinh01(F&& f) {
  const double h = 0.08;
  double sum = 0.0;
  for (int j = -50; j <= 50; ++j) {
    const double v = h * j;
    const double u = (kPi / 2.0) * std::sinh(v);
    const double t = 1.0 / (1.0 + std::exp(-2.0 * u));
    const double tm = 1.0 / (1.0 + std::exp(2.0 * u));  // 1 - t, accurately
    const double w = 2.0 * t * tm * (kPi / 2.0) * std::cosh(v) * h;
    if (w < 1e-300) continue;
    sum += w * f(t);
  }
  return sum;
}

// kernel mass of the quadrant {x > a, y > b} (a,b > 0):
// (1/sigma) * int_0^{pi/2} max(a/cos t, b/sin t)^{-sigma} dt, split at the
// kink and written so the endpoint behavior t^sigma is explicit
double corner_integral(double a, double b, double sigma) {
  const double phi = std::atan2(b, a);
  auto lo = [&](double t) { return std::pow(std::sin(phi * t) / b, sigma); };
  auto hi = [&](double t) {
    return std::pow(std::sin((kPi / 2.0 - phi) * t) / a, sigma);
  };
  return (phi * tanh_sinh01(lo) + (kPi / 2.0 - phi) * tanh_sinh01(hi)) / sigma;
}

// ---------------------------------------------------------------------------
// 1D rows, lattice units. Offsets |z| < 1 use the quadratic-interpolation
// moment of the symmetrized second difference (the principal value survives
// the singularity), |z| in (1,2) piecewise-linear interpolation between
// lattice values, |z| in (2,2.5) the exact kernel mass collocated at the
// distance-2 neighbor. Couplings beyond distance 2 are therefore pure
// midpoint quadrature starting at |z| = 2.5, and the exterior beyond the
// lattice closes with the exact power-law tail.
Eigen::MatrixXd assemble_1d(const Grid& g, double sigma) {
  const int n = g.active_count();
  const int nx = g.nx();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);

  const double P12 = radial_moment(1.0, 2.0, 0, sigma);
  const double Q12 = radial_moment(1.0, 2.0, 1, sigma);
  const double P22 = radial_moment(2.0, 2.5, 0, sigma);
  const std::array<double, 2> omega = {
      1.0 / (2.0 - sigma) + 2.0 * P12 - Q12,
      (Q12 - P12) + P22};

  std::vector<double> far(static_cast<size_t>(nx) + 1, 0.0);
  for (int k = 3; k <= nx; ++k)
    far[static_cast<size_t>(k)] = std::pow(static_cast<double>(k), -1.0 - sigma);

  for (int a = 0; a < n; ++a) {
    const int ix = g.cell_coords(a)[0];
    double diag = 0.0;

    for (int k = 1; k <= 2; ++k) {
      diag += 2.0 * omega[static_cast<size_t>(k - 1)];
      for (int side : {-1, 1}) {
        const int t = g.active_at(ix + side * k, 0);
        if (t >= 0) A(a, t) -= omega[static_cast<size_t>(k - 1)];
      }
    }
    for (int k = 3; k <= nx - 1 - ix; ++k) {  // midpoint cells, right side
      diag += far[static_cast<size_t>(k)];
      const int t = g.active_at(ix + k, 0);
      if (t >= 0) A(a, t) -= far[static_cast<size_t>(k)];
    }
    for (int k = 3; k <= ix; ++k) {  // midpoint cells, left side
      diag += far[static_cast<size_t>(k)];
      const int t = g.active_at(ix - k, 0);
      if (t >= 0) A(a, t) -= far[static_cast<size_t>(k)];
    }
    const double tau_r = std::max(nx - 1 - ix + 0.5, 2.5);
    const double tau_l = std::max(ix + 0.5, 2.5);
    diag += (std::pow(tau_r, -sigma) + std::pow(tau_l, -sigma)) / sigma;

    A(a, a) = diag;
  }
  return A;
}

// kernel mass of an axis-aligned rectangle away from the origin, by tensor
// Gauss quadrature
double rect_mass(double x0, double x1, double y0, double y1, double sigma,
                 const std::vector<double>& gx, const std::vector<double>& gw) {
  const double cx = 0.5 * (x0 + x1), ex = 0.5 * (x1 - x0);
  const double cy = 0.5 * (y0 + y1), ey = 0.5 * (y1 - y0);
  double sum = 0.0;
  for (size_t i = 0; i < gx.size(); ++i) {
    const double x = cx + ex * gx[i];
    for (size_t j = 0; j < gx.size(); ++j) {
      const double y = cy + ey * gx[j];
      sum += gw[i] * gw[j] *
             std::pow(x * x + y * y, -(2.0 + sigma) / 2.0);
    }
  }
  return sum * ex * ey;
}

// ---------------------------------------------------------------------------
// 2D near-field weights, lattice units, couplings confined to offsets within
// center distance 2. The unit disk is handled by the rotational average of
// the symmetrized second difference, which lands on the four axis neighbors.
// The square [-1,1]^2 minus that disk uses bilinear node interpolation
// integrated exactly in r along rays and by Gauss panels in the angle over
// one octant, unfolded through the eight dihedral images. The half-cell ring
// out to 1.5 and the four (+-2,0)/(0,+-2) cells get their exact kernel mass
// collocated at the owning node, so everything farther is pure midpoint
// quadrature.
struct PatchWeights {
  double axis = 0.0;        // coefficient of each axis second difference
  double nu[5][5] = {{0}};  // spill weights for node offsets -2..2 (x + 2, y + 2)
};

PatchWeights patch_weights(double sigma) {
  PatchWeights pw;
  pw.axis = (kPi / 2.0) / (2.0 - sigma);

  double oct[2][2] = {{0}};
  std::vector<double> gx, gw;
  gauss_legendre(16, gx, gw);
  const int panels = 8;

  for (int p = 0; p < panels; ++p) {
    const double plo = (kPi / 4.0) * p / panels;
    const double phi = (kPi / 4.0) * (p + 1) / panels;
    for (size_t q = 0; q < gx.size(); ++q) {
      const double theta = 0.5 * (plo + phi) + 0.5 * (phi - plo) * gx[q];
      const double wt = 0.5 * (phi - plo) * gw[q];
      const double c = std::cos(theta), s = std::sin(theta);
      const double rhi = 1.0 / c;  // the unit-box edge; rays stay in [0,1]^2
      if (!(rhi > 1.0)) continue;
      const double I0 = radial_moment(1.0, rhi, 0, sigma);
      const double I1 = radial_moment(1.0, rhi, 1, sigma);
      const double I2 = radial_moment(1.0, rhi, 2, sigma);
      for (int bx = 0; bx < 2; ++bx) {
        const double Ax = bx ? 0.0 : 1.0;  // hats 1-x and x on [0,1]
        const double Bx = bx ? c : -c;
        for (int by = 0; by < 2; ++by) {
          const double Ay = by ? 0.0 : 1.0;
          const double By = by ? s : -s;
          const double coef =
              Ax * Ay * I0 + (Ax * By + Ay * Bx) * I1 + Bx * By * I2;
          oct[bx][by] += wt * coef;
        }
      }
    }
  }

  // unfold: weight of node d is the sum of the octant weights over all eight
  // dihedral images of d (duplicates intended -- the sum runs over group
  // elements)
  auto lookup = [&](int p, int q) {
    return (p >= 0 && p <= 1 && q >= 0 && q <= 1) ? oct[p][q] : 0.0;
  };
  for (int dx = -1; dx <= 1; ++dx)
    for (int dy = -1; dy <= 1; ++dy) {
      if (dx == 0 && dy == 0) continue;
      double tot = 0.0;
      tot += lookup(dx, dy) + lookup(-dx, dy) + lookup(dx, -dy) +
             lookup(-dx, -dy);
      tot += lookup(dy, dx) + lookup(-dy, dx) + lookup(dy, -dx) +
             lookup(-dy, -dx);
      pw.nu[dx + 2][dy + 2] = tot;
    }

  // constant-in-u closures: the ring [-1.5,1.5]^2 minus [-1,1]^2 owned by the
  // eight surrounding nodes, and the full cells of the two-step axis
  // neighbors
  gauss_legendre(24, gx, gw);
  const double strip = rect_mass(1.0, 1.5, -0.5, 0.5, sigma, gx, gw);
  const double corner = rect_mass(1.0, 1.5, 0.5, 1.5, sigma, gx, gw) +
                        rect_mass(0.5, 1.0, 1.0, 1.5, sigma, gx, gw);
  const double axis2 = rect_mass(1.5, 2.5, -0.5, 0.5, sigma, gx, gw);
  for (auto [dx, dy] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
    pw.nu[dx + 2][dy + 2] += strip;
    pw.nu[2 * dx + 2][2 * dy + 2] += axis2;
  }
  for (auto [dx, dy] : {std::pair{1, 1}, {-1, 1}, {1, -1}, {-1, -1}})
    pw.nu[dx + 2][dy + 2] += corner;
  return pw;
}

Eigen::MatrixXd assemble_2d(const Grid& g, double sigma) {
  const int n = g.active_count();
  const int nx = g.nx(), ny = g.ny();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  const PatchWeights pw = patch_weights(sigma);

  // midpoint kernel values memoized by integer squared distance
  const int maxr2 = (nx + 2 * kPad) * (nx + 2 * kPad) +
                    (ny + 2 * kPad) * (ny + 2 * kPad);
  std::vector<double> tab(static_cast<size_t>(maxr2) + 1, -1.0);
  auto kern = [&](int r2) {
    double& v = tab[static_cast<size_t>(r2)];
    if (v < 0.0)
      v = std::pow(static_cast<double>(r2), -(2.0 + sigma) / 2.0);
    return v;
  };

  const double chalf = std::sqrt(kPi) * std::tgamma((sigma + 1.0) / 2.0) /
                       std::tgamma(sigma / 2.0 + 1.0);

  for (int a = 0; a < n; ++a) {
    const auto [ix, iy] = g.cell_coords(a);
    double diag = 0.0;

    // singular disk: axis second differences
    diag += 4.0 * pw.axis;
    for (auto [dx, dy] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
      const int t = g.active_at(ix + dx, iy + dy);
      if (t >= 0) A(a, t) -= pw.axis;
    }
    // annulus spill weights
    for (int dx = -2; dx <= 2; ++dx)
      for (int dy = -2; dy <= 2; ++dy) {
        const double nu = pw.nu[dx + 2][dy + 2];
        if (nu == 0.0) continue;
        diag += nu;
        const int t = g.active_at(ix + dx, iy + dy);
        if (t >= 0) A(a, t) -= nu;
      }
    // midpoint far field over the padded lattice (patch cells excluded)
    for (int qy = -kPad; qy < ny + kPad; ++qy)
      for (int qx = -kPad; qx < nx + kPad; ++qx) {
        const int dx = qx - ix, dy = qy - iy;
        const int ax = std::abs(dx), ay = std::abs(dy);
        if (std::max(ax, ay) <= 1) continue;
        if ((ax == 2 && ay == 0) || (ax == 0 && ay == 2)) continue;
        const double cf = kern(dx * dx + dy * dy);
        diag += cf;
        const int t = g.active_at(qx, qy);
        if (t >= 0) A(a, t) -= cf;
      }
    // beyond the padded box: four half-planes minus the corner overlaps,
    // which tiles the remaining exterior exactly
    const double dl = ix + 0.5 + kPad;
    const double dr = nx + kPad - ix - 0.5;
    const double db = iy + 0.5 + kPad;
    const double dt = ny + kPad - iy - 0.5;
    diag += (chalf / sigma) * (std::pow(dl, -sigma) + std::pow(dr, -sigma) +
                               std::pow(db, -sigma) + std::pow(dt, -sigma));
    diag -= corner_integral(dl, db, sigma) + corner_integral(dl, dt, sigma) +
            corner_integral(dr, db, sigma) + corner_integral(dr, dt, sigma);

    A(a, a) = diag;
  }
  return A;
}

}  // namespace

StiffnessOperator::StiffnessOperator(std::shared_ptr<const Grid> grid,
                                     KernelParams params)
    : grid_(std::move(grid)), params_(params) {
  if (!grid_) throw std::invalid_argument("stiffness: grid is null");
  if (!(params_.s > 0.0 && params_.s < 1.0))
    throw std::invalid_argument("stiffness: order s must lie in (0,1)");
  if (params_.normalization != 1.0)
    throw std::invalid_argument("stiffness: kernel normalization must be 1");
  if (params_.dim != grid_->dim())
    throw std::invalid_argument("stiffness: dimension does not match grid");

  const double sigma = 2.0 * params_.s;
  A_ = (grid_->dim() == 1) ? assemble_1d(*grid_, sigma)
                           : assemble_2d(*grid_, sigma);
  A_ *= 2.0 * std::pow(grid_->h(), grid_->dim() - sigma);
  A_ = (0.5 * (A_ + A_.transpose())).eval();
}

CellFunction StiffnessOperator::apply(const CellFunction& u) const {
  if (u.grid != grid_)
    throw std::invalid_argument("stiffness: cell function lives on a different grid");
  return CellFunction(grid_, A_ * u.values);
}

double StiffnessOperator::norm_sq(const CellFunction& u) const {
  if (u.grid != grid_)
    throw std::invalid_argument("stiffness: cell function lives on a different grid");
  return u.values.dot(A_ * u.values);
}

StiffnessOperator assemble(std::shared_ptr<const Grid> grid,
                           KernelParams params) {
  return StiffnessOperator(std::move(grid), params);
}

}  // namespace fracopt
