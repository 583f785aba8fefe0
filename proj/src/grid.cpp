#include "fracopt/grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fracopt {

namespace {

// Lattice reflection of a cell about the box midline along one axis.
int reflect_index(int i, int n) { return n - 1 - i; }

}  // namespace

void Grid::finalize() {
  if (nx_ < 1 || ny_ < 1) throw std::invalid_argument("grid: empty lattice");
  if (!(h_ > 0.0)) throw std::invalid_argument("grid: cell width must be positive");
  measure_ = (dim_ == 1) ? h_ : h_ * h_;
  index_.assign(mask_.size(), -1);
  active_.clear();
  for (size_t p = 0; p < mask_.size(); ++p) {
    if (mask_[p]) {
      index_[p] = static_cast<int>(active_.size());
      active_.push_back(static_cast<int>(p));
    }
  }
  if (active_.empty()) throw std::invalid_argument("grid: no active cells");
  if (steiner_) {
    int ax = steiner_->axis;
    for (int iy = 0; iy < ny_; ++iy)
      for (int ix = 0; ix < nx_; ++ix) {
        int rx = ax == 0 ? reflect_index(ix, nx_) : ix;
        int ry = ax == 1 ? reflect_index(iy, ny_) : iy;
        if (mask_[static_cast<size_t>(iy) * nx_ + ix] !=
            mask_[static_cast<size_t>(ry) * nx_ + rx])
          throw std::logic_error("grid: mask not symmetric about the Steiner axis");
      }
  }
}

std::shared_ptr<const Grid> Grid::interval(double a, double b, int n) {
  if (n < 1) throw std::invalid_argument("interval: cell count must be >= 1");
  if (!(a < b)) throw std::invalid_argument("interval: endpoints must satisfy a < b");
  auto g = std::shared_ptr<Grid>(new Grid);
  g->dim_ = 1;
  g->nx_ = n;
  g->ny_ = 1;
  g->h_ = (b - a) / n;
  g->lo_ = {a, 0.0};
  g->kind_ = DomainKind::interval;
  g->steiner_ = SteinerAxis{0, 0.5 * (a + b)};
  g->mask_.assign(static_cast<size_t>(n), 1);
  g->finalize();
  return g;
}

std::shared_ptr<const Grid> Grid::rectangle(double width_x, double width_y,
                                            int nx, int ny) {
  if (nx < 1 || ny < 1)
    throw std::invalid_argument("rectangle: cell counts must be >= 1");
  if (!(width_x > 0.0) || !(width_y > 0.0))
    throw std::invalid_argument("rectangle: widths must be positive");
  double hx = width_x / nx, hy = width_y / ny;
  if (std::abs(hx - hy) > 1e-12 * std::max(hx, hy))
    throw std::invalid_argument(
        "rectangle: widths and counts must give square cells");
  auto g = std::shared_ptr<Grid>(new Grid);
  g->dim_ = 2;
  g->nx_ = nx;
  g->ny_ = ny;
  g->h_ = hx;
  g->lo_ = {-0.5 * width_x, -0.5 * width_y};
  g->kind_ = DomainKind::rectangle;
  g->steiner_ = SteinerAxis{0, 0.0};
  g->mask_.assign(static_cast<size_t>(nx) * ny, 1);
  g->finalize();
  return g;
}

std::shared_ptr<const Grid> Grid::disk(double radius, int n) {
  if (!(radius > 0.0)) throw std::invalid_argument("disk: radius must be positive");
  if (n < 2) throw std::invalid_argument("disk: cells per axis must be >= 2");
  auto g = std::shared_ptr<Grid>(new Grid);
  g->dim_ = 2;
  g->nx_ = n;
  g->ny_ = n;
  g->h_ = 2.0 * radius / n;
  g->lo_ = {-radius, -radius};
  g->kind_ = DomainKind::disk;
  g->steiner_ = SteinerAxis{0, 0.0};
  g->mask_.assign(static_cast<size_t>(n) * n, 0);
  double r2 = radius * radius;
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) {
      double cx = g->lo_[0] + (ix + 0.5) * g->h_;
      double cy = g->lo_[1] + (iy + 0.5) * g->h_;
      if (cx * cx + cy * cy < r2)  // strictly inside
        g->mask_[static_cast<size_t>(iy) * n + ix] = 1;
    }
  g->finalize();
  return g;
}

std::shared_ptr<const Grid> Grid::masked(std::shared_ptr<const Grid> base,
                                         const std::vector<bool>& keep) {
  if (!base) throw std::invalid_argument("masked: null base grid");
  if (static_cast<int>(keep.size()) != base->active_count())
    throw std::invalid_argument("masked: keep size must match active count");
  auto g = std::shared_ptr<Grid>(new Grid(*base));
  g->kind_ = DomainKind::masked;
  for (int a = 0; a < base->active_count(); ++a)
    if (!keep[a]) g->mask_[static_cast<size_t>(base->active_[a])] = 0;
  if (g->steiner_) {
    // drop the axis when the reduced mask loses the reflection symmetry
    int ax = g->steiner_->axis;
    bool sym = true;
    for (int iy = 0; iy < g->ny_ && sym; ++iy)
      for (int ix = 0; ix < g->nx_ && sym; ++ix) {
        int rx = ax == 0 ? reflect_index(ix, g->nx_) : ix;
        int ry = ax == 1 ? reflect_index(iy, g->ny_) : iy;
        if (g->mask_[static_cast<size_t>(iy) * g->nx_ + ix] !=
            g->mask_[static_cast<size_t>(ry) * g->nx_ + rx])
          sym = false;
      }
    if (!sym) g->steiner_.reset();
  }
  g->finalize();
  return g;
}

double Grid::radius_of(int a) const {
  auto c = cell_center(a);
  return dim_ == 1 ? std::abs(c[0]) : std::hypot(c[0], c[1]);
}

CellFunction::CellFunction(std::shared_ptr<const Grid> g, Eigen::VectorXd v)
    : grid(std::move(g)), values(std::move(v)) {
  if (!grid) throw std::invalid_argument("cell function: null grid");
  if (values.size() != grid->active_count())
    throw std::invalid_argument("cell function: value count must match active cells");
}

CellFunction CellFunction::zero(std::shared_ptr<const Grid> g) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(g->active_count());
  return CellFunction(std::move(g), std::move(v));
}

CellFunction CellFunction::constant(std::shared_ptr<const Grid> g, double c) {
  Eigen::VectorXd v = Eigen::VectorXd::Constant(g->active_count(), c);
  return CellFunction(std::move(g), std::move(v));
}

void require_same_grid(const CellFunction& a, const CellFunction& b) {
  if (a.grid.get() != b.grid.get())
    throw std::invalid_argument("cell functions live on different grids");
}

}  // namespace fracopt
