#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

namespace fracopt {

enum class DomainKind { interval, rectangle, disk, masked };

// Rearrangement direction plus the coordinate of the reflecting hyperplane.
struct SteinerAxis {
  int axis = 0;
  double center = 0.0;
};

// Uniform square-cell grid on an axis-aligned box with an activity mask.
// The active cells tile the domain; everything else is exterior. Instances
// are immutable and meant to be shared through shared_ptr.
class Grid {
 public:
  static std::shared_ptr<const Grid> interval(double a, double b, int n);
  static std::shared_ptr<const Grid> rectangle(double width_x, double width_y,
                                               int nx, int ny);
  static std::shared_ptr<const Grid> disk(double radius, int n);
  // Same lattice with some cells switched off; keep has one flag per active
  // cell of base. The Steiner axis is retained only when the reduced mask is
  // still reflection symmetric about it.
  static std::shared_ptr<const Grid> masked(std::shared_ptr<const Grid> base,
                                            const std::vector<bool>& keep);

  int dim() const { return dim_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double h() const { return h_; }
  double cell_measure() const { return measure_; }  // h^dim
  double box_lo(int axis) const { return lo_[axis]; }
  double box_hi(int axis) const {
    return lo_[axis] + h_ * (axis == 0 ? nx_ : ny_);
  }
  int active_count() const { return static_cast<int>(active_.size()); }
  double domain_measure() const {
    return static_cast<double>(active_.size()) * measure_;
  }
  DomainKind kind() const { return kind_; }
  const std::optional<SteinerAxis>& steiner() const { return steiner_; }

  std::array<int, 2> cell_coords(int a) const {
    int p = active_[a];
    return {p % nx_, p / nx_};
  }
  std::array<double, 2> cell_center(int a) const {
    auto c = cell_coords(a);
    return {lo_[0] + (c[0] + 0.5) * h_, lo_[1] + (c[1] + 0.5) * h_};
  }
  // -1 when the lattice cell is inactive or outside the box
  int active_at(int ix, int iy) const {
    if (ix < 0 || ix >= nx_ || iy < 0 || iy >= ny_) return -1;
    return index_[static_cast<size_t>(iy) * nx_ + ix];
  }
  // distance from a cell center to the coordinate origin
  double radius_of(int a) const;

 private:
  Grid() = default;
  void finalize();

  int dim_ = 1, nx_ = 0, ny_ = 1;
  double h_ = 0.0, measure_ = 0.0;
  std::array<double, 2> lo_{0.0, 0.0};
  DomainKind kind_ = DomainKind::interval;
  std::optional<SteinerAxis> steiner_;
  std::vector<std::uint8_t> mask_;  // lattice occupancy, row-major
  std::vector<int> active_;         // active index -> lattice index
  std::vector<int> index_;          // lattice index -> active index or -1
};

// Values attached to the active cells of one grid, in active-index order.
struct CellFunction {
  std::shared_ptr<const Grid> grid;
  Eigen::VectorXd values;

  CellFunction() = default;
  CellFunction(std::shared_ptr<const Grid> g, Eigen::VectorXd v);
  static CellFunction zero(std::shared_ptr<const Grid> g);
  static CellFunction constant(std::shared_ptr<const Grid> g, double c);
  int size() const { return static_cast<int>(values.size()); }
};

void require_same_grid(const CellFunction& a, const CellFunction& b);

}  // namespace fracopt
