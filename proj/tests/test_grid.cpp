#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <stdexcept>

#include "fracopt/grid.hpp"

using namespace fracopt;

TEST_CASE("interval grid centers and spacing") {
  auto g = Grid::interval(-1.0, 1.0, 4);
  CHECK(g->dim() == 1);
  CHECK(g->active_count() == 4);
  CHECK(g->h() == doctest::Approx(0.5).epsilon(1e-15));
  double expected[4] = {-0.75, -0.25, 0.25, 0.75};
  for (int a = 0; a < 4; ++a)
    CHECK(g->cell_center(a)[0] == doctest::Approx(expected[a]).epsilon(1e-15));
  CHECK(g->cell_measure() == doctest::Approx(0.5));
  CHECK(g->domain_measure() == doctest::Approx(2.0));
  REQUIRE(g->steiner().has_value());
  CHECK(g->steiner()->axis == 0);
  CHECK(g->steiner()->center == doctest::Approx(0.0));
}

TEST_CASE("interval grid with shifted endpoints keeps its midline") {
  auto g = Grid::interval(1.0, 4.0, 6);
  CHECK(g->h() == doctest::Approx(0.5));
  CHECK(g->cell_center(0)[0] == doctest::Approx(1.25));
  REQUIRE(g->steiner().has_value());
  CHECK(g->steiner()->center == doctest::Approx(2.5));
}

TEST_CASE("tiny disk keeps the four center cells") {
  auto g = Grid::disk(1.0, 2);
  CHECK(g->dim() == 2);
  CHECK(g->active_count() == 4);
  CHECK(g->h() == doctest::Approx(1.0));
  for (int a = 0; a < 4; ++a) {
    auto c = g->cell_center(a);
    CHECK(std::abs(c[0]) == doctest::Approx(0.5));
    CHECK(std::abs(c[1]) == doctest::Approx(0.5));
  }
}

TEST_CASE("disk area converges to pi r^2") {
  const double pi = 3.14159265358979323846;
  double prev_err = 1e9;
  for (int n : {16, 32, 64}) {
    auto g = Grid::disk(1.0, n);
    double err = std::abs(g->domain_measure() - pi) / pi;
    CHECK(err < prev_err);
    prev_err = err;
  }
  CHECK(prev_err < 0.05);
}

TEST_CASE("disk mask is symmetric under both axis reflections") {
  auto g = Grid::disk(1.0, 17);  // odd count exercises the middle row
  for (int iy = 0; iy < g->ny(); ++iy)
    for (int ix = 0; ix < g->nx(); ++ix) {
      bool on = g->active_at(ix, iy) >= 0;
      CHECK(on == (g->active_at(g->nx() - 1 - ix, iy) >= 0));
      CHECK(on == (g->active_at(ix, g->ny() - 1 - iy) >= 0));
    }
}

TEST_CASE("coordinate round trips") {
  auto g = Grid::disk(2.0, 9);
  for (int a = 0; a < g->active_count(); ++a) {
    auto ij = g->cell_coords(a);
    CHECK(g->active_at(ij[0], ij[1]) == a);
    auto c = g->cell_center(a);
    CHECK(c[0] == doctest::Approx(g->box_lo(0) + (ij[0] + 0.5) * g->h()));
    CHECK(c[1] == doctest::Approx(g->box_lo(1) + (ij[1] + 0.5) * g->h()));
  }
  CHECK(g->active_at(-1, 0) == -1);
  CHECK(g->active_at(0, 0) == -1);  // corner cell lies outside the disk
}

TEST_CASE("rectangle grid requires square cells") {
  auto g = Grid::rectangle(2.0, 1.0, 8, 4);
  CHECK(g->active_count() == 32);
  CHECK(g->h() == doctest::Approx(0.25));
  CHECK(g->domain_measure() == doctest::Approx(2.0));
  CHECK_THROWS_AS(Grid::rectangle(2.0, 1.0, 8, 5), std::invalid_argument);
}

TEST_CASE("masked grid keeps a subset of cells with identical geometry") {
  auto base = Grid::interval(-1.0, 1.0, 8);
  std::vector<bool> keep(8, false);
  keep[2] = keep[3] = keep[4] = keep[5] = true;  // symmetric middle block
  auto g = Grid::masked(base, keep);
  CHECK(g->kind() == DomainKind::masked);
  CHECK(g->active_count() == 4);
  CHECK(g->h() == base->h());
  CHECK(g->cell_center(0)[0] == doctest::Approx(base->cell_center(2)[0]));
  CHECK(g->steiner().has_value());  // symmetric subset keeps the axis

  std::vector<bool> skew(8, false);
  skew[0] = skew[1] = true;
  auto gs = Grid::masked(base, skew);
  CHECK(!gs->steiner().has_value());  // asymmetric subset loses it
  CHECK(gs->active_count() == 2);
}

TEST_CASE("masked grid of a disk preserves centers") {
  auto base = Grid::disk(1.0, 8);
  std::vector<bool> keep(base->active_count(), true);
  keep[0] = false;
  keep[base->active_count() - 1] = false;  // point-symmetric pair
  auto g = Grid::masked(base, keep);
  CHECK(g->active_count() == base->active_count() - 2);
  for (int a = 0; a < g->active_count(); ++a) {
    auto ij = g->cell_coords(a);
    int b = base->active_at(ij[0], ij[1]);
    REQUIRE(b >= 0);
    CHECK(g->cell_center(a)[0] == base->cell_center(b)[0]);
    CHECK(g->cell_center(a)[1] == base->cell_center(b)[1]);
  }
}

TEST_CASE("factory validation") {
  CHECK_THROWS_AS(Grid::interval(-1.0, 1.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(Grid::interval(1.0, -1.0, 4), std::invalid_argument);
  CHECK_THROWS_AS(Grid::interval(1.0, 1.0, 4), std::invalid_argument);
  CHECK_THROWS_AS(Grid::disk(0.0, 4), std::invalid_argument);
  CHECK_THROWS_AS(Grid::disk(1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(Grid::rectangle(-1.0, 1.0, 4, 4), std::invalid_argument);
  auto base = Grid::interval(-1.0, 1.0, 4);
  CHECK_THROWS_AS(Grid::masked(base, std::vector<bool>(3, true)),
                  std::invalid_argument);
  CHECK_THROWS_AS(Grid::masked(base, std::vector<bool>(4, false)),
                  std::invalid_argument);
}

TEST_CASE("cell functions are tied to one grid instance") {
  auto g1 = Grid::interval(-1.0, 1.0, 4);
  auto g2 = Grid::interval(-1.0, 1.0, 4);  // equal shape, different identity
  auto u = CellFunction::constant(g1, 1.0);
  auto v = CellFunction::constant(g1, 2.0);
  auto w = CellFunction::constant(g2, 3.0);
  CHECK_NOTHROW(require_same_grid(u, v));
  CHECK_THROWS_AS(require_same_grid(u, w), std::invalid_argument);
  CHECK_THROWS_AS(CellFunction(g1, Eigen::VectorXd::Zero(3)),
                  std::invalid_argument);
  CHECK(CellFunction::zero(g1).values.norm() == 0.0);
}

TEST_CASE("radius accessor") {
  auto g = Grid::disk(1.0, 4);
  for (int a = 0; a < g->active_count(); ++a) {
    auto c = g->cell_center(a);
    CHECK(g->radius_of(a) == doctest::Approx(std::hypot(c[0], c[1])));
  }
}
