#include "doctest.h"

#include "crowdmeasure/grid_measure.hpp"
#include "crowdmeasure/transport.hpp"
#include "test_support.hpp"

using namespace crowdmeasure;
using testing::random_atomic;

TEST_CASE("cell_of resolves half-open cells") {
  CHECK(cell_of(GridSpec(1, 1.0), make_point(0.0)) == make_index(0));
  CHECK(cell_of(GridSpec(1, 1.0), make_point(0.5)) == make_index(1));
  CHECK(cell_of(GridSpec(1, 1.0), make_point(-0.5)) == make_index(0));
  CHECK(cell_of(GridSpec(2, 0.5), make_point(0.3, -0.3)) == make_index(1, -1));
}

TEST_CASE("cell_of rejects coordinates beyond the grid dimension") {
  CHECK_THROWS_AS(cell_of(GridSpec(1, 1.0), make_point(0.0, 1.0)), ValidationError);
  CHECK_THROWS_AS(cell_of(GridSpec(1, 1.0), make_point(std::nan(""))), ValidationError);
}

TEST_CASE("cells partition space") {
  std::mt19937_64 rng(11);
  for (int dim = 1; dim <= 3; ++dim) {
    const GridSpec spec(dim, testing::uniform(rng, 0.01, 2.0));
    for (int n = 0; n < 100000 / 3; ++n) {
      const Point x = testing::random_point(rng, dim, -50.0, 50.0);
      const CellIndex i = cell_of(spec, x);
      for (int l = 0; l < dim; ++l) {
        const double h = spec.cell_width();
        REQUIRE(x[l] >= (static_cast<double>(i[l]) - 0.5) * h);
        REQUIRE(x[l] < (static_cast<double>(i[l]) + 0.5) * h);
      }
    }
  }
}

TEST_CASE("cell_center is i h") {
  CHECK(cell_center(GridSpec(1, 1.0), make_index(0))[0] == 0.0);
  const Point c = cell_center(GridSpec(2, 0.5), make_index(1, -1));
  CHECK(c[0] == 0.5);
  CHECK(c[1] == -0.5);
  CHECK(cell_center(GridSpec(1, 0.1), make_index(7))[0] == doctest::Approx(0.7).epsilon(1e-15));
}

TEST_CASE("project_atomic") {
  SUBCASE("single Dirac") {
    const auto g = project_atomic(AtomicMeasure(1, {{make_point(0.0), 1.0}}), GridSpec(1, 1.0));
    REQUIRE(g.occupied() == 1);
    CHECK(g.density(make_index(0)) == 1.0);
  }
  SUBCASE("two atoms on cell faces") {
    const AtomicMeasure mu(1, {{make_point(0.25), 0.5}, {make_point(0.75), 0.5}});
    const auto g = project_atomic(mu, GridSpec(1, 0.5));
    REQUIRE(g.occupied() == 2);
    CHECK(g.density(make_index(1)) == 1.0);
    CHECK(g.density(make_index(2)) == 1.0);
  }
  SUBCASE("mass is conserved") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
      const int dim = 1 + trial % 3;
      const auto mu = random_atomic(rng, dim, 1 + trial);
      const auto g = project_atomic(mu, GridSpec(dim, testing::uniform(rng, 0.01, 0.5)));
      CHECK(std::abs(total_mass(g) - mu.total_weight()) <= 1e-12);
      CHECK_NOTHROW(g.validate());
    }
  }
  SUBCASE("W1 to the original is at most sqrt(d) h") {
    std::mt19937_64 rng(5);
    const auto mu = random_atomic(rng, 2, 50);
    const GridSpec spec(2, 0.07);
    const auto g = project_atomic(mu, spec);
    CHECK(w1_exact(atomize(g), mu) <= std::sqrt(2.0) * 0.07);
  }
}

TEST_CASE("total_mass") {
  CHECK(total_mass(GridMeasure(GridSpec(1, 1.0))) == 0.0);
  CHECK(total_mass(GridMeasure(GridSpec(1, 0.5), {{make_index(0), 2.0}})) == 1.0);
}

TEST_CASE("moment") {
  CHECK(moment(AtomicMeasure(2, {{make_point(3.0, 4.0), 1.0}}), 1) == doctest::Approx(5.0));
  CHECK(moment(AtomicMeasure(1, {{make_point(-1.0), 0.5}, {make_point(1.0), 0.5}}), 2) == 1.0);
  // Uniform on [0.005, 1.005): cells 1..100 of width 0.01.
  std::vector<GridCell> cells;
  for (int i = 1; i <= 100; ++i) cells.push_back({make_index(i), 1.0});
  const GridMeasure g(GridSpec(1, 0.01), cells);
  CHECK(std::abs(moment(g, 1) - 0.5) <= 0.01);
  CHECK_THROWS_AS(moment(g, 3), ValidationError);
}

TEST_CASE("atomize") {
  SUBCASE("single cell") {
    const auto mu = atomize(GridMeasure(GridSpec(1, 1.0), {{make_index(0), 1.0}}));
    REQUIRE(mu.size() == 1);
    CHECK(mu.atoms()[0].x[0] == 0.0);
    CHECK(mu.atoms()[0].w == 1.0);
  }
  SUBCASE("two cells") {
    const auto mu = atomize(GridMeasure(GridSpec(1, 0.5), {{make_index(0), 1.0}, {make_index(1), 1.0}}));
    REQUIRE(mu.size() == 2);
    CHECK(mu.atoms()[0].x[0] == 0.0);
    CHECK(mu.atoms()[1].x[0] == 0.5);
    CHECK(mu.atoms()[0].w == 0.5);
  }
  SUBCASE("projection snaps to the cell center") {
    const auto mu = atomize(project_atomic(AtomicMeasure(1, {{make_point(0.2), 1.0}}), GridSpec(1, 1.0)));
    REQUIRE(mu.size() == 1);
    CHECK(mu.atoms()[0].x[0] == 0.0);
    CHECK(mu.atoms()[0].w == 1.0);
  }
  SUBCASE("total weight equals total mass exactly") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 20; ++trial) {
      const auto g = project_atomic(random_atomic(rng, 2, 40), GridSpec(2, 0.13));
      CHECK(atomize(g).total_weight() == total_mass(g));
    }
  }
}

TEST_CASE("interpolate") {
  const GridSpec spec(1, 0.5);
  const GridMeasure a(spec, {{make_index(0), 2.0}});
  const GridMeasure b(spec, {{make_index(1), 2.0}});
  CHECK(interpolate(a, b, 0.0) == a);
  CHECK(interpolate(a, b, 1.0) == b);
  const auto mid = interpolate(a, b, 0.5);
  CHECK(mid.density(make_index(0)) == 1.0);
  CHECK(mid.density(make_index(1)) == 1.0);

  CHECK_THROWS_AS(interpolate(a, GridMeasure(GridSpec(1, 0.25)), 0.5), ValidationError);
  CHECK_THROWS_AS(interpolate(a, b, 1.5), ValidationError);

  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const GridSpec s(2, 0.1);
    const auto ga = project_atomic(random_atomic(rng, 2, 10), s);
    const auto gb = project_atomic(random_atomic(rng, 2, 10), s);
    const auto g = interpolate(ga, gb, testing::uniform(rng, 0.0, 1.0));
    CHECK(std::abs(total_mass(g) - 1.0) <= 1e-12);
    for (const auto& c : g.cells()) CHECK(c.rho >= 0.0);
  }
}

TEST_CASE("measure validation") {
  CHECK_THROWS_AS(GridMeasure(GridSpec(1, 1.0), {{make_index(0), -1.0}}), ValidationError);
  CHECK_THROWS_AS(GridMeasure(GridSpec(1, 1.0), {{make_index(0), 0.5}}).validate(), InvariantViolation);
  CHECK_THROWS_AS(AtomicMeasure(1, {{make_point(0.0), 0.7}}), ValidationError);
  CHECK_THROWS_AS(GridSpec(1, 0.0), ValidationError);
  CHECK_THROWS_AS(GridSpec(4, 1.0), ValidationError);
  // Zero-weight atoms are dropped.
  CHECK(AtomicMeasure(1, {{make_point(0.0), 1.0}, {make_point(2.0), 0.0}}).size() == 1);
  // Duplicate cells are merged.
  const GridMeasure g(GridSpec(1, 1.0), {{make_index(2), 0.25}, {make_index(2), 0.75}});
  CHECK(g.occupied() == 1);
  CHECK(g.density(make_index(2)) == 1.0);
}
