#include "doctest.h"

#include "crowdmeasure/transport.hpp"
#include "test_support.hpp"

using namespace crowdmeasure;
using testing::random_atomic;

namespace {

AtomicMeasure shifted(const AtomicMeasure& mu, const Point& c) {
  std::vector<Atom> atoms(mu.atoms().begin(), mu.atoms().end());
  for (auto& a : atoms) a.x += c;
  return AtomicMeasure(mu.dim(), std::move(atoms));
}

AtomicMeasure scaled(const AtomicMeasure& mu, double s) {
  std::vector<Atom> atoms(mu.atoms().begin(), mu.atoms().end());
  for (auto& a : atoms) a.x = a.x * s;
  return AtomicMeasure(mu.dim(), std::move(atoms));
}

AtomicMeasure dirac(const Point& x, int dim) { return AtomicMeasure(dim, {{x, 1.0}}); }

}  // namespace

TEST_CASE("w1_1d examples") {
  CHECK(w1_1d(dirac(make_point(0.0), 1), dirac(make_point(1.0), 1)) == 1.0);
  std::mt19937_64 rng(1);
  const auto mu = random_atomic(rng, 1, 12);
  CHECK(w1_1d(mu, mu) == 0.0);
  const AtomicMeasure split(1, {{make_point(-1.0), 0.5}, {make_point(1.0), 0.5}});
  CHECK(w1_1d(dirac(make_point(0.0), 1), split) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(w1_1d(dirac(make_point(0.0, 0.0), 2), dirac(make_point(0.0, 0.0), 2)), ValidationError);
}

TEST_CASE("w1_exact examples") {
  const AtomicMeasure a(2, {{make_point(0.0, 0.0), 0.5}, {make_point(1.0, 0.0), 0.5}});
  const AtomicMeasure b(2, {{make_point(0.0, 1.0), 0.5}, {make_point(1.0, 1.0), 0.5}});
  CHECK(w1_exact(a, b) == doctest::Approx(1.0).epsilon(1e-12));
  const Point x = make_point(0.3, -1.2);
  const Point y = make_point(-2.0, 0.7);
  CHECK(w1_exact(dirac(x, 2), dirac(y, 2)) == norm(y - x));
}

TEST_CASE("w1_exact matches brute force over permutations") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 60; ++trial) {
    const int dim = 1 + trial % 3;
    const int n = 6;
    // Random splits of n unit masses over a handful of distinct positions.
    auto draw = [&] {
      std::vector<std::pair<Point, int>> atoms;
      int left = n;
      while (left > 0) {
        const int m = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(left));
        atoms.emplace_back(testing::random_point(rng, dim, -1.0, 1.0), m);
        left -= m;
      }
      return atoms;
    };
    const auto pa = draw();
    const auto pb = draw();
    const double brute = testing::w1_bruteforce(testing::expand(pa), testing::expand(pb));
    const double solved = w1_exact(testing::as_measure(dim, pa, n), testing::as_measure(dim, pb, n));
    CHECK(solved == doctest::Approx(brute).epsilon(1e-10));
  }
}

TEST_CASE("w1 metric axioms") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const int dim = 1 + trial % 3;
    const auto mu = random_atomic(rng, dim, 1 + rng() % 15);
    const auto nu = random_atomic(rng, dim, 1 + rng() % 15);
    const auto xi = random_atomic(rng, dim, 1 + rng() % 15);
    const double mn = w1_exact(mu, nu);
    CHECK(mn >= 0.0);
    CHECK(std::abs(mn - w1_exact(nu, mu)) <= 1e-12);
    CHECK(mn <= w1_exact(mu, xi) + w1_exact(xi, nu) + 1e-9);
    CHECK(w1_exact(mu, mu) <= 1e-10);

    const Point c = testing::random_point(rng, dim, -5.0, 5.0);
    CHECK(std::abs(w1_exact(shifted(mu, c), shifted(nu, c)) - mn) <= 1e-10);
    const double s = testing::uniform(rng, 0.1, 4.0);
    CHECK(std::abs(w1_exact(scaled(mu, s), scaled(nu, s)) - s * mn) <= 1e-10);
  }
}

TEST_CASE("w1_1d agrees with w1_exact on random pairs") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const auto mu = random_atomic(rng, 1, 1 + rng() % 40);
    const auto nu = random_atomic(rng, 1, 1 + rng() % 40);
    CHECK(std::abs(w1_1d(mu, nu) - w1_exact(mu, nu)) <= 1e-10);
  }
}

TEST_CASE("w1 ignores atom order") {
  std::mt19937_64 rng(5);
  const auto mu = random_atomic(rng, 2, 20);
  const auto nu = random_atomic(rng, 2, 17);
  std::vector<Atom> rev(mu.atoms().rbegin(), mu.atoms().rend());
  CHECK(w1_exact(AtomicMeasure(2, rev), nu) == w1_exact(mu, nu));
}

TEST_CASE("w1_exact enforces the size limit") {
  std::mt19937_64 rng(6);
  const auto mu = random_atomic(rng, 2, 30);
  const auto nu = random_atomic(rng, 2, 30);
  CHECK_THROWS_AS(w1_exact(mu, nu, 10), SizeLimitError);
  CHECK_NOTHROW(w1_exact(mu, nu, 30));
}

TEST_CASE("w1_grid_atomic examples") {
  const GridSpec unit(1, 1.0);
  auto r = w1_grid_atomic(project_atomic(dirac(make_point(0.0), 1), unit), dirac(make_point(0.0), 1));
  CHECK(r.distance == 0.0);
  CHECK(r.atomization_bound == 0.5);

  r = w1_grid_atomic(project_atomic(dirac(make_point(0.2), 1), unit), dirac(make_point(0.2), 1));
  CHECK(r.distance == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(r.atomization_bound == 0.5);
  CHECK(r.lower() == 0.0);
  CHECK(r.upper() == doctest::Approx(0.7));

  const GridMeasure two(GridSpec(2, 0.5), {{make_index(0, 0), 2.0}, {make_index(1, 0), 2.0}});
  r = w1_grid_atomic(two, atomize(two));
  CHECK(r.distance == 0.0);
  CHECK(r.atomization_bound == doctest::Approx(0.5 * std::sqrt(2.0) * 0.5));
}

TEST_CASE("w1_grid_1d") {
  const GridSpec spec(1, 0.1);
  SUBCASE("one-cell shift moves all mass by h") {
    const GridMeasure a(spec, {{make_index(0), 10.0}});
    const GridMeasure b(spec, {{make_index(1), 10.0}});
    CHECK(w1_grid_1d(a, b) == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(w1_grid_1d(a, a) == 0.0);
  }
  SUBCASE("matches dense integration of the CDF difference") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 20; ++trial) {
      const auto ga = project_atomic(random_atomic(rng, 1, 8, 0.0, 1.0), spec);
      const auto gb = project_atomic(random_atomic(rng, 1, 8, 0.0, 1.0), spec);
      // Midpoint rule on the piecewise-linear CDFs.
      const int m = 200000;
      const double lo = -0.1, hi = 1.1, dx = (hi - lo) / m;
      auto cdf = [&](const GridMeasure& g, double x) {
        double s = 0.0;
        for (const auto& c : g.cells()) {
          const double left = (static_cast<double>(c.index[0]) - 0.5) * 0.1;
          s += c.rho * std::clamp(x - left, 0.0, 0.1);
        }
        return s;
      };
      double integral = 0.0;
      for (int k = 0; k < m; ++k) {
        const double x = lo + (k + 0.5) * dx;
        integral += std::abs(cdf(ga, x) - cdf(gb, x)) * dx;
      }
      CHECK(w1_grid_1d(ga, gb) == doctest::Approx(integral).epsilon(1e-6));
    }
  }
}
