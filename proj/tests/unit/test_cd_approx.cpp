#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <random>

#include "christoffel/cd_approx.hpp"
#include "christoffel/christoffel.hpp"
#include "christoffel/errors.hpp"
#include "christoffel/measures.hpp"
#include "doctest.h"

using namespace christoffel;

namespace {

struct Fixture {
  std::mt19937_64 rng{0};
  FeatureDictionary dict = build_dictionary(DictionarySpec::bivariate_monomial(8), rng);
  DiscretizedMeasure measure = build_measure(MeasureSpec::graph());
  SpectralGramian g = sym_eig(gramian_by_quadrature(dict, measure));
  CDProblem problem = CDProblem::standard();
};

}  // namespace

TEST_CASE("target function values") {
  const CDProblem p = CDProblem::standard();
  CHECK(target_f(p, 0.5) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(std::abs(target_f(p, 0.0)) < 1e-15);
  CHECK(target_f(p, 1.0) == doctest::Approx(1.0).epsilon(1e-14));

  boost::math::normal_distribution<double> normal;
  for (double x : {0.01, 0.25, 0.6, 0.93}) {
    const double qe = boost::math::quantile(normal, 1e-3);
    const double qx = boost::math::quantile(normal, (1.0 - 2e-3) * x + 1e-3);
    CHECK(target_f(p, x) == doctest::Approx((qe - qx) / (2.0 * qe)).epsilon(1e-12));
  }
}

TEST_CASE("problem validation") {
  CDProblem p = CDProblem::standard();
  CHECK_NOTHROW(p.validate());
  p.epsilon = 0.5;
  CHECK_THROWS_AS(p.validate(), Error);
  p = CDProblem::standard();
  p.degree = 0;
  CHECK_THROWS_AS(p.validate(), Error);
  p = CDProblem::standard();
  p.y_grid = {0.0, 0.5, 0.5};
  CHECK_THROWS_AS(p.validate(), Error);
  p = CDProblem::standard();
  p.x_grid.push_back(1.5);
  CHECK_THROWS_AS(p.validate(), Error);
  p = CDProblem::standard();
  p.x_grid.clear();
  CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("grids") {
  const auto g = uniform_grid(1001);
  CHECK(g.size() == 1001);
  CHECK(g.front() == 0.0);
  CHECK(g.back() == 1.0);
  CHECK(g[500] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("identity Gramian minimizes at y = 0 for x = 0") {
  std::mt19937_64 rng(0);
  const auto dict = build_dictionary(DictionarySpec::bivariate_monomial(8), rng);
  CDProblem p = CDProblem::standard();
  p.x_grid = {0.0, 0.3};
  const auto f = cd_approximation(sym_eig(Matrix::Identity(64, 64)), dict, p);
  CHECK(f[0] == 0.0);
  CHECK(f[1] == 0.0);
}

TEST_CASE("ties go to the smallest y") {
  std::mt19937_64 rng(0);
  const auto dict = build_dictionary(DictionarySpec::bivariate_monomial(2), rng);
  // Only x-dependent directions: K(x, y) is constant in y.
  Matrix h = Matrix::Zero(4, 4);
  h(0, 0) = 1.0;
  h(2, 2) = 1.0;
  h(0, 2) = h(2, 0) = 0.5;
  SpectralOptions opts;
  opts.floor_epsilon = 0.0;
  CDProblem p = CDProblem::standard(1e-3, 2, 5, 7);
  const auto f = cd_approximation(sym_eig(h, opts), dict, p);
  for (double v : f) CHECK(v == 0.0);
}

TEST_CASE("levels agree with the direct inverse Christoffel function") {
  Fixture fx;
  const std::vector<double> xs{0.1, 0.5, 0.77};
  const std::vector<double> ys{0.0, 0.2, 0.61, 1.0};
  const Matrix k = christoffel_levels(fx.g, fx.dict, xs, ys);
  const ChristoffelFunction direct(fx.g, fx.dict);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = 0; j < ys.size(); ++j) {
      const double want = direct(Point{xs[i], ys[j]});
      CHECK(k(i, j) == doctest::Approx(want).epsilon(1e-6).scale(1.0));
    }
  }
}

TEST_CASE("exact Gramian recovers the graph") {
  Fixture fx;
  const auto f = cd_approximation(fx.g, fx.dict, fx.problem);
  REQUIRE(f.size() == fx.problem.x_grid.size());
  for (double v : f) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  const double cell = fx.problem.y_grid[1] - fx.problem.y_grid[0];
  CHECK(std::abs(f[500] - 0.5) <= cell);
  CHECK(max_cd_error(fx.problem, f) <= 0.05);
}

TEST_CASE("exact-Gramian error does not grow from degree 4 to 8") {
  std::mt19937_64 rng(0);
  const auto measure = build_measure(MeasureSpec::graph());
  std::vector<double> errors;
  for (int d : {4, 8}) {
    const auto dict = build_dictionary(DictionarySpec::bivariate_monomial(d), rng);
    const auto g = sym_eig(gramian_by_quadrature(dict, measure));
    const CDProblem p = CDProblem::standard(1e-3, d);
    errors.push_back(max_cd_error(p, cd_approximation(g, dict, p)));
  }
  CHECK(errors[1] <= errors[0]);
}

TEST_CASE("max error window") {
  CDProblem p = CDProblem::standard(1e-3, 8, 11, 11);
  std::vector<double> f;
  for (double x : p.x_grid) f.push_back(target_f(p, x));
  CHECK(max_cd_error(p, f) == 0.0);
  f[0] = 0.9;
  f[10] = 0.1;
  CHECK(max_cd_error(p, f) == 0.0);
  f[5] += 0.25;
  CHECK(max_cd_error(p, f) == doctest::Approx(0.25));
  f.pop_back();
  CHECK_THROWS_AS(max_cd_error(p, f), Error);
}

TEST_CASE("rejects other dictionaries") {
  std::mt19937_64 rng(0);
  const auto h = build_dictionary(DictionarySpec::hermite(8), rng);
  CHECK_THROWS_AS(cd_approximation(sym_eig(Matrix::Identity(8, 8)), h, CDProblem::standard()),
                  Error);
}
