#include <cmath>
#include <random>

#include "christoffel/christoffel.hpp"
#include "christoffel/errors.hpp"
#include "doctest.h"

using namespace christoffel;

namespace {

double factorial(int n) {
  double out = 1.0;
  for (int i = 2; i <= n; ++i) out *= i;
  return out;
}

double odd_double_factorial(int n) {
  double out = 1.0;
  for (int i = n; i > 1; i -= 2) out *= i;
  return out;
}

Matrix outer_sum(const FeatureDictionary& d, std::initializer_list<double> xs) {
  Matrix g = Matrix::Zero(d.dimension(), d.dimension());
  for (double x : xs) {
    const Vector b = d(Point{x});
    g += b * b.transpose();
  }
  return g / static_cast<double>(xs.size());
}

}  // namespace

TEST_CASE("inverse Christoffel examples") {
  std::mt19937_64 rng(0);
  const auto h = build_dictionary(DictionarySpec::hermite(8), rng);
  // He_j(0)^2 / j! over even j, with He_j(0) = (-1)^(j/2) (j-1)!!.
  double expected = 0.0;
  for (int j = 0; j < 8; j += 2) {
    const double he = odd_double_factorial(j - 1);
    expected += he * he / factorial(j);
  }
  CHECK(expected == 2.1875);
  const auto identity = sym_eig(Matrix::Identity(8, 8));
  CHECK(inverse_christoffel(identity, h, Point{0.0}) == doctest::Approx(expected).epsilon(1e-15));

  const auto s = build_dictionary(DictionarySpec::step_dyadic(17), rng);
  const auto gs = *exact_gramian(s, MeasureKind::Uniform01);
  CHECK(inverse_christoffel(gs, s, Point{0.75}) == doctest::Approx(2.0).epsilon(1e-12));

  for (double x : {-2.0, 0.3, 1.7}) {
    CHECK(inverse_christoffel(identity, h, Point{x}) == doctest::Approx(h(Point{x}).squaredNorm()));
  }
  CHECK_THROWS_AS(inverse_christoffel(gs, s, Point{-0.1}), Error);
}

TEST_CASE("inverse Christoffel equals the sum of squared orthonormal basis functions") {
  std::mt19937_64 rng(0);
  const auto s = build_dictionary(DictionarySpec::step_dyadic(17), rng);
  const auto gs = *exact_gramian(s, MeasureKind::Uniform01);
  const ChristoffelFunction k(gs, s);
  const auto& beta = s.breakpoints();
  for (int i = 0; i <= 1000; ++i) {
    const double x = i / 1000.0;
    // Orthonormal basis chi_j / sqrt(|I_j|); sup_v |v(x)|^2 / ||v||^2 is attained on one cell.
    double brute = 0.0;
    for (std::size_t j = 0; j + 1 < beta.size(); ++j) {
      const bool last = j + 2 == beta.size();
      const bool inside = x >= beta[j] && (x < beta[j + 1] || (last && x <= beta[j + 1]));
      if (inside) brute += 1.0 / (beta[j + 1] - beta[j]);
    }
    CHECK(std::abs(k(Point{x}) - brute) <= 1e-10 * brute);
  }
}

TEST_CASE("features of a rank-deficient family lie in the range of its Gramian") {
  std::mt19937_64 rng(42);
  const auto d = build_dictionary(DictionarySpec::random_mixed(16, 8), rng);
  const auto g = *exact_gramian(d, MeasureKind::GaussianTruncated);
  const Matrix u = range_basis(g);
  REQUIRE(u.cols() == 8);
  for (int i = 0; i < 1000; ++i) {
    const double x = -5.0 + 10.0 * i / 999.0;
    const Vector b = d(Point{x});
    CHECK((b - u * (u.transpose() * b)).norm() <= 1e-8 * b.norm());
  }
}

TEST_CASE("inverse Christoffel is at least one when constants are in the span") {
  std::mt19937_64 rng(0);
  const auto gauss = build_measure(MeasureSpec::gaussian(2000));
  const auto uni01 = build_measure(MeasureSpec::uniform01(4096));
  const auto sym = build_measure(MeasureSpec::uniform_sym(2000));
  const std::pair<FeatureDictionary, const DiscretizedMeasure*> cases[] = {
      {build_dictionary(DictionarySpec::hermite(8), rng), &gauss},
      {build_dictionary(DictionarySpec::step_dyadic(12), rng), &uni01},
      {build_dictionary(DictionarySpec::legendre(10), rng), &sym},
  };
  for (const auto& [dict, measure] : cases) {
    const auto g = *exact_gramian(dict, measure->kind());
    const ChristoffelFunction k(g, dict);
    for (std::size_t i = 0; i < measure->size(); ++i) {
      CHECK(k(measure->node_point(i)) >= 1.0 - 1e-10);
    }
  }
}

TEST_CASE("normalization constant") {
  const auto i8 = sym_eig(Matrix::Identity(8, 8));
  CHECK(normalization_z(i8, i8) == doctest::Approx(8.0));
  CHECK(normalization_z(sym_eig(2.0 * Matrix::Identity(3, 3)), sym_eig(Matrix::Identity(3, 3))) ==
        doctest::Approx(1.5));

  std::mt19937_64 rng(0);
  const auto h = build_dictionary(DictionarySpec::hermite(8), rng);
  const auto g0 = sym_eig(outer_sum(h, {0.0}));
  const auto gauss = build_measure(MeasureSpec::gaussian());
  const ChristoffelFunction k(g0, h);
  const double quad = quadrature(gauss, [&](Point p) { return k(p); });
  CHECK(std::abs(normalization_z(g0, i8) - quad) <= 1e-6 * quad);

  const ChristoffelFunction k8(i8, h);
  CHECK(quadrature(gauss, [&](Point p) { return k8(p); }) == doctest::Approx(8.0).epsilon(1e-6));
}

TEST_CASE("optimal weight identity and mixture limits") {
  std::mt19937_64 rng(0);
  const auto h = build_dictionary(DictionarySpec::hermite(8), rng);
  const auto gauss = build_measure(MeasureSpec::gaussian(20000));
  const auto g = sym_eig(Matrix::Identity(8, 8));

  MixtureWeights w;
  w.z_exact = normalization_z(g, g);
  const auto mix = mixture_density(g, h, gauss, w);
  const ChristoffelFunction& k = mix.mixture.christoffel();
  for (int i = 0; i < 1000; ++i) {
    const Point x{-6.0 + 12.0 * i / 999.0};
    CHECK(mix.mixture.weight(x) * k(x) == doctest::Approx(8.0).epsilon(1e-8));
  }
  const double inv = quadrature(gauss, [&](Point p) { return 1.0 / mix.mixture.weight(p); });
  CHECK(inv == doctest::Approx(1.0).epsilon(1e-6));

  MixtureWeights huge;
  huge.zbar = 1e300;
  huge.z_exact = 8.0;
  const auto flat = mixture_density(g, h, gauss, huge);
  for (std::size_t i = 0; i < flat.density.size(); i += 997) {
    CHECK(flat.density[i] == doctest::Approx(1e300));
  }
}

TEST_CASE("scaled identity regularizer bounds the weight by 1 + k") {
  std::mt19937_64 rng(0);
  const auto h = build_dictionary(DictionarySpec::hermite(8), rng);
  const auto gauss = build_measure(MeasureSpec::gaussian(20000));
  const auto g = sym_eig(Matrix::Identity(8, 8));
  const auto estimate = sym_eig(outer_sum(h, {-1.0, 0.2, 0.5, 2.0}));
  const Matrix p = pinv_floored(estimate);
  for (int kk : {1, 5, 50}) {
    MixtureWeights w;
    w.zbar = p.trace() / kk;
    w.z_exact = normalization_z(estimate, g);
    const auto mix = mixture_density(estimate, h, gauss, w);
    double sup = 0.0;
    for (std::size_t i = 0; i < gauss.size(); ++i) {
      sup = std::max(sup, mix.mixture.weight(gauss.node_point(i)));
    }
    CHECK(sup <= 1.0 + kk);
  }
}

TEST_CASE("mixture density normalizes") {
  std::mt19937_64 rng(0);
  const auto h = build_dictionary(DictionarySpec::hermite(8), rng);
  const auto gauss = build_measure(MeasureSpec::gaussian(400000));
  const auto g = sym_eig(Matrix::Identity(8, 8));
  const auto estimate = sym_eig(outer_sum(h, {-1.0, 0.2, 0.5, 2.0, 0.0, 1.1, -0.7, 3.0, -2.5}));
  for (double zbar : {0.0, 0.5, 40.0}) {
    MixtureWeights w;
    w.zbar = zbar;
    w.z_exact = normalization_z(estimate, g);
    const auto mix = mixture_density(estimate, h, gauss, w);
    const double integral = quadrature(gauss, mix.density) / (zbar + *w.z_exact);
    CHECK(integral == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("mixture weights validation and degeneracy") {
  MixtureWeights none;
  CHECK_THROWS_AS(none.z_star(), Error);
  MixtureWeights both;
  both.z_exact = 1.0;
  both.z_hat = 2.0;
  CHECK(both.z_star() == 2.0);

  std::mt19937_64 rng(0);
  const auto h = build_dictionary(DictionarySpec::hermite(3), rng);
  const auto gauss = build_measure(MeasureSpec::gaussian(1000));
  MixtureWeights w;
  w.z_exact = 0.0;
  try {
    mixture_density(sym_eig(Matrix::Zero(3, 3)), h, gauss, w);
    FAIL("expected DegenerateDensity");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateDensity);
  }
}

TEST_CASE("z-hat estimates") {
  std::mt19937_64 rng(0);
  const auto s = build_dictionary(DictionarySpec::step_dyadic(5), rng);
  const auto uni = build_measure(MeasureSpec::uniform01(64));
  const auto identity6 = sym_eig(Matrix::Identity(6, 6));
  Rng r(4);
  for (std::size_t m : {std::size_t{1}, std::size_t{7}, std::size_t{100}}) {
    CHECK(estimate_z_hat(identity6, s, uni, m, r) == 1.0);
  }

  const auto h = build_dictionary(DictionarySpec::hermite(8), rng);
  const auto gauss = build_measure(MeasureSpec::gaussian());
  const auto g = sym_eig(Matrix::Identity(8, 8));
  Rng a(12);
  Rng b(12);
  const double single = estimate_z_hat(g, h, gauss, 1, a);
  CHECK(single == doctest::Approx(h(gauss.sample_reference(b)).squaredNorm()));

  const ChristoffelFunction k(g, h);
  Rng c(5);
  const std::size_t m = 1000000;
  double sum = 0.0;
  double sumsq = 0.0;
  Rng c_copy = c;
  for (std::size_t i = 0; i < m; ++i) {
    const double v = k(gauss.sample_reference(c_copy));
    sum += v;
    sumsq += v * v;
  }
  const double mean = sum / m;
  const double se = std::sqrt((sumsq / m - mean * mean) / m);
  const double estimate = estimate_z_hat(k, gauss, m, c);
  CHECK(estimate == doctest::Approx(mean).epsilon(1e-12));
  const double quad = quadrature(gauss, [&](Point p) { return k(p); });
  CHECK(std::abs(estimate - quad) <= 3.0 * se);
}

TEST_CASE("prefix and grid samplers agree") {
  std::mt19937_64 rng(21);
  const auto gauss = build_measure(MeasureSpec::gaussian(20000));
  const auto uni = build_measure(MeasureSpec::uniform01(std::size_t{1} << 12));
  const auto hermite = build_dictionary(DictionarySpec::hermite(8), rng);
  const auto mixed = build_dictionary(DictionarySpec::random_mixed(16, 8), rng);
  const auto step = build_dictionary(DictionarySpec::step_dyadic(12), rng);
  const std::pair<const FeatureDictionary*, const DiscretizedMeasure*> cases[] = {
      {&hermite, &gauss}, {&mixed, &gauss}, {&step, &uni}};
  for (const auto& [dict, measure] : cases) {
    CAPTURE(to_string(dict->family()));
    const MixtureSampler prefix(*dict, *measure, SamplerKind::Prefix);
    const MixtureSampler grid(*dict, *measure, SamplerKind::Grid);
    CHECK(prefix.kind() == SamplerKind::Prefix);
    CHECK(grid.kind() == SamplerKind::Grid);

    Rng pick(3);
    std::uniform_real_distribution<double> where(measure->edges().front(), measure->edges().back());
    std::vector<double> xs;
    for (int i = 0; i < 3; ++i) xs.push_back(where(pick));
    Matrix est = Matrix::Zero(dict->dimension(), dict->dimension());
    for (double x : xs) {
      const Vector b = (*dict)(Point{x});
      est += b * b.transpose();
    }
    const ChristoffelFunction k(sym_eig(est), *dict);
    for (double zbar : {0.0, 3.0}) {
      CHECK(prefix.total_mass(k, zbar) == doctest::Approx(grid.total_mass(k, zbar)).epsilon(1e-8));
      Rng ra(8);
      Rng rb(8);
      std::vector<Point> pa;
      std::vector<Point> pb;
      prefix.draw(k, zbar, 2000, ra, pa);
      grid.draw(k, zbar, 2000, rb, pb);
      int same = 0;
      for (std::size_t i = 0; i < pa.size(); ++i) same += pa[i].x == pb[i].x;
      CHECK(same >= 1995);
      CHECK(ra() == rb());
    }
  }
}

TEST_CASE("samples from the Christoffel density have the quadrature mean") {
  std::mt19937_64 rng(0);
  const auto h = build_dictionary(DictionarySpec::hermite(8), rng);
  const auto gauss = build_measure(MeasureSpec::gaussian());
  const ChristoffelFunction k(sym_eig(Matrix::Identity(8, 8)), h);
  const MixtureSampler sampler(h, gauss);
  Rng r(77);
  std::vector<Point> pts;
  const std::size_t n = 1000000;
  sampler.draw(k, 0.0, n, r, pts);
  double sum = 0.0;
  double sumsq = 0.0;
  for (const Point& p : pts) {
    sum += p.x;
    sumsq += p.x * p.x;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sumsq / n - mean * mean) / n);
  const double z = quadrature(gauss, [&](Point p) { return k(p); });
  const double target = quadrature(gauss, [&](Point p) { return p.x * k(p); }) / z;
  CHECK(std::abs(mean - target) <= 3.0 * se);
}
