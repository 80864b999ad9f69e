#include <algorithm>
#include <cmath>
#include <random>

#include "christoffel/errors.hpp"
#include "christoffel/metrics.hpp"
#include "christoffel/refinement.hpp"
#include "doctest.h"

using namespace christoffel;

namespace {

struct Hermite {
  Rng rng{0};
  FeatureDictionary dict = build_dictionary(DictionarySpec::hermite(8), rng);
  DiscretizedMeasure measure = build_measure(MeasureSpec::gaussian());
  SpectralGramian g = *exact_gramian(dict, MeasureKind::GaussianTruncated);
  MixtureSampler sampler{dict, measure};
};

Hermite& hermite() {
  static Hermite h;
  return h;
}

// Bounded features, so sample means have well-behaved standard errors.
struct Legendre {
  Rng rng{0};
  FeatureDictionary dict = build_dictionary(DictionarySpec::legendre(6), rng);
  DiscretizedMeasure measure = build_measure(MeasureSpec::uniform_sym());
  SpectralGramian g = *exact_gramian(dict, MeasureKind::UniformSym);
  MixtureSampler sampler{dict, measure};
};

Matrix perturbed_identity(Index d, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal;
  Matrix a(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) a(i, j) = normal(rng);
  return a * a.transpose() / static_cast<double>(d) + 0.3 * Matrix::Identity(d, d);
}

RefinementState state_at(const Matrix& g_hat, std::uint64_t k, std::uint64_t seed) {
  RefinementState s;
  s.k = k;
  s.g_hat = sym_eig(g_hat);
  s.cumulative_samples = k;
  s.rng = Rng(seed);
  return s;
}

// Entrywise |mean - target| <= 5 standard errors over replicate half-steps.
int unbiasedness_violations(const std::vector<Matrix>& draws, const Matrix& target) {
  const double r = static_cast<double>(draws.size());
  Matrix mean = Matrix::Zero(target.rows(), target.cols());
  for (const auto& m : draws) mean += m;
  mean /= r;
  Matrix var = Matrix::Zero(target.rows(), target.cols());
  for (const auto& m : draws) var += (m - mean).cwiseAbs2();
  var /= (r - 1.0);
  int bad = 0;
  for (Index i = 0; i < target.rows(); ++i) {
    for (Index j = 0; j < target.cols(); ++j) {
      const double se = std::sqrt(var(i, j) / r);
      if (std::abs(mean(i, j) - target(i, j)) > 5.0 * se + 1e-12) ++bad;
    }
  }
  return bad;
}

}  // namespace

TEST_CASE("config validation") {
  RefinementConfig c;
  CHECK_NOTHROW(c.validate());
  c.n = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.m = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.k_max = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.min_eig = MinEigSchedule{0.0};
  CHECK_THROWS_AS(c.validate(), Error);
  CHECK(MinEigSchedule{}.at(4) == 0.25);
  CHECK(to_string(Mode::NaiveMC) == "naive_mc");
  CHECK(to_string(JPolicy::ScaledIdentity) == "scaled_identity");
}

TEST_CASE("running average arithmetic") {
  RefinementConfig c;
  c.n = 3;
  RefinementState s = state_at(Matrix::Identity(4, 4), 1, 0);
  s.cumulative_samples = 3;
  accumulate_half_step(s, c, 3.0 * Matrix::Identity(4, 4));
  CHECK(s.k == 2);
  CHECK(s.cumulative_samples == 6);
  CHECK(s.g_hat.matrix().isApprox(2.0 * Matrix::Identity(4, 4), 1e-15));
  CHECK(s.last_half_step.isApprox(3.0 * Matrix::Identity(4, 4)));
}

TEST_CASE("initial estimate") {
  Rng rng(0);
  const auto step = build_dictionary(DictionarySpec::step_dyadic(17), rng);
  const auto uniform = build_measure(MeasureSpec::uniform01());
  const auto s = init_gramian(step, uniform, 1, Rng(3));
  CHECK(s.k == 1);
  CHECK(s.cumulative_samples == 1);
  CHECK(s.g_hat.rank() == 1);
  const Matrix& m = s.g_hat.matrix();
  CHECK((m.array() != 0.0).count() == 1);

  // Forced sample at 0: B(0) B(0)^T.
  auto& h = hermite();
  const Point zero{0.0};
  const Matrix outer = weighted_outer_mean(h.dict, std::span<const Point>(&zero, 1));
  CHECK(outer(0, 0) == 1.0);
  for (Index j = 1; j < 8; j += 2) CHECK(outer.col(j).isZero());
  CHECK_THROWS_AS(init_gramian(h.dict, h.measure, 0, Rng(0)), Error);
}

TEST_CASE("initial estimate is unbiased") {
  Legendre h;
  std::vector<Matrix> draws;
  Rng rng(17);
  for (int r = 0; r < 10000; ++r) {
    auto s = init_gramian(h.dict, h.measure, 1, rng);
    draws.push_back(s.last_half_step);
    rng = s.rng;
  }
  CHECK(unbiasedness_violations(draws, h.g.matrix()) == 0);
}

TEST_CASE("weighted outer mean") {
  auto& h = hermite();
  const std::vector<Point> pts{Point{0.5}, Point{-1.0}};
  const std::vector<double> w{2.0, 4.0};
  const Vector a = h.dict(pts[0]);
  const Vector b = h.dict(pts[1]);
  const Matrix want = (2.0 * a * a.transpose() + 4.0 * b * b.transpose()) / 2.0;
  CHECK(weighted_outer_mean(h.dict, pts, w).isApprox(want, 1e-14));
  CHECK_THROWS_AS(weighted_outer_mean(h.dict, pts, std::vector<double>{1.0}), Error);
  CHECK_THROWS_AS(weighted_outer_mean(h.dict, std::vector<Point>{}), Error);
}

TEST_CASE("exact weights at the true Gramian give w K = d") {
  auto& h = hermite();
  RefinementConfig c;
  c.n = 1;
  const Matrix gp = pinv_floored(h.g);
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    RefinementState s = state_at(h.g.matrix(), 1, seed);
    refine_step(s, c, h.sampler, &h.g);
    // n = 1: half = w(x) B B^T, so <G^+, half> = w(x) K_G(x).
    CHECK(frobenius_inner(gp, s.last_half_step) == doctest::Approx(8.0).epsilon(1e-8));
  }
}

TEST_CASE("half steps are conditionally unbiased") {
  auto& h = hermite();
  const Matrix g_hat = perturbed_identity(8, 4);
  for (Mode mode : {Mode::ExactWeights, Mode::EstimatedWeights}) {
    for (JPolicy policy : {JPolicy::Zero, JPolicy::ScaledIdentity}) {
      if (mode == Mode::ExactWeights && policy != JPolicy::Zero) continue;
      RefinementConfig c;
      c.n = 1;
      c.m = 10;
      c.mode = mode;
      c.j_policy = policy;
      std::vector<Matrix> draws;
      RefinementState s = state_at(g_hat, 3, 99);
      for (int r = 0; r < 10000; ++r) {
        RefinementState t = s;
        refine_step(t, c, h.sampler, &h.g);
        draws.push_back(t.last_half_step);
        s.rng = t.rng;
      }
      CAPTURE(to_string(mode));
      CAPTURE(to_string(policy));
      CHECK(unbiasedness_violations(draws, h.g.matrix()) == 0);
    }
  }
}

TEST_CASE("estimated weights need no true Gramian, exact weights do") {
  auto& h = hermite();
  RefinementConfig c;
  RefinementState s = state_at(h.g.matrix(), 1, 0);
  CHECK_THROWS_AS(refine_step(s, c, h.sampler, nullptr), Error);
  c.mode = Mode::EstimatedWeights;
  CHECK_NOTHROW(refine_step(s, c, h.sampler, nullptr));
}

TEST_CASE("update is equivariant under whitening") {
  auto& h = hermite();
  const Matrix g_hat = perturbed_identity(8, 6);
  const auto eig = sym_eig(g_hat);
  const Matrix t = eig.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                   eig.eigenvectors().transpose();
  const Matrix t_inv = t.inverse();
  const auto white = h.dict.transformed(t);
  const MixtureSampler white_sampler(white, h.measure);
  const auto g_white = sym_eig(t * h.g.matrix() * t.transpose());

  RefinementConfig c;
  c.n = 20;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    RefinementState direct = state_at(g_hat, 2, seed);
    RefinementState whitened = state_at(t * g_hat * t.transpose(), 2, seed);
    refine_step(direct, c, h.sampler, &h.g);
    refine_step(whitened, c, white_sampler, &g_white);
    const Matrix back = t_inv * whitened.g_hat.matrix() * t_inv.transpose();
    CHECK((back - direct.g_hat.matrix()).norm() <= 1e-8 * direct.g_hat.matrix().norm());
  }
}

TEST_CASE("constraints") {
  auto& h = hermite();
  RefinementConfig c;
  c.n = 1;
  c.k_max = 40;
  c.pin_b1 = true;
  c.min_eig = MinEigSchedule{};
  std::vector<Point> grid;
  for (int i = 0; i <= 200; ++i) grid.push_back(Point{-5.0 + 0.05 * i});
  int low = 0;
  int unpinned = 0;
  run_refinement(c, h.sampler, h.g, Rng(8), {}, [&](const RefinementState& s, const TracePoint&) {
    if (std::abs(s.g_hat.matrix()(0, 0) - 1.0) > 1e-12) ++unpinned;
    const ChristoffelFunction k(s.g_hat, h.dict);
    for (const Point& x : grid) {
      if (k(x) < 1.0 - 1e-10) ++low;
    }
  });
  CHECK(low == 0);
  CHECK(unpinned == 0);

  RefinementConfig f;
  f.min_eig = MinEigSchedule{8.0};
  const Matrix floored = apply_constraints(Matrix(Vector::LinSpaced(4, 0.0, 3.0).asDiagonal()), f, 4);
  const auto e = sym_eig(floored);
  CHECK(e.rank() == 3);
  CHECK(e.lambda_min_positive() == doctest::Approx(2.0));
  CHECK(e.lambda_max() == doctest::Approx(3.0));
}

TEST_CASE("run_refinement trace and determinism") {
  auto& h = hermite();
  RefinementConfig c;
  c.n = 2;
  c.k_max = 1;
  const auto single = run_refinement(c, h.sampler, h.g, Rng(1), {});
  REQUIRE(single.size() == 1);
  CHECK(single[0].step == 1);
  CHECK(single[0].kn == 2);
  CHECK(std::isinf(single[0].gamma));

  c.k_max = 30;
  const auto a = run_refinement(c, h.sampler, h.g, Rng(5), {});
  const auto b = run_refinement(c, h.sampler, h.g, Rng(5), {});
  REQUIRE(a.size() == 30);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].step == i + 1);
    CHECK(a[i].kn == 2 * (i + 1));
    CHECK(a[i].gamma == b[i].gamma);
  }
  const auto thin = run_refinement(c, h.sampler, h.g, Rng(5), [](std::uint64_t k) { return k % 10 == 0; });
  REQUIRE(thin.size() == 3);
  CHECK(thin[2].gamma == a[29].gamma);
}

TEST_CASE("naive Monte Carlo shares the initial estimate") {
  auto& h = hermite();
  RefinementConfig c;
  c.k_max = 3;
  c.n = 4;
  SpectralGramian adaptive;
  SpectralGramian naive;
  run_refinement(c, h.sampler, h.g, Rng(2), [](std::uint64_t k) { return k == 1; },
                 [&](const RefinementState& s, const TracePoint&) { adaptive = s.g_hat; });
  c.mode = Mode::NaiveMC;
  run_refinement(c, h.sampler, h.g, Rng(2), [](std::uint64_t k) { return k == 1; },
                 [&](const RefinementState& s, const TracePoint&) { naive = s.g_hat; });
  CHECK(adaptive.matrix() == naive.matrix());
}

TEST_CASE("naive Monte Carlo mean approaches the Gramian") {
  Legendre h;
  RefinementConfig c;
  c.mode = Mode::NaiveMC;
  c.n = 50;
  c.k_max = 400;
  SpectralGramian last;
  run_refinement(c, h.sampler, h.g, Rng(3), [&](std::uint64_t k) { return k == c.k_max; },
                 [&](const RefinementState& s, const TracePoint&) { last = s.g_hat; });
  CHECK((last.matrix() - h.g.matrix()).cwiseAbs().maxCoeff() < 0.1);
}

TEST_CASE("median suboptimality decreases over decades") {
  auto& h = hermite();
  RefinementConfig c;
  c.k_max = 1000;
  const std::vector<std::uint64_t> marks{10, 100, 1000};
  std::vector<std::vector<double>> per_rep;
  for (std::uint64_t rep = 0; rep < 10; ++rep) {
    const auto tr = run_refinement(c, h.sampler, h.g, repetition_rng(7, rep), [&](std::uint64_t k) {
      return std::find(marks.begin(), marks.end(), k) != marks.end();
    });
    std::vector<double> v;
    for (const auto& p : tr) v.push_back(p.gamma);
    per_rep.push_back(v);
  }
  const auto q = reduce_quantiles(per_rep, marks, marks, {0.5});
  CHECK(q.quantiles[1][0] < q.quantiles[0][0]);
  CHECK(q.quantiles[2][0] < q.quantiles[1][0]);
}
