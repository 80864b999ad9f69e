#include "christoffel/dictionaries.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "christoffel/errors.hpp"
#include "christoffel/special.hpp"

namespace christoffel {

std::string_view to_string(MeasureKind kind) noexcept {
  switch (kind) {
    case MeasureKind::GaussianTruncated: return "gaussian";
    case MeasureKind::Uniform01: return "uniform01";
    case MeasureKind::UniformSym: return "uniform_sym";
    case MeasureKind::GraphOfF: return "graph";
  }
  return "unknown";
}

std::string_view to_string(Family family) noexcept {
  switch (family) {
    case Family::Hermite: return "hermite";
    case Family::Monomial: return "monomial";
    case Family::RandomMixed: return "random_mixed";
    case Family::Step: return "step";
    case Family::BivariateMonomial: return "bivariate_monomial";
    case Family::Legendre: return "legendre";
  }
  return "unknown";
}

DictionarySpec DictionarySpec::hermite(int dimension) {
  DictionarySpec s;
  s.family = Family::Hermite;
  s.dimension = dimension;
  return s;
}

DictionarySpec DictionarySpec::monomial(int dimension) {
  DictionarySpec s;
  s.family = Family::Monomial;
  s.dimension = dimension;
  return s;
}

DictionarySpec DictionarySpec::legendre(int dimension) {
  DictionarySpec s;
  s.family = Family::Legendre;
  s.dimension = dimension;
  return s;
}

DictionarySpec DictionarySpec::random_mixed(int rows, int degree) {
  DictionarySpec s;
  s.family = Family::RandomMixed;
  s.mixed_rows = rows;
  s.mixed_degree = degree;
  return s;
}

DictionarySpec DictionarySpec::step_dyadic(int levels) {
  DictionarySpec s;
  s.family = Family::Step;
  s.dyadic_levels = levels;
  return s;
}

DictionarySpec DictionarySpec::step(std::vector<double> breakpoints) {
  DictionarySpec s;
  s.family = Family::Step;
  s.breakpoints = std::move(breakpoints);
  return s;
}

DictionarySpec DictionarySpec::bivariate_monomial(int per_axis_degree) {
  DictionarySpec s;
  s.family = Family::BivariateMonomial;
  s.per_axis_degree = per_axis_degree;
  return s;
}

std::vector<double> dyadic_breakpoints(int levels) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(levels) + 2);
  out.push_back(0.0);
  for (int j = levels; j >= 0; --j) out.push_back(std::ldexp(1.0, -j));
  return out;
}

namespace {

[[noreturn]] void invalid(const std::string& what) {
  throw Error(ErrorCode::InvalidSpec, "build_dictionary: " + what);
}

Matrix draw_full_rank_gaussian(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix s(rows, cols);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j) s(i, j) = normal(rng);
    Eigen::ColPivHouseholderQR<Matrix> qr(s);
    if (qr.rank() == cols) return s;
  }
  throw Error(ErrorCode::NumericalError, "could not draw a full-rank mixing matrix");
}

}  // namespace

FeatureDictionary build_dictionary(const DictionarySpec& spec, std::mt19937_64& rng) {
  FeatureDictionary d;
  d.family_ = spec.family;
  switch (spec.family) {
    case Family::Hermite:
    case Family::Monomial:
    case Family::Legendre:
      if (spec.dimension <= 0) invalid("dimension must be positive");
      d.base_dimension_ = spec.dimension;
      break;
    case Family::RandomMixed:
      if (spec.mixed_rows <= 0 || spec.mixed_degree <= 0) {
        invalid("mixing shape must be positive");
      }
      if (spec.mixed_rows < spec.mixed_degree) {
        invalid("mixing matrix needs at least as many rows as monomials");
      }
      d.base_dimension_ = spec.mixed_degree;
      d.transform_ = draw_full_rank_gaussian(spec.mixed_rows, spec.mixed_degree, rng);
      break;
    case Family::Step: {
      std::vector<double> b = spec.breakpoints;
      if (b.empty()) {
        if (spec.dyadic_levels < 0) invalid("dyadic_levels must be nonnegative");
        b = dyadic_breakpoints(spec.dyadic_levels);
      }
      if (b.size() < 2) invalid("need at least two breakpoints");
      if (b.front() != 0.0 || b.back() != 1.0) invalid("breakpoints must start at 0 and end at 1");
      for (std::size_t i = 1; i < b.size(); ++i) {
        if (!(b[i] > b[i - 1])) invalid("breakpoints must be strictly increasing");
      }
      d.base_dimension_ = static_cast<Index>(b.size()) - 1;
      d.breakpoints_ = std::move(b);
      break;
    }
    case Family::BivariateMonomial:
      if (spec.per_axis_degree <= 0) invalid("per_axis_degree must be positive");
      d.per_axis_degree_ = spec.per_axis_degree;
      d.base_dimension_ = static_cast<Index>(spec.per_axis_degree) * spec.per_axis_degree;
      break;
  }
  return d;
}

bool FeatureDictionary::in_domain(Point p) const noexcept {
  switch (family_) {
    case Family::Step: return p.x >= 0.0 && p.x <= 1.0;
    case Family::Legendre: return p.x >= -1.0 && p.x <= 1.0;
    case Family::BivariateMonomial: return std::isfinite(p.x) && std::isfinite(p.y);
    default: return std::isfinite(p.x);
  }
}

void FeatureDictionary::fill_base(Point p, Eigen::Ref<Vector> out) const {
  const Index n = base_dimension_;
  const double x = p.x;
  switch (family_) {
    case Family::Hermite: {
      // Orthonormal probabilists' Hermite: h_{j+1} = (x h_j - sqrt(j) h_{j-1}) / sqrt(j+1).
      out(0) = 1.0;
      if (n > 1) out(1) = x;
      for (Index j = 1; j + 1 < n; ++j) {
        const double jd = static_cast<double>(j);
        out(j + 1) = (x * out(j) - std::sqrt(jd) * out(j - 1)) / std::sqrt(jd + 1.0);
      }
      break;
    }
    case Family::Legendre: {
      // Three-term recurrence for P_j, then scale by sqrt(2j+1) so the
      // functions are orthonormal for the uniform probability on [-1, 1].
      double prev = 1.0;
      double cur = x;
      out(0) = 1.0;
      if (n > 1) out(1) = std::sqrt(3.0) * x;
      for (Index j = 1; j + 1 < n; ++j) {
        const double jd = static_cast<double>(j);
        const double next = ((2.0 * jd + 1.0) * x * cur - jd * prev) / (jd + 1.0);
        prev = cur;
        cur = next;
        out(j + 1) = std::sqrt(2.0 * jd + 3.0) * next;
      }
      break;
    }
    case Family::Monomial:
    case Family::RandomMixed: {
      double power = 1.0;
      for (Index j = 0; j < n; ++j) {
        out(j) = power;
        power *= x;
      }
      break;
    }
    case Family::Step: {
      out.setZero();
      // Cells are [b_j, b_{j+1}) except the last, which is closed.
      auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
      Index cell = static_cast<Index>(it - breakpoints_.begin()) - 1;
      cell = std::clamp<Index>(cell, 0, n - 1);
      out(cell) = 1.0;
      break;
    }
    case Family::BivariateMonomial: {
      const int d = per_axis_degree_;
      double px = 1.0;
      for (int j = 0; j < d; ++j) {
        double py = 1.0;
        for (int k = 0; k < d; ++k) {
          out(j * d + k) = px * py;
          py *= p.y;
        }
        px *= x;
      }
      break;
    }
  }
}

void FeatureDictionary::check_domain(Point p) const {
  if (in_domain(p)) return;
  std::ostringstream msg;
  msg << "point (" << p.x << ", " << p.y << ") outside the domain of the "
      << to_string(family_) << " dictionary";
  throw Error(ErrorCode::DomainError, msg.str());
}

void FeatureDictionary::evaluate_base(Point p, Eigen::Ref<Vector> out) const {
  check_domain(p);
  fill_base(p, out);
}

void FeatureDictionary::evaluate(Point p, Eigen::Ref<Vector> out) const {
  check_domain(p);
  if (!transform_) {
    fill_base(p, out);
    return;
  }
  Vector base(base_dimension_);
  fill_base(p, base);
  out.noalias() = (*transform_) * base;
}

Vector FeatureDictionary::operator()(Point p) const {
  Vector out(dimension());
  evaluate(p, out);
  return out;
}

FeatureDictionary FeatureDictionary::transformed(const Matrix& t) const {
  if (t.cols() != dimension()) {
    throw Error(ErrorCode::InvalidShape, "transformed: column count must equal dimension");
  }
  FeatureDictionary out = *this;
  out.transform_ = transform_ ? Matrix(t * (*transform_)) : t;
  return out;
}

Matrix gaussian_moment_matrix(Index size) {
  Matrix m = Matrix::Zero(size, size);
  for (Index i = 0; i < size; ++i) {
    for (Index j = 0; j < size; ++j) {
      const Index p = i + j;
      if (p % 2 == 0) m(i, j) = double_factorial_odd(static_cast<int>(p / 2));
    }
  }
  return m;
}

std::optional<SpectralGramian> exact_gramian(const FeatureDictionary& dict,
                                             MeasureKind measure,
                                             SpectralOptions options) {
  const Index n = dict.base_dimension();
  std::optional<Matrix> base;
  switch (dict.family()) {
    case Family::Hermite:
      if (measure == MeasureKind::GaussianTruncated) base = Matrix::Identity(n, n);
      break;
    case Family::Legendre:
      if (measure == MeasureKind::UniformSym) base = Matrix::Identity(n, n);
      break;
    case Family::Monomial:
    case Family::RandomMixed:
      if (measure == MeasureKind::GaussianTruncated) base = gaussian_moment_matrix(n);
      break;
    case Family::Step:
      if (measure == MeasureKind::Uniform01) {
        Vector lengths(n);
        const auto& b = dict.breakpoints();
        for (Index j = 0; j < n; ++j) lengths(j) = b[j + 1] - b[j];
        base = lengths.asDiagonal().toDenseMatrix();
      }
      break;
    case Family::BivariateMonomial:
      break;
  }
  if (!base) return std::nullopt;
  if (const auto& t = dict.transform()) {
    return sym_eig((*t) * (*base) * t->transpose(), options);
  }
  return sym_eig(*base, options);
}

}  // namespace christoffel
