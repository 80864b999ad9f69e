#pragma once

#include <optional>
#include <random>
#include <vector>

#include "christoffel/linalg.hpp"
#include "christoffel/types.hpp"

namespace christoffel {

struct DictionarySpec {
  Family family = Family::Hermite;
  /// Number of functions for Hermite, Monomial and Legendre.
  int dimension = 8;
  /// RandomMixed: B = S b with S of shape mixed_rows x mixed_degree and b the
  /// monomials of degree 0..mixed_degree-1.
  int mixed_rows = 16;
  int mixed_degree = 8;
  /// Step: strictly increasing, first 0 and last 1. Empty selects the dyadic
  /// partition (0, 2^-levels, ..., 2^0).
  std::vector<double> breakpoints;
  int dyadic_levels = 17;
  /// BivariateMonomial: x^j y^k for j, k < per_axis_degree.
  int per_axis_degree = 8;

  static DictionarySpec hermite(int dimension = 8);
  static DictionarySpec monomial(int dimension);
  static DictionarySpec legendre(int dimension = 10);
  static DictionarySpec random_mixed(int rows = 16, int degree = 8);
  static DictionarySpec step_dyadic(int levels = 17);
  static DictionarySpec step(std::vector<double> breakpoints);
  static DictionarySpec bivariate_monomial(int per_axis_degree = 8);
};

/// Dyadic breakpoints (0, 2^-levels, 2^-(levels-1), ..., 1).
std::vector<double> dyadic_breakpoints(int levels);

/// Evaluatable feature map B : X -> R^D. Optionally composed with a linear
/// output map T, in which case B = T b for the base family b.
class FeatureDictionary {
 public:
  Family family() const noexcept { return family_; }
  Index dimension() const noexcept {
    return transform_ ? transform_->rows() : base_dimension_;
  }
  Index base_dimension() const noexcept { return base_dimension_; }
  const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }
  int per_axis_degree() const noexcept { return per_axis_degree_; }
  /// The output map T, if any (the mixing matrix S for RandomMixed).
  const std::optional<Matrix>& transform() const noexcept { return transform_; }

  bool in_domain(Point p) const noexcept;

  /// Writes B(p) into `out` (size dimension()). Throws DomainError outside
  /// the domain.
  void evaluate(Point p, Eigen::Ref<Vector> out) const;
  Vector operator()(Point p) const;

  /// Writes the untransformed features b(p) (size base_dimension()).
  void evaluate_base(Point p, Eigen::Ref<Vector> out) const;

  /// Dictionary T * B.
  FeatureDictionary transformed(const Matrix& t) const;

  friend FeatureDictionary build_dictionary(const DictionarySpec& spec,
                                            std::mt19937_64& rng);

 private:
  void fill_base(Point p, Eigen::Ref<Vector> out) const;
  void check_domain(Point p) const;

  Family family_ = Family::Hermite;
  Index base_dimension_ = 0;
  std::vector<double> breakpoints_;
  int per_axis_degree_ = 0;
  std::optional<Matrix> transform_;
};

/// Throws InvalidSpec on nonpositive dimensions or bad breakpoints. The rng
/// is consumed only by RandomMixed (Gaussian S, redrawn until full column
/// rank).
FeatureDictionary build_dictionary(const DictionarySpec& spec, std::mt19937_64& rng);

/// Closed-form Gramian for the (dictionary, measure) pairs where one is known:
/// Hermite/Gaussian, Legendre/uniform[-1,1], Step/uniform[0,1] and
/// Monomial or RandomMixed/Gaussian. std::nullopt otherwise; callers then use
/// grid quadrature.
std::optional<SpectralGramian> exact_gramian(const FeatureDictionary& dict,
                                             MeasureKind measure,
                                             SpectralOptions options = {});

/// Gaussian moment (Hankel) matrix M_ij = E[x^(i+j)], i, j < size.
Matrix gaussian_moment_matrix(Index size);

}  // namespace christoffel
