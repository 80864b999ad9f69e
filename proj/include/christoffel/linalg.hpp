#pragma once

#include <Eigen/Dense>

namespace christoffel {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

struct SpectralOptions {
  /// Eigenvalues at or below rank_tolerance * lambda_max count as zero.
  double rank_tolerance = 1e-12;
  /// Relative floor applied before inversion, see pinv_floored().
  double floor_epsilon = 1e-12;
};

/// Symmetric positive semi-definite matrix together with its spectral
/// decomposition. Immutable once built; eigenvalues are stored in
/// nonincreasing order and small negative eigenvalues are clamped to zero.
class SpectralGramian {
 public:
  SpectralGramian() = default;

  const Matrix& matrix() const noexcept { return matrix_; }
  const Vector& eigenvalues() const noexcept { return eigenvalues_; }
  const Matrix& eigenvectors() const noexcept { return eigenvectors_; }
  const SpectralOptions& options() const noexcept { return options_; }

  Index dimension() const noexcept { return matrix_.rows(); }
  Index rank() const noexcept { return rank_; }
  double lambda_max() const noexcept {
    return eigenvalues_.size() == 0 ? 0.0 : eigenvalues_(0);
  }
  /// Smallest eigenvalue above the rank threshold, 0 for the zero matrix.
  double lambda_min_positive() const noexcept {
    return rank_ == 0 ? 0.0 : eigenvalues_(rank_ - 1);
  }
  /// Absolute floor floor_epsilon * lambda_max.
  double absolute_floor() const noexcept {
    return options_.floor_epsilon * lambda_max();
  }

  /// Factor L with L * L^T == pinv_floored(*this). Columns whose eigenvalue
  /// is exactly zero after flooring (floor 0) are zero.
  Matrix floored_inverse_factor() const;

  friend SpectralGramian sym_eig(const Matrix& matrix, SpectralOptions options);

 private:
  Matrix matrix_;
  Vector eigenvalues_;
  Matrix eigenvectors_;
  SpectralOptions options_;
  Index rank_ = 0;
};

/// Symmetrizes `matrix` and decomposes it. Throws InvalidMatrix on
/// non-finite input and NotPSD on eigenvalues below -rank_tolerance*lambda_max.
SpectralGramian sym_eig(const Matrix& matrix, SpectralOptions options = {});

/// U diag(1/max(lambda_i, eps)) U^T with eps = floor_epsilon * lambda_max,
/// where eigenvalues beyond rank() are taken as 0. With floor_epsilon == 0
/// this is the Moore-Penrose pseudo-inverse; the zero matrix maps to the zero
/// matrix.
Matrix pinv_floored(const SpectralGramian& g);

struct FramingConstants {
  double upper = 0.0;  // C: H >= G / C on range(G)
  double lower = 0.0;  // c: H <= G / c on range(G)
  double gamma = 0.0;  // C / c, +inf when the pencil is singular
};

/// Tightest constants of C^{-1} G <= H <= c^{-1} G, evaluated on range(G).
/// Throws DegenerateReference when g has rank zero.
FramingConstants framing_constants(const SpectralGramian& h,
                                   const SpectralGramian& g);

/// Sum_ij x_ij y_ij. Throws InvalidShape on mismatch.
double frobenius_inner(const Matrix& x, const Matrix& y);

/// Orthonormal basis of range(g) (the leading rank() eigenvectors).
Matrix range_basis(const SpectralGramian& g);

}  // namespace christoffel
