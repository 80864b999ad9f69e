#include "christoffel/linalg.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "christoffel/errors.hpp"

namespace christoffel {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidMatrix: return "InvalidMatrix";
    case ErrorCode::NotPSD: return "NotPSD";
    case ErrorCode::DegenerateReference: return "DegenerateReference";
    case ErrorCode::InvalidShape: return "InvalidShape";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::NumericalError: return "NumericalError";
    case ErrorCode::DegenerateDensity: return "DegenerateDensity";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IOError: return "IOError";
  }
  return "Unknown";
}

SpectralGramian sym_eig(const Matrix& matrix, SpectralOptions options) {
  if (matrix.rows() != matrix.cols()) {
    throw Error(ErrorCode::InvalidShape, "sym_eig: matrix is not square");
  }
  if (!matrix.allFinite()) {
    throw Error(ErrorCode::InvalidMatrix, "sym_eig: non-finite entry");
  }

  SpectralGramian out;
  out.options_ = options;
  out.matrix_ = 0.5 * (matrix + matrix.transpose());

  const Index n = matrix.rows();
  if (n == 0) return out;

  Eigen::SelfAdjointEigenSolver<Matrix> solver(out.matrix_);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::InvalidMatrix, "sym_eig: eigensolver failed");
  }
  // Eigen sorts ascending.
  out.eigenvalues_ = solver.eigenvalues().reverse();
  out.eigenvectors_ = solver.eigenvectors().rowwise().reverse();

  const double lmax = std::max(out.eigenvalues_(0), 0.0);
  const double threshold = options.rank_tolerance * lmax;
  if (out.eigenvalues_(n - 1) < -threshold) {
    std::ostringstream msg;
    msg << "sym_eig: eigenvalue " << out.eigenvalues_(n - 1)
        << " below -rank_tolerance*lambda_max";
    throw Error(ErrorCode::NotPSD, msg.str());
  }
  out.rank_ = 0;
  for (Index i = 0; i < n; ++i) {
    if (out.eigenvalues_(i) < 0.0) out.eigenvalues_(i) = 0.0;
    if (out.eigenvalues_(i) > threshold && lmax > 0.0) ++out.rank_;
  }
  return out;
}

Matrix SpectralGramian::floored_inverse_factor() const {
  const Index n = dimension();
  Matrix factor = Matrix::Zero(n, n);
  if (n == 0 || lambda_max() <= 0.0) return factor;
  const double eps = absolute_floor();
  for (Index i = 0; i < n; ++i) {
    // Eigenvalues at or below the rank threshold count as exact zeros.
    const double lambda = std::max(i < rank_ ? eigenvalues_(i) : 0.0, eps);
    if (lambda > 0.0) factor.col(i) = eigenvectors_.col(i) / std::sqrt(lambda);
  }
  return factor;
}

Matrix pinv_floored(const SpectralGramian& g) {
  const Index n = g.dimension();
  if (n == 0 || g.lambda_max() <= 0.0) return Matrix::Zero(n, n);
  const double eps = g.absolute_floor();
  Vector inv(n);
  for (Index i = 0; i < n; ++i) {
    const double lambda = std::max(i < g.rank() ? g.eigenvalues()(i) : 0.0, eps);
    inv(i) = lambda > 0.0 ? 1.0 / lambda : 0.0;
  }
  Matrix out = g.eigenvectors() * inv.asDiagonal() * g.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

Matrix range_basis(const SpectralGramian& g) {
  return g.eigenvectors().leftCols(g.rank());
}

FramingConstants framing_constants(const SpectralGramian& h,
                                   const SpectralGramian& g) {
  if (h.dimension() != g.dimension()) {
    throw Error(ErrorCode::InvalidShape, "framing_constants: dimension mismatch");
  }
  const Index r = g.rank();
  if (r == 0) {
    throw Error(ErrorCode::DegenerateReference,
                "framing_constants: reference Gramian is zero");
  }
  // Whitening on range(G): W = U_r Lambda_r^{-1/2}.
  const Matrix u = g.eigenvectors().leftCols(r);
  const Vector scale = g.eigenvalues().head(r).cwiseSqrt().cwiseInverse();
  const Matrix w = u * scale.asDiagonal();
  Matrix pencil = w.transpose() * h.matrix() * w;
  pencil = 0.5 * (pencil + pencil.transpose());

  Eigen::SelfAdjointEigenSolver<Matrix> solver(pencil, Eigen::EigenvaluesOnly);
  const double lmin = solver.eigenvalues()(0);
  const double lmax = solver.eigenvalues()(r - 1);

  constexpr double inf = std::numeric_limits<double>::infinity();
  FramingConstants out;
  out.upper = lmin > 0.0 ? 1.0 / lmin : inf;
  out.lower = lmax > 0.0 ? 1.0 / lmax : inf;
  // H living mostly on ker(G) makes lmax itself a rounding residue.
  const double reference = std::max(lmax, h.lambda_max() / g.lambda_max());
  if (lmax <= 0.0 || lmin <= g.options().rank_tolerance * reference) {
    out.gamma = inf;
  } else {
    out.gamma = lmax / lmin;
  }
  return out;
}

double frobenius_inner(const Matrix& x, const Matrix& y) {
  if (x.rows() != y.rows() || x.cols() != y.cols()) {
    throw Error(ErrorCode::InvalidShape, "frobenius_inner: shape mismatch");
  }
  return x.cwiseProduct(y).sum();
}

}  // namespace christoffel
