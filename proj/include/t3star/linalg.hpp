#pragma once

// Tolerance-controlled subspace algebra over small dense matrices.
//
// Every rank decision funnels through one SVD routine. A subspace is carried
// around as a Basis (orthonormal columns); most operations accept either a raw
// spanning matrix or a Basis so callers can avoid recomputing decompositions.

#include <Eigen/Dense>

#include <vector>

namespace t3star {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

struct Tolerance {
  /// Singular values at or below rank_rel * sigma_max * max(rows, cols) are
  /// treated as zero.
  double rank_rel = 1e-12;
  /// Two subspaces are equal when their projectors differ by less than this
  /// in Frobenius norm.
  double subspace_abs = 1e-8;

  void validate() const;
};

/// Orthonormal column basis of a subspace of R^ambient_dim.
class Basis {
 public:
  Basis() = default;
  /// Empty (rank 0) subspace of R^ambient_dim.
  explicit Basis(Index ambient_dim) : vectors_(ambient_dim, 0) {}
  /// Takes ownership of columns that must already be orthonormal; checked to
  /// 1e-10.
  explicit Basis(Matrix orthonormal_columns);
  /// Skips the orthonormality check; for columns taken directly from an SVD.
  static Basis unchecked(Matrix orthonormal_columns);

  Index ambient_dim() const { return vectors_.rows(); }
  Index rank() const { return vectors_.cols(); }
  const Matrix& vectors() const { return vectors_; }

  Matrix projector() const;

 private:
  Matrix vectors_;
};

/// Throws InputError when any entry is NaN or infinite.
void require_finite(const Matrix& a, const char* what);

/// 0 for an empty matrix.
double largest_singular_value(const Matrix& a);

/// Numerical rank under the tolerance's relative cutoff. A positive `scale`
/// raises the reference value used in place of sigma_max, for matrices that
/// are products of exact-zero-prone computations.

Index numerical_rank(const Matrix& a, const Tolerance& tol = {}, double scale = 0.0);

Basis orthonormal_basis(const Matrix& a, const Tolerance& tol = {}, double scale = 0.0);

/// Leading `rank` left singular vectors of `a`. Used where the rank of a
/// derived matrix is known structurally and must not be re-decided from
/// rounding noise.
Basis leading_basis(const Matrix& a, Index rank);

Matrix projector(const Matrix& a, const Tolerance& tol = {});

/// Frobenius distance between the orthogonal projectors onto two subspaces.
double subspace_distance(const Basis& a, const Basis& b);
double subspace_distance(const Matrix& a, const Matrix& b, const Tolerance& tol = {});

bool subspace_equal(const Basis& a, const Basis& b, const Tolerance& tol = {});
bool subspace_equal(const Matrix& a, const Matrix& b, const Tolerance& tol = {});

/// Frobenius norm of the part of `inner` lying outside `outer`.
double containment_gap(const Basis& inner, const Basis& outer);

/// Basis of sp(outer) ∩ sp(inner)^⊥. Requires sp(inner) ⊆ sp(outer).
Basis relative_complement(const Basis& inner, const Basis& outer, const Tolerance& tol = {});
Basis relative_complement(const Matrix& inner, const Matrix& outer, const Tolerance& tol = {});

/// Basis of sp(a) ∩ sp(b), from the null space of [U_a, -U_b].
Basis subspace_intersect(const Basis& a, const Basis& b, const Tolerance& tol = {});
Basis subspace_intersect(const Matrix& a, const Matrix& b, const Tolerance& tol = {});

/// Basis of sp(a) + sp(b).
Basis subspace_sum(const Basis& a, const Basis& b, const Tolerance& tol = {});

/// Moore-Penrose inverse.
Matrix generalized_inverse(const Matrix& a, const Tolerance& tol = {});

/// y' P y.
double quadratic_form(const Vector& y, const Matrix& p);

/// Orthonormal basis of the null space {x : a x = 0}.
Basis null_space(const Matrix& a, const Tolerance& tol = {});

/// Column-wise concatenation; every block must have `rows` rows.
Matrix hcat(const std::vector<const Matrix*>& blocks, Index rows);
Matrix hcat(const Matrix& a, const Matrix& b);

/// Symmetric-part and idempotency defects of a would-be projector, in
/// Frobenius norm.
double symmetry_defect(const Matrix& p);
double idempotency_defect(const Matrix& p);

}  // namespace t3star
