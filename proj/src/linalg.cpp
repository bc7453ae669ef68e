#include "t3star/linalg.hpp"

#include "t3star/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace t3star {

namespace {

struct Svd {
  Matrix u;
  Vector s;
  Matrix v;
};

bool svd_ok(const Svd& d, bool want_u, bool want_v) {
  return d.s.allFinite() && (!want_u || d.u.allFinite()) && (!want_v || d.v.allFinite());
}

Svd plain_svd(const Matrix& a, bool want_u, bool want_v, bool full_v) {
  Svd out;
  unsigned opts = 0;
  if (want_u) opts |= Eigen::ComputeThinU;
  if (want_v) opts |= full_v ? Eigen::ComputeFullV : Eigen::ComputeThinV;
  // One-sided Jacobi throughout: Eigen 3.4.0's divide-and-conquer SVD returns
  // wrong (still orthonormal) singular vectors on the rank-deficient,
  // repeated-singular-value matrices projector algebra produces.
  Eigen::JacobiSVD<Matrix, Eigen::ColPivHouseholderQRPreconditioner> dec(a, opts);
  out.s = dec.singularValues();
  if (want_u) out.u = dec.matrixU();
  if (want_v) out.v = dec.matrixV();
  if (!svd_ok(out, want_u, want_v)) throw NumericalDegeneracyError("SVD failed to converge");
  return out;
}

// Thin SVD; `full_v` requests the complete right singular basis (needed to
// read off null spaces of wide matrices).
//
// With drop_rel > 0 a pivoted QR runs first and trailing rows of R are
// discarded once the Frobenius bound sqrt(n - k) |R_kk| on the remaining
// block falls below drop_rel * |R_00|. Singular values of the rest move by
// at most that bound, so callers pass a drop_rel well under their rank
// cutoff. Only the leading singular triplets are returned in that case.
Svd svd(const Matrix& a, bool want_u, bool want_v, bool full_v = false, double drop_rel = 0.0) {
  if (a.rows() == 0 || a.cols() == 0) {
    Svd out;
    out.u = Matrix(a.rows(), 0);
    out.s = Vector(0);
    out.v = full_v ? Matrix::Identity(a.cols(), a.cols()) : Matrix(a.cols(), 0);
    return out;
  }
  const Index d = std::min(a.rows(), a.cols());
  if (full_v || drop_rel <= 0.0 || d < 8) return plain_svd(a, want_u, want_v, full_v);

  Eigen::ColPivHouseholderQR<Matrix> qr(a);
  const Matrix& r = qr.matrixQR();
  const double r00 = std::abs(r(0, 0));
  if (!std::isfinite(r00)) throw NumericalDegeneracyError("QR produced non-finite values");
  const double thr = drop_rel * r00;
  Index k = 0;
  while (k < d &&
         std::abs(r(k, k)) * std::sqrt(static_cast<double>(a.cols() - k)) > thr) {
    ++k;
  }
  if (k * 4 > d * 3) return plain_svd(a, want_u, want_v, false);

  Svd out;
  if (k == 0) {
    out.u = Matrix(a.rows(), 0);
    out.s = Vector(0);
    out.v = Matrix(a.cols(), 0);
    return out;
  }
  const Matrix top = r.topRows(k).triangularView<Eigen::Upper>();
  const Svd inner = plain_svd(top, want_u, want_v, false);
  out.s = inner.s;
  if (want_u) {
    Matrix qk = Matrix::Identity(a.rows(), k);
    qk.applyOnTheLeft(qr.householderQ());
    out.u = qk * inner.u;
  }
  if (want_v) out.v = qr.colsPermutation() * inner.v;
  return out;
}

double drop_for(const Matrix& a, const Tolerance& tol) {
  return 1e-2 * tol.rank_rel * static_cast<double>(std::max(a.rows(), a.cols()));
}

Index count_above(const Vector& s, Index rows, Index cols, const Tolerance& tol,
                  double scale) {
  if (s.size() == 0) return 0;
  const double ref = std::max(s(0), scale);
  if (ref <= 0.0) return 0;
  const double cut = tol.rank_rel * ref * static_cast<double>(std::max(rows, cols));
  Index r = 0;
  while (r < s.size() && s(r) > cut) ++r;
  return r;
}

Basis trusted(Matrix m) { return Basis::unchecked(std::move(m)); }

}  // namespace

void Tolerance::validate() const {
  if (!(rank_rel > 0.0 && rank_rel < 1.0) || !(subspace_abs > 0.0 && subspace_abs < 1.0)) {
    throw InputError("tolerances must lie strictly between 0 and 1");
  }
}

Basis::Basis(Matrix orthonormal_columns) : vectors_(std::move(orthonormal_columns)) {
  if (vectors_.cols() > vectors_.rows()) {
    throw DimensionError("basis rank exceeds ambient dimension");
  }
  if (vectors_.cols() > 0) {
    const Matrix gram = vectors_.transpose() * vectors_;
    const double defect = (gram - Matrix::Identity(gram.rows(), gram.cols())).norm();
    if (!(defect < 1e-10 * std::max<double>(1.0, std::sqrt(static_cast<double>(gram.rows()))))) {
      throw InputError("basis columns are not orthonormal");
    }
  }
}

Basis Basis::unchecked(Matrix orthonormal_columns) {
  Basis b;
  b.vectors_ = std::move(orthonormal_columns);
  return b;
}

Matrix Basis::projector() const { return vectors_ * vectors_.transpose(); }

void require_finite(const Matrix& a, const char* what) {
  if (!a.allFinite()) {
    throw InputError(std::string(what) + " contains non-finite entries");
  }
}

double largest_singular_value(const Matrix& a) {
  require_finite(a, "matrix");
  const Svd d = svd(a, false, false, false, 1e-10);
  return d.s.size() ? d.s(0) : 0.0;
}

Index numerical_rank(const Matrix& a, const Tolerance& tol, double scale) {
  require_finite(a, "matrix");
  const Svd d = svd(a, false, false, false, drop_for(a, tol));
  return count_above(d.s, a.rows(), a.cols(), tol, scale);
}

Basis orthonormal_basis(const Matrix& a, const Tolerance& tol, double scale) {
  require_finite(a, "matrix");
  Svd d = svd(a, true, false, false, drop_for(a, tol));
  const Index r = count_above(d.s, a.rows(), a.cols(), tol, scale);
  return trusted(d.u.leftCols(r));
}

Basis leading_basis(const Matrix& a, Index rank) {
  if (rank < 0 || rank > std::min(a.rows(), a.cols())) {
    throw DimensionError("requested rank " + std::to_string(rank) + " exceeds matrix dimensions");
  }
  if (rank == 0) return Basis(a.rows());
  Svd d = svd(a, true, false, false, drop_for(a, Tolerance{}));
  if (d.u.cols() < rank) d = svd(a, true, false);
  return trusted(d.u.leftCols(rank));
}

Matrix projector(const Matrix& a, const Tolerance& tol) {
  return orthonormal_basis(a, tol).projector();
}

double subspace_distance(const Basis& a, const Basis& b) {
  if (a.ambient_dim() != b.ambient_dim()) {
    throw DimensionError("subspaces live in spaces of different dimension");
  }
  // ||P_a - P_b||_F^2 = ||(I - P_b) U_a||^2 + ||(I - P_a) U_b||^2; the
  // residual form avoids the cancellation in r_a + r_b - 2 ||U_a' U_b||^2.
  const Matrix& ua = a.vectors();
  const Matrix& ub = b.vectors();
  const double ra = (ua - ub * (ub.transpose() * ua)).squaredNorm();
  const double rb = (ub - ua * (ua.transpose() * ub)).squaredNorm();
  return std::sqrt(ra + rb);
}

double subspace_distance(const Matrix& a, const Matrix& b, const Tolerance& tol) {
  if (a.rows() != b.rows()) throw DimensionError("row counts differ");
  return subspace_distance(orthonormal_basis(a, tol), orthonormal_basis(b, tol));
}

bool subspace_equal(const Basis& a, const Basis& b, const Tolerance& tol) {
  return subspace_distance(a, b) < tol.subspace_abs;
}

bool subspace_equal(const Matrix& a, const Matrix& b, const Tolerance& tol) {
  return subspace_distance(a, b, tol) < tol.subspace_abs;
}

double containment_gap(const Basis& inner, const Basis& outer) {
  if (inner.ambient_dim() != outer.ambient_dim()) throw DimensionError("row counts differ");
  const Matrix& ui = inner.vectors();
  const Matrix& uo = outer.vectors();
  return (ui - uo * (uo.transpose() * ui)).norm();
}

Basis relative_complement(const Basis& inner, const Basis& outer, const Tolerance& tol) {
  if (inner.ambient_dim() != outer.ambient_dim()) throw DimensionError("row counts differ");
  if (containment_gap(inner, outer) >= tol.subspace_abs) {
    throw PreconditionError("inner subspace is not contained in outer subspace");
  }
  const Index k = outer.rank() - inner.rank();
  if (k < 0) throw PreconditionError("inner subspace has larger rank than outer");
  const Matrix& ui = inner.vectors();
  const Matrix& uo = outer.vectors();
  return leading_basis(uo - ui * (ui.transpose() * uo), k);
}

Basis relative_complement(const Matrix& inner, const Matrix& outer, const Tolerance& tol) {
  if (inner.rows() != outer.rows()) throw DimensionError("row counts differ");
  return relative_complement(orthonormal_basis(inner, tol), orthonormal_basis(outer, tol), tol);
}

Basis subspace_intersect(const Basis& a, const Basis& b, const Tolerance& tol) {
  if (a.ambient_dim() != b.ambient_dim()) throw DimensionError("row counts differ");
  const Index m = a.ambient_dim();
  if (a.rank() == 0 || b.rank() == 0) return Basis(m);
  Matrix stacked(m, a.rank() + b.rank());
  stacked << a.vectors(), -b.vectors();
  const Svd d = svd(stacked, false, true, true);
  const Index r = count_above(d.s, stacked.rows(), stacked.cols(), tol, 0.0);
  const Index k = stacked.cols() - r;
  if (k == 0) return Basis(m);
  // Null vectors (x; y) with U_a x = U_b y; U_a x spans the intersection.
  const Matrix x = d.v.bottomRightCorner(stacked.cols(), k).topRows(a.rank());
  return leading_basis(a.vectors() * x, k);
}

Basis subspace_intersect(const Matrix& a, const Matrix& b, const Tolerance& tol) {
  if (a.rows() != b.rows()) throw DimensionError("row counts differ");
  return subspace_intersect(orthonormal_basis(a, tol), orthonormal_basis(b, tol), tol);
}

Basis subspace_sum(const Basis& a, const Basis& b, const Tolerance& tol) {
  return orthonormal_basis(hcat(a.vectors(), b.vectors()), tol);
}

Matrix generalized_inverse(const Matrix& a, const Tolerance& tol) {
  require_finite(a, "matrix");
  const Svd d = svd(a, true, true, false, drop_for(a, tol));
  const Index r = count_above(d.s, a.rows(), a.cols(), tol, 0.0);
  Matrix out = Matrix::Zero(a.cols(), a.rows());
  if (r == 0) return out;
  const Vector inv = d.s.head(r).cwiseInverse();
  out = d.v.leftCols(r) * inv.asDiagonal() * d.u.leftCols(r).transpose();
  return out;
}

double quadratic_form(const Vector& y, const Matrix& p) {
  if (p.rows() != y.size() || p.cols() != y.size()) {
    throw DimensionError("quadratic form: vector length does not match matrix");
  }
  return y.dot(p * y);
}

Basis null_space(const Matrix& a, const Tolerance& tol) {
  require_finite(a, "matrix");
  const Svd d = svd(a, false, true, true);
  const Index r = count_above(d.s, a.rows(), a.cols(), tol, 0.0);
  return trusted(d.v.rightCols(a.cols() - r));
}

Matrix hcat(const std::vector<const Matrix*>& blocks, Index rows) {
  Index cols = 0;
  for (const Matrix* b : blocks) {
    if (b->rows() != rows) throw DimensionError("hcat: row counts differ");
    cols += b->cols();
  }
  Matrix out(rows, cols);
  Index at = 0;
  for (const Matrix* b : blocks) {
    out.middleCols(at, b->cols()) = *b;
    at += b->cols();
  }
  return out;
}

Matrix hcat(const Matrix& a, const Matrix& b) { return hcat({&a, &b}, a.rows()); }

double symmetry_defect(const Matrix& p) { return (p - p.transpose()).norm(); }

double idempotency_defect(const Matrix& p) { return (p * p - p).norm(); }

}  // namespace t3star
