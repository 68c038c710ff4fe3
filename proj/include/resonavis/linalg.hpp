#pragma once

// Numerical kernels: sparse products, sparse direct factorizations, a dense
// complex Schur/QR eigensolver for small projected matrices, Arnoldi, and a
// Krylov-Schur restarted eigensolver built on top of them.

#include <Eigen/Dense>
#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "resonavis/assembly.hpp"
#include "resonavis/error.hpp"

namespace resonavis {

using cd = std::complex<double>;
using VectorC = Eigen::VectorXcd;
using MatrixC = Eigen::MatrixXcd;

template <typename Scalar, typename Vec>
Eigen::Matrix<std::common_type_t<Scalar, typename Vec::Scalar>, Eigen::Dynamic, 1> spmv(
    const Eigen::SparseMatrix<Scalar, Eigen::RowMajor, int>& a, const Vec& x) {
  if (a.cols() != x.size()) throw Error(ErrorCode::dimension_mismatch, "spmv: columns != vector length");
  using Out = std::common_type_t<Scalar, typename Vec::Scalar>;
  return a.template cast<Out>() * x.template cast<Out>();
}

/// Induced 1-norm (maximum absolute column sum).
template <typename Scalar>
double norm1(const Eigen::SparseMatrix<Scalar, Eigen::RowMajor, int>& a) {
  Eigen::VectorXd colsum = Eigen::VectorXd::Zero(a.cols());
  for (int r = 0; r < a.outerSize(); ++r) {
    for (typename Eigen::SparseMatrix<Scalar, Eigen::RowMajor, int>::InnerIterator it(a, r); it; ++it) {
      colsum[it.col()] += std::abs(it.value());
    }
  }
  return a.cols() == 0 ? 0.0 : colsum.maxCoeff();
}

// ---------------------------------------------------------------------------
// Sparse direct factorizations

/// Cholesky (LL^T) of a real symmetric positive definite matrix with an
/// approximate minimum degree ordering.
class SpdFactorization {
 public:
  explicit SpdFactorization(const RealSparse& a) : n_(a.rows()) {
    if (a.rows() != a.cols()) throw Error(ErrorCode::dimension_mismatch, "factor_spd: matrix not square");
    llt_.compute(Eigen::SparseMatrix<double>(a));
    if (llt_.info() != Eigen::Success) {
      throw Error(ErrorCode::not_positive_definite, "factor_spd: nonpositive pivot encountered");
    }
  }

  Eigen::Index size() const { return n_; }

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
    check(b.size());
    return llt_.solve(b);
  }

  VectorC solve(const VectorC& b) const {
    check(b.size());
    VectorC x(b.size());
    x.real() = llt_.solve(Eigen::VectorXd(b.real()));
    x.imag() = llt_.solve(Eigen::VectorXd(b.imag()));
    return x;
  }

 private:
  void check(Eigen::Index m) const {
    if (m != n_) throw Error(ErrorCode::dimension_mismatch, "solve: rhs length != factor dimension");
  }

  Eigen::Index n_;
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>, Eigen::Lower, Eigen::AMDOrdering<int>> llt_;
};

/// Sparse LU with partial pivoting of a complex square matrix, preceded by an
/// approximate minimum degree ordering of the symmetrized pattern.
class ComplexFactorization {
 public:
  explicit ComplexFactorization(const ComplexSparse& a) : n_(a.rows()) {
    if (a.rows() != a.cols()) throw Error(ErrorCode::dimension_mismatch, "factor_complex: matrix not square");
    Eigen::SparseMatrix<cd> col_major(a);
    col_major.makeCompressed();
    lu_.analyzePattern(col_major);
    lu_.factorize(col_major);
    if (lu_.info() != Eigen::Success) {
      throw Error(ErrorCode::singular_matrix, "factor_complex: zero pivot after pivoting");
    }
  }

  Eigen::Index size() const { return n_; }

  VectorC solve(const VectorC& b) const {
    if (b.size() != n_) throw Error(ErrorCode::dimension_mismatch, "solve: rhs length != factor dimension");
    return lu_.solve(b);
  }

 private:
  Eigen::Index n_;
  Eigen::SparseLU<Eigen::SparseMatrix<cd>, Eigen::AMDOrdering<int>> lu_;
};

inline SpdFactorization factor_spd(const RealSparse& a) { return SpdFactorization(a); }
inline ComplexFactorization factor_complex(const ComplexSparse& a) { return ComplexFactorization(a); }

inline Eigen::VectorXd solve(const SpdFactorization& f, const Eigen::VectorXd& b) { return f.solve(b); }
inline VectorC solve(const SpdFactorization& f, const VectorC& b) { return f.solve(b); }
inline VectorC solve(const ComplexFactorization& f, const VectorC& b) { return f.solve(b); }

// ---------------------------------------------------------------------------
// Dense complex Schur decomposition

namespace detail {

// Rotation G = [c s; -conj(s) c] with G [x; y] = [r; 0], c real.
struct Givens {
  double c = 1.0;
  cd s = 0.0;

  static Givens make(cd x, cd y) {
    const double ax = std::abs(x);
    const double ay = std::abs(y);
    if (ay == 0.0) return {1.0, 0.0};
    if (ax == 0.0) return {0.0, std::conj(y) / ay};
    const double r = std::hypot(ax, ay);
    return {ax / r, (x / ax) * std::conj(y) / r};
  }

  // rows k, k+1 <- G * rows, columns [c0, c1)
  void apply_rows(MatrixC& a, Eigen::Index k, Eigen::Index c0, Eigen::Index c1) const {
    for (Eigen::Index j = c0; j < c1; ++j) {
      const cd u = a(k, j);
      const cd v = a(k + 1, j);
      a(k, j) = c * u + s * v;
      a(k + 1, j) = -std::conj(s) * u + c * v;
    }
  }

  // columns k, k+1 <- columns * G^H, rows [r0, r1)
  void apply_cols(MatrixC& a, Eigen::Index k, Eigen::Index r0, Eigen::Index r1) const {
    for (Eigen::Index i = r0; i < r1; ++i) {
      const cd u = a(i, k);
      const cd v = a(i, k + 1);
      a(i, k) = c * u + std::conj(s) * v;
      a(i, k + 1) = -s * u + c * v;
    }
  }
};

}  // namespace detail

/// Reduces an upper Hessenberg matrix in place to upper triangular Schur form
/// T = Z^H H Z with single-shift QR sweeps (Wilkinson shift, exceptional shifts
/// after 10 and 20 stalled sweeps) and deflation. `z`, when non-null, must hold
/// a unitary matrix on entry and is updated to z * Z. Returns false if some
/// eigenvalue needs more than `max_sweeps` sweeps; `t` then holds a partial
/// result whose converged trailing diagonal is still valid.
inline bool schur_hessenberg(MatrixC& t, MatrixC* z, int max_sweeps = 50) {
  const Eigen::Index n = t.rows();
  const double eps = std::numeric_limits<double>::epsilon();
  const double smallnum = std::numeric_limits<double>::min() / eps;
  Eigen::Index hi = n - 1;
  int sweeps = 0;
  while (hi > 0) {
    Eigen::Index lo = hi;
    while (lo > 0) {
      const double sub = std::abs(t(lo, lo - 1));
      const double scale = std::abs(t(lo - 1, lo - 1)) + std::abs(t(lo, lo));
      if (sub <= eps * scale || sub <= smallnum) break;
      --lo;
    }
    if (lo > 0) t(lo, lo - 1) = 0.0;
    if (lo == hi) {
      --hi;
      sweeps = 0;
      continue;
    }
    if (++sweeps > max_sweeps) return false;

    cd shift;
    if (sweeps == 10 || sweeps == 20) {
      shift = t(hi, hi) + cd(0.75 * std::abs(t(hi, hi - 1)), 0.0);
    } else {
      const cd a = t(hi - 1, hi - 1), b = t(hi - 1, hi), c = t(hi, hi - 1), d = t(hi, hi);
      const cd half = 0.5 * (a - d);
      const cd disc = std::sqrt(half * half + b * c);
      const cd mu1 = d + half + disc;
      const cd mu2 = d + half - disc;
      shift = std::abs(mu1 - d) < std::abs(mu2 - d) ? mu1 : mu2;
    }

    // Implicit single-shift bulge chase on the active block [lo, hi].
    for (Eigen::Index k = lo; k < hi; ++k) {
      detail::Givens g;
      if (k == lo) {
        g = detail::Givens::make(t(lo, lo) - shift, t(lo + 1, lo));
      } else {
        g = detail::Givens::make(t(k, k - 1), t(k + 1, k - 1));
      }
      g.apply_rows(t, k, k == lo ? lo : k - 1, n);
      if (k > lo) t(k + 1, k - 1) = 0.0;
      g.apply_cols(t, k, 0, std::min(k + 3, hi + 1));
      if (z) g.apply_cols(*z, k, 0, z->rows());
    }
  }
  for (Eigen::Index i = 1; i < n; ++i) t(i, i - 1) = 0.0;
  return true;
}

/// Swaps the adjacent diagonal entries k and k+1 of an upper triangular Schur
/// factor, updating the Schur vectors.
inline void schur_swap(MatrixC& t, MatrixC& z, Eigen::Index k) {
  const cd t11 = t(k, k);
  const cd t22 = t(k + 1, k + 1);
  if (t11 == t22) return;
  const auto g = detail::Givens::make(t(k, k + 1), t22 - t11);
  g.apply_rows(t, k, k, t.cols());
  g.apply_cols(t, k, 0, k + 2);
  g.apply_cols(z, k, 0, z.rows());
  t(k, k) = t22;
  t(k + 1, k + 1) = t11;
  t(k + 1, k) = 0.0;
}

/// Eigenvector of upper triangular T for diagonal entry j, by back substitution.
inline VectorC triangular_eigenvector(const MatrixC& t, Eigen::Index j) {
  const double tiny = std::numeric_limits<double>::epsilon() * std::max(t.cwiseAbs().maxCoeff(), 1e-300);
  VectorC y = VectorC::Zero(t.rows());
  y[j] = 1.0;
  for (Eigen::Index i = j - 1; i >= 0; --i) {
    cd sum = 0.0;
    for (Eigen::Index l = i + 1; l <= j; ++l) sum += t(i, l) * y[l];
    cd denom = t(i, i) - t(j, j);
    if (std::abs(denom) < tiny) denom = tiny;
    y[i] = -sum / denom;
  }
  return y / y.norm();
}

struct HessenbergEigResult {
  std::vector<cd> values;
  bool converged = true;
};

/// Eigenvalues of a complex upper Hessenberg matrix (k <= 200).
inline HessenbergEigResult hessenberg_eig(const MatrixC& h) {
  if (h.rows() != h.cols()) throw Error(ErrorCode::dimension_mismatch, "hessenberg_eig: matrix not square");
  MatrixC t = h;
  HessenbergEigResult out;
  out.converged = schur_hessenberg(t, nullptr);
  out.values.resize(static_cast<std::size_t>(t.rows()));
  for (Eigen::Index i = 0; i < t.rows(); ++i) out.values[static_cast<std::size_t>(i)] = t(i, i);
  return out;
}

/// Complex Schur form A = Z T Z^H of a general dense matrix.
struct SchurForm {
  MatrixC t;
  MatrixC z;
  bool converged = true;
};

inline SchurForm schur(const MatrixC& a) {
  Eigen::HessenbergDecomposition<MatrixC> hess(a);
  SchurForm s;
  s.t = hess.matrixH();
  s.z = hess.matrixQ();
  s.converged = schur_hessenberg(s.t, &s.z);
  return s;
}

// ---------------------------------------------------------------------------
// Arnoldi

using LinearOperator = std::function<VectorC(const VectorC&)>;

struct KrylovState {
  MatrixC basis;       // n x (k+1), orthonormal columns
  MatrixC hessenberg;  // (k+1) x k
  Eigen::Index dimension = 0;
  bool breakdown = false;
};

namespace detail {

// Classical Gram-Schmidt against the first `cols` columns of v with one
// re-orthogonalization pass; returns the projection coefficients.
inline VectorC orthogonalize(const MatrixC& v, Eigen::Index cols, VectorC& w) {
  auto basis = v.leftCols(cols);
  VectorC h = basis.adjoint() * w;
  w.noalias() -= basis * h;
  VectorC correction = basis.adjoint() * w;
  w.noalias() -= basis * correction;
  h += correction;
  return h;
}

}  // namespace detail

/// k steps of Arnoldi on `op` from `start`. On breakdown (residual below
/// 1e-12 * ||start|| scale) the state is truncated to the invariant subspace.
inline KrylovState arnoldi(const LinearOperator& op, const VectorC& start, Eigen::Index k) {
  const double start_norm = start.norm();
  if (!(start_norm > 0.0)) throw Error(ErrorCode::zero_start_vector, "arnoldi: start vector is zero");
  const Eigen::Index n = start.size();
  if (k < 1 || k > n) throw Error(ErrorCode::dimension_mismatch, "arnoldi: need 1 <= k <= n");

  KrylovState s;
  s.basis = MatrixC::Zero(n, k + 1);
  s.hessenberg = MatrixC::Zero(k + 1, k);
  s.basis.col(0) = start / start_norm;
  for (Eigen::Index j = 0; j < k; ++j) {
    VectorC w = op(s.basis.col(j));
    const double scale = w.norm();
    const VectorC h = detail::orthogonalize(s.basis, j + 1, w);
    s.hessenberg.col(j).head(j + 1) = h;
    const double beta = w.norm();
    s.hessenberg(j + 1, j) = beta;
    s.dimension = j + 1;
    if (beta < 1e-12 * std::max(scale, 1e-300) || beta == 0.0) {
      s.breakdown = true;
      s.basis.conservativeResize(n, j + 1);
      s.hessenberg.conservativeResize(j + 1, j + 1);
      return s;
    }
    s.basis.col(j + 1) = w / beta;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Krylov-Schur

struct RitzPair {
  cd value;
  VectorC vector;          // unit norm
  double residual = 0.0;   // ||op x - value x||
  bool converged = false;
};

struct KrylovSchurOptions {
  Eigen::Index nev = 6;
  Eigen::Index ncv = 40;
  double tol = 1e-12;     // relative to |value|
  int max_restarts = 5;
  std::uint64_t seed = 20170302;
  /// Ritz values rejected here are ordered after every accepted one.
  std::function<bool(cd)> admissible = [](cd) { return true; };
};

struct KrylovSchurResult {
  std::vector<RitzPair> pairs;  // largest |value| first among admissible
  int restarts = 0;
  Eigen::Index converged = 0;
  bool breakdown = false;
};

/// Thick-restarted Arnoldi (Krylov-Schur) for the largest-magnitude
/// eigenvalues of `op` acting on C^n. Each restart keeps 2*nev Schur vectors.
inline KrylovSchurResult krylov_schur(const LinearOperator& op, Eigen::Index n, const KrylovSchurOptions& opt) {
  const Eigen::Index nev = opt.nev;
  const Eigen::Index m = std::min(opt.ncv, n);
  if (nev < 1 || nev >= m) throw Error(ErrorCode::dimension_mismatch, "krylov_schur: need 1 <= nev < ncv <= n");

  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  VectorC start(n);
  for (Eigen::Index i = 0; i < n; ++i) start[i] = cd(dist(rng), dist(rng));

  MatrixC v = MatrixC::Zero(n, m + 1);
  MatrixC h = MatrixC::Zero(m + 1, m);
  v.col(0) = start / start.norm();
  Eigen::Index kept = 0;

  KrylovSchurResult result;
  for (int restart = 0;; ++restart) {
    Eigen::Index active = m;
    for (Eigen::Index j = kept; j < m; ++j) {
      VectorC w = op(v.col(j));
      const double scale = w.norm();
      const VectorC coeff = detail::orthogonalize(v, j + 1, w);
      h.col(j).head(j + 1) = coeff;
      const double beta = w.norm();
      h(j + 1, j) = beta;
      if (beta < 1e-12 * std::max(scale, 1e-300) || beta == 0.0) {
        active = j + 1;
        result.breakdown = true;
        break;
      }
      v.col(j + 1) = w / beta;
    }

    SchurForm sf = schur(h.topLeftCorner(active, active));
    if (!sf.converged) throw Error(ErrorCode::non_convergence, "krylov_schur: projected Schur form failed");

    // Order the Schur form: admissible values first, then by decreasing magnitude.
    auto rank = [&](cd x) { return std::pair<int, double>(opt.admissible(x) ? 0 : 1, -std::abs(x)); };
    for (Eigen::Index i = 0; i < active; ++i) {
      for (Eigen::Index j = active - 1; j > i; --j) {
        if (rank(sf.t(j, j)) < rank(sf.t(j - 1, j - 1))) schur_swap(sf.t, sf.z, j - 1);
      }
    }

    const Eigen::RowVectorXcd coupling =
        result.breakdown ? Eigen::RowVectorXcd::Zero(active) : Eigen::RowVectorXcd(h.row(active).head(active) * sf.z);

    const Eigen::Index want = std::min(nev, active);
    std::vector<RitzPair> pairs(static_cast<std::size_t>(want));
    Eigen::Index converged = 0;
    for (Eigen::Index i = 0; i < want; ++i) {
      const VectorC y = triangular_eigenvector(sf.t.topLeftCorner(i + 1, i + 1), i);
      auto& p = pairs[static_cast<std::size_t>(i)];
      p.value = sf.t(i, i);
      p.residual = std::abs((coupling.head(i + 1) * y).value());
      p.converged = p.residual <= opt.tol * std::abs(p.value);
      if (p.converged) ++converged;
      VectorC s = sf.z.leftCols(i + 1) * y;
      p.vector = v.leftCols(active) * s;
      p.vector.normalize();
    }

    if (converged == want || restart >= opt.max_restarts || result.breakdown) {
      result.pairs = std::move(pairs);
      result.restarts = restart;
      result.converged = converged;
      return result;
    }

    kept = std::min<Eigen::Index>(std::max<Eigen::Index>(2 * nev, nev + 1), m - 1);
    MatrixC kept_basis = v.leftCols(m) * sf.z.leftCols(kept);
    const VectorC next = v.col(m);
    MatrixC hnew = MatrixC::Zero(m + 1, m);
    hnew.topLeftCorner(kept, kept) = sf.t.topLeftCorner(kept, kept).triangularView<Eigen::Upper>();
    hnew.row(kept).head(kept) = coupling.head(kept);
    h = std::move(hnew);
    v.leftCols(kept) = kept_basis;
    v.col(kept) = next;
  }
}

}  // namespace resonavis
