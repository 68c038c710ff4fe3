#pragma once

// Quadratic eigenproblem (lambda^2 M + lambda K1 + K2) u = 0, solved through the
// linearization  [-K1 -K2; M 0] y = lambda diag(M, M) y  with y = (u, u/lambda)
// and shift-invert Krylov-Schur on (A - sigma B)^{-1} B.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include "resonavis/assembly.hpp"
#include "resonavis/error.hpp"
#include "resonavis/linalg.hpp"
#include "resonavis/mesh.hpp"

namespace resonavis {

struct QuadraticPencil {
  RealSparse mass;
  RealSparse k1;
  RealSparse k2;
  MaterialConfig materials;
  int refinement = 0;
  double h = 0.0;

  Eigen::Index size() const { return mass.rows(); }
};

inline QuadraticPencil make_pencil(const Mesh& mesh, const MaterialConfig& materials) {
  GlobalMatrices g = assemble_global(mesh, materials);
  return {std::move(g.mass), std::move(g.k1), std::move(g.k2), materials, mesh.refinement, mesh.h()};
}

/// Q(s) = s^2 M + s K1 + K2.
inline ComplexSparse quadratic_matrix(const QuadraticPencil& p, cd s) {
  return p.mass.cast<cd>() * (s * s) + p.k1.cast<cd>() * s + p.k2.cast<cd>();
}

// ---------------------------------------------------------------------------

/// Applies (A - sigma B)^{-1} B with A = [-K1 -K2; M 0], B = diag(M, M) through
/// the n x n Schur complement Q(sigma). The second block row gives
/// y1 = sigma y2 + M^{-1} (M x2) = sigma y2 + x2, so no mass solve is needed.
class ShiftInvertOperator {
 public:
  ShiftInvertOperator(const QuadraticPencil& pencil, cd sigma)
      : pencil_(&pencil),
        sigma_(sigma),
        q_(factor(quadratic_matrix(pencil, sigma))),
        k1_plus_sigma_m_(pencil.k1.cast<cd>() + pencil.mass.cast<cd>() * sigma) {}

  cd shift() const { return sigma_; }
  Eigen::Index size() const { return 2 * pencil_->size(); }

  VectorC operator()(const VectorC& x) const {
    const Eigen::Index n = pencil_->size();
    if (x.size() != 2 * n) throw Error(ErrorCode::dimension_mismatch, "shift_invert_apply: expected 2n vector");
    const VectorC b1 = pencil_->mass.cast<cd>() * x.head(n);
    const VectorC z = x.tail(n);
    const VectorC rhs = b1 + k1_plus_sigma_m_ * z;
    const VectorC w = -q_.solve(rhs);
    VectorC y(2 * n);
    y.head(n) = sigma_ * w + z;
    y.tail(n) = w;
    return y;
  }

 private:
  static ComplexFactorization factor(const ComplexSparse& q) {
    try {
      return ComplexFactorization(q);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::singular_matrix) {
        throw Error(ErrorCode::singular_pencil, "Q(sigma) is singular; perturb the shift");
      }
      throw;
    }
  }

  const QuadraticPencil* pencil_;
  cd sigma_;
  ComplexFactorization q_;
  ComplexSparse k1_plus_sigma_m_;
};

inline VectorC shift_invert_apply(const ShiftInvertOperator& op, const VectorC& x) { return op(x); }

// ---------------------------------------------------------------------------

struct EigenPair {
  cd lambda;
  VectorC u;  // unit 2-norm, interior-edge coefficients
  double residual = 0.0;
  double ritz_residual = 0.0;
  bool converged = false;
};

/// ||Q(lambda) u|| / ((|lambda|^2 ||M||_1 + |lambda| ||K1||_1 + ||K2||_1) ||u||)
inline double quadratic_residual(const QuadraticPencil& p, cd lambda, const VectorC& u) {
  const double un = u.norm();
  if (!(un > 0.0)) throw Error(ErrorCode::zero_vector, "eigenvector is zero");
  const VectorC r = lambda * lambda * (p.mass.cast<cd>() * u) + lambda * (p.k1.cast<cd>() * u) +
                    p.k2.cast<cd>() * u;
  const double al = std::abs(lambda);
  const double scale = al * al * norm1(p.mass) + al * norm1(p.k1) + norm1(p.k2);
  return r.norm() / (scale * un);
}

struct ResidualReport {
  double residual = 0.0;
  bool positive_decay_rate = false;  // Re(lambda) >= 0 for a viscous run
  bool real_part_in_inviscid = false;  // |Re(lambda)| > 1e-6 |lambda| with nu == 0
};

inline ResidualReport check_eigenpair(const QuadraticPencil& p, const EigenPair& pair) {
  ResidualReport r;
  r.residual = quadratic_residual(p, pair.lambda, pair.u);
  if (p.materials.inviscid()) {
    r.real_part_in_inviscid = std::abs(pair.lambda.real()) > 1e-6 * std::abs(pair.lambda);
  } else {
    r.positive_decay_rate = pair.lambda != 0.0 && pair.lambda.real() >= 0.0;
  }
  return r;
}

inline constexpr double kConvergedResidual = 1e-8;

struct SolveOptions {
  cd shift{0.0, 1000.0};
  Eigen::Index nev = 6;
  Eigen::Index krylov_dim = 40;
  double tol = 1e-10;  // Ritz residual, relative to |theta|
  int max_restarts = 5;
};

struct SolveResult {
  std::vector<EigenPair> pairs;  // closest to the shift first
  cd shift_used;
  int restarts = 0;
  int shift_retries = 0;
};

namespace detail {

inline EigenPair recover_pair(const QuadraticPencil& p, cd lambda, const RitzPair& ritz) {
  const Eigen::Index n = p.size();
  EigenPair best;
  best.lambda = lambda;
  best.residual = std::numeric_limits<double>::infinity();
  for (int block = 0; block < 2; ++block) {
    VectorC u = block == 0 ? VectorC(ritz.vector.head(n)) : VectorC(ritz.vector.tail(n));
    const double un = u.norm();
    if (!(un > 0.0)) continue;
    u /= un;
    // Fix the phase so the largest component is real and positive.
    Eigen::Index imax = 0;
    u.cwiseAbs().maxCoeff(&imax);
    u *= std::conj(u[imax]) / std::abs(u[imax]);
    const double res = quadratic_residual(p, lambda, u);
    if (res < best.residual) {
      best.residual = res;
      best.u = std::move(u);
    }
  }
  best.ritz_residual = ritz.residual;
  best.converged = best.residual <= kConvergedResidual;
  return best;
}

}  // namespace detail

/// Eigenvalues of the quadratic pencil nearest `shift`. Ritz values theta of the
/// shift-invert operator map back through lambda = shift + 1/theta. The
/// divergence-free kernel (lambda = 0, excluded by the linearization) is
/// skipped. A singular Q(shift) is retried up to three times with the shift
/// scaled by (1 + 1e-3).
inline SolveResult solve_qep(const QuadraticPencil& pencil, const SolveOptions& opt) {
  if (opt.nev < 1 || opt.krylov_dim <= opt.nev || opt.krylov_dim > 200) {
    throw Error(ErrorCode::config, "solve_qep: need 1 <= nev < krylov_dim <= 200");
  }
  SolveResult result;
  cd sigma = opt.shift;
  for (int attempt = 0;; ++attempt) {
    try {
      const ShiftInvertOperator op(pencil, sigma);
      const double kernel_radius = 1e-5 * std::abs(sigma);
      KrylovSchurOptions ks;
      ks.nev = opt.nev;
      ks.ncv = std::min<Eigen::Index>(opt.krylov_dim, op.size() - 1);
      ks.nev = std::min(ks.nev, ks.ncv - 1);
      ks.tol = opt.tol;
      ks.max_restarts = opt.max_restarts;
      ks.admissible = [sigma, kernel_radius](cd theta) {
        return theta != 0.0 && std::abs(sigma + 1.0 / theta) > kernel_radius;
      };
      const KrylovSchurResult ritz = krylov_schur([&op](const VectorC& x) { return op(x); }, op.size(), ks);
      for (const RitzPair& rp : ritz.pairs) {
        if (!ks.admissible(rp.value)) continue;
        result.pairs.push_back(detail::recover_pair(pencil, sigma + 1.0 / rp.value, rp));
      }
      result.shift_used = sigma;
      result.restarts = ritz.restarts;
      result.shift_retries = attempt;
      break;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::singular_matrix && e.code() != ErrorCode::singular_pencil) throw;
      if (attempt >= 3) throw Error(ErrorCode::singular_pencil, "Q(sigma) singular after 3 shift perturbations");
      sigma *= 1.0 + 1e-3;
    }
  }
  std::stable_sort(result.pairs.begin(), result.pairs.end(), [sigma = result.shift_used](const auto& a, const auto& b) {
    return std::abs(a.lambda - sigma) < std::abs(b.lambda - sigma);
  });
  const bool any = std::any_of(result.pairs.begin(), result.pairs.end(), [](const auto& p) { return p.converged; });
  if (!any) throw Error(ErrorCode::no_converged_pairs, "no Ritz pair reached the residual tolerance");
  return result;
}

// ---------------------------------------------------------------------------
// Essential spectrum band and spurious-mode filtering

struct SpectralBand {
  double mu_lower = 0.0;  // seconds
  double mu_upper = 0.0;
  double lambda_lower = std::numeric_limits<double>::infinity();  // 1/s, reciprocal of mu_upper
  double lambda_upper = std::numeric_limits<double>::infinity();  // reciprocal of mu_lower
  bool empty() const { return mu_upper == 0.0; }
};

/// [2 min nu / max rho c^2, 2 max nu / min rho c^2] and its reciprocal band in |lambda|.
inline SpectralBand essential_band(const MaterialConfig& materials) {
  materials.validate();
  const auto& f = materials.fluid;
  const double nu_min = std::min(f[0].nu, f[1].nu);
  const double nu_max = std::max(f[0].nu, f[1].nu);
  const double bulk_min = std::min(f[0].bulk(), f[1].bulk());
  const double bulk_max = std::max(f[0].bulk(), f[1].bulk());
  SpectralBand band;
  band.mu_lower = 2.0 * nu_min / bulk_max;
  band.mu_upper = 2.0 * nu_max / bulk_min;
  if (!band.empty()) {
    band.lambda_lower = bulk_min / (2.0 * nu_max);
    band.lambda_upper = nu_min > 0.0 ? bulk_max / (2.0 * nu_min) : std::numeric_limits<double>::infinity();
  }
  return band;
}

struct FilterResult {
  std::vector<EigenPair> kept;
  std::vector<EigenPair> discarded;
  std::vector<std::size_t> near_real_kept;  // indices into `kept`
};

/// Discards near-real pairs (|Im| <= tol_imag |lambda|) whose magnitude falls in
/// the band; near-real pairs outside it are kept and listed as warnings.
inline FilterResult filter_spurious(const std::vector<EigenPair>& pairs, const SpectralBand& band,
                                    double tol_imag = 1e-3) {
  FilterResult out;
  for (const auto& p : pairs) {
    const double mag = std::abs(p.lambda);
    const bool near_real = std::abs(p.lambda.imag()) <= tol_imag * mag;
    const bool in_band = !band.empty() && mag >= band.lambda_lower && mag <= band.lambda_upper;
    if (near_real && in_band) {
      out.discarded.push_back(p);
      continue;
    }
    if (near_real) out.near_real_kept.push_back(out.kept.size());
    out.kept.push_back(p);
  }
  return out;
}

// ---------------------------------------------------------------------------

struct ConvergenceSample {
  double h = 0.0;
  double error = 0.0;
};

/// Least-squares slope of log(error) against log(h).
inline double fit_convergence_order(const std::vector<ConvergenceSample>& samples) {
  if (samples.size() < 3) throw Error(ErrorCode::insufficient_samples, "need at least 3 (h, error) samples");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!(samples[i].error > 0.0)) throw Error(ErrorCode::nonpositive_error, "errors must be positive");
    if (!(samples[i].h > 0.0)) throw Error(ErrorCode::insufficient_samples, "h must be positive");
    if (i > 0 && !(samples[i].h < samples[i - 1].h)) {
      throw Error(ErrorCode::insufficient_samples, "h must be strictly decreasing");
    }
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(samples.size());
  for (const auto& s : samples) {
    const double x = std::log(s.h);
    const double y = std::log(s.error);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace resonavis
