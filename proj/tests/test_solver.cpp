#include <gtest/gtest.h>

#include <random>

#include "resonavis/solver.hpp"

using namespace resonavis;

namespace {

const GeometryConfig kCavity{1.0, 2.0, 1.25};

RealSparse to_sparse(const Eigen::MatrixXd& a) {
  RealSparse s = a.sparseView();
  s.makeCompressed();
  return s;
}

// Random pencil: M SPD, K1 and K2 symmetric positive semidefinite.
QuadraticPencil random_pencil(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  auto gram = [&](int rank) {
    Eigen::MatrixXd b(n, rank);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < rank; ++j) b(i, j) = z(rng);
    }
    return Eigen::MatrixXd(b * b.transpose());
  };
  QuadraticPencil p;
  p.mass = to_sparse(gram(n) + Eigen::MatrixXd::Identity(n, n));
  p.k1 = to_sparse(0.1 * gram(n - 1));
  p.k2 = to_sparse(gram(n - 2));
  p.materials = water_air(1.0, 1.0);
  return p;
}

QuadraticPencil diagonal_pencil(const std::vector<double>& k2) {
  const int n = static_cast<int>(k2.size());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) d(i, i) = k2[static_cast<std::size_t>(i)];
  QuadraticPencil p;
  p.mass = to_sparse(Eigen::MatrixXd::Identity(n, n));
  p.k1 = RealSparse(n, n);
  p.k2 = to_sparse(d);
  p.materials = water_air();
  return p;
}

const QuadraticPencil& cavity_pencil(bool viscous) {
  static const QuadraticPencil inviscid = make_pencil(build_rect_mesh(kCavity, 8), water_air());
  static const QuadraticPencil dissipative = make_pencil(build_rect_mesh(kCavity, 8), water_air(9.0, 1.0));
  return viscous ? dissipative : inviscid;
}

}  // namespace

TEST(ShiftInvert, ScalarPencilByHand) {
  // n = 1: M = 2, K1 = 0.5, K2 = 3.
  QuadraticPencil p;
  p.mass = to_sparse(Eigen::MatrixXd::Constant(1, 1, 2.0));
  p.k1 = to_sparse(Eigen::MatrixXd::Constant(1, 1, 0.5));
  p.k2 = to_sparse(Eigen::MatrixXd::Constant(1, 1, 3.0));
  const cd s(0.0, 1.0);
  const ShiftInvertOperator op(p, s);
  VectorC x(2);
  x << cd(1.0, 0.0), cd(0.0, 2.0);
  const VectorC y = shift_invert_apply(op, x);
  const cd q = 2.0 * s * s + 0.5 * s + 3.0;
  const cd w = -(2.0 * x[0] + (0.5 + 2.0 * s) * x[1]) / q;
  EXPECT_LE(std::abs(y[1] - w), 1e-15);
  EXPECT_LE(std::abs(y[0] - (s * w + x[1])), 1e-15);
}

TEST(ShiftInvert, MatchesDenseBlockSolve) {
  for (int n = 3; n <= 8; ++n) {
    const QuadraticPencil p = random_pencil(n, 100 + n);
    const cd sigma(0.3, 1.7);
    const ShiftInvertOperator op(p, sigma);
    const Eigen::MatrixXd m(p.mass), k1(p.k1), k2(p.k2);
    MatrixC a = MatrixC::Zero(2 * n, 2 * n), b = MatrixC::Zero(2 * n, 2 * n);
    a.topLeftCorner(n, n) = -k1.cast<cd>();
    a.topRightCorner(n, n) = -k2.cast<cd>();
    a.bottomLeftCorner(n, n) = m.cast<cd>();
    b.topLeftCorner(n, n) = m.cast<cd>();
    b.bottomRightCorner(n, n) = m.cast<cd>();
    std::mt19937_64 rng(n);
    std::normal_distribution<double> z;
    VectorC x(2 * n);
    for (int i = 0; i < 2 * n; ++i) x[i] = cd(z(rng), z(rng));
    const VectorC ref = (a - sigma * b).fullPivLu().solve(b * x);
    EXPECT_LE((op(x) - ref).norm(), 1e-10 * ref.norm()) << "n=" << n;
  }
}

TEST(ShiftInvert, DimensionMismatch) {
  const QuadraticPencil p = random_pencil(4, 1);
  const ShiftInvertOperator op(p, cd(0.0, 1.0));
  EXPECT_THROW(op(VectorC::Ones(4)), Error);
}

TEST(Solve, DiagonalPencil) {
  const QuadraticPencil p = diagonal_pencil({1.0, 4.0, 9.0, 16.0, 25.0});
  SolveOptions opt;
  opt.shift = cd(0.0, 2.2);
  opt.nev = 3;
  opt.krylov_dim = 9;
  const SolveResult r = solve_qep(p, opt);
  ASSERT_GE(r.pairs.size(), 3u);
  EXPECT_LE(std::abs(r.pairs[0].lambda - cd(0.0, 2.0)), 1e-10);
  EXPECT_LE(std::abs(r.pairs[1].lambda - cd(0.0, 3.0)), 1e-10);
  EXPECT_LE(std::abs(r.pairs[2].lambda - cd(0.0, 1.0)), 1e-10);
}

TEST(Solve, SingularShiftIsPerturbed) {
  const QuadraticPencil p = diagonal_pencil({1.0, 4.0, 9.0});
  SolveOptions opt;
  opt.shift = cd(0.0, 1.0);  // Q(i) = diag(0, 3, 8)
  opt.nev = 2;
  opt.krylov_dim = 5;
  const SolveResult r = solve_qep(p, opt);
  EXPECT_EQ(r.shift_retries, 1);
  EXPECT_LE(std::abs(r.pairs[0].lambda - cd(0.0, 1.0)), 1e-9);
}

TEST(Solve, InvalidOptions) {
  SolveOptions opt;
  opt.nev = 10;
  opt.krylov_dim = 10;
  EXPECT_THROW(solve_qep(cavity_pencil(false), opt), Error);
}

TEST(Solve, WaterAirResiduals) {
  for (bool viscous : {false, true}) {
    const QuadraticPencil& p = cavity_pencil(viscous);
    SolveOptions opt;
    opt.shift = cd(0.0, 1000.0);
    const SolveResult r = solve_qep(p, opt);
    ASSERT_GE(r.pairs.size(), 6u);
    for (const EigenPair& pair : r.pairs) {
      if (!pair.converged) continue;
      const ResidualReport rep = check_eigenpair(p, pair);
      EXPECT_LE(rep.residual, kConvergedResidual);
      EXPECT_FALSE(rep.positive_decay_rate);
      EXPECT_FALSE(rep.real_part_in_inviscid);
      EXPECT_GT(std::abs(pair.lambda), 100.0);  // divergence-free kernel skipped
    }
    EXPECT_LE(std::abs(r.pairs[0].lambda.imag() - 1066.0), 0.1);
  }
}

TEST(Solve, ShiftInvariance) {
  for (bool viscous : {false, true}) {
    const QuadraticPencil& p = cavity_pencil(viscous);
    SolveOptions a;
    a.shift = cd(0.0, 1400.0);
    SolveOptions b = a;
    b.shift *= 1.0 + 1e-4;
    const cd la = solve_qep(p, a).pairs[0].lambda;
    const cd lb = solve_qep(p, b).pairs[0].lambda;
    EXPECT_LE(std::abs(la - lb), 1e-6 * std::abs(la));
  }
}

TEST(Solve, ConjugateShiftGivesConjugates) {
  const QuadraticPencil& p = cavity_pencil(true);
  SolveOptions a;
  a.shift = cd(-5.0, 1500.0);
  SolveOptions b = a;
  b.shift = std::conj(a.shift);
  const auto ra = solve_qep(p, a), rb = solve_qep(p, b);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_LE(std::abs(ra.pairs[i].lambda - std::conj(rb.pairs[i].lambda)), 1e-8 * std::abs(ra.pairs[i].lambda));
  }
}

TEST(Residual, ZeroVector) {
  EXPECT_THROW(quadratic_residual(cavity_pencil(false), cd(0.0, 1.0), VectorC::Zero(cavity_pencil(false).size())),
               Error);
}

TEST(Band, WaterAirViscousEndpoints) {
  const SpectralBand b = essential_band(water_air(9.0, 1.0));
  const double water = 1000.0 * 1430.0 * 1430.0, air = 1.0 * 340.0 * 340.0;
  EXPECT_NEAR(b.mu_lower, 2.0 * 1.0 / water, 1e-12 * b.mu_lower);
  EXPECT_NEAR(b.mu_upper, 2.0 * 9.0 / air, 1e-12 * b.mu_upper);
  EXPECT_NEAR(b.mu_lower, 9.78e-10, 0.01e-10);
  EXPECT_NEAR(b.mu_upper, 1.557e-4, 0.001e-4);
  EXPECT_NEAR(b.lambda_lower, 6422.2, 0.1);
  EXPECT_NEAR(b.lambda_upper, 1.02245e9, 1e4);
}

TEST(Band, InviscidIsEmpty) {
  const SpectralBand b = essential_band(water_air());
  EXPECT_TRUE(b.empty());
}

TEST(Filter, DiscardsNearRealInBand) {
  const SpectralBand band = essential_band(water_air(9.0, 1.0));
  std::vector<EigenPair> pairs(3);
  pairs[0].lambda = cd(-10000.0, 1.0);  // near real, inside the band
  pairs[1].lambda = cd(-100.0, 0.0);    // near real, below the band
  pairs[2].lambda = cd(-10.0, 1000.0);
  const FilterResult r = filter_spurious(pairs, band);
  ASSERT_EQ(r.discarded.size(), 1u);
  EXPECT_EQ(r.discarded[0].lambda, pairs[0].lambda);
  ASSERT_EQ(r.kept.size(), 2u);
  ASSERT_EQ(r.near_real_kept.size(), 1u);
  EXPECT_EQ(r.kept[r.near_real_kept[0]].lambda, pairs[1].lambda);
}

TEST(ConvergenceFit, ExactPowers) {
  std::vector<ConvergenceSample> quad, lin;
  for (double h : {0.125, 0.0625, 0.03125, 0.015625}) {
    quad.push_back({h, 3.0 * h * h});
    lin.push_back({h, 0.7 * h});
  }
  EXPECT_NEAR(fit_convergence_order(quad), 2.0, 1e-12);
  EXPECT_NEAR(fit_convergence_order(lin), 1.0, 1e-12);
}

TEST(ConvergenceFit, Errors) {
  try {
    fit_convergence_order({{0.1, 0.01}, {0.05, 0.0025}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::insufficient_samples);
  }
  try {
    fit_convergence_order({{0.1, 0.01}, {0.05, 0.0}, {0.025, 1e-4}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::nonpositive_error);
  }
}
