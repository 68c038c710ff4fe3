#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "resonavis/assembly.hpp"
#include "resonavis/linalg.hpp"

using namespace resonavis;

namespace {

const GeometryConfig kCavity{1.0, 2.0, 1.25};

// Degree-5 seven-point rule on a triangle, barycentric coordinates and weights
// normalized to sum 1.
struct QuadPoint {
  double l0, l1, l2, w;
};

std::vector<QuadPoint> seven_point_rule() {
  const double s = std::sqrt(15.0);
  const double a = (6.0 - s) / 21.0, wa = (155.0 - s) / 1200.0;
  const double b = (6.0 + s) / 21.0, wb = (155.0 + s) / 1200.0;
  return {{1.0 / 3, 1.0 / 3, 1.0 / 3, 9.0 / 40},
          {a, a, 1 - 2 * a, wa},
          {a, 1 - 2 * a, a, wa},
          {1 - 2 * a, a, a, wa},
          {b, b, 1 - 2 * b, wb},
          {b, 1 - 2 * b, b, wb},
          {1 - 2 * b, b, b, wb}};
}

Eigen::Matrix3d mass_by_quadrature(const std::array<Point, 3>& p, const std::array<int, 3>& sign, double rho) {
  const double area = 0.5 * std::abs(cross(p[1] - p[0], p[2] - p[0]));
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  for (const auto& q : seven_point_rule()) {
    const Point x{q.l0 * p[0].x + q.l1 * p[1].x + q.l2 * p[2].x, q.l0 * p[0].y + q.l1 * p[1].y + q.l2 * p[2].y};
    std::array<Point, 3> phi;
    for (int i = 0; i < 3; ++i) {
      const double len = norm(p[(i + 2) % 3] - p[(i + 1) % 3]);
      const double s = sign[i] * len / (2.0 * area);
      phi[i] = {s * (x.x - p[i].x), s * (x.y - p[i].y)};
    }
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) m(i, j) += q.w * area * rho * dot(phi[i], phi[j]);
    }
  }
  return m;
}

}  // namespace

TEST(Element, ReferenceTriangleStiffness) {
  const std::array<Point, 3> p{Point{0, 0}, Point{1, 0}, Point{0, 1}};
  const ElementMatrices em = rt0_element_matrices(p, {1, 1, 1}, FluidProperties{1.0, 1.0, 0.5});
  // Edge 0 is the hypotenuse: div = sqrt(2) / (1/2), times area 1/2.
  EXPECT_NEAR(em.k2(0, 0), 4.0, 1e-14);
  EXPECT_NEAR(em.k2(1, 1), 2.0, 1e-14);
  EXPECT_NEAR(em.k1(0, 0), 4.0, 1e-14);
  EXPECT_NEAR(em.k2(0, 1), 2.0 * std::sqrt(2.0), 1e-14);
}

TEST(Element, UnitNormalComponentOnOwnEdge) {
  // phi_i . n_j at the midpoint of edge j is delta_ij (constant along the edge).
  const std::array<Point, 3> p{Point{0.1, 0.2}, Point{1.3, 0.4}, Point{0.5, 1.1}};
  const double area = 0.5 * cross(p[1] - p[0], p[2] - p[0]);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const Point a = p[(j + 1) % 3], b = p[(j + 2) % 3];
      const Point t = b - a;
      const Point n{t.y / norm(t), -t.x / norm(t)};  // outward for a counterclockwise triangle
      const Point mid = midpoint(a, b);
      const double len_i = norm(p[(i + 2) % 3] - p[(i + 1) % 3]);
      const Point phi{len_i / (2 * area) * (mid.x - p[i].x), len_i / (2 * area) * (mid.y - p[i].y)};
      EXPECT_NEAR(dot(phi, n), i == j ? 1.0 : 0.0, 1e-14);
    }
  }
}

TEST(Element, MassMatchesSevenPointQuadrature) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> coin(0, 1);
  for (int trial = 0; trial < 100; ++trial) {
    std::array<Point, 3> p;
    do {
      for (auto& q : p) q = {u(rng), u(rng)};
    } while (std::abs(cross(p[1] - p[0], p[2] - p[0])) < 0.05);
    if (cross(p[1] - p[0], p[2] - p[0]) < 0) std::swap(p[1], p[2]);
    const std::array<int, 3> sign{coin(rng) ? 1 : -1, coin(rng) ? 1 : -1, coin(rng) ? 1 : -1};
    const double rho = 0.5 + std::abs(u(rng));
    const ElementMatrices em = rt0_element_matrices(p, sign, FluidProperties{rho, 1.0, 0.0});
    const Eigen::Matrix3d ref = mass_by_quadrature(p, sign, rho);
    EXPECT_LE((em.mass - ref).cwiseAbs().maxCoeff(), 1e-13 * std::max(1.0, ref.cwiseAbs().maxCoeff()))
        << "trial " << trial;
  }
}

TEST(Element, DegenerateTriangle) {
  const std::array<Point, 3> p{Point{0, 0}, Point{1, 0}, Point{2, 1e-15}};
  try {
    rt0_element_matrices(p, {1, 1, 1}, FluidProperties{});
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::degenerate_triangle);
  }
}

TEST(Assembly, SymmetryAndDefiniteness) {
  const Mesh mesh = build_rect_mesh(kCavity, 8);
  const GlobalMatrices g = assemble_global(mesh, water_air(9.0, 1.0));
  const auto n = static_cast<Eigen::Index>(mesh.num_dofs());
  ASSERT_EQ(g.mass.rows(), n);
  for (const RealSparse* a : {&g.mass, &g.k1, &g.k2}) {
    const RealSparse diff = RealSparse(a->transpose()) - *a;
    EXPECT_LE(diff.norm(), 1e-12 * a->norm());
  }
  EXPECT_NO_THROW(factor_spd(g.mass));  // M is SPD
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z;
  for (int k = 0; k < 20; ++k) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = z(rng);
    EXPECT_GT(v.dot(g.mass * v), 0.0);
    EXPECT_GE(v.dot(g.k1 * v), -1e-9 * g.k1.norm() * v.squaredNorm());
    EXPECT_GE(v.dot(g.k2 * v), -1e-9 * g.k2.norm() * v.squaredNorm());
  }
}

TEST(Assembly, SharedSparsityPattern) {
  const Mesh mesh = build_rect_mesh(kCavity, 4);
  const GlobalMatrices g = assemble_global(mesh, water_air(9.0, 1.0));
  EXPECT_EQ(g.mass.nonZeros(), g.k1.nonZeros());
  EXPECT_EQ(g.mass.nonZeros(), g.k2.nonZeros());
}

TEST(Assembly, ViscousMatrixIsScaledStiffnessForUniformRatio) {
  // nu / (rho c^2) equal in both fluids -> K1 = 2 (nu / rho c^2) K2.
  MaterialConfig mat{{FluidProperties{2.0, 3.0, 0.9}, FluidProperties{1.0, 1.0, 0.05}}};
  const Mesh mesh = build_rect_mesh(kCavity, 4);
  const GlobalMatrices g = assemble_global(mesh, mat);
  const RealSparse expected = g.k2 * 0.1;
  EXPECT_LE(RealSparse(g.k1 - expected).norm(), 1e-13 * g.k1.norm());
}

TEST(Assembly, DivergenceFreeKernel) {
  // Normal components of the curl of a vertex hat function describe a
  // divergence-free field, so K2 annihilates them.
  const Mesh mesh = build_rect_mesh(kCavity, 8);
  const GlobalMatrices g = assemble_global(mesh, water_air());
  const int center = 4 * 9 + 4;  // interior vertex
  Eigen::VectorXd u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.num_dofs()));
  for (std::size_t e = 0; e < mesh.edges.size(); ++e) {
    const auto& v = mesh.edges[e].vertices;
    if (v[0] != center && v[1] != center) continue;
    const int d = mesh.dof_of_edge[e];
    ASSERT_GE(d, 0);
    // curl(psi) . n along v0 -> v1, normal rotated clockwise, is (psi(v1) - psi(v0)) / |e|.
    u[d] = ((v[1] == center ? 1.0 : 0.0) - (v[0] == center ? 1.0 : 0.0)) / mesh.edge_length(static_cast<int>(e));
  }
  EXPECT_LE((g.k2 * u).norm(), 1e-9 * g.k2.norm() * u.norm());
  EXPECT_GT(u.dot(g.mass * u), 0.0);
}

TEST(Assembly, MassScalesWithDensity) {
  const Mesh mesh = build_rect_mesh(kCavity, 4);
  MaterialConfig a{{FluidProperties{1.0, 1.0, 0.0}, FluidProperties{1.0, 1.0, 0.0}}};
  MaterialConfig b{{FluidProperties{3.0, 1.0, 0.0}, FluidProperties{3.0, 1.0, 0.0}}};
  const RealSparse ma = assemble_global(mesh, a).mass;
  const RealSparse mb = assemble_global(mesh, b).mass;
  EXPECT_LE(RealSparse(mb - ma * 3.0).norm(), 1e-13 * mb.norm());
}

TEST(Assembly, InvalidMaterial) {
  const Mesh mesh = build_rect_mesh(kCavity, 4);
  MaterialConfig bad{{FluidProperties{0.0, 1.0, 0.0}, FluidProperties{1.0, 1.0, 0.0}}};
  try {
    assemble_global(mesh, bad);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_material);
  }
}

TEST(Assembly, CoordinateExport) {
  RealSparse a(2, 2);
  a.insert(0, 1) = 2.5;
  a.insert(1, 0) = -1.0;
  a.makeCompressed();
  std::ostringstream out;
  write_coordinate(out, a);
  EXPECT_EQ(out.str(), "0 1 2.5\n1 0 -1\n");
}
