#pragma once

// Lowest-order Raviart-Thomas assembly of the mass matrix M (rho u.v), the
// viscous matrix K1 (2 nu div u div v) and the stiffness matrix K2
// (rho c^2 div u div v) on interior-edge degrees of freedom.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <ostream>
#include <vector>

#include "resonavis/error.hpp"
#include "resonavis/mesh.hpp"

namespace resonavis {

using RealSparse = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;
using ComplexSparse = Eigen::SparseMatrix<std::complex<double>, Eigen::RowMajor, int>;

/// Density rho (kg/m^3), sound speed c (m/s), viscosity nu (N s/m^2).
struct FluidProperties {
  double rho = 1.0;
  double c = 1.0;
  double nu = 0.0;

  double bulk() const { return rho * c * c; }
  bool operator==(const FluidProperties&) const = default;
};

struct MaterialConfig {
  std::array<FluidProperties, 2> fluid{};

  /// Subdomain tags are 1-based, matching Triangle::subdomain.
  const FluidProperties& operator()(int subdomain) const { return fluid.at(subdomain - 1); }

  void validate() const {
    for (int i = 0; i < 2; ++i) {
      const auto& f = fluid[i];
      if (!(f.rho > 0.0) || !(f.c > 0.0) || !(f.nu >= 0.0)) {
        throw Error(ErrorCode::invalid_material,
                    "fluid " + std::to_string(i + 1) + ": rho and c must be positive, nu nonnegative");
      }
    }
  }

  bool inviscid() const { return fluid[0].nu == 0.0 && fluid[1].nu == 0.0; }
  bool homogeneous() const { return fluid[0] == fluid[1]; }
  bool operator==(const MaterialConfig&) const = default;
};

/// Water below the interface, air above.
inline MaterialConfig water_air(double nu_water = 0.0, double nu_air = 0.0) {
  return {{FluidProperties{1000.0, 1430.0, nu_water}, FluidProperties{1.0, 340.0, nu_air}}};
}

struct ElementMatrices {
  Eigen::Matrix3d mass = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d k1 = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d k2 = Eigen::Matrix3d::Zero();
};

/// RT0 basis on a triangle: phi_i(x) = s_i |e_i| / (2|T|) (x - P_i) where P_i is
/// the vertex opposite edge i. Divergences are the constants s_i |e_i| / |T|.
inline ElementMatrices rt0_element_matrices(const std::array<Point, 3>& p, const std::array<int, 3>& sign,
                                            const FluidProperties& fluid) {
  const double area = 0.5 * std::abs(cross(p[1] - p[0], p[2] - p[0]));
  std::array<double, 3> len{};
  for (int i = 0; i < 3; ++i) len[i] = norm(p[(i + 2) % 3] - p[(i + 1) % 3]);
  const double longest = *std::max_element(len.begin(), len.end());
  if (!(area > 0.0) || area < 1e-14 * longest * longest) {
    throw Error(ErrorCode::degenerate_triangle, "triangle area below 1e-14 * (longest edge)^2");
  }

  std::array<double, 3> scale{};
  std::array<double, 3> div{};
  for (int i = 0; i < 3; ++i) {
    scale[i] = sign[i] * len[i] / (2.0 * area);
    div[i] = sign[i] * len[i] / area;
  }

  // Edge-midpoint rule, exact for the quadratic integrand.
  std::array<Point, 3> quad{midpoint(p[1], p[2]), midpoint(p[2], p[0]), midpoint(p[0], p[1])};
  ElementMatrices em;
  for (int i = 0; i < 3; ++i) {
    for (int j = i; j < 3; ++j) {
      double sum = 0.0;
      for (const Point& q : quad) sum += dot(q - p[i], q - p[j]);
      const double m = fluid.rho * scale[i] * scale[j] * sum * area / 3.0;
      const double k1 = 2.0 * fluid.nu * div[i] * div[j] * area;
      const double k2 = fluid.bulk() * div[i] * div[j] * area;
      em.mass(i, j) = em.mass(j, i) = m;
      em.k1(i, j) = em.k1(j, i) = k1;
      em.k2(i, j) = em.k2(j, i) = k2;
    }
  }
  return em;
}

struct GlobalMatrices {
  RealSparse mass;
  RealSparse k1;
  RealSparse k2;
};

/// Scatter-add over all triangles; boundary edges carry the essential
/// condition u.n = 0 and are left out. The three matrices share one pattern.
inline GlobalMatrices assemble_global(const Mesh& mesh, const MaterialConfig& materials) {
  materials.validate();
  const int n = static_cast<int>(mesh.num_dofs());
  std::vector<Eigen::Triplet<double>> tm, t1, t2;
  const std::size_t reserve = 9 * mesh.triangles.size();
  tm.reserve(reserve);
  t1.reserve(reserve);
  t2.reserve(reserve);

  for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
    const auto& te = mesh.edge_of_triangle[t];
    const ElementMatrices em =
        rt0_element_matrices(mesh.triangle_points(t), te.sign, materials(mesh.triangles[t].subdomain));
    for (int i = 0; i < 3; ++i) {
      const int row = mesh.dof_of_edge[te.edge[i]];
      if (row < 0) continue;
      for (int j = 0; j < 3; ++j) {
        const int col = mesh.dof_of_edge[te.edge[j]];
        if (col < 0) continue;
        tm.emplace_back(row, col, em.mass(i, j));
        t1.emplace_back(row, col, em.k1(i, j));
        t2.emplace_back(row, col, em.k2(i, j));
      }
    }
  }

  GlobalMatrices g;
  g.mass.resize(n, n);
  g.k1.resize(n, n);
  g.k2.resize(n, n);
  g.mass.setFromTriplets(tm.begin(), tm.end());
  g.k1.setFromTriplets(t1.begin(), t1.end());
  g.k2.setFromTriplets(t2.begin(), t2.end());
  return g;
}

/// Coordinate text export: one `row col value` line per stored entry, 0-based.
template <typename Scalar>
void write_coordinate(std::ostream& out, const Eigen::SparseMatrix<Scalar, Eigen::RowMajor, int>& a) {
  out.precision(17);
  for (int r = 0; r < a.outerSize(); ++r) {
    for (typename Eigen::SparseMatrix<Scalar, Eigen::RowMajor, int>::InnerIterator it(a, r); it; ++it) {
      if constexpr (std::is_same_v<Scalar, std::complex<double>>) {
        out << it.row() << ' ' << it.col() << ' ' << it.value().real() << ' ' << it.value().imag() << '\n';
      } else {
        out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
      }
    }
  }
}

}  // namespace resonavis
