#pragma once

// Eigenvector exports: per-edge coefficient CSV and a legacy VTK file carrying
// div(u_h) as cell data.

#include <complex>
#include <ostream>
#include <vector>

#include "resonavis/error.hpp"
#include "resonavis/linalg.hpp"
#include "resonavis/mesh.hpp"

namespace resonavis {

/// Piecewise-constant divergence of the RT0 field with interior-edge
/// coefficients `u`: sum_i s_i u_i |e_i| / |T| on each triangle.
inline std::vector<cd> divergence_per_triangle(const Mesh& mesh, const VectorC& u) {
  if (static_cast<std::size_t>(u.size()) != mesh.num_dofs()) {
    throw Error(ErrorCode::dimension_mismatch, "coefficient vector does not match the mesh DOF count");
  }
  std::vector<cd> div(mesh.triangles.size());
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& te = mesh.edge_of_triangle[t];
    const double area = mesh.triangle_area(static_cast<int>(t));
    cd sum = 0.0;
    for (int k = 0; k < 3; ++k) {
      const int dof = mesh.dof_of_edge[te.edge[k]];
      if (dof < 0) continue;
      sum += static_cast<double>(te.sign[k]) * u[dof] * mesh.edge_length(te.edge[k]);
    }
    div[t] = sum / area;
  }
  return div;
}

/// Header `edge_index,midpoint_x,midpoint_y,normal_x,normal_y,coeff_re,coeff_im`;
/// one row per interior edge in DOF order, boundary edges omitted.
inline void write_eigenvector_csv(std::ostream& out, const Mesh& mesh, const VectorC& u) {
  if (static_cast<std::size_t>(u.size()) != mesh.num_dofs()) {
    throw Error(ErrorCode::dimension_mismatch, "coefficient vector does not match the mesh DOF count");
  }
  out.precision(17);
  out << "edge_index,midpoint_x,midpoint_y,normal_x,normal_y,coeff_re,coeff_im\n";
  for (std::size_t d = 0; d < mesh.num_dofs(); ++d) {
    const int e = mesh.edge_of_dof[d];
    const Point m = mesh.edge_midpoint(e);
    const Point n = mesh.edge_normal(e);
    out << e << ',' << m.x << ',' << m.y << ',' << n.x << ',' << n.y << ',' << u[static_cast<Eigen::Index>(d)].real()
        << ',' << u[static_cast<Eigen::Index>(d)].imag() << '\n';
  }
}

inline void write_divergence_vtk(std::ostream& out, const Mesh& mesh, const VectorC& u) {
  const auto div = divergence_per_triangle(mesh, u);
  out.precision(17);
  out << "# vtk DataFile Version 3.0\n"
      << "div(u_h) per triangle\n"
      << "ASCII\n"
      << "DATASET UNSTRUCTURED_GRID\n"
      << "POINTS " << mesh.vertices.size() << " double\n";
  for (const auto& p : mesh.vertices) out << p.x << ' ' << p.y << " 0\n";
  out << "CELLS " << mesh.triangles.size() << ' ' << 4 * mesh.triangles.size() << '\n';
  for (const auto& t : mesh.triangles) {
    out << "3 " << t.vertices[0] << ' ' << t.vertices[1] << ' ' << t.vertices[2] << '\n';
  }
  out << "CELL_TYPES " << mesh.triangles.size() << '\n';
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) out << "5\n";
  out << "CELL_DATA " << mesh.triangles.size() << '\n';
  out << "SCALARS div_re double 1\nLOOKUP_TABLE default\n";
  for (const auto& d : div) out << d.real() << '\n';
  out << "SCALARS div_im double 1\nLOOKUP_TABLE default\n";
  for (const auto& d : div) out << d.imag() << '\n';
  out << "SCALARS subdomain int 1\nLOOKUP_TABLE default\n";
  for (const auto& t : mesh.triangles) out << t.subdomain << '\n';
}

}  // namespace resonavis
