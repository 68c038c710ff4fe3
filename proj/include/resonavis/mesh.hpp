#pragma once

// Structured triangulations of the two-fluid rectangle (0,A)x(0,B) with the
// fluid interface at y = H, plus the oriented edge table used as the
// lowest-order Raviart-Thomas degrees of freedom.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <sstream>
#include <utility>
#include <vector>

#include "resonavis/error.hpp"

namespace resonavis {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point a) { return std::hypot(a.x, a.y); }
inline Point midpoint(Point a, Point b) { return {0.5 * (a.x + b.x), 0.5 * (a.y + b.y)}; }

/// Cavity width A, height B and interface height H, all in meters.
struct GeometryConfig {
  double A = 1.0;
  double B = 2.0;
  double H = 1.25;

  void validate() const {
    if (!(A > 0.0) || !(B > 0.0)) {
      throw Error(ErrorCode::invalid_geometry, "A and B must be positive");
    }
    if (!(H > 0.0 && H < B)) {
      throw Error(ErrorCode::invalid_geometry, "interface height H must satisfy 0 < H < B");
    }
  }

  bool operator==(const GeometryConfig&) const = default;
};

/// How each grid square is cut into two triangles. `uniform` cuts every square
/// from bottom-left to top-right; `centered` mirrors that cut across both
/// center lines x = A/2 and y = B/2 so that all diagonals point toward the
/// center of the cavity.
enum class DiagonalPattern { centered, uniform };

struct Triangle {
  std::array<int, 3> vertices{};  // counterclockwise
  int subdomain = 1;              // 1 below the interface, 2 above
};

/// Edge with vertices stored as (lower index, higher index). The global normal
/// is the tangent v[0] -> v[1] rotated clockwise by 90 degrees.
struct Edge {
  std::array<int, 2> vertices{};
  bool boundary = false;
};

/// Local edge i of a triangle is the edge opposite local vertex i. `sign` is
/// +1 when the edge's global normal points out of the triangle.
struct TriangleEdges {
  std::array<int, 3> edge{};
  std::array<int, 3> sign{};
};

struct Mesh {
  GeometryConfig geometry;
  int refinement = 0;  // N, elements per unit width
  DiagonalPattern pattern = DiagonalPattern::centered;
  int columns = 0;
  int rows = 0;
  std::vector<Point> vertices;
  std::vector<Triangle> triangles;
  std::vector<Edge> edges;
  std::vector<TriangleEdges> edge_of_triangle;
  std::vector<int> dof_of_edge;   // -1 for boundary edges
  std::vector<int> edge_of_dof;

  std::size_t num_dofs() const { return edge_of_dof.size(); }
  double h() const { return geometry.A / refinement; }

  Point edge_normal(int e) const {
    const Point t = vertices[edges[e].vertices[1]] - vertices[edges[e].vertices[0]];
    const double len = norm(t);
    return {t.y / len, -t.x / len};
  }

  Point edge_midpoint(int e) const {
    return midpoint(vertices[edges[e].vertices[0]], vertices[edges[e].vertices[1]]);
  }

  double edge_length(int e) const {
    return norm(vertices[edges[e].vertices[1]] - vertices[edges[e].vertices[0]]);
  }

  std::array<Point, 3> triangle_points(int t) const {
    const auto& v = triangles[t].vertices;
    return {vertices[v[0]], vertices[v[1]], vertices[v[2]]};
  }

  double triangle_area(int t) const {
    const auto p = triangle_points(t);
    return 0.5 * std::abs(cross(p[1] - p[0], p[2] - p[0]));
  }
};

namespace detail {

// Returns round(value) when value is an integer up to rounding noise.
inline bool as_integer(double value, int& out) {
  const double r = std::round(value);
  if (std::abs(value - r) > 1e-9 * std::max(1.0, std::abs(value))) return false;
  out = static_cast<int>(r);
  return true;
}

}  // namespace detail

/// Uniform N x (B/A)N grid of squares, each cut into two triangles according
/// to `pattern`. Vertices are numbered row by row from the origin.
inline Mesh build_rect_mesh(const GeometryConfig& geom, int N,
                            DiagonalPattern pattern = DiagonalPattern::centered) {
  geom.validate();
  if (N <= 0) throw Error(ErrorCode::invalid_geometry, "refinement N must be positive");

  int rows = 0;
  if (!detail::as_integer(geom.B / geom.A * N, rows)) {
    std::ostringstream msg;
    msg << "(B/A)*N = " << geom.B / geom.A * N << " is not an integer";
    throw Error(ErrorCode::non_integer_rows, msg.str());
  }
  int interface_row = 0;
  if (!detail::as_integer(geom.H / geom.A * N, interface_row)) {
    std::ostringstream msg;
    msg << "N*H/A = " << geom.H / geom.A * N << " is not an integer; interface is not a mesh line";
    throw Error(ErrorCode::misaligned_interface, msg.str());
  }

  Mesh mesh;
  mesh.geometry = geom;
  mesh.refinement = N;
  mesh.pattern = pattern;
  mesh.columns = N;
  mesh.rows = rows;

  const int nx = N + 1;
  mesh.vertices.reserve(static_cast<std::size_t>(nx) * (rows + 1));
  for (int j = 0; j <= rows; ++j) {
    for (int i = 0; i <= N; ++i) {
      mesh.vertices.push_back({geom.A * i / N, geom.B * j / rows});
    }
  }

  mesh.triangles.reserve(2 * static_cast<std::size_t>(N) * rows);
  for (int j = 0; j < rows; ++j) {
    const int subdomain = j < interface_row ? 1 : 2;
    for (int i = 0; i < N; ++i) {
      const int v00 = j * nx + i;
      const int v10 = v00 + 1;
      const int v01 = v00 + nx;
      const int v11 = v01 + 1;
      const bool flipped = pattern == DiagonalPattern::centered && ((2 * i >= N) != (2 * j >= rows));
      if (flipped) {
        mesh.triangles.push_back({{v00, v10, v01}, subdomain});
        mesh.triangles.push_back({{v10, v11, v01}, subdomain});
      } else {
        mesh.triangles.push_back({{v00, v10, v11}, subdomain});
        mesh.triangles.push_back({{v00, v11, v01}, subdomain});
      }
    }
  }

  // Edge table sorted lexicographically by (min vertex, max vertex).
  std::vector<std::pair<std::array<int, 2>, int>> keyed;  // (edge key, triangle)
  keyed.reserve(3 * mesh.triangles.size());
  for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
    const auto& v = mesh.triangles[t].vertices;
    for (int k = 0; k < 3; ++k) {
      const int a = v[(k + 1) % 3];
      const int b = v[(k + 2) % 3];
      keyed.push_back({{std::min(a, b), std::max(a, b)}, t});
    }
  }
  std::sort(keyed.begin(), keyed.end());

  std::vector<int> adjacent_count;
  for (std::size_t k = 0; k < keyed.size(); ++k) {
    if (k == 0 || keyed[k].first != keyed[k - 1].first) {
      mesh.edges.push_back({keyed[k].first, false});
      adjacent_count.push_back(0);
    }
    ++adjacent_count.back();
  }
  for (std::size_t e = 0; e < mesh.edges.size(); ++e) {
    mesh.edges[e].boundary = adjacent_count[e] == 1;
  }

  auto find_edge = [&](int a, int b) {
    const std::array<int, 2> key{std::min(a, b), std::max(a, b)};
    auto it = std::lower_bound(mesh.edges.begin(), mesh.edges.end(), key,
                               [](const Edge& e, const std::array<int, 2>& k) { return e.vertices < k; });
    return static_cast<int>(it - mesh.edges.begin());
  };

  mesh.edge_of_triangle.resize(mesh.triangles.size());
  for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
    const auto& v = mesh.triangles[t].vertices;
    for (int k = 0; k < 3; ++k) {
      const int e = find_edge(v[(k + 1) % 3], v[(k + 2) % 3]);
      const Point outward = mesh.edge_midpoint(e) - mesh.vertices[v[k]];
      mesh.edge_of_triangle[t].edge[k] = e;
      mesh.edge_of_triangle[t].sign[k] = dot(mesh.edge_normal(e), outward) > 0.0 ? 1 : -1;
    }
  }

  mesh.dof_of_edge.assign(mesh.edges.size(), -1);
  for (int e = 0; e < static_cast<int>(mesh.edges.size()); ++e) {
    if (!mesh.edges[e].boundary) {
      mesh.dof_of_edge[e] = static_cast<int>(mesh.edge_of_dof.size());
      mesh.edge_of_dof.push_back(e);
    }
  }
  return mesh;
}

struct MeshStats {
  std::size_t vertices = 0;
  std::size_t triangles = 0;
  std::size_t triangles_subdomain1 = 0;
  std::size_t triangles_subdomain2 = 0;
  std::size_t edges = 0;
  std::size_t boundary_edges = 0;
  std::size_t interior_edges = 0;
  double h = 0.0;
};

inline MeshStats mesh_stats(const Mesh& mesh) {
  MeshStats s;
  s.vertices = mesh.vertices.size();
  s.triangles = mesh.triangles.size();
  for (const auto& t : mesh.triangles) {
    (t.subdomain == 1 ? s.triangles_subdomain1 : s.triangles_subdomain2) += 1;
  }
  s.edges = mesh.edges.size();
  s.boundary_edges = static_cast<std::size_t>(
      std::count_if(mesh.edges.begin(), mesh.edges.end(), [](const Edge& e) { return e.boundary; }));
  s.interior_edges = s.edges - s.boundary_edges;
  s.h = mesh.h();
  return s;
}

/// Plain-text dump: `vertices <n>` followed by `x y` lines, `triangles <n>`
/// with `v0 v1 v2 tag`, then `edges <n>` with `v0 v1 boundary_flag`.
inline void write_mesh(std::ostream& out, const Mesh& mesh) {
  out.precision(17);
  out << "vertices " << mesh.vertices.size() << '\n';
  for (const auto& p : mesh.vertices) out << p.x << ' ' << p.y << '\n';
  out << "triangles " << mesh.triangles.size() << '\n';
  for (const auto& t : mesh.triangles) {
    out << t.vertices[0] << ' ' << t.vertices[1] << ' ' << t.vertices[2] << ' ' << t.subdomain << '\n';
  }
  out << "edges " << mesh.edges.size() << '\n';
  for (const auto& e : mesh.edges) {
    out << e.vertices[0] << ' ' << e.vertices[1] << ' ' << (e.boundary ? 1 : 0) << '\n';
  }
}

}  // namespace resonavis
