#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "resonavis/mesh.hpp"

using namespace resonavis;

namespace {

const GeometryConfig kCavity{1.0, 2.0, 1.25};

}  // namespace

TEST(Mesh, CountsAtN4) {
  const Mesh m = build_rect_mesh(kCavity, 4);
  const MeshStats s = mesh_stats(m);
  EXPECT_EQ(s.vertices, 45u);
  EXPECT_EQ(s.triangles, 64u);
  EXPECT_EQ(s.edges, 108u);
  EXPECT_EQ(s.boundary_edges, 24u);
  EXPECT_EQ(s.interior_edges, 84u);
  EXPECT_EQ(m.num_dofs(), 84u);
  EXPECT_EQ(s.triangles_subdomain1, 40u);
  EXPECT_EQ(s.triangles_subdomain2, 24u);
}

TEST(Mesh, TriangleCountAtN8) {
  EXPECT_EQ(build_rect_mesh(kCavity, 8).triangles.size(), 256u);
}

TEST(Mesh, EulerIdentities) {
  for (auto pattern : {DiagonalPattern::centered, DiagonalPattern::uniform}) {
    for (int N : {4, 8, 12, 16, 32}) {
      const MeshStats s = mesh_stats(build_rect_mesh(kCavity, N, pattern));
      const long V = static_cast<long>(s.vertices), E = static_cast<long>(s.edges), T = static_cast<long>(s.triangles);
      EXPECT_EQ(V - E + T, 1) << "N=" << N;
      EXPECT_EQ(3 * T, 2 * E - static_cast<long>(s.boundary_edges)) << "N=" << N;
      EXPECT_EQ(static_cast<long>(s.boundary_edges), 2 * (N + 2 * N)) << "N=" << N;
    }
  }
}

TEST(Mesh, MisalignedInterface) {
  try {
    build_rect_mesh(kCavity, 3);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::misaligned_interface);
  }
}

TEST(Mesh, NonIntegerRows) {
  try {
    build_rect_mesh(GeometryConfig{1.0, 1.5, 0.5}, 3);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::non_integer_rows);
  }
}

TEST(Mesh, InvalidGeometry) {
  EXPECT_THROW(build_rect_mesh(GeometryConfig{1.0, 2.0, 2.5}, 4), Error);
  EXPECT_THROW(build_rect_mesh(GeometryConfig{-1.0, 2.0, 1.0}, 4), Error);
  EXPECT_THROW(build_rect_mesh(kCavity, 0), Error);
}

TEST(Mesh, TrianglesAreCounterclockwiseAndTagged) {
  const Mesh m = build_rect_mesh(kCavity, 8);
  for (std::size_t t = 0; t < m.triangles.size(); ++t) {
    const auto p = m.triangle_points(static_cast<int>(t));
    EXPECT_GT(cross(p[1] - p[0], p[2] - p[0]), 0.0);
    const double cy = (p[0].y + p[1].y + p[2].y) / 3.0;
    EXPECT_EQ(m.triangles[t].subdomain, cy < kCavity.H ? 1 : 2);
  }
}

TEST(Mesh, OrientationSignsAreConsistent) {
  // Each interior edge is seen with opposite signs from its two triangles.
  const Mesh m = build_rect_mesh(kCavity, 8);
  std::vector<int> sum(m.edges.size(), 0), count(m.edges.size(), 0);
  for (const auto& te : m.edge_of_triangle) {
    for (int k = 0; k < 3; ++k) {
      sum[te.edge[k]] += te.sign[k];
      ++count[te.edge[k]];
    }
  }
  for (std::size_t e = 0; e < m.edges.size(); ++e) {
    if (m.edges[e].boundary) {
      EXPECT_EQ(count[e], 1);
    } else {
      EXPECT_EQ(count[e], 2);
      EXPECT_EQ(sum[e], 0);
    }
  }
}

TEST(Mesh, EdgeNormalIsUnitAndOrthogonal) {
  const Mesh m = build_rect_mesh(kCavity, 4);
  for (int e = 0; e < static_cast<int>(m.edges.size()); ++e) {
    const Point n = m.edge_normal(e);
    const Point t = m.vertices[m.edges[e].vertices[1]] - m.vertices[m.edges[e].vertices[0]];
    EXPECT_NEAR(norm(n), 1.0, 1e-15);
    EXPECT_NEAR(dot(n, t), 0.0, 1e-15);
  }
}

TEST(Mesh, InterfaceIsAMeshLine) {
  const Mesh m = build_rect_mesh(kCavity, 8);
  int on_interface = 0;
  for (const auto& e : m.edges) {
    const Point a = m.vertices[e.vertices[0]], b = m.vertices[e.vertices[1]];
    if (a.y == kCavity.H && b.y == kCavity.H) ++on_interface;
  }
  EXPECT_EQ(on_interface, 8);
}

TEST(Mesh, CenteredDiagonalsPointToCenter) {
  const Mesh m = build_rect_mesh(kCavity, 4);
  const Point center{0.5, 1.0};
  for (const auto& e : m.edges) {
    const Point a = m.vertices[e.vertices[0]], b = m.vertices[e.vertices[1]];
    if (a.x == b.x || a.y == b.y) continue;
    const Point far = norm(a - center) > norm(b - center) ? a : b;
    const Point near = far.x == a.x && far.y == a.y ? b : a;
    // The diagonal's direction from the far end is toward the center in both axes.
    EXPECT_GE((near.x - far.x) * (center.x - far.x), 0.0);
    EXPECT_GE((near.y - far.y) * (center.y - far.y), 0.0);
  }
}

TEST(Mesh, UniformDiagonalsShareOneDirection) {
  const Mesh m = build_rect_mesh(kCavity, 4, DiagonalPattern::uniform);
  for (const auto& e : m.edges) {
    const Point d = m.vertices[e.vertices[1]] - m.vertices[e.vertices[0]];
    if (d.x != 0.0 && d.y != 0.0) EXPECT_GT(d.x * d.y, 0.0);
  }
}

TEST(Mesh, DofNumberingFollowsEdges) {
  const Mesh m = build_rect_mesh(kCavity, 4);
  std::set<int> seen;
  for (std::size_t d = 0; d < m.num_dofs(); ++d) {
    const int e = m.edge_of_dof[d];
    EXPECT_FALSE(m.edges[e].boundary);
    EXPECT_EQ(m.dof_of_edge[e], static_cast<int>(d));
    if (d > 0) EXPECT_GT(e, m.edge_of_dof[d - 1]);
    seen.insert(e);
  }
  EXPECT_EQ(seen.size(), m.num_dofs());
}

TEST(Mesh, DumpFormat) {
  const Mesh m = build_rect_mesh(kCavity, 4);
  std::ostringstream out;
  write_mesh(out, m);
  std::istringstream in(out.str());
  std::string word;
  std::size_t n = 0;
  in >> word >> n;
  EXPECT_EQ(word, "vertices");
  EXPECT_EQ(n, m.vertices.size());
  double x, y;
  for (std::size_t i = 0; i < n; ++i) in >> x >> y;
  in >> word >> n;
  EXPECT_EQ(word, "triangles");
  EXPECT_EQ(n, m.triangles.size());
  int a, b, c, tag;
  for (std::size_t i = 0; i < n; ++i) {
    in >> a >> b >> c >> tag;
    EXPECT_TRUE(tag == 1 || tag == 2);
  }
  in >> word >> n;
  EXPECT_EQ(word, "edges");
  EXPECT_EQ(n, m.edges.size());
  int boundary = 0, flag;
  for (std::size_t i = 0; i < n; ++i) {
    in >> a >> b >> flag;
    boundary += flag;
  }
  EXPECT_EQ(boundary, 24);
  EXPECT_FALSE(in.fail());
}
