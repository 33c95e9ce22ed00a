#include <doctest.h>

#include <random>

#include "trmfem/mesh.hpp"

using namespace trmfem;

namespace {

std::vector<Node> unit_cube_nodes(double lx = 1.0, double ly = 1.0, double lz = 1.0) {
  std::vector<Node> nodes;
  const double sx[8] = {0, 1, 1, 0, 0, 1, 1, 0};
  const double sy[8] = {0, 0, 1, 1, 0, 0, 1, 1};
  const double sz[8] = {0, 0, 0, 0, 1, 1, 1, 1};
  for (int a = 0; a < 8; ++a)
    nodes.push_back({a, Vec3(sx[a] * lx, sy[a] * ly, sz[a] * lz)});
  return nodes;
}

HexElement unit_hex() {
  HexElement e;
  e.id = 0;
  e.node_ids = {0, 1, 2, 3, 4, 5, 6, 7};
  e.material_id = 0;
  return e;
}

}  // namespace

TEST_CASE("quadrature weights sum to reference volumes") {
  CHECK(hex_quadrature_2x2x2().weight_sum() == doctest::Approx(8.0).epsilon(1e-14));
  CHECK(line_quadrature_2().weight_sum() == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(quad_quadrature_2x2().weight_sum() == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("hex shape functions: centroid, corners, partition of unity") {
  const HexShape c = hex_shape(Vec3(0, 0, 0));
  for (int a = 0; a < 8; ++a) CHECK(c.values[a] == doctest::Approx(0.125));

  const HexShape corner = hex_shape(Vec3(-1, -1, -1));
  CHECK(corner.values[0] == doctest::Approx(1.0));
  for (int a = 1; a < 8; ++a) CHECK(corner.values[a] == doctest::Approx(0.0));

  const HexShape p = hex_shape(Vec3(0.3, -0.2, 0.7));
  CHECK(p.values.sum() == doctest::Approx(1.0).epsilon(1e-15));

  std::mt19937 rng(12345);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const Vec3 xi(dist(rng), dist(rng), dist(rng));
    const HexShape s = hex_shape(xi);
    CHECK(std::abs(s.values.sum() - 1.0) < 1e-12);
    for (int d = 0; d < 3; ++d) CHECK(std::abs(s.gradients.col(d).sum()) < 1e-12);
  }
}

TEST_CASE("nodal interpolation at all corners") {
  const double corners[8][3] = {{-1, -1, -1}, {1, -1, -1}, {1, 1, -1}, {-1, 1, -1},
                                {-1, -1, 1},  {1, -1, 1},  {1, 1, 1},  {-1, 1, 1}};
  for (int a = 0; a < 8; ++a) {
    const HexShape s = hex_shape(Vec3(corners[a][0], corners[a][1], corners[a][2]));
    for (int b = 0; b < 8; ++b)
      CHECK(s.values[b] == doctest::Approx(a == b ? 1.0 : 0.0).epsilon(1e-14));
  }
}

TEST_CASE("B-matrix: linear patch, rigid body, Jacobian of the reference brick") {
  auto nodes = unit_cube_nodes();
  const HexElement e = unit_hex();

  // u = (x, 0, 0): strain (1,0,0,0,0,0) everywhere
  Eigen::Matrix<double, 24, 1> u;
  for (int a = 0; a < 8; ++a) {
    u.segment<3>(3 * a) = Vec3(nodes[a].coords[0], 0, 0);
  }
  for (const auto& qp : hex_quadrature_2x2x2().points) {
    const HexBMatrix bm = hex_b_matrix(e, nodes, qp.local);
    const Vec6 eps = bm.B * u;
    CHECK(eps[0] == doctest::Approx(1.0).epsilon(1e-13));
    for (int i = 1; i < 6; ++i) CHECK(std::abs(eps[i]) < 1e-13);
  }

  // rigid translation: zero strain
  for (int a = 0; a < 8; ++a) u.segment<3>(3 * a) = Vec3(1, 1, 1);
  const HexBMatrix bm = hex_b_matrix(e, nodes, Vec3(0.2, -0.4, 0.9));
  CHECK((bm.B * u).norm() < 1e-13);

  // 16.5 x 16.5 x 15 mm brick: detJ = 16.5*16.5*15/8 at the centroid
  auto brick_nodes = unit_cube_nodes(16.5, 16.5, 15.0);
  const HexBMatrix bb = hex_b_matrix(e, brick_nodes, Vec3(0, 0, 0));
  CHECK(bb.det_jacobian == doctest::Approx(510.46875).epsilon(1e-12));
}

TEST_CASE("B-matrix reports mesh inversion with the element id") {
  auto nodes = unit_cube_nodes();
  std::swap(nodes[0].coords, nodes[6].coords);  // tangle the element
  HexElement e = unit_hex();
  e.id = 42;
  CHECK_THROWS_AS(hex_b_matrix(e, nodes, Vec3(0, 0, 0)), MeshInversionError);
  try {
    hex_b_matrix(e, nodes, Vec3(0, 0, 0));
  } catch (const MeshInversionError& err) {
    CHECK(std::string(err.what()).find("element 42") != std::string::npos);
    CHECK(err.element_id == 42);
  }
}

TEST_CASE("patch test: linear field on a distorted grid gives constant strain") {
  Grid g = generate_grid(Vec3(0, 0, 0), Vec3(2, 2, 2), {2, 2, 2});
  // distort interior nodes deterministically
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> dist(-0.15, 0.15);
  for (auto& n : g.nodes) {
    Vec3& x = n.coords;
    const bool interior = x[0] > 0.1 && x[0] < 1.9 && x[1] > 0.1 && x[1] < 1.9 &&
                          x[2] > 0.1 && x[2] < 1.9;
    if (interior) x += Vec3(dist(rng), dist(rng), dist(rng));
  }
  // u = A x with symmetric-part strain
  Mat3 A;
  A << 1e-3, 4e-4, -2e-4,
       0.0, -5e-4, 3e-4,
       2e-4, 1e-4, 8e-4;
  Vec6 expected;
  expected << A(0, 0), A(1, 1), A(2, 2), A(0, 1) + A(1, 0), A(1, 2) + A(2, 1),
      A(0, 2) + A(2, 0);
  for (const auto& e : g.elements) {
    Eigen::Matrix<double, 24, 1> u;
    for (int a = 0; a < 8; ++a) u.segment<3>(3 * a) = A * g.nodes[e.node_ids[a]].coords;
    for (const auto& qp : hex_quadrature_2x2x2().points) {
      const HexBMatrix bm = hex_b_matrix(e, g.nodes, qp.local);
      const Vec6 eps = bm.B * u;
      CHECK((eps - expected).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("generate_grid: counting, face sharing, paper brick") {
  const Grid g = generate_grid(Vec3(0, 0, 0), Vec3(33, 33, 30), {2, 2, 2});
  CHECK(g.nodes.size() == 27);
  CHECK(g.elements.size() == 8);

  const Grid one = generate_grid(Vec3(0, 0, 0), Vec3(16.5, 16.5, 15), {1, 1, 1});
  CHECK(one.elements.size() == 1);
  CHECK(one.nodes.size() == 8);

  const Grid row = generate_grid(Vec3(0, 0, 0), Vec3(66, 16.5, 15), {4, 1, 1});
  CHECK(row.nodes.size() == 20);
  CHECK(row.elements.size() == 4);
  // consecutive elements share a face (4 nodes)
  for (int i = 0; i + 1 < 4; ++i) {
    int shared = 0;
    for (int a : row.elements[i].node_ids)
      for (int b : row.elements[i + 1].node_ids)
        if (a == b) ++shared;
    CHECK(shared == 4);
  }

  CHECK_THROWS_AS(generate_grid(Vec3(0, 0, 0), Vec3(-1, 1, 1), {1, 1, 1}),
                  ValidationError);
  CHECK_THROWS_AS(generate_grid(Vec3(0, 0, 0), Vec3(1, 1, 1), {0, 1, 1}),
                  ValidationError);
}

TEST_CASE("grid generation is deterministic") {
  const Grid a = generate_grid(Vec3(1, 2, 3), Vec3(33, 66, 99), {3, 4, 5});
  const Grid b = generate_grid(Vec3(1, 2, 3), Vec3(33, 66, 99), {3, 4, 5});
  REQUIRE(a.nodes.size() == b.nodes.size());
  REQUIRE(a.elements.size() == b.elements.size());
  for (std::size_t i = 0; i < a.nodes.size(); ++i) {
    CHECK(a.nodes[i].id == b.nodes[i].id);
    CHECK(a.nodes[i].coords == b.nodes[i].coords);
  }
  for (std::size_t i = 0; i < a.elements.size(); ++i)
    CHECK(a.elements[i].node_ids == b.elements[i].node_ids);
}

TEST_CASE("truss kinematics") {
  std::vector<Node> nodes = {{0, Vec3(0, 0, 0)}, {1, Vec3(16.5, 0, 0)}};
  TrussElement e;
  e.id = 0;
  e.node_ids = {0, 1};
  e.area = 3.8;

  CHECK(truss_axial_strain(e, nodes, Vec3(0, 0, 0), Vec3(0.165, 0, 0)) ==
        doctest::Approx(0.01).epsilon(1e-14));
  CHECK(truss_axial_strain(e, nodes, Vec3(0, 2, 0), Vec3(0, 2, 0)) ==
        doctest::Approx(0.0));
  CHECK(truss_axial_strain(e, nodes, Vec3(0.1, 0, 0), Vec3(0.2, 0, 0)) ==
        doctest::Approx(0.1 / 16.5).epsilon(1e-12));

  nodes[1].coords = nodes[0].coords;
  CHECK_THROWS_AS(truss_axial_strain(e, nodes, Vec3(0, 0, 0), Vec3(1, 0, 0)),
                  ValidationError);
}
