#pragma once

#include <array>
#include <string>
#include <vector>

#include "trmfem/core.hpp"

namespace trmfem {

struct Node {
  int id = -1;
  Vec3 coords = Vec3::Zero();  // mm
};

// 8-node trilinear brick, standard ordering: bottom face (-1,-1,-1)(+1,-1,-1)
// (+1,+1,-1)(-1,+1,-1), then the top face in the same sweep.
struct HexElement {
  int id = -1;
  std::array<int, 8> node_ids{};
  int material_id = -1;
};

struct TrussElement {
  int id = -1;
  std::array<int, 2> node_ids{};
  int material_id = -1;
  double area = 0.0;  // mm^2
};

struct QuadraturePoint {
  Vec3 local = Vec3::Zero();
  double weight = 0.0;
};

struct QuadratureRule {
  std::vector<QuadraturePoint> points;
  double weight_sum() const;
};

QuadratureRule hex_quadrature_2x2x2();
QuadratureRule line_quadrature_2();
QuadratureRule quad_quadrature_2x2();

struct NodeSet {
  std::string name;
  std::vector<int> node_ids;
};

struct HexShape {
  Eigen::Matrix<double, 8, 1> values;
  Eigen::Matrix<double, 8, 3> gradients;  // d N_a / d xi_j
};

// Trilinear shape functions; values sum to 1, gradients sum to zero.
HexShape hex_shape(const Vec3& local);

struct HexBMatrix {
  Eigen::Matrix<double, 6, 24> B;
  double det_jacobian = 0.0;
};

// Strain-displacement matrix at a local point; throws MeshInversionError for a
// non-positive Jacobian.
HexBMatrix hex_b_matrix(const HexElement& element, const std::vector<Node>& nodes,
                        const Vec3& local);

double hex_volume(const HexElement& element, const std::vector<Node>& nodes);

struct Grid {
  std::vector<Node> nodes;
  std::vector<HexElement> elements;
  int nx = 0, ny = 0, nz = 0;
  int node_index(int i, int j, int k) const {
    return i + (nx + 1) * (j + (ny + 1) * k);
  }
};

// Structured grid with lexicographic ordering (x fastest, then y, then z) for
// both nodes and elements. Deterministic: identical inputs give identical
// orderings.
Grid generate_grid(const Vec3& origin, const Vec3& sizes,
                   const std::array<int, 3>& divisions);

// Same ordering, but with explicit (strictly increasing) coordinate planes per
// axis so builders can pin support lines and yarn planes exactly.
Grid generate_grid_coords(const std::vector<double>& xs,
                          const std::vector<double>& ys,
                          const std::vector<double>& zs);

// Small-strain axial strain of a two-node truss under the given end
// displacements. Throws on zero-length elements.
double truss_axial_strain(const TrussElement& element, const std::vector<Node>& nodes,
                          const Vec3& u0, const Vec3& u1);

}  // namespace trmfem
