#include "trmfem/mesh.hpp"

#include <cmath>

namespace trmfem {

namespace {
constexpr double kGauss = 0.57735026918962576451;  // 1/sqrt(3)

// Corner signs of the trilinear brick in standard ordering.
constexpr int kHexSign[8][3] = {{-1, -1, -1}, {+1, -1, -1}, {+1, +1, -1}, {-1, +1, -1},
                                {-1, -1, +1}, {+1, -1, +1}, {+1, +1, +1}, {-1, +1, +1}};
}  // namespace

double QuadratureRule::weight_sum() const {
  double s = 0.0;
  for (const auto& p : points) s += p.weight;
  return s;
}

QuadratureRule hex_quadrature_2x2x2() {
  QuadratureRule rule;
  for (int k = 0; k < 2; ++k)
    for (int j = 0; j < 2; ++j)
      for (int i = 0; i < 2; ++i)
        rule.points.push_back({Vec3((2 * i - 1) * kGauss, (2 * j - 1) * kGauss,
                                    (2 * k - 1) * kGauss),
                               1.0});
  return rule;
}

QuadratureRule line_quadrature_2() {
  QuadratureRule rule;
  rule.points.push_back({Vec3(-kGauss, 0, 0), 1.0});
  rule.points.push_back({Vec3(+kGauss, 0, 0), 1.0});
  return rule;
}

QuadratureRule quad_quadrature_2x2() {
  QuadratureRule rule;
  for (int j = 0; j < 2; ++j)
    for (int i = 0; i < 2; ++i)
      rule.points.push_back({Vec3((2 * i - 1) * kGauss, (2 * j - 1) * kGauss, 0), 1.0});
  return rule;
}

HexShape hex_shape(const Vec3& local) {
  HexShape s;
  const double xi = local[0], eta = local[1], zeta = local[2];
  for (int a = 0; a < 8; ++a) {
    const double sx = kHexSign[a][0], sy = kHexSign[a][1], sz = kHexSign[a][2];
    s.values[a] = 0.125 * (1.0 + sx * xi) * (1.0 + sy * eta) * (1.0 + sz * zeta);
    s.gradients(a, 0) = 0.125 * sx * (1.0 + sy * eta) * (1.0 + sz * zeta);
    s.gradients(a, 1) = 0.125 * sy * (1.0 + sx * xi) * (1.0 + sz * zeta);
    s.gradients(a, 2) = 0.125 * sz * (1.0 + sx * xi) * (1.0 + sy * eta);
  }
  return s;
}

HexBMatrix hex_b_matrix(const HexElement& element, const std::vector<Node>& nodes,
                        const Vec3& local) {
  const HexShape shape = hex_shape(local);

  // J_ij = d x_j / d xi_i
  Mat3 J = Mat3::Zero();
  for (int a = 0; a < 8; ++a) {
    const Vec3& X = nodes[element.node_ids[a]].coords;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) J(i, j) += shape.gradients(a, i) * X[j];
  }
  const double det = J.determinant();
  if (!(det > 0.0)) throw MeshInversionError(element.id, det);
  const Mat3 Jinv = J.inverse();

  HexBMatrix out;
  out.det_jacobian = det;
  out.B.setZero();
  for (int a = 0; a < 8; ++a) {
    // grad_x N_a = J^-1 * grad_xi N_a  (with J_ij = dx_j/dxi_i)
    Vec3 g = Jinv * shape.gradients.row(a).transpose();
    const int c = 3 * a;
    out.B(0, c + 0) = g[0];
    out.B(1, c + 1) = g[1];
    out.B(2, c + 2) = g[2];
    out.B(3, c + 0) = g[1];
    out.B(3, c + 1) = g[0];
    out.B(4, c + 1) = g[2];
    out.B(4, c + 2) = g[1];
    out.B(5, c + 0) = g[2];
    out.B(5, c + 2) = g[0];
  }
  return out;
}

double hex_volume(const HexElement& element, const std::vector<Node>& nodes) {
  const QuadratureRule rule = hex_quadrature_2x2x2();
  double v = 0.0;
  for (const auto& qp : rule.points)
    v += hex_b_matrix(element, nodes, qp.local).det_jacobian * qp.weight;
  return v;
}

Grid generate_grid_coords(const std::vector<double>& xs, const std::vector<double>& ys,
                          const std::vector<double>& zs) {
  if (xs.size() < 2 || ys.size() < 2 || zs.size() < 2)
    throw ValidationError("grid", "each axis needs at least two coordinate planes");
  for (const auto* axis : {&xs, &ys, &zs})
    for (std::size_t i = 1; i < axis->size(); ++i)
      if (!((*axis)[i] > (*axis)[i - 1]))
        throw ValidationError("grid", "coordinate planes must be strictly increasing");

  Grid g;
  g.nx = static_cast<int>(xs.size()) - 1;
  g.ny = static_cast<int>(ys.size()) - 1;
  g.nz = static_cast<int>(zs.size()) - 1;
  g.nodes.reserve(xs.size() * ys.size() * zs.size());
  int id = 0;
  for (int k = 0; k <= g.nz; ++k)
    for (int j = 0; j <= g.ny; ++j)
      for (int i = 0; i <= g.nx; ++i)
        g.nodes.push_back({id++, Vec3(xs[i], ys[j], zs[k])});

  g.elements.reserve(static_cast<std::size_t>(g.nx) * g.ny * g.nz);
  int eid = 0;
  for (int k = 0; k < g.nz; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        HexElement e;
        e.id = eid++;
        e.node_ids = {g.node_index(i, j, k),         g.node_index(i + 1, j, k),
                      g.node_index(i + 1, j + 1, k), g.node_index(i, j + 1, k),
                      g.node_index(i, j, k + 1),     g.node_index(i + 1, j, k + 1),
                      g.node_index(i + 1, j + 1, k + 1), g.node_index(i, j + 1, k + 1)};
        g.elements.push_back(e);
      }
  return g;
}

Grid generate_grid(const Vec3& origin, const Vec3& sizes,
                   const std::array<int, 3>& divisions) {
  for (int d = 0; d < 3; ++d) {
    if (divisions[d] < 1) throw ValidationError("grid.divisions", "must be >= 1");
    if (!(sizes[d] > 0.0)) throw ValidationError("grid.sizes", "must be positive");
  }
  std::array<std::vector<double>, 3> axes;
  for (int d = 0; d < 3; ++d) {
    axes[d].resize(divisions[d] + 1);
    for (int i = 0; i <= divisions[d]; ++i)
      axes[d][i] = origin[d] + sizes[d] * static_cast<double>(i) / divisions[d];
  }
  return generate_grid_coords(axes[0], axes[1], axes[2]);
}

double truss_axial_strain(const TrussElement& element, const std::vector<Node>& nodes,
                          const Vec3& u0, const Vec3& u1) {
  const Vec3 d = nodes[element.node_ids[1]].coords - nodes[element.node_ids[0]].coords;
  const double L = d.norm();
  if (!(L > 0.0)) throw ValidationError("truss", "zero-length element " +
                                                     std::to_string(element.id));
  return d.dot(u1 - u0) / (L * L);
}

}  // namespace trmfem
