#include "trmfem/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace trmfem {

double DofFunctional::evaluate(const Eigen::VectorXd& u) const {
  double v = 0.0;
  for (const auto& t : terms) v += t.coeff * u[3 * t.node + t.dof];
  return v;
}

const NodeSet& Model::node_set(const std::string& name) const {
  for (const auto& s : node_sets)
    if (s.name == name) return s;
  throw ValidationError("node_set", "unknown node set '" + name + "'");
}

bool Model::has_node_set(const std::string& name) const {
  return std::any_of(node_sets.begin(), node_sets.end(),
                     [&](const NodeSet& s) { return s.name == name; });
}

void Model::add_node_set(NodeSet set) {
  if (has_node_set(set.name))
    throw ValidationError("node_set", "duplicate node set '" + set.name + "'");
  node_sets.push_back(std::move(set));
}

namespace {

void check_node(const Model& m, int id, const std::string& where) {
  if (id < 0 || id >= static_cast<int>(m.nodes.size()))
    throw ValidationError(where, "node id " + std::to_string(id) + " out of range");
}

void check_coincident(const Model& m, int a, int b, double tol, const std::string& where) {
  const double d = (m.nodes[a].coords - m.nodes[b].coords).norm();
  if (d > tol)
    throw ValidationError(where, "paired nodes " + std::to_string(a) + "/" +
                                     std::to_string(b) + " are " + std::to_string(d) +
                                     " mm apart");
}

}  // namespace

void audit_model(const Model& model) {
  const double tol = 1e-6;
  for (std::size_t i = 0; i < model.nodes.size(); ++i) {
    if (model.nodes[i].id != static_cast<int>(i))
      throw ValidationError("nodes", "ids must be dense 0..N-1");
    if (!model.nodes[i].coords.allFinite())
      throw ValidationError("nodes", "non-finite coordinates at node " + std::to_string(i));
  }

  std::vector<char> referenced(model.nodes.size(), 0);
  auto touch = [&](int id, const std::string& where) {
    check_node(model, id, where);
    referenced[id] = 1;
  };

  for (const auto& e : model.hexes) {
    std::set<int> distinct;
    for (int id : e.node_ids) {
      touch(id, "hex " + std::to_string(e.id));
      distinct.insert(id);
    }
    if (distinct.size() != 8)
      throw ValidationError("hex " + std::to_string(e.id), "nodes must be distinct");
    if (e.material_id < 0 || e.material_id >= static_cast<int>(model.materials.size()))
      throw ValidationError("hex " + std::to_string(e.id), "invalid material id");
    const QuadratureRule rule = hex_quadrature_2x2x2();
    for (const auto& qp : rule.points) hex_b_matrix(e, model.nodes, qp.local);
  }
  for (const auto& e : model.trusses) {
    for (int id : e.node_ids) touch(id, "truss " + std::to_string(e.id));
    if (!(e.area > 0.0))
      throw ValidationError("truss " + std::to_string(e.id), "area must be > 0");
    const Vec3 d = model.nodes[e.node_ids[1]].coords - model.nodes[e.node_ids[0]].coords;
    if (!(d.norm() > 0.0))
      throw ValidationError("truss " + std::to_string(e.id), "zero length");
  }
  for (const auto& e : model.line_interfaces) {
    const std::string where = "line_interface " + std::to_string(e.id);
    for (int id : e.truss_node_ids) touch(id, where);
    for (int id : e.solid_node_ids) touch(id, where);
    check_coincident(model, e.truss_node_ids[0], e.solid_node_ids[0], tol, where);
    check_coincident(model, e.truss_node_ids[1], e.solid_node_ids[1], tol, where);
    if (!(e.perimeter > 0.0)) throw ValidationError(where, "perimeter must be > 0");
  }
  for (const auto& e : model.point_interfaces) {
    const std::string where = "point_interface " + std::to_string(e.id);
    for (int id : e.node_pair) touch(id, where);
    check_coincident(model, e.node_pair[0], e.node_pair[1], tol, where);
  }
  for (const auto& e : model.surface_interfaces) {
    const std::string where = "surface_interface " + std::to_string(e.id);
    for (int a = 0; a < 4; ++a) {
      touch(e.mortar_node_ids[a], where);
      touch(e.masonry_node_ids[a], where);
      check_coincident(model, e.mortar_node_ids[a], e.masonry_node_ids[a], tol, where);
    }
  }
  for (const auto& e : model.friction_points) {
    const std::string where = "friction_point " + std::to_string(e.id);
    for (int id : e.node_pair) touch(id, where);
    if (!(e.params.friction_coefficient >= 0.0))
      throw ValidationError(where, "friction coefficient must be >= 0");
  }

  for (std::size_t i = 0; i < model.nodes.size(); ++i)
    if (!referenced[i])
      throw ValidationError("nodes", "orphan node " + std::to_string(i));

  std::set<std::pair<int, int>> constrained;
  for (const auto& f : model.fixed_dofs) {
    check_node(model, f.node, "fixed_dofs");
    if (f.dof < 0 || f.dof > 2) throw ValidationError("fixed_dofs", "dof out of range");
    if (!constrained.insert({f.node, f.dof}).second)
      throw ValidationError("fixed_dofs", "dof constrained twice (node " +
                                              std::to_string(f.node) + ", dof " +
                                              std::to_string(f.dof) + ")");
  }

  std::set<std::string> names;
  for (const auto& s : model.node_sets) {
    if (!names.insert(s.name).second)
      throw ValidationError("node_sets", "duplicate name '" + s.name + "'");
    for (int id : s.node_ids) check_node(model, id, "node_set " + s.name);
  }
}

namespace {

// Node reordering that keeps the Jacobian positive after a reflection.
constexpr int kHexMirror[8] = {1, 0, 3, 2, 5, 4, 7, 6};
constexpr int kQuadMirror[4] = {0, 3, 2, 1};

}  // namespace

Model mirror_model(const Model& model, int axis, double plane, double tol,
                   std::vector<int>* node_map) {
  Model out = model;
  const int n0 = static_cast<int>(model.nodes.size());

  // Map original node -> mirrored node (fused on the plane).
  std::vector<int> mirrored(n0, -1);
  for (int i = 0; i < n0; ++i) {
    Vec3 x = model.nodes[i].coords;
    if (std::abs(x[axis] - plane) <= tol) {
      mirrored[i] = i;
    } else {
      x[axis] = 2.0 * plane - x[axis];
      const int id = static_cast<int>(out.nodes.size());
      out.nodes.push_back({id, x});
      mirrored[i] = id;
    }
  }

  auto mirror_hex = [&](const HexElement& e) {
    HexElement m = e;
    m.id = static_cast<int>(out.hexes.size());
    for (int a = 0; a < 8; ++a) m.node_ids[a] = mirrored[e.node_ids[kHexMirror[a]]];
    out.hexes.push_back(m);
  };
  for (const auto& e : model.hexes) mirror_hex(e);

  for (const auto& e : model.trusses) {
    TrussElement m = e;
    m.id = static_cast<int>(out.trusses.size());
    for (int a = 0; a < 2; ++a) m.node_ids[a] = mirrored[e.node_ids[a]];
    if (m.node_ids[0] == e.node_ids[0] && m.node_ids[1] == e.node_ids[1]) continue;
    out.trusses.push_back(m);
  }
  for (const auto& e : model.line_interfaces) {
    LineInterfaceElement m = e;
    m.id = static_cast<int>(out.line_interfaces.size());
    for (int a = 0; a < 2; ++a) {
      m.truss_node_ids[a] = mirrored[e.truss_node_ids[a]];
      m.solid_node_ids[a] = mirrored[e.solid_node_ids[a]];
    }
    if (m.truss_node_ids == e.truss_node_ids && m.solid_node_ids == e.solid_node_ids)
      continue;
    out.line_interfaces.push_back(m);
  }
  for (const auto& e : model.point_interfaces) {
    PointInterfaceElement m = e;
    m.id = static_cast<int>(out.point_interfaces.size());
    for (int a = 0; a < 2; ++a) m.node_pair[a] = mirrored[e.node_pair[a]];
    m.plane_normal[axis] = -m.plane_normal[axis];
    if (m.node_pair == e.node_pair) continue;
    out.point_interfaces.push_back(m);
  }
  for (const auto& e : model.surface_interfaces) {
    SurfaceInterfaceElement m = e;
    m.id = static_cast<int>(out.surface_interfaces.size());
    bool on_plane = true;
    for (int a = 0; a < 4; ++a) {
      m.mortar_node_ids[a] = mirrored[e.mortar_node_ids[kQuadMirror[a]]];
      m.masonry_node_ids[a] = mirrored[e.masonry_node_ids[kQuadMirror[a]]];
      on_plane = on_plane && m.mortar_node_ids[a] == e.mortar_node_ids[kQuadMirror[a]];
    }
    if (on_plane) continue;
    out.surface_interfaces.push_back(m);
  }
  for (const auto& e : model.friction_points) {
    FrictionPointElement m = e;
    m.id = static_cast<int>(out.friction_points.size());
    for (int a = 0; a < 2; ++a) m.node_pair[a] = mirrored[e.node_pair[a]];
    m.contact_normal[axis] = -m.contact_normal[axis];
    if (m.node_pair == e.node_pair) continue;
    out.friction_points.push_back(m);
  }

  // Constraints: drop the mirror-plane normal fixings (they become interior),
  // mirror the rest.
  out.fixed_dofs.clear();
  std::set<std::pair<int, int>> seen;
  for (const auto& f : model.fixed_dofs) {
    const bool on_plane = mirrored[f.node] == f.node;
    if (on_plane && f.dof == axis) continue;  // interior symmetry fixing
    if (seen.insert({f.node, f.dof}).second) out.fixed_dofs.push_back(f);
    const int mn = mirrored[f.node];
    if (mn != f.node && seen.insert({mn, f.dof}).second)
      out.fixed_dofs.push_back({mn, f.dof});
  }

  for (auto& s : out.node_sets) {
    std::vector<int> extra;
    for (int id : s.node_ids)
      if (mirrored[id] != id) extra.push_back(mirrored[id]);
    s.node_ids.insert(s.node_ids.end(), extra.begin(), extra.end());
  }

  out.reaction_multiplicity = model.reaction_multiplicity / 2.0;
  if (node_map) *node_map = mirrored;
  return out;
}

LoadStage mirror_stage(const LoadStage& stage, int axis,
                       const std::vector<int>& node_map) {
  LoadStage out = stage;
  for (const auto& p : stage.prescribed) {
    const int mn = node_map[p.node];
    if (mn == p.node) continue;
    out.prescribed.push_back({mn, p.dof, p.dof == axis ? -p.scale : p.scale});
  }
  auto mirror_forces = [&](const std::vector<NodalForce>& in,
                           std::vector<NodalForce>& dst) {
    for (const auto& f : in) {
      const int mn = node_map[f.node];
      if (mn == f.node) continue;
      dst.push_back({mn, f.dof, f.dof == axis ? -f.value : f.value});
    }
  };
  mirror_forces(stage.forces, out.forces);
  mirror_forces(stage.load_pattern, out.load_pattern);
  return out;
}

}  // namespace trmfem
