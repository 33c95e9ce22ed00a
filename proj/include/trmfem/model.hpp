#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "trmfem/interfaces.hpp"
#include "trmfem/materials.hpp"
#include "trmfem/mesh.hpp"

namespace trmfem {

struct Material {
  enum class Kind { Elastic, Yarn, Bulk };
  Kind kind = Kind::Elastic;
  std::string label;
  ElasticParams elastic;   // valid for Kind::Elastic
  YarnDamageParams yarn;   // valid for Kind::Yarn
  BulkDPParams bulk;       // valid for Kind::Bulk

  double self_weight() const {
    switch (kind) {
      case Kind::Elastic: return elastic.self_weight;
      case Kind::Yarn: return yarn.elastic.self_weight;
      case Kind::Bulk: return bulk.elastic.self_weight;
    }
    return 0.0;
  }
};

struct FixedDof {
  int node = -1;
  int dof = -1;  // 0..2
};

// A prescribed dof follows scale * (stage ramp value).
struct PrescribedDof {
  int node = -1;
  int dof = -1;
  double scale = 1.0;
};

struct NodalForce {
  int node = -1;
  int dof = -1;
  double value = 0.0;  // N
};

// Linear functional on the displacement vector, used for deflection control
// and derived outputs.
struct DofFunctional {
  struct Term {
    int node = -1;
    int dof = -1;
    double coeff = 0.0;
  };
  std::vector<Term> terms;
  double evaluate(const Eigen::VectorXd& u) const;
};

struct LoadStage {
  enum class Kind { ConstantForces, Gravity, DisplacementRamp };
  Kind kind = Kind::ConstantForces;
  int increments = 1;
  std::string name;

  // ConstantForces
  std::vector<NodalForce> forces;

  // Gravity
  Vec3 gravity_direction = -Vec3::UnitY();

  // DisplacementRamp, boundary-controlled: prescribed dofs ramp to `target`.
  std::vector<PrescribedDof> prescribed;
  double target = 0.0;  // mm

  // DisplacementRamp, deflection-controlled: a load pattern (normalized to a
  // unit resultant) is scaled so that `control` ramps to `target`.
  bool deflection_control = false;
  std::vector<NodalForce> load_pattern;
  DofFunctional control;

  // Stop once the total reaction drops below this fraction of the running
  // peak (ramp stages only; <= 0 disables).
  double stop_fraction = 0.0;
};

struct GaugePair {
  int node_a = -1;
  int node_b = -1;
  int dof = -1;        // measured displacement component
  double base = 0.0;   // signed initial separation along `dof`, mm
};

struct GaugeSpec {
  // DC shear gauges
  std::optional<GaugePair> tension_diagonal;
  std::optional<GaugePair> compression_diagonal;
  // IB/OB deflection (positive in the loading sense)
  DofFunctional deflection;
  double recorded_base_length = 0.0;  // mm, actual gauge base used
};

struct ModelMeta {
  std::string setup;  // DC / IB / OB / custom
  std::string sample_id;
  double actual_pitch = 0.0;
  double in_plane_element_size = 0.0;
  double coating_thickness = 0.0;
  bool strengthened = false;
};

struct Model {
  std::vector<Node> nodes;
  std::vector<HexElement> hexes;
  std::vector<TrussElement> trusses;
  std::vector<LineInterfaceElement> line_interfaces;
  std::vector<PointInterfaceElement> point_interfaces;
  std::vector<SurfaceInterfaceElement> surface_interfaces;
  std::vector<FrictionPointElement> friction_points;
  std::vector<Material> materials;
  std::vector<NodeSet> node_sets;
  std::vector<FixedDof> fixed_dofs;

  // Factor turning the modelled reaction into the full-sample load.
  double reaction_multiplicity = 1.0;

  ModelMeta meta;

  int dof_count() const { return 3 * static_cast<int>(nodes.size()); }
  std::size_t element_count() const {
    return hexes.size() + trusses.size() + line_interfaces.size() +
           point_interfaces.size() + surface_interfaces.size() +
           friction_points.size();
  }
  const NodeSet& node_set(const std::string& name) const;
  bool has_node_set(const std::string& name) const;
  void add_node_set(NodeSet set);
};

// Structural validity checks: ids, orphan nodes, interface coincidence,
// positive Jacobians, unique constraints, unique set names. Throws
// ValidationError on the first violation.
void audit_model(const Model& model);

// Reflect a model across an axis-aligned plane and merge it with the original,
// fusing coincident nodes (tolerance mm). Constraints normal to the plane that
// fall on it are dropped; everything else is mirrored. Used to cross-validate
// symmetry reductions. `node_map` (optional) receives original -> mirrored ids.
Model mirror_model(const Model& model, int axis, double plane_coordinate,
                   double merge_tolerance = 1e-6,
                   std::vector<int>* node_map = nullptr);

// Companion for load stages: duplicates prescribed dofs and nodal forces onto
// the mirrored nodes, flipping the component normal to the plane.
LoadStage mirror_stage(const LoadStage& stage, int axis,
                       const std::vector<int>& node_map);

}  // namespace trmfem
