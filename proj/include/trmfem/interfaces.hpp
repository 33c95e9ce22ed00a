#pragma once

#include <array>
#include <vector>

#include "trmfem/core.hpp"
#include "trmfem/materials.hpp"
#include "trmfem/mesh.hpp"

namespace trmfem {

// Piecewise slip -> traction envelope: power-law rise to tau_max at s_1,
// plateau to s_2, linear descent to tau_f at s_3, constant residual beyond.
// The initial tangent is capped at k_t (the power law has infinite stiffness
// at the origin), and unloading/reloading below the maximum slip ever reached
// follows the secant through the origin.
struct BondLaw {
  double tau_max = 0.0;
  double tau_f = 0.0;
  double s1 = 0.0, s2 = 0.0, s3 = 0.0;
  double alpha = 0.0;
  double normal_stiffness = 0.0;      // k_n
  double tangential_stiffness = 0.0;  // k_t cap
  bool tangential_disabled = false;   // ablation switch (normal penalty kept)

  void validate(const std::string& path) const;
  double envelope(double slip_magnitude) const;
};

struct InterfaceState {
  double max_slip = 0.0;  // irreversible
  double dissipated = 0.0;
  double slip = 0.0;  // committed
  double traction = 0.0;
};

struct BondResult {
  double traction = 0.0;  // signed, opposes the slip
  double tangent = 0.0;
  InterfaceState state;
};

BondResult bond_traction(const BondLaw& law, double slip, const InterfaceState& s0);

// Line-to-line tie between a truss segment and the coincident solid edge.
struct LineInterfaceElement {
  int id = -1;
  std::array<int, 2> truss_node_ids{};
  std::array<int, 2> solid_node_ids{};
  BondLaw law;
  double perimeter = 0.0;  // equivalent contact perimeter, mm
};

// Point tie between two initially coincident nodes; the law acts on the
// relative displacement within the plane orthogonal to `plane_normal` and is
// expressed in force units (N, N/mm).
struct PointInterfaceElement {
  int id = -1;
  std::array<int, 2> node_pair{};
  BondLaw law;
  Vec3 plane_normal = Vec3::UnitZ();
};

// Face-to-face tie between two coincident quadrilateral faces.
struct SurfaceInterfaceElement {
  int id = -1;
  std::array<int, 4> mortar_node_ids{};
  std::array<int, 4> masonry_node_ids{};
  BondLaw law;
};

struct FrictionPointParams {
  double normal_stiffness = 1.0e4;  // N/mm, also the tangential stick stiffness
  double friction_coefficient = 0.30;
  double open_stiffness_factor = 1.0e-4;  // residual stiffness of an open contact
};

// Compression-only penalty contact with an elastic-perfectly-plastic Coulomb
// cap on the tangential force.
struct FrictionPointElement {
  int id = -1;
  std::array<int, 2> node_pair{};  // {moving node, anchor node}
  FrictionPointParams params;
  Vec3 contact_normal = Vec3::UnitZ();  // direction of closing relative motion
};

struct FrictionState {
  Vec3 plastic_slip = Vec3::Zero();
  double dissipated = 0.0;
};

template <int N>
struct ElementForces {
  Eigen::Matrix<double, N, 1> f = Eigen::Matrix<double, N, 1>::Zero();
  Eigen::Matrix<double, N, N> K = Eigen::Matrix<double, N, N>::Zero();
};

// Dof blocks are ordered [truss nodes..., solid nodes...] etc., 3 dofs each.
struct LineInterfaceResult : ElementForces<12> {
  std::array<InterfaceState, 2> states;
};
LineInterfaceResult line_interface_forces(const LineInterfaceElement& e,
                                          const std::vector<Node>& nodes,
                                          const std::array<Vec3, 4>& u,
                                          const std::array<InterfaceState, 2>& s0,
                                          TangentMode mode = TangentMode::Consistent);

struct PointInterfaceResult : ElementForces<6> {
  InterfaceState state;
};
PointInterfaceResult point_interface_force(const PointInterfaceElement& e,
                                           const std::array<Vec3, 2>& u,
                                           const InterfaceState& s0,
                                           TangentMode mode = TangentMode::Consistent);

struct SurfaceInterfaceResult : ElementForces<24> {
  std::array<InterfaceState, 4> states;
};
SurfaceInterfaceResult surface_interface_forces(const SurfaceInterfaceElement& e,
                                                const std::vector<Node>& nodes,
                                                const std::array<Vec3, 8>& u,
                                                const std::array<InterfaceState, 4>& s0,
                                                TangentMode mode = TangentMode::Consistent);

struct FrictionPointResult : ElementForces<6> {
  FrictionState state;
  double normal_force = 0.0;
};
FrictionPointResult friction_point_force(const FrictionPointElement& e,
                                         const std::array<Vec3, 2>& u,
                                         const FrictionState& s0);

}  // namespace trmfem
