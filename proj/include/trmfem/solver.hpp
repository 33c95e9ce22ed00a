#pragma once

#include <Eigen/Sparse>
#include <map>
#include <string>
#include <vector>

#include "trmfem/model.hpp"

namespace trmfem {

struct ConvergenceConfig {
  double rel_force_norm = 1e-3;
  double rel_disp_norm = 1e-3;
  int max_iterations = 40;
  int max_bisections = 10;
  int fallback_iterations = 400;  // initial-stiffness pass after Newton stalls

  void validate(const std::string& path) const;
};

// Per-integration-point history for the whole model, committed only on
// converged increments.
struct ModelStates {
  std::vector<std::array<BulkState, 8>> hex;
  std::vector<YarnState> truss;
  std::vector<std::array<InterfaceState, 2>> line;
  std::vector<InterfaceState> point;
  std::vector<std::array<InterfaceState, 4>> surface;
  std::vector<FrictionState> friction;

  static ModelStates sized_for(const Model& model);
};

struct FieldSnapshot {
  std::vector<double> hex_tensile_damage;   // max over quadrature points
  std::vector<double> hex_compressive_kappa;
  std::vector<double> hex_dissipated;  // mean over quadrature points, mJ/mm^3
  std::vector<double> truss_stress;
  std::vector<double> line_slip;  // max |slip|
  std::vector<double> point_slip;
  std::vector<double> surface_slip;
};

FieldSnapshot snapshot_fields(const Model& model, const ModelStates& states);

struct AssembledSystem {
  Eigen::VectorXd internal_force;  // full dof vector
  Eigen::SparseMatrix<double> tangent;  // full, unconstrained
  ModelStates trial_states;
};

// Sums bulk, truss, and interface contributions at the given displacement.
// Deterministic for identical inputs. Throws MeshInversionError /
// MaterialFailureError with element ids on failure.
AssembledSystem assemble(const Model& model, const Eigen::VectorXd& u,
                         const ModelStates& committed,
                         TangentMode mode = TangentMode::Consistent);

// Consistent nodal forces from self weight (direction is a unit vector).
Eigen::VectorXd assemble_gravity(const Model& model, const Vec3& direction);

struct Increment {
  int stage = 0;
  double control = 0.0;       // ramp value or controlled deflection, mm
  double reaction_kN = 0.0;   // full-sample load (multiplicity applied)
  double load_factor = 0.0;   // deflection-controlled stages
  int newton_iterations = 0;
  Eigen::VectorXd u;
  FieldSnapshot fields;
  std::map<std::string, Vec3> set_reactions;  // N, modelled portion
};

struct SolutionHistory {
  std::vector<Increment> increments;
  std::string termination = "completed";
  int ramp_stage_index = -1;
  double peak_reaction_kN = 0.0;
  ModelStates final_states;  // committed states at the last increment
};

struct AnalysisSetup {
  std::vector<LoadStage> stages;
  GaugeSpec gauges;
  std::vector<std::string> reaction_sets;  // node sets to record reactions for
};

SolutionHistory run_staged_analysis(const Model& model, const AnalysisSetup& setup,
                                    const ConvergenceConfig& config);

// Sum of recorded constraint forces on a node set along a direction, in kN and
// scaled by the model's declared reaction multiplicity.
std::vector<double> recover_reaction(const SolutionHistory& history,
                                     const Model& model, const std::string& set_name,
                                     int dof);

}  // namespace trmfem
