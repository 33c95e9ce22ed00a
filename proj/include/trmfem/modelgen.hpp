#pragma once

#include <optional>
#include <string>

#include "trmfem/catalog.hpp"
#include "trmfem/model.hpp"
#include "trmfem/solver.hpp"

namespace trmfem {

// Fully resolved description of one benchmark sample. Labels select catalog
// entries; the resolved parameter blocks may be modified afterwards (sweeps,
// ablations) without touching the catalog.
struct SampleSpec {
  enum class Setup { DC, IB, OB };
  Setup setup = Setup::DC;

  std::string masonry_label = "B";  // B, B2, Bm, R, R2, Rm, C, C2
  double masonry_thickness = 0.0;   // mm; 0 = default per label
  std::string mortar_label;         // empty = no coating
  int mesh_pitch = 0;               // mm in {33, 66, 99}; 0 = no mesh
  std::string yarn_orientation;     // IB: parallel-horizontal | twisted-horizontal
                                    // OB: twisted-vertical | parallel-vertical
  double pre_compression = 0.0;     // IB, MPa
  double friction_mu = 0.30;        // OB supports
  double coating_thickness = 0.0;   // mm; 0 = default per masonry class
  int refinement = 2;               // >= 1; 1 = full 16.5 mm resolution
  double device_extent = 120.0;     // DC corner device extent along the diagonal
  bool elastic_only = false;        // replace nonlinear laws by their elasticity

  // Resolved material and interface parameters.
  BulkDPParams masonry;
  BulkDPParams mortar;
  YarnDamageParams yarn_twisted;
  YarnDamageParams yarn_parallel;
  double yarn_area = 3.8;  // mm^2, both types
  BondLaw line_twisted, line_parallel;
  BondLaw point_twisted, point_parallel;
  BondLaw surface_bond;
  double perimeter_twisted = 9.57, perimeter_parallel = 18.0;
  FrictionPointParams friction;
  bool swap_orientation = false;  // YO variant

  bool strengthened() const { return mesh_pitch > 0 && !mortar_label.empty(); }
  bool coated() const { return !mortar_label.empty(); }

  // Resolves labels, thickness and coating defaults against the catalog.
  static SampleSpec resolve(Setup setup, const std::string& masonry,
                            const std::string& mortar, int pitch,
                            const Catalog& catalog = Catalog::builtin());

  void validate() const;
  std::string id() const;  // e.g. DC-B-66S-C8
};

struct RampConfig {
  double target = 0.0;       // mm; 0 = setup default
  int increments = 150;
  double stop_fraction = 0.30;
  int pre_increments = 5;  // increments for constant-load / gravity stages
};

struct BuildResult {
  Model model;
  AnalysisSetup analysis;
};

BuildResult build_dc_model(const SampleSpec& spec, const RampConfig& ramp);
BuildResult build_ib_model(const SampleSpec& spec, const RampConfig& ramp);
BuildResult build_ob_model(const SampleSpec& spec, const RampConfig& ramp);
BuildResult build_model(const SampleSpec& spec, const RampConfig& ramp);

}  // namespace trmfem
