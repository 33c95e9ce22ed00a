#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "trmfem/modelgen.hpp"
#include "trmfem/postproc.hpp"

namespace trmfem {

struct RunConfig {
  SampleSpec sample;
  ConvergenceConfig convergence;
  RampConfig ramp;
  std::string output_dir = "out";
  std::string fields_export = "auto";  // auto | none | all
  bool export_model = false;
  std::string canonical;  // canonical JSON (sorted keys) for hashing

  static RunConfig from_json_text(const std::string& text);
  static RunConfig from_file(const std::string& path);
};

uint64_t config_hash(const std::string& canonical_json);
std::string hash_hex(uint64_t h);

struct RunOutcome {
  int exit_code = 0;
  std::string termination;
  std::string id;
  CapacityCurve curve;
  std::optional<MetricsDC> dc;
  std::optional<MetricsBend> bend;
  std::optional<FailurePoint> failure;
  std::filesystem::path output_dir;
};

// Full pipeline: validate, build, audit, solve, post-process, persist.
RunOutcome cmd_run(const RunConfig& config);

// Interface-class ablation: zero tangential resistance, normal penalty kept.
enum class AblationClass { IL, IP, IF };
AblationClass ablation_from_string(const std::string& s);
void apply_ablation(Model& model, AblationClass cls);
RunOutcome cmd_ablate(const RunConfig& config, AblationClass cls);

struct SweepSpec {
  RunConfig base;
  std::vector<std::string> variants;  // YT+, YT-, ..., YO, IL, IP, IF, MU2
  std::string output_dir = "sweep";

  static SweepSpec from_file(const std::string& path);
};

struct SweepRow {
  std::string variant;
  std::string status;  // completed / stopped / failed reason
  std::optional<double> f_max, x_at_max, f_secondary, failure_x, failure_f;
};

struct SweepOutcome {
  std::vector<SweepRow> rows;
  std::filesystem::path matrix_csv;
};

// Applies a named parameter variant to a resolved sample spec.
void apply_variant(SampleSpec& spec, const std::string& variant);

SweepOutcome cmd_sweep(const SweepSpec& spec);

// Material-point / bond-law drivers (piecewise-linear paths through `targets`).
struct DriverCurve {
  std::vector<double> x;
  std::vector<double> y;
  std::string x_label = "x";
  std::string y_label = "y";
  std::string csv() const;
};

DriverCurve drive_yarn(const YarnDamageParams& p, const std::vector<double>& targets,
                       int steps_per_segment);
DriverCurve drive_bond(const BondLaw& law, const std::vector<double>& targets,
                       int steps_per_segment);
DriverCurve drive_bulk_uniaxial(const BulkDPParams& p, double h,
                                const std::vector<double>& targets,
                                int steps_per_segment, bool uniaxial_stress = true);

// law id resolution across bulk / yarn / bond catalogs
DriverCurve cmd_driver(const std::string& law_id, const std::vector<double>& targets,
                       int steps_per_segment, double h = 15.9836);

int worker_count();  // TRMFEM_THREADS, default 4

}  // namespace trmfem
