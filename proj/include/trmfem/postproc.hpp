#pragma once

#include <optional>
#include <string>
#include <vector>

#include "trmfem/model.hpp"
#include "trmfem/solver.hpp"

namespace trmfem {

struct CapacityCurve {
  enum class Abscissa { GammaDCPermille, DeflectionIB, DeflectionOB };
  Abscissa kind = Abscissa::GammaDCPermille;
  std::vector<double> x;     // per-mille or mm, strictly increasing
  std::vector<double> f_kN;  // full-sample load

  void validate() const;
  std::string csv() const;  // schema: x,F_kN
};

// gamma_DC = eps_t + |eps_c| from the diagonal gauge pairs, in per-mille.
std::vector<double> shear_strain_gauge(const SolutionHistory& history,
                                       const GaugeSpec& gauges);

// Capacity curve over the ramp-stage increments of a history.
CapacityCurve capacity_curve(const SolutionHistory& history, const GaugeSpec& gauges,
                             CapacityCurve::Abscissa kind);

struct MetricsDC {
  double f_max_kN = 0.0;
  double gamma_at_max = 0.0;          // per-mille
  std::optional<double> f_dc8_kN;     // absent when the curve ends before 8 permille
  std::optional<double> ratio_f8_fmax;
  std::optional<double> effectiveness;  // vs. an unstrengthened companion
};

MetricsDC extract_dc_metrics(const CapacityCurve& curve);

struct MetricsBend {
  std::optional<double> f_cr_kN;
  std::optional<double> delta_cr;
  double f_u_kN = 0.0;
  double delta_u = 0.0;
  std::optional<double> effectiveness;
};

// First cracking = first committed ramp increment with tensile damage onset in
// any coating/masonry point; ultimate = global curve maximum.
MetricsBend extract_bend_metrics(const CapacityCurve& curve,
                                 const SolutionHistory& history);

// Shear strain at the onset of yarn softening (the failure point) and the
// reaction there; absent when no yarn reaches its peak strain.
struct FailurePoint {
  double x = 0.0;  // curve abscissa
  double f_kN = 0.0;
};
std::optional<FailurePoint> yarn_failure_point(const CapacityCurve& curve,
                                               const SolutionHistory& history,
                                               const Model& model);

// Per-element damage band orientation: principal-axis fit of the centroids of
// elements with tensile damage above the threshold, angle in degrees within
// the given plane (axes a, b).
std::optional<double> damage_band_angle(const Model& model, const FieldSnapshot& fields,
                                        double threshold, int axis_a, int axis_b);

// Legacy-VTK ASCII export of the mesh with per-cell fields.
void export_fields(const Model& model, const Increment& increment,
                   const std::string& path);
void export_mesh_vtk(const Model& model, const std::string& path);

struct ComparisonRow {
  std::string metric;
  double value = 0.0;
  std::optional<double> reference;
  std::optional<double> rel_error;  // (value - ref) / |ref|
  bool pass = true;
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;
  std::string csv() const;    // metric,value,reference,rel_error,pass
  std::string human() const;
  bool all_pass() const;
};

ComparisonReport comparison_report(
    const std::vector<std::pair<std::string, double>>& metrics,
    const std::vector<std::pair<std::string, double>>& references, double tolerance);

}  // namespace trmfem
