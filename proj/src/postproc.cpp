#include "trmfem/postproc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace trmfem {

namespace {

// shortest-round-trip formatting so re-parsed values are bitwise identical
std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void CapacityCurve::validate() const {
  if (x.size() != f_kN.size())
    throw ValidationError("curve", "abscissa/ordinate size mismatch");
  for (std::size_t i = 1; i < x.size(); ++i)
    if (!(x[i] > x[i - 1]))
      throw ValidationError("curve", "abscissa must be strictly increasing");
  for (double f : f_kN)
    if (!std::isfinite(f)) throw ValidationError("curve", "non-finite load");
}

std::string CapacityCurve::csv() const {
  std::ostringstream os;
  os << "x,F_kN\n";
  for (std::size_t i = 0; i < x.size(); ++i)
    os << fmt(x[i]) << "," << fmt(f_kN[i]) << "\n";
  return os.str();
}

std::vector<double> shear_strain_gauge(const SolutionHistory& history,
                                       const GaugeSpec& gauges) {
  if (!gauges.tension_diagonal || !gauges.compression_diagonal)
    throw ValidationError("gauges", "shear gauges require both diagonal pairs");
  const GaugePair& t = *gauges.tension_diagonal;
  const GaugePair& c = *gauges.compression_diagonal;
  std::vector<double> out;
  out.reserve(history.increments.size());
  for (const auto& inc : history.increments) {
    const double eps_t =
        (inc.u[3 * t.node_b + t.dof] - inc.u[3 * t.node_a + t.dof]) / t.base;
    const double eps_c =
        (inc.u[3 * c.node_b + c.dof] - inc.u[3 * c.node_a + c.dof]) / c.base;
    out.push_back((eps_t + std::abs(eps_c)) * 1000.0);
  }
  return out;
}

CapacityCurve capacity_curve(const SolutionHistory& history, const GaugeSpec& gauges,
                             CapacityCurve::Abscissa kind) {
  CapacityCurve curve;
  curve.kind = kind;
  std::vector<double> xs;
  if (kind == CapacityCurve::Abscissa::GammaDCPermille) {
    xs = shear_strain_gauge(history, gauges);
  } else {
    xs.reserve(history.increments.size());
    for (const auto& inc : history.increments)
      xs.push_back(gauges.deflection.evaluate(inc.u));
  }
  for (std::size_t i = 0; i < history.increments.size(); ++i) {
    const auto& inc = history.increments[i];
    if (history.ramp_stage_index >= 0 && inc.stage != history.ramp_stage_index) continue;
    if (!curve.x.empty() && !(xs[i] > curve.x.back())) continue;  // settle-in plateaus
    curve.x.push_back(xs[i]);
    curve.f_kN.push_back(inc.reaction_kN);
  }
  return curve;
}

MetricsDC extract_dc_metrics(const CapacityCurve& curve) {
  if (curve.x.empty()) throw ValidationError("curve", "empty capacity curve");
  MetricsDC m;
  // earliest sample within 0.1% of the maximum counts as the peak
  double fmax = *std::max_element(curve.f_kN.begin(), curve.f_kN.end());
  for (std::size_t i = 0; i < curve.x.size(); ++i) {
    if (curve.f_kN[i] >= fmax * 0.999) {
      m.f_max_kN = curve.f_kN[i];
      m.gamma_at_max = curve.x[i];
      break;
    }
  }
  const double g8 = 8.0;  // per-mille
  if (curve.x.back() >= g8) {
    double f8 = curve.f_kN.back();
    for (std::size_t i = 0; i < curve.x.size(); ++i) {
      if (curve.x[i] >= g8) {
        if (i == 0 || curve.x[i] == g8) {
          f8 = curve.f_kN[i];
        } else {
          const double w = (g8 - curve.x[i - 1]) / (curve.x[i] - curve.x[i - 1]);
          f8 = curve.f_kN[i - 1] + w * (curve.f_kN[i] - curve.f_kN[i - 1]);
        }
        break;
      }
    }
    m.f_dc8_kN = f8;
    m.ratio_f8_fmax = f8 / fmax;
  }
  return m;
}

MetricsBend extract_bend_metrics(const CapacityCurve& curve,
                                 const SolutionHistory& history) {
  if (curve.x.empty()) throw ValidationError("curve", "empty capacity curve");
  MetricsBend m;
  const auto it = std::max_element(curve.f_kN.begin(), curve.f_kN.end());
  const std::size_t imax = static_cast<std::size_t>(it - curve.f_kN.begin());
  m.f_u_kN = curve.f_kN[imax];
  m.delta_u = curve.x[imax];

  // first cracking: first ramp increment with tensile damage onset anywhere
  std::size_t curve_i = 0;
  for (const auto& inc : history.increments) {
    if (history.ramp_stage_index >= 0 && inc.stage != history.ramp_stage_index) continue;
    const bool cracked =
        std::any_of(inc.fields.hex_tensile_damage.begin(),
                    inc.fields.hex_tensile_damage.end(), [](double d) { return d > 0.0; });
    if (cracked && curve_i < curve.x.size()) {
      m.f_cr_kN = curve.f_kN[curve_i];
      m.delta_cr = curve.x[curve_i];
      break;
    }
    ++curve_i;
  }
  return m;
}

std::optional<FailurePoint> yarn_failure_point(const CapacityCurve& curve,
                                               const SolutionHistory& history,
                                               const Model& model) {
  std::size_t curve_i = 0;
  for (const auto& inc : history.increments) {
    if (history.ramp_stage_index >= 0 && inc.stage != history.ramp_stage_index) continue;
    if (curve_i >= curve.x.size()) break;
    for (std::size_t ti = 0; ti < model.trusses.size(); ++ti) {
      const Material& mat = model.materials[model.trusses[ti].material_id];
      if (mat.kind != Material::Kind::Yarn) continue;
      const double peak_stress =
          mat.yarn.elastic.young_modulus * mat.yarn.peak_strain * 0.999;
      if (inc.fields.truss_stress[ti] >= peak_stress)
        return FailurePoint{curve.x[curve_i], curve.f_kN[curve_i]};
    }
    ++curve_i;
  }
  return std::nullopt;
}

std::optional<double> damage_band_angle(const Model& model, const FieldSnapshot& fields,
                                        double threshold, int axis_a, int axis_b) {
  std::vector<Vec3> pts;
  for (std::size_t i = 0; i < model.hexes.size(); ++i) {
    if (fields.hex_tensile_damage[i] <= threshold) continue;
    Vec3 c = Vec3::Zero();
    for (int nid : model.hexes[i].node_ids) c += model.nodes[nid].coords;
    pts.push_back(c / 8.0);
  }
  if (pts.size() < 3) return std::nullopt;
  double ma = 0.0, mb = 0.0;
  for (const auto& p : pts) {
    ma += p[axis_a];
    mb += p[axis_b];
  }
  ma /= pts.size();
  mb /= pts.size();
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (const auto& p : pts) {
    const double da = p[axis_a] - ma, db = p[axis_b] - mb;
    saa += da * da;
    sbb += db * db;
    sab += da * db;
  }
  const double angle = 0.5 * std::atan2(2.0 * sab, saa - sbb);
  return angle * 180.0 / M_PI;
}

// ---------------------------------------------------------------------------
// VTK export
// ---------------------------------------------------------------------------

namespace {

void write_vtk_mesh(std::ostream& os, const Model& model, bool include_interfaces) {
  os << "# vtk DataFile Version 3.0\n";
  os << "trmfem export\n";
  os << "ASCII\n";
  os << "DATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << model.nodes.size() << " double\n";
  for (const auto& n : model.nodes)
    os << fmt(n.coords[0]) << " " << fmt(n.coords[1]) << " " << fmt(n.coords[2]) << "\n";

  const std::size_t n_cells = model.hexes.size() + model.trusses.size() +
                              (include_interfaces ? model.line_interfaces.size() +
                                                        model.point_interfaces.size() +
                                                        model.surface_interfaces.size()
                                                  : 0);
  std::size_t list_len = model.hexes.size() * 9 + model.trusses.size() * 3;
  if (include_interfaces)
    list_len += model.line_interfaces.size() * 3 + model.point_interfaces.size() * 2 +
                model.surface_interfaces.size() * 5;
  os << "CELLS " << n_cells << " " << list_len << "\n";
  for (const auto& e : model.hexes) {
    os << 8;
    for (int id : e.node_ids) os << " " << id;
    os << "\n";
  }
  for (const auto& e : model.trusses)
    os << 2 << " " << e.node_ids[0] << " " << e.node_ids[1] << "\n";
  if (include_interfaces) {
    for (const auto& e : model.line_interfaces)
      os << 2 << " " << e.truss_node_ids[0] << " " << e.truss_node_ids[1] << "\n";
    for (const auto& e : model.point_interfaces) os << 1 << " " << e.node_pair[0] << "\n";
    for (const auto& e : model.surface_interfaces) {
      os << 4;
      for (int id : e.masonry_node_ids) os << " " << id;
      os << "\n";
    }
  }
  os << "CELL_TYPES " << n_cells << "\n";
  for (std::size_t i = 0; i < model.hexes.size(); ++i) os << "12\n";
  for (std::size_t i = 0; i < model.trusses.size(); ++i) os << "3\n";
  if (include_interfaces) {
    for (std::size_t i = 0; i < model.line_interfaces.size(); ++i) os << "3\n";
    for (std::size_t i = 0; i < model.point_interfaces.size(); ++i) os << "1\n";
    for (std::size_t i = 0; i < model.surface_interfaces.size(); ++i) os << "9\n";
  }
}

void write_cell_field(std::ostream& os, const std::string& name,
                      const std::vector<const std::vector<double>*>& parts) {
  os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
  for (const auto* part : parts)
    for (double v : *part) os << fmt(v) << "\n";
}

}  // namespace

void export_mesh_vtk(const Model& model, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path);
  write_vtk_mesh(os, model, true);
}

void export_fields(const Model& model, const Increment& increment,
                   const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path);
  write_vtk_mesh(os, model, true);

  const FieldSnapshot& f = increment.fields;
  const std::vector<double> zeros_truss(model.trusses.size(), 0.0);
  const std::vector<double> zeros_line(model.line_interfaces.size(), 0.0);
  const std::vector<double> zeros_point(model.point_interfaces.size(), 0.0);
  const std::vector<double> zeros_surf(model.surface_interfaces.size(), 0.0);
  const std::vector<double> zeros_hex(model.hexes.size(), 0.0);

  const std::size_t n_cells = model.hexes.size() + model.trusses.size() +
                              model.line_interfaces.size() +
                              model.point_interfaces.size() +
                              model.surface_interfaces.size();
  os << "CELL_DATA " << n_cells << "\n";
  write_cell_field(os, "tensile_damage",
                   {&f.hex_tensile_damage, &zeros_truss, &zeros_line, &zeros_point,
                    &zeros_surf});
  write_cell_field(os, "compressive_kappa",
                   {&f.hex_compressive_kappa, &zeros_truss, &zeros_line, &zeros_point,
                    &zeros_surf});
  write_cell_field(os, "yarn_stress",
                   {&zeros_hex, &f.truss_stress, &zeros_line, &zeros_point, &zeros_surf});
  write_cell_field(os, "interface_slip",
                   {&zeros_hex, &zeros_truss, &f.line_slip, &f.point_slip,
                    &f.surface_slip});
}

// ---------------------------------------------------------------------------

std::string ComparisonReport::csv() const {
  std::ostringstream os;
  os << "metric,value,reference,rel_error,pass\n";
  for (const auto& r : rows) {
    os << r.metric << "," << fmt(r.value) << ",";
    os << (r.reference ? fmt(*r.reference) : "") << ",";
    os << (r.rel_error ? fmt(*r.rel_error) : "") << ",";
    os << (r.pass ? "pass" : "fail") << "\n";
  }
  return os.str();
}

std::string ComparisonReport::human() const {
  std::ostringstream os;
  for (const auto& r : rows) {
    os << "  " << r.metric << ": " << r.value;
    if (r.reference) {
      os << " (reference " << *r.reference << ", " << (*r.rel_error >= 0 ? "+" : "")
         << *r.rel_error * 100.0 << "%, " << (r.pass ? "pass" : "FAIL") << ")";
    } else {
      os << " (no reference)";
    }
    os << "\n";
  }
  return os.str();
}

bool ComparisonReport::all_pass() const {
  return std::all_of(rows.begin(), rows.end(),
                     [](const ComparisonRow& r) { return r.pass; });
}

ComparisonReport comparison_report(
    const std::vector<std::pair<std::string, double>>& metrics,
    const std::vector<std::pair<std::string, double>>& references, double tolerance) {
  ComparisonReport rep;
  for (const auto& [name, value] : metrics) {
    ComparisonRow row;
    row.metric = name;
    row.value = value;
    for (const auto& [rname, rvalue] : references) {
      if (rname == name) {
        row.reference = rvalue;
        row.rel_error = (value - rvalue) / std::abs(rvalue);
        row.pass = std::abs(*row.rel_error) <= tolerance;
      }
    }
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace trmfem
