#include "trmfem/modelgen.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>

namespace trmfem {

namespace {

double default_thickness(const std::string& label) {
  if (label == "B" || label == "B2") return 250.0;
  if (label == "Bm") return 380.0;
  if (label == "R" || label == "R2") return 400.0;
  if (label == "Rm") return 700.0;
  if (label == "C" || label == "C2") return 400.0;
  throw ValidationError("sample.masonry", "unknown masonry label '" + label + "'");
}

double default_coating(const std::string& label) {
  if (label == "B" || label == "B2" || label == "Bm") return 30.0;
  if (label == "R" || label == "Rm") return 40.0;
  return 50.0;  // R2, C, C2
}

std::string catalog_key(const std::string& label) {
  if (label == "Bm") return "B";
  if (label == "Rm") return "R";
  return label;
}

BondLaw welded_law() {
  BondLaw law;
  law.tau_max = 1e12;
  law.tau_f = 1e12;
  law.s1 = law.s2 = law.s3 = 1e6;
  law.alpha = 1.0;
  law.normal_stiffness = 1e6;
  law.tangential_stiffness = 1e6;
  return law;
}

}  // namespace

SampleSpec SampleSpec::resolve(Setup setup, const std::string& masonry,
                               const std::string& mortar, int pitch,
                               const Catalog& cat) {
  SampleSpec s;
  s.setup = setup;
  s.masonry_label = masonry;
  s.mortar_label = mortar;
  s.mesh_pitch = pitch;
  s.masonry_thickness = default_thickness(masonry);
  s.coating_thickness = mortar.empty() ? 0.0 : default_coating(masonry);
  s.masonry = cat.bulk(catalog_key(masonry));
  if (!mortar.empty()) {
    if (!cat.is_mortar(mortar))
      throw ValidationError("sample.mortar", "'" + mortar + "' is not a mortar label");
    s.mortar = cat.bulk(mortar);
  }
  s.yarn_twisted = cat.yarn("yarn-S-twisted");
  s.yarn_parallel = cat.yarn("yarn-S-parallel");
  s.yarn_area = cat.yarn_area("yarn-S-twisted");
  s.line_twisted = cat.bond("line-twisted");
  s.line_parallel = cat.bond("line-parallel");
  s.point_twisted = cat.bond("point-twisted");
  s.point_parallel = cat.bond("point-parallel");
  s.surface_bond = cat.bond("surface");
  s.perimeter_twisted = cat.line_perimeter("line-twisted");
  s.perimeter_parallel = cat.line_perimeter("line-parallel");
  s.yarn_orientation = setup == Setup::IB   ? "parallel-horizontal"
                       : setup == Setup::OB ? "twisted-vertical"
                                            : "";
  return s;
}

void SampleSpec::validate() const {
  if (refinement < 1) throw ValidationError("sample.refinement", "must be >= 1");
  if (mesh_pitch != 0 && mesh_pitch != 33 && mesh_pitch != 66 && mesh_pitch != 99)
    throw ValidationError("sample.mesh_pitch", "must be one of 33, 66, 99 (or absent)");
  if (mesh_pitch > 0 && mortar_label.empty())
    throw ValidationError("sample.mesh_pitch", "a GFRP mesh requires a mortar coating");
  if (!(masonry_thickness > 0.0))
    throw ValidationError("sample.masonry_thickness", "must be > 0");
  if (coated() && !(coating_thickness > 0.0))
    throw ValidationError("sample.coating_thickness", "must be > 0");
  masonry.validate("sample.masonry");
  if (coated()) mortar.validate("sample.mortar");
  if (strengthened()) {
    yarn_twisted.validate("sample.yarn_twisted");
    yarn_parallel.validate("sample.yarn_parallel");
    if (!(yarn_area > 0.0)) throw ValidationError("sample.yarn_area", "must be > 0");
    line_twisted.validate("sample.line_twisted");
    line_parallel.validate("sample.line_parallel");
    point_twisted.validate("sample.point_twisted");
    point_parallel.validate("sample.point_parallel");
  }
  if (coated()) surface_bond.validate("sample.surface_bond");
  if (setup == Setup::OB && !(friction_mu >= 0.0))
    throw ValidationError("sample.friction_mu", "must be >= 0");
  if (setup == Setup::IB && !(pre_compression >= 0.0))
    throw ValidationError("sample.pre_compression", "must be >= 0");
}

std::string SampleSpec::id() const {
  std::string s = setup == Setup::DC ? "DC" : setup == Setup::IB ? "IB" : "OB";
  s += "-" + masonry_label;
  if (!strengthened() && !coated()) return s + "-U";
  if (setup == Setup::IB || setup == Setup::OB) {
    const bool twisted_primary =
        yarn_orientation.rfind("twisted", 0) == 0 ? !swap_orientation : swap_orientation;
    s += twisted_primary ? "-T" : "-P";
  } else {
    s += "-";
  }
  s += strengthened() ? std::to_string(mesh_pitch) + "S" : "00";
  s += "-" + mortar_label;
  return s;
}

// ---------------------------------------------------------------------------
// Mesh bookkeeping
// ---------------------------------------------------------------------------

namespace {

// Node sheets keep deliberately duplicated meshes (coating vs masonry, yarn
// families, ground anchors) apart while still deduplicating within a sheet.
enum Sheet : int {
  kMasonry = 0,
  kCoating = 1,
  kYarnA = 2,
  kYarnB = 3,
  kGround = 4,
};

struct MeshBook {
  Model model;
  std::map<std::array<long long, 4>, int> lookup;

  int node(int sheet, const Vec3& x) {
    const std::array<long long, 4> key = {
        sheet, std::llround(x[0] * 1e6), std::llround(x[1] * 1e6),
        std::llround(x[2] * 1e6)};
    auto it = lookup.find(key);
    if (it != lookup.end()) return it->second;
    const int id = static_cast<int>(model.nodes.size());
    model.nodes.push_back({id, x});
    lookup.emplace(key, id);
    return id;
  }

  bool has_node(int sheet, const Vec3& x) const {
    return lookup.count({sheet, std::llround(x[0] * 1e6), std::llround(x[1] * 1e6),
                         std::llround(x[2] * 1e6)}) > 0;
  }

  int material(const Material& m) {
    model.materials.push_back(m);
    return static_cast<int>(model.materials.size()) - 1;
  }

  void hex(int sheet, const std::array<Vec3, 8>& corners, int mat) {
    HexElement e;
    e.id = static_cast<int>(model.hexes.size());
    for (int a = 0; a < 8; ++a) e.node_ids[a] = node(sheet, corners[a]);
    e.material_id = mat;
    model.hexes.push_back(e);
  }

  // Axis-aligned box from two corners (lo < hi componentwise).
  void box(int sheet, const Vec3& lo, const Vec3& hi, int mat) {
    hex(sheet,
        {Vec3(lo[0], lo[1], lo[2]), Vec3(hi[0], lo[1], lo[2]), Vec3(hi[0], hi[1], lo[2]),
         Vec3(lo[0], hi[1], lo[2]), Vec3(lo[0], lo[1], hi[2]), Vec3(hi[0], lo[1], hi[2]),
         Vec3(hi[0], hi[1], hi[2]), Vec3(lo[0], hi[1], hi[2])},
        mat);
  }

  void truss(int sheet, const Vec3& a, const Vec3& b, int mat, double area) {
    TrussElement e;
    e.id = static_cast<int>(model.trusses.size());
    e.node_ids = {node(sheet, a), node(sheet, b)};
    e.material_id = mat;
    e.area = area;
    model.trusses.push_back(e);
  }

  void line_interface(int yarn_sheet, int solid_sheet, const Vec3& a, const Vec3& b,
                      const BondLaw& law, double perimeter) {
    LineInterfaceElement e;
    e.id = static_cast<int>(model.line_interfaces.size());
    e.truss_node_ids = {node(yarn_sheet, a), node(yarn_sheet, b)};
    e.solid_node_ids = {node(solid_sheet, a), node(solid_sheet, b)};
    e.law = law;
    e.perimeter = perimeter;
    model.line_interfaces.push_back(e);
  }

  void point_interface(int sheet_a, int sheet_b, const Vec3& x, const BondLaw& law,
                       const Vec3& normal) {
    PointInterfaceElement e;
    e.id = static_cast<int>(model.point_interfaces.size());
    e.node_pair = {node(sheet_a, x), node(sheet_b, x)};
    e.law = law;
    e.plane_normal = normal;
    model.point_interfaces.push_back(e);
  }

  void surface_interface(const std::array<Vec3, 4>& quad, const BondLaw& law) {
    SurfaceInterfaceElement e;
    e.id = static_cast<int>(model.surface_interfaces.size());
    for (int a = 0; a < 4; ++a) {
      e.mortar_node_ids[a] = node(kCoating, quad[a]);
      e.masonry_node_ids[a] = node(kMasonry, quad[a]);
    }
    e.law = law;
    model.surface_interfaces.push_back(e);
  }

  int friction_point(int wall_sheet, const Vec3& x, const FrictionPointParams& params,
                     const Vec3& normal) {
    FrictionPointElement e;
    e.id = static_cast<int>(model.friction_points.size());
    const int anchor = node(kGround, x);
    e.node_pair = {node(wall_sheet, x), anchor};
    e.params = params;
    e.contact_normal = normal;
    model.friction_points.push_back(e);
    for (int d = 0; d < 3; ++d) model.fixed_dofs.push_back({anchor, d});
    return e.id;
  }

  void fix_plane(int dof, double coordinate, double tol = 1e-6) {
    std::set<std::pair<int, int>> seen;
    for (const auto& f : model.fixed_dofs) seen.insert({f.node, f.dof});
    for (const auto& n : model.nodes)
      if (std::abs(n.coords[dof] - coordinate) <= tol &&
          seen.insert({n.id, dof}).second)
        model.fixed_dofs.push_back({n.id, dof});
  }

  std::vector<int> nodes_where(const std::function<bool(const Vec3&)>& pred) const {
    std::vector<int> out;
    for (const auto& n : model.nodes)
      if (pred(n.coords)) out.push_back(n.id);
    return out;
  }
};

Material bulk_material(const std::string& label, const BulkDPParams& p, bool elastic_only) {
  Material m;
  m.label = label;
  if (elastic_only) {
    m.kind = Material::Kind::Elastic;
    m.elastic = p.elastic;
  } else {
    m.kind = Material::Kind::Bulk;
    m.bulk = p;
  }
  return m;
}

Material yarn_material(const std::string& label, const YarnDamageParams& p,
                       bool elastic_only) {
  Material m;
  m.label = label;
  if (elastic_only) {
    m.kind = Material::Kind::Elastic;
    m.elastic = p.elastic;
  } else {
    m.kind = Material::Kind::Yarn;
    m.yarn = p;
  }
  return m;
}

Material steel_material() {
  Material m;
  m.label = "steel";
  m.kind = Material::Kind::Elastic;
  m.elastic = Catalog::builtin().steel();
  return m;
}

std::vector<double> linspace(double a, double b, int cells) {
  std::vector<double> v(cells + 1);
  for (int i = 0; i <= cells; ++i) v[i] = a + (b - a) * i / cells;
  return v;
}

// Lattice coordinates: multiples of `pitch_cell` up to `length`, with the
// listed extra planes merged in.
std::vector<double> lattice_with(double length, double cell,
                                 const std::vector<double>& extra) {
  std::vector<double> v;
  for (double x = 0.0; x < length - 1e-9; x += cell) v.push_back(x);
  v.push_back(length);
  for (double e : extra)
    if (e > 1e-9 && e < length - 1e-9) v.push_back(e);
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end(),
                      [](double a, double b) { return std::abs(a - b) < 1e-6; }),
          v.end());
  return v;
}

// Yarn line positions snapped to the nearest lattice plane, spacing preserved.
std::vector<double> snapped_yarn_lines(double pitch, double cell, double length) {
  std::vector<double> out;
  for (double x = pitch / 2.0; x < length - 1e-9; x += pitch) {
    const double snapped = std::max(1.0, std::round(x / cell)) * cell;
    if (snapped < length - 1e-9 &&
        (out.empty() || snapped > out.back() + 1e-9))
      out.push_back(snapped);
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Diagonal compression: one-eighth model in the load-aligned frame.
//
// X runs along the loaded diagonal from the corner device (X=0) to the panel
// centre plane (X=L); Y spans from the loaded-diagonal plane (Y=0) to the
// free panel edge (the stair-stepped line Y=X); z from the mid-thickness
// plane to the coated exterior face. All three mirror planes are axis-aligned.
// ---------------------------------------------------------------------------

BuildResult build_dc_model(const SampleSpec& spec, const RampConfig& ramp) {
  if (spec.setup != SampleSpec::Setup::DC)
    throw ValidationError("sample.setup", "build_dc_model requires setup DC");
  spec.validate();

  const double side = 1160.0;
  const double L = side * std::sqrt(2.0) / 2.0;  // half diagonal
  const double t_half = spec.masonry_thickness / 2.0;
  const double ct = spec.coating_thickness;
  const double target_e = 16.5 * spec.refinement;

  // In-plane divisions: candidates near L/target, scored by how closely the
  // snapped yarn-line spacing reproduces the requested pitch.
  int n = std::max(4, static_cast<int>(std::llround(L / target_e)));
  if (spec.strengthened()) {
    int best = n;
    double best_err = 1e30;
    for (int cand = std::max(4, n - 3); cand <= n + 3; ++cand) {
      const double e = L / cand;
      const double quantum = e / std::sqrt(2.0);
      const int k = std::max(1, static_cast<int>(std::llround(spec.mesh_pitch / quantum)));
      const double err = std::abs(k * quantum - spec.mesh_pitch);
      if (err < best_err - 1e-12) {
        best_err = err;
        best = cand;
      }
    }
    n = best;
  }
  const double e = L / n;
  int k_pitch = 0;
  double actual_pitch = 0.0;
  if (spec.strengthened()) {
    k_pitch = std::max(1, static_cast<int>(std::llround(spec.mesh_pitch * std::sqrt(2.0) / e)));
    actual_pitch = k_pitch * e / std::sqrt(2.0);
  }

  MeshBook book;
  const int mat_masonry = book.material(
      bulk_material(spec.masonry_label, spec.masonry, spec.elastic_only));
  const int mat_mortar =
      spec.coated()
          ? book.material(bulk_material(spec.mortar_label, spec.mortar, spec.elastic_only))
          : -1;
  const int mat_steel = book.material(steel_material());
  const int mat_yarn_a = spec.strengthened()
                             ? book.material(yarn_material(
                                   spec.swap_orientation ? "yarn-S-parallel"
                                                         : "yarn-S-twisted",
                                   spec.swap_orientation ? spec.yarn_parallel
                                                         : spec.yarn_twisted,
                                   spec.elastic_only))
                             : -1;
  const int mat_yarn_b = spec.strengthened()
                             ? book.material(yarn_material(
                                   spec.swap_orientation ? "yarn-S-twisted"
                                                         : "yarn-S-parallel",
                                   spec.swap_orientation ? spec.yarn_twisted
                                                         : spec.yarn_parallel,
                                   spec.elastic_only))
                             : -1;
  const BondLaw law_line_a = spec.swap_orientation ? spec.line_parallel : spec.line_twisted;
  const BondLaw law_line_b = spec.swap_orientation ? spec.line_twisted : spec.line_parallel;
  const double per_a = spec.swap_orientation ? spec.perimeter_parallel : spec.perimeter_twisted;
  const double per_b = spec.swap_orientation ? spec.perimeter_twisted : spec.perimeter_parallel;
  const BondLaw law_point = spec.swap_orientation ? spec.point_parallel : spec.point_twisted;

  const int dev_cols = std::max(2, static_cast<int>(std::llround(spec.device_extent / e)));

  const int nz_m = std::max(1, static_cast<int>(std::llround(t_half / (15.0 * spec.refinement))));
  const std::vector<double> zm = linspace(0.0, t_half, nz_m);
  const std::vector<double> zc =
      spec.coated() ? linspace(t_half, t_half + ct, 2) : std::vector<double>{};

  auto in_device = [&](int i) { return i < dev_cols; };

  // Bulk: masonry plus coating, one stair-stepped triangular prism.
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= std::min(i, n - 1); ++j) {
      const double x0 = i * e, x1 = (i + 1) * e;
      const double y0 = j * e, y1 = (j + 1) * e;
      const int mat = in_device(i) ? mat_steel : mat_masonry;
      for (int k = 0; k < nz_m; ++k)
        book.box(kMasonry, Vec3(x0, y0, zm[k]), Vec3(x1, y1, zm[k + 1]), mat);
      if (spec.coated()) {
        const int cmat = in_device(i) ? mat_steel : mat_mortar;
        for (int k = 0; k < 2; ++k)
          book.box(kCoating, Vec3(x0, y0, zc[k]), Vec3(x1, y1, zc[k + 1]), cmat);
        book.surface_interface({Vec3(x0, y0, t_half), Vec3(x1, y0, t_half),
                                Vec3(x1, y1, t_half), Vec3(x0, y1, t_half)},
                               in_device(i) ? welded_law() : spec.surface_bond);
      }
    }
  }

  // Yarn grid at the coating mid-plane. Family A runs along (1,1)/sqrt(2)
  // (twisted unless swapped), family B along (1,-1)/sqrt(2).
  if (spec.strengthened()) {
    const double zy = t_half + ct / 2.0;
    // family A: lines Y - X = -r * k_pitch * e
    for (int r = 1; r * k_pitch < n; ++r) {
      const int c = r * k_pitch;
      for (int i = c; i < n; ++i) {
        // segment from (i, i-c) to (i+1, i+1-c); both lattice points in region
        const Vec3 a(i * e, (i - c) * e, zy);
        const Vec3 b((i + 1) * e, (i + 1 - c) * e, zy);
        book.truss(kYarnA, a, b, mat_yarn_a, spec.yarn_area);
        book.line_interface(kYarnA, kCoating, a, b, law_line_a, per_a);
      }
    }
    // family B: lines X + Y = s * k_pitch * e
    for (int s = 1; s * k_pitch < 2 * n; ++s) {
      const int c = s * k_pitch;
      const int i_lo = (c + 1) / 2;  // need j = c - i <= i
      for (int i = i_lo; i < std::min(c, n); ++i) {
        const int j0 = c - i;
        const int j1 = c - (i + 1);
        if (j0 > i || j0 < 0 || j1 < 0) continue;  // outside the triangle
        const Vec3 a(i * e, j0 * e, zy);
        const Vec3 b((i + 1) * e, j1 * e, zy);
        book.truss(kYarnB, a, b, mat_yarn_b, spec.yarn_area);
        book.line_interface(kYarnB, kCoating, a, b, law_line_b, per_b);
      }
    }
    // intersections where lines of both families share a lattice point
    // (i - j = r*k and i + j = s*k, integer solutions only)
    for (int r = 1; r * k_pitch < n; ++r) {
      for (int s = 1; s * k_pitch < 2 * n; ++s) {
        if (((s - r) * k_pitch) % 2 != 0) continue;
        const int j = (s - r) * k_pitch / 2;
        const int i = (s + r) * k_pitch / 2;
        if (i <= 0 || i > n || j < 0 || j > i) continue;
        const Vec3 x(i * e, j * e, zy);
        if (!book.has_node(kYarnA, x) || !book.has_node(kYarnB, x)) continue;
        book.point_interface(kYarnA, kYarnB, x, law_point, Vec3::UnitZ());
      }
    }
  }

  // Mirror-plane constraints.
  book.fix_plane(1, 0.0);                     // loaded-diagonal plane
  book.fix_plane(0, L);                       // perpendicular-diagonal plane
  book.fix_plane(2, 0.0);                     // mid-thickness plane

  // Corner device: prescribed diagonal displacement on the interior steel nodes.
  std::vector<int> device_nodes = book.nodes_where([&](const Vec3& x) {
    return x[0] <= (dev_cols - 1) * e + 1e-6 && x[2] > -1e-6;
  });
  // yarn nodes in the device zone follow through their interfaces, not the ramp
  {
    std::vector<int> solid_only;
    for (int id : device_nodes) {
      bool is_yarn = false;
      for (const auto& tr : book.model.trusses)
        if (tr.node_ids[0] == id || tr.node_ids[1] == id) is_yarn = true;
      if (!is_yarn) solid_only.push_back(id);
    }
    device_nodes = solid_only;
  }

  Model& model = book.model;
  model.reaction_multiplicity = 4.0;
  model.meta.setup = "DC";
  model.meta.sample_id = spec.id();
  model.meta.actual_pitch = actual_pitch;
  model.meta.in_plane_element_size = e;
  model.meta.coating_thickness = ct;
  model.meta.strengthened = spec.strengthened();
  model.add_node_set({"device", device_nodes});

  // Shear-strain gauges on the mid-thickness plane, base length ~1075 mm.
  const int jg = std::max(1, static_cast<int>(std::llround(0.5 * 1075.0 / e)));
  const double gauge_half = jg * e;
  GaugeSpec gauges;
  gauges.recorded_base_length = 2.0 * gauge_half;
  gauges.tension_diagonal = GaugePair{book.node(kMasonry, Vec3(L, 0, 0)),
                                      book.node(kMasonry, Vec3(L, gauge_half, 0)), 1,
                                      gauge_half};
  gauges.compression_diagonal =
      GaugePair{book.node(kMasonry, Vec3(L - gauge_half, 0, 0)),
                book.node(kMasonry, Vec3(L, 0, 0)), 0, gauge_half};

  LoadStage stage;
  stage.kind = LoadStage::Kind::DisplacementRamp;
  stage.name = "diagonal ramp";
  stage.increments = ramp.increments;
  stage.target = ramp.target > 0.0 ? ramp.target : 8.0;
  stage.stop_fraction = ramp.stop_fraction;
  for (int id : device_nodes) stage.prescribed.push_back({id, 0, 1.0});

  BuildResult out;
  out.model = std::move(book.model);
  out.analysis.stages = {stage};
  out.analysis.gauges = gauges;
  out.analysis.reaction_sets = {"device"};
  return out;
}

// ---------------------------------------------------------------------------
// In-plane three-point bending: quarter model.
// x from the mid-span mirror to the free end, y the wallet height (bending
// plane), z from the mid-thickness mirror to the coated face.
// ---------------------------------------------------------------------------

BuildResult build_ib_model(const SampleSpec& spec, const RampConfig& ramp) {
  if (spec.setup != SampleSpec::Setup::IB)
    throw ValidationError("sample.setup", "build_ib_model requires setup IB");
  spec.validate();

  const double half_len = 780.0 / 2.0;
  const double height = 380.0;
  const double half_span = 680.0 / 2.0;
  const double t_half = spec.masonry_thickness / 2.0;
  const double ct = spec.coating_thickness;
  const double cell = 16.5 * spec.refinement;

  const bool twisted_horizontal = spec.yarn_orientation.rfind("twisted", 0) == 0
                                      ? !spec.swap_orientation
                                      : spec.swap_orientation;

  const std::vector<double> xs = lattice_with(half_len, cell, {half_span});
  const std::vector<double> ys = lattice_with(height, cell, {});
  const int nz_m = std::max(1, static_cast<int>(std::llround(t_half / (15.0 * spec.refinement))));
  const std::vector<double> zm = linspace(0.0, t_half, nz_m);
  const std::vector<double> zc =
      spec.coated() ? linspace(t_half, t_half + ct, 2) : std::vector<double>{};

  MeshBook book;
  const int mat_masonry =
      book.material(bulk_material(spec.masonry_label, spec.masonry, spec.elastic_only));
  const int mat_mortar =
      spec.coated()
          ? book.material(bulk_material(spec.mortar_label, spec.mortar, spec.elastic_only))
          : -1;
  const int mat_yarn_h = spec.strengthened()
                             ? book.material(yarn_material(
                                   twisted_horizontal ? "yarn-S-twisted" : "yarn-S-parallel",
                                   twisted_horizontal ? spec.yarn_twisted : spec.yarn_parallel,
                                   spec.elastic_only))
                             : -1;
  const int mat_yarn_v = spec.strengthened()
                             ? book.material(yarn_material(
                                   twisted_horizontal ? "yarn-S-parallel" : "yarn-S-twisted",
                                   twisted_horizontal ? spec.yarn_parallel : spec.yarn_twisted,
                                   spec.elastic_only))
                             : -1;
  const BondLaw law_h = twisted_horizontal ? spec.line_twisted : spec.line_parallel;
  const BondLaw law_v = twisted_horizontal ? spec.line_parallel : spec.line_twisted;
  const double per_h = twisted_horizontal ? spec.perimeter_twisted : spec.perimeter_parallel;
  const double per_v = twisted_horizontal ? spec.perimeter_parallel : spec.perimeter_twisted;
  const BondLaw law_point = twisted_horizontal ? spec.point_twisted : spec.point_parallel;

  for (std::size_t i = 0; i + 1 < xs.size(); ++i)
    for (std::size_t j = 0; j + 1 < ys.size(); ++j) {
      for (int k = 0; k < nz_m; ++k)
        book.box(kMasonry, Vec3(xs[i], ys[j], zm[k]), Vec3(xs[i + 1], ys[j + 1], zm[k + 1]),
                 mat_masonry);
      if (spec.coated()) {
        for (int k = 0; k < 2; ++k)
          book.box(kCoating, Vec3(xs[i], ys[j], zc[k]), Vec3(xs[i + 1], ys[j + 1], zc[k + 1]),
                   mat_mortar);
        book.surface_interface({Vec3(xs[i], ys[j], t_half), Vec3(xs[i + 1], ys[j], t_half),
                                Vec3(xs[i + 1], ys[j + 1], t_half),
                                Vec3(xs[i], ys[j + 1], t_half)},
                               spec.surface_bond);
      }
    }

  double actual_pitch = 0.0;
  if (spec.strengthened()) {
    const double zy = t_half + ct / 2.0;
    const double pitch = spec.mesh_pitch;
    actual_pitch = pitch;  // spacing preserved; offsets snap to the lattice
    const std::vector<double> yarn_ys = snapped_yarn_lines(pitch, cell, height);
    const std::vector<double> yarn_xs = snapped_yarn_lines(pitch, cell, half_len);

    for (double y : yarn_ys)
      for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        const Vec3 a(xs[i], y, zy), b(xs[i + 1], y, zy);
        book.truss(kYarnA, a, b, mat_yarn_h, spec.yarn_area);
        book.line_interface(kYarnA, kCoating, a, b, law_h, per_h);
      }
    for (double x : yarn_xs)
      for (std::size_t j = 0; j + 1 < ys.size(); ++j) {
        const Vec3 a(x, ys[j], zy), b(x, ys[j + 1], zy);
        book.truss(kYarnB, a, b, mat_yarn_v, spec.yarn_area);
        book.line_interface(kYarnB, kCoating, a, b, law_v, per_v);
      }
    for (double x : yarn_xs)
      for (double y : yarn_ys)
        book.point_interface(kYarnA, kYarnB, Vec3(x, y, zy), law_point, Vec3::UnitZ());
  }

  book.fix_plane(0, 0.0);  // mid-span mirror
  book.fix_plane(2, 0.0);  // mid-thickness mirror
  // vertical support line
  for (int id : book.nodes_where([&](const Vec3& x) {
         return std::abs(x[0] - half_span) < 1e-6 && std::abs(x[1]) < 1e-6;
       }))
    book.model.fixed_dofs.push_back({id, 1});

  Model& model = book.model;
  model.reaction_multiplicity = 4.0;
  model.meta.setup = "IB";
  model.meta.sample_id = spec.id();
  model.meta.actual_pitch = actual_pitch;
  model.meta.in_plane_element_size = cell;
  model.meta.coating_thickness = ct;
  model.meta.strengthened = spec.strengthened();

  const std::vector<int> load_nodes = book.nodes_where([&](const Vec3& x) {
    return std::abs(x[0]) < 1e-6 && std::abs(x[1] - height) < 1e-6;
  });
  const std::vector<int> end_face = book.nodes_where([&](const Vec3& x) {
    return std::abs(x[0] - half_len) < 1e-6 && x[2] < t_half + 1e-6;
  });
  model.add_node_set({"load_line", load_nodes});
  model.add_node_set({"support", book.nodes_where([&](const Vec3& x) {
                        return std::abs(x[0] - half_span) < 1e-6 && std::abs(x[1]) < 1e-6;
                      })});
  model.add_node_set({"end_face", end_face});

  GaugeSpec gauges;
  const int intrados = book.node(kMasonry, Vec3(0, 0, 0));
  gauges.deflection.terms = {{intrados, 1, -1.0}};  // positive downward

  std::vector<LoadStage> stages;
  if (spec.pre_compression > 0.0) {
    LoadStage pre;
    pre.kind = LoadStage::Kind::ConstantForces;
    pre.name = "pre-compression";
    pre.increments = ramp.pre_increments;
    // uniform traction over the masonry end face, tributary-area weights
    for (std::size_t j = 0; j + 1 < ys.size(); ++j)
      for (int k = 0; k < nz_m; ++k) {
        const double area = (ys[j + 1] - ys[j]) * (zm[k + 1] - zm[k]);
        const double f = -spec.pre_compression * area / 4.0;
        for (const double y : {ys[j], ys[j + 1]})
          for (const double z : {zm[k], zm[k + 1]})
            pre.forces.push_back({book.node(kMasonry, Vec3(half_len, y, z)), 0, f});
      }
    stages.push_back(pre);
  }

  LoadStage stage;
  stage.kind = LoadStage::Kind::DisplacementRamp;
  stage.name = "mid-span ramp";
  stage.increments = ramp.increments;
  stage.target = ramp.target > 0.0 ? ramp.target : 7.0;
  stage.stop_fraction = ramp.stop_fraction;
  for (int id : load_nodes) stage.prescribed.push_back({id, 1, -1.0});
  stages.push_back(stage);

  BuildResult out;
  out.model = std::move(book.model);
  out.analysis.stages = stages;
  out.analysis.gauges = gauges;
  out.analysis.reaction_sets = {"support", "end_face", "load_line"};
  return out;
}

// ---------------------------------------------------------------------------
// Out-of-plane four-point bending: 66 mm wide wall strip.
// x across the strip, y the wall height, z the thickness; the coated (front)
// face is at z <= 0, loads push from the back toward the front supports.
// ---------------------------------------------------------------------------

BuildResult build_ob_model(const SampleSpec& spec, const RampConfig& ramp) {
  if (spec.setup != SampleSpec::Setup::OB)
    throw ValidationError("sample.setup", "build_ob_model requires setup OB");
  spec.validate();

  const double width = 66.0;
  const double height = 3000.0;
  const double t = spec.masonry_thickness;
  const double ct = spec.coating_thickness;
  const double cell = 16.5 * spec.refinement;

  const bool twisted_vertical = spec.yarn_orientation.rfind("twisted", 0) == 0
                                    ? !spec.swap_orientation
                                    : spec.swap_orientation;

  const int nx = std::max(2, static_cast<int>(std::llround(width / cell)));
  const std::vector<double> xs = linspace(0.0, width, nx);
  const int ny = std::max(4, static_cast<int>(std::llround(height / cell)));
  const std::vector<double> ys = linspace(0.0, height, ny);
  const double ey = height / ny;
  const int nz_m = std::max(2, static_cast<int>(std::llround(t / (15.0 * spec.refinement))));
  const std::vector<double> zm = linspace(0.0, t, nz_m);
  const std::vector<double> zc =
      spec.coated() ? linspace(-ct, 0.0, 2) : std::vector<double>{};
  const double slab_h = ey;

  MeshBook book;
  const int mat_masonry =
      book.material(bulk_material(spec.masonry_label, spec.masonry, spec.elastic_only));
  const int mat_mortar =
      spec.coated()
          ? book.material(bulk_material(spec.mortar_label, spec.mortar, spec.elastic_only))
          : -1;
  const int mat_steel = book.material(steel_material());
  const int mat_yarn_v = spec.strengthened()
                             ? book.material(yarn_material(
                                   twisted_vertical ? "yarn-S-twisted" : "yarn-S-parallel",
                                   twisted_vertical ? spec.yarn_twisted : spec.yarn_parallel,
                                   spec.elastic_only))
                             : -1;
  const int mat_yarn_h = spec.strengthened()
                             ? book.material(yarn_material(
                                   twisted_vertical ? "yarn-S-parallel" : "yarn-S-twisted",
                                   twisted_vertical ? spec.yarn_parallel : spec.yarn_twisted,
                                   spec.elastic_only))
                             : -1;
  const BondLaw law_v = twisted_vertical ? spec.line_twisted : spec.line_parallel;
  const BondLaw law_h = twisted_vertical ? spec.line_parallel : spec.line_twisted;
  const double per_v = twisted_vertical ? spec.perimeter_twisted : spec.perimeter_parallel;
  const double per_h = twisted_vertical ? spec.perimeter_parallel : spec.perimeter_twisted;
  const BondLaw law_point = twisted_vertical ? spec.point_twisted : spec.point_parallel;

  // wall
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j)
      for (int k = 0; k < nz_m; ++k) {
        book.box(kMasonry, Vec3(xs[i], ys[j], zm[k]), Vec3(xs[i + 1], ys[j + 1], zm[k + 1]),
                 mat_masonry);
        if (spec.coated() && k == 0)
          book.surface_interface(
              {Vec3(xs[i], ys[j], 0.0), Vec3(xs[i + 1], ys[j], 0.0),
               Vec3(xs[i + 1], ys[j + 1], 0.0), Vec3(xs[i], ys[j + 1], 0.0)},
              spec.surface_bond);
      }
  // coating (front face)
  if (spec.coated())
    for (int i = 0; i < nx; ++i)
      for (int j = 0; j < ny; ++j)
        for (int k = 0; k < 2; ++k)
          book.box(kCoating, Vec3(xs[i], ys[j], zc[k]), Vec3(xs[i + 1], ys[j + 1], zc[k + 1]),
                   mat_mortar);
  // rigid base slab (one element row below the wall)
  for (int i = 0; i < nx; ++i)
    for (int k = 0; k < nz_m; ++k)
      book.box(kMasonry, Vec3(xs[i], -slab_h, zm[k]), Vec3(xs[i + 1], 0.0, zm[k + 1]),
               mat_steel);

  // yarns
  double actual_pitch = 0.0;
  const int ix_mid = nx / 2;
  if (spec.strengthened()) {
    const double zy = -ct / 2.0;
    const int step = std::max(1, static_cast<int>(std::llround(spec.mesh_pitch / ey)));
    actual_pitch = step * ey;
    // vertical yarn at mid-strip
    const double xm = xs[ix_mid];
    for (int j = 0; j < ny; ++j) {
      const Vec3 a(xm, ys[j], zy), b(xm, ys[j + 1], zy);
      book.truss(kYarnA, a, b, mat_yarn_v, spec.yarn_area);
      book.line_interface(kYarnA, kCoating, a, b, law_v, per_v);
    }
    // horizontal yarn stubs crossing the strip
    for (int j = step; j < ny; j += step) {
      for (int i = 0; i < nx; ++i) {
        const Vec3 a(xs[i], ys[j], zy), b(xs[i + 1], ys[j], zy);
        book.truss(kYarnB, a, b, mat_yarn_h, spec.yarn_area);
        book.line_interface(kYarnB, kCoating, a, b, law_h, per_h);
      }
      book.point_interface(kYarnA, kYarnB, Vec3(xm, ys[j], zy), law_point, Vec3::UnitZ());
    }
  }

  // strip continuity (plane strain in x)
  book.fix_plane(0, 0.0);
  book.fix_plane(0, width);
  // vertical support under the slab at mid-thickness
  const double z_mid = t / 2.0;
  for (int id : book.nodes_where([&](const Vec3& x) {
         return std::abs(x[1] + slab_h) < 1e-6 && std::abs(x[2] - z_mid) < 1e-6;
       }))
    book.model.fixed_dofs.push_back({id, 1});

  // friction supports: bottom on the slab front corner, top on the front face
  const double z_front = spec.coated() ? -ct : 0.0;
  const Vec3 normal(0, 0, -1);  // wall closes the contact moving toward -z
  std::vector<int> bot_nodes, top_nodes;
  for (double x : xs) {
    book.friction_point(kMasonry, Vec3(x, -slab_h, 0.0),
                        {1.0e4, spec.friction_mu, 1.0e-4}, normal);
    bot_nodes.push_back(book.node(kMasonry, Vec3(x, -slab_h, 0.0)));
    const int sheet = spec.coated() ? kCoating : kMasonry;
    book.friction_point(sheet, Vec3(x, height, z_front),
                        {1.0e4, spec.friction_mu, 1.0e-4}, normal);
    top_nodes.push_back(book.node(sheet, Vec3(x, height, z_front)));
  }

  Model& model = book.model;
  model.reaction_multiplicity = 1000.0 / width;
  model.meta.setup = "OB";
  model.meta.sample_id = spec.id();
  model.meta.actual_pitch = actual_pitch;
  model.meta.in_plane_element_size = cell;
  model.meta.coating_thickness = ct;
  model.meta.strengthened = spec.strengthened();

  // load lines at the thirds of the height, back face
  const int j1 = static_cast<int>(std::llround(ny / 3.0));
  const int j2 = static_cast<int>(std::llround(2.0 * ny / 3.0));
  LoadStage rampst;
  rampst.kind = LoadStage::Kind::DisplacementRamp;
  rampst.name = "deflection ramp";
  rampst.deflection_control = true;
  rampst.increments = ramp.increments;
  rampst.target = ramp.target > 0.0 ? ramp.target : 45.0;
  rampst.stop_fraction = ramp.stop_fraction;
  for (int jl : {j1, j2})
    for (int i = 0; i <= nx; ++i) {
      const double w = (i == 0 || i == nx) ? 0.5 : 1.0;
      rampst.load_pattern.push_back(
          {book.node(kMasonry, Vec3(xs[i], ys[jl], t)), 2, -w});
    }

  // net mid-height deflection relative to the support chord
  const int sheet_front = spec.coated() ? kCoating : kMasonry;
  const int mid_node = book.node(sheet_front, Vec3(xs[ix_mid], ys[ny / 2], z_front));
  const int top_ref = top_nodes[top_nodes.size() / 2];
  const int bot_ref = bot_nodes[bot_nodes.size() / 2];
  rampst.control.terms = {{mid_node, 2, -1.0}, {top_ref, 2, 0.5}, {bot_ref, 2, 0.5}};

  GaugeSpec gauges;
  gauges.deflection = rampst.control;

  LoadStage gravity;
  gravity.kind = LoadStage::Kind::Gravity;
  gravity.name = "self weight";
  gravity.increments = ramp.pre_increments;
  gravity.gravity_direction = -Vec3::UnitY();

  model.add_node_set({"base", book.nodes_where([&](const Vec3& x) {
                        return std::abs(x[1] + slab_h) < 1e-6 &&
                               std::abs(x[2] - z_mid) < 1e-6;
                      })});

  BuildResult out;
  out.model = std::move(book.model);
  out.analysis.stages = {gravity, rampst};
  out.analysis.gauges = gauges;
  out.analysis.reaction_sets = {"base"};
  return out;
}

BuildResult build_model(const SampleSpec& spec, const RampConfig& ramp) {
  switch (spec.setup) {
    case SampleSpec::Setup::DC: return build_dc_model(spec, ramp);
    case SampleSpec::Setup::IB: return build_ib_model(spec, ramp);
    case SampleSpec::Setup::OB: return build_ob_model(spec, ramp);
  }
  throw ValidationError("sample.setup", "unknown setup");
}

}  // namespace trmfem
