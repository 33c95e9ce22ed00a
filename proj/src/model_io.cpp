#include "trmfem/model_io.hpp"

#include <json.hpp>

namespace trmfem {

namespace {

using nlohmann::json;

json vec3_json(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }
Vec3 vec3_from(const json& j) { return Vec3(j.at(0), j.at(1), j.at(2)); }

json elastic_json(const ElasticParams& p) {
  return {{"E", p.young_modulus}, {"nu", p.poisson}, {"gamma", p.self_weight}};
}
ElasticParams elastic_from(const json& j) {
  return {j.at("E"), j.at("nu"), j.at("gamma")};
}

json bond_json(const BondLaw& b) {
  return {{"tau_max", b.tau_max}, {"tau_f", b.tau_f},
          {"s1", b.s1},           {"s2", b.s2},
          {"s3", b.s3},           {"alpha", b.alpha},
          {"k_n", b.normal_stiffness}, {"k_t", b.tangential_stiffness},
          {"disabled", b.tangential_disabled}};
}
BondLaw bond_from(const json& j) {
  BondLaw b;
  b.tau_max = j.at("tau_max");
  b.tau_f = j.at("tau_f");
  b.s1 = j.at("s1");
  b.s2 = j.at("s2");
  b.s3 = j.at("s3");
  b.alpha = j.at("alpha");
  b.normal_stiffness = j.at("k_n");
  b.tangential_stiffness = j.at("k_t");
  b.tangential_disabled = j.value("disabled", false);
  return b;
}

}  // namespace

std::string model_to_json(const Model& m) {
  json j;
  j["format"] = "trmfem-model";
  j["version"] = 1;
  j["meta"] = {{"setup", m.meta.setup},
               {"sample_id", m.meta.sample_id},
               {"actual_pitch", m.meta.actual_pitch},
               {"in_plane_element_size", m.meta.in_plane_element_size},
               {"coating_thickness", m.meta.coating_thickness},
               {"strengthened", m.meta.strengthened}};
  j["reaction_multiplicity"] = m.reaction_multiplicity;

  json nodes = json::array();
  for (const auto& n : m.nodes) nodes.push_back(vec3_json(n.coords));
  j["nodes"] = nodes;

  json mats = json::array();
  for (const auto& mat : m.materials) {
    json e;
    e["label"] = mat.label;
    switch (mat.kind) {
      case Material::Kind::Elastic:
        e["kind"] = "elastic";
        e["elastic"] = elastic_json(mat.elastic);
        break;
      case Material::Kind::Yarn:
        e["kind"] = "yarn";
        e["elastic"] = elastic_json(mat.yarn.elastic);
        e["eps_0"] = mat.yarn.peak_strain;
        e["eps_r"] = mat.yarn.zero_stress_strain;
        break;
      case Material::Kind::Bulk:
        e["kind"] = "bulk";
        e["elastic"] = elastic_json(mat.bulk.elastic);
        e["f_c"] = mat.bulk.compressive_strength;
        e["f_t"] = mat.bulk.tensile_strength;
        e["psi"] = mat.bulk.dilation_deg;
        e["b_h"] = mat.bulk.hardening_b;
        e["h_p"] = mat.bulk.hardening_offset;
        e["wf_over_h"] = mat.bulk.wf_over_h;
        e["a_soft"] = mat.bulk.a_soft;
        break;
    }
    mats.push_back(e);
  }
  j["materials"] = mats;

  json hexes = json::array();
  for (const auto& e : m.hexes)
    hexes.push_back({{"nodes", e.node_ids}, {"material", e.material_id}});
  j["hex_elements"] = hexes;

  json trusses = json::array();
  for (const auto& e : m.trusses)
    trusses.push_back(
        {{"nodes", e.node_ids}, {"material", e.material_id}, {"area", e.area}});
  j["truss_elements"] = trusses;

  json lines = json::array();
  for (const auto& e : m.line_interfaces)
    lines.push_back({{"truss_nodes", e.truss_node_ids},
                     {"solid_nodes", e.solid_node_ids},
                     {"law", bond_json(e.law)},
                     {"perimeter", e.perimeter}});
  j["line_interfaces"] = lines;

  json points = json::array();
  for (const auto& e : m.point_interfaces)
    points.push_back({{"nodes", e.node_pair},
                      {"law", bond_json(e.law)},
                      {"plane_normal", vec3_json(e.plane_normal)}});
  j["point_interfaces"] = points;

  json surfaces = json::array();
  for (const auto& e : m.surface_interfaces)
    surfaces.push_back({{"mortar_nodes", e.mortar_node_ids},
                        {"masonry_nodes", e.masonry_node_ids},
                        {"law", bond_json(e.law)}});
  j["surface_interfaces"] = surfaces;

  json frictions = json::array();
  for (const auto& e : m.friction_points)
    frictions.push_back({{"nodes", e.node_pair},
                         {"normal_stiffness", e.params.normal_stiffness},
                         {"mu", e.params.friction_coefficient},
                         {"open_factor", e.params.open_stiffness_factor},
                         {"contact_normal", vec3_json(e.contact_normal)}});
  j["friction_points"] = frictions;

  json fixed = json::array();
  for (const auto& f : m.fixed_dofs) fixed.push_back({f.node, f.dof});
  j["fixed_dofs"] = fixed;

  json sets = json::array();
  for (const auto& s : m.node_sets)
    sets.push_back({{"name", s.name}, {"nodes", s.node_ids}});
  j["node_sets"] = sets;

  return j.dump(1);
}

Model model_from_json(const std::string& text) {
  const json j = json::parse(text);
  if (j.value("format", "") != "trmfem-model")
    throw ValidationError("model", "not a trmfem model file");
  Model m;
  m.reaction_multiplicity = j.at("reaction_multiplicity");
  const json& meta = j.at("meta");
  m.meta.setup = meta.at("setup");
  m.meta.sample_id = meta.at("sample_id");
  m.meta.actual_pitch = meta.at("actual_pitch");
  m.meta.in_plane_element_size = meta.at("in_plane_element_size");
  m.meta.coating_thickness = meta.at("coating_thickness");
  m.meta.strengthened = meta.at("strengthened");

  int id = 0;
  for (const auto& n : j.at("nodes")) m.nodes.push_back({id++, vec3_from(n)});

  for (const auto& e : j.at("materials")) {
    Material mat;
    mat.label = e.at("label");
    const std::string kind = e.at("kind");
    if (kind == "elastic") {
      mat.kind = Material::Kind::Elastic;
      mat.elastic = elastic_from(e.at("elastic"));
    } else if (kind == "yarn") {
      mat.kind = Material::Kind::Yarn;
      mat.yarn.elastic = elastic_from(e.at("elastic"));
      mat.yarn.peak_strain = e.at("eps_0");
      mat.yarn.zero_stress_strain = e.at("eps_r");
    } else if (kind == "bulk") {
      mat.kind = Material::Kind::Bulk;
      mat.bulk.elastic = elastic_from(e.at("elastic"));
      mat.bulk.compressive_strength = e.at("f_c");
      mat.bulk.tensile_strength = e.at("f_t");
      mat.bulk.dilation_deg = e.at("psi");
      mat.bulk.hardening_b = e.at("b_h");
      mat.bulk.hardening_offset = e.at("h_p");
      mat.bulk.wf_over_h = e.at("wf_over_h");
      mat.bulk.a_soft = e.at("a_soft");
    } else {
      throw ValidationError("materials", "unknown kind '" + kind + "'");
    }
    m.materials.push_back(mat);
  }

  int eid = 0;
  for (const auto& e : j.at("hex_elements")) {
    HexElement h;
    h.id = eid++;
    const auto& nn = e.at("nodes");
    for (int a = 0; a < 8; ++a) h.node_ids[a] = nn.at(a);
    h.material_id = e.at("material");
    m.hexes.push_back(h);
  }
  eid = 0;
  for (const auto& e : j.at("truss_elements")) {
    TrussElement t;
    t.id = eid++;
    t.node_ids = {e.at("nodes").at(0), e.at("nodes").at(1)};
    t.material_id = e.at("material");
    t.area = e.at("area");
    m.trusses.push_back(t);
  }
  eid = 0;
  for (const auto& e : j.at("line_interfaces")) {
    LineInterfaceElement l;
    l.id = eid++;
    l.truss_node_ids = {e.at("truss_nodes").at(0), e.at("truss_nodes").at(1)};
    l.solid_node_ids = {e.at("solid_nodes").at(0), e.at("solid_nodes").at(1)};
    l.law = bond_from(e.at("law"));
    l.perimeter = e.at("perimeter");
    m.line_interfaces.push_back(l);
  }
  eid = 0;
  for (const auto& e : j.at("point_interfaces")) {
    PointInterfaceElement p;
    p.id = eid++;
    p.node_pair = {e.at("nodes").at(0), e.at("nodes").at(1)};
    p.law = bond_from(e.at("law"));
    p.plane_normal = vec3_from(e.at("plane_normal"));
    m.point_interfaces.push_back(p);
  }
  eid = 0;
  for (const auto& e : j.at("surface_interfaces")) {
    SurfaceInterfaceElement s;
    s.id = eid++;
    for (int a = 0; a < 4; ++a) {
      s.mortar_node_ids[a] = e.at("mortar_nodes").at(a);
      s.masonry_node_ids[a] = e.at("masonry_nodes").at(a);
    }
    s.law = bond_from(e.at("law"));
    m.surface_interfaces.push_back(s);
  }
  eid = 0;
  for (const auto& e : j.at("friction_points")) {
    FrictionPointElement f;
    f.id = eid++;
    f.node_pair = {e.at("nodes").at(0), e.at("nodes").at(1)};
    f.params.normal_stiffness = e.at("normal_stiffness");
    f.params.friction_coefficient = e.at("mu");
    f.params.open_stiffness_factor = e.at("open_factor");
    f.contact_normal = vec3_from(e.at("contact_normal"));
    m.friction_points.push_back(f);
  }
  for (const auto& f : j.at("fixed_dofs")) m.fixed_dofs.push_back({f.at(0), f.at(1)});
  for (const auto& s : j.at("node_sets")) {
    NodeSet set;
    set.name = s.at("name");
    for (int nid : s.at("nodes")) set.node_ids.push_back(nid);
    m.node_sets.push_back(set);
  }
  return m;
}

}  // namespace trmfem
