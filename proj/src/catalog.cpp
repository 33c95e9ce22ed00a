#include "trmfem/catalog.hpp"

#include <json.hpp>

namespace trmfem {

namespace {

BulkDPParams make_bulk(double E_GPa, double nu, double gamma, double fc, double ft,
                       double psi, double bh, double hp, double wf_h, double a_soft) {
  BulkDPParams p;
  p.elastic = {E_GPa * 1000.0, nu, gamma};
  p.compressive_strength = fc;
  p.tensile_strength = ft;
  p.dilation_deg = psi;
  p.hardening_b = bh;
  p.hardening_offset = hp;
  p.wf_over_h = wf_h;
  p.a_soft = a_soft;
  return p;
}

BondLaw make_bond(double kn, double kt, double alpha, double tau_max, double tau_f,
                  double s1, double s2, double s3) {
  BondLaw law;
  law.normal_stiffness = kn;
  law.tangential_stiffness = kt;
  law.alpha = alpha;
  law.tau_max = tau_max;
  law.tau_f = tau_f;
  law.s1 = s1;
  law.s2 = s2;
  law.s3 = s3;
  return law;
}

}  // namespace

Catalog make_builtin_catalog() {
  Catalog c;

  // Mortar coatings
  c.bulks_.push_back({"C8", true, make_bulk(14.4, 0.25, 20.0, 6.29, 1.10, 40, 0.002, 0.0, 0.011, 4.0)});
  c.bulks_.push_back({"C6", true, make_bulk(14.4, 0.25, 20.0, 6.71, 0.80, 40, 0.002, 0.0, 0.013, 4.0)});
  c.bulks_.push_back({"C10", true, make_bulk(14.4, 0.25, 20.0, 10.14, 1.36, 40, 0.002, 0.0, 0.009, 10.0)});
  c.bulks_.push_back({"C25", true, make_bulk(23.4, 0.25, 20.0, 25.74, 2.97, 40, 0.002, 0.0, 0.003, 15.0)});
  c.bulks_.push_back({"C5", true, make_bulk(14.5, 0.25, 20.0, 4.23, 0.55, 40, 0.004, 0.0, 0.012, 4.0)});

  // Masonry
  c.bulks_.push_back({"B", false, make_bulk(4.27, 0.45, 18.0, 5.12, 0.320, 30, 0.003, 0.0, 0.0001, 5.0)});
  c.bulks_.push_back({"B2", false, make_bulk(5.30, 0.45, 18.0, 7.00, 0.440, 30, 0.003, 0.0, 0.0002, 8.0)});
  c.bulks_.push_back({"R", false, make_bulk(2.43, 0.45, 21.0, 2.13, 0.208, 35, 0.006, 0.0, 0.004, 15.0)});
  c.bulks_.push_back({"R2", false, make_bulk(1.42, 0.45, 21.0, 1.20, 0.104, 40, 0.006, 0.0, 0.003, 15.0)});
  c.bulks_.push_back({"C", false, make_bulk(1.26, 0.45, 19.0, 1.04, 0.089, 40, 0.006, 0.0, 0.004, 10.0)});
  c.bulks_.push_back({"C2", false, make_bulk(0.60, 0.45, 19.0, 0.45, 0.036, 40, 0.006, 0.0, 0.003, 10.0)});

  // GFRP yarns, type S
  {
    YarnDamageParams tw;
    tw.elastic = {62900.0, 0.3, 0.0};
    tw.peak_strain = 0.0188;
    tw.zero_stress_strain = 0.0190;
    c.yarns_.push_back({"yarn-S-twisted", tw, 3.8});
    YarnDamageParams pa;
    pa.elastic = {69500.0, 0.3, 0.0};
    pa.peak_strain = 0.0212;
    pa.zero_stress_strain = 0.0220;
    c.yarns_.push_back({"yarn-S-parallel", pa, 3.8});
  }

  // Interfaces. Point-interface peak/residual values are forces in N and k_t
  // is N/mm (they match the mesh intersection strengths K = 0.48/0.55 kN).
  c.bonds_.push_back({"line-twisted", make_bond(1e3, 1e3, 0.4, 3.30, 2.20, 0.1, 0.1, 1.2), 9.57});
  c.bonds_.push_back({"line-parallel", make_bond(1e3, 1e3, 0.4, 2.00, 0.25, 0.1, 0.1, 1.0), 18.00});
  c.bonds_.push_back({"point-twisted", make_bond(0.0, 1e4, 0.4, 458.0, 0.0, 0.5, 1.5, 10.0), 0.0});
  c.bonds_.push_back({"point-parallel", make_bond(0.0, 1e4, 0.4, 550.0, 0.0, 0.5, 0.5, 0.6), 0.0});
  c.bonds_.push_back({"surface", make_bond(1e4, 500.0, 0.55, 1.18, 0.02, 0.04, 0.05, 0.1), 0.0});

  return c;
}

const Catalog& Catalog::builtin() {
  static const Catalog c = make_builtin_catalog();
  return c;
}

bool Catalog::has_bulk(const std::string& label) const {
  for (const auto& e : bulks_)
    if (e.label == label) return true;
  return false;
}

const BulkDPParams& Catalog::bulk(const std::string& label) const {
  for (const auto& e : bulks_)
    if (e.label == label) return e.params;
  throw ValidationError("catalog", "unknown material label '" + label + "'");
}

bool Catalog::is_mortar(const std::string& label) const {
  for (const auto& e : bulks_)
    if (e.label == label) return e.mortar;
  throw ValidationError("catalog", "unknown material label '" + label + "'");
}

const YarnDamageParams& Catalog::yarn(const std::string& label) const {
  for (const auto& e : yarns_)
    if (e.label == label) return e.params;
  throw ValidationError("catalog", "unknown yarn label '" + label + "'");
}

double Catalog::yarn_area(const std::string& label) const {
  for (const auto& e : yarns_)
    if (e.label == label) return e.area;
  throw ValidationError("catalog", "unknown yarn label '" + label + "'");
}

const BondLaw& Catalog::bond(const std::string& label) const {
  for (const auto& e : bonds_)
    if (e.label == label) return e.law;
  throw ValidationError("catalog", "unknown interface label '" + label + "'");
}

double Catalog::line_perimeter(const std::string& label) const {
  for (const auto& e : bonds_)
    if (e.label == label) return e.perimeter;
  throw ValidationError("catalog", "unknown interface label '" + label + "'");
}

std::vector<std::string> Catalog::bulk_labels() const {
  std::vector<std::string> out;
  for (const auto& e : bulks_) out.push_back(e.label);
  return out;
}

std::vector<std::string> Catalog::bond_labels() const {
  std::vector<std::string> out;
  for (const auto& e : bonds_) out.push_back(e.label);
  return out;
}

std::string Catalog::to_json() const {
  nlohmann::json j;
  for (const auto& e : bulks_) {
    nlohmann::json m;
    m["young_modulus_GPa"] = e.params.elastic.young_modulus / 1000.0;
    m["poisson"] = e.params.elastic.poisson;
    m["self_weight_kN_m3"] = e.params.elastic.self_weight;
    m["f_c_MPa"] = e.params.compressive_strength;
    m["f_t_MPa"] = e.params.tensile_strength;
    m["dilation_deg"] = e.params.dilation_deg;
    m["softening_law"] = "linear";
    m["b_h"] = e.params.hardening_b;
    m["h_p"] = e.params.hardening_offset;
    m["wf_over_h"] = e.params.wf_over_h;
    m["a_soft"] = e.params.a_soft;
    m["role"] = e.mortar ? "mortar" : "masonry";
    j["bulk"][e.label] = m;
  }
  for (const auto& e : yarns_) {
    nlohmann::json m;
    m["area_mm2"] = e.area;
    m["young_modulus_GPa"] = e.params.elastic.young_modulus / 1000.0;
    m["poisson"] = e.params.elastic.poisson;
    m["softening_law"] = "linear";
    m["peak_strain_pct"] = e.params.peak_strain * 100.0;
    m["zero_stress_strain_pct"] = e.params.zero_stress_strain * 100.0;
    j["yarn"][e.label] = m;
  }
  for (const auto& e : bonds_) {
    nlohmann::json m;
    if (e.perimeter > 0.0) m["equiv_perimeter_mm"] = e.perimeter;
    m["k_n"] = e.law.normal_stiffness;
    m["k_t"] = e.law.tangential_stiffness;
    m["alpha"] = e.law.alpha;
    m["tau_max"] = e.law.tau_max;
    m["tau_f"] = e.law.tau_f;
    m["s1_mm"] = e.law.s1;
    m["s2_mm"] = e.law.s2;
    m["s3_mm"] = e.law.s3;
    j["interface"][e.label] = m;
  }
  return j.dump(2);
}

Catalog Catalog::from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  Catalog c;
  for (const auto& [label, m] : j.at("bulk").items()) {
    BulkEntry e;
    e.label = label;
    e.mortar = m.at("role").get<std::string>() == "mortar";
    e.params = make_bulk(m.at("young_modulus_GPa"), m.at("poisson"),
                         m.at("self_weight_kN_m3"), m.at("f_c_MPa"), m.at("f_t_MPa"),
                         m.at("dilation_deg"), m.at("b_h"), m.at("h_p"),
                         m.at("wf_over_h"), m.at("a_soft"));
    c.bulks_.push_back(e);
  }
  for (const auto& [label, m] : j.at("yarn").items()) {
    YarnEntry e;
    e.label = label;
    e.area = m.at("area_mm2");
    e.params.elastic = {m.at("young_modulus_GPa").get<double>() * 1000.0,
                        m.at("poisson").get<double>(), 0.0};
    e.params.peak_strain = m.at("peak_strain_pct").get<double>() / 100.0;
    e.params.zero_stress_strain = m.at("zero_stress_strain_pct").get<double>() / 100.0;
    c.yarns_.push_back(e);
  }
  for (const auto& [label, m] : j.at("interface").items()) {
    BondEntry e;
    e.label = label;
    e.perimeter = m.value("equiv_perimeter_mm", 0.0);
    e.law = make_bond(m.at("k_n"), m.at("k_t"), m.at("alpha"), m.at("tau_max"),
                      m.at("tau_f"), m.at("s1_mm"), m.at("s2_mm"), m.at("s3_mm"));
    c.bonds_.push_back(e);
  }
  return c;
}

double calibrate_ft_from_dc(double f_dc_max_kN, double b_mm, double t_mm, bool regular) {
  if (!(f_dc_max_kN > 0.0) || !(b_mm > 0.0) || !(t_mm > 0.0))
    throw ValidationError("calibrate_ft", "inputs must be positive");
  const double alpha = regular ? 0.5 : 0.35;
  return alpha * f_dc_max_kN * 1000.0 / (b_mm * t_mm);
}

}  // namespace trmfem
