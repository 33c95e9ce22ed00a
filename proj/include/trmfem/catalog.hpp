#pragma once

#include <string>
#include <vector>

#include "trmfem/interfaces.hpp"
#include "trmfem/materials.hpp"

namespace trmfem {

// Built-in catalog of calibrated materials and interface laws, keyed by the
// sample labels (C5..C25 mortars, B/B2/R/R2/C/C2 masonry, yarn-S-parallel /
// yarn-S-twisted, line/point/surface bond laws).
class Catalog {
 public:
  static const Catalog& builtin();

  bool has_bulk(const std::string& label) const;
  const BulkDPParams& bulk(const std::string& label) const;
  bool is_mortar(const std::string& label) const;

  const YarnDamageParams& yarn(const std::string& label) const;

  // line-twisted, line-parallel, point-twisted, point-parallel, surface
  const BondLaw& bond(const std::string& label) const;
  double line_perimeter(const std::string& label) const;  // equivalent perimeter

  const ElasticParams& steel() const { return steel_; }

  std::vector<std::string> bulk_labels() const;
  std::vector<std::string> bond_labels() const;

  std::string to_json() const;      // material catalog file
  static Catalog from_json(const std::string& text);

 private:
  struct BulkEntry {
    std::string label;
    bool mortar = false;
    BulkDPParams params;
  };
  struct YarnEntry {
    std::string label;
    YarnDamageParams params;
    double area = 0.0;
  };
  struct BondEntry {
    std::string label;
    BondLaw law;
    double perimeter = 0.0;
  };

  std::vector<BulkEntry> bulks_;
  std::vector<YarnEntry> yarns_;
  std::vector<BondEntry> bonds_;
  ElasticParams steel_{200000.0, 0.3, 78.5};

  friend Catalog make_builtin_catalog();

 public:
  double yarn_area(const std::string& label) const;
};

// Masonry tensile strength from the peak diagonal-compression load:
// f_t = alpha * F / (b * t), alpha = 0.5 regular / 0.35 irregular.
double calibrate_ft_from_dc(double f_dc_max_kN, double b_mm, double t_mm, bool regular);

}  // namespace trmfem
