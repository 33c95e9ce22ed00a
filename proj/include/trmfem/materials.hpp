#pragma once

#include <string>

#include "trmfem/core.hpp"
#include "trmfem/mesh.hpp"

namespace trmfem {

struct ElasticParams {
  double young_modulus = 0.0;  // MPa
  double poisson = 0.0;
  double self_weight = 0.0;  // kN/m^3

  void validate(const std::string& path) const;
};

// Tensile isotropic damage for GFRP yarns: linear elastic to the peak strain,
// linear descent to zero stress, secant unloading. Compression stays linear
// elastic (yarns are fully embedded; the source data gives no compressive law).
struct YarnDamageParams {
  ElasticParams elastic;   // E = E_w
  double peak_strain = 0.0;        // eps_0
  double zero_stress_strain = 0.0; // eps_r

  void validate(const std::string& path) const;
};

struct YarnState {
  double kappa = 0.0;  // max tensile strain seen, irreversible
  double dissipated = 0.0;  // mJ/mm^3
  double strain = 0.0;      // committed
  double stress = 0.0;
};

struct YarnResult {
  double stress = 0.0;
  double tangent = 0.0;
  YarnState state;
};

YarnResult yarn_update(const YarnDamageParams& p, double strain, const YarnState& s0);

// Reduced damage-plasticity law for mortar coating and masonry.
//
// Tension: Rankine-type isotropic damage driven by the maximum principal
// effective stress, linear softening in stress vs. crack opening with
// w_f = (w_f/h) * h and opening = (kappa_t - f_t/E) * h.
// Compression: Drucker-Prager yield on the compressive part of the effective
// stress, calibrated so uniaxial compressive yield starts at f_c (+ h_p * E);
// linear hardening with plastic modulus b_h * E; non-associated flow with
// dilation angle psi; exponential post-peak damage with rate a_soft, scaled by
// h so the dissipated compressive energy per unit area is mesh-size
// independent.
struct BulkDPParams {
  ElasticParams elastic;
  double compressive_strength = 0.0;  // f_c, MPa
  double tensile_strength = 0.0;      // f_t, MPa
  double dilation_deg = 0.0;          // psi
  double hardening_b = 0.0;           // b_h (b_n in part of the source data)
  double hardening_offset = 0.0;      // h_p
  double wf_over_h = 0.0;             // tensile softening ratio
  double a_soft = 0.0;                // compressive softening rate

  // Internal calibration knobs (not part of the catalog columns).
  double biaxial_ratio = 1.16;          // equibiaxial/uniaxial compressive strength
  double crush_strain_scale = 20.0;     // compressive softening reference multiplier
  double reference_length = 15.9836;    // mm, crack-band reference element size

  void validate(const std::string& path) const;

  double yield_slope() const {  // coefficient on p in F = q + slope*p - k*sigma_y
    return 3.0 * (biaxial_ratio - 1.0) / (2.0 * biaxial_ratio - 1.0);
  }
  double yield_scale() const { return 1.0 - yield_slope() / 3.0; }
  double flow_slope() const { return std::tan(dilation_deg * M_PI / 180.0); }
  double yield_stress(double kappa_c) const {
    return compressive_strength + hardening_offset * elastic.young_modulus +
           hardening_b * elastic.young_modulus * kappa_c;
  }
  // Softening strain scale for the compressive damage variable at element size h.
  double crush_kappa_scale(double h) const {
    return crush_strain_scale * (compressive_strength / elastic.young_modulus) *
           (reference_length / h) / a_soft;
  }
};

struct BulkState {
  Vec6 plastic_strain = Vec6::Zero();  // strain Voigt
  double kappa_t = 0.0;  // max equivalent strain (max principal eff. stress / E)
  double kappa_c = 0.0;  // accumulated plastic multiplier
  double d_t = 0.0;
  double d_c = 0.0;
  double dissipated = 0.0;  // mJ/mm^3
  Vec6 strain = Vec6::Zero();  // committed strain/stress for energy bookkeeping
  Vec6 stress = Vec6::Zero();
};

enum class TangentMode { Consistent, Secant, Initial };

struct BulkResult {
  Vec6 stress = Vec6::Zero();
  Mat6 tangent = Mat6::Zero();
  BulkState state;
};

BulkResult bulk_update(const BulkDPParams& p, const Vec6& strain, double h,
                       const BulkState& s0, TangentMode mode = TangentMode::Consistent);

// h = cube root of element volume.
double characteristic_length(const HexElement& element, const std::vector<Node>& nodes);

// Work done over the step minus the change in recoverable (secant) energy.
double dissipation_increment(const Vec6& strain_old, const Vec6& stress_old,
                             const Vec6& plastic_old, const Vec6& strain_new,
                             const Vec6& stress_new, const Vec6& plastic_new);
double dissipation_increment_1d(double strain_old, double stress_old, double strain_new,
                                double stress_new);

// Derivative of an isotropic tensor function assembled from eigenvalue
// responses g_i and their sensitivities G_ij = d g_i / d lambda_j; returns the
// 6x6 map from a stress-Voigt perturbation of the argument tensor to the
// stress-Voigt perturbation of the function value.
Mat6 isotropic_function_derivative(const Eigen::Vector3d& lambda, const Mat3& eigvecs,
                                   const Eigen::Vector3d& g, const Mat3& G);

}  // namespace trmfem
