#include "trmfem/materials.hpp"

#include <algorithm>
#include <cmath>

namespace trmfem {

void ElasticParams::validate(const std::string& path) const {
  if (!(young_modulus > 0.0)) throw ValidationError(path + ".young_modulus", "must be > 0");
  if (!(poisson >= 0.0 && poisson < 0.5))
    throw ValidationError(path + ".poisson", "must be in [0, 0.5)");
  if (!(self_weight >= 0.0)) throw ValidationError(path + ".self_weight", "must be >= 0");
}

void YarnDamageParams::validate(const std::string& path) const {
  elastic.validate(path + ".elastic");
  if (!(peak_strain > 0.0 && peak_strain < zero_stress_strain))
    throw ValidationError(path, "requires 0 < peak_strain < zero_stress_strain");
}

void BulkDPParams::validate(const std::string& path) const {
  elastic.validate(path + ".elastic");
  if (!(compressive_strength > tensile_strength && tensile_strength > 0.0))
    throw ValidationError(path, "requires f_c > f_t > 0 (f_c=" +
                                    std::to_string(compressive_strength) +
                                    ", f_t=" + std::to_string(tensile_strength) + ")");
  if (!(hardening_b >= 0.0 && hardening_b < 1.0))
    throw ValidationError(path + ".hardening_b", "must be in [0, 1)");
  if (!(wf_over_h > 0.0)) throw ValidationError(path + ".wf_over_h", "must be > 0");
  if (!(a_soft > 0.0)) throw ValidationError(path + ".a_soft", "must be > 0");
}

// ---------------------------------------------------------------------------
// Yarn law
// ---------------------------------------------------------------------------

namespace {

double yarn_envelope(const YarnDamageParams& p, double k) {
  const double E = p.elastic.young_modulus;
  if (k <= p.peak_strain) return E * k;
  if (k >= p.zero_stress_strain) return 0.0;
  return E * p.peak_strain * (p.zero_stress_strain - k) /
         (p.zero_stress_strain - p.peak_strain);
}

}  // namespace

YarnResult yarn_update(const YarnDamageParams& p, double strain, const YarnState& s0) {
  if (!std::isfinite(strain)) throw Error("yarn_update: non-finite strain");
  const double E = p.elastic.young_modulus;
  YarnResult r;
  r.state = s0;

  if (strain <= 0.0) {
    // Crack closure: compression is linear elastic at full stiffness.
    r.stress = E * strain;
    r.tangent = E;
  } else {
    const double kappa = std::max(s0.kappa, strain);
    r.state.kappa = kappa;
    const double env = yarn_envelope(p, kappa);
    const double secant = kappa > 0.0 ? env / kappa : E;
    r.stress = secant * strain;
    if (strain >= kappa - 1e-16 && kappa > p.peak_strain) {
      // on the softening envelope
      r.tangent = (kappa < p.zero_stress_strain)
                      ? -E * p.peak_strain / (p.zero_stress_strain - p.peak_strain)
                      : 0.0;
    } else {
      r.tangent = secant;
    }
  }
  r.state.dissipated += dissipation_increment_1d(s0.strain, s0.stress, strain, r.stress);
  r.state.strain = strain;
  r.state.stress = r.stress;
  return r;
}

// ---------------------------------------------------------------------------
// Spectral utilities
// ---------------------------------------------------------------------------

namespace {

inline Vec6 dyad_voigt(const Vec3& a, const Vec3& b) {
  // stress Voigt of sym(a b^T)
  Vec6 v;
  v << a[0] * b[0], a[1] * b[1], a[2] * b[2],
      0.5 * (a[0] * b[1] + a[1] * b[0]),
      0.5 * (a[1] * b[2] + a[2] * b[1]),
      0.5 * (a[0] * b[2] + a[2] * b[0]);
  return v;
}

inline Vec6 weighted(const Vec6& v) {
  Vec6 w = v;
  w[3] *= 2.0;
  w[4] *= 2.0;
  w[5] *= 2.0;
  return w;
}

}  // namespace

Mat6 isotropic_function_derivative(const Eigen::Vector3d& lambda, const Mat3& n,
                                   const Eigen::Vector3d& g, const Mat3& G) {
  Mat6 M = Mat6::Zero();
  Vec6 p[3];
  for (int i = 0; i < 3; ++i) p[i] = dyad_voigt(n.col(i), n.col(i));

  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) M += G(i, j) * p[i] * weighted(p[j]).transpose();

  const double scale = std::max({std::abs(lambda[0]), std::abs(lambda[1]),
                                 std::abs(lambda[2]), 1.0});
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) {
      double theta;
      if (std::abs(lambda[i] - lambda[j]) > 1e-9 * scale) {
        theta = (g[i] - g[j]) / (lambda[i] - lambda[j]);
      } else {
        theta = 0.5 * (G(i, i) - G(i, j) + G(j, j) - G(j, i));
      }
      const Vec6 s = 2.0 * dyad_voigt(n.col(i), n.col(j));  // voigt of n_i n_j + n_j n_i
      M += theta * s * (0.5 * weighted(s)).transpose();
    }
  return M;
}

// ---------------------------------------------------------------------------
// Bulk damage-plasticity
// ---------------------------------------------------------------------------

namespace {

struct PrincipalOutcome {
  Eigen::Vector3d g = Eigen::Vector3d::Zero();        // nominal principal stresses
  Eigen::Vector3d lambda_eff = Eigen::Vector3d::Zero();  // returned effective
  double delta_lambda = 0.0;
  double kappa_t = 0.0;
  double kappa_c = 0.0;
  double d_t = 0.0;
  double d_c = 0.0;
  bool plastic = false;
};

// Yield function on the effective principal stresses with the tensile ones
// capped at f_t: tension is handled by the damage law (effective tension above
// f_t carries no nominal stress), and the cap keeps the cone free of an apex
// while leaving the return contractive for compression-dominated states.
double yield_value(const BulkDPParams& p, const Eigen::Vector3d& lam, double kappa_c) {
  Eigen::Vector3d mu = lam.cwiseMin(p.tensile_strength);
  const double pm = mu.mean();
  const double qm = std::sqrt(1.5 * (mu.array() - pm).square().sum());
  return qm + p.yield_slope() * pm - p.yield_scale() * p.yield_stress(kappa_c);
}

// Full principal-space update: DP return (semi-implicit flow direction from the
// trial state) followed by tension/compression damage on the spectral split.
PrincipalOutcome principal_update(const BulkDPParams& p, const Eigen::Vector3d& lam_tr,
                                  double h, const BulkState& s0) {
  const double E = p.elastic.young_modulus;
  const double nu = p.elastic.poisson;
  const double Gs = E / (2.0 * (1.0 + nu));
  const double K = E / (3.0 * (1.0 - 2.0 * nu));

  PrincipalOutcome out;
  out.kappa_c = s0.kappa_c;

  Eigen::Vector3d lam = lam_tr;
  const double f_tr = yield_value(p, lam_tr, s0.kappa_c);
  const double tol = 1e-11 * p.compressive_strength;
  if (f_tr > tol) {
    const double p_tr = lam_tr.mean();
    const Eigen::Vector3d s = lam_tr.array() - p_tr;
    const double q_tr = std::sqrt(1.5 * s.squaredNorm());
    const double dl_dev_max = q_tr > 0.0 ? q_tr / (3.0 * Gs) : 0.0;
    const double k_vol = K * p.flow_slope();

    // Radial return in principal space: the deviator shrinks towards zero and
    // clamps there, the volumetric part of the non-associated flow continues.
    auto returned = [&](double dl) -> Eigen::Vector3d {
      const double dev = dl_dev_max > 0.0 ? std::max(0.0, 1.0 - dl / dl_dev_max) : 0.0;
      return (dev * s).array() + p_tr - k_vol * dl;
    };
    auto phi = [&](double dl) {
      return yield_value(p, returned(dl), s0.kappa_c + dl);
    };

    double lo = 0.0;
    double hi = q_tr > 0.0 ? f_tr / (3.0 * Gs) : f_tr / std::max(k_vol, 1e-6);
    if (hi <= 0.0) hi = 1e-10;
    int guard = 0;
    while (phi(hi) > 0.0 && guard++ < 300) hi *= 2.0;
    if (guard >= 300)
      throw Error("bulk_update: return mapping failed to bracket the yield surface");
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (phi(mid) > 0.0)
        lo = mid;
      else
        hi = mid;
      if (hi - lo < 1e-16 + 1e-12 * hi) break;
    }
    out.delta_lambda = 0.5 * (lo + hi);
    out.plastic = true;
    lam = returned(out.delta_lambda);
    out.kappa_c = s0.kappa_c + out.delta_lambda;
  }
  out.lambda_eff = lam;

  out.d_c = 1.0 - std::exp(-out.kappa_c / p.crush_kappa_scale(h));
  out.d_c = std::max(out.d_c, s0.d_c);

  // Rankine damage from the maximum principal effective stress.
  const double eps_eq = lam.maxCoeff() / E;
  out.kappa_t = std::max(s0.kappa_t, eps_eq);
  const double eps_t0 = p.tensile_strength / E;
  double d_t = 0.0;
  if (out.kappa_t > eps_t0) {
    const double w_f = p.wf_over_h * h;       // opening at zero traction
    const double deps = w_f / h;              // strain range of the crack band
    const double env = p.tensile_strength *
                       std::max(0.0, 1.0 - (out.kappa_t - eps_t0) / deps);
    d_t = 1.0 - env / (E * out.kappa_t);
  }
  out.d_t = std::max(d_t, s0.d_t);

  for (int i = 0; i < 3; ++i)
    out.g[i] = lam[i] >= 0.0 ? (1.0 - out.d_t) * lam[i] : (1.0 - out.d_c) * lam[i];
  return out;
}

}  // namespace

BulkResult bulk_update(const BulkDPParams& p, const Vec6& strain, double h,
                       const BulkState& s0, TangentMode mode) {
  if (!(h > 0.0)) throw Error("bulk_update: characteristic length must be > 0");
  for (int i = 0; i < 6; ++i)
    if (!std::isfinite(strain[i])) throw Error("bulk_update: non-finite strain");

  const double E = p.elastic.young_modulus;
  const double nu = p.elastic.poisson;
  const Mat6 De = isotropic_elasticity(E, nu);

  if (mode == TangentMode::Initial) {
    BulkResult r = bulk_update(p, strain, h, s0, TangentMode::Consistent);
    r.tangent = De;
    return r;
  }

  const Vec6 eff_v = De * (strain - s0.plastic_strain);
  Eigen::SelfAdjointEigenSolver<Mat3> eig(voigt_to_mat(eff_v));
  const Eigen::Vector3d lam_tr = eig.eigenvalues();
  const Mat3 n = eig.eigenvectors();

  const PrincipalOutcome base = principal_update(p, lam_tr, h, s0);

  BulkResult r;
  r.state = s0;
  r.state.kappa_t = base.kappa_t;
  r.state.kappa_c = base.kappa_c;
  r.state.d_t = base.d_t;
  r.state.d_c = base.d_c;

  Mat3 sigma = Mat3::Zero();
  for (int i = 0; i < 3; ++i)
    sigma += base.g[i] * n.col(i) * n.col(i).transpose();
  r.stress = mat_to_stress_voigt(sigma);

  if (base.plastic) {
    // Reconstruct the plastic strain increment in the (shared) trial eigenbasis;
    // the deviatoric multiplier saturates when the deviator is exhausted.
    const double Gs = E / (2.0 * (1.0 + nu));
    const double p_tr = lam_tr.mean();
    Eigen::Vector3d s = lam_tr.array() - p_tr;
    const double q_tr = std::sqrt(1.5 * s.squaredNorm());
    Eigen::Vector3d dep =
        Eigen::Vector3d::Constant(base.delta_lambda * p.flow_slope() / 3.0);
    if (q_tr > 1e-12 * std::max(E, 1.0)) {
      const double dl_dev = std::min(base.delta_lambda, q_tr / (3.0 * Gs));
      dep += (1.5 * dl_dev / q_tr) * s;
    }
    Mat3 dEp = Mat3::Zero();
    for (int i = 0; i < 3; ++i) dEp += dep[i] * n.col(i) * n.col(i).transpose();
    r.state.plastic_strain = s0.plastic_strain + mat_to_strain_voigt(dEp);
  }

  // Eigenvalue sensitivities: analytic on frozen branches, differenced where
  // the internal variables evolve.
  Mat3 G = Mat3::Zero();
  const bool evolving = (base.plastic || base.kappa_t > s0.kappa_t + 1e-16) &&
                        mode == TangentMode::Consistent;
  if (!evolving) {
    for (int i = 0; i < 3; ++i)
      G(i, i) = base.lambda_eff[i] >= 0.0 ? 1.0 - base.d_t : 1.0 - base.d_c;
  } else {
    const double scale = std::max({std::abs(lam_tr[0]), std::abs(lam_tr[2]),
                                   p.tensile_strength});
    const double delta = 1e-6 * scale;
    for (int j = 0; j < 3; ++j) {
      Eigen::Vector3d lp = lam_tr, lm = lam_tr;
      lp[j] += delta;
      lm[j] -= delta;
      const Eigen::Vector3d gp = principal_update(p, lp, h, s0).g;
      const Eigen::Vector3d gm = principal_update(p, lm, h, s0).g;
      G.col(j) = (gp - gm) / (2.0 * delta);
    }
  }

  r.tangent = isotropic_function_derivative(lam_tr, n, base.g, G) * De;

  r.state.dissipated += dissipation_increment(s0.strain, s0.stress, s0.plastic_strain,
                                              strain, r.stress, r.state.plastic_strain);
  r.state.strain = strain;
  r.state.stress = r.stress;
  return r;
}

double characteristic_length(const HexElement& element, const std::vector<Node>& nodes) {
  const double v = hex_volume(element, nodes);
  if (!(v > 0.0)) throw MeshInversionError(element.id, v);
  return std::cbrt(v);
}

double dissipation_increment(const Vec6& strain_old, const Vec6& stress_old,
                             const Vec6& plastic_old, const Vec6& strain_new,
                             const Vec6& stress_new, const Vec6& plastic_new) {
  const double work = 0.5 * (stress_old + stress_new).dot(strain_new - strain_old);
  const double u_new = 0.5 * stress_new.dot(strain_new - plastic_new);
  const double u_old = 0.5 * stress_old.dot(strain_old - plastic_old);
  return work - (u_new - u_old);
}

double dissipation_increment_1d(double strain_old, double stress_old, double strain_new,
                                double stress_new) {
  const double work = 0.5 * (stress_old + stress_new) * (strain_new - strain_old);
  return work - 0.5 * (stress_new * strain_new - stress_old * strain_old);
}

}  // namespace trmfem
